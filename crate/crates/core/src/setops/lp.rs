//! Dense two-phase simplex with Bland's rule.
//!
//! Solves `min cᵀx` subject to `Ax = b`, `x ≥ 0`. Sized for hull-distance
//! programs (a few hundred rows, a few thousand columns at most); Bland's
//! rule guarantees termination.

use crate::{Error, Result};

const PIVOT_EPS: f64 = 1e-11;
const FEASIBILITY_EPS: f64 = 1e-9;

pub(crate) struct StandardForm {
    pub c: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: usize,
    width: usize,
    /// `rows + 1` rows of `width` entries; the last row holds reduced costs
    /// and the last column the right-hand side.
    t: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * self.width + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.width - 1)
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let inv = 1.0 / self.at(pr, pc);
        for v in &mut self.t[pr * w..(pr + 1) * w] {
            *v *= inv;
        }
        let pivot_row: Vec<f64> = self.t[pr * w..(pr + 1) * w].to_vec();
        for r in 0..=self.rows {
            if r == pr {
                continue;
            }
            let f = self.at(r, pc);
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[r * w..(r + 1) * w];
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                *v -= f * p;
            }
            row[pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// Runs Bland's rule over the first `allowed` columns.
    fn optimize(&mut self, allowed: usize, budget: &mut usize) -> Result<bool> {
        let obj = self.rows;
        loop {
            let Some(enter) = (0..allowed).find(|&j| self.at(obj, j) < -PIVOT_EPS) else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, enter);
                if a <= PIVOT_EPS {
                    continue;
                }
                let ratio = self.rhs(r) / a;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((lr, lratio)) => {
                        if ratio < lratio - 1e-12
                            || (ratio <= lratio + 1e-12 && self.basis[r] < self.basis[lr])
                        {
                            Some((r, ratio))
                        } else {
                            Some((lr, lratio))
                        }
                    }
                };
            }
            let Some((lr, _)) = leave else {
                return Ok(false);
            };
            if *budget == 0 {
                return Err(Error::SolverFailure {
                    value: -self.rhs(obj),
                    gap: f64::INFINITY,
                    iterations: 0,
                });
            }
            *budget -= 1;
            self.pivot(lr, enter);
        }
    }
}

pub(crate) fn minimize(lp: &StandardForm, max_pivots: usize) -> Result<LpOutcome> {
    let m = lp.a.len();
    let n = lp.c.len();
    debug_assert_eq!(lp.b.len(), m);
    let width = n + m + 1;
    let mut t = vec![0.0; (m + 1) * width];
    for (r, (row, &b)) in lp.a.iter().zip(&lp.b).enumerate() {
        let sign = if b < 0.0 { -1.0 } else { 1.0 };
        for (j, &v) in row.iter().enumerate() {
            t[r * width + j] = sign * v;
        }
        t[r * width + n + r] = 1.0;
        t[r * width + width - 1] = sign * b;
    }
    // Phase I reduced costs: minimise the sum of artificials.
    for j in 0..n {
        let s: f64 = (0..m).map(|r| t[r * width + j]).sum();
        t[m * width + j] = -s;
    }
    let s: f64 = (0..m).map(|r| t[r * width + width - 1]).sum();
    t[m * width + width - 1] = -s;

    let mut tab = Tableau {
        rows: m,
        width,
        t,
        basis: (n..n + m).collect(),
    };
    let mut budget = max_pivots;
    tab.optimize(n, &mut budget)?;
    if -tab.rhs(m) > FEASIBILITY_EPS {
        return Ok(LpOutcome::Infeasible);
    }

    // Drive artificials out of the basis; rows where that is impossible are
    // redundant and get zeroed.
    for r in 0..m {
        if tab.basis[r] < n {
            continue;
        }
        if let Some(j) = (0..n).find(|&j| tab.at(r, j).abs() > PIVOT_EPS) {
            tab.pivot(r, j);
        } else {
            for c in 0..width {
                tab.t[r * width + c] = 0.0;
            }
        }
    }

    // Phase II reduced costs.
    for j in 0..width {
        tab.t[m * width + j] = 0.0;
    }
    tab.t[m * width..m * width + n].copy_from_slice(&lp.c);
    for r in 0..m {
        let bv = tab.basis[r];
        if bv >= n {
            continue;
        }
        let cb = lp.c[bv];
        if cb == 0.0 {
            continue;
        }
        for j in 0..width {
            let v = tab.at(r, j);
            tab.t[m * width + j] -= cb * v;
        }
    }
    if !tab.optimize(n, &mut budget)? {
        return Ok(LpOutcome::Unbounded);
    }
    let mut x = vec![0.0; n];
    for r in 0..m {
        if tab.basis[r] < n {
            x[tab.basis[r]] = tab.rhs(r);
        }
    }
    let value = lp.c.iter().zip(&x).map(|(c, x)| c * x).sum();
    Ok(LpOutcome::Optimal { x, value })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_textbook_program() {
        // min -x - y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6.
        let lp = StandardForm {
            c: vec![-1.0, -1.0, 0.0, 0.0],
            a: vec![vec![1.0, 2.0, 1.0, 0.0], vec![3.0, 1.0, 0.0, 1.0]],
            b: vec![4.0, 6.0],
        };
        match minimize(&lp, 100).unwrap() {
            LpOutcome::Optimal { x, value } => {
                assert!((x[0] - 1.6).abs() < 1e-12);
                assert!((x[1] - 1.2).abs() < 1e-12);
                assert!((value + 2.8).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let infeasible = StandardForm {
            c: vec![1.0, 1.0],
            a: vec![vec![1.0, 1.0], vec![1.0, 1.0]],
            b: vec![1.0, 2.0],
        };
        assert_eq!(minimize(&infeasible, 100).unwrap(), LpOutcome::Infeasible);

        let unbounded = StandardForm {
            c: vec![-1.0, 0.0],
            a: vec![vec![1.0, -1.0]],
            b: vec![1.0],
        };
        assert_eq!(minimize(&unbounded, 100).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn negative_rhs_and_redundant_rows() {
        // x + y = -(-2), duplicated row, min x.
        let lp = StandardForm {
            c: vec![1.0, 0.0],
            a: vec![vec![-1.0, -1.0], vec![1.0, 1.0]],
            b: vec![-2.0, 2.0],
        };
        match minimize(&lp, 100).unwrap() {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(value, 0.0);
                assert!((x[1] - 2.0).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
