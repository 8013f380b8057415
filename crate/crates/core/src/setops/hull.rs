//! Distance from a point to the convex hull of a finite generator set.
//!
//! `ℓ₂` uses Wolfe's minimum-norm-point iteration: a conditional-gradient
//! (Gilbert) step picks the generator most aligned against the current
//! iterate, then an affine minimisation over the active corral keeps the
//! iterate on the best face. Each step yields a separating-hyperplane lower
//! bound, so the returned gap certifies the value.
//!
//! `ℓ₁` and `ℓ∞` reduce exactly to linear programs over hull coefficients and
//! per-coordinate deviations.

use nalgebra::{DMatrix, DVector};

use super::lp::{self, LpOutcome, StandardForm};
use crate::spaces::Norm;
use crate::{Error, Result};

/// Value with `|value - exact| ≤ gap`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HullDistance {
    pub value: f64,
    pub gap: f64,
}

const WEIGHT_EPS: f64 = 1e-13;

pub(crate) fn distance(norm: Norm, x: &[f64], gens: &[&[f64]], tol: f64) -> Result<HullDistance> {
    match norm {
        Norm::L2 => min_norm_point(x, gens, tol),
        Norm::L1 | Norm::Linf => lp_distance(norm, x, gens),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Wolfe's algorithm on the translated generators `gᵢ - x`.
pub(crate) fn min_norm_point(x: &[f64], gens: &[&[f64]], tol: f64) -> Result<HullDistance> {
    let d = x.len();
    let k = gens.len();
    let p: Vec<f64> = gens
        .iter()
        .flat_map(|g| g.iter().zip(x).map(|(a, b)| a - b))
        .collect();
    let row = |i: usize| &p[i * d..(i + 1) * d];

    let start = (0..k)
        .min_by(|&i, &j| dot(row(i), row(i)).total_cmp(&dot(row(j), row(j))))
        .expect("hull generators are nonempty");
    let mut active = vec![start];
    let mut weights = vec![1.0];
    let mut y = row(start).to_vec();

    let max_iter = 100 * (k + d) + 1000;
    let mut best = HullDistance {
        value: f64::INFINITY,
        gap: f64::INFINITY,
    };
    for iter in 0..max_iter {
        let upper = dot(&y, &y).sqrt();
        if upper <= tol {
            return Ok(HullDistance {
                value: upper,
                gap: upper,
            });
        }
        let (enter, min_dot) = (0..k)
            .map(|i| (i, dot(&y, row(i))))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        let lower = (min_dot / upper).max(0.0);
        let gap = upper - lower;
        if upper < best.value {
            best = HullDistance { value: upper, gap };
        }
        if gap <= tol {
            return Ok(HullDistance { value: upper, gap });
        }
        if active.contains(&enter) {
            // The affine minimiser over the corral already saw this vertex;
            // floating-point stall.
            return Err(Error::SolverFailure {
                value: best.value,
                gap: best.gap,
                iterations: iter,
            });
        }
        active.push(enter);
        weights.push(0.0);

        loop {
            let alpha = affine_minimizer(&p, d, &active);
            if alpha.iter().all(|&a| a > WEIGHT_EPS) {
                weights = alpha;
                break;
            }
            let mut theta = 1.0;
            for (w, a) in weights.iter().zip(&alpha) {
                if *a <= WEIGHT_EPS {
                    let step = w / (w - a);
                    if step < theta {
                        theta = step;
                    }
                }
            }
            for (w, a) in weights.iter_mut().zip(&alpha) {
                *w += theta * (a - *w);
            }
            // Drop the blocking vertex and anything numerically at zero.
            let mut keep_any = false;
            let mut i = 0;
            while i < active.len() {
                if weights[i] <= WEIGHT_EPS {
                    active.remove(i);
                    weights.remove(i);
                } else {
                    keep_any = true;
                    i += 1;
                }
            }
            if !keep_any {
                return Err(Error::SolverFailure {
                    value: best.value,
                    gap: best.gap,
                    iterations: iter,
                });
            }
            let total: f64 = weights.iter().sum();
            for w in &mut weights {
                *w /= total;
            }
            if active.len() == 1 {
                weights = vec![1.0];
                break;
            }
        }
        y.iter_mut().for_each(|v| *v = 0.0);
        for (&i, &w) in active.iter().zip(&weights) {
            for (v, q) in y.iter_mut().zip(row(i)) {
                *v += w * q;
            }
        }
    }
    Err(Error::SolverFailure {
        value: best.value,
        gap: best.gap,
        iterations: max_iter,
    })
}

/// Minimiser of `‖Σ αₖ pₖ‖` over the affine hull of the active points,
/// `Σ αₖ = 1`, via least squares on the differences `pₖ - p₀`.
fn affine_minimizer(p: &[f64], d: usize, active: &[usize]) -> Vec<f64> {
    let s = active.len();
    if s == 1 {
        return vec![1.0];
    }
    let base = &p[active[0] * d..(active[0] + 1) * d];
    let diffs = DMatrix::from_fn(d, s - 1, |r, c| p[active[c + 1] * d + r] - base[r]);
    let rhs = DVector::from_iterator(d, base.iter().map(|v| -v));
    let svd = diffs.svd(true, true);
    let max_sv = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let beta = svd
        .solve(&rhs, 1e-12 * max_sv.max(f64::MIN_POSITIVE))
        .unwrap_or_else(|_| DVector::zeros(s - 1));
    let mut alpha = Vec::with_capacity(s);
    alpha.push(1.0 - beta.iter().sum::<f64>());
    alpha.extend(beta.iter());
    alpha
}

/// `ℓ₁`: min Σ(uⱼ + vⱼ) s.t. Σᵢ λᵢ gᵢⱼ + uⱼ - vⱼ = xⱼ, Σλ = 1.
/// `ℓ∞`: min t s.t. ±(Σᵢ λᵢ gᵢⱼ - xⱼ) ≤ t, Σλ = 1.
fn lp_distance(norm: Norm, x: &[f64], gens: &[&[f64]]) -> Result<HullDistance> {
    let d = x.len();
    let k = gens.len();
    let form = match norm {
        Norm::L1 => {
            let n = k + 2 * d;
            let mut a = Vec::with_capacity(d + 1);
            for j in 0..d {
                let mut r = vec![0.0; n];
                for (i, g) in gens.iter().enumerate() {
                    r[i] = g[j];
                }
                r[k + j] = 1.0;
                r[k + d + j] = -1.0;
                a.push(r);
            }
            let mut simplex = vec![0.0; n];
            simplex[..k].iter_mut().for_each(|v| *v = 1.0);
            a.push(simplex);
            let mut c = vec![0.0; n];
            c[k..].iter_mut().for_each(|v| *v = 1.0);
            let mut b = x.to_vec();
            b.push(1.0);
            StandardForm { c, a, b }
        }
        Norm::Linf => {
            // Columns: λ (k), t, s⁺ (d), s⁻ (d).
            let n = k + 1 + 2 * d;
            let mut a = Vec::with_capacity(2 * d + 1);
            let mut b = Vec::with_capacity(2 * d + 1);
            for j in 0..d {
                let mut up = vec![0.0; n];
                let mut down = vec![0.0; n];
                for (i, g) in gens.iter().enumerate() {
                    up[i] = g[j];
                    down[i] = -g[j];
                }
                up[k] = -1.0;
                down[k] = -1.0;
                up[k + 1 + j] = 1.0;
                down[k + 1 + d + j] = 1.0;
                a.push(up);
                b.push(x[j]);
                a.push(down);
                b.push(-x[j]);
            }
            let mut simplex = vec![0.0; n];
            simplex[..k].iter_mut().for_each(|v| *v = 1.0);
            a.push(simplex);
            b.push(1.0);
            let mut c = vec![0.0; n];
            c[k] = 1.0;
            StandardForm { c, a, b }
        }
        Norm::L2 => unreachable!("l2 uses the min-norm-point route"),
    };
    let pivots = 50 * (form.a.len() + form.c.len()) + 1000;
    match lp::minimize(&form, pivots)? {
        LpOutcome::Optimal { value, .. } => Ok(HullDistance {
            value: value.max(0.0),
            gap: 0.0,
        }),
        // Both programs are feasible and bounded below by zero.
        other => Err(Error::SolverFailure {
            value: f64::NAN,
            gap: f64::INFINITY,
            iterations: match other {
                LpOutcome::Infeasible => 1,
                _ => 0,
            },
        }),
    }
}
