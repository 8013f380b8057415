//! Sign balancing, infratype estimates and point selection.
//!
//! `X` has infratype `(p, C)` when every finite family satisfies
//! `min_± ‖Σ ±xᵢ‖ ≤ C (Σ‖xᵢ‖^p)^(1/p)`. The selection routines choose
//! `aᵢ ∈ Aᵢ` tracking targets `bᵢ ∈ conv Aᵢ`, which is how a point of a hull
//! sum is approximated by a point of the finite sum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::Serialize;

use crate::integrate::accumulate;
use crate::partition::{Multifunction, TaggedPartition};
use crate::setops::index::NearestIndex;
use crate::setops::{dist_point_to_hull, PointSet};
use crate::spaces::{SpaceDescriptor, Vector};
use crate::{Error, Result};

/// Largest family for exhaustive sign enumeration (`2^(n-1)` patterns).
pub const MAX_EXACT_VECTORS: usize = 24;

/// Largest `Π|Aᵢ|` for exhaustive selection.
pub const MAX_SELECTIONS: u128 = 1_000_000;

/// Hull-membership tolerance for selection targets.
pub const TARGET_TOL: f64 = 1e-9;

/// Relative slack for power-sum comparisons that can hold with equality.
const POWER_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Balance {
    pub signs: Vec<i8>,
    pub value: f64,
}

fn check_family(xs: &[Vector], space: &SpaceDescriptor) -> Result<()> {
    xs.iter().try_for_each(|x| space.check_vector(x))
}

fn signed_norm(xs: &[Vector], signs: &[i8], space: &SpaceDescriptor) -> f64 {
    let mut s = vec![0.0; space.dim()];
    for (x, &e) in xs.iter().zip(signs) {
        for (a, b) in s.iter_mut().zip(x.coords()) {
            *a += e as f64 * b;
        }
    }
    space.norm_of(&s)
}

/// Global minimum over sign patterns, first sign fixed to `+`. Patterns are
/// walked in Gray-code order; the first minimiser wins.
pub fn sign_balance_exact(xs: &[Vector], space: &SpaceDescriptor) -> Result<Balance> {
    check_family(xs, space)?;
    let n = xs.len();
    if n > MAX_EXACT_VECTORS {
        return Err(Error::ResourceLimit(format!(
            "{n} vectors exceed the exhaustive limit of {MAX_EXACT_VECTORS}; use the greedy balancer"
        )));
    }
    if n == 0 {
        return Ok(Balance {
            signs: Vec::new(),
            value: 0.0,
        });
    }
    let mut signs = vec![1i8; n];
    let mut sum = vec![0.0; space.dim()];
    for x in xs {
        for (a, b) in sum.iter_mut().zip(x.coords()) {
            *a += b;
        }
    }
    let mut best = (space.norm_of(&sum), 0u64);
    let mut current = 0u64;
    for g in 1u64..(1u64 << (n - 1)) {
        let bit = g.trailing_zeros() as usize;
        let i = bit + 1;
        let e = signs[i] as f64;
        for (a, b) in sum.iter_mut().zip(xs[i].coords()) {
            *a -= 2.0 * e * b;
        }
        signs[i] = -signs[i];
        current ^= 1 << bit;
        let v = space.norm_of(&sum);
        if v < best.0 {
            best = (v, current);
        }
    }
    let signs: Vec<i8> = (0..n)
        .map(|i| {
            if i > 0 && best.1 >> (i - 1) & 1 == 1 {
                -1
            } else {
                1
            }
        })
        .collect();
    let value = signed_norm(xs, &signs, space);
    Ok(Balance { signs, value })
}

/// Largest norms first, each sign chosen to shrink the running sum.
pub fn sign_balance_greedy(xs: &[Vector], space: &SpaceDescriptor) -> Result<Balance> {
    check_family(xs, space)?;
    let norms: Vec<f64> = xs.iter().map(|x| space.norm_of(x.coords())).collect();
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));
    let d = space.dim();
    let mut running = vec![0.0; d];
    let mut plus = vec![0.0; d];
    let mut minus = vec![0.0; d];
    let mut signs = vec![1i8; xs.len()];
    for i in order {
        for ((p, m), (r, x)) in plus
            .iter_mut()
            .zip(minus.iter_mut())
            .zip(running.iter().zip(xs[i].coords()))
        {
            *p = r + x;
            *m = r - x;
        }
        if space.norm_of(&plus) <= space.norm_of(&minus) {
            running.copy_from_slice(&plus);
        } else {
            running.copy_from_slice(&minus);
            signs[i] = -1;
        }
    }
    let value = signed_norm(xs, &signs, space);
    Ok(Balance { signs, value })
}

/// `min_± ‖Σ ±xᵢ‖ / (Σ‖xᵢ‖^p)^(1/p)` with zero vectors dropped.
pub fn infratype_ratio(xs: &[Vector], p: f64, space: &SpaceDescriptor) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::invalid(format!(
            "exponent p must be finite and >= 1, got {p}"
        )));
    }
    check_family(xs, space)?;
    let kept: Vec<Vector> = xs
        .iter()
        .filter(|x| space.norm_of(x.coords()) > 0.0)
        .cloned()
        .collect();
    if kept.is_empty() {
        return Err(Error::invalid(
            "infratype ratio needs at least one nonzero vector",
        ));
    }
    let denom = kept
        .iter()
        .map(|x| space.norm_of(x.coords()).powf(p))
        .sum::<f64>()
        .powf(1.0 / p);
    Ok(sign_balance_exact(&kept, space)?.value / denom)
}

/// Lower bound on the best infratype-`p` constant of `space`: the largest
/// ratio over the basis prefixes `{e₁, …, e_k}` followed by `trials` random
/// families. Each trial draws its size uniformly from `1..=n_max`, then
/// standard normal coordinates, vector by vector, from one ChaCha8 stream.
pub fn estimate_infratype_constant(
    space: &SpaceDescriptor,
    p: f64,
    trials: usize,
    n_max: usize,
    seed: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    if !(2..=MAX_EXACT_VECTORS).contains(&n_max) {
        return Err(Error::invalid(format!(
            "nMax must lie in [2, {MAX_EXACT_VECTORS}], got {n_max}"
        )));
    }
    let d = space.dim();
    let mut best = 0.0f64;
    for k in 1..=d.min(n_max) {
        let family: Vec<Vector> = (0..k).map(|i| Vector::basis(d, i)).collect();
        best = best.max(infratype_ratio(&family, p, space)?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let n = rng.random_range(1..=n_max);
        let family: Vec<Vector> = (0..n)
            .map(|_| Vector::new((0..d).map(|_| StandardNormal.sample(&mut rng)).collect()))
            .collect::<Result<_>>()?;
        best = best.max(infratype_ratio(&family, p, space)?);
    }
    Ok(best)
}

/// Sets `Aᵢ`, targets `bᵢ ∈ conv Aᵢ` and the diameters `dᵢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionProblem {
    space: SpaceDescriptor,
    sets: Vec<PointSet>,
    targets: Vec<Vector>,
    diameters: Vec<f64>,
}

impl SelectionProblem {
    pub fn new(space: SpaceDescriptor, sets: Vec<PointSet>, targets: Vec<Vector>) -> Result<Self> {
        if sets.len() != targets.len() {
            return Err(Error::invalid(format!(
                "{} sets but {} targets",
                sets.len(),
                targets.len()
            )));
        }
        for (i, (a, b)) in sets.iter().zip(&targets).enumerate() {
            let h = dist_point_to_hull(&space, b, a, TARGET_TOL / 10.0)?;
            if h.value > TARGET_TOL {
                return Err(Error::invalid(format!(
                    "target {i} lies at distance {} from the hull of its set",
                    h.value
                )));
            }
        }
        let diameters = sets.iter().map(PointSet::diameter).collect();
        Ok(SelectionProblem {
            space,
            sets,
            targets,
            diameters,
        })
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn sets(&self) -> &[PointSet] {
        &self.sets
    }

    pub fn targets(&self) -> &[Vector] {
        &self.targets
    }

    pub fn diameters(&self) -> &[f64] {
        &self.diameters
    }

    /// `(Σ dᵢ^p)^(1/p)`.
    pub fn diameter_norm(&self, p: f64) -> f64 {
        self.diameters
            .iter()
            .map(|d| d.powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }

    /// `C₁ (Σ dᵢ^p)^(1/p)` for the declared infratype of the space.
    pub fn selection_bound(&self) -> Result<f64> {
        let it = self
            .space
            .infratype()
            .ok_or_else(|| Error::Unsupported("space has no declared infratype".into()))?;
        Ok(it.c1() * self.diameter_norm(it.p()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum SelectionMode {
    Greedy,
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    /// Index into each `Aᵢ`.
    pub choices: Vec<usize>,
    pub points: Vec<Vec<f64>>,
    /// `‖Σ (aᵢ - bᵢ)‖`.
    pub deviation: f64,
}

/// Chooses `aᵢ ∈ Aᵢ`. Greedy picks each `aᵢ` to minimise the running
/// deviation; in `ℓ₂` this keeps `‖Σ(aᵢ - bᵢ)‖ ≤ (Σ dᵢ²)^(1/2)`. Exhaustive
/// returns the global minimum.
pub fn select_points(prob: &SelectionProblem, mode: SelectionMode) -> Result<Selection> {
    let d = prob.space.dim();
    let choices = match mode {
        SelectionMode::Greedy => {
            let mut r = vec![0.0; d];
            let mut trial = vec![0.0; d];
            let mut choices = Vec::with_capacity(prob.sets.len());
            for (a, b) in prob.sets.iter().zip(&prob.targets) {
                let mut best = (f64::INFINITY, 0);
                for (k, p) in a.points().enumerate() {
                    for (((t, r), p), b) in trial.iter_mut().zip(&r).zip(p).zip(b.coords()) {
                        *t = r + p - b;
                    }
                    let v = prob.space.norm_of(&trial);
                    if v < best.0 {
                        best = (v, k);
                    }
                }
                for ((r, p), b) in r.iter_mut().zip(a.point(best.1)).zip(b.coords()) {
                    *r += p - b;
                }
                choices.push(best.1);
            }
            choices
        }
        SelectionMode::Exhaustive => {
            let total = prob
                .sets
                .iter()
                .fold(1u128, |acc, a| acc.saturating_mul(a.len() as u128));
            if total > MAX_SELECTIONS {
                return Err(Error::ResourceLimit(format!(
                    "{total} combinations exceed the exhaustive limit of {MAX_SELECTIONS}"
                )));
            }
            let mut search = Exhaustive {
                prob,
                best: f64::INFINITY,
                best_choice: Vec::new(),
                choice: Vec::with_capacity(prob.sets.len()),
            };
            search.run(0, &vec![0.0; d]);
            search.best_choice
        }
    };
    let mut dev = vec![0.0; d];
    let mut points = Vec::with_capacity(choices.len());
    for ((a, b), &k) in prob.sets.iter().zip(&prob.targets).zip(&choices) {
        let p = a.point(k);
        for ((v, x), y) in dev.iter_mut().zip(p).zip(b.coords()) {
            *v += x - y;
        }
        points.push(p.to_vec());
    }
    Ok(Selection {
        choices,
        points,
        deviation: prob.space.norm_of(&dev),
    })
}

struct Exhaustive<'a> {
    prob: &'a SelectionProblem,
    best: f64,
    best_choice: Vec<usize>,
    choice: Vec<usize>,
}

impl Exhaustive<'_> {
    fn run(&mut self, level: usize, partial: &[f64]) {
        if level == self.prob.sets.len() {
            let v = self.prob.space.norm_of(partial);
            if v < self.best {
                self.best = v;
                self.best_choice = self.choice.clone();
            }
            return;
        }
        let b = self.prob.targets[level].coords();
        let mut next = vec![0.0; partial.len()];
        for (k, p) in self.prob.sets[level].points().enumerate() {
            for (((n, q), x), y) in next.iter_mut().zip(partial).zip(p).zip(b) {
                *n = q + x - y;
            }
            self.choice.push(k);
            self.run(level + 1, &next);
            self.choice.pop();
        }
    }
}

/// `(Σ dᵢ^p, (max dᵢ)^(p-1))` for `dᵢ > 0` summing to one.
pub fn power_sum_check(ds: &[f64], p: f64) -> Result<(f64, f64)> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::invalid(format!(
            "exponent p must be finite and > 1, got {p}"
        )));
    }
    if ds.is_empty() || ds.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
        return Err(Error::invalid("weights must be positive and finite"));
    }
    let total: f64 = ds.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::invalid(format!("weights sum to {total}, not 1")));
    }
    let lhs = ds.iter().map(|d| d.powf(p)).sum();
    let max = ds.iter().cloned().fold(0.0, f64::max);
    Ok((lhs, max.powf(p - 1.0)))
}

/// `lhs ≤ rhs` up to rounding.
pub fn power_check_holds(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs * (1.0 + POWER_SLACK)
}

/// One mesh of the quantitative comparison between a finite sum and the
/// corresponding hull sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct HullGapProbe {
    pub mesh: f64,
    /// Largest diameter of the values at the tags.
    pub max_diameter: f64,
    /// `C₁ · M · d(T)^((p-1)/p)` with `M` the largest diameter.
    pub bound: f64,
    /// Largest probed distance from a hull-sum point to the pruned sum.
    pub probed: f64,
    /// Pruning ledger of the finite sum.
    pub ledger: f64,
    /// Largest deviation of a greedy selection tracking a probe.
    pub selection: f64,
    /// `(Σ (|Δᵢ| dᵢ)^p)^(1/p)`, the bound on the constructive selection.
    pub selection_bound: f64,
}

impl HullGapProbe {
    /// Both certified estimates stay under the bound.
    pub fn satisfied(&self) -> bool {
        self.probed + self.ledger <= self.bound && self.selection <= self.bound
    }
}

/// Estimates `ρ̃_H(S(F, T), S(conv F, T))` from below and above.
///
/// Each probe picks `bᵢ ∈ |Δᵢ| conv F(tᵢ)` (the barycentres first, then
/// exponential-weight combinations) and measures `b = Σ bᵢ` against the
/// pruned finite sum. A greedy selection tracking the same `bᵢ` exhibits a
/// genuine point of the finite sum, so its deviation bounds the distance of
/// that probe from above without pruning error.
pub fn hull_gap_probe(
    f: &Multifunction,
    t: &TaggedPartition,
    delta_step: f64,
    probes: usize,
    seed: u64,
    cap: usize,
) -> Result<HullGapProbe> {
    let space = *f.space();
    let it = space.infratype().ok_or_else(|| {
        Error::Unsupported("the hull-gap bound needs a declared infratype".into())
    })?;
    let finite = f.finite_part();
    let acc = accumulate(&finite, t, delta_step, cap)?;
    let s = &acc.sum.base;
    let d = space.dim();
    let values: Vec<PointSet> = t
        .tags()
        .iter()
        .map(|&tag| finite.eval(tag))
        .collect::<Result<_>>()?;
    let lengths: Vec<f64> = t.lengths().collect();
    let max_diameter = values.iter().map(PointSet::diameter).fold(0.0, f64::max);
    let mesh = t.mesh();
    let p = it.p();
    let bound = it.c1() * max_diameter * mesh.powf((p - 1.0) / p);
    let selection_bound = values
        .iter()
        .zip(&lengths)
        .map(|(v, l)| (l * v.diameter()).powf(p))
        .sum::<f64>()
        .powf(1.0 / p);

    let index = NearestIndex::new(s.coords(), d, space.norm());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probed = 0.0f64;
    let mut selection = 0.0f64;
    let scaled: Vec<PointSet> = values
        .iter()
        .zip(&lengths)
        .map(|(v, &l)| crate::setops::scale(l, v))
        .collect();
    for r in 0..probes.max(1) {
        let mut targets = Vec::with_capacity(scaled.len());
        let mut b = vec![0.0; d];
        for v in &scaled {
            let w: Vec<f64> = if r == 0 {
                vec![1.0; v.len()]
            } else {
                (0..v.len()).map(|_| Exp1.sample(&mut rng)).collect()
            };
            let total: f64 = w.iter().sum();
            let mut bi = vec![0.0; d];
            for (wk, pk) in w.iter().zip(v.points()) {
                for (a, x) in bi.iter_mut().zip(pk) {
                    *a += wk / total * x;
                }
            }
            for (a, x) in b.iter_mut().zip(&bi) {
                *a += x;
            }
            targets.push(Vector::new(bi)?);
        }
        probed = probed.max(index.nearest(&b).1);
        let prob = SelectionProblem {
            space,
            sets: scaled.clone(),
            targets,
            diameters: Vec::new(),
        };
        selection = selection.max(select_points(&prob, SelectionMode::Greedy)?.deviation);
    }
    Ok(HullGapProbe {
        mesh,
        max_diameter,
        bound,
        probed,
        ledger: acc.prune_ledger,
        selection,
        selection_bound,
    })
}
