//! Set-valued Riemann sums, convergence reports and the experiments built on
//! them.
//!
//! A sum is accumulated left to right with a greedy prune after every term,
//! so the representative carries an additive Hausdorff ledger. Each step
//! contributes its realised covering radius, at most `δ`, so the ledger never
//! exceeds `n·δ` and stays zero while pruning drops nothing.
//!
//! Under hull semantics (`F = conv G`) terms with identical generator sets
//! are merged first: `λ conv A + μ conv A = (λ+μ) conv A`, with each weight
//! formed from telescoping breakpoint differences. A constant convex
//! multifunction therefore sums to exactly `1·A`. After each Minkowski
//! addition non-extreme generators are dropped, which keeps hull sums small.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;

use crate::counterexamples::{binomial, witness_distance};
use crate::partition::{operator_norm_bound, Body, Multifunction, TaggedPartition, PARTITION_TOL};
use crate::setops::{
    self, hausdorff, hausdorff_hulls, hull_vertices, minkowski, prune_tight, scale, HullDistance,
    PointSet, PrunedSet, HULL_REDUCTION_TOL,
};
use crate::spaces::{SpaceDescriptor, Vector};
use crate::stats::loglog_slope;
use crate::{Error, Result};

/// Largest pruned sum kept between additions.
pub const DEFAULT_CARDINALITY_CAP: usize = 200_000;

/// Raw Minkowski products above `cap × PRODUCT_HEADROOM` are refused before
/// they are formed.
const PRODUCT_HEADROOM: usize = 50;

/// Rows inspected by the divergence and Cauchy rules.
const TAIL_ROWS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub prune_delta: f64,
    pub tol: f64,
    pub hull_tol: f64,
    pub cardinality_cap: usize,
    /// Record wall time per row. Off by default so reports are reproducible
    /// byte for byte.
    pub timing: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            prune_delta: 1e-4,
            tol: 1e-6,
            hull_tol: 1e-8,
            cardinality_cap: DEFAULT_CARDINALITY_CAP,
            timing: false,
        }
    }
}

impl IntegrateOptions {
    fn validate(&self) -> Result<()> {
        if !(self.prune_delta >= 0.0 && self.prune_delta.is_finite()) {
            return Err(Error::invalid(format!(
                "prune delta must be finite and >= 0, got {}",
                self.prune_delta
            )));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::invalid(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if !(self.hull_tol > 0.0 && self.hull_tol.is_finite()) {
            return Err(Error::invalid(format!(
                "hull tolerance must be positive, got {}",
                self.hull_tol
            )));
        }
        if self.cardinality_cap == 0 {
            return Err(Error::invalid("cardinality cap must be positive"));
        }
        Ok(())
    }
}

/// A sum with its error split by origin.
#[derive(Debug, Clone)]
pub(crate) struct Accumulated {
    pub sum: PrunedSet,
    /// Sum of pruning radii.
    pub prune_ledger: f64,
    /// Hull movement from dropping near-interior generators.
    pub reduction_error: f64,
}

/// `S(F, T) = Σ |Δᵢ| F(tᵢ)` with the default cardinality cap.
pub fn riemann_sum(f: &Multifunction, t: &TaggedPartition, delta_step: f64) -> Result<PrunedSet> {
    riemann_sum_capped(f, t, delta_step, DEFAULT_CARDINALITY_CAP)
}

/// As [`riemann_sum`] with an explicit cap. Under hull semantics the error
/// bound also covers generator reduction and is stated for the hulls.
pub fn riemann_sum_capped(
    f: &Multifunction,
    t: &TaggedPartition,
    delta_step: f64,
    cap: usize,
) -> Result<PrunedSet> {
    let acc = accumulate(f, t, delta_step, cap)?;
    Ok(PrunedSet {
        base: acc.sum.base,
        err_bound: acc.prune_ledger + acc.reduction_error,
    })
}

pub(crate) fn accumulate(
    f: &Multifunction,
    t: &TaggedPartition,
    delta: f64,
    cap: usize,
) -> Result<Accumulated> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::invalid(format!(
            "prune delta must be finite and >= 0, got {delta}"
        )));
    }
    if f.is_hull() {
        accumulate_hull(f, t, delta, cap)
    } else {
        accumulate_finite(f, t, delta, cap)
    }
}

fn add_term(acc: Option<PointSet>, term: PointSet, cap: usize) -> Result<PointSet> {
    match acc {
        None => Ok(term),
        Some(a) => {
            let product = a.len().saturating_mul(term.len());
            if product > cap.saturating_mul(PRODUCT_HEADROOM) {
                return Err(too_large(product, cap));
            }
            minkowski(&a, &term)
        }
    }
}

fn too_large(size: usize, cap: usize) -> Error {
    Error::ResourceLimit(format!(
        "intermediate sum of {size} points exceeds the cap of {cap}; use a larger prune delta"
    ))
}

fn accumulate_finite(
    f: &Multifunction,
    t: &TaggedPartition,
    delta: f64,
    cap: usize,
) -> Result<Accumulated> {
    let mut acc: Option<PointSet> = None;
    let mut ledger = 0.0;
    for (len, &tag) in t.lengths().zip(t.tags()) {
        let term = scale(len, &f.eval(tag)?);
        let sum = add_term(acc.take(), term, cap)?;
        let pruned = prune_tight(&sum, delta)?;
        ledger += pruned.err_bound;
        if pruned.base.len() > cap {
            return Err(too_large(pruned.base.len(), cap));
        }
        acc = Some(pruned.base);
    }
    let base = acc.expect("partitions have at least one interval");
    Ok(Accumulated {
        sum: PrunedSet {
            base,
            err_bound: ledger,
        },
        prune_ledger: ledger,
        reduction_error: 0.0,
    })
}

fn accumulate_hull(
    f: &Multifunction,
    t: &TaggedPartition,
    delta: f64,
    cap: usize,
) -> Result<Accumulated> {
    // Group intervals by identical generator sets; each group keeps its
    // maximal runs of consecutive intervals so weights telescope.
    let breaks = t.breakpoints();
    let mut groups: Vec<(PointSet, Vec<(usize, usize)>)> = Vec::new();
    let mut lookup: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
    let mut last: Option<usize> = None;
    for (i, &tag) in t.tags().iter().enumerate() {
        let value = f.eval(tag)?;
        let key: Vec<u64> = value.coords().iter().map(|v| v.to_bits()).collect();
        let g = match lookup.get(&key) {
            Some(&g) => g,
            None => {
                groups.push((value, Vec::new()));
                lookup.insert(key, groups.len() - 1);
                groups.len() - 1
            }
        };
        let runs = &mut groups[g].1;
        match runs.last_mut() {
            Some(run) if last == Some(g) && run.1 == i => run.1 = i + 1,
            _ => runs.push((i, i + 1)),
        }
        last = Some(g);
    }

    let mut acc: Option<PointSet> = None;
    let mut ledger = 0.0;
    let mut reduction = 0.0;
    for (set, runs) in groups {
        let weight: f64 = runs.iter().map(|&(a, b)| breaks[b] - breaks[a]).sum();
        let mut term = scale(weight, &set);
        let combine = acc.as_ref().is_some_and(|a| a.len() > 1) && term.len() > 1;
        if combine && term.len() > 2 {
            let reduced = hull_vertices(&term);
            reduction += (term.len() - reduced.len()) as f64 * HULL_REDUCTION_TOL;
            term = reduced;
        }
        let mut sum = add_term(acc.take(), term, cap)?;
        if combine {
            let reduced = hull_vertices(&sum);
            reduction += (sum.len() - reduced.len()) as f64 * HULL_REDUCTION_TOL;
            sum = reduced;
        }
        let pruned = prune_tight(&sum, delta)?;
        ledger += pruned.err_bound;
        if pruned.base.len() > cap {
            return Err(too_large(pruned.base.len(), cap));
        }
        acc = Some(pruned.base);
    }
    let base = acc.expect("partitions have at least one interval");
    Ok(Accumulated {
        sum: PrunedSet {
            base,
            err_bound: ledger + reduction,
        },
        prune_ledger: ledger,
        reduction_error: reduction,
    })
}

/// What a row's distance measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum DistanceKind {
    /// Finite-set Hausdorff distance to the candidate.
    Finite,
    /// Hausdorff distance between hulls.
    Hull,
    /// Distance between consecutive sums, finite sets.
    CauchyFinite,
    /// Distance between consecutive sums, hulls.
    CauchyHull,
    /// Certified lower bound via an explicit witness point.
    WitnessLowerBound,
    /// `ρ_H(P S(F,T), S(P∘F, T))`.
    Pushforward,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportRow {
    pub mesh: f64,
    /// `None` for the first Cauchy row.
    pub distance: Option<f64>,
    /// Pruning ledger of the sum (for pushforward rows, the full budget).
    pub prune_error: f64,
    /// Hull solver tolerance plus generator-reduction error.
    pub solver_error: f64,
    pub cardinality: u64,
    /// Wall time, zero unless timing was requested.
    pub ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "camelCase")]
pub enum Verdict {
    Converged {
        limit: PrunedSet,
        /// Log-log slope of distance against mesh, when defined.
        rate: Option<f64>,
    },
    Diverged {
        #[serde(rename = "lowerBound")]
        lower_bound: f64,
        witness: Option<Vector>,
    },
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConvergenceReport {
    pub distance_kind: DistanceKind,
    pub rows: Vec<ReportRow>,
    pub verdict: Verdict,
}

impl ConvergenceReport {
    /// 0 converged, 2 diverged, 3 inconclusive.
    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            Verdict::Converged { .. } => 0,
            Verdict::Diverged { .. } => 2,
            Verdict::Inconclusive => 3,
        }
    }

    pub fn distances(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.distance).collect()
    }
}

fn check_schedule(schedule: &[TaggedPartition]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::invalid("schedule is empty"));
    }
    for w in schedule.windows(2) {
        if !(w[1].mesh() < w[0].mesh()) {
            return Err(Error::invalid(format!(
                "schedule meshes must be strictly decreasing ({} then {})",
                w[0].mesh(),
                w[1].mesh()
            )));
        }
    }
    Ok(())
}

struct Computed {
    acc: Accumulated,
    ms: u64,
}

fn compute_sums(
    f: &Multifunction,
    schedule: &[TaggedPartition],
    opts: &IntegrateOptions,
) -> Result<Vec<Computed>> {
    let results: Vec<Result<Computed>> = schedule
        .par_iter()
        .map(|t| {
            let start = Instant::now();
            let acc = accumulate(f, t, opts.prune_delta, opts.cardinality_cap)?;
            let ms = if opts.timing {
                start.elapsed().as_millis() as u64
            } else {
                0
            };
            Ok(Computed { acc, ms })
        })
        .collect();
    results.into_iter().collect()
}

/// Distances from every point of `from` to `conv hull`, short-circuiting
/// points that already lie within `tol` of a generator.
fn hull_distances_from(from: &PointSet, hull: &PointSet, tol: f64) -> Result<Vec<HullDistance>> {
    let upper = setops::nearest_distances(hull, from);
    let out: Vec<Result<HullDistance>> = (0..from.len())
        .into_par_iter()
        .map(|i| {
            if upper[i] <= tol {
                return Ok(HullDistance {
                    value: upper[i],
                    gap: upper[i],
                });
            }
            let h = setops::hull_distance_slice(hull, from.point(i), tol)?;
            Ok(HullDistance {
                value: h.value.min(upper[i]),
                gap: h.gap,
            })
        })
        .collect();
    out.into_iter().collect()
}

/// Integrates `f` along `schedule`.
///
/// With a candidate every row reports `ρ_H(S(F, Tₙ), candidate)` (between
/// hulls when `f` is a hull multifunction) and the verdict is converged when
/// the last distance plus its error budget is below `tol`. Divergence needs a
/// candidate point whose distance, less the row budget, exceeds `tol` on each
/// of the last three rows.
///
/// Without a candidate rows hold consecutive-sum distances, a heuristic
/// Cauchy test: converged when the last three are below `tol/2`.
///
/// A non-hull [`Body::CounterexampleL1`] is handled by its witness: every
/// partition must be uniform and rows report the certified lower bound on
/// the distance to the probability simplex.
pub fn integrate(
    f: &Multifunction,
    schedule: &[TaggedPartition],
    candidate: Option<&PointSet>,
    opts: &IntegrateOptions,
) -> Result<ConvergenceReport> {
    opts.validate()?;
    check_schedule(schedule)?;
    if let Some(c) = candidate {
        if !c.space().same_geometry(f.space()) {
            return Err(Error::invalid(
                "candidate lives in a different space than the multifunction",
            ));
        }
    }
    if let Body::CounterexampleL1 { big_n, .. } = f.body() {
        return witness_report(*big_n, schedule, candidate, opts);
    }
    let sums = compute_sums(f, schedule, opts)?;
    match candidate {
        Some(c) => candidate_report(f.is_hull(), schedule, &sums, c, opts),
        None => cauchy_report(f.is_hull(), schedule, sums, opts),
    }
}

fn solver_budget(hull: bool, acc: &Accumulated, opts: &IntegrateOptions) -> f64 {
    if hull {
        opts.hull_tol + acc.reduction_error
    } else {
        0.0
    }
}

fn candidate_report(
    hull: bool,
    schedule: &[TaggedPartition],
    sums: &[Computed],
    candidate: &PointSet,
    opts: &IntegrateOptions,
) -> Result<ConvergenceReport> {
    let mut rows = Vec::with_capacity(sums.len());
    // Per row: lower bound on each candidate point's distance to the exact sum.
    let mut point_bounds: Vec<Vec<f64>> = Vec::with_capacity(sums.len());
    for (t, c) in schedule.iter().zip(sums) {
        let s = &c.acc.sum.base;
        let solver = solver_budget(hull, &c.acc, opts);
        let (distance, bounds) = if hull {
            let to_sum = hull_distances_from(candidate, s, opts.hull_tol)?;
            let back = setops::directed_hull_distance(s, candidate, opts.hull_tol)?;
            let forward = to_sum.iter().map(|h| h.value).fold(0.0, f64::max);
            let bounds = to_sum
                .iter()
                .map(|h| h.value - h.gap - c.acc.prune_ledger - c.acc.reduction_error)
                .collect();
            (forward.max(back), bounds)
        } else {
            let to_sum = setops::nearest_distances(s, candidate);
            let back = setops::one_sided_hausdorff(candidate, s)?;
            let forward = to_sum.iter().cloned().fold(0.0, f64::max);
            let bounds = to_sum.iter().map(|d| d - c.acc.prune_ledger).collect();
            (forward.max(back), bounds)
        };
        point_bounds.push(bounds);
        rows.push(ReportRow {
            mesh: t.mesh(),
            distance: Some(distance),
            prune_error: c.acc.prune_ledger,
            solver_error: solver,
            cardinality: s.len() as u64,
            ms: c.ms,
        });
    }

    let last = rows.last().expect("nonempty schedule");
    let verdict = if last.distance.unwrap() + last.prune_error + last.solver_error < opts.tol {
        let meshes: Vec<f64> = rows.iter().map(|r| r.mesh).collect();
        let ds: Vec<f64> = rows.iter().map(|r| r.distance.unwrap()).collect();
        Verdict::Converged {
            limit: sums.last().unwrap().acc.sum.clone(),
            rate: loglog_slope(&meshes, &ds),
        }
    } else {
        let tail = &point_bounds[point_bounds.len().saturating_sub(TAIL_ROWS)..];
        let best = (0..candidate.len())
            .map(|j| (j, tail.iter().map(|b| b[j]).fold(f64::INFINITY, f64::min)))
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
        match best {
            Some((j, lb)) if lb > opts.tol => Verdict::Diverged {
                lower_bound: lb,
                witness: Some(Vector::new(candidate.point(j).to_vec())?),
            },
            _ => Verdict::Inconclusive,
        }
    };
    let distance_kind = if hull {
        DistanceKind::Hull
    } else {
        DistanceKind::Finite
    };
    Ok(ConvergenceReport {
        distance_kind,
        rows,
        verdict,
    })
}

fn cauchy_report(
    hull: bool,
    schedule: &[TaggedPartition],
    sums: Vec<Computed>,
    opts: &IntegrateOptions,
) -> Result<ConvergenceReport> {
    let mut rows = Vec::with_capacity(sums.len());
    for (i, (t, c)) in schedule.iter().zip(&sums).enumerate() {
        let distance = if i == 0 {
            None
        } else {
            let prev = &sums[i - 1].acc.sum.base;
            let cur = &c.acc.sum.base;
            Some(if hull {
                hausdorff_hulls(prev, cur, opts.hull_tol)?
            } else {
                hausdorff(prev, cur)?
            })
        };
        rows.push(ReportRow {
            mesh: t.mesh(),
            distance,
            prune_error: c.acc.prune_ledger,
            solver_error: solver_budget(hull, &c.acc, opts),
            cardinality: c.acc.sum.base.len() as u64,
            ms: c.ms,
        });
    }
    let ds: Vec<f64> = rows.iter().filter_map(|r| r.distance).collect();
    let settled = ds.len() >= TAIL_ROWS
        && ds[ds.len() - TAIL_ROWS..]
            .iter()
            .all(|&d| d < opts.tol / 2.0);
    let verdict = if settled {
        let meshes: Vec<f64> = rows.iter().skip(1).map(|r| r.mesh).collect();
        Verdict::Converged {
            limit: sums.into_iter().last().unwrap().acc.sum,
            rate: loglog_slope(&meshes, &ds),
        }
    } else {
        Verdict::Inconclusive
    };
    let distance_kind = if hull {
        DistanceKind::CauchyHull
    } else {
        DistanceKind::CauchyFinite
    };
    Ok(ConvergenceReport {
        distance_kind,
        rows,
        verdict,
    })
}

fn witness_report(
    big_n: usize,
    schedule: &[TaggedPartition],
    candidate: Option<&PointSet>,
    opts: &IntegrateOptions,
) -> Result<ConvergenceReport> {
    let mut rows = Vec::with_capacity(schedule.len());
    let mut bounds = Vec::with_capacity(schedule.len());
    let mut witness = None;
    for t in schedule {
        let m = t.len();
        let width = 1.0 / m as f64;
        if t.lengths().any(|l| (l - width).abs() > PARTITION_TOL) {
            return Err(Error::Unsupported(
                "the basis multifunction can only be certified on uniform partitions".into(),
            ));
        }
        let k = (2 * m + 1).min(big_n);
        // Witness: uniform on the last k coordinates. It lies in the simplex,
        // and in conv(candidate) whenever the candidate holds those vertices.
        if let Some(c) = candidate {
            let has = |j: usize| {
                c.points().any(|p| {
                    p.iter()
                        .enumerate()
                        .all(|(i, &v)| v == if i == j { 1.0 } else { 0.0 })
                })
            };
            if !(big_n - k..big_n).all(has) {
                return Err(Error::Unsupported(
                    "witness bound needs the candidate to contain the standard basis vectors"
                        .into(),
                ));
            }
        }
        let bound = witness_distance(m, k);
        let mut y = vec![0.0; big_n];
        y[big_n - k..].iter_mut().for_each(|v| *v = 1.0 / k as f64);
        witness = Some(Vector::new(y)?);
        bounds.push(bound);
        let card = binomial((big_n + m - 1) as u128, m as u128);
        rows.push(ReportRow {
            mesh: t.mesh(),
            distance: Some(bound),
            prune_error: 0.0,
            solver_error: 0.0,
            cardinality: u64::try_from(card).unwrap_or(u64::MAX),
            ms: 0,
        });
    }
    let tail = &bounds[bounds.len().saturating_sub(TAIL_ROWS)..];
    let lb = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    let verdict = if lb > opts.tol {
        Verdict::Diverged {
            lower_bound: lb,
            witness,
        }
    } else {
        Verdict::Inconclusive
    };
    Ok(ConvergenceReport {
        distance_kind: DistanceKind::WitnessLowerBound,
        rows,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvexityCheck {
    /// `ρ_H(A, ½A + ½A)` between finite sets.
    pub finite: f64,
    /// The same distance between hulls, zero up to the solver tolerance.
    pub hull: f64,
}

/// Compares a limit with its midpoint set `½A + ½A`.
pub fn convexity_check(limit: &PrunedSet, tol: f64) -> Result<ConvexityCheck> {
    let a = &limit.base;
    let product = a.len().saturating_mul(a.len());
    if product > DEFAULT_CARDINALITY_CAP * PRODUCT_HEADROOM {
        return Err(too_large(product, DEFAULT_CARDINALITY_CAP));
    }
    let half = scale(0.5, a);
    let mid = minkowski(&half, &half)?;
    Ok(ConvexityCheck {
        finite: hausdorff(a, &mid)?,
        hull: hausdorff_hulls(a, &mid, tol)?,
    })
}

/// Compares `P S(F, T)` with `S(P∘F, T)` along a schedule. Without pruning
/// both sides coincide; with pruning the budget is `‖P‖·ledger + ledger'`.
pub fn pushforward_check(
    f: &Multifunction,
    matrix: &[Vec<f64>],
    target: SpaceDescriptor,
    schedule: &[TaggedPartition],
    opts: &IntegrateOptions,
) -> Result<ConvergenceReport> {
    opts.validate()?;
    check_schedule(schedule)?;
    let pf = f.pushforward(matrix, target)?;
    let op = operator_norm_bound(matrix, f.space().norm(), target.norm());
    let lhs = compute_sums(f, schedule, opts)?;
    let rhs = compute_sums(&pf, schedule, opts)?;
    let hull = f.is_hull();
    let mut rows = Vec::with_capacity(schedule.len());
    let mut worst_excess = f64::NEG_INFINITY;
    for ((t, l), r) in schedule.iter().zip(&lhs).zip(&rhs) {
        let mapped = l.acc.sum.base.map_linear(matrix, target)?;
        let distance = if hull {
            hausdorff_hulls(&mapped, &r.acc.sum.base, opts.hull_tol)?
        } else {
            hausdorff(&mapped, &r.acc.sum.base)?
        };
        let budget = op * l.acc.sum.err_bound + r.acc.sum.err_bound;
        let solver = if hull { opts.hull_tol } else { 0.0 };
        worst_excess = worst_excess.max(distance - budget - solver);
        rows.push(ReportRow {
            mesh: t.mesh(),
            distance: Some(distance),
            prune_error: budget,
            solver_error: solver,
            cardinality: r.acc.sum.base.len() as u64,
            ms: l.ms + r.ms,
        });
    }
    let verdict = if worst_excess < opts.tol {
        let meshes: Vec<f64> = rows.iter().map(|r| r.mesh).collect();
        let ds: Vec<f64> = rows.iter().map(|r| r.distance.unwrap()).collect();
        Verdict::Converged {
            limit: rhs.into_iter().last().unwrap().acc.sum,
            rate: loglog_slope(&meshes, &ds),
        }
    } else {
        Verdict::Diverged {
            lower_bound: worst_excess,
            witness: None,
        }
    };
    Ok(ConvergenceReport {
        distance_kind: DistanceKind::Pushforward,
        rows,
        verdict,
    })
}

/// Random points of `conv gens`: every generator, then convex combinations
/// of up to `dim + 1` generators with exponential weights.
pub(crate) fn hull_probes(gens: &PointSet, probes: usize, seed: u64) -> Vec<Vec<f64>> {
    let d = gens.dim();
    let n = gens.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Vec<f64>> = gens.points().map(|p| p.to_vec()).collect();
    for _ in 0..probes {
        let k = rng.random_range(1..=n.min(d + 1));
        let mut p = vec![0.0; d];
        let mut total = 0.0;
        for _ in 0..k {
            let w: f64 = Exp1.sample(&mut rng);
            let g = gens.point(rng.random_range(0..n));
            for (a, b) in p.iter_mut().zip(g) {
                *a += w * b;
            }
            total += w;
        }
        p.iter_mut().for_each(|v| *v /= total);
        out.push(p);
    }
    out
}

/// `ρ_H(S, conv A)` for finite `S`: exact in the direction `S → conv A`,
/// probed (a lower estimate) in the direction `conv A → S`.
pub fn finite_to_hull_distance(
    s: &PointSet,
    a: &PointSet,
    tol: f64,
    probes: usize,
    seed: u64,
) -> Result<f64> {
    let into_hull = setops::directed_hull_distance(s, a, tol)?;
    let pts = hull_probes(a, probes, seed);
    let flat: Vec<f64> = pts.concat();
    let probe_set = PointSet::from_flat(*a.space(), flat);
    let from_hull = setops::one_sided_hausdorff(s, &probe_set)?;
    Ok(into_hull.max(from_hull))
}

/// Inputs of the finite-rank splitting experiment: a finite-valued `F`, the
/// generators of its (hull) integral and a projection `P` with `Q = I - P`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SplitReport {
    /// `ρ_H(conv S, conv A)`.
    pub hull_error: f64,
    /// `ρ_H(P S, conv P A)`, probed.
    pub projected_error: f64,
    /// `ρ_H(conv Q S, conv Q A)`.
    pub complement_error: f64,
    /// `sup_{a ∈ A} ‖Q a‖`.
    pub tail: f64,
    /// Largest of the four estimates.
    pub eps: f64,
    /// `ρ_H(S, conv A)`, probed.
    pub distance: f64,
    pub bound: f64,
    pub satisfied: bool,
}

/// Splits the distance from a Riemann sum to the integral along a
/// projection and checks `ρ_H(S, A) ≤ 4ε` with `ε` the largest of the
/// hull, projected, complement and tail estimates.
pub fn finite_rank_split(
    f: &Multifunction,
    integral: &PointSet,
    projection: &[Vec<f64>],
    t: &TaggedPartition,
    hull_tol: f64,
    probes: usize,
    seed: u64,
) -> Result<SplitReport> {
    let space = *f.space();
    let d = space.dim();
    setops::check_matrix(projection, d, d)?;
    if !integral.space().same_geometry(&space) {
        return Err(Error::invalid(
            "integral lives in a different space than the multifunction",
        ));
    }
    let complement: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| if i == j { 1.0 } else { 0.0 } - projection[i][j])
                .collect()
        })
        .collect();
    let s = riemann_sum(&f.finite_part(), t, 0.0)?.base;
    let hull_error = hausdorff_hulls(&s, integral, hull_tol)?;
    let ps = s.map_linear(projection, space)?;
    let pa = integral.map_linear(projection, space)?;
    let projected_error = finite_to_hull_distance(&ps, &pa, hull_tol, probes, seed)?;
    let qs = s.map_linear(&complement, space)?;
    let qa = integral.map_linear(&complement, space)?;
    let complement_error = hausdorff_hulls(&qs, &qa, hull_tol)?;
    let tail = qa.max_norm();
    let eps = hull_error
        .max(projected_error)
        .max(complement_error)
        .max(tail);
    let distance = finite_to_hull_distance(&s, integral, hull_tol, probes, seed)?;
    let bound = 4.0 * eps;
    Ok(SplitReport {
        hull_error,
        projected_error,
        complement_error,
        tail,
        eps,
        distance,
        bound,
        satisfied: distance <= bound + hull_tol,
    })
}
