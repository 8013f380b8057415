//! Tagged partitions of `[0, 1]` and the multifunction DSL.
//!
//! Multifunctions are a closed enumeration ([`Body`]) so experiment configs
//! stay serialisable. Each carries a declared uniform norm bound `M` and a
//! declared diameter bound; [`Multifunction::check_declared_bounds`] verifies
//! them by sampling and rejects the config on any violation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::setops::{check_matrix, PointSet};
use crate::spaces::{Norm, SpaceDescriptor, Vector};
use crate::{Error, Result};

/// Tolerance for partition identities (telescoping, tag containment).
pub const PARTITION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum TagRule {
    Left,
    Right,
    Mid,
    /// One uniform draw per interval, left to right, from a ChaCha8 stream.
    Random(u64),
}

impl TagRule {
    fn tags(self, breakpoints: &[f64]) -> Vec<f64> {
        let intervals = breakpoints.windows(2);
        match self {
            TagRule::Left => intervals.map(|w| w[0]).collect(),
            TagRule::Right => intervals.map(|w| w[1]).collect(),
            TagRule::Mid => intervals.map(|w| 0.5 * w[0] + 0.5 * w[1]).collect(),
            TagRule::Random(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                intervals.map(|w| draw_in(&mut rng, w[0], w[1])).collect()
            }
        }
    }
}

fn draw_in(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (lo + rng.random::<f64>() * (hi - lo)).clamp(lo, hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PartitionSpec", into = "PartitionSpec")]
pub struct TaggedPartition {
    breakpoints: Vec<f64>,
    tags: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartitionSpec {
    breakpoints: Vec<f64>,
    tags: Vec<f64>,
}

impl TryFrom<PartitionSpec> for TaggedPartition {
    type Error = Error;

    fn try_from(s: PartitionSpec) -> Result<Self> {
        TaggedPartition::new(s.breakpoints, s.tags)
    }
}

impl From<TaggedPartition> for PartitionSpec {
    fn from(p: TaggedPartition) -> Self {
        PartitionSpec {
            breakpoints: p.breakpoints,
            tags: p.tags,
        }
    }
}

fn check_breakpoints(breakpoints: &[f64]) -> Result<()> {
    if breakpoints.len() < 2 {
        return Err(Error::invalid("a partition needs at least two breakpoints"));
    }
    if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
        return Err(Error::invalid("breakpoints must start at 0 and end at 1"));
    }
    if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("breakpoints must be strictly increasing"));
    }
    Ok(())
}

impl TaggedPartition {
    pub fn new(breakpoints: Vec<f64>, tags: Vec<f64>) -> Result<Self> {
        check_breakpoints(&breakpoints)?;
        if tags.len() + 1 != breakpoints.len() {
            return Err(Error::invalid(format!(
                "{} intervals need {} tags, got {}",
                breakpoints.len() - 1,
                breakpoints.len() - 1,
                tags.len()
            )));
        }
        for (i, (w, &t)) in breakpoints.windows(2).zip(&tags).enumerate() {
            if !(w[0] <= t && t <= w[1]) {
                return Err(Error::invalid(format!(
                    "tag {t} of interval {i} lies outside [{}, {}]",
                    w[0], w[1]
                )));
            }
        }
        Ok(TaggedPartition { breakpoints, tags })
    }

    pub fn from_rule(breakpoints: Vec<f64>, rule: TagRule) -> Result<Self> {
        check_breakpoints(&breakpoints)?;
        let tags = rule.tags(&breakpoints);
        Ok(TaggedPartition { breakpoints, tags })
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn tags(&self) -> &[f64] {
        &self.tags
    }

    /// Interval lengths `|Δᵢ|`.
    pub fn lengths(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        self.breakpoints.windows(2).map(|w| w[1] - w[0])
    }

    /// `d(T) = max |Δᵢ|`.
    pub fn mesh(&self) -> f64 {
        self.lengths().fold(0.0, f64::max)
    }
}

/// `n` equal intervals with tags placed by `rule`.
pub fn uniform_partition(n: usize, rule: TagRule) -> Result<TaggedPartition> {
    if n == 0 {
        return Err(Error::invalid("a uniform partition needs n >= 1"));
    }
    let breakpoints = (0..=n).map(|i| i as f64 / n as f64).collect();
    TaggedPartition::from_rule(breakpoints, rule)
}

/// `n` intervals with uniformly random interior breakpoints and random tags,
/// drawn from one seeded stream (breakpoints first, then tags).
pub fn random_partition(n: usize, seed: u64) -> Result<TaggedPartition> {
    if n == 0 {
        return Err(Error::invalid("a partition needs n >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inner: Vec<f64> = (1..n).map(|_| rng.random::<f64>()).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    let mut breakpoints = Vec::with_capacity(n + 1);
    breakpoints.push(0.0);
    breakpoints.extend(inner.into_iter().filter(|&x| x > 0.0 && x < 1.0));
    breakpoints.push(1.0);
    let tags = breakpoints
        .windows(2)
        .map(|w| draw_in(&mut rng, w[0], w[1]))
        .collect();
    TaggedPartition::new(breakpoints, tags)
}

/// The halved partition `T̃` and the two coarse partitions sharing its tags.
///
/// Every interval `Δₖ` is split at its midpoint; `T̃` gets one tag in each
/// half. `T_a` tags `Δₖ` with the left-half tag and `T_b` with the right-half
/// tag, so `S(F, T̃) = ½ S(F, T_a) + ½ S(F, T_b)` as Minkowski sums.
#[derive(Debug, Clone, PartialEq)]
pub struct HalvedPartition {
    pub fine: TaggedPartition,
    pub left: TaggedPartition,
    pub right: TaggedPartition,
}

pub fn halve_with_tags(breakpoints: &[f64], seed: u64) -> Result<HalvedPartition> {
    check_breakpoints(breakpoints)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fine_breaks = Vec::with_capacity(2 * breakpoints.len() - 1);
    let mut fine_tags = Vec::with_capacity(2 * (breakpoints.len() - 1));
    let mut left_tags = Vec::with_capacity(breakpoints.len() - 1);
    let mut right_tags = Vec::with_capacity(breakpoints.len() - 1);
    fine_breaks.push(breakpoints[0]);
    for w in breakpoints.windows(2) {
        let mid = 0.5 * w[0] + 0.5 * w[1];
        let ta = draw_in(&mut rng, w[0], mid);
        let tb = draw_in(&mut rng, mid, w[1]);
        fine_breaks.push(mid);
        fine_breaks.push(w[1]);
        fine_tags.push(ta);
        fine_tags.push(tb);
        left_tags.push(ta);
        right_tags.push(tb);
    }
    Ok(HalvedPartition {
        fine: TaggedPartition::new(fine_breaks, fine_tags)?,
        left: TaggedPartition::new(breakpoints.to_vec(), left_tags)?,
        right: TaggedPartition::new(breakpoints.to_vec(), right_tags)?,
    })
}

/// Value shapes of a multifunction.
#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Constant(PointSet),
    /// Interior breaks `b₁ < … < b_{k-1}` in `(0, 1)` and `k` sets. `t` takes
    /// the value of the interval `[b_{i-1}, b_i)` containing it; the last
    /// interval is closed.
    PiecewiseConstant {
        breaks: Vec<f64>,
        sets: Vec<PointSet>,
    },
    /// Polynomial curves `g(t) = Σ cₖ tᵏ`, each given by its coefficient
    /// vectors in increasing degree.
    MovingFinite {
        curves: Vec<Vec<Vec<f64>>>,
    },
    /// `conv G` for an inner body `G`. Evaluation returns the inner
    /// generators; hull semantics are applied by the consumer.
    ConvexHullOf(Box<Body>),
    /// The constant `{e₁, …, e_N}` in `ℓ₁^N`, with partition exponent `n`
    /// fixing the witness used by the divergence bound.
    CounterexampleL1 {
        n: u32,
        big_n: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MultifunctionSpec", into = "MultifunctionSpec")]
pub struct Multifunction {
    space: SpaceDescriptor,
    body: Body,
    bound_m: f64,
    diam_bound: f64,
}

impl Multifunction {
    pub fn new(space: SpaceDescriptor, body: Body, bound_m: f64, diam_bound: f64) -> Result<Self> {
        for (name, v) in [("boundM", bound_m), ("diamBound", diam_bound)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        validate_body(&space, &body)?;
        Ok(Multifunction {
            space,
            body,
            bound_m,
            diam_bound,
        })
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn body(&self) -> &Body {
        &self.body
    }

    pub fn bound_m(&self) -> f64 {
        self.bound_m
    }

    pub fn diam_bound(&self) -> f64 {
        self.diam_bound
    }

    /// `conv F`: same generators, hull semantics downstream.
    pub fn convex_hull(&self) -> Multifunction {
        match &self.body {
            Body::ConvexHullOf(_) => self.clone(),
            body => Multifunction {
                body: Body::ConvexHullOf(Box::new(body.clone())),
                ..self.clone()
            },
        }
    }

    pub fn is_hull(&self) -> bool {
        matches!(self.body, Body::ConvexHullOf(_))
    }

    /// Underlying finite-valued multifunction (strips one hull layer).
    pub fn finite_part(&self) -> Multifunction {
        match &self.body {
            Body::ConvexHullOf(inner) => Multifunction {
                body: (**inner).clone(),
                ..self.clone()
            },
            _ => self.clone(),
        }
    }

    /// True when the value does not depend on `t`.
    pub fn is_constant(&self) -> bool {
        fn constant(b: &Body) -> bool {
            match b {
                Body::Constant(_) | Body::CounterexampleL1 { .. } => true,
                Body::ConvexHullOf(inner) => constant(inner),
                Body::PiecewiseConstant { sets, .. } => {
                    sets.windows(2).all(|w| w[0].identical(&w[1]))
                }
                Body::MovingFinite { curves } => curves.iter().all(|c| c.len() <= 1),
            }
        }
        constant(&self.body)
    }

    pub fn eval(&self, t: f64) -> Result<PointSet> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::invalid(format!(
                "evaluation point {t} lies outside [0, 1]"
            )));
        }
        Ok(eval_body(&self.space, &self.body, t))
    }

    /// Samples `samples` random `t` (plus endpoints and breaks) and checks
    /// `‖a‖ ≤ M` for every value point and `diam F(t) ≤ diamBound`.
    pub fn check_declared_bounds(&self, samples: usize, seed: u64) -> Result<()> {
        let mut ts = vec![0.0, 1.0];
        collect_breaks(&self.body, &mut ts);
        if !self.is_constant() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            ts.extend((0..samples).map(|_| rng.random::<f64>()));
        }
        let slack = |b: f64| b * (1.0 + 1e-12) + 1e-12;
        for t in ts {
            let value = self.eval(t)?;
            let m = value.max_norm();
            if m > slack(self.bound_m) {
                return Err(Error::Config(format!(
                    "value at t = {t} has a point of norm {m}, above the declared bound {}",
                    self.bound_m
                )));
            }
            let d = value.diameter();
            if d > slack(self.diam_bound) {
                return Err(Error::Config(format!(
                    "value at t = {t} has diameter {d}, above the declared bound {}",
                    self.diam_bound
                )));
            }
        }
        Ok(())
    }

    /// `P ∘ F` for a row-major `target.dim() × dim` matrix. Declared bounds
    /// scale by an upper bound on the operator norm.
    pub fn pushforward(
        &self,
        matrix: &[Vec<f64>],
        target: SpaceDescriptor,
    ) -> Result<Multifunction> {
        check_matrix(matrix, self.space.dim(), target.dim())?;
        let body = push_body(&self.space, &self.body, matrix, target)?;
        let op = operator_norm_bound(matrix, self.space.norm(), target.norm());
        Multifunction::new(target, body, op * self.bound_m, op * self.diam_bound)
    }
}

/// Upper bound on `‖P‖` from the source norm to the target norm, exact for
/// an `ℓ₁` source.
pub fn operator_norm_bound(matrix: &[Vec<f64>], source: Norm, target: Norm) -> f64 {
    let cols = matrix.first().map_or(0, Vec::len);
    let col_norms = (0..cols).map(|j| {
        let col: Vec<f64> = matrix.iter().map(|r| r[j]).collect();
        target.of(&col)
    });
    match source {
        Norm::L1 => col_norms.fold(0.0, f64::max),
        Norm::L2 => col_norms.map(|c| c * c).sum::<f64>().sqrt(),
        Norm::Linf => col_norms.sum(),
    }
}

fn collect_breaks(body: &Body, out: &mut Vec<f64>) {
    match body {
        Body::PiecewiseConstant { breaks, .. } => out.extend(breaks),
        Body::ConvexHullOf(inner) => collect_breaks(inner, out),
        _ => {}
    }
}

fn validate_body(space: &SpaceDescriptor, body: &Body) -> Result<()> {
    let same = |s: &PointSet| -> Result<()> {
        if s.space().same_geometry(space) {
            Ok(())
        } else {
            Err(Error::invalid(
                "value set lives in a different space than the multifunction",
            ))
        }
    };
    match body {
        Body::Constant(s) => same(s),
        Body::PiecewiseConstant { breaks, sets } => {
            if sets.len() != breaks.len() + 1 {
                return Err(Error::invalid(format!(
                    "{} breaks need {} sets, got {}",
                    breaks.len(),
                    breaks.len() + 1,
                    sets.len()
                )));
            }
            if breaks.iter().any(|&b| !(b > 0.0 && b < 1.0))
                || breaks.windows(2).any(|w| !(w[0] < w[1]))
            {
                return Err(Error::invalid(
                    "breaks must be strictly increasing inside (0, 1)",
                ));
            }
            sets.iter().try_for_each(same)
        }
        Body::MovingFinite { curves } => {
            if curves.is_empty() {
                return Err(Error::invalid(
                    "a moving finite multifunction needs at least one curve",
                ));
            }
            for c in curves {
                if c.is_empty() {
                    return Err(Error::invalid(
                        "every curve needs at least one coefficient vector",
                    ));
                }
                if c.iter().any(|v| v.len() != space.dim()) {
                    return Err(Error::invalid(
                        "curve coefficients must match the space dimension",
                    ));
                }
                if c.iter().flatten().any(|v| !v.is_finite()) {
                    return Err(Error::invalid("curve coefficients must be finite"));
                }
            }
            Ok(())
        }
        Body::ConvexHullOf(inner) => {
            if matches!(**inner, Body::ConvexHullOf(_)) {
                return Err(Error::invalid(
                    "nested convex hulls are redundant; use one layer",
                ));
            }
            validate_body(space, inner)
        }
        Body::CounterexampleL1 { n, big_n } => {
            if space.norm() != Norm::L1 || space.dim() != *big_n {
                return Err(Error::invalid(
                    "the l1 counterexample lives in l1 of dimension N",
                ));
            }
            crate::counterexamples::L1CounterexampleConfig::new(*n, *big_n).map(|_| ())
        }
    }
}

fn eval_body(space: &SpaceDescriptor, body: &Body, t: f64) -> PointSet {
    match body {
        Body::Constant(s) => s.clone(),
        Body::PiecewiseConstant { breaks, sets } => {
            let i = breaks.partition_point(|&b| b <= t);
            sets[i].clone()
        }
        Body::MovingFinite { curves } => {
            let d = space.dim();
            let mut coords = Vec::with_capacity(curves.len() * d);
            for c in curves {
                let mut acc = vec![0.0; d];
                for coef in c.iter().rev() {
                    for (a, k) in acc.iter_mut().zip(coef) {
                        *a = *a * t + k;
                    }
                }
                coords.extend(acc);
            }
            PointSet::from_flat(*space, coords)
        }
        Body::ConvexHullOf(inner) => eval_body(space, inner, t),
        Body::CounterexampleL1 { big_n, .. } => basis_set(*space, *big_n),
    }
}

pub(crate) fn basis_set(space: SpaceDescriptor, n: usize) -> PointSet {
    let mut coords = vec![0.0; n * n];
    for i in 0..n {
        coords[i * n + i] = 1.0;
    }
    PointSet::from_flat(space, coords)
}

fn push_body(
    space: &SpaceDescriptor,
    body: &Body,
    m: &[Vec<f64>],
    target: SpaceDescriptor,
) -> Result<Body> {
    Ok(match body {
        Body::Constant(s) => Body::Constant(s.map_linear(m, target)?),
        Body::PiecewiseConstant { breaks, sets } => Body::PiecewiseConstant {
            breaks: breaks.clone(),
            sets: sets
                .iter()
                .map(|s| s.map_linear(m, target))
                .collect::<Result<_>>()?,
        },
        Body::MovingFinite { curves } => Body::MovingFinite {
            curves: curves
                .iter()
                .map(|c| {
                    c.iter()
                        .map(|coef| {
                            m.iter()
                                .map(|row| row.iter().zip(coef).map(|(a, b)| a * b).sum())
                                .collect()
                        })
                        .collect()
                })
                .collect(),
        },
        Body::ConvexHullOf(inner) => {
            Body::ConvexHullOf(Box::new(push_body(space, inner, m, target)?))
        }
        Body::CounterexampleL1 { big_n, .. } => {
            Body::Constant(basis_set(*space, *big_n).map_linear(m, target)?)
        }
    })
}

// ---------------------------------------------------------------------------
// JSON schema

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct MultifunctionSpec {
    space: SpaceDescriptor,
    #[serde(rename = "boundM")]
    bound_m: f64,
    diam_bound: f64,
    body: BodySpec,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
enum BodySpec {
    Constant {
        points: Vec<Vec<f64>>,
    },
    PiecewiseConstant {
        breaks: Vec<f64>,
        sets: Vec<Vec<Vec<f64>>>,
    },
    MovingFinite {
        curves: Vec<Vec<Vec<f64>>>,
    },
    ConvexHullOf {
        inner: Box<BodySpec>,
    },
    #[serde(rename = "counterexampleL1")]
    CounterexampleL1 {
        n: u32,
        #[serde(rename = "N")]
        big_n: usize,
    },
}

impl BodySpec {
    fn build(self, space: &SpaceDescriptor) -> Result<Body> {
        Ok(match self {
            BodySpec::Constant { points } => Body::Constant(PointSet::from_rows(*space, &points)?),
            BodySpec::PiecewiseConstant { breaks, sets } => Body::PiecewiseConstant {
                breaks,
                sets: sets
                    .iter()
                    .map(|s| PointSet::from_rows(*space, s))
                    .collect::<Result<_>>()?,
            },
            BodySpec::MovingFinite { curves } => Body::MovingFinite { curves },
            BodySpec::ConvexHullOf { inner } => Body::ConvexHullOf(Box::new(inner.build(space)?)),
            BodySpec::CounterexampleL1 { n, big_n } => Body::CounterexampleL1 { n, big_n },
        })
    }

    fn from_body(body: &Body) -> Self {
        match body {
            Body::Constant(s) => BodySpec::Constant {
                points: s.to_rows(),
            },
            Body::PiecewiseConstant { breaks, sets } => BodySpec::PiecewiseConstant {
                breaks: breaks.clone(),
                sets: sets.iter().map(PointSet::to_rows).collect(),
            },
            Body::MovingFinite { curves } => BodySpec::MovingFinite {
                curves: curves.clone(),
            },
            Body::ConvexHullOf(inner) => BodySpec::ConvexHullOf {
                inner: Box::new(Self::from_body(inner)),
            },
            Body::CounterexampleL1 { n, big_n } => BodySpec::CounterexampleL1 {
                n: *n,
                big_n: *big_n,
            },
        }
    }
}

impl TryFrom<MultifunctionSpec> for Multifunction {
    type Error = Error;

    fn try_from(spec: MultifunctionSpec) -> Result<Self> {
        let body = spec.body.build(&spec.space)?;
        Multifunction::new(spec.space, body, spec.bound_m, spec.diam_bound)
    }
}

impl From<Multifunction> for MultifunctionSpec {
    fn from(f: Multifunction) -> Self {
        MultifunctionSpec {
            space: f.space,
            bound_m: f.bound_m,
            diam_bound: f.diam_bound,
            body: BodySpec::from_body(&f.body),
        }
    }
}

/// Convenience for single-point values.
pub fn constant_point(space: SpaceDescriptor, v: Vector) -> Result<Multifunction> {
    let m = space.norm_of(v.coords());
    Multifunction::new(
        space,
        Body::Constant(PointSet::singleton(space, v)?),
        m,
        0.0,
    )
}
