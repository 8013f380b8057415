//! Two explicit constructions.
//!
//! **Hilbert example.** `f(t) = e_t` in `ℓ₂([0, 1])` has orthonormal values,
//! so `‖S(f, T)‖ = (Σ |Δᵢ|²)^(1/2) ≤ √d(T)` and `f` integrates to zero even
//! though it is not measurable. Nothing infinite-dimensional is built: the
//! norm is evaluated in closed form.
//!
//! **`ℓ₁` separation.** `F(t) = {e₁, …, e_N}` in `ℓ₁^N`. `conv F` is the
//! constant probability simplex `Δ_N`, hence integrable. On the uniform
//! partition into `m = 2^(n-1) - 1` parts every point of `S_n = S(F, T_n)` is
//! an average of `m` basis vectors, and the uniform witness `y_n` spread over
//! `K = 2^n - 1` coordinates stays `ℓ₁`-far from all of them. `S_n` has
//! `C(N+m-1, m)` points and is never materialised; distances go through
//! [`SparseAverage`] count vectors instead.

use std::collections::BTreeMap;
use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::partition::{Body, Multifunction, TaggedPartition};
use crate::spaces::{Norm, SpaceDescriptor, Vector};
use crate::{Error, Result};

/// Lower bound the general (non-`ℓ₁`) argument yields: `1/24`.
pub const GENERAL_LOWER_BOUND: f64 = 1.0 / 24.0;

/// Enumeration cap for [`l1_counterexample_bruteforce`].
pub const BRUTEFORCE_LIMIT: u128 = 1_000_000;

/// `‖S(f, T)‖` for `f(t) = e_t`. With `distinct_tags` the closed form
/// `(Σ|Δᵢ|²)^(1/2)` is returned directly; otherwise coefficients of equal
/// tags are merged before squaring.
pub fn hilbert_example_sum_norm(t: &TaggedPartition, distinct_tags: bool) -> f64 {
    if distinct_tags {
        return t.lengths().map(|l| l * l).sum::<f64>().sqrt();
    }
    let mut coef: BTreeMap<u64, f64> = BTreeMap::new();
    for (len, tag) in t.lengths().zip(t.tags()) {
        *coef.entry(tag.to_bits()).or_default() += len;
    }
    coef.values().map(|c| c * c).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct L1CounterexampleConfig {
    n: u32,
    big_n: usize,
}

impl L1CounterexampleConfig {
    pub fn new(n: u32, big_n: usize) -> Result<Self> {
        if !(2..=30).contains(&n) {
            return Err(Error::invalid(format!(
                "partition exponent n must lie in [2, 30], got {n}"
            )));
        }
        let k = (1usize << n) - 1;
        if big_n < k {
            return Err(Error::invalid(format!(
                "N = {big_n} is too small for the witness: need N >= 2^n - 1 = {k}"
            )));
        }
        Ok(L1CounterexampleConfig { n, big_n })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn big_n(&self) -> usize {
        self.big_n
    }

    /// `m = 2^(n-1) - 1` intervals.
    pub fn intervals(&self) -> usize {
        (1usize << (self.n - 1)) - 1
    }

    /// `K = 2^n - 1` witness coordinates.
    pub fn witness_len(&self) -> usize {
        (1usize << self.n) - 1
    }

    /// 0-based witness coordinates: the block `[2^n, 2^(n+1) - 1]` (1-based)
    /// when it fits in `N`, otherwise the last `K` coordinates. `S_n` is
    /// invariant under coordinate permutations, so the choice does not change
    /// the distance.
    pub fn witness_range(&self) -> Range<usize> {
        let k = self.witness_len();
        if self.big_n > 2 * k {
            k..2 * k
        } else {
            self.big_n - k..self.big_n
        }
    }

    pub fn space(&self) -> SpaceDescriptor {
        SpaceDescriptor::l1(self.big_n).expect("N >= 3")
    }

    /// Dense `y_n`.
    pub fn witness(&self) -> Vector {
        let mut y = vec![0.0; self.big_n];
        let k = self.witness_len() as f64;
        for j in self.witness_range() {
            y[j] = 1.0 / k;
        }
        Vector::new(y).expect("finite")
    }
}

/// `(1/m) Σ c_j e_j` with `Σ c_j = m`: one point of a uniform-partition
/// Riemann sum of the basis multifunction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseAverage {
    denominator: usize,
    counts: BTreeMap<usize, usize>,
}

impl SparseAverage {
    pub fn new(denominator: usize, counts: BTreeMap<usize, usize>) -> Result<Self> {
        let total: usize = counts.values().sum();
        if denominator == 0 || total != denominator {
            return Err(Error::invalid(format!(
                "counts sum to {total} but the denominator is {denominator}"
            )));
        }
        let counts = counts.into_iter().filter(|&(_, c)| c > 0).collect();
        Ok(SparseAverage {
            denominator,
            counts,
        })
    }

    pub fn denominator(&self) -> usize {
        self.denominator
    }

    pub fn counts(&self) -> &BTreeMap<usize, usize> {
        &self.counts
    }

    /// `‖y - s‖₁` for a dense `y`.
    pub fn l1_distance(&self, y: &[f64]) -> f64 {
        let m = self.denominator as f64;
        let mut total = 0.0;
        for (j, &yj) in y.iter().enumerate() {
            let s = self.counts.get(&j).map_or(0.0, |&c| c as f64 / m);
            total += (yj - s).abs();
        }
        total
    }
}

/// `min ‖y - s‖₁` over averages `s` of `m` basis vectors when `y` is uniform
/// on `K` coordinates. The cost is separable and convex per coordinate, so
/// spreading the atoms as evenly as possible over the witness block is
/// optimal; mass outside the block never helps. For `m ≤ K` this is
/// `2(K - m)/K`.
pub fn witness_distance(m: usize, k: usize) -> f64 {
    assert!(m >= 1 && k >= 1, "witness_distance needs m, k >= 1");
    let (q, r) = (m / k, m % k);
    let (mf, kf) = (m as f64, k as f64);
    let hi = r as f64 * (1.0 / kf - (q + 1) as f64 / mf).abs();
    let lo = (k - r) as f64 * (1.0 / kf - q as f64 / mf).abs();
    hi + lo
}

/// `F(t) = {e₁, …, e_N}` in `ℓ₁^N` with `M = 1` and diameter bound `2`.
pub fn l1_counterexample_eval(cfg: &L1CounterexampleConfig) -> Multifunction {
    Multifunction::new(
        cfg.space(),
        Body::CounterexampleL1 {
            n: cfg.n,
            big_n: cfg.big_n,
        },
        1.0,
        2.0,
    )
    .expect("validated configuration")
}

/// `dist₁(y_n, S_n)`, a certified lower bound on `ρ_H(S_n, Δ_N)`.
pub fn l1_counterexample_lower_bound(cfg: &L1CounterexampleConfig) -> f64 {
    witness_distance(cfg.intervals(), cfg.witness_len())
}

/// `C(n, k)` saturating in `u128`.
pub fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n.saturating_sub(k));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Exact `dist₁(y_n, S_n)` by enumerating every count vector.
pub fn l1_counterexample_bruteforce(cfg: &L1CounterexampleConfig) -> Result<f64> {
    let m = cfg.intervals();
    let n = cfg.big_n;
    let size = binomial((n + m - 1) as u128, m as u128);
    if size > BRUTEFORCE_LIMIT {
        return Err(Error::ResourceLimit(format!(
            "{size} count vectors exceed the enumeration limit of {BRUTEFORCE_LIMIT}"
        )));
    }
    let y = cfg.witness();
    let mut best = f64::INFINITY;
    let mut counts = vec![0usize; n];
    enumerate_counts(&mut counts, 0, m, &mut |c| {
        let avg = SparseAverage::new(
            m,
            c.iter()
                .enumerate()
                .filter(|(_, &v)| v > 0)
                .map(|(j, &v)| (j, v))
                .collect(),
        )
        .expect("counts sum to m");
        best = best.min(avg.l1_distance(y.coords()));
    });
    Ok(best)
}

fn enumerate_counts(
    counts: &mut [usize],
    pos: usize,
    left: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    if pos + 1 == counts.len() {
        counts[pos] = left;
        visit(counts);
        counts[pos] = 0;
        return;
    }
    for c in (0..=left).rev() {
        counts[pos] = c;
        enumerate_counts(counts, pos + 1, left - c, visit);
    }
    counts[pos] = 0;
}

/// `(1-ε)/(2-ε)`: if `G` is `ε`-orthogonal to `E` then `‖e+g‖ ≥ (1-ε)/(2-ε)·‖g‖`.
pub fn reverse_orthogonality_constant(eps: f64) -> f64 {
    (1.0 - eps) / (2.0 - eps)
}

/// Constant chain of the general-space argument:
/// `(1-ε) · (1-ε)/(2-ε) · ½ · ½`, equal to `1/24` at `ε = ½`.
pub fn general_chain_bound(eps: f64) -> f64 {
    (1.0 - eps) * reverse_orthogonality_constant(eps) * 0.5 * 0.5
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthogonalityCheck {
    /// Largest observed `1 - ‖e+g‖/‖e‖`, floored at zero.
    pub eps_hat: f64,
    pub reverse_constant: f64,
    pub forward_holds: bool,
    pub reverse_holds: bool,
}

/// Samples `e` supported on `block_e` and `g` supported on `block_g` in
/// `ℓ₁^dim` and checks `‖e+g‖ ≥ (1-ε̂)‖e‖` and `‖e+g‖ ≥ (1-ε̂)/(2-ε̂)·‖g‖`.
pub fn eps_orthogonality_check(
    block_e: Range<usize>,
    block_g: Range<usize>,
    samples: usize,
    seed: u64,
) -> Result<OrthogonalityCheck> {
    if block_e.is_empty() || block_g.is_empty() {
        return Err(Error::invalid("coordinate blocks must be nonempty"));
    }
    if block_e.start < block_g.end && block_g.start < block_e.end {
        return Err(Error::invalid("coordinate blocks must be disjoint"));
    }
    let dim = block_e.end.max(block_g.end);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut e = vec![0.0; dim];
        let mut g = vec![0.0; dim];
        for j in block_e.clone() {
            e[j] = StandardNormal.sample(&mut rng);
        }
        for j in block_g.clone() {
            g[j] = StandardNormal.sample(&mut rng);
        }
        pairs.push((e, g));
    }
    let sum = |e: &[f64], g: &[f64]| -> Vec<f64> { e.iter().zip(g).map(|(a, b)| a + b).collect() };
    let mut eps_hat = 0.0f64;
    for (e, g) in &pairs {
        let ne = Norm::L1.of(e);
        if ne > 0.0 {
            eps_hat = eps_hat.max(1.0 - Norm::L1.of(&sum(e, g)) / ne);
        }
    }
    let reverse_constant = reverse_orthogonality_constant(eps_hat);
    let mut forward_holds = true;
    let mut reverse_holds = true;
    for (e, g) in &pairs {
        let s = Norm::L1.of(&sum(e, g));
        forward_holds &= s >= (1.0 - eps_hat) * Norm::L1.of(e);
        reverse_holds &= s >= reverse_constant * Norm::L1.of(g);
    }
    Ok(OrthogonalityCheck {
        eps_hat,
        reverse_constant,
        forward_holds,
        reverse_holds,
    })
}
