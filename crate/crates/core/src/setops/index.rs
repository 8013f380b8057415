//! Sorted-projection indexes for exact nearest-neighbour queries and greedy
//! nets.
//!
//! Every point is keyed by `⟨w, p⟩` for a fixed direction `w` whose dual norm
//! is one, so `|⟨w, p⟩ - ⟨w, q⟩| ≤ ‖p - q‖`. A projection gap larger than the
//! current radius rules a point out without computing its distance.

use std::collections::BTreeMap;

use ordered_float::OrderedFloat;

use crate::spaces::Norm;

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Fixed direction with `dual(w) = 1`. Weights are distinct and positive so
/// coordinate-aligned clouds still spread out along the key.
pub(crate) fn projection_weights(dim: usize, norm: Norm) -> Vec<f64> {
    let mut w: Vec<f64> = (0..dim)
        .map(|i| 0.5 + ((i as f64 + 1.0) * GOLDEN).fract())
        .collect();
    let scale = norm.dual().of(&w);
    for x in &mut w {
        *x /= scale;
    }
    w
}

#[inline]
fn project(w: &[f64], p: &[f64]) -> f64 {
    w.iter().zip(p).map(|(a, b)| a * b).sum()
}

/// Slack covering rounding in the projection itself.
#[inline]
fn slack(key: f64) -> f64 {
    1e-13 * (1.0 + key.abs())
}

/// Static index over a flat coordinate buffer.
pub(crate) struct NearestIndex<'a> {
    coords: &'a [f64],
    dim: usize,
    norm: Norm,
    weights: Vec<f64>,
    keys: Vec<f64>,
    order: Vec<usize>,
}

impl<'a> NearestIndex<'a> {
    pub(crate) fn new(coords: &'a [f64], dim: usize, norm: Norm) -> Self {
        let weights = projection_weights(dim, norm);
        let raw: Vec<f64> = coords
            .chunks_exact(dim)
            .map(|p| project(&weights, p))
            .collect();
        let mut order: Vec<usize> = (0..raw.len()).collect();
        order.sort_by(|&i, &j| raw[i].total_cmp(&raw[j]).then(i.cmp(&j)));
        let keys = order.iter().map(|&i| raw[i]).collect();
        NearestIndex {
            coords,
            dim,
            norm,
            weights,
            keys,
            order,
        }
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Index and distance of the nearest stored point. Ties resolve to the
    /// first one examined, which is deterministic for a fixed input.
    pub(crate) fn nearest(&self, q: &[f64]) -> (usize, f64) {
        let key = project(&self.weights, q);
        let pos = self.keys.partition_point(|&k| k < key);
        let mut left = pos;
        let mut right = pos;
        let mut best = (usize::MAX, f64::INFINITY);
        let eps = slack(key);
        loop {
            let dl = if left > 0 {
                key - self.keys[left - 1]
            } else {
                f64::INFINITY
            };
            let dr = if right < self.keys.len() {
                self.keys[right] - key
            } else {
                f64::INFINITY
            };
            let (gap, take_left) = if dl <= dr { (dl, true) } else { (dr, false) };
            if !gap.is_finite() || gap > best.1 + eps {
                break;
            }
            let slot = if take_left {
                left -= 1;
                left
            } else {
                right += 1;
                right - 1
            };
            let idx = self.order[slot];
            let d = self.norm.dist(self.point(idx), q);
            if d < best.1 {
                best = (idx, d);
            }
        }
        best
    }
}

/// Incremental greedy net: a candidate is kept iff it is farther than
/// `radius` from every point kept so far.
pub(crate) struct GreedyNet {
    dim: usize,
    norm: Norm,
    radius: f64,
    weights: Vec<f64>,
    buckets: BTreeMap<OrderedFloat<f64>, Vec<usize>>,
    kept: Vec<f64>,
    covered: f64,
}

impl GreedyNet {
    pub(crate) fn new(dim: usize, norm: Norm, radius: f64) -> Self {
        GreedyNet {
            dim,
            norm,
            radius,
            weights: projection_weights(dim, norm),
            buckets: BTreeMap::new(),
            kept: Vec::new(),
            covered: 0.0,
        }
    }

    pub(crate) fn with_capacity(dim: usize, norm: Norm, radius: f64, points: usize) -> Self {
        let mut net = Self::new(dim, norm, radius);
        net.kept.reserve(points * dim);
        net
    }

    pub(crate) fn len(&self) -> usize {
        self.kept.len() / self.dim
    }

    pub(crate) fn insert(&mut self, p: &[f64]) -> bool {
        let key = project(&self.weights, p);
        let reach = self.radius + slack(key);
        let lo = OrderedFloat(key - reach);
        let hi = OrderedFloat(key + reach);
        for idxs in self.buckets.range(lo..=hi).map(|(_, v)| v) {
            for &i in idxs {
                let q = &self.kept[i * self.dim..(i + 1) * self.dim];
                let d = self.norm.dist(p, q);
                if d <= self.radius {
                    self.covered = self.covered.max(d);
                    return false;
                }
            }
        }
        let idx = self.len();
        self.kept.extend_from_slice(p);
        self.buckets.entry(OrderedFloat(key)).or_default().push(idx);
        true
    }

    /// Largest distance from a rejected point to the kept point that
    /// absorbed it; bounds the Hausdorff distance from the net to the input.
    pub(crate) fn covered(&self) -> f64 {
        self.covered
    }

    pub(crate) fn into_coords(self) -> Vec<f64> {
        self.kept
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_have_unit_dual_norm() {
        for norm in [Norm::L1, Norm::L2, Norm::Linf] {
            let w = projection_weights(7, norm);
            assert!((norm.dual().of(&w) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn nearest_matches_linear_scan() {
        let pts: Vec<f64> = (0..200)
            .flat_map(|i| {
                let t = i as f64 * 0.37;
                [t.sin() * 3.0, (t * 1.7).cos() * 2.0, (t * 0.3).sin()]
            })
            .collect();
        for norm in [Norm::L1, Norm::L2, Norm::Linf] {
            let idx = NearestIndex::new(&pts, 3, norm);
            for q in [[0.1, 0.2, 0.3], [3.0, -2.0, 0.0], [-10.0, 5.0, 1.0]] {
                let (_, d) = idx.nearest(&q);
                let brute = pts
                    .chunks_exact(3)
                    .map(|p| norm.dist(p, &q))
                    .fold(f64::INFINITY, f64::min);
                assert_eq!(d, brute);
            }
        }
    }

    #[test]
    fn greedy_net_keeps_first_of_close_pair() {
        let mut net = GreedyNet::new(1, Norm::L2, 0.25);
        assert!(net.insert(&[0.0]));
        assert!(!net.insert(&[0.2]));
        assert!(net.insert(&[0.3]));
        assert!(!net.insert(&[0.5]));
        assert!((net.covered() - 0.2).abs() < 1e-15);
        assert_eq!(net.into_coords(), vec![0.0, 0.3]);
    }
}
