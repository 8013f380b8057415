//! Geometry kernel: Minkowski arithmetic, Hausdorff distances, hull
//! distances and error-controlled pruning on finite point clouds.
//!
//! A [`PointSet`] is nonempty, lives in one [`SpaceDescriptor`], and never
//! holds two points within [`DEDUP_TOL`] of each other coordinatewise.
//! Convex hulls are never materialised: `conv A` is represented by the
//! generators of `A` and queried through [`dist_point_to_hull`].

mod hull;
pub(crate) mod index;
mod lp;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::spaces::{Norm, SpaceDescriptor, Vector};
use crate::{Error, Result};

pub use hull::HullDistance;
use index::{GreedyNet, NearestIndex};

/// Absolute per-coordinate tolerance under which two points are identified.
pub const DEDUP_TOL: f64 = 1e-12;

/// Membership tolerance used when dropping non-extreme generators.
pub const HULL_REDUCTION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointSetSpec", into = "PointSetSpec")]
pub struct PointSet {
    space: SpaceDescriptor,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(space: SpaceDescriptor, points: Vec<Vector>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("point sets must be nonempty"));
        }
        let mut coords = Vec::with_capacity(points.len() * space.dim());
        for p in &points {
            space.check_vector(p)?;
            coords.extend_from_slice(p.coords());
        }
        Ok(Self::from_flat(space, coords))
    }

    /// Builds from raw rows, validating dimension and finiteness.
    pub fn from_rows(space: SpaceDescriptor, rows: &[Vec<f64>]) -> Result<Self> {
        let points = rows
            .iter()
            .map(|r| Vector::new(r.clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(space, points)
    }

    pub fn singleton(space: SpaceDescriptor, v: Vector) -> Result<Self> {
        Self::new(space, vec![v])
    }

    /// Deduplicates a flat coordinate buffer in input order. Callers
    /// guarantee finite coordinates and a nonempty buffer of the right width.
    pub(crate) fn from_flat(space: SpaceDescriptor, coords: Vec<f64>) -> Self {
        let dim = space.dim();
        debug_assert!(!coords.is_empty() && coords.len().is_multiple_of(dim));
        let mut net = GreedyNet::with_capacity(dim, Norm::Linf, DEDUP_TOL, coords.len() / dim);
        for p in coords.chunks_exact(dim) {
            net.insert(p);
        }
        PointSet {
            space,
            coords: net.into_coords(),
        }
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.space.dim()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.coords[i * d..(i + 1) * d]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim())
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.points().map(<[f64]>::to_vec).collect()
    }

    pub fn diameter(&self) -> f64 {
        let n = self.len();
        (0..n)
            .into_par_iter()
            .map(|i| {
                (i + 1..n)
                    .map(|j| self.space.dist(self.point(i), self.point(j)))
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    pub fn max_norm(&self) -> f64 {
        self.points()
            .map(|p| self.space.norm_of(p))
            .fold(0.0, f64::max)
    }

    /// Same points, different ambient descriptor of equal dimension.
    pub fn with_space(&self, space: SpaceDescriptor) -> Result<Self> {
        if space.dim() != self.dim() {
            return Err(Error::invalid("re-labelled space must keep the dimension"));
        }
        Ok(PointSet {
            space,
            coords: self.coords.clone(),
        })
    }

    /// Image under the row-major `target.dim() × dim` matrix.
    pub fn map_linear(&self, matrix: &[Vec<f64>], target: SpaceDescriptor) -> Result<Self> {
        check_matrix(matrix, self.dim(), target.dim())?;
        let mut coords = Vec::with_capacity(self.len() * target.dim());
        for p in self.points() {
            coords.extend(
                matrix
                    .iter()
                    .map(|row| row.iter().zip(p).map(|(a, b)| a * b).sum::<f64>()),
            );
        }
        Ok(Self::from_flat(target, coords))
    }

    pub fn union(&self, other: &PointSet) -> Result<Self> {
        same_space(self, other)?;
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        Ok(Self::from_flat(self.space, coords))
    }

    /// Exact coordinate equality, point for point, in stored order.
    pub fn identical(&self, other: &PointSet) -> bool {
        self.space.same_geometry(&other.space)
            && self.coords.len() == other.coords.len()
            && self
                .coords
                .iter()
                .zip(&other.coords)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

pub(crate) fn check_matrix(matrix: &[Vec<f64>], cols: usize, rows: usize) -> Result<()> {
    if matrix.len() != rows || matrix.iter().any(|r| r.len() != cols) {
        return Err(Error::invalid(format!(
            "matrix must be {rows} x {cols} to map dimension {cols} into dimension {rows}"
        )));
    }
    if matrix.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::invalid("matrix entries must be finite"));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointSetSpec {
    space: SpaceDescriptor,
    points: Vec<Vec<f64>>,
}

impl TryFrom<PointSetSpec> for PointSet {
    type Error = Error;

    fn try_from(spec: PointSetSpec) -> Result<Self> {
        PointSet::from_rows(spec.space, &spec.points)
    }
}

impl From<PointSet> for PointSetSpec {
    fn from(s: PointSet) -> Self {
        PointSetSpec {
            points: s.to_rows(),
            space: s.space,
        }
    }
}

/// A representative with a certified Hausdorff error to the exact set it
/// stands for: `ρ_H(base, exact) ≤ err_bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PrunedSet {
    pub base: PointSet,
    pub err_bound: f64,
}

impl PrunedSet {
    pub fn exact(base: PointSet) -> Self {
        PrunedSet {
            base,
            err_bound: 0.0,
        }
    }
}

fn same_space(a: &PointSet, b: &PointSet) -> Result<()> {
    if a.space.same_geometry(&b.space) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "point sets live in different spaces ({} {} vs {} {})",
            a.space.norm().name(),
            a.dim(),
            b.space.norm().name(),
            b.dim()
        )))
    }
}

/// `λA = {λa : a ∈ A}`.
pub fn scale(lambda: f64, a: &PointSet) -> PointSet {
    let coords = a.coords.iter().map(|v| lambda * v).collect();
    PointSet::from_flat(a.space, coords)
}

/// `A + B = {a + b}`, deduplicated, `a` varying slowest.
pub fn minkowski(a: &PointSet, b: &PointSet) -> Result<PointSet> {
    same_space(a, b)?;
    let d = a.dim();
    let mut net = GreedyNet::with_capacity(d, Norm::Linf, DEDUP_TOL, a.len().max(b.len()));
    let mut buf = vec![0.0; d];
    for p in a.points() {
        for q in b.points() {
            for ((o, x), y) in buf.iter_mut().zip(p).zip(q) {
                *o = x + y;
            }
            net.insert(&buf);
        }
    }
    Ok(PointSet {
        space: a.space,
        coords: net.into_coords(),
    })
}

/// `ρ̃_H(A, B) = sup_{b ∈ B} ρ(b, A)`; exact for finite sets.
pub fn one_sided_hausdorff(a: &PointSet, b: &PointSet) -> Result<f64> {
    same_space(a, b)?;
    Ok(directed(a, b))
}

fn directed(a: &PointSet, b: &PointSet) -> f64 {
    let idx = NearestIndex::new(&a.coords, a.dim(), a.space.norm());
    b.coords
        .par_chunks_exact(b.dim())
        .map(|q| idx.nearest(q).1)
        .reduce(|| 0.0, f64::max)
}

/// `ρ_H(A, B)`, the larger of the two one-sided distances.
pub fn hausdorff(a: &PointSet, b: &PointSet) -> Result<f64> {
    same_space(a, b)?;
    Ok(directed(a, b).max(directed(b, a)))
}

/// Distances from every point of `from` to the finite set `to`.
pub(crate) fn nearest_distances(to: &PointSet, from: &PointSet) -> Vec<f64> {
    let idx = NearestIndex::new(&to.coords, to.dim(), to.space.norm());
    from.coords
        .par_chunks_exact(from.dim())
        .map(|q| idx.nearest(q).1)
        .collect()
}

/// Distance from `x` to `conv A` with a certified gap `≤ tol`.
pub fn dist_point_to_hull(
    space: &SpaceDescriptor,
    x: &Vector,
    a: &PointSet,
    tol: f64,
) -> Result<HullDistance> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!(
            "hull tolerance must be positive, got {tol}"
        )));
    }
    space.check_vector(x)?;
    if !space.same_geometry(&a.space) {
        return Err(Error::invalid(
            "query space differs from the generator space",
        ));
    }
    let gens: Vec<&[f64]> = a.points().collect();
    hull::distance(space.norm(), x.coords(), &gens, tol)
}

pub(crate) fn hull_distance_slice(a: &PointSet, x: &[f64], tol: f64) -> Result<HullDistance> {
    let gens: Vec<&[f64]> = a.points().collect();
    hull::distance(a.space.norm(), x, &gens, tol)
}

/// `sup_{x ∈ conv from} ρ(x, conv to)`, attained at a generator of `from`.
///
/// Generators are visited in decreasing order of their distance to the
/// finite set `to`, which upper-bounds the hull distance; the scan stops once
/// that bound drops below the running maximum.
pub fn directed_hull_distance(from: &PointSet, to: &PointSet, tol: f64) -> Result<f64> {
    same_space(from, to)?;
    if !(tol > 0.0) {
        return Err(Error::invalid(format!(
            "hull tolerance must be positive, got {tol}"
        )));
    }
    let upper = nearest_distances(to, from);
    let mut order: Vec<usize> = (0..upper.len()).collect();
    order.sort_by(|&i, &j| upper[j].total_cmp(&upper[i]).then(i.cmp(&j)));
    let gens: Vec<&[f64]> = to.points().collect();
    let mut best = 0.0f64;
    for i in order {
        if upper[i] <= best {
            break;
        }
        let h = hull::distance(to.space.norm(), from.point(i), &gens, tol)?;
        best = best.max(h.value.min(upper[i]));
    }
    Ok(best)
}

/// `ρ_H(conv A, conv B)` to within `tol`.
pub fn hausdorff_hulls(a: &PointSet, b: &PointSet, tol: f64) -> Result<f64> {
    Ok(directed_hull_distance(a, b, tol)?.max(directed_hull_distance(b, a, tol)?))
}

/// Greedy `δ`-net in input order: a point is kept iff it is farther than `δ`
/// from every kept point, so `ρ_H(result, A) ≤ δ`.
pub fn prune(a: &PointSet, delta: f64) -> Result<PrunedSet> {
    let (base, _) = greedy_net(a, delta)?;
    Ok(PrunedSet {
        base,
        err_bound: delta,
    })
}

/// As [`prune`], but the bound is the realised covering radius: the largest
/// distance from a dropped point to the kept point that absorbed it. Zero
/// when nothing is dropped, never above `δ`.
pub fn prune_tight(a: &PointSet, delta: f64) -> Result<PrunedSet> {
    let (base, covered) = greedy_net(a, delta)?;
    Ok(PrunedSet {
        base,
        err_bound: covered,
    })
}

fn greedy_net(a: &PointSet, delta: f64) -> Result<(PointSet, f64)> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::invalid(format!(
            "pruning radius must be a finite value >= 0, got {delta}"
        )));
    }
    if delta == 0.0 || a.len() == 1 {
        return Ok((a.clone(), 0.0));
    }
    let mut net = GreedyNet::new(a.dim(), a.space.norm(), delta);
    for p in a.points() {
        net.insert(p);
    }
    let covered = net.covered();
    Ok((
        PointSet {
            space: a.space,
            coords: net.into_coords(),
        },
        covered,
    ))
}

/// Drops generators lying within [`HULL_REDUCTION_TOL`] of the hull of the
/// remaining ones. The hull changes by at most that tolerance per removal.
pub fn hull_vertices(a: &PointSet) -> PointSet {
    let n = a.len();
    if n <= 2 {
        return a.clone();
    }
    let mut alive = vec![true; n];
    for i in 0..n {
        let gens: Vec<&[f64]> = (0..n)
            .filter(|&j| j != i && alive[j])
            .map(|j| a.point(j))
            .collect();
        if gens.is_empty() {
            continue;
        }
        // Membership does not depend on the norm, so the Euclidean oracle
        // serves every space. Solver failures keep the point.
        if let Ok(h) = hull::min_norm_point(a.point(i), &gens, HULL_REDUCTION_TOL) {
            if h.value <= HULL_REDUCTION_TOL {
                alive[i] = false;
            }
        }
    }
    let coords = (0..n)
        .filter(|&i| alive[i])
        .flat_map(|i| a.point(i).iter().copied())
        .collect();
    PointSet {
        space: a.space,
        coords,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l2(d: usize) -> SpaceDescriptor {
        SpaceDescriptor::l2(d).unwrap()
    }

    fn set(space: SpaceDescriptor, rows: &[&[f64]]) -> PointSet {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        PointSet::from_rows(space, &rows).unwrap()
    }

    fn vec_of(xs: &[f64]) -> Vector {
        Vector::new(xs.to_vec()).unwrap()
    }

    #[test]
    fn construction_dedups_and_validates() {
        let s = set(l2(2), &[&[0.0, 0.0], &[0.0, 5e-13], &[1.0, 0.0]]);
        assert_eq!(s.len(), 2);
        assert!(PointSet::from_rows(l2(2), &[]).is_err());
        assert!(PointSet::from_rows(l2(2), &[vec![1.0]]).is_err());
        assert!(PointSet::from_rows(l2(1), &[vec![f64::NAN]]).is_err());
    }

    #[test]
    fn scale_examples() {
        let a = set(l2(2), &[&[0.0, 0.0], &[2.0, 0.0]]);
        assert!(scale(1.0, &a).identical(&a));
        let z = scale(0.0, &a);
        assert_eq!(z.to_rows(), vec![vec![0.0, 0.0]]);
        assert_eq!(
            scale(0.5, &a).to_rows(),
            vec![vec![0.0, 0.0], vec![1.0, 0.0]]
        );
    }

    #[test]
    fn minkowski_examples() {
        let a = set(l2(2), &[&[1.0, 2.0], &[3.0, -1.0]]);
        let zero = set(l2(2), &[&[0.0, 0.0]]);
        assert!(minkowski(&a, &zero).unwrap().identical(&a));

        let s = l2(1);
        let b = set(s, &[&[0.0], &[1.0]]);
        assert_eq!(
            minkowski(&b, &b).unwrap().to_rows(),
            vec![vec![0.0], vec![1.0], vec![2.0]]
        );

        let other = set(SpaceDescriptor::l1(2).unwrap(), &[&[0.0, 0.0]]);
        assert!(matches!(
            minkowski(&a, &other),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn one_sided_examples() {
        let a = set(l2(2), &[&[0.0, 0.0], &[2.0, 0.0]]);
        assert_eq!(one_sided_hausdorff(&a, &a).unwrap(), 0.0);
        let p = set(l2(2), &[&[0.0, 0.0]]);
        let q = set(l2(2), &[&[3.0, 4.0]]);
        assert_eq!(one_sided_hausdorff(&p, &q).unwrap(), 5.0);

        // Brute-force max-min over pairs: (1,1) is √2 from both points.
        let b = set(l2(2), &[&[1.0, 1.0]]);
        let brute = b
            .points()
            .map(|y| {
                a.points()
                    .map(|x| l2(2).dist(x, y))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max);
        assert_eq!(one_sided_hausdorff(&a, &b).unwrap(), brute);
        assert!((brute - 2f64.sqrt()).abs() < 1e-15);
        // Reverse direction: (2,0) is √2 from (1,1) as well.
        assert!((one_sided_hausdorff(&b, &a).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn hausdorff_examples() {
        let l1 = SpaceDescriptor::l1(2).unwrap();
        let a = set(l1, &[&[0.0, 0.0]]);
        let b = set(l1, &[&[1.0, 0.0], &[0.0, 1.0]]);
        assert_eq!(hausdorff(&a, &b).unwrap(), 1.0);
        assert_eq!(hausdorff(&b, &b).unwrap(), 0.0);

        let c = set(l1, &[&[0.25, -3.0]]);
        let shifted = hausdorff(&minkowski(&a, &c).unwrap(), &minkowski(&b, &c).unwrap()).unwrap();
        assert!((shifted - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hull_distance_examples() {
        let a = set(l2(2), &[&[1.0, 0.0], &[0.0, 1.0]]);
        let x = vec_of(&[1.0, 0.0]);
        assert!(dist_point_to_hull(&l2(2), &x, &a, 1e-10).unwrap().value <= 1e-10);

        let origin = vec_of(&[0.0, 0.0]);
        let h = dist_point_to_hull(&l2(2), &origin, &a, 1e-10).unwrap();
        assert!((h.value - 0.5f64.sqrt()).abs() <= h.gap + 1e-15);

        let l1 = SpaceDescriptor::l1(2).unwrap();
        let a1 = a.with_space(l1).unwrap();
        let h1 = dist_point_to_hull(&l1, &origin, &a1, 1e-10).unwrap();
        // Segment (s, 1-s) has ℓ₁ norm 1 for every s in [0, 1].
        let enumerated = (0..=100)
            .map(|i| {
                let s = i as f64 / 100.0;
                l1.norm_of(&[s, 1.0 - s])
            })
            .fold(f64::INFINITY, f64::min);
        assert!((h1.value - enumerated).abs() < 1e-12);
        assert_eq!(h1.gap, 0.0);

        assert!(dist_point_to_hull(&l2(2), &origin, &a, 0.0).is_err());
        assert!(dist_point_to_hull(&l2(3), &vec_of(&[0.0, 0.0, 0.0]), &a, 1e-9).is_err());
    }

    #[test]
    fn hull_hausdorff_examples() {
        let a = set(l2(2), &[&[0.0, 0.0], &[2.0, 0.0], &[0.0, 2.0]]);
        let with_mid = a.union(&set(l2(2), &[&[1.0, 0.0]])).unwrap();
        assert!(hausdorff_hulls(&a, &with_mid, 1e-10).unwrap() <= 1e-10);
        assert!(hausdorff(&a, &with_mid).unwrap() > 0.5);

        // Parallel unit segments one apart; oracle by fine sampling.
        let lo = set(l2(2), &[&[0.0, 0.0], &[1.0, 0.0]]);
        let hi = set(l2(2), &[&[0.0, 1.0], &[1.0, 1.0]]);
        let sample =
            |y: f64| -> Vec<Vec<f64>> { (0..=200).map(|i| vec![i as f64 / 200.0, y]).collect() };
        let oracle = hausdorff(
            &PointSet::from_rows(l2(2), &sample(0.0)).unwrap(),
            &PointSet::from_rows(l2(2), &sample(1.0)).unwrap(),
        )
        .unwrap();
        let h = hausdorff_hulls(&lo, &hi, 1e-10).unwrap();
        assert!((h - oracle).abs() < 1e-9);
        assert!((h - 1.0).abs() < 1e-9);
    }

    #[test]
    fn prune_examples() {
        let a = set(l2(2), &[&[0.0, 0.0], &[1.0, 1.0]]);
        let p0 = prune(&a, 0.0).unwrap();
        assert!(p0.base.identical(&a));
        assert_eq!(p0.err_bound, 0.0);

        let line: Vec<Vec<f64>> = (0..=20).map(|i| vec![i as f64 * 0.1]).collect();
        let line = PointSet::from_rows(l2(1), &line).unwrap();
        let p = prune(&line, 0.25).unwrap();
        assert!(p.base.len() < line.len());
        assert!(p.base.points().all(|q| line.points().any(|r| r == q)));
        assert!(hausdorff(&p.base, &line).unwrap() <= 0.25);
        assert_eq!(p.err_bound, 0.25);
        let tight = prune_tight(&line, 0.25).unwrap();
        assert!(tight.base.identical(&p.base));
        assert!(tight.err_bound <= 0.25 + 1e-15);
        assert!(hausdorff(&tight.base, &line).unwrap() <= tight.err_bound);
        assert_eq!(prune_tight(&a, 0.5).unwrap().err_bound, 0.0);

        let single = set(l2(1), &[&[3.0]]);
        assert!(prune(&single, 10.0).unwrap().base.identical(&single));
        assert!(prune(&single, -1.0).is_err());
    }

    #[test]
    fn hull_vertices_drop_interior_points() {
        let a = set(
            l2(2),
            &[
                &[0.5, 0.5],
                &[0.0, 0.0],
                &[1.0, 0.0],
                &[0.5, 0.0],
                &[0.0, 1.0],
                &[1.0, 1.0],
            ],
        );
        let v = hull_vertices(&a);
        assert_eq!(v.len(), 4);
        assert!(hausdorff_hulls(&a, &v, 1e-10).unwrap() <= 1e-9);
    }

    #[test]
    fn point_set_json() {
        let a = set(
            SpaceDescriptor::l1(2).unwrap(),
            &[&[0.0, 1.0], &[2.5, -1.0]],
        );
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(
            json,
            r#"{"space":{"dim":2,"norm":"l1","infratype":null},"points":[[0.0,1.0],[2.5,-1.0]]}"#
        );
        let back: PointSet = serde_json::from_str(&json).unwrap();
        assert!(back.identical(&a));
        assert!(
            serde_json::from_str::<PointSet>(r#"{"space":{"dim":2,"norm":"l1"},"points":[]}"#)
                .is_err()
        );
        assert!(serde_json::from_str::<PointSet>(
            r#"{"space":{"dim":2,"norm":"l1"},"points":[[1]]}"#
        )
        .is_err());
    }
}
