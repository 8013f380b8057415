//! Randomised invariants across the geometry, integration, balancing and
//! counterexample modules.

use proptest::prelude::*;
use setint::balance::{
    infratype_ratio, select_points, sign_balance_exact, sign_balance_greedy, SelectionMode,
    SelectionProblem,
};
use setint::counterexamples::{
    hilbert_example_sum_norm, l1_counterexample_bruteforce, l1_counterexample_lower_bound,
    L1CounterexampleConfig, GENERAL_LOWER_BOUND,
};
use setint::integrate::riemann_sum;
use setint::partition::{halve_with_tags, random_partition, Body};
use setint::setops::{
    hausdorff, hausdorff_hulls, hull_vertices, minkowski, one_sided_hausdorff, prune, scale,
};
use setint::{Multifunction, Norm, PointSet, SpaceDescriptor, Vector};

const NORMS: [Norm; 3] = [Norm::L1, Norm::L2, Norm::Linf];

fn rows(dim: usize, max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-2.0..2.0f64, dim), 1..=max)
}

fn space(norm: usize, dim: usize) -> SpaceDescriptor {
    SpaceDescriptor::new(dim, NORMS[norm % 3]).unwrap()
}

fn set(s: SpaceDescriptor, r: &[Vec<f64>]) -> PointSet {
    PointSet::from_rows(s, r).unwrap()
}

/// Plain double loop, independent of the indexed search.
fn hausdorff_oracle(a: &PointSet, b: &PointSet) -> f64 {
    let norm = a.space().norm();
    let directed = |x: &PointSet, y: &PointSet| {
        y.points()
            .map(|q| {
                x.points()
                    .map(|p| norm.dist(p, q))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn hausdorff_is_a_metric(n in 0usize..3, a in rows(3, 6), b in rows(3, 6), c in rows(3, 6)) {
        let s = space(n, 3);
        let (a, b, c) = (set(s, &a), set(s, &b), set(s, &c));
        prop_assert_eq!(hausdorff(&a, &a).unwrap(), 0.0);
        let ab = hausdorff(&a, &b).unwrap();
        prop_assert_eq!(ab, hausdorff(&b, &a).unwrap());
        prop_assert!(hausdorff(&a, &c).unwrap() <= ab + hausdorff(&b, &c).unwrap() + 1e-12);
        prop_assert!((ab - hausdorff_oracle(&a, &b)).abs() <= 1e-12);
        prop_assert!(one_sided_hausdorff(&a, &b).unwrap() <= ab);
    }

    #[test]
    fn minkowski_algebra(n in 0usize..3, a in rows(2, 4), b in rows(2, 4), c in rows(2, 4), l in -3.0..3.0f64) {
        let s = space(n, 2);
        let (a, b, c) = (set(s, &a), set(s, &b), set(s, &c));
        let ab = minkowski(&a, &b).unwrap();
        prop_assert!(hausdorff(&ab, &minkowski(&b, &a).unwrap()).unwrap() <= 1e-12);
        let left = minkowski(&ab, &c).unwrap();
        let right = minkowski(&a, &minkowski(&b, &c).unwrap()).unwrap();
        prop_assert!(hausdorff(&left, &right).unwrap() <= 1e-12);
        let scaled = scale(l, &ab);
        let split = minkowski(&scale(l, &a), &scale(l, &b)).unwrap();
        prop_assert!(hausdorff(&scaled, &split).unwrap() <= 1e-12);
    }

    #[test]
    fn minkowski_is_nonexpansive(n in 0usize..3, a in rows(2, 4), b in rows(2, 4), c in rows(2, 4)) {
        let s = space(n, 2);
        let (a, b, c) = (set(s, &a), set(s, &b), set(s, &c));
        let lhs = hausdorff(&minkowski(&a, &c).unwrap(), &minkowski(&b, &c).unwrap()).unwrap();
        prop_assert!(lhs <= hausdorff(&a, &b).unwrap() + 1e-12);
    }

    #[test]
    fn hull_distance_never_exceeds_finite(n in 0usize..3, a in rows(3, 6), b in rows(3, 6)) {
        let s = space(n, 3);
        let (a, b) = (set(s, &a), set(s, &b));
        let tol = 1e-9;
        prop_assert!(hausdorff_hulls(&a, &b, tol).unwrap() <= hausdorff(&a, &b).unwrap() + 2.0 * tol);
    }

    #[test]
    fn pruning_is_sound(n in 0usize..3, a in rows(2, 40), delta in 0.0..1.0f64) {
        let a = set(space(n, 2), &a);
        let p = prune(&a, delta).unwrap();
        prop_assert!(p.base.len() <= a.len());
        prop_assert!(hausdorff(&p.base, &a).unwrap() <= delta);
    }

    #[test]
    fn hull_vertices_keep_the_hull(n in 0usize..3, a in rows(2, 12)) {
        let a = set(space(n, 2), &a);
        let v = hull_vertices(&a);
        prop_assert!(hausdorff_hulls(&a, &v, 1e-10).unwrap() <= 1e-8);
    }

    #[test]
    fn partitions_telescope_and_halve(k in 1usize..12, seed in 0u64..1000) {
        let t = random_partition(k, seed).unwrap();
        let total: f64 = t.lengths().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        prop_assert!(t.mesh() <= 1.0);
        let h = halve_with_tags(t.breakpoints(), seed).unwrap();
        prop_assert_eq!(h.fine.len(), 2 * k);
        prop_assert!(h.fine.mesh() <= t.mesh());
    }

    #[test]
    fn conv_of_sum_is_sum_of_conv(n in 0usize..3, k in 1usize..5, seed in 0u64..500,
                                  pts in prop::collection::vec(rows(2, 3), 2)) {
        let s = space(n, 2);
        let sets = vec![set(s, &pts[0]), set(s, &pts[1])];
        let f = Multifunction::new(s, Body::PiecewiseConstant { breaks: vec![0.5], sets }, 10.0, 10.0).unwrap();
        let t = random_partition(k, seed).unwrap();
        let finite = riemann_sum(&f, &t, 0.0).unwrap().base;
        let hull = riemann_sum(&f.convex_hull(), &t, 0.0).unwrap().base;
        prop_assert!(hausdorff_hulls(&finite, &hull, 1e-10).unwrap() <= 1e-6);
    }

    #[test]
    fn monotone_pruning(a in rows(2, 3), k in 2usize..7, d1 in 0.0..0.3f64, d2 in 0.0..0.3f64) {
        let s = space(1, 2);
        let body = Body::Constant(set(s, &a));
        let f = Multifunction::new(s, body, 10.0, 10.0).unwrap();
        let t = random_partition(k, 3).unwrap();
        let (lo, hi) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
        let exact = riemann_sum(&f, &t, 0.0).unwrap();
        let fine = riemann_sum(&f, &t, lo).unwrap();
        let coarse = riemann_sum(&f, &t, hi).unwrap();
        prop_assert!(fine.err_bound <= k as f64 * lo + 1e-15);
        prop_assert!(hausdorff(&exact.base, &coarse.base).unwrap() <= coarse.err_bound + 1e-12);
        prop_assert!(hausdorff(&fine.base, &coarse.base).unwrap() <= k as f64 * (lo + hi) + 1e-12);
    }

    #[test]
    fn sign_balance_symmetries(n in 0usize..3, xs in rows(2, 7), rot in 0usize..7) {
        let s = space(n, 2);
        let xs: Vec<Vector> = xs.into_iter().map(|r| Vector::new(r).unwrap()).collect();
        let base = sign_balance_exact(&xs, &s).unwrap().value;
        let mut perm = xs.clone();
        perm.rotate_left(rot % xs.len());
        prop_assert!((sign_balance_exact(&perm, &s).unwrap().value - base).abs() <= 1e-12);
        let neg: Vec<Vector> = xs.iter().map(|x| Vector::new(x.coords().iter().map(|v| -v).collect()).unwrap()).collect();
        prop_assert!((sign_balance_exact(&neg, &s).unwrap().value - base).abs() <= 1e-12);
        prop_assert!(sign_balance_greedy(&xs, &s).unwrap().value >= base - 1e-12);
    }

    #[test]
    fn euclidean_ratio_at_most_one(xs in rows(3, 10)) {
        let s = space(1, 3);
        let xs: Vec<Vector> = xs.into_iter().map(|r| Vector::new(r).unwrap()).collect();
        if xs.iter().any(|x| s.norm_of(x.coords()) > 0.0) {
            prop_assert!(infratype_ratio(&xs, 2.0, &s).unwrap() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn euclidean_greedy_selection(sets in prop::collection::vec(rows(3, 4), 1..6), seed in 0u64..100) {
        let s = space(1, 3);
        let sets: Vec<PointSet> = sets.iter().map(|r| set(s, r)).collect();
        let targets: Vec<Vector> = sets.iter().enumerate().map(|(i, a)| {
            // Deterministic convex weights from the seed.
            let w: Vec<f64> = (0..a.len()).map(|k| 1.0 + ((seed as usize + i * 7 + k * 3) % 5) as f64).collect();
            let total: f64 = w.iter().sum();
            let mut b = vec![0.0; 3];
            for (wk, p) in w.iter().zip(a.points()) {
                for (x, y) in b.iter_mut().zip(p) { *x += wk / total * y; }
            }
            Vector::new(b).unwrap()
        }).collect();
        let prob = SelectionProblem::new(s, sets, targets).unwrap();
        let g = select_points(&prob, SelectionMode::Greedy).unwrap();
        let x = select_points(&prob, SelectionMode::Exhaustive).unwrap();
        prop_assert!(g.deviation <= prob.diameter_norm(2.0) + 1e-12);
        prop_assert!(x.deviation <= g.deviation + 1e-12);
    }

    #[test]
    fn hilbert_norm_below_root_mesh(k in 1usize..300, seed in 0u64..10_000) {
        let t = random_partition(k, seed).unwrap();
        prop_assert!(hilbert_example_sum_norm(&t, true) <= t.mesh().sqrt());
        prop_assert!(hilbert_example_sum_norm(&t, false) >= hilbert_example_sum_norm(&t, true) - 1e-15);
    }
}

#[test]
fn closed_form_matches_enumeration_wherever_it_runs() {
    for n in 2..=4u32 {
        let k = (1usize << n) - 1;
        for big_n in [k, k + 1, 2 * k + 2] {
            let cfg = L1CounterexampleConfig::new(n, big_n).unwrap();
            let Ok(brute) = l1_counterexample_bruteforce(&cfg) else {
                continue;
            };
            assert!(
                (brute - l1_counterexample_lower_bound(&cfg)).abs() < 1e-12,
                "n={n} N={big_n}"
            );
        }
    }
}

#[test]
fn counterexample_bound_beats_general_constant() {
    for n in 2..=8u32 {
        for big_n in [(1usize << n) - 1, 1usize << (n + 1)] {
            let cfg = L1CounterexampleConfig::new(n, big_n).unwrap();
            let b = l1_counterexample_lower_bound(&cfg);
            assert!(b >= GENERAL_LOWER_BOUND);
            if n >= 3 {
                assert!(b >= 1.0);
            }
        }
    }
}
