//! Covering and packing counts against an exhaustive minimal covering.

use kdim_core::metric_entropy::{cover_is_valid, greedy_cover, greedy_pack, sandwich_check, FiniteMetricSpace, DIST_TOL};
use proptest::prelude::*;

/// Minimal number of sets of diameter at most 2ε partitioning the space.
fn exact_cover_count(space: &FiniteMetricSpace<Vec<f64>>, eps: f64) -> usize {
    let n = space.len();
    let full = (1usize << n) - 1;
    let limit = 2.0 * eps + DIST_TOL;
    let mut small = vec![true; full + 1];
    for mask in 1..=full {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        small[mask] = small[rest] && (0..n).filter(|j| rest >> j & 1 == 1).all(|j| space.dist(low, j) <= limit);
    }
    let mut best = vec![usize::MAX; full + 1];
    best[0] = 0;
    for mask in 1..=full {
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        let mut sub = rest;
        loop {
            let part = sub | low;
            if small[part] && best[mask ^ part] != usize::MAX {
                best[mask] = best[mask].min(best[mask ^ part] + 1);
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    best[full]
}

fn cloud(dim: usize, max_len: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-1.0f64..1.0, dim), 1..=max_len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn greedy_within_factor_of_minimal(dim in 1usize..=2, pts in cloud(2, 11), eps in 0.05f64..0.8) {
        let pts: Vec<Vec<f64>> = pts.into_iter().map(|p| p[..dim].to_vec()).collect();
        let space = FiniteMetricSpace::real_sup(pts).unwrap();
        let exact = exact_cover_count(&space, eps);
        let cover = greedy_cover(&space, eps).unwrap();
        let pack2 = greedy_pack(&space, 2.0 * eps).unwrap().len();
        prop_assert!(cover_is_valid(&space, eps, &cover));
        prop_assert!(pack2 <= exact);
        prop_assert!(exact <= cover.len());
        prop_assert!(cover.len() <= (1 << dim) * exact);
    }

    #[test]
    fn sandwich_holds(pts in cloud(3, 60), eps in 0.01f64..1.0) {
        let space = FiniteMetricSpace::real_euclidean(pts).unwrap();
        prop_assert!(sandwich_check(&space, eps).unwrap());
        prop_assert!(greedy_cover(&space, eps).unwrap().len() <= space.len());
    }

    #[test]
    fn packs_are_separated(pts in cloud(2, 60), eps in 0.01f64..1.0) {
        let space = FiniteMetricSpace::real_sup(pts).unwrap();
        let pack = greedy_pack(&space, eps).unwrap();
        for (a, &i) in pack.iter().enumerate() {
            for &j in &pack[a + 1..] {
                prop_assert!(space.dist(i, j) > eps + DIST_TOL);
            }
        }
        for j in 0..space.len() {
            prop_assert!(pack.iter().any(|&i| space.dist(i, j) <= eps + DIST_TOL));
        }
    }
}
