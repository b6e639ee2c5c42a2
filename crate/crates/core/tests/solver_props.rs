//! Simplex against exact arithmetic, and witness-set geometry.

use kdim_core::lp::{exact_simplex_max, rational_to_f64_down, simplex_max, StandardLp};
use kdim_core::witness::{build_witness, required_grid};
use proptest::prelude::*;

/// Feasible bounded problems: positive integer constraint matrix and
/// `b = A x₀`, all exactly representable.
fn bounded_lp() -> impl Strategy<Value = StandardLp> {
    (1usize..4, 1usize..7).prop_flat_map(|(rows, cols)| {
        (
            prop::collection::vec(prop::collection::vec(1u8..20, rows), cols),
            prop::collection::vec(0u8..6, cols),
            prop::collection::vec(-5i8..6, cols),
        )
            .prop_map(move |(a, x0, c)| {
                let rhs = (0..rows).map(|i| a.iter().zip(&x0).map(|(col, &x)| f64::from(col[i]) * f64::from(x)).sum()).collect();
                let mut lp = StandardLp::new(rhs);
                for (col, cost) in a.into_iter().zip(c) {
                    lp.push_column(col.into_iter().map(f64::from).collect(), f64::from(cost));
                }
                lp
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn float_simplex_matches_exact(lp in bounded_lp()) {
        let sol = simplex_max(&lp).unwrap();
        let all: Vec<usize> = (0..lp.columns.len()).collect();
        let exact = rational_to_f64_down(&exact_simplex_max(&lp, &all).unwrap());
        prop_assert!((sol.objective - exact).abs() <= 1e-7 * exact.abs().max(1.0));
        for (i, b) in lp.rhs.iter().enumerate() {
            let ax: f64 = lp.columns.iter().zip(&sol.x).map(|(col, x)| col[i] * x).sum();
            prop_assert!((ax - b).abs() <= 1e-8 * b.abs().max(1.0));
        }
        prop_assert!(sol.x.iter().all(|&x| x >= -1e-9));
    }

    #[test]
    fn fewer_columns_never_raise_the_optimum(lp in bounded_lp(), drop in 0usize..6) {
        let all: Vec<usize> = (0..lp.columns.len()).collect();
        let full = exact_simplex_max(&lp, &all).unwrap();
        let some: Vec<usize> = all.iter().copied().filter(|&j| j != drop).collect();
        if let Some(v) = exact_simplex_max(&lp, &some) {
            prop_assert!(v <= full);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn witness_points_are_separated_and_inside(r in 0.3f64..0.7, big_n in 1u32..3, extra in 0usize..5) {
        let w = build_witness(r, big_n, 1, required_grid(r, big_n) + extra).unwrap();
        let pts = w.points.points();
        prop_assert!(!pts.is_empty());
        for (a, p) in pts.iter().enumerate() {
            prop_assert!(p[0].norm() <= r + 1e-12);
            for q in &pts[a + 1..] {
                prop_assert!((p[0] - q[0]).norm() > w.eps_used);
            }
        }
    }
}
