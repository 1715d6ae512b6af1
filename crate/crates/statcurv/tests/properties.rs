//! Randomized invariants for the expression layer and the samplers.

use proptest::prelude::*;

use statcurv::expr::{parse_expression, Expr};
use statcurv::jet::eval_jet2;
use statcurv::sample::{low_discrepancy_points, BOX_SHRINK};

const N: usize = 3;

fn arb_expr(depth: u32) -> BoxedStrategy<Expr> {
    let leaf = prop_oneof![
        (0..N).prop_map(Expr::Coord),
        (-2.0..2.0f64).prop_map(Expr::constant),
        Just(Expr::NormSq),
    ];
    leaf.prop_recursive(depth, 64, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
            inner.clone().prop_map(|a| Expr::Sin(Box::new(a))),
            inner.clone().prop_map(|a| Expr::Cos(Box::new(a))),
            (inner.clone(), 2..4i32).prop_map(|(a, k)| Expr::pow(a, k)),
            inner
                .clone()
                .prop_map(|a| Expr::Exp(Box::new(Expr::mul(Expr::constant(0.25), a)))),
            inner.prop_map(Expr::neg),
        ]
    })
    .boxed()
}

fn arb_point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.9..0.9f64, N)
}

proptest! {
    /// Display output is valid input: parsing it back yields an expression
    /// with identical value, gradient, and Hessian (up to the sign of zero,
    /// which the printed form does not preserve).
    #[test]
    fn display_round_trips_through_parser(e in arb_expr(4), p in arb_point()) {
        let printed = e.to_string();
        let reparsed = parse_expression(&printed, N).expect("printed form parses");
        if let (Ok(a), Ok(b)) = (eval_jet2(&e, &p), eval_jet2(&reparsed, &p)) {
            if a.is_finite() && b.is_finite() {
                prop_assert_eq!(a.value, b.value, "{}", printed);
                for i in 0..N {
                    prop_assert_eq!(a.grad[i], b.grad[i]);
                    for j in 0..N {
                        prop_assert_eq!(a.hess_at(i, j), b.hess_at(i, j));
                    }
                }
            }
        }
    }

    /// Hessians are bit-symmetric, not just symmetric up to rounding; the
    /// curvature code relies on this for exact antisymmetry of R.
    #[test]
    fn hessians_are_bit_symmetric(e in arb_expr(5), p in arb_point()) {
        if let Ok(jet) = eval_jet2(&e, &p) {
            for i in 0..N {
                for j in 0..i {
                    prop_assert_eq!(
                        jet.hess_at(i, j).to_bits(),
                        jet.hess_at(j, i).to_bits(),
                        "asymmetry in {}", e
                    );
                }
            }
        }
    }

    /// Sample points land strictly inside the shrunk box and are
    /// deterministic for a fixed domain.
    #[test]
    fn sample_points_stay_in_shrunk_box(
        bounds in prop::collection::vec((-5.0..0.0f64, 0.1..5.0f64), 2..5),
        count in 1..40usize,
    ) {
        let domain: Vec<(f64, f64)> = bounds;
        let pts = low_discrepancy_points(&domain, count);
        prop_assert_eq!(pts.len(), count);
        for p in &pts {
            for (x, (lo, hi)) in p.iter().zip(&domain) {
                let margin = BOX_SHRINK * (hi - lo);
                prop_assert!(*x >= lo + margin - 1e-12 && *x <= hi - margin + 1e-12);
            }
        }
        prop_assert_eq!(&pts, &low_discrepancy_points(&domain, count));
    }
}
