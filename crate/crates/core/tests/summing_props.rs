use std::f64::consts::TAU;

use carleson_core::geometry::DiskPoint;
use carleson_core::measures::{Atom, AtomicMeasure};
use carleson_core::numerics::conjugate;
use carleson_core::summing::{hs_exact, hs_matrix, multiplier_pi_r, pi_r_lower_bound, DiagonalWeights, Generator};
use proptest::prelude::*;

const BUDGET: usize = 2000;

fn weights() -> impl Strategy<Value = DiagonalWeights> {
    prop::collection::vec(0.01..2.0f64, 2..6).prop_map(|b| DiagonalWeights::new(b).unwrap())
}

fn atoms() -> impl Strategy<Value = AtomicMeasure> {
    prop::collection::vec((0.0..0.95f64, 0.0..TAU, 0.01..1.0f64), 1..10).prop_map(|v| {
        AtomicMeasure::new(
            v.into_iter()
                .map(|(r, t, w)| Atom {
                    z: DiskPoint::from_polar(r, t).unwrap(),
                    w,
                })
                .collect(),
        )
        .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn diagonal_lower_bounds_are_sound(beta in weights(), p in 2.0..6.0f64, t in 0.0..1.0f64, seed in any::<u64>()) {
        let r = conjugate(p) + t * (p - conjugate(p));
        let exact = beta.norm(r);
        let gens = Generator::standard(beta.beta().len());
        let est = pi_r_lower_bound(&beta.operator(p), r, BUDGET, &gens, seed).unwrap();
        prop_assert!(est.uncertified_best <= exact * (1.0 + 1e-6), "{} > {exact}", est.uncertified_best);
        let canonical = pi_r_lower_bound(&beta.operator(p), r, BUDGET, &[Generator::Canonical], seed).unwrap();
        prop_assert!(canonical.lower >= exact * (1.0 - 1e-9), "{} < {exact}", canonical.lower);
        prop_assert!((multiplier_pi_r(&beta, p, r).unwrap().value - exact).abs() <= 1e-12 * exact);
    }

    #[test]
    fn scaling_the_operator_scales_the_bound(beta in weights(), c in 0.1..10.0f64, seed in any::<u64>()) {
        let (p, r) = (3.0, 2.0);
        let t = beta.operator(p);
        let gens = Generator::standard(beta.beta().len());
        let a = pi_r_lower_bound(&t, r, BUDGET, &gens, seed).unwrap();
        let b = pi_r_lower_bound(&t.scaled(c), r, BUDGET, &gens, seed).unwrap();
        prop_assert!((b.lower - c * a.lower).abs() <= 1e-12 * c * a.lower);
    }

    #[test]
    fn contractions_do_not_raise_the_bound(beta in weights(), d in prop::collection::vec(0.0..1.0f64, 5), seed in any::<u64>()) {
        let (p, r) = (3.0, 2.0);
        let n = beta.beta().len();
        let t = beta.operator(p);
        let gens = Generator::standard(n);
        let base = pi_r_lower_bound(&t, r, BUDGET, &gens, seed).unwrap();
        let shrunk = pi_r_lower_bound(&t.compose_diagonal(&d[..n]), r, BUDGET, &gens, seed).unwrap();
        prop_assert!(shrunk.lower <= base.lower * (1.0 + 1e-6), "{} > {}", shrunk.lower, base.lower);
    }

    #[test]
    fn truncated_hs_increases_to_closed_form(mu in atoms(), m in 1usize..400) {
        let exact = hs_exact(&mu);
        let (a, b) = (hs_matrix(&mu, m), hs_matrix(&mu, m + 1));
        prop_assert!(a <= b && b <= exact * (1.0 + 1e-15));
        // Missing part of the squared norm: Σ w r^{2M}/(1 - r^2).
        let bound: f64 = mu
            .atoms()
            .iter()
            .map(|x| x.w * x.z.modulus().powi(2 * m as i32) / (1.0 - x.z.modulus().powi(2)))
            .sum();
        prop_assert!(exact * exact - a * a <= bound * (1.0 + 1e-9) + 1e-12 * exact * exact);
    }
}
