use std::f64::consts::TAU;

use carleson_core::composition::{nevanlinna, Symbol};
use carleson_core::criteria::{box_sum_surrogate, f_profile, order_bounded_surrogate, phi_profile, AnalysisParams};
use carleson_core::geometry::DiskPoint;
use carleson_core::measures::{pullback_from_symbol, Atom, AtomicMeasure, Measure};
use carleson_core::summing::hs_exact;
use num_complex::Complex64;
use proptest::prelude::*;

fn atom_list(max: usize) -> impl Strategy<Value = Vec<Atom>> {
    prop::collection::vec((0.0..0.95f64, 0.0..TAU, 0.01..1.0f64), 1..=max).prop_map(|v| {
        v.into_iter()
            .map(|(r, t, w)| Atom {
                z: DiskPoint::from_polar(r, t).unwrap(),
                w,
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn box_sum_and_order_bounded_agree_at_r_equal_p(atoms in atom_list(12), p in 1.2..5.0f64) {
        let mu = Measure::Atomic(AtomicMeasure::new(atoms).unwrap());
        let params = AnalysisParams::new(p, p, 12, 256).unwrap();
        let boxes = box_sum_surrogate(&mu, &params).raw;
        let ob = order_bounded_surrogate(&mu, p, 12).unwrap().raw;
        let ratio = boxes / ob;
        prop_assert!((0.25..=4.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn phi_at_p2_tracks_hilbert_schmidt(atoms in atom_list(12)) {
        let mu = AtomicMeasure::new(atoms).unwrap();
        let phi = phi_profile(&Measure::Atomic(mu.clone()), 2.0, 512, 10).unwrap();
        let ratio = phi.norm / hs_exact(&mu).powi(2);
        prop_assert!((0.125..=8.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn more_mass_never_lowers_a_surrogate(atoms in atom_list(8), extra in atom_list(4), p in 1.2..5.0f64, r in 1.0..6.0f64) {
        let mu = Measure::Atomic(AtomicMeasure::new(atoms.clone()).unwrap());
        let nu = Measure::Atomic(AtomicMeasure::new([atoms, extra].concat()).unwrap());
        let params = AnalysisParams::new(p, r, 10, 256).unwrap();
        prop_assert!(box_sum_surrogate(&mu, &params).value <= box_sum_surrogate(&nu, &params).value);
        prop_assert!(order_bounded_surrogate(&mu, p, 10).unwrap().value <= order_bounded_surrogate(&nu, p, 10).unwrap().value);
        let (fm, fn_) = (f_profile(&mu, &params), f_profile(&nu, &params));
        prop_assert!(fm.values.iter().zip(&fn_.values).all(|(a, b)| a <= b));
        prop_assert!(fm.norm <= fn_.norm * (1.0 + 1e-12));
    }

    #[test]
    fn scaled_identity_counts_one_preimage(scale in 0.05..0.99f64, u in 0.01..1.0f64, t in 0.0..TAU) {
        let s = Symbol::polynomial(vec![Complex64::new(0.0, 0.0), Complex64::new(scale, 0.0)]).unwrap();
        let w = DiskPoint::from_polar(u * scale * 0.999, t).unwrap();
        let v = nevanlinna(&s, &w).unwrap();
        prop_assert!((v.value - (scale / w.modulus()).ln()).abs() <= 1e-10);
    }

    #[test]
    fn constant_symbol_pulls_back_to_a_point_mass(r in 0.0..0.99f64, t in 0.0..TAU, k in 6u32..12) {
        let c = DiskPoint::from_polar(r, t).unwrap();
        let s = Symbol::polynomial(vec![c.to_complex()]).unwrap();
        let pb = Measure::Pullback(pullback_from_symbol(&s, 1 << k).unwrap());
        let dirac = Measure::Atomic(AtomicMeasure::dirac(c, 1.0).unwrap());
        prop_assert_eq!(pb.box_table(12), dirac.box_table(12));
    }
}
