use std::f64::consts::TAU;

use carleson_core::composition::Symbol;
use carleson_core::geometry::{BoxIndex, DiskPoint, Window};
use carleson_core::hardy::{hp_norm, poisson_transform, zyg_quadrature, PolyCoeffs};
use carleson_core::measures::{pullback_from_symbol, Atom, AtomicMeasure, Measure, RadialMeasure, Ring};
use num_complex::Complex64;
use proptest::prelude::*;

fn atoms(max: usize) -> impl Strategy<Value = AtomicMeasure> {
    prop::collection::vec((0.0..0.999f64, 0.0..TAU, 0.01..1.0f64), 1..=max).prop_map(|v| {
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

fn rings() -> impl Strategy<Value = RadialMeasure> {
    prop::collection::vec((0.0..0.999f64, 0.01..1.0f64), 1..6)
        .prop_map(|v| RadialMeasure::new(v.into_iter().map(|(r, w)| Ring { r, w }).collect()).unwrap())
}

fn coeffs(n: usize) -> impl Strategy<Value = PolyCoeffs> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n)
        .prop_map(|v| PolyCoeffs::new(v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()))
}

proptest! {
    #[test]
    fn box_masses_add_up_to_total(mu in atoms(12), depth in 0u32..14) {
        let m = Measure::Atomic(mu);
        let mut boxed = 0.0;
        for n in 0..=depth {
            for j in 0..BoxIndex::count(n) {
                boxed += m.box_mass(&BoxIndex::new(n, j).unwrap());
            }
        }
        let tail = m.annulus_mass(1.0 - (-(depth as f64 + 1.0)).exp2(), 1.0);
        prop_assert!((boxed + tail - m.total_mass()).abs() <= 1e-12 * m.total_mass());
    }

    #[test]
    fn radial_windows_ignore_the_angle(mu in rings(), h in 1e-4..1.0f64, xi in 0.0..TAU) {
        let m = Measure::Radial(mu);
        let a = m.window_mass(&Window::new(0.0, h).unwrap());
        let b = m.window_mass(&Window::new(xi, h).unwrap());
        prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    }

    #[test]
    fn window_mass_grows_with_h(mu in atoms(12), xi in 0.0..TAU, h1 in 1e-4..1.0f64, h2 in 1e-4..1.0f64) {
        let m = Measure::Atomic(mu);
        let (s, l) = if h1 <= h2 { (h1, h2) } else { (h2, h1) };
        prop_assert!(m.window_mass(&Window::new(xi, s).unwrap()) <= m.window_mass(&Window::new(xi, l).unwrap()));
    }

    #[test]
    fn pullback_mass_accounts_for_every_sample(a in -0.25..0.25f64, b in -0.25..0.25f64, k in 8u32..14) {
        let s = Symbol::polynomial(vec![Complex64::new(a, 0.0), Complex64::new(0.5, 0.0), Complex64::new(0.0, b)]).unwrap();
        let pb = pullback_from_symbol(&s, 1 << k).unwrap();
        let dropped = pb.dropped() as f64 / pb.sample_count() as f64;
        let retained = Measure::Pullback(pb).total_mass();
        prop_assert_eq!(retained + dropped, 1.0);
    }

    #[test]
    fn quadrature_is_exact_at_p2(f in (1usize..=6).prop_flat_map(|k| coeffs(1 << k))) {
        let n = f.coeffs().len();
        let ratio = zyg_quadrature(&f, 2.0, n).unwrap() / hp_norm(&f, 2.0, 16 * n).unwrap();
        prop_assert!((ratio - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn poisson_transform_reproduces_polynomials(f in coeffs(6), r in 0.0..0.99f64, t in 0.0..TAU) {
        let z = DiskPoint::from_polar(r, t).unwrap();
        let boundary = f.boundary(1 << 16).unwrap();
        let got = poisson_transform(&boundary, &z);
        prop_assert!((got - f.eval(z.to_complex())).norm() <= 1e-8);
    }
}

#[test]
fn boundary_touching_samples_are_dropped() {
    let half = Complex64::new(0.5, 0.0);
    let s = Symbol::polynomial(vec![half, half]).unwrap();
    let pb = pullback_from_symbol(&s, 1 << 10).unwrap();
    assert!(pb.dropped() > 0);
    let dropped = pb.dropped() as f64 / pb.sample_count() as f64;
    assert_eq!(Measure::Pullback(pb).total_mass() + dropped, 1.0);
}
