use std::f64::consts::TAU;

use carleson_core::geometry::{
    box_index, in_stolz, in_window, net, BoxIndex, DiskPoint, StolzDomain, Window,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn disk_point() -> impl Strategy<Value = DiskPoint> {
    (0.0..0.999_999f64, 0.0..TAU).prop_map(|(r, t)| DiskPoint::from_polar(r, t).unwrap())
}

/// Distance from `z` to the hull of `D(0, 1/2)` and `v`, minus 1/2 at the
/// optimal blend: negative inside, positive outside. `t ↦ |z - t v| - (1 - t)/2`
/// is convex, so ternary search finds its minimum over `[0, 1]`.
fn hull_margin(z: Complex64, v: Complex64) -> f64 {
    let g = |t: f64| (z - v * t).norm() - 0.5 * (1.0 - t);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let a = lo + (hi - lo) / 3.0;
        let b = hi - (hi - lo) / 3.0;
        if g(a) < g(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    g(0.5 * (lo + hi))
}

proptest! {
    #[test]
    fn box_index_is_total_and_contains(z in disk_point()) {
        let b = box_index(&z);
        prop_assert!(b.contains(&z));
        prop_assert!(b.j < BoxIndex::count(b.n));
    }

    #[test]
    fn windows_nest(z in disk_point(), xi in 0.0..TAU, h1 in 1e-6..1.0f64, h2 in 1e-6..1.0f64) {
        let (small, large) = if h1 <= h2 { (h1, h2) } else { (h2, h1) };
        if in_window(&z, &Window::new(xi, small).unwrap()) {
            prop_assert!(in_window(&z, &Window::new(xi, large).unwrap()));
        }
    }

    #[test]
    fn stolz_rotates_with_its_vertex(z in disk_point(), xi in 0.0..TAU, rot in 0.0..TAU) {
        let turned = DiskPoint::from_complex(z.to_complex() * Complex64::from_polar(1.0, rot)).unwrap();
        let margin = hull_margin(z.to_complex(), Complex64::from_polar(1.0, xi));
        // Rounding in the rotation can flip points sitting on the boundary.
        prop_assume!(margin.abs() > 1e-12);
        prop_assert_eq!(
            in_stolz(&z, &StolzDomain::new(xi).unwrap()),
            in_stolz(&turned, &StolzDomain::new(xi + rot).unwrap())
        );
    }
}

#[test]
fn stolz_matches_hull_oracle() {
    let mut runner = proptest::test_runner::TestRunner::new(ProptestConfig::with_cases(10_000));
    runner
        .run(&(disk_point(), 0.0..TAU), |(z, xi)| {
            let margin = hull_margin(z.to_complex(), Complex64::from_polar(1.0, xi));
            prop_assume!(margin.abs() > 1e-9);
            prop_assert_eq!(in_stolz(&z, &StolzDomain::new(xi).unwrap()), margin < 0.0);
            Ok(())
        })
        .unwrap();
}

#[test]
fn partition_over_quasi_random_points() {
    // Halton (2, 3) points mapped to the disk by area.
    let halton = |mut i: u64, b: u64| {
        let (mut f, mut x) = (1.0, 0.0);
        while i > 0 {
            f /= b as f64;
            x += f * (i % b) as f64;
            i /= b;
        }
        x
    };
    for i in 1..=100_000u64 {
        let r = halton(i, 2).sqrt();
        let z = DiskPoint::from_polar(r.min(1.0 - 1e-15), TAU * halton(i, 3)).unwrap();
        let b = box_index(&z);
        assert!(b.contains(&z), "{z:?} not in {b:?}");
    }
}

#[test]
fn nets_are_separated_and_covering() {
    for n in 1..=8u32 {
        let g = net(n);
        let eps = g.radius();
        let pts = g.points();
        let mut min_gap = f64::INFINITY;
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                min_gap = min_gap.min(a.distance(b));
            }
        }
        assert!(min_gap > eps, "n = {n}: separation {min_gap} <= {eps}");

        let inner = 1.0 - (-(n as f64)).exp2();
        let outer = 1.0 - (-(n as f64 + 1.0)).exp2();
        let mut worst = 0.0f64;
        for k in 0..4000 {
            let r = inner + (outer - inner) * ((k * 7919) % 4000) as f64 / 4000.0;
            let z = DiskPoint::from_polar(r, TAU * k as f64 / 4000.0 + 0.1).unwrap();
            let (best, dist) = pts
                .iter()
                .enumerate()
                .map(|(i, q)| (i, z.distance(q)))
                .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
            worst = worst.max(dist);
            let cell = g.cell_of(&z).expect("point lies in the corona");
            assert!((z.distance(&pts[cell]) - dist).abs() < 1e-15, "n = {n}: cell {cell} vs nearest {best}");
        }
        assert!(worst <= eps, "n = {n}: covering radius {worst} > {eps}");
    }
}
