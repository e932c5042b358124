use carleson_core::constructions::{
    decay_interval, gamma_interval, nolower_series, noupper_measure, noupper_series, permuted_pair, AtomMassConvention,
    PermutedPairParams,
};
use carleson_core::criteria::{box_sum_surrogate, f_profile, AnalysisParams, SeriesTrend};
use carleson_core::measures::{GenerationBoxes, Measure};
use carleson_core::numerics::conjugate;
use proptest::prelude::*;

fn sorted_generation_masses(mu: &Measure, depth: u32) -> Vec<Vec<f64>> {
    mu.box_table(depth)
        .iter()
        .map(|g: &GenerationBoxes| g.sorted_masses().expect("atomic measures have sparse boxes"))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn permuted_pair_has_equal_box_multisets(p in 2.2..6.0f64, t in 0.05..0.95f64, n_max in 7u32..14, linear in any::<bool>()) {
        let (lo, hi) = gamma_interval(p);
        let mut params = PermutedPairParams::new(p, lo + t * (hi - lo));
        params.n_max = n_max;
        if linear {
            params.convention = AtomMassConvention::Linear;
        }
        let pair = permuted_pair(&params).unwrap();
        prop_assert_eq!(sorted_generation_masses(&pair.mu, n_max), sorted_generation_masses(&pair.nu, n_max));
    }
}

/// Convergence as the admissibility test reads it: a convergent trend with a
/// last-term share below `1e-3`.
fn converges(trend: SeriesTrend, tail: f64) -> bool {
    trend == SeriesTrend::Convergent && tail < 1e-3
}

#[test]
fn decay_interval_matches_exponent_arithmetic() {
    for p in [2.5, 3.0, 4.0, 6.0] {
        // Convergent series ~ n^{-2c/p} needs c > p/2; divergent series
        // ~ n^{-c p'/p} needs c <= p/p'.
        let (lo, hi) = decay_interval(p);
        assert!((lo - p / 2.0).abs() < 1e-15);
        assert!((hi - p / conjugate(p)).abs() < 1e-12);
    }
}

#[test]
fn admissible_decay_rederived_from_series_trends() {
    let mut misses = Vec::new();
    for p in [3.0, 4.0] {
        let (lo, hi) = decay_interval(p);
        for k in 1..=4 {
            let c = lo + (hi - lo) * k as f64 / 5.0;
            for (name, (conv, div)) in [
                ("noupper", noupper_series(p, c, 60).unwrap()),
                ("nolower", nolower_series(p, c, 60).unwrap()),
            ] {
                if !converges(conv.trend, conv.tail) || div.trend != SeriesTrend::Divergent {
                    misses.push(format!(
                        "{name} p={p} c={c:.3}: convergent {:?} tail {:.2e}, divergent {:?}",
                        conv.trend, conv.tail, div.trend
                    ));
                }
            }
        }
    }
    assert!(misses.is_empty(), "{misses:#?}");
}

#[test]
fn noupper_profile_finite_while_box_sum_diverges() {
    let (p, c) = (3.0, 1.75);
    let mu = noupper_measure(p, c, 30).unwrap().measure;
    let f = f_profile(&mu, &AnalysisParams::new(p, p, 30, 256).unwrap());
    assert!(f.norm.is_finite());
    let spread = f.values.iter().fold(0.0f64, |m, &v| m.max((v - f.values[0]).abs()));
    assert!(spread <= 1e-9 * f.values[0], "F varies by {spread}");
    assert!(f.tail_estimate < 1e-2, "tail {}", f.tail_estimate);
    let boxes = box_sum_surrogate(&mu, &AnalysisParams::new(p, conjugate(p), 30, 256).unwrap());
    assert_eq!(boxes.trend, SeriesTrend::Divergent);
}
