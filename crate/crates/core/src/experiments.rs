//! Randomized verification suites and the regime table for the Hardy to
//! Bergman injection.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::criteria::{classify_series, f_profile, g_profile, phi_profile, tail_ratio, AnalysisParams, SeriesTrend};
use crate::error::{Error, Result};
use crate::geometry::DiskPoint;
use crate::hardy::{hp_norm, qj_basis, zyg_quadrature, PolyCoeffs};
use crate::measures::{Atom, AtomicMeasure, Measure};
use crate::numerics::{check_exponent, lp_norm};
use crate::summing::{beta_from_measure, hs_exact, hs_matrix, pi_r_lower_bound, FiniteOperator, Generator, RangeNorm};

/// Seeded generator for one trial of a suite.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `1..=max_atoms` atoms with `|z| <= r_max`, uniform angles and masses in `(0, 1]`.
pub fn random_atomic(rng: &mut ChaCha8Rng, max_atoms: usize, r_max: f64) -> AtomicMeasure {
    let count = rng.random_range(1..=max_atoms);
    let atoms = (0..count)
        .map(|_| {
            let r = r_max * rng.random::<f64>();
            let t = TAU * rng.random::<f64>();
            Atom {
                z: DiskPoint::from_polar(r, t).expect("r_max < 1"),
                w: 1.0 - rng.random::<f64>(),
            }
        })
        .collect();
    AtomicMeasure::new(atoms).expect("positive masses")
}

/// Atoms inside the `N`-corona `1 - 1/N <= |z| < 1 - 1/(2N)`.
pub fn random_corona_measure(rng: &mut ChaCha8Rng, n: usize, max_atoms: usize) -> AtomicMeasure {
    let count = rng.random_range(1..=max_atoms);
    let nf = n as f64;
    let atoms = (0..count)
        .map(|_| {
            let r = 1.0 - 1.0 / nf + rng.random::<f64>() / (2.0 * nf);
            let t = TAU * rng.random::<f64>();
            Atom {
                z: DiskPoint::from_polar(r, t).expect("inside the corona"),
                w: 1.0 - rng.random::<f64>(),
            }
        })
        .collect();
    AtomicMeasure::new(atoms).expect("positive masses")
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandRow {
    pub n: usize,
    pub min: f64,
    pub max: f64,
    pub median: f64,
}

impl BandRow {
    fn from_values(n: usize, mut values: Vec<f64>) -> Self {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        BandRow {
            n,
            min,
            max,
            median: median(&mut values),
        }
    }
}

/// `π_2(T_{2,N})` for a measure carried by the `N`-corona: the weighted
/// Frobenius norm of the monomial matrix on `H^2_N`.
pub fn exact_pi2_corona(mu: &AtomicMeasure, n: usize) -> f64 {
    hs_matrix(mu, n)
}

/// `T_{p,N}` in sample coordinates: `x_i = N^{-1/p} f(θ_i)` for `f ∈ H^p_N`,
/// mapped to `(f(z_k))_k` in `L^p(μ)`.
pub fn corona_operator(mu: &AtomicMeasure, n: usize, p: f64) -> Result<FiniteOperator> {
    let atoms = mu.atoms();
    let scale = (n as f64).powf(1.0 / p - 1.0);
    let mut m = Vec::with_capacity(atoms.len() * n);
    for a in atoms {
        let z = a.z.to_complex();
        for i in 0..n {
            let q = z * Complex64::from_polar(1.0, -TAU * i as f64 / n as f64);
            let one = Complex64::new(1.0, 0.0);
            // Σ_{m<N} q^m
            let s = if (one - q).norm() < 1e-14 {
                Complex64::new(n as f64, 0.0)
            } else {
                (one - q.powu(n as u32)) / (one - q)
            };
            m.push(s * scale);
        }
    }
    FiniteOperator::new(
        atoms.len(),
        n,
        m,
        p,
        RangeNorm::Weighted {
            p,
            weights: atoms.iter().map(|a| a.w).collect(),
        },
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagTable {
    pub p: f64,
    /// `exact` at `p = 2`, `lower-bound` otherwise.
    pub mode: String,
    pub rows: Vec<BandRow>,
    /// Trials whose weak-norm ascent did not converge for every family.
    pub unconverged: usize,
}

/// Ratio `π(T_{p,N}) / ‖β‖` over random corona measures for each `N`.
///
/// At `p = 2` both sides are exact: `π_2` is a Frobenius norm and the
/// multiplier value is `‖β‖_2`. Otherwise the numerator is a definitional
/// `π_2` lower bound and the denominator the multiplier closed form.
pub fn diag_verify(p: f64, ns: &[usize], trials: usize, seed: u64, budget: usize) -> Result<DiagTable> {
    check_exponent(p, "p")?;
    if ns.iter().any(|&n| n < 2) || trials == 0 {
        return Err(Error::invalid("N values must be >= 2 and trials positive"));
    }
    let exact = p == 2.0;
    let mut rows = Vec::new();
    let mut unconverged = 0;
    for &n in ns {
        let results: Vec<(f64, bool)> = (0..trials)
            .into_par_iter()
            .map(|t| -> Result<(f64, bool)> {
                let mut rng = trial_rng(seed, (n as u64) << 32 | t as u64);
                let mu = random_corona_measure(&mut rng, n, 8);
                let beta = beta_from_measure(&Measure::Atomic(mu.clone()), n, p)?;
                if exact {
                    Ok((exact_pi2_corona(&mu, n) / beta.norm(2.0), true))
                } else {
                    let t_op = corona_operator(&mu, n, p)?;
                    let est = pi_r_lower_bound(&t_op, 2.0, budget, &Generator::standard(n), seed ^ t as u64)?;
                    let closed = crate::summing::multiplier_pi_r(&beta, p, 2.0)?;
                    Ok((est.lower / closed.value, est.all_converged))
                }
            })
            .collect::<Result<_>>()?;
        unconverged += results.iter().filter(|r| !r.1).count();
        let ratios = results.into_iter().map(|r| r.0).collect();
        rows.push(BandRow::from_values(n, ratios));
    }
    Ok(DiagTable {
        p,
        mode: if exact { "exact" } else { "lower-bound" }.into(),
        rows,
        unconverged,
    })
}

fn random_poly(rng: &mut ChaCha8Rng, n: usize) -> PolyCoeffs {
    PolyCoeffs::new(
        (0..n)
            .map(|_| {
                let a: f64 = StandardNormal.sample(rng);
                let b: f64 = StandardNormal.sample(rng);
                Complex64::new(a, b)
            })
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZygRow {
    pub p: f64,
    pub n: usize,
    /// `zyg_quadrature / hp_norm` over random polynomials.
    pub quadrature: BandRow,
    /// `‖Σ u_j Q_j‖_p / ‖u‖_p` over random `u`.
    pub distortion: BandRow,
}

/// Quadrature and basis distortion bands on `H^p_N` for each `(p, N)`.
pub fn zyg_verify(ps: &[f64], ns: &[usize], trials: usize, seed: u64) -> Result<Vec<ZygRow>> {
    if trials == 0 {
        return Err(Error::invalid("trials must be positive"));
    }
    let mut rows = Vec::new();
    for &p in ps {
        check_exponent(p, "p")?;
        for &n in ns {
            if n == 0 || !n.is_power_of_two() {
                return Err(Error::invalid(format!("N = {n} must be a power of two")));
            }
            let grid = 16 * n;
            let basis: Vec<PolyCoeffs> = (0..n).map(|j| qj_basis(n, p, j)).collect::<Result<_>>()?;
            let results: Vec<(f64, f64)> = (0..trials)
                .into_par_iter()
                .map(|t| -> Result<(f64, f64)> {
                    let mut rng = trial_rng(seed, (n as u64) << 40 | (p.to_bits() & 0xffff) << 24 | t as u64);
                    let f = random_poly(&mut rng, n);
                    let quad = zyg_quadrature(&f, p, n)? / hp_norm(&f, p, grid)?;
                    let u: Vec<Complex64> = random_poly(&mut rng, n).coeffs().to_vec();
                    let mut sum = vec![Complex64::new(0.0, 0.0); n];
                    for (uj, q) in u.iter().zip(&basis) {
                        for (s, c) in sum.iter_mut().zip(q.coeffs()) {
                            *s += uj * c;
                        }
                    }
                    let un = lp_norm(&u.iter().map(|c| c.norm()).collect::<Vec<_>>(), p);
                    Ok((quad, hp_norm(&PolyCoeffs::new(sum), p, grid)? / un))
                })
                .collect::<Result<_>>()?;
            rows.push(ZygRow {
                p,
                n,
                quadrature: BandRow::from_values(n, results.iter().map(|r| r.0).collect()),
                distortion: BandRow::from_values(n, results.iter().map(|r| r.1).collect()),
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GfReport {
    pub grid: Vec<f64>,
    pub ratio: Vec<f64>,
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub f_norm: f64,
    pub g_norm: f64,
}

/// Pointwise `G/F` on the boundary grid.
pub fn gf_compare(mu: &Measure, p: f64, depth: u32, grid: usize) -> Result<GfReport> {
    let f = f_profile(mu, &AnalysisParams::new(p, p, depth, grid)?);
    let g = g_profile(mu, p, grid, depth)?;
    let ratio: Vec<f64> = g.values.iter().zip(&f.values).map(|(g, f)| g / f).collect();
    Ok(GfReport {
        max_ratio: ratio.iter().copied().fold(0.0, f64::max),
        min_ratio: ratio.iter().copied().fold(f64::INFINITY, f64::min),
        grid: f.grid,
        ratio,
        f_norm: f.norm,
        g_norm: g.norm,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HsReport {
    pub hs_exact: f64,
    pub hs_matrix: f64,
    pub degree: usize,
    pub relative_gap: f64,
    /// `‖Φ‖_1` at `p = 2`, comparable to `hs_exact^2` up to constants.
    pub phi_norm: f64,
    pub phi_ratio: f64,
}

pub fn hs_crosscheck(mu: &AtomicMeasure, degree: usize, grid: usize, depth: u32) -> Result<HsReport> {
    if degree == 0 {
        return Err(Error::invalid("degree must be positive"));
    }
    let exact = hs_exact(mu);
    let matrix = hs_matrix(mu, degree);
    let phi = phi_profile(&Measure::Atomic(mu.clone()), 2.0, grid, depth)?;
    Ok(HsReport {
        hs_exact: exact,
        hs_matrix: matrix,
        degree,
        relative_gap: (exact - matrix) / exact,
        phi_norm: phi.norm,
        phi_ratio: phi.norm / (exact * exact),
    })
}

/// Verdict for one `(q, r)` cell of the Hardy to Bergman injection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BergmanCell {
    pub q: f64,
    pub r: f64,
    /// `1/p + 1/r < 2/q`.
    pub predicted: bool,
    pub trend: SeriesTrend,
    pub tail: f64,
    /// Summing verdict: `q < 2` always, `q >= max(2, p)` never, otherwise the
    /// series trend.
    pub summing: bool,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BergmanTable {
    pub p: f64,
    pub depth: u32,
    pub cells: Vec<BergmanCell>,
}

/// Generation terms `2^{rn(1/p+1/r)} 4^{-nr/q} 2^{-r}` for `n = 0..=depth`.
pub fn bergman_terms(p: f64, q: f64, r: f64, depth: u32) -> Vec<f64> {
    (0..=depth)
        .map(|n| {
            let n = n as f64;
            (r * n * (1.0 / p + 1.0 / r) - 2.0 * n * r / q - r).exp2()
        })
        .collect()
}

pub fn bergman(p: f64, qs: &[f64], rs: &[f64], depth: u32) -> Result<BergmanTable> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::invalid(format!("p = {p} must be >= 1")));
    }
    let mut cells = Vec::new();
    for &q in qs {
        if !(q >= 1.0 && q <= 2.0 * p) {
            return Err(Error::invalid(format!("q = {q} must lie in [1, 2p]")));
        }
        for &r in rs {
            if !(r >= 1.0 && r.is_finite()) {
                return Err(Error::invalid(format!("r = {r} must be >= 1")));
            }
            let terms = bergman_terms(p, q, r, depth);
            let trend = classify_series(&terms);
            let predicted = 1.0 / p + 1.0 / r < 2.0 / q;
            let summing = if q < 2.0 {
                true
            } else if q >= p.max(2.0) {
                false
            } else {
                trend == SeriesTrend::Convergent
            };
            let agrees = if q < 2.0 || q >= p.max(2.0) {
                true
            } else {
                summing == predicted
            };
            cells.push(BergmanCell {
                q,
                r,
                predicted,
                trend,
                tail: tail_ratio(&terms),
                summing,
                agrees,
            });
        }
    }
    Ok(BergmanTable { p, depth, cells })
}
