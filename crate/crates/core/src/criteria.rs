//! Computable surrogates for the summing norms of a Carleson embedding, with
//! regime dispatch, window and Stolz profiles, and a series trend test.

use std::f64::consts::{PI, TAU};

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{
    corona_inner, corona_outer, generation_of_modulus, in_stolz, net, stolz_arc_halfwidth,
    DiskPoint, StolzDomain,
};
use crate::hardy::poisson_kernel;
use crate::measures::{window_table, Measure};
use crate::numerics::{
    check_exponent, conjugate, dyadic_panels, gauss_legendre, gauss_legendre_nodes, grid_lp_norm, is_power_of_two,
    peaked_circle_mean,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    #[serde(rename = "P_LE2")]
    PLe2,
    #[serde(rename = "R_LE_PPRIME")]
    RLePprime,
    #[serde(rename = "PPRIME_LT_R_LE_P")]
    PprimeLtRLeP,
    #[serde(rename = "R_GE_P")]
    RGeP,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::PLe2 => "P_LE2",
            Regime::RLePprime => "R_LE_PPRIME",
            Regime::PprimeLtRLeP => "PPRIME_LT_R_LE_P",
            Regime::RGeP => "R_GE_P",
        }
    }
}

/// Which characterization governs `π_r(J_μ)` on `H^p`. The boundary `r = p`
/// goes to the order-bounded regime and `r = p'` to the window regime.
pub fn regime(p: f64, r: f64) -> Result<Regime> {
    check_exponent(p, "p")?;
    if !(r >= 1.0) {
        return Err(Error::invalid(format!("r = {r} must be >= 1")));
    }
    let pp = conjugate(p);
    Ok(if p <= 2.0 {
        Regime::PLe2
    } else if r <= pp {
        Regime::RLePprime
    } else if r < p {
        Regime::PprimeLtRLeP
    } else {
        Regime::RGeP
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisParams {
    pub p: f64,
    pub r: f64,
    pub depth: u32,
    pub xi_grid: usize,
}

impl AnalysisParams {
    pub fn new(p: f64, r: f64, depth: u32, xi_grid: usize) -> Result<Self> {
        regime(p, r)?;
        if depth < 1 || depth > 60 {
            return Err(Error::invalid(format!("depth {depth} must lie in 1..=60")));
        }
        if xi_grid < 2 || !is_power_of_two(xi_grid) {
            return Err(Error::invalid(format!("xi grid {xi_grid} must be a power of two >= 2")));
        }
        if (xi_grid as f64) < (depth as f64 + 2.0).exp2() {
            warn!("xi grid {xi_grid} does not resolve windows of generation {depth}");
        }
        Ok(AnalysisParams { p, r, depth, xi_grid })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesTrend {
    Convergent,
    Divergent,
    Inconclusive,
}

/// Trend test for a positive series with terms indexed from `first`.
///
/// Over the last half of the terms, successive ratios below 1 that do not
/// increase flag convergence; otherwise `n · term` non-decreasing flags
/// divergence; non-increasing with a strict overall drop (or vanishing terms)
/// flags convergence; anything else is inconclusive.
pub fn classify_indexed(first: usize, terms: &[f64]) -> SeriesTrend {
    let len = terms.len();
    if len < 4 {
        return SeriesTrend::Inconclusive;
    }
    let total: f64 = terms.iter().sum();
    let half = &terms[len / 2..];
    let u: Vec<f64> = half
        .iter()
        .enumerate()
        .map(|(k, t)| ((first + len / 2 + k) as f64).max(1.0) * t)
        .collect();
    let peak = u.iter().fold(0.0f64, |m, &x| m.max(x));
    if peak == 0.0 || (total > 0.0 && peak <= 1e-14 * total) {
        return SeriesTrend::Convergent;
    }
    // Ratio test: successive ratios below 1 and not creeping back up.
    let ratios: Vec<f64> = half.windows(2).map(|w| w[1] / w[0]).collect();
    if half.iter().all(|&t| t > 0.0)
        && ratios.iter().all(|&q| q < 1.0)
        && ratios.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12))
    {
        return SeriesTrend::Convergent;
    }
    if u.windows(2).all(|w| w[1] >= w[0]) {
        return SeriesTrend::Divergent;
    }
    if u.windows(2).all(|w| w[1] <= w[0]) && u[u.len() - 1] < u[0] {
        return SeriesTrend::Convergent;
    }
    SeriesTrend::Inconclusive
}

/// Trend of per-generation terms indexed from generation 0.
pub fn classify_series(terms: &[f64]) -> SeriesTrend {
    classify_indexed(0, terms)
}

/// Last term relative to the partial sum.
pub fn tail_ratio(terms: &[f64]) -> f64 {
    let total: f64 = terms.iter().sum();
    match terms.last() {
        Some(&t) if total > 0.0 => t / total,
        _ => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesSurrogate {
    pub value: f64,
    /// The untransformed sum of the per-generation terms.
    pub raw: f64,
    pub per_generation: Vec<f64>,
    pub trend: SeriesTrend,
    pub tail: f64,
}

impl SeriesSurrogate {
    fn from_terms(terms: Vec<f64>, extra: f64, power: f64) -> Self {
        let raw = terms.iter().sum::<f64>() + extra;
        SeriesSurrogate {
            value: raw.powf(power),
            raw,
            trend: classify_series(&terms),
            tail: tail_ratio(&terms),
            per_generation: terms,
        }
    }
}

/// `[Σ_{n<=depth} Σ_j (2^n μ(R_{n,j}))^{r/p}]^{1/r}` with per-generation terms
/// `s_n = Σ_j (2^n μ(R_{n,j}))^{r/p}`.
pub fn box_sum_surrogate(mu: &Measure, params: &AnalysisParams) -> SeriesSurrogate {
    let e = params.r / params.p;
    let terms: Vec<f64> = mu
        .box_table(params.depth)
        .iter()
        .enumerate()
        .map(|(n, g)| {
            let scale = (n as f64).exp2();
            g.sum_over_boxes(n as u32, |m| (scale * m).powf(e))
        })
        .collect();
    SeriesSurrogate::from_terms(terms, 0.0, 1.0 / params.r)
}

/// `(∫ dμ/(1-|z|))^{1/p}`; `raw` is the integral, per-generation terms are its
/// restrictions to `Γ_n`, and mass beyond `depth` enters `raw` only.
pub fn order_bounded_surrogate(mu: &Measure, p: f64, depth: u32) -> Result<SeriesSurrogate> {
    check_exponent(p, "p")?;
    let mut parts = mu.generation_integrals(depth, |z| 1.0 / (1.0 - z.modulus()))?;
    let extra = parts.pop().unwrap_or(0.0);
    Ok(SeriesSurrogate::from_terms(parts, extra, 1.0 / p))
}

/// `∫ (1-|z|)^{-q/2} dμ` with its per-generation terms.
pub fn nc_integral(mu: &Measure, q: f64, depth: u32) -> Result<SeriesSurrogate> {
    if !(1.0..=2.0).contains(&q) {
        return Err(Error::invalid(format!("q = {q} must lie in [1, 2]")));
    }
    let mut parts = mu.generation_integrals(depth, |z| (1.0 - z.modulus()).powf(-q / 2.0))?;
    let extra = parts.pop().unwrap_or(0.0);
    Ok(SeriesSurrogate::from_terms(parts, extra, 1.0))
}

/// A boundary function sampled on a uniform grid, with its generation pieces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileReport {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// `per_generation[n][k]` is the generation-`n` piece at `grid[k]`.
    pub per_generation: Vec<Vec<f64>>,
    pub norm: f64,
    pub exponent: f64,
    /// The characterization value derived from `norm`.
    pub surrogate: f64,
    /// Share of the last generation in the profile.
    pub tail_estimate: f64,
}

fn xi_grid(grid: usize) -> Vec<f64> {
    (0..grid).map(|k| TAU * k as f64 / grid as f64).collect()
}

/// Combine pieces as `sqrt(Σ_n piece_n^2)` and take the `L^s` grid norm.
fn square_function_report(pieces: Vec<Vec<f64>>, grid: usize, s: f64) -> ProfileReport {
    let values: Vec<f64> = (0..grid)
        .map(|k| pieces.iter().map(|g| g[k] * g[k]).sum::<f64>().sqrt())
        .collect();
    let tail_estimate = match pieces.last() {
        Some(last) => (0..grid)
            .filter(|&k| values[k] > 0.0)
            .map(|k| (last[k] / values[k]).powi(2))
            .fold(0.0, f64::max),
        None => 0.0,
    };
    let norm = grid_lp_norm(&values, s);
    ProfileReport {
        grid: xi_grid(grid),
        values,
        per_generation: pieces,
        norm,
        exponent: s,
        surrogate: norm,
        tail_estimate,
    }
}

/// `F(ξ) = (Σ_{n=0}^{depth} F_n(ξ)^2)^{1/2}` with `F_0 = μ(𝔻)^{1/p}` and
/// `F_n = 2^n μ(W(ξ, 2^-n))^{1/p}`; norm in `L^{p'}`.
pub fn f_profile(mu: &Measure, params: &AnalysisParams) -> ProfileReport {
    let p = params.p;
    let grid = params.xi_grid;
    let table = window_table(mu, params.depth, grid);
    let total = mu.total_mass();
    let pieces: Vec<Vec<f64>> = table
        .iter()
        .enumerate()
        .map(|(n, row)| {
            if n == 0 {
                vec![total.powf(1.0 / p); grid]
            } else {
                let s = (n as f64).exp2();
                row.iter().map(|m| s * m.powf(1.0 / p)).collect()
            }
        })
        .collect();
    square_function_report(pieces, grid, conjugate(p))
}

/// `∫_{Γ_n ∩ Σ_ξ} g(|z|) dμ` for `n = 0..=depth` on the `ξ` grid.
fn stolz_pieces(mu: &Measure, g: &(dyn Fn(f64) -> f64 + Sync), grid: usize, depth: u32) -> Vec<Vec<f64>> {
    let mut pieces = vec![vec![0.0; grid]; depth as usize + 1];
    match mu {
        Measure::Atomic(_) | Measure::Pullback(_) => {
            let step = TAU / grid as f64;
            let mut diff = vec![vec![0.0; grid + 1]; depth as usize + 1];
            for (z, w) in mu.discrete_atoms().unwrap_or_default() {
                let r = z.modulus();
                let n = generation_of_modulus(r);
                if n > depth {
                    continue;
                }
                let v = w * g(r);
                let n = n as usize;
                if r < 0.5 {
                    for x in pieces[n].iter_mut() {
                        *x += v;
                    }
                    continue;
                }
                let hw = stolz_arc_halfwidth(r);
                let theta = z.arg();
                let ka = ((theta - hw) / step).ceil() as i64;
                let kb = ((theta + hw) / step).floor() as i64;
                let exact = |k: i64, pieces: &mut Vec<Vec<f64>>| {
                    let kk = k.rem_euclid(grid as i64) as usize;
                    let s = StolzDomain::new(kk as f64 * step).expect("finite angle");
                    if in_stolz(&z, &s) {
                        pieces[n][kk] += v;
                    }
                };
                if kb - ka <= 2 {
                    for k in ka - 1..=kb + 1 {
                        exact(k, &mut pieces);
                    }
                    continue;
                }
                for k in [ka - 1, ka, kb, kb + 1] {
                    exact(k, &mut pieces);
                }
                // Bulk range ka+1..=kb-1, possibly wrapping.
                let a = (ka + 1).rem_euclid(grid as i64) as usize;
                let len = (kb - 1 - (ka + 1) + 1) as usize;
                let d = &mut diff[n];
                if a + len <= grid {
                    d[a] += v;
                    d[a + len] -= v;
                } else {
                    d[a] += v;
                    d[grid] -= v;
                    d[0] += v;
                    d[a + len - grid] -= v;
                }
            }
            for (piece, d) in pieces.iter_mut().zip(&diff) {
                let mut acc = 0.0;
                for k in 0..grid {
                    acc += d[k];
                    piece[k] += acc;
                }
            }
        }
        Measure::Radial(m) => {
            for ring in m.rings() {
                let n = generation_of_modulus(ring.r);
                if n <= depth {
                    let v = ring.w * g(ring.r) * stolz_arc_halfwidth(ring.r) / PI;
                    for x in pieces[n as usize].iter_mut() {
                        *x += v;
                    }
                }
            }
        }
        Measure::Area(_) => {
            for (n, a, b) in dyadic_panels(depth) {
                let v = gauss_legendre(a, b, |r| g(r) * stolz_arc_halfwidth(r) / PI * 2.0 * r);
                pieces[n as usize] = vec![v; grid];
            }
        }
    }
    pieces
}

/// `∫_{Γ_n} |1 - conj(ξ) z|^{-eta} dμ` for `n = 0..=depth` on the `ξ` grid.
fn kernel_pieces(mu: &Measure, eta: f64, grid: usize, depth: u32) -> Vec<Vec<f64>> {
    let ring_mean = |r: f64| {
        peaked_circle_mean(1.0 - r, |t| {
            let d2 = (1.0 - r).powi(2) + 4.0 * r * (0.5 * t).sin().powi(2);
            d2.powf(-eta / 2.0)
        })
    };
    let mut pieces = vec![vec![0.0; grid]; depth as usize + 1];
    match mu {
        Measure::Atomic(_) | Measure::Pullback(_) => {
            let atoms = mu.discrete_atoms().unwrap_or_default();
            let xs = xi_grid(grid);
            for (n, piece) in pieces.iter_mut().enumerate() {
                let mine: Vec<&(DiskPoint, f64)> = atoms
                    .iter()
                    .filter(|(z, _)| generation_of_modulus(z.modulus()) as usize == n)
                    .collect();
                if mine.is_empty() {
                    continue;
                }
                *piece = xs
                    .par_iter()
                    .map(|&xi| {
                        let e = num_complex::Complex64::from_polar(1.0, -xi);
                        mine.iter()
                            .map(|(z, w)| {
                                let d = num_complex::Complex64::new(1.0, 0.0) - e * z.to_complex();
                                w * d.norm().powf(-eta)
                            })
                            .sum()
                    })
                    .collect();
            }
        }
        Measure::Radial(m) => {
            for ring in m.rings() {
                let n = generation_of_modulus(ring.r);
                if n <= depth {
                    let v = ring.w * ring_mean(ring.r);
                    for x in pieces[n as usize].iter_mut() {
                        *x += v;
                    }
                }
            }
        }
        Measure::Area(_) => {
            for (n, a, b) in dyadic_panels(depth) {
                let v = gauss_legendre(a, b, |r| 2.0 * r * ring_mean(r));
                pieces[n as usize] = vec![v; grid];
            }
        }
    }
    pieces
}

/// Sum generation pieces and report the `L^s` norm with surrogate `norm^{power}`.
fn additive_report(pieces: Vec<Vec<f64>>, grid: usize, s: f64, power: f64) -> ProfileReport {
    let values: Vec<f64> = (0..grid).map(|k| pieces.iter().map(|g| g[k]).sum()).collect();
    let norm = grid_lp_norm(&values, s);
    let tail_estimate = match pieces.last() {
        Some(last) if norm > 0.0 => grid_lp_norm(last, s) / norm,
        _ => 0.0,
    };
    ProfileReport {
        grid: xi_grid(grid),
        values,
        per_generation: pieces,
        norm,
        exponent: s,
        surrogate: norm.powf(power),
        tail_estimate,
    }
}

fn check_profile_args(p: f64, grid: usize) -> Result<()> {
    check_exponent(p, "p")?;
    if grid < 2 || !is_power_of_two(grid) {
        return Err(Error::invalid(format!("xi grid {grid} must be a power of two >= 2")));
    }
    Ok(())
}

/// `Φ(ξ) = ∫_{Σ_ξ} (1-|z|^2)^{-(1+p/2)} dμ`, norm in `L^{2/p}`, surrogate `norm^{1/p}`.
pub fn phi_profile(mu: &Measure, p: f64, grid: usize, depth: u32) -> Result<ProfileReport> {
    stolz_weighted_profile(mu, p, p, grid, depth)
}

/// `Ψ(ξ) = ∫ |1 - conj(ξ) z|^{-(1+p/2)} dμ`, norm in `L^{2/p}`, surrogate `norm^{1/p}`.
pub fn psi_profile(mu: &Measure, p: f64, grid: usize, depth: u32) -> Result<ProfileReport> {
    check_profile_args(p, grid)?;
    let pieces = kernel_pieces(mu, 1.0 + p / 2.0, grid, depth);
    Ok(additive_report(pieces, grid, 2.0 / p, 1.0 / p))
}

/// Exponent `γ = 2p / (2p - 2q + pq)` for the `H^p → L^q(μ)` Stolz criterion.
pub fn q_variant_gamma(p: f64, q: f64) -> f64 {
    2.0 * p / (2.0 * p - 2.0 * q + p * q)
}

fn stolz_weighted_profile(mu: &Measure, p: f64, q: f64, grid: usize, depth: u32) -> Result<ProfileReport> {
    check_profile_args(p, grid)?;
    let eta = 1.0 + q / 2.0;
    let g = move |r: f64| (1.0 - r * r).powf(-eta);
    let pieces = stolz_pieces(mu, &g, grid, depth);
    let gamma = q_variant_gamma(p, q);
    // ‖Φ_q‖_γ^{1/q} equals (∫Φ_q^γ)^{1/(qγ)}.
    Ok(additive_report(pieces, grid, gamma, 1.0 / q))
}

/// Stolz integral with weight exponent `1 + q/2` in `L^γ`; the surrogate is
/// `(∫ Φ_q^γ dλ)^{1/(qγ)}`.
pub fn q_variant_surrogate(mu: &Measure, p: f64, q: f64, grid: usize, depth: u32) -> Result<ProfileReport> {
    if !(p <= 2.0) {
        return Err(Error::invalid(format!("p = {p} must be <= 2 for the q-variant")));
    }
    if !(1.0..=2.0).contains(&q) {
        return Err(Error::invalid(format!("q = {q} must lie in [1, 2]")));
    }
    stolz_weighted_profile(mu, p, q, grid, depth)
}

/// `(∫_𝕋 (∫ |1 - conj(w) z|^{-2} dμ)^{p'/2} dλ(w))^{1/p'}`, the kernel form of
/// the `q = 2` criterion.
pub fn kernel_l2_criterion(mu: &Measure, p: f64, grid: usize, depth: u32) -> Result<f64> {
    check_profile_args(p, grid)?;
    let pieces = kernel_pieces(mu, 2.0, grid, depth);
    let pp = conjugate(p);
    let values: Vec<f64> = (0..grid).map(|k| pieces.iter().map(|g| g[k]).sum()).collect();
    let mean = values.iter().map(|v| v.powf(pp / 2.0)).sum::<f64>() / grid as f64;
    Ok(mean.powf(1.0 / pp))
}

/// Cell masses `μ(E_{n,k})` of the generation-`n` net.
fn cell_masses(mu: &Measure, n: u32) -> (Vec<DiskPoint>, Vec<f64>) {
    let g = net(n);
    let mut masses = vec![0.0; g.len()];
    let samples = 8 * g.len().max(1);
    match mu {
        Measure::Atomic(_) | Measure::Pullback(_) => {
            for (z, w) in mu.discrete_atoms().unwrap_or_default() {
                if let Some(k) = g.cell_of(&z) {
                    masses[k] += w;
                }
            }
        }
        Measure::Radial(m) => {
            for ring in m.rings() {
                if generation_of_modulus(ring.r) != n {
                    continue;
                }
                for s in 0..samples {
                    let z = DiskPoint::from_polar(ring.r, TAU * (s as f64 + 0.5) / samples as f64)
                        .expect("ring inside disk");
                    if let Some(k) = g.cell_of(&z) {
                        masses[k] += ring.w / samples as f64;
                    }
                }
            }
        }
        Measure::Area(_) => {
            let a = if n == 0 { 0.0 } else { corona_inner(n) };
            let b = corona_outer(n);
            for (r, w) in gauss_legendre_nodes(a, b) {
                for s in 0..samples {
                    let z = DiskPoint::from_polar(r, TAU * (s as f64 + 0.5) / samples as f64)
                        .expect("node inside disk");
                    if let Some(k) = g.cell_of(&z) {
                        masses[k] += w * 2.0 * r / samples as f64;
                    }
                }
            }
        }
    }
    (g.points().to_vec(), masses)
}

/// `G(ξ) = (G_0^2 + Σ_{1<=n<=depth} G_n(ξ)^2)^{1/2}` with `G_0 = μ(D(0,1/2))^{1/p}`
/// and `G_n(ξ)^2 = Σ_k μ(E_{n,k})^{2/p} P_{a_{n,k}}(ξ)^2`; norm in `L^{p'}`.
pub fn g_profile(mu: &Measure, p: f64, grid: usize, depth: u32) -> Result<ProfileReport> {
    check_profile_args(p, grid)?;
    let xs = xi_grid(grid);
    let mut pieces = vec![vec![mu.annulus_mass(0.0, 0.5).powf(1.0 / p); grid]];
    for n in 1..=depth {
        let (points, masses) = cell_masses(mu, n);
        let charged: Vec<(DiskPoint, f64)> = points
            .into_iter()
            .zip(masses)
            .filter(|(_, m)| *m > 0.0)
            .map(|(a, m)| (a, m.powf(2.0 / p)))
            .collect();
        let piece: Vec<f64> = xs
            .par_iter()
            .map(|&xi| {
                charged
                    .iter()
                    .map(|(a, m)| m * poisson_kernel(a, xi).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        pieces.push(piece);
    }
    Ok(square_function_report(pieces, grid, conjugate(p)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "summing-likely")]
    SummingLikely,
    #[serde(rename = "not-summing-likely")]
    NotSummingLikely,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummingVerdict {
    pub regime: Regime,
    pub surrogate: f64,
    pub converged: bool,
    pub verdict: Verdict,
    pub per_generation: Vec<f64>,
    pub trend: SeriesTrend,
    pub tail: f64,
}

/// Evaluate the characterization that governs `(p, r)` and judge convergence.
pub fn summing_report(mu: &Measure, params: &AnalysisParams) -> Result<SummingVerdict> {
    let reg = regime(params.p, params.r)?;
    let (surrogate, per_generation) = match reg {
        Regime::PLe2 => {
            let prof = phi_profile(mu, params.p, params.xi_grid, params.depth)?;
            let s = prof.exponent;
            let terms = prof.per_generation.iter().map(|g| grid_lp_norm(g, s)).collect();
            (prof.surrogate, terms)
        }
        Regime::RLePprime => {
            let prof = f_profile(mu, params);
            let terms = prof
                .per_generation
                .iter()
                .map(|g| g.iter().fold(0.0f64, |m, v| m.max(v * v)))
                .collect();
            (prof.norm, terms)
        }
        Regime::PprimeLtRLeP => {
            let b = box_sum_surrogate(mu, params);
            (b.value, b.per_generation)
        }
        Regime::RGeP => {
            let ob = order_bounded_surrogate(mu, params.p, params.depth)?;
            (ob.value, ob.per_generation)
        }
    };
    let trend = classify_series(&per_generation);
    let tail = tail_ratio(&per_generation);
    let verdict = match trend {
        SeriesTrend::Convergent => Verdict::SummingLikely,
        SeriesTrend::Divergent => Verdict::NotSummingLikely,
        SeriesTrend::Inconclusive => Verdict::Inconclusive,
    };
    Ok(SummingVerdict {
        regime: reg,
        surrogate,
        converged: tail < 1e-3,
        verdict,
        per_generation,
        trend,
        tail,
    })
}
