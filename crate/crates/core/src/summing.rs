//! Summing norms: closed forms for diagonal multipliers, exact Hilbert–Schmidt
//! values, and definitional lower bounds for `π_r` of finite matrices.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{AtomicMeasure, Measure};
use crate::numerics::{check_exponent, conjugate, lp_norm};

/// Nonnegative diagonal `β` of the multiplier `e_j ↦ β_j e_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalWeights {
    beta: Vec<f64>,
}

impl DiagonalWeights {
    pub fn new(beta: Vec<f64>) -> Result<Self> {
        if beta.is_empty() {
            return Err(Error::invalid("multiplier weights must be nonempty"));
        }
        if beta.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(Error::invalid("multiplier weights must be finite and nonnegative"));
        }
        Ok(DiagonalWeights { beta })
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn norm(&self, s: f64) -> f64 {
        lp_norm(&self.beta, s)
    }

    /// The multiplier as an operator `ℓ^p_N → ℓ^p_N`.
    pub fn operator(&self, p: f64) -> FiniteOperator {
        let n = self.beta.len();
        let mut m = vec![Complex64::new(0.0, 0.0); n * n];
        for (i, &b) in self.beta.iter().enumerate() {
            m[i * n + i] = Complex64::new(b, 0.0);
        }
        FiniteOperator::new(n, n, m, p, RangeNorm::Plain { q: p }).expect("square diagonal")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MultiplierRegime {
    /// `p <= 2`: equivalent to `‖β‖_2`.
    #[serde(rename = "P_LE2")]
    Hilbertian,
    /// `p >= 2`, `r <= p'`: equivalent to `‖β‖_{p'}`.
    #[serde(rename = "R_LE_PPRIME")]
    SmallR,
    /// `p >= 2`, `p' <= r <= p`: equal to `‖β‖_r`.
    #[serde(rename = "PPRIME_LE_R_LE_P")]
    Middle,
    /// `p >= 2`, `r >= p`: equivalent to `‖β‖_p`.
    #[serde(rename = "R_GE_P")]
    LargeR,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultiplierNorm {
    pub value: f64,
    pub regime: MultiplierRegime,
    /// The value is the norm itself rather than an equivalent quantity.
    pub exact: bool,
}

/// `π_r` of the diagonal multiplier on `ℓ^p`, exactly or up to constants.
pub fn multiplier_pi_r(beta: &DiagonalWeights, p: f64, r: f64) -> Result<MultiplierNorm> {
    check_exponent(p, "p")?;
    if !(r >= 1.0) {
        return Err(Error::invalid(format!("r = {r} must be >= 1")));
    }
    let pp = conjugate(p);
    let (value, regime, exact) = if p <= 2.0 {
        (beta.norm(2.0), MultiplierRegime::Hilbertian, p == 2.0)
    } else if r < pp {
        (beta.norm(pp), MultiplierRegime::SmallR, false)
    } else if r <= p {
        (beta.norm(r), MultiplierRegime::Middle, true)
    } else {
        (beta.norm(p), MultiplierRegime::LargeR, false)
    };
    Ok(MultiplierNorm { value, regime, exact })
}

/// `β_j = (N μ(𝓡_{N,j}))^{1/p}` over the `N` boxes of the `N`-corona.
pub fn beta_from_measure(mu: &Measure, n: usize, p: f64) -> Result<DiagonalWeights> {
    check_exponent(p, "p")?;
    if n == 0 {
        return Err(Error::invalid("N must be positive"));
    }
    let nf = n as f64;
    DiagonalWeights::new(
        mu.corona_box_masses(n)
            .into_iter()
            .map(|m| (nf * m).powf(1.0 / p))
            .collect(),
    )
}

/// `(Σ_k w_k / (1 - |z_k|^2))^{1/2}`, the Hilbert–Schmidt norm of `H^2 → L^2(μ)`.
pub fn hs_exact(mu: &AtomicMeasure) -> f64 {
    Measure::Atomic(mu.clone())
        .integrate(|z| 1.0 / (1.0 - z.modulus().powi(2)))
        .expect("finite on the open disk")
        .sqrt()
}

/// Frobenius norm of the matrix with rows `√w_k · z_k^m`, `m < M`.
pub fn hs_matrix(mu: &AtomicMeasure, m: usize) -> f64 {
    let mut total = 0.0;
    for a in mu.atoms() {
        let r2 = a.z.modulus().powi(2);
        let mut pow = 1.0;
        let mut row = 0.0;
        for _ in 0..m {
            row += pow;
            pow *= r2;
        }
        total += a.w * row;
    }
    total.sqrt()
}

/// Norm on the target space of a finite operator.
#[derive(Debug, Clone, PartialEq)]
pub enum RangeNorm {
    /// `(Σ_k w_k |y_k|^p)^{1/p}`, the `L^p` norm of a discrete measure.
    Weighted { p: f64, weights: Vec<f64> },
    /// Plain `ℓ^q`.
    Plain { q: f64 },
}

/// Matrix acting from `ℓ^p_N` (coordinates) to a finite `L^q` space.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteOperator {
    rows: usize,
    cols: usize,
    matrix: Vec<Complex64>,
    domain_p: f64,
    range: RangeNorm,
}

impl FiniteOperator {
    pub fn new(rows: usize, cols: usize, matrix: Vec<Complex64>, domain_p: f64, range: RangeNorm) -> Result<Self> {
        check_exponent(domain_p, "domain exponent")?;
        if matrix.len() != rows * cols || cols == 0 {
            return Err(Error::invalid("matrix shape does not match its entries"));
        }
        if let RangeNorm::Weighted { weights, p } = &range {
            check_exponent(*p, "range exponent")?;
            if weights.len() != rows || weights.iter().any(|w| !(*w > 0.0)) {
                return Err(Error::invalid("range weights must be positive, one per row"));
            }
        }
        Ok(FiniteOperator {
            rows,
            cols,
            matrix,
            domain_p,
            range,
        })
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn domain_p(&self) -> f64 {
        self.domain_p
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.rows)
            .map(|i| {
                self.matrix[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn range_norm(&self, y: &[Complex64]) -> f64 {
        match &self.range {
            RangeNorm::Plain { q } => lp_norm(&y.iter().map(|v| v.norm()).collect::<Vec<_>>(), *q),
            RangeNorm::Weighted { p, weights } => {
                let mags: Vec<f64> = y
                    .iter()
                    .zip(weights)
                    .map(|(v, w)| w.powf(1.0 / p) * v.norm())
                    .collect();
                lp_norm(&mags, *p)
            }
        }
    }

    pub fn scaled(&self, c: f64) -> FiniteOperator {
        FiniteOperator {
            matrix: self.matrix.iter().map(|a| a * c).collect(),
            ..self.clone()
        }
    }

    /// `self ∘ diag(d)`.
    pub fn compose_diagonal(&self, d: &[f64]) -> FiniteOperator {
        let mut m = self.matrix.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[i * self.cols + j] *= d[j];
            }
        }
        FiniteOperator { matrix: m, ..self.clone() }
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().all(|a| a.norm() == 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Canonical,
    Random,
    Rademacher,
    Kernel,
    PhiCurve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestFamily {
    vectors: Vec<Vec<Complex64>>,
    provenance: Provenance,
}

impl TestFamily {
    pub fn new(vectors: Vec<Vec<Complex64>>, provenance: Provenance) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::invalid("test family must be nonempty"));
        }
        let dim = vectors[0].len();
        if vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::invalid("test vectors must share one dimension"));
        }
        if vectors.iter().any(|v| v.iter().all(|c| c.norm() == 0.0)) {
            return Err(Error::invalid("test family contains a zero vector"));
        }
        Ok(TestFamily { vectors, provenance })
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vectors
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn scaled(&self, c: f64) -> TestFamily {
        TestFamily {
            vectors: self
                .vectors
                .iter()
                .map(|v| v.iter().map(|x| x * c).collect())
                .collect(),
            provenance: self.provenance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakNormEstimate {
    pub value: f64,
    pub converged: bool,
    pub evaluations: usize,
}

/// Restarts from random points in the dual ball.
pub const RESTARTS: usize = 32;
/// Relative Frank–Wolfe gap below which an ascent counts as converged.
pub const CONVERGENCE_GAP: f64 = 1e-8;

struct WeakObjective<'a> {
    vectors: &'a [Vec<Complex64>],
    p: f64,
    r: f64,
    evaluations: usize,
}

impl WeakObjective<'_> {
    /// Returns `Σ|⟨x, x_j⟩|^r` and the ascent direction `Σ w_j conj(x_j)`.
    fn eval(&mut self, x: &[Complex64]) -> (f64, Vec<Complex64>) {
        self.evaluations += 1;
        let mut value = 0.0;
        let mut grad = vec![Complex64::new(0.0, 0.0); x.len()];
        for v in self.vectors {
            let y: Complex64 = v.iter().zip(x).map(|(a, b)| a * b).sum();
            let m2 = y.norm_sqr();
            value += m2.powf(self.r / 2.0);
            let w = (m2 + 1e-18).powf((self.r - 2.0) / 2.0) * y.conj();
            for (g, a) in grad.iter_mut().zip(v) {
                *g += w.conj() * a.conj();
            }
        }
        (value, grad)
    }

    /// Point of the unit `ℓ^{p'}` sphere maximizing `Re Σ conj(g_i) x_i`.
    fn dual_map(&self, g: &[Complex64]) -> Option<Vec<Complex64>> {
        let gn = lp_norm(&g.iter().map(|c| c.norm()).collect::<Vec<_>>(), self.p);
        if gn == 0.0 || !gn.is_finite() {
            return None;
        }
        Some(
            g.iter()
                .map(|c| {
                    let m = c.norm();
                    if m == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        c * ((m / gn).powf(self.p - 1.0) / m)
                    }
                })
                .collect(),
        )
    }

    fn normalize(&self, x: &[Complex64]) -> Option<Vec<Complex64>> {
        let n = lp_norm(&x.iter().map(|c| c.norm()).collect::<Vec<_>>(), conjugate(self.p));
        if n == 0.0 {
            None
        } else {
            Some(x.iter().map(|c| c / n).collect())
        }
    }

    /// Fixed-point ascent from `x`; returns the best value, its point, and
    /// whether the relative gap fell below the threshold.
    fn ascend(&mut self, mut x: Vec<Complex64>, max_evals: usize) -> (f64, bool) {
        let mut best = 0.0;
        let mut converged = false;
        for _ in 0..max_evals.max(1) {
            let (v, g) = self.eval(&x);
            best = f64::max(best, v);
            let gn = lp_norm(&g.iter().map(|c| c.norm()).collect::<Vec<_>>(), self.p);
            let inner: f64 = g.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
            if gn == 0.0 {
                converged = v == 0.0;
                break;
            }
            if (gn - inner) / gn < CONVERGENCE_GAP {
                converged = true;
                break;
            }
            match self.dual_map(&g) {
                Some(next) => x = next,
                None => break,
            }
        }
        (best, converged)
    }
}

/// Largest `(Σ_j |⟨x*, x_j⟩|^r)^{1/r}` found over the unit ball of `ℓ^{p'}`.
///
/// Canonical candidates (dual basis vectors and normalized sign patterns) are
/// scored first; the best few and `RESTARTS` random points are then improved
/// by the duality-map iteration `x ← J_p(∇)`. The value is attained by an
/// explicit point, so it never exceeds the true supremum.
pub fn weak_lr_norm(fam: &TestFamily, p: f64, r: f64, budget: usize, seed: u64) -> Result<WeakNormEstimate> {
    check_exponent(p, "p")?;
    if !(r >= 1.0) {
        return Err(Error::invalid(format!("r = {r} must be >= 1")));
    }
    let n = fam.dim();
    let mut obj = WeakObjective {
        vectors: fam.vectors(),
        p,
        r,
        evaluations: 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates: Vec<Vec<Complex64>> = Vec::new();
    for i in 0..n {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[i] = Complex64::new(1.0, 0.0);
        candidates.push(e);
    }
    let patterns = if n < 7 { 1usize << n.saturating_sub(1) } else { 64 };
    for k in 0..patterns {
        let signs: Vec<Complex64> = (0..n)
            .map(|i| {
                let neg = if n < 7 { i > 0 && (k >> (i - 1)) & 1 == 1 } else { rng.random::<bool>() };
                Complex64::new(if neg { -1.0 } else { 1.0 }, 0.0)
            })
            .collect();
        if let Some(x) = obj.normalize(&signs) {
            candidates.push(x);
        }
    }
    let mut scored: Vec<(f64, usize)> = Vec::with_capacity(candidates.len());
    for (i, c) in candidates.iter().enumerate() {
        let (v, _) = obj.eval(c);
        scored.push((v, i));
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut best = scored.first().map(|s| s.0).unwrap_or(0.0);
    let mut best_converged = false;

    let mut starts: Vec<Vec<Complex64>> = scored.iter().take(4).map(|s| candidates[s.1].clone()).collect();
    for _ in 0..RESTARTS {
        let raw: Vec<Complex64> = (0..n)
            .map(|_| {
                let a: f64 = StandardNormal.sample(&mut rng);
                let b: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(a, b)
            })
            .collect();
        if let Some(x) = obj.normalize(&raw) {
            starts.push(x);
        }
    }
    let total = starts.len();
    for (k, x) in starts.into_iter().enumerate() {
        let left = budget.saturating_sub(obj.evaluations);
        if left == 0 {
            break;
        }
        let share = (left / (total - k)).max(1);
        let (v, conv) = obj.ascend(x, share);
        if v > best || (v == best && conv) {
            best_converged = conv || (v == best && best_converged);
            best = v;
        }
    }
    Ok(WeakNormEstimate {
        value: best.powf(1.0 / r),
        converged: best_converged,
        evaluations: obj.evaluations,
    })
}

/// Parameters of the test curve `Φ(t)(z) = 2^{-nα} / (1 - ρ_n z e^{-2πi(t-n)})`
/// on `t ∈ [n-1, n)` with `α = 1/p' - 1/r` and `ρ_n = 1 - 2^-n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiCurveParams {
    pub p: f64,
    pub r: f64,
    pub n_max: u32,
}

impl PhiCurveParams {
    pub fn new(p: f64, r: f64, n_max: u32) -> Result<Self> {
        check_exponent(p, "p")?;
        if !(r > conjugate(p)) {
            return Err(Error::invalid(format!("r = {r} must exceed p' = {}", conjugate(p))));
        }
        if n_max == 0 || n_max > 20 {
            return Err(Error::invalid("n_max must lie in 1..=20"));
        }
        Ok(PhiCurveParams { p, r, n_max })
    }

    pub fn alpha(&self) -> f64 {
        1.0 / conjugate(self.p) - 1.0 / self.r
    }

    /// Kernel point `a` with `Φ(t) = 2^{-nα} K_a`, `K_a(z) = 1/(1 - conj(a) z)`.
    pub fn kernel_point(&self, t: f64) -> (u32, Complex64) {
        let n = (t.floor() as u32 + 1).max(1);
        let rho = 1.0 - (-(n as f64)).exp2();
        (n, Complex64::from_polar(rho, TAU * (t - n as f64)))
    }

    /// `Φ(t)(z)`.
    pub fn eval(&self, t: f64, z: Complex64) -> Complex64 {
        let (n, a) = self.kernel_point(t);
        let scale = (-(n as f64) * self.alpha()).exp2();
        scale / (Complex64::new(1.0, 0.0) - a.conj() * z)
    }
}

/// Sample representation `N^{-1/p} f(e^{2πij/N})` of `H^p_N` inside `ℓ^p_N`.
pub fn sample_vector(p: f64, n: usize, f: impl Fn(Complex64) -> Complex64) -> Vec<Complex64> {
    let s = (n as f64).powf(-1.0 / p);
    (0..n)
        .map(|j| f(Complex64::from_polar(1.0, TAU * j as f64 / n as f64)) * s)
        .collect()
}

/// Discretized curve: for each interval `I_{n,j} = [n-1+j2^-n, n-1+(j+1)2^-n)`
/// and `n <= n_max`, `samples` equally spaced `t` values give the degree-`<N`
/// truncation of `Φ(t)`, in sample coordinates and weighted by
/// `(|I_{n,j}|/samples)^{1/r}`.
pub fn phi_curve_family(params: &PhiCurveParams, samples: usize, n_dim: usize) -> Result<TestFamily> {
    if samples == 0 || n_dim == 0 {
        return Err(Error::invalid("samples and dimension must be positive"));
    }
    let mut vectors = Vec::new();
    for n in 1..=params.n_max {
        let width = (-(n as f64)).exp2();
        let weight = (width / samples as f64).powf(1.0 / params.r);
        for j in 0..(1u64 << n) {
            for s in 0..samples {
                let t = (n - 1) as f64 + width * (j as f64 + (s as f64 + 0.5) / samples as f64);
                let (_, a) = params.kernel_point(t);
                let scale = (-(n as f64) * params.alpha()).exp2() * weight;
                let ca = a.conj();
                // Truncated kernel Σ_{k<N} (conj(a) z)^k.
                let v = sample_vector(params.p, n_dim, |z| {
                    let q = ca * z;
                    let one = Complex64::new(1.0, 0.0);
                    if (one - q).norm() < 1e-300 {
                        Complex64::new(n_dim as f64, 0.0)
                    } else {
                        (one - q.powu(n_dim as u32)) / (one - q)
                    }
                });
                vectors.push(v.into_iter().map(|c| c * scale).collect());
            }
        }
    }
    TestFamily::new(vectors, Provenance::PhiCurve)
}

/// Family generators for `pi_r_lower_bound`.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    Canonical,
    Gaussian { count: usize },
    Rademacher { count: usize },
    PhiCurve { n_max: u32, samples: usize },
}

impl Generator {
    pub fn standard(n: usize) -> Vec<Generator> {
        vec![
            Generator::Canonical,
            Generator::Gaussian { count: n.max(2) },
            Generator::Rademacher { count: n.max(2) },
            Generator::PhiCurve { n_max: 4, samples: 1 },
        ]
    }

    fn family(&self, dim: usize, p: f64, r: f64, rng: &mut ChaCha8Rng) -> Result<Option<TestFamily>> {
        Ok(Some(match self {
            Generator::Canonical => TestFamily::new(
                (0..dim)
                    .map(|i| {
                        let mut e = vec![Complex64::new(0.0, 0.0); dim];
                        e[i] = Complex64::new(1.0, 0.0);
                        e
                    })
                    .collect(),
                Provenance::Canonical,
            )?,
            Generator::Gaussian { count } => TestFamily::new(
                (0..*count)
                    .map(|_| {
                        (0..dim)
                            .map(|_| {
                                let a: f64 = StandardNormal.sample(rng);
                                let b: f64 = StandardNormal.sample(rng);
                                Complex64::new(a, b)
                            })
                            .collect()
                    })
                    .collect(),
                Provenance::Random,
            )?,
            Generator::Rademacher { count } => TestFamily::new(
                (0..*count)
                    .map(|_| {
                        (0..dim)
                            .map(|_| Complex64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0))
                            .collect()
                    })
                    .collect(),
                Provenance::Rademacher,
            )?,
            Generator::PhiCurve { n_max, samples } => {
                if !(r > conjugate(p)) {
                    return Ok(None);
                }
                phi_curve_family(&PhiCurveParams::new(p, r, *n_max)?, *samples, dim)?
            }
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummingEstimate {
    /// Best certified ratio over families whose weak norm ascent converged.
    pub lower: f64,
    pub heuristic_upper: Option<f64>,
    pub method: String,
    pub budget_used: usize,
    /// Best ratio over every family, converged or not.
    pub uncertified_best: f64,
    pub all_converged: bool,
}

/// Evaluate `(Σ‖T x_j‖^r)^{1/r} / weak_r(x_j)` for one family.
pub fn family_ratio(t: &FiniteOperator, fam: &TestFamily, r: f64, budget: usize, seed: u64) -> Result<(f64, WeakNormEstimate)> {
    let images: Vec<f64> = fam.vectors().iter().map(|x| t.range_norm(&t.apply(x))).collect();
    let num = lp_norm(&images, r);
    let weak = weak_lr_norm(fam, t.domain_p(), r, budget, seed)?;
    Ok((if weak.value > 0.0 { num / weak.value } else { 0.0 }, weak))
}

/// Lower bound for `π_r(T)` over generated test families.
pub fn pi_r_lower_bound(
    t: &FiniteOperator,
    r: f64,
    budget: usize,
    generators: &[Generator],
    seed: u64,
) -> Result<SummingEstimate> {
    if !(r >= 1.0) {
        return Err(Error::invalid(format!("r = {r} must be >= 1")));
    }
    let mut lower = 0.0f64;
    let mut uncertified = 0.0f64;
    let mut used = 0usize;
    let mut all_converged = true;
    let mut best_name = String::from("none");
    if !t.is_zero() {
        let share = budget / generators.len().max(1);
        for (k, g) in generators.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(k as u64 + 1)));
            let fam = match g.family(t.cols(), t.domain_p(), r, &mut rng)? {
                Some(f) => f,
                None => continue,
            };
            let (ratio, weak) = family_ratio(t, &fam, r, share, seed.wrapping_add(k as u64))?;
            used += weak.evaluations;
            uncertified = uncertified.max(ratio);
            if weak.converged {
                if ratio > lower {
                    lower = ratio;
                    best_name = format!("{:?}", fam.provenance()).to_lowercase();
                }
            } else {
                all_converged = false;
            }
        }
    }
    Ok(SummingEstimate {
        lower,
        heuristic_upper: None,
        method: format!("definitional ratio over generated families; best: {best_name}"),
        budget_used: used,
        uncertified_best: uncertified,
        all_converged,
    })
}

/// `π_r` lower bound for a diagonal multiplier, reporting the closed form as the upper value.
pub fn multiplier_estimate(beta: &DiagonalWeights, p: f64, r: f64, budget: usize, seed: u64) -> Result<SummingEstimate> {
    let t = beta.operator(p);
    let mut est = pi_r_lower_bound(&t, r, budget, &Generator::standard(beta.beta().len()), seed)?;
    let closed = multiplier_pi_r(beta, p, r)?;
    if closed.exact {
        est.heuristic_upper = Some(closed.value.max(est.lower));
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DiskPoint;
    use crate::measures::Atom;

    #[test]
    fn multiplier_examples() {
        let b = DiagonalWeights::new(vec![1.0, 1.0]).unwrap();
        let m = multiplier_pi_r(&b, 4.0, 2.0).unwrap();
        assert!((m.value - 2f64.sqrt()).abs() < 1e-15 && m.exact);
        let b = DiagonalWeights::new(vec![3.0, 4.0]).unwrap();
        for &r in &[1.0, 2.0, 7.0] {
            assert!((multiplier_pi_r(&b, 1.5, r).unwrap().value - 5.0).abs() < 1e-14);
        }
        let single = DiagonalWeights::new(vec![0.0, 2.5, 0.0]).unwrap();
        for &(p, r) in &[(1.5, 3.0), (4.0, 1.0), (4.0, 2.0), (4.0, 9.0)] {
            assert!((multiplier_pi_r(&single, p, r).unwrap().value - 2.5).abs() < 1e-15);
        }
        // r = p: both adjacent formulas agree.
        let b = DiagonalWeights::new(vec![0.3, 1.2, 2.0]).unwrap();
        let at = multiplier_pi_r(&b, 4.0, 4.0).unwrap().value;
        let above = multiplier_pi_r(&b, 4.0, 4.5).unwrap().value;
        assert!((at - above).abs() < 1e-14);
        assert!(DiagonalWeights::new(vec![]).is_err());
    }

    #[test]
    fn hs_examples() {
        let d0 = AtomicMeasure::dirac(DiskPoint::origin(), 1.0).unwrap();
        assert_eq!(hs_exact(&d0), 1.0);
        assert_eq!(hs_matrix(&d0, 7), 1.0);
        let d = AtomicMeasure::dirac(DiskPoint::new(0.5, 0.0).unwrap(), 1.0).unwrap();
        assert!((hs_exact(&d) - (4.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((hs_matrix(&d, 64) - hs_exact(&d)).abs() < 1e-9);
        let mut prev = 0.0;
        for m in 1..40 {
            let v = hs_matrix(&d, m);
            assert!(v >= prev);
            prev = v;
        }
        let two = AtomicMeasure::new(vec![
            Atom { z: DiskPoint::new(0.5, 0.0).unwrap(), w: 1.0 },
            Atom { z: DiskPoint::new(0.0, 0.7).unwrap(), w: 2.0 },
        ])
        .unwrap();
        let other = AtomicMeasure::dirac(DiskPoint::new(0.0, 0.7).unwrap(), 2.0).unwrap();
        assert!((hs_exact(&two).powi(2) - hs_exact(&d).powi(2) - hs_exact(&other).powi(2)).abs() < 1e-13);
    }

    #[test]
    fn weak_norm_examples() {
        let canon = Generator::Canonical
            .family(3, 4.0, 2.0, &mut ChaCha8Rng::seed_from_u64(1))
            .unwrap()
            .unwrap();
        let w = weak_lr_norm(&canon, 4.0, 2.0, 10_000, 7).unwrap();
        assert!((w.value - 1.0).abs() < 1e-12 && w.converged);
        let x = vec![Complex64::new(0.3, 0.1), Complex64::new(-1.0, 0.0), Complex64::new(0.0, 0.5)];
        let single = TestFamily::new(vec![x.clone()], Provenance::Random).unwrap();
        let w = weak_lr_norm(&single, 3.0, 2.0, 10_000, 7).unwrap();
        let exact = lp_norm(&x.iter().map(|c| c.norm()).collect::<Vec<_>>(), 3.0);
        assert!((w.value - exact).abs() < 1e-9 * exact, "{} vs {exact}", w.value);
        let w2 = weak_lr_norm(&single.scaled(2.5), 3.0, 2.0, 10_000, 7).unwrap();
        assert!((w2.value - 2.5 * w.value).abs() < 1e-12);
    }

    #[test]
    fn canonical_weak_norm_small_exponent() {
        // r < p': the supremum of ‖x*‖_r over the p'-ball is N^{1/r - 1/p'}.
        let (p, r, n) = (4.0, 1.0, 3usize);
        let canon = Generator::Canonical
            .family(n, p, r, &mut ChaCha8Rng::seed_from_u64(1))
            .unwrap()
            .unwrap();
        let w = weak_lr_norm(&canon, p, r, 10_000, 3).unwrap();
        let exact = (n as f64).powf(1.0 / r - 1.0 / conjugate(p));
        assert!((w.value - exact).abs() < 1e-9, "{} vs {exact}", w.value);
    }

    #[test]
    fn pi_r_examples() {
        let b = DiagonalWeights::new(vec![3.0, 4.0]).unwrap();
        let est = pi_r_lower_bound(&b.operator(4.0), 2.0, 10_000, &[Generator::Canonical], 42).unwrap();
        assert!((est.lower - 5.0).abs() < 1e-12);
        let zero = DiagonalWeights::new(vec![0.0, 0.0]).unwrap();
        let est = pi_r_lower_bound(&zero.operator(4.0), 2.0, 1000, &Generator::standard(2), 42).unwrap();
        assert_eq!(est.lower, 0.0);
        let id = DiagonalWeights::new(vec![1.0, 1.0]).unwrap();
        let est = pi_r_lower_bound(&id.operator(2.0), 2.0, 10_000, &Generator::standard(2), 42).unwrap();
        assert!((est.lower - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn phi_curve_examples() {
        let params = PhiCurveParams::new(3.0, 2.0, 3).unwrap();
        let a = params.alpha();
        let v = params.eval(0.5, Complex64::new(0.2, 0.1));
        let expect = (-a).exp2()
            / (Complex64::new(1.0, 0.0) - 0.5 * Complex64::new(0.2, 0.1) * Complex64::from_polar(1.0, -TAU * (0.5 - 1.0)));
        assert!((v - expect).norm() < 1e-14);
        for n in 1..=6u32 {
            let params = PhiCurveParams::new(3.0, 2.0, n).unwrap();
            for j in 0..(1u64 << n).min(8) {
                let width = (-(n as f64)).exp2();
                let t = (n - 1) as f64 + width * (j as f64 + 0.3);
                let b = crate::geometry::BoxIndex::new(n, j).unwrap();
                let z = b.center().to_complex();
                let lower = 0.1 * (n as f64 * (1.0 - params.alpha())).exp2();
                assert!(params.eval(t, z).norm() >= lower, "n={n} j={j}");
            }
        }
        assert!(PhiCurveParams::new(3.0, 1.4, 3).is_err());
    }
}
