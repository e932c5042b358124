//! Analytic self-maps of the disk: boundary sampling, pullback reports,
//! the Nevanlinna counting function and its integral surrogate.

use std::f64::consts::{PI, TAU};

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::criteria::{classify_series, summing_report, tail_ratio, AnalysisParams, SeriesTrend, SummingVerdict};
use crate::error::{Error, Result};
use crate::geometry::{BoxIndex, DiskPoint};
use crate::hardy::{fft_forward, fft_inverse, BoundaryFunction, PolyCoeffs};
use crate::measures::{pullback_from_symbol, GenerationBoxes, Measure};
use crate::numerics::{check_exponent, dyadic_panels, gauss_legendre, is_power_of_two};

/// Values of the modulus exponent `f` above this are clipped.
pub const OUTER_CLIP: f64 = 50.0;
/// Grid used to check that polynomial and Blaschke symbols map into the closed disk.
pub const VALIDATION_GRID: usize = 1 << 16;
/// Radius of the disk around `φ(0)` excluded from Nevanlinna integrals.
pub const CENTER_EXCLUSION: f64 = 1e-3;

/// Outer function with boundary modulus `exp(-scale·|t|^beta)`, `t ∈ (-π, π]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterSymbol {
    pub beta: f64,
    pub scale: f64,
    pub grid: usize,
}

impl OuterSymbol {
    fn exponent(&self, t: f64) -> f64 {
        let t = crate::geometry::angle_diff(t, 0.0);
        self.scale * t.abs().powf(self.beta)
    }

    /// Taylor coefficients of the analytic `F` with `Re F = u` on an `M`-grid,
    /// where `u` is the clipped exponent. Returns the coefficients and whether
    /// clipping happened.
    fn log_coefficients(&self, m: usize) -> (Vec<Complex64>, bool) {
        let mut clipped = false;
        let u: Vec<Complex64> = (0..m)
            .map(|k| {
                let v = self.exponent(TAU * k as f64 / m as f64);
                if v > OUTER_CLIP {
                    clipped = true;
                }
                Complex64::new(v.min(OUTER_CLIP), 0.0)
            })
            .collect();
        let scale = 1.0 / m as f64;
        let uh: Vec<Complex64> = fft_forward(&u).into_iter().map(|c| c * scale).collect();
        let mut fh = vec![Complex64::new(0.0, 0.0); m];
        fh[0] = uh[0];
        for k in 1..m / 2 {
            fh[k] = 2.0 * uh[k];
        }
        // The Nyquist mode is real on the grid, so it is kept once.
        fh[m / 2] = uh[m / 2];
        (fh, clipped)
    }
}

/// Symbol `φ: 𝔻 → 𝔻`.
#[derive(Debug, Clone, PartialEq)]
pub enum Symbol {
    Polynomial(PolyCoeffs),
    Blaschke { zeros: Vec<DiskPoint>, rotation: f64 },
    Outer(OuterSymbol),
}

impl Symbol {
    pub fn polynomial(coeffs: Vec<Complex64>) -> Result<Symbol> {
        let s = Symbol::Polynomial(PolyCoeffs::new(coeffs));
        s.validate()?;
        Ok(s)
    }

    pub fn blaschke(zeros: Vec<DiskPoint>, rotation: f64) -> Result<Symbol> {
        if !rotation.is_finite() {
            return Err(Error::invalid("Blaschke rotation must be finite"));
        }
        Ok(Symbol::Blaschke { zeros, rotation })
    }

    pub fn outer(beta: f64, scale: f64, grid: usize) -> Result<Symbol> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::invalid(format!("outer exponent beta = {beta} must be positive")));
        }
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(Error::invalid(format!("outer scale = {scale} must be nonnegative")));
        }
        if !is_power_of_two(grid) || grid < 4 {
            return Err(Error::invalid(format!("outer grid {grid} must be a power of two >= 4")));
        }
        Ok(Symbol::Outer(OuterSymbol { beta, scale, grid }))
    }

    fn validate(&self) -> Result<()> {
        if let Symbol::Polynomial(p) = self {
            if p.coeffs().iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(Error::invalid("polynomial coefficients must be finite"));
            }
            let m = VALIDATION_GRID.max((p.degree() + 1).next_power_of_two());
            let sup = p.sample(m).iter().fold(0.0f64, |a, v| a.max(v.norm()));
            if sup > 1.0 + 1e-9 {
                return Err(Error::invalid(format!(
                    "polynomial symbol reaches modulus {sup} on the circle"
                )));
            }
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        match self {
            Symbol::Polynomial(p) => format!("polynomial{:?}", p.coeffs().iter().map(|c| (c.re, c.im)).collect::<Vec<_>>()),
            Symbol::Blaschke { zeros, rotation } => format!(
                "blaschke(zeros={:?}, rotation={rotation})",
                zeros.iter().map(|z| (z.re(), z.im())).collect::<Vec<_>>()
            ),
            Symbol::Outer(o) => format!("outer(scale={}·|t|^{}, grid={})", o.scale, o.beta, o.grid),
        }
    }

    /// `φ(z)` for `|z| < 1`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            Symbol::Polynomial(p) => p.eval(z),
            Symbol::Blaschke { zeros, rotation } => {
                let one = Complex64::new(1.0, 0.0);
                zeros.iter().fold(Complex64::from_polar(1.0, *rotation), |acc, a| {
                    let a = a.to_complex();
                    acc * (z - a) / (one - a.conj() * z)
                })
            }
            Symbol::Outer(o) => {
                let (fh, _) = o.log_coefficients(o.grid);
                let f = fh
                    .iter()
                    .take(o.grid / 2 + 1)
                    .rev()
                    .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
                (-f).exp()
            }
        }
    }

    pub fn at_zero(&self) -> Complex64 {
        self.eval(Complex64::new(0.0, 0.0))
    }

    /// Boundary values `φ(e^{2πim/M})`.
    pub fn boundary_samples(&self, m: usize) -> Result<BoundaryFunction> {
        if !is_power_of_two(m) || m < 2 {
            return Err(Error::invalid(format!("sample count {m} must be a power of two >= 2")));
        }
        match self {
            Symbol::Polynomial(p) => {
                if p.degree() < m {
                    p.boundary(m)
                } else {
                    BoundaryFunction::from_fn(m, |t| p.eval(Complex64::from_polar(1.0, t)))
                }
            }
            Symbol::Blaschke { .. } => {
                BoundaryFunction::from_fn(m, |t| self.eval(Complex64::from_polar(1.0, t)))
            }
            Symbol::Outer(o) => {
                let (fh, clipped) = o.log_coefficients(m);
                if clipped {
                    warn!("outer symbol exponent exceeds {OUTER_CLIP} on the grid; clipped");
                }
                let f = fft_inverse(&fh);
                BoundaryFunction::new(f.into_iter().map(|v| (-v).exp()).collect())
            }
        }
    }

    /// Coefficients of the polynomial whose roots in the disk solve `φ(z) = w`.
    fn preimage_polynomial(&self, w: Complex64) -> Result<Vec<Complex64>> {
        match self {
            Symbol::Polynomial(p) => {
                let mut c = p.coeffs().to_vec();
                if c.is_empty() {
                    c.push(Complex64::new(0.0, 0.0));
                }
                c[0] -= w;
                Ok(c)
            }
            Symbol::Blaschke { zeros, rotation } => {
                // e^{iθ} Π(z - a_k) - w Π(1 - conj(a_k) z)
                let mut num = vec![Complex64::from_polar(1.0, *rotation)];
                let mut den = vec![w];
                for a in zeros {
                    let a = a.to_complex();
                    num = poly_mul(&num, &[-a, Complex64::new(1.0, 0.0)]);
                    den = poly_mul(&den, &[Complex64::new(1.0, 0.0), -a.conj()]);
                }
                Ok(num.iter().zip(&den).map(|(x, y)| x - y).collect())
            }
            Symbol::Outer(_) => Err(Error::invalid(
                "Nevanlinna counting is only available for polynomial and Blaschke symbols",
            )),
        }
    }

    pub fn is_root_solvable(&self) -> bool {
        !matches!(self, Symbol::Outer(_))
    }
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn horner(c: &[Complex64], z: Complex64) -> (Complex64, Complex64, f64) {
    let mut v = Complex64::new(0.0, 0.0);
    let mut dv = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    let rz = z.norm();
    for &ck in c.iter().rev() {
        dv = dv * z + v;
        v = v * z + ck;
        scale = scale * rz + ck.norm();
    }
    (v, dv, scale)
}

/// All complex roots with multiplicity, from the companion matrix and Newton polishing.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let deg = match coeffs.iter().rposition(|c| c.norm() > 0.0) {
        Some(d) => d,
        None => return Err(Error::invalid("the zero polynomial has no isolated roots")),
    };
    if deg == 0 {
        return Ok(Vec::new());
    }
    let c = &coeffs[..=deg];
    let lead = c[deg];
    let roots: Vec<Complex64> = if deg == 1 {
        vec![-c[0] / c[1]]
    } else {
        let mut comp = DMatrix::<Complex64>::zeros(deg, deg);
        for i in 1..deg {
            comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
        }
        for i in 0..deg {
            comp[(i, deg - 1)] = -c[i] / lead;
        }
        let ev = comp
            .schur()
            .eigenvalues()
            .ok_or_else(|| Error::numerical("companion eigenvalue iteration failed"))?;
        ev.iter().copied().collect()
    };
    let mut out = Vec::with_capacity(deg);
    for mut z in roots {
        for _ in 0..3 {
            let (v, dv, _) = horner(c, z);
            if dv.norm() == 0.0 {
                break;
            }
            let step = v / dv;
            if !step.re.is_finite() || !step.im.is_finite() || step.norm() > 1e-3 * (1.0 + z.norm()) {
                break;
            }
            z -= step;
        }
        let (v, _, scale) = horner(c, z);
        if v.norm() > 1e-8 * scale.max(1.0) {
            return Err(Error::numerical(format!(
                "root residual {} exceeds 1e-8 at z = {z}",
                v.norm()
            )));
        }
        out.push(z);
    }
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NevanlinnaValue {
    pub w: DiskPoint,
    pub value: f64,
    pub roots_found: usize,
    /// `w` is within `1e-9` of `φ(0)`, where the function is defined to be 0.
    pub at_center: bool,
}

/// `N_φ(w) = Σ log(1/|z_k|)` over roots of `φ(z) = w` in the disk.
pub fn nevanlinna(s: &Symbol, w: &DiskPoint) -> Result<NevanlinnaValue> {
    let wc = w.to_complex();
    if (s.at_zero() - wc).norm() < 1e-9 {
        return Ok(NevanlinnaValue {
            w: *w,
            value: 0.0,
            roots_found: 0,
            at_center: true,
        });
    }
    let c = s.preimage_polynomial(wc)?;
    if c.iter().skip(1).all(|x| x.norm() == 0.0) {
        // Constant symbol away from its value: no preimages.
        return Ok(NevanlinnaValue {
            w: *w,
            value: 0.0,
            roots_found: 0,
            at_center: false,
        });
    }
    let roots = polynomial_roots(&c)?;
    let inside: Vec<f64> = roots.iter().map(|z| z.norm()).filter(|&r| r < 1.0).collect();
    Ok(NevanlinnaValue {
        w: *w,
        value: inside.iter().map(|r| -r.ln()).sum(),
        roots_found: inside.len(),
        at_center: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NevanlinnaSurrogate {
    pub value: f64,
    /// Contribution of each dyadic radial panel `Γ_n` to the `r`-th power of the value.
    pub per_generation: Vec<f64>,
    pub trend: SeriesTrend,
    pub tail: f64,
}

/// `[∫ (N_φ(w)/(1-|w|^2))^{r/p} dA(w)/(1-|w|^2)^2]^{1/r}` by polar quadrature:
/// Gauss–Legendre nodes on dyadic radial panels up to `depth`, times a uniform
/// angular grid, skipping nodes within `1e-3` of `φ(0)`.
pub fn nevanlinna_surrogate(
    s: &Symbol,
    p: f64,
    r: f64,
    depth: u32,
    angular: usize,
) -> Result<NevanlinnaSurrogate> {
    check_exponent(p, "p")?;
    if !(r >= 1.0 && r.is_finite()) {
        return Err(Error::invalid(format!("r = {r} must be >= 1")));
    }
    if !s.is_root_solvable() {
        return Err(Error::invalid("Nevanlinna surrogate needs a polynomial or Blaschke symbol"));
    }
    let center = s.at_zero();
    let expo = r / p;
    let panels: Vec<(u32, f64, f64)> = dyadic_panels(depth).collect();
    let per_generation: Vec<f64> = panels
        .par_iter()
        .map(|&(_, a, b)| -> Result<f64> {
            let mut err = None;
            let v = gauss_legendre(a, b, |rho| {
                let weight = 1.0 - rho * rho;
                let mut acc = 0.0;
                for k in 0..angular {
                    let t = TAU * (k as f64 + 0.5) / angular as f64;
                    let wc = Complex64::from_polar(rho, t);
                    if (wc - center).norm() < CENTER_EXCLUSION {
                        continue;
                    }
                    let w = DiskPoint::from_complex(wc).expect("node inside disk");
                    match nevanlinna(s, &w) {
                        Ok(nv) if nv.value > 0.0 => {
                            acc += (nv.value / weight).powf(expo) / (weight * weight);
                        }
                        Ok(_) => {}
                        Err(e) => {
                            if err.is_none() {
                                err = Some(e);
                            }
                        }
                    }
                }
                // dA/π = ρ dρ dt/π, averaged over t: 2ρ dρ · mean.
                2.0 * rho * acc / angular as f64
            });
            match err {
                Some(e) => Err(e),
                None => Ok(v),
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let total: f64 = per_generation.iter().sum();
    Ok(NevanlinnaSurrogate {
        value: total.powf(1.0 / r),
        trend: classify_series(&per_generation),
        tail: tail_ratio(&per_generation),
        per_generation,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PullbackReport {
    pub verdict: SummingVerdict,
    /// Nonzero box masses `(n, j, mass)` for generations up to the analysis depth.
    pub box_table: Vec<(u32, u64, f64)>,
    /// `(∫_𝕋 dλ/(1-|φ|))^{1/p}` from the boundary samples; infinite when any
    /// sample reaches the circle.
    pub boundary_order_bound: f64,
    pub sample_count: usize,
    pub dropped: usize,
    pub retained_mass: f64,
}

pub fn pullback_report(s: &Symbol, m: usize, params: &AnalysisParams) -> Result<PullbackReport> {
    let pb = pullback_from_symbol(s, m)?;
    let boundary = s.boundary_samples(m)?;
    let mean = boundary
        .values()
        .iter()
        .map(|v| {
            let g = 1.0 - v.norm();
            if g > 0.0 {
                1.0 / g
            } else {
                f64::INFINITY
            }
        })
        .sum::<f64>()
        / m as f64;
    let sample_count = pb.sample_count();
    let dropped = pb.dropped();
    let mu = Measure::Pullback(pb);
    let verdict = summing_report(&mu, params)?;
    let mut box_table = Vec::new();
    for (n, gen) in mu.box_table(params.depth).iter().enumerate() {
        if let GenerationBoxes::Sparse(map) = gen {
            for (&j, &w) in map {
                box_table.push((n as u32, j, w));
            }
        }
    }
    Ok(PullbackReport {
        verdict,
        box_table,
        boundary_order_bound: mean.powf(1.0 / params.p),
        sample_count,
        dropped,
        retained_mass: mu.total_mass(),
    })
}

/// Mean box mass `λ_φ(Γ_n)/2^n` per generation `n = 0..=depth`.
pub fn mean_box_masses(mu: &Measure, depth: u32) -> Vec<f64> {
    (0..=depth)
        .map(|n| mu.generation_mass(n) / BoxIndex::count(n) as f64)
        .collect()
}

/// Angle of a boundary grid point in `(-π, π]`.
pub fn centered_angle(k: usize, m: usize) -> f64 {
    let t = TAU * k as f64 / m as f64;
    if t > PI {
        t - TAU
    } else {
        t
    }
}
