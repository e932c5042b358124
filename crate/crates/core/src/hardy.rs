//! Finite-degree Hardy space tools: boundary norms, the `N`-point quadrature,
//! the `Q_j` basis, dyadic and reproducing kernels, the Poisson transform,
//! Riesz projection and Littlewood–Paley blocks.

use std::f64::consts::TAU;

use log::warn;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::geometry::DiskPoint;
use crate::numerics::{check_exponent, conjugate, is_power_of_two};

/// Unnormalized forward DFT: `X_k = Σ_m x_m e^{-2πikm/M}`.
pub fn fft_forward(values: &[Complex64]) -> Vec<Complex64> {
    let mut buf = values.to_vec();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// Unnormalized inverse DFT: `x_m = Σ_k X_k e^{2πikm/M}`.
pub fn fft_inverse(values: &[Complex64]) -> Vec<Complex64> {
    let mut buf = values.to_vec();
    FftPlanner::new().plan_fft_inverse(buf.len()).process(&mut buf);
    buf
}

/// Analytic polynomial `Σ c_k z^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyCoeffs {
    coeffs: Vec<Complex64>,
}

impl PolyCoeffs {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        PolyCoeffs { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        PolyCoeffs::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Index of the last nonzero coefficient (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|c| *c != Complex64::new(0.0, 0.0))
            .unwrap_or(0)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Values at `e^{2πim/M}`, `m = 0..M`, for any `M > degree`.
    pub fn sample(&self, m: usize) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for (k, &c) in self.coeffs.iter().enumerate() {
            buf[k % m] += c;
        }
        fft_inverse(&buf)
    }

    pub fn boundary(&self, m: usize) -> Result<BoundaryFunction> {
        if m <= self.degree() {
            return Err(Error::invalid(format!(
                "grid {m} too small for degree {}",
                self.degree()
            )));
        }
        BoundaryFunction::new(self.sample(m))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        PolyCoeffs::new(self.coeffs.iter().map(|&a| a * c).collect())
    }
}

/// Samples on the uniform grid `e^{2πim/M}` with `M` a power of two.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFunction {
    values: Vec<Complex64>,
}

impl BoundaryFunction {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.len() < 2 || !is_power_of_two(values.len()) {
            return Err(Error::invalid(format!(
                "boundary grid size {} must be a power of two >= 2",
                values.len()
            )));
        }
        Ok(BoundaryFunction { values })
    }

    pub fn from_fn(m: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        Self::new((0..m).map(|k| f(TAU * k as f64 / m as f64)).collect())
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Discrete Fourier coefficients; entry `k` holds frequency `k` for
    /// `k < M/2` and frequency `k - M` above.
    pub fn fourier(&self) -> Vec<Complex64> {
        let scale = 1.0 / self.values.len() as f64;
        fft_forward(&self.values)
            .into_iter()
            .map(|c| c * scale)
            .collect()
    }

    pub fn from_fourier(coeffs: &[Complex64]) -> Result<Self> {
        Self::new(fft_inverse(coeffs))
    }
}

fn boundary_mean_pow(values: &[Complex64], p: f64) -> f64 {
    values.iter().map(|v| v.norm().powf(p)).sum::<f64>() / values.len() as f64
}

/// Boundary `L^p` norm of a polynomial on an `M`-point grid.
pub fn hp_norm(f: &PolyCoeffs, p: f64, m: usize) -> Result<f64> {
    check_exponent(p, "p")?;
    if m < 8 * (f.degree() + 1) {
        return Err(Error::invalid(format!(
            "grid {m} below 8·(degree+1) = {}",
            8 * (f.degree() + 1)
        )));
    }
    Ok(boundary_mean_pow(&f.sample(m), p).powf(1.0 / p))
}

/// `(1/N Σ_j |f(e^{2πij/N})|^p)^{1/p}` for a polynomial of degree `< N`.
pub fn zyg_quadrature(f: &PolyCoeffs, p: f64, n: usize) -> Result<f64> {
    check_exponent(p, "p")?;
    if n == 0 || f.degree() >= n {
        return Err(Error::invalid(format!(
            "degree {} must be below the node count {n}",
            f.degree()
        )));
    }
    Ok(boundary_mean_pow(&f.sample(n), p).powf(1.0 / p))
}

/// `Q_j(z) = N^{-1/p'} Σ_{k<N} (conj(θ_j) z)^k`, which equals `N^{1/p}` at
/// `θ_j` and vanishes at the other `N`-th roots of unity.
pub fn qj_basis(n: usize, p: f64, j: usize) -> Result<PolyCoeffs> {
    check_exponent(p, "p")?;
    if j >= n {
        return Err(Error::invalid(format!("basis index {j} out of range for N={n}")));
    }
    let scale = (n as f64).powf(-1.0 / conjugate(p));
    Ok(PolyCoeffs::new(
        (0..n)
            .map(|k| Complex64::from_polar(scale, -TAU * (j * k % n) as f64 / n as f64))
            .collect(),
    ))
}

/// `K_n(ξ, z) = Σ_{2^n <= j < 2^{n+1}} (z e^{-iξ})^j`.
pub fn dyadic_kernel(n: u32, xi: f64) -> PolyCoeffs {
    let lo = 1usize << n;
    let mut c = vec![Complex64::new(0.0, 0.0); 2 * lo];
    for (j, cj) in c.iter_mut().enumerate().skip(lo) {
        *cj = Complex64::from_polar(1.0, -(j as f64) * xi);
    }
    PolyCoeffs::new(c)
}

/// Truncated Szegő kernel `Σ_{k<D} conj(a)^k w^k` with `D` the least length
/// whose tail bound `|a|^D / (1 - |a|)` is below `1e-10`.
pub fn reproducing_kernel(a: &DiskPoint) -> PolyCoeffs {
    let r = a.modulus();
    let mut len = 1usize;
    let mut tail = r / (1.0 - r);
    while tail >= 1e-10 {
        len += 1;
        tail *= r;
    }
    let ca = a.to_complex().conj();
    let mut c = Vec::with_capacity(len);
    let mut pow = Complex64::new(1.0, 0.0);
    for _ in 0..len {
        c.push(pow);
        pow *= ca;
    }
    PolyCoeffs::new(c)
}

/// `P_a(ξ) = (1 - |a|^2) / |1 - conj(a) e^{iξ}|^2`.
pub fn poisson_kernel(a: &DiskPoint, xi: f64) -> f64 {
    let z = a.to_complex();
    let d = Complex64::new(1.0, 0.0) - z.conj() * Complex64::from_polar(1.0, xi);
    (1.0 - z.norm_sqr()) / d.norm_sqr()
}

/// Grid average of `P_z · f`.
pub fn poisson_transform(f: &BoundaryFunction, z: &DiskPoint) -> Complex64 {
    let m = f.len();
    let gap = 1.0 - z.modulus();
    if gap < 1e-6 || (m as f64) * gap < 64.0 {
        warn!(
            "Poisson transform at |z| = {} is not resolved by a {m}-point grid",
            z.modulus()
        );
    }
    f.values()
        .iter()
        .enumerate()
        .map(|(k, v)| v * poisson_kernel(z, TAU * k as f64 / m as f64))
        .sum::<Complex64>()
        / m as f64
}

/// Keep the nonnegative frequencies `0..M/2`; the rest, including the
/// Nyquist bin, are set to zero.
pub fn riesz_projection(f: &BoundaryFunction) -> BoundaryFunction {
    let m = f.len();
    let mut c = fft_forward(f.values());
    for ck in c.iter_mut().skip(m / 2) {
        *ck = Complex64::new(0.0, 0.0);
    }
    let scale = 1.0 / m as f64;
    let values = fft_inverse(&c).into_iter().map(|v| v * scale).collect();
    BoundaryFunction { values }
}

/// Littlewood–Paley blocks: the constant term, then frequencies `[2^j, 2^{j+1})`.
pub fn lp_blocks(f: &PolyCoeffs) -> Vec<PolyCoeffs> {
    let c = f.coeffs();
    let zero = Complex64::new(0.0, 0.0);
    let mut blocks = vec![PolyCoeffs::new(vec![c.first().copied().unwrap_or(zero)])];
    let mut lo = 1usize;
    while lo < c.len() {
        let hi = (2 * lo).min(c.len());
        let mut b = vec![zero; hi];
        b[lo..hi].copy_from_slice(&c[lo..hi]);
        blocks.push(PolyCoeffs::new(b));
        lo *= 2;
    }
    blocks
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn hp_norm_examples() {
        let one = PolyCoeffs::from_real(&[1.0]);
        assert!((hp_norm(&one, 3.0, 64).unwrap() - 1.0).abs() < 1e-14);
        let zk = PolyCoeffs::from_real(&[0.0, 0.0, 0.0, 1.0]);
        assert!((hp_norm(&zk, 1.5, 64).unwrap() - 1.0).abs() < 1e-14);
        let f = PolyCoeffs::from_real(&[1.0, 1.0]);
        assert!((hp_norm(&f, 2.0, 64).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!(hp_norm(&f, 1.0, 64).is_err());
        assert!(hp_norm(&f, 2.0, 8).is_err());
    }

    #[test]
    fn zyg_rejects_aliasing() {
        let f = PolyCoeffs::from_real(&[1.0, 0.0, 0.0, 1.0]);
        assert!(zyg_quadrature(&f, 2.0, 3).is_err());
        assert!((zyg_quadrature(&PolyCoeffs::from_real(&[1.0]), 4.0, 7).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn qj_interpolates() {
        let (n, p) = (8usize, 3.0);
        let q0 = qj_basis(n, p, 0).unwrap();
        assert!((zyg_quadrature(&q0, p, n).unwrap() - 1.0).abs() < 1e-12);
        for j in 0..n {
            let q = qj_basis(n, p, j).unwrap();
            for l in 0..n {
                let v = q.eval(Complex64::from_polar(1.0, TAU * l as f64 / n as f64));
                let expect = if l == j { (n as f64).powf(1.0 / p) } else { 0.0 };
                assert!((v - c(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn dyadic_kernel_values() {
        let k0 = dyadic_kernel(0, 0.0);
        assert_eq!(k0.coeffs(), &[c(0.0, 0.0), c(1.0, 0.0)]);
        for n in 0..6 {
            let k = dyadic_kernel(n, 0.7);
            let norm = hp_norm(&k, 2.0, 16 << n).unwrap();
            assert!((norm - 2f64.powf(n as f64 / 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn reproducing_kernel_values() {
        let k = reproducing_kernel(&DiskPoint::origin());
        assert_eq!(k.coeffs(), &[c(1.0, 0.0)]);
        let a = DiskPoint::new(0.5, 0.3).unwrap();
        let k = reproducing_kernel(&a);
        let expect = 1.0 / (1.0 - a.modulus().powi(2));
        assert!((k.eval(a.to_complex()) - c(expect, 0.0)).norm() < 1e-9);
        let m = 8 * (k.degree() + 1);
        let n2 = hp_norm(&k, 2.0, m.next_power_of_two()).unwrap().powi(2);
        assert!((n2 - expect).abs() < 1e-9);
    }

    #[test]
    fn poisson_examples() {
        assert!((poisson_kernel(&DiskPoint::origin(), 1.3) - 1.0).abs() < 1e-15);
        let a = DiskPoint::new(0.5, 0.0).unwrap();
        assert!((poisson_kernel(&a, 0.0) - 3.0).abs() < 1e-14);
        let m = 1024;
        let mean: f64 = (0..m)
            .map(|k| poisson_kernel(&a, TAU * k as f64 / m as f64))
            .sum::<f64>()
            / m as f64;
        assert!((mean - 1.0).abs() < 1e-9);
    }

    #[test]
    fn poisson_transform_reproduces_polynomials_and_conjugates() {
        let g = PolyCoeffs::new(vec![c(0.3, 0.1), c(-1.0, 0.5), c(0.0, 2.0), c(0.7, 0.0)]);
        let m = 1 << 16;
        let f = g.boundary(m).unwrap();
        let fc = BoundaryFunction::new(f.values().iter().map(|v| v.conj()).collect()).unwrap();
        let one = BoundaryFunction::new(vec![c(1.0, 0.0); m]).unwrap();
        for &(r, t) in &[(0.0, 0.0), (0.5, 1.0), (0.9, 2.5), (0.99, -0.4)] {
            let z = DiskPoint::from_polar(r, t).unwrap();
            let gz = g.eval(z.to_complex());
            assert!((poisson_transform(&f, &z) - gz).norm() < 1e-8);
            assert!((poisson_transform(&fc, &z) - gz.conj()).norm() < 1e-8);
            assert!((poisson_transform(&one, &z) - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn riesz_projection_examples() {
        let m = 64;
        let f = BoundaryFunction::from_fn(m, |t| c(2.0 * t.cos(), 0.0)).unwrap();
        let pf = riesz_projection(&f);
        for (k, v) in pf.values().iter().enumerate() {
            let t = TAU * k as f64 / m as f64;
            assert!((v - Complex64::from_polar(1.0, t)).norm() < 1e-12);
        }
        let ppf = riesz_projection(&pf);
        for (a, b) in pf.values().iter().zip(ppf.values()) {
            assert!((a - b).norm() < 1e-12);
        }
        let g = PolyCoeffs::new(vec![c(1.0, 1.0), c(0.0, -2.0), c(3.0, 0.0)]).boundary(m).unwrap();
        for (a, b) in g.values().iter().zip(riesz_projection(&g).values()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn lp_blocks_split_and_reconstruct() {
        let f = PolyCoeffs::from_real(&[1.0, 1.0, 1.0, 1.0]);
        let blocks = lp_blocks(&f);
        assert_eq!(blocks.len(), 3);
        assert_eq!(blocks[0].coeffs(), &[c(1.0, 0.0)]);
        assert_eq!(blocks[1].coeffs(), &[c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(
            blocks[2].coeffs(),
            &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]
        );
        let total: f64 = blocks.iter().map(|b| hp_norm(b, 2.0, 64).unwrap().powi(2)).sum();
        assert!((total - hp_norm(&f, 2.0, 64).unwrap().powi(2)).abs() < 1e-12);
    }
}
