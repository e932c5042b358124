//! Finite positive measures on the open disk and their primitive evaluations:
//! box mass, window mass, and integration of pointwise functions.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use log::warn;
use serde::Serialize;

use crate::composition::Symbol;
use crate::error::{Error, Result};
use crate::geometry::{
    box_index, corona_box, corona_inner, corona_outer, generation_of_modulus, in_window, BoxIndex,
    DiskPoint, Window,
};
use crate::numerics::{dyadic_panels, gauss_legendre, is_power_of_two};

/// Samples with `|φ| >= 1 - BOUNDARY_EPS` are dropped from pullback measures.
pub const BOUNDARY_EPS: f64 = 1e-9;
/// Default angular grid for integrating against radial measures.
pub const DEFAULT_ANGULAR_GRID: usize = 4096;
/// Angular nodes per radial node when integrating against the area measure.
pub const AREA_ANGULAR_GRID: usize = 256;
/// Number of dyadic radial panels used for area integrals.
pub const AREA_DEPTH: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub z: DiskPoint,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    atoms: Vec<Atom>,
}

impl AtomicMeasure {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        for (i, a) in atoms.iter().enumerate() {
            if !(a.w.is_finite() && a.w > 0.0) {
                return Err(Error::invalid(format!("atom {i} has non-positive mass {}", a.w)));
            }
        }
        Ok(AtomicMeasure { atoms })
    }

    pub fn dirac(z: DiskPoint, w: f64) -> Result<Self> {
        Self::new(vec![Atom { z, w }])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ring {
    pub r: f64,
    pub w: f64,
}

/// Rotation-invariant measure `Σ w_k · (uniform measure on |z| = r_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialMeasure {
    rings: Vec<Ring>,
    angular_grid: usize,
}

impl RadialMeasure {
    pub fn new(rings: Vec<Ring>) -> Result<Self> {
        for (i, ring) in rings.iter().enumerate() {
            if !(0.0..1.0).contains(&ring.r) {
                return Err(Error::invalid(format!("ring {i} radius {} outside [0, 1)", ring.r)));
            }
            if !(ring.w.is_finite() && ring.w > 0.0) {
                return Err(Error::invalid(format!("ring {i} has non-positive mass {}", ring.w)));
            }
        }
        Ok(RadialMeasure {
            rings,
            angular_grid: DEFAULT_ANGULAR_GRID,
        })
    }

    pub fn with_angular_grid(mut self, grid: usize) -> Self {
        self.angular_grid = grid.max(1);
        self
    }

    pub fn rings(&self) -> &[Ring] {
        &self.rings
    }

    pub fn angular_grid(&self) -> usize {
        self.angular_grid
    }

    /// `σ([a, b))` for the radial part.
    pub fn radial_mass(&self, a: f64, b: f64) -> f64 {
        self.rings
            .iter()
            .filter(|g| g.r >= a && g.r < b)
            .map(|g| g.w)
            .sum()
    }
}

/// Distribution of the boundary values of a symbol, sampled on `M` points.
#[derive(Debug, Clone)]
pub struct PullbackMeasure {
    samples: Vec<DiskPoint>,
    sample_count: usize,
    dropped: usize,
    symbol: Option<Symbol>,
}

impl PullbackMeasure {
    pub fn samples(&self) -> &[DiskPoint] {
        &self.samples
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn dropped(&self) -> usize {
        self.dropped
    }

    pub fn symbol(&self) -> Option<&Symbol> {
        self.symbol.as_ref()
    }

    pub fn sample_mass(&self) -> f64 {
        1.0 / self.sample_count as f64
    }
}

/// Normalized area measure `dA / π`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AreaMeasure;

impl AreaMeasure {
    /// `∫ f dA/π` over `|z| < r_max` by dyadic radial panels times a uniform angular grid.
    pub fn integrate_within<F>(&self, r_max: f64, f: F) -> Result<f64>
    where
        F: Fn(&DiskPoint) -> f64,
    {
        let mut total = 0.0;
        for (_, a, b) in dyadic_panels(AREA_DEPTH) {
            if a >= r_max {
                break;
            }
            total += area_panel(a, b.min(r_max), &f)?;
        }
        Ok(total)
    }
}

fn area_panel<F: Fn(&DiskPoint) -> f64>(a: f64, b: f64, f: &F) -> Result<f64> {
    let mut err = None;
    let v = gauss_legendre(a, b, |r| {
        let mut s = 0.0;
        for k in 0..AREA_ANGULAR_GRID {
            let t = TAU * (k as f64 + 0.5) / AREA_ANGULAR_GRID as f64;
            let z = DiskPoint::from_polar(r, t).expect("quadrature node inside disk");
            let v = f(&z);
            if !v.is_finite() && err.is_none() {
                err = Some(z);
            }
            s += v;
        }
        2.0 * r * s / AREA_ANGULAR_GRID as f64
    });
    match err {
        Some(z) => Err(non_finite_at(&z)),
        None => Ok(v),
    }
}

fn non_finite_at(z: &DiskPoint) -> Error {
    Error::numerical(format!(
        "integrand is not finite at z = ({}, {})",
        z.re(),
        z.im()
    ))
}

#[derive(Debug, Clone)]
pub enum Measure {
    Atomic(AtomicMeasure),
    Radial(RadialMeasure),
    Pullback(PullbackMeasure),
    Area(AreaMeasure),
}

/// Nonzero box masses of one generation.
#[derive(Debug, Clone, PartialEq)]
pub enum GenerationBoxes {
    /// Every one of the `2^n` boxes carries `mass`.
    Uniform { mass: f64 },
    /// Only the listed boxes carry mass.
    Sparse(BTreeMap<u64, f64>),
}

impl GenerationBoxes {
    /// `Σ_j f(μ(R_{n,j}))` over boxes with positive mass.
    pub fn sum_over_boxes(&self, n: u32, f: impl Fn(f64) -> f64) -> f64 {
        match self {
            GenerationBoxes::Uniform { mass } if *mass > 0.0 => {
                (n as f64).exp2() * f(*mass)
            }
            GenerationBoxes::Uniform { .. } => 0.0,
            GenerationBoxes::Sparse(map) => map.values().map(|&m| f(m)).sum(),
        }
    }

    pub fn total(&self, n: u32) -> f64 {
        self.sum_over_boxes(n, |m| m)
    }

    /// Sorted multiset of positive box masses (sparse generations only).
    pub fn sorted_masses(&self) -> Option<Vec<f64>> {
        match self {
            GenerationBoxes::Sparse(map) => {
                let mut v: Vec<f64> = map.values().copied().collect();
                v.sort_by(f64::total_cmp);
                Some(v)
            }
            GenerationBoxes::Uniform { .. } => None,
        }
    }
}

impl Measure {
    pub fn dirac(re: f64, im: f64) -> Result<Measure> {
        Ok(Measure::Atomic(AtomicMeasure::dirac(DiskPoint::new(re, im)?, 1.0)?))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Measure::Atomic(_) => "atomic",
            Measure::Radial(_) => "radial",
            Measure::Pullback(_) => "pullback",
            Measure::Area(_) => "area",
        }
    }

    /// Point masses of atomic and pullback measures.
    pub fn discrete_atoms(&self) -> Option<Vec<(DiskPoint, f64)>> {
        match self {
            Measure::Atomic(m) => Some(m.atoms.iter().map(|a| (a.z, a.w)).collect()),
            Measure::Pullback(m) => {
                let w = m.sample_mass();
                Some(m.samples.iter().map(|&z| (z, w)).collect())
            }
            _ => None,
        }
    }

    pub fn is_rotation_invariant(&self) -> bool {
        matches!(self, Measure::Radial(_) | Measure::Area(_))
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            Measure::Atomic(m) => m.atoms.iter().map(|a| a.w).sum(),
            Measure::Radial(m) => m.rings.iter().map(|g| g.w).sum(),
            Measure::Pullback(m) => m.samples.len() as f64 * m.sample_mass(),
            Measure::Area(_) => 1.0,
        }
    }

    /// `μ({a <= |z| < b})`.
    pub fn annulus_mass(&self, a: f64, b: f64) -> f64 {
        match self {
            Measure::Radial(m) => m.radial_mass(a, b),
            Measure::Area(_) => b * b - a * a,
            _ => self
                .discrete_atoms()
                .unwrap_or_default()
                .iter()
                .filter(|(z, _)| {
                    let r = z.modulus();
                    r >= a && r < b
                })
                .map(|(_, w)| w)
                .sum(),
        }
    }

    /// `μ(Γ_n)`.
    pub fn generation_mass(&self, n: u32) -> f64 {
        let a = if n == 0 { 0.0 } else { corona_inner(n) };
        self.annulus_mass(a, corona_outer(n))
    }

    pub fn box_mass(&self, b: &BoxIndex) -> f64 {
        match self {
            Measure::Radial(_) | Measure::Area(_) => {
                self.generation_mass(b.n) / BoxIndex::count(b.n) as f64
            }
            _ => self
                .discrete_atoms()
                .unwrap_or_default()
                .iter()
                .filter(|(z, _)| box_index(z) == *b)
                .map(|(_, w)| w)
                .sum(),
        }
    }

    /// Mass of the box `j` of the `N`-corona `{1 - 1/N <= |z| < 1 - 1/(2N)}`.
    pub fn corona_box_mass(&self, big_n: usize, j: usize) -> f64 {
        let nf = big_n as f64;
        match self {
            Measure::Radial(_) | Measure::Area(_) => {
                self.annulus_mass(1.0 - 1.0 / nf, 1.0 - 0.5 / nf) / nf
            }
            _ => self
                .discrete_atoms()
                .unwrap_or_default()
                .iter()
                .filter(|(z, _)| corona_box(z, big_n) == Some(j))
                .map(|(_, w)| w)
                .sum(),
        }
    }

    /// All `N` box masses of the `N`-corona.
    pub fn corona_box_masses(&self, big_n: usize) -> Vec<f64> {
        match self.discrete_atoms() {
            Some(atoms) => {
                let mut out = vec![0.0; big_n];
                for (z, w) in atoms {
                    if let Some(j) = corona_box(&z, big_n) {
                        out[j] += w;
                    }
                }
                out
            }
            None => vec![self.corona_box_mass(big_n, 0); big_n],
        }
    }

    pub fn window_mass(&self, w: &Window) -> f64 {
        let h = w.h();
        match self {
            Measure::Radial(m) => (h / PI) * m.radial_mass(1.0 - h, 1.0),
            Measure::Area(_) => h * h * (2.0 - h) / PI,
            _ => self
                .discrete_atoms()
                .unwrap_or_default()
                .iter()
                .filter(|(z, _)| in_window(z, w))
                .map(|(_, m)| m)
                .sum(),
        }
    }

    /// Box masses for generations `0..=depth`.
    pub fn box_table(&self, depth: u32) -> Vec<GenerationBoxes> {
        match self.discrete_atoms() {
            Some(atoms) => {
                let mut table: Vec<BTreeMap<u64, f64>> = vec![BTreeMap::new(); depth as usize + 1];
                for (z, w) in atoms {
                    let b = box_index(&z);
                    if b.n <= depth {
                        *table[b.n as usize].entry(b.j).or_insert(0.0) += w;
                    }
                }
                table.into_iter().map(GenerationBoxes::Sparse).collect()
            }
            None => (0..=depth)
                .map(|n| GenerationBoxes::Uniform {
                    mass: self.generation_mass(n) / BoxIndex::count(n) as f64,
                })
                .collect(),
        }
    }

    /// `∫_{Γ_n} f dμ` for `n = 0..=depth`, plus `∫_{|z| >= 1 - 2^-(depth+1)} f dμ`
    /// as the final entry (zero for the area measure past its quadrature depth).
    pub fn generation_integrals<F>(&self, depth: u32, f: F) -> Result<Vec<f64>>
    where
        F: Fn(&DiskPoint) -> f64 + Sync,
    {
        let mut out = vec![0.0; depth as usize + 2];
        match self {
            Measure::Atomic(_) | Measure::Pullback(_) => {
                for (z, w) in self.discrete_atoms().unwrap_or_default() {
                    let v = f(&z);
                    if !v.is_finite() {
                        return Err(non_finite_at(&z));
                    }
                    let n = generation_of_modulus(z.modulus()).min(depth + 1);
                    out[n as usize] += w * v;
                }
            }
            Measure::Radial(m) => {
                let grid = m.angular_grid;
                for ring in &m.rings {
                    let mut s = 0.0;
                    for k in 0..grid {
                        let z = DiskPoint::from_polar(ring.r, TAU * k as f64 / grid as f64)
                            .expect("ring inside disk");
                        let v = f(&z);
                        if !v.is_finite() {
                            return Err(non_finite_at(&z));
                        }
                        s += v;
                    }
                    let n = generation_of_modulus(ring.r).min(depth + 1);
                    out[n as usize] += ring.w * s / grid as f64;
                }
            }
            Measure::Area(_) => {
                for (n, a, b) in dyadic_panels(AREA_DEPTH) {
                    let v = area_panel(a, b, &f)?;
                    out[n.min(depth + 1) as usize] += v;
                }
            }
        }
        Ok(out)
    }

    /// `∫ f dμ`. Errors name the first point where `f` is not finite.
    pub fn integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&DiskPoint) -> f64 + Sync,
    {
        Ok(self.generation_integrals(0, f)?.iter().sum())
    }
}

/// Pullback of normalized arc length under the boundary map of `s`.
pub fn pullback_from_symbol(s: &Symbol, m: usize) -> Result<PullbackMeasure> {
    if !is_power_of_two(m) || m < 2 {
        return Err(Error::invalid(format!("sample count {m} must be a power of two >= 2")));
    }
    let boundary = s.boundary_samples(m)?;
    let mut samples = Vec::with_capacity(m);
    let mut dropped = 0usize;
    for v in boundary.values() {
        if v.norm() < 1.0 - BOUNDARY_EPS {
            samples.push(DiskPoint::from_complex(*v)?);
        } else {
            dropped += 1;
        }
    }
    if dropped * 100 > m {
        warn!(
            "symbol {} has {dropped} of {m} boundary samples with modulus >= 1 - {BOUNDARY_EPS}",
            s.describe()
        );
    }
    Ok(PullbackMeasure {
        samples,
        sample_count: m,
        dropped,
        symbol: Some(s.clone()),
    })
}

/// Pullback measure from precomputed samples, without a symbol.
pub fn pullback_from_samples(samples: Vec<DiskPoint>, sample_count: usize, dropped: usize) -> Result<PullbackMeasure> {
    if samples.len() + dropped != sample_count {
        return Err(Error::invalid("retained plus dropped samples must equal the sample count"));
    }
    Ok(PullbackMeasure {
        samples,
        sample_count,
        dropped,
        symbol: None,
    })
}

/// Window masses for all `ξ` on a grid and every `h = 2^-n`, `n <= depth`,
/// using angle-sorted prefix sums for discrete measures.
pub struct WindowIndex {
    /// For each generation: atom arguments sorted, and prefix sums of masses.
    levels: Vec<(Vec<f64>, Vec<f64>)>,
}

impl WindowIndex {
    pub fn new(atoms: &[(DiskPoint, f64)], depth: u32) -> Self {
        let mut levels = Vec::with_capacity(depth as usize + 1);
        let mut sorted: Vec<(f64, f64, f64)> = atoms
            .iter()
            .map(|(z, w)| (z.arg(), z.modulus(), *w))
            .collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        for n in 0..=depth {
            let h = (-(n as f64)).exp2();
            let kept: Vec<&(f64, f64, f64)> =
                sorted.iter().filter(|a| a.1 >= 1.0 - h).collect();
            let args: Vec<f64> = kept.iter().map(|a| a.0).collect();
            let mut prefix = Vec::with_capacity(kept.len() + 1);
            prefix.push(0.0);
            let mut acc = 0.0;
            for a in &kept {
                acc += a.2;
                prefix.push(acc);
            }
            levels.push((args, prefix));
        }
        WindowIndex { levels }
    }

    /// `μ(W(ξ, 2^-n))`.
    pub fn mass(&self, n: u32, xi: f64) -> f64 {
        let (args, prefix) = &self.levels[n as usize];
        if args.is_empty() {
            return 0.0;
        }
        let h = (-(n as f64)).exp2();
        let inside = |t: f64| crate::geometry::angle_diff(t, xi).abs() <= h;
        // Arcs [xi - h - slack, xi + h + slack] pulled back to [0, 2π) pieces; points
        // in the slack zones are tested exactly.
        let slack = 1e-9;
        let lo = xi - h - slack;
        let hi = xi + h + slack;
        let mut pieces = Vec::with_capacity(2);
        if lo < 0.0 {
            pieces.push((lo + TAU, TAU));
            pieces.push((0.0, hi));
        } else if hi >= TAU {
            pieces.push((lo, TAU));
            pieces.push((0.0, hi - TAU));
        } else {
            pieces.push((lo, hi));
        }
        let mut total = 0.0;
        for (a, b) in pieces {
            let i0 = args.partition_point(|&t| t < a);
            let i1 = args.partition_point(|&t| t <= b);
            if i1 <= i0 {
                continue;
            }
            // Interior of the candidate range counts wholesale; edges are checked.
            let mut j0 = i0;
            while j0 < i1 && (args[j0] - a) < 4.0 * slack {
                j0 += 1;
            }
            let mut j1 = i1;
            while j1 > j0 && (b - args[j1 - 1]) < 4.0 * slack {
                j1 -= 1;
            }
            total += prefix[j1] - prefix[j0];
            for k in (i0..j0).chain(j1..i1) {
                if inside(args[k]) {
                    total += prefix[k + 1] - prefix[k];
                }
            }
        }
        total
    }
}

/// Per-generation `sup_ξ 2^n μ(W(ξ, 2^-n))` over a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CarlesonProfile {
    pub entries: Vec<(u32, f64)>,
    pub constant: f64,
    pub vanishing_suggestive: bool,
}

/// Window masses `μ(W(ξ_k, 2^-n))` for `n = 0..=depth` and `ξ_k = 2πk/grid`.
pub fn window_table(mu: &Measure, depth: u32, grid: usize) -> Vec<Vec<f64>> {
    use rayon::prelude::*;
    match mu.discrete_atoms() {
        Some(atoms) => {
            let index = WindowIndex::new(&atoms, depth);
            (0..=depth)
                .map(|n| {
                    (0..grid)
                        .into_par_iter()
                        .map(|k| index.mass(n, TAU * k as f64 / grid as f64))
                        .collect()
                })
                .collect()
        }
        None => (0..=depth)
            .map(|n| {
                let w = Window::new(0.0, (-(n as f64)).exp2()).expect("valid window");
                vec![mu.window_mass(&w); grid]
            })
            .collect(),
    }
}

pub fn carleson_profile(mu: &Measure, depth: u32, grid: usize) -> CarlesonProfile {
    if (grid as f64) < (depth as f64 + 2.0).exp2() {
        warn!("xi grid {grid} is too coarse to resolve windows of generation {depth}");
    }
    let table = window_table(mu, depth, grid);
    let entries: Vec<(u32, f64)> = table
        .iter()
        .enumerate()
        .map(|(n, row)| {
            let sup = row.iter().fold(0.0f64, |m, &v| m.max(v));
            (n as u32, sup * (n as f64).exp2())
        })
        .collect();
    let constant = entries.iter().fold(0.0f64, |m, e| m.max(e.1));
    let last = entries.last().map(|e| e.1).unwrap_or(0.0);
    CarlesonProfile {
        entries,
        constant,
        vanishing_suggestive: constant > 0.0 && last < 0.1 * constant,
    }
}
