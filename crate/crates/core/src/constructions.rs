//! Explicit counterexample measures together with the series that decide
//! their behavior.

use log::warn;
use serde::Serialize;

use crate::criteria::{classify_indexed, tail_ratio, SeriesTrend};
use crate::error::{Error, Result};
use crate::geometry::{corona_inner, corona_outer, BoxIndex, DiskPoint};
use crate::measures::{Atom, AtomicMeasure, Measure, RadialMeasure, Ring};
use crate::numerics::{check_exponent, conjugate};

/// Largest generation whose point `1 - 2^-n` is distinct from 1 in `f64`.
pub const MAX_ATOM_GENERATION: u32 = 52;
/// Largest generation for which series are emitted.
pub const MAX_SERIES_GENERATION: u32 = 200;

/// Per-atom mass in the permuted pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AtomMassConvention {
    /// `α_n^2`: the literal composition `α_n μ_n` with `μ_n = α_n Σ δ`.
    #[default]
    AsWritten,
    /// `α_n`.
    Linear,
}

/// Sequence `α_n = 2^{-n·decay} n^{power}` for the permuted pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaSequence {
    pub decay: f64,
    pub power: f64,
}

impl AlphaSequence {
    pub fn at(&self, n: u32) -> f64 {
        (-(n as f64) * self.decay).exp2() * (n as f64).powf(self.power)
    }
}

/// A named series with its partial sums and trend.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesDiagnostic {
    pub label: String,
    pub first_index: usize,
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub trend: SeriesTrend,
    pub tail: f64,
}

impl SeriesDiagnostic {
    pub fn new(label: &str, first_index: usize, terms: Vec<f64>) -> Self {
        let partial_sums = terms
            .iter()
            .scan(0.0, |acc, t| {
                *acc += t;
                Some(*acc)
            })
            .collect();
        SeriesDiagnostic {
            label: label.to_string(),
            first_index,
            trend: classify_indexed(first_index, &terms),
            tail: tail_ratio(&terms),
            partial_sums,
            terms,
        }
    }

    pub fn total(&self) -> f64 {
        self.partial_sums.last().copied().unwrap_or(0.0)
    }
}

/// A generated measure and the two series the construction hinges on.
#[derive(Debug, Clone, Serialize)]
pub struct Construction {
    pub name: String,
    #[serde(skip)]
    pub measure: Measure,
    #[serde(skip)]
    pub auxiliary: Option<Measure>,
    /// Expected to converge for admissible parameters.
    pub convergent: SeriesDiagnostic,
    /// Expected to diverge for admissible parameters.
    pub divergent: SeriesDiagnostic,
}

/// Admissible decay exponents `c ∈ (p/2, p-1]`, so that `n^{-c}` lies in
/// `ℓ^{2/p}` but not in `ℓ^{p'/p}`.
pub fn decay_interval(p: f64) -> (f64, f64) {
    (p / 2.0, p - 1.0)
}

/// Admissible `γ ∈ (1/p', 2/p' - 1/2)` for the permuted pair.
pub fn gamma_interval(p: f64) -> (f64, f64) {
    let pp = conjugate(p);
    (1.0 / pp, 2.0 / pp - 0.5)
}

fn check_decay(p: f64, c: f64) -> Result<()> {
    check_exponent(p, "p")?;
    if !(p > 2.0) {
        return Err(Error::invalid(format!("p = {p} must exceed 2")));
    }
    let (lo, hi) = decay_interval(p);
    if !(c > lo && c <= hi) {
        return Err(Error::invalid(format!("c = {c} must lie in ({lo}, {hi}] for p = {p}")));
    }
    Ok(())
}

fn check_range(n_max: u32, limit: u32) -> Result<()> {
    if n_max == 0 || n_max > limit {
        return Err(Error::invalid(format!("n_max = {n_max} must lie in 1..={limit}")));
    }
    Ok(())
}

/// `1 - 2^-n` as a disk point.
fn dyadic_radius_point(n: u32) -> DiskPoint {
    DiskPoint::new(1.0 - (-(n as f64)).exp2(), 0.0).expect("n <= 52 keeps the point inside")
}

/// Radial masses `x_n = 2^{-np/p'} n^{-c}` placed on `|z| = 1 - 2^-n`.
fn noupper_masses(p: f64, c: f64, n_max: u32) -> Vec<f64> {
    let ratio = p / conjugate(p);
    (1..=n_max)
        .map(|n| (-(n as f64) * ratio).exp2() * (n as f64).powf(-c))
        .collect()
}

/// The two series for the rotation invariant example, from closed forms:
/// `Σ 2^{2n/p'} y_n^{2/p}` with `y_n = Σ_{m>=n} x_m` and `Σ 2^n x_n^{p'/p}`.
pub fn noupper_series(p: f64, c: f64, n_max: u32) -> Result<(SeriesDiagnostic, SeriesDiagnostic)> {
    check_decay(p, c)?;
    check_range(n_max, MAX_SERIES_GENERATION)?;
    Ok(noupper_series_unchecked(p, c, n_max))
}

fn noupper_series_unchecked(p: f64, c: f64, n_max: u32) -> (SeriesDiagnostic, SeriesDiagnostic) {
    let pp = conjugate(p);
    let x = noupper_masses(p, c, n_max);
    let mut y = x.clone();
    for k in (0..y.len().saturating_sub(1)).rev() {
        y[k] += y[k + 1];
    }
    let conv = y
        .iter()
        .enumerate()
        .map(|(k, yn)| (2.0 * (k + 1) as f64 / pp).exp2() * yn.powf(2.0 / p))
        .collect();
    let div = x
        .iter()
        .enumerate()
        .map(|(k, xn)| ((k + 1) as f64).exp2() * xn.powf(pp / p))
        .collect();
    (
        SeriesDiagnostic::new("sum 2^(2n/p') y_n^(2/p)", 1, conv),
        SeriesDiagnostic::new("sum 2^n x_n^(p'/p)", 1, div),
    )
}

/// Rotation invariant measure `σ = Σ_{n=1}^{n_max} 2^{-np/p'} n^{-c} δ_{1-2^-n}`
/// spread uniformly over each circle.
pub fn noupper_measure(p: f64, c: f64, n_max: u32) -> Result<Construction> {
    check_decay(p, c)?;
    check_range(n_max, MAX_ATOM_GENERATION)?;
    let rings = noupper_masses(p, c, n_max)
        .into_iter()
        .enumerate()
        .map(|(k, w)| Ring {
            r: 1.0 - (-((k + 1) as f64)).exp2(),
            w,
        })
        .collect();
    let (convergent, divergent) = noupper_series_unchecked(p, c, n_max);
    Ok(Construction {
        name: "noupper".into(),
        measure: Measure::Radial(RadialMeasure::new(rings)?),
        auxiliary: None,
        convergent,
        divergent,
    })
}

/// The two series for the radial-segment example: `Σ (2^n α_n)^{2/p}` and
/// `Σ (2^n α_n)^{p'/p}` with `2^n α_n = n^{-c}`.
pub fn nolower_series(p: f64, c: f64, n_max: u32) -> Result<(SeriesDiagnostic, SeriesDiagnostic)> {
    check_decay(p, c)?;
    check_range(n_max, MAX_SERIES_GENERATION)?;
    Ok(nolower_series_unchecked(p, c, n_max))
}

fn nolower_series_unchecked(p: f64, c: f64, n_max: u32) -> (SeriesDiagnostic, SeriesDiagnostic) {
    let pp = conjugate(p);
    let scaled: Vec<f64> = (1..=n_max).map(|n| (n as f64).powf(-c)).collect();
    (
        SeriesDiagnostic::new("sum (2^n a_n)^(2/p)", 1, scaled.iter().map(|s| s.powf(2.0 / p)).collect()),
        SeriesDiagnostic::new("sum (2^n a_n)^(p'/p)", 1, scaled.iter().map(|s| s.powf(pp / p)).collect()),
    )
}

/// `μ = Σ α_n δ_{1-2^-n}` with `2^n α_n = n^{-c}`, plus the auxiliary
/// `ν = Σ 2^-n δ_{1-2^-n}` whose Carleson property makes the test kernels
/// weakly summable.
pub fn nolower_measure(p: f64, c: f64, n_max: u32) -> Result<Construction> {
    check_decay(p, c)?;
    check_range(n_max, MAX_ATOM_GENERATION)?;
    let atoms = (1..=n_max)
        .map(|n| Atom {
            z: dyadic_radius_point(n),
            w: (-(n as f64)).exp2() * (n as f64).powf(-c),
        })
        .collect();
    let aux = (1..=n_max)
        .map(|n| Atom {
            z: dyadic_radius_point(n),
            w: (-(n as f64)).exp2(),
        })
        .collect();
    let (convergent, divergent) = nolower_series_unchecked(p, c, n_max);
    Ok(Construction {
        name: "nolower".into(),
        measure: Measure::Atomic(AtomicMeasure::new(atoms)?),
        auxiliary: Some(Measure::Atomic(AtomicMeasure::new(aux)?)),
        convergent,
        divergent,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PermutedPairParams {
    pub p: f64,
    pub gamma: f64,
    pub n0: u32,
    pub n_max: u32,
    /// Offset of the first charged box of `ν` at generation `n0`.
    pub l_start: u64,
    pub convention: AtomMassConvention,
    /// Replaces the default `α_n = 2^{-np} n^{γp}`; required when `p < 2`.
    pub alpha: Option<AlphaSequence>,
}

impl PermutedPairParams {
    pub fn new(p: f64, gamma: f64) -> Self {
        PermutedPairParams {
            p,
            gamma,
            n0: 5,
            n_max: 20,
            l_start: 0,
            convention: AtomMassConvention::AsWritten,
            alpha: None,
        }
    }

    pub fn alpha_sequence(&self) -> AlphaSequence {
        self.alpha.unwrap_or(AlphaSequence {
            decay: self.p,
            power: self.gamma * self.p,
        })
    }
}

/// Charged box indices `(n, first j, count)` of the permuted pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChargedRun {
    pub n: u32,
    pub mu_first: u64,
    pub nu_first: u64,
    pub count: u64,
    pub wrapped: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PermutedPair {
    #[serde(skip)]
    pub mu: Measure,
    #[serde(skip)]
    pub nu: Measure,
    pub runs: Vec<ChargedRun>,
    pub atom_mass: Vec<f64>,
}

/// Two atomic measures with identical box-mass multisets in every generation:
/// `μ` charges the boxes `j = 0..=m_n` and `ν` the boxes `j = l_n..=l_n + m_n`,
/// with `m_n = ⌊2^n/n^2⌋` and `l_{n+1} = 2(l_n + m_n)`, for `n0 < n <= n_max`.
pub fn permuted_pair(params: &PermutedPairParams) -> Result<PermutedPair> {
    check_exponent(params.p, "p")?;
    if params.alpha.is_none() {
        if !(params.p > 2.0) {
            return Err(Error::invalid("p < 2 needs an explicit alpha sequence"));
        }
        let (lo, hi) = gamma_interval(params.p);
        if !(params.gamma > lo && params.gamma < hi) {
            return Err(Error::invalid(format!(
                "gamma = {} must lie in ({lo}, {hi}) for p = {}",
                params.gamma, params.p
            )));
        }
    }
    if params.n0 < 3 {
        return Err(Error::invalid("n0 must be at least 3"));
    }
    if params.n_max <= params.n0 || params.n_max > 30 {
        return Err(Error::invalid("n_max must lie in (n0, 30]"));
    }
    let alpha = params.alpha_sequence();
    let mut l = params.l_start;
    let mut m_prev = (1u64 << params.n0) / (params.n0 as u64 * params.n0 as u64);
    let mut mu_atoms = Vec::new();
    let mut nu_atoms = Vec::new();
    let mut runs = Vec::new();
    let mut masses = Vec::new();
    for n in params.n0 + 1..=params.n_max {
        l = 2 * (l + m_prev);
        let size = 1u64 << n;
        let m = size / (n as u64 * n as u64);
        let a = alpha.at(n);
        let w = match params.convention {
            AtomMassConvention::AsWritten => a * a,
            AtomMassConvention::Linear => a,
        };
        let wrapped = l + m >= size;
        if wrapped {
            warn!("generation {n}: boxes {l}..={} exceed 2^{n} and wrap around", l + m);
        }
        for k in 0..=m {
            mu_atoms.push(Atom { z: BoxIndex::new(n, k)?.center(), w });
            nu_atoms.push(Atom {
                z: BoxIndex::new(n, (l + k) % size)?.center(),
                w,
            });
        }
        runs.push(ChargedRun {
            n,
            mu_first: 0,
            nu_first: l % size,
            count: m + 1,
            wrapped,
        });
        masses.push(w);
        m_prev = m;
    }
    Ok(PermutedPair {
        mu: Measure::Atomic(AtomicMeasure::new(mu_atoms)?),
        nu: Measure::Atomic(AtomicMeasure::new(nu_atoms)?),
        runs,
        atom_mass: masses,
    })
}

/// Half-open angular arc (in turns) covered by a run of charged boxes.
pub fn run_arc(n: u32, first: u64, count: u64) -> (f64, f64) {
    let w = (-(n as f64)).exp2();
    (first as f64 * w, (first + count) as f64 * w)
}

pub fn domenig_interval(p: f64) -> (f64, f64) {
    (1.0, 2.0 / p)
}

/// Radial measure with corona mass `2^{-n/β}` on `Γ_n`, so that every box of
/// generation `n` has mass `2^{-n(1+1/β)}`.
pub fn domenig_measure(p: f64, beta: f64, n_max: u32) -> Result<Construction> {
    check_exponent(p, "p")?;
    let (lo, hi) = domenig_interval(p);
    if !(beta > lo && beta < hi) {
        return Err(Error::invalid(format!("beta = {beta} must lie in ({lo}, {hi}) for p = {p}")));
    }
    check_range(n_max, MAX_ATOM_GENERATION)?;
    let rings = (0..=n_max)
        .map(|n| Ring {
            r: 0.5 * (corona_inner(n) + corona_outer(n)),
            w: (-(n as f64) / beta).exp2(),
        })
        .collect();
    let measure = Measure::Radial(RadialMeasure::new(rings)?);
    let table = measure.box_table(n_max);
    let mut two_summing = Vec::new();
    let mut order_bounded = Vec::new();
    for (n, g) in table.iter().enumerate() {
        let scale = (n as f64).exp2();
        two_summing.push(g.sum_over_boxes(n as u32, |m| (scale * m).powf(2.0 / p)).sqrt());
        order_bounded.push(g.sum_over_boxes(n as u32, |m| scale * m));
    }
    Ok(Construction {
        name: "domenig".into(),
        measure,
        auxiliary: None,
        convergent: SeriesDiagnostic::new("2-summing generation norms", 0, two_summing),
        divergent: SeriesDiagnostic::new("sum_j 2^n box mass", 0, order_bounded),
    })
}
