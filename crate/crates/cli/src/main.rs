//! `carleson`: run embedding criteria, summing-norm checks and constructions
//! from the command line.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use carleson_core::composition::{nevanlinna_surrogate, pullback_report, NevanlinnaSurrogate, PullbackReport};
use carleson_core::constructions::{
    domenig_measure, nolower_measure, noupper_measure, permuted_pair, AtomMassConvention, Construction,
    PermutedPairParams, SeriesDiagnostic,
};
use carleson_core::criteria::{f_profile, nc_integral, phi_profile, summing_report, AnalysisParams, Regime, SeriesSurrogate, SummingVerdict};
use carleson_core::experiments::{bergman, diag_verify, gf_compare, hs_crosscheck, zyg_verify};
use carleson_core::measures::{carleson_profile, CarlesonProfile, Measure};
use carleson_core::schema::{parse_measure, parse_symbol, MeasureDoc};
use carleson_core::Error;

use output::{canonical_json, profile_csv, write_atomic};

#[derive(Parser, Debug)]
#[command(name = "carleson", version, about = "Summing-norm diagnostics for Carleson embeddings of Hardy spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    run: RunConfig,
}

#[derive(Args, Debug, Clone)]
struct RunConfig {
    /// Measure JSON file.
    #[arg(long, global = true)]
    measure: Option<PathBuf>,
    /// Symbol JSON file.
    #[arg(long, global = true)]
    symbol: Option<PathBuf>,
    /// Hardy exponent.
    #[arg(long, global = true)]
    p: Option<f64>,
    /// Summing exponent.
    #[arg(long, global = true)]
    r: Option<f64>,
    /// Target exponent (Bergman space, or the `1 - |z|` weight in analyze).
    #[arg(long, global = true)]
    q: Option<f64>,
    /// Last box generation.
    #[arg(long, global = true, default_value_t = 12)]
    depth: u32,
    /// Boundary grid size.
    #[arg(long, global = true, default_value_t = 4096)]
    xi_grid: usize,
    /// Boundary samples for pullback measures.
    #[arg(long, global = true, default_value_t = 1 << 20)]
    samples: usize,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Objective evaluations for the weak-norm optimizer.
    #[arg(long, global = true, default_value_t = 10_000)]
    budget: usize,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Exit with status 3 when an optimizer does not converge.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ConstructionKind {
    Noupper,
    Nolower,
    Permuted,
    Domenig,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Convention {
    AsWritten,
    Linear,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Summing verdict, Carleson profile and weighted integral of a measure.
    Analyze,
    /// Diagonal model ratio π(T_{p,N}) / ‖β‖ over random corona measures.
    DiagVerify {
        #[arg(long, value_delimiter = ',', default_value = "4,8,16,32,64,128")]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Quadrature and basis distortion bands on polynomial Hardy spaces.
    ZygVerify {
        #[arg(long, value_delimiter = ',', default_value = "1.5,2,4")]
        p_list: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "8,16,32,64,128,256")]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
    /// Pullback and Nevanlinna surrogates of a composition operator.
    Compose {
        /// Angular nodes per radius in the Nevanlinna quadrature.
        #[arg(long, default_value_t = 512)]
        angular: usize,
    },
    /// Regime table for the Hardy to Bergman injection.
    Bergman {
        #[arg(long, value_delimiter = ',', default_value = "2,2.5")]
        q_list: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1.6,2,3")]
        r_list: Vec<f64>,
    },
    /// Pointwise ratio of the net square function G to F.
    GfCompare,
    /// Hilbert–Schmidt norm: closed form, truncated matrix and Φ at p = 2.
    HsCrosscheck {
        #[arg(long, default_value_t = 2000)]
        degree: usize,
    },
    /// Write a counterexample measure and its diagnostic series.
    Construct {
        #[arg(value_enum)]
        kind: ConstructionKind,
        /// Decay exponent for noupper and nolower.
        #[arg(long)]
        c: Option<f64>,
        /// Exponent γ for the permuted pair.
        #[arg(long)]
        gamma: Option<f64>,
        /// Boundary exponent for the radial box-mass family.
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 40)]
        n_max: u32,
        #[arg(long, default_value_t = 5)]
        n0: u32,
        #[arg(long, value_enum, default_value_t = Convention::AsWritten)]
        convention: Convention,
        /// Diagnostics file; defaults to `<out>.diagnostics.json`.
        #[arg(long)]
        diagnostics: Option<PathBuf>,
    },
}

enum Failure {
    Input(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Numerical(_) => Failure::Numerical(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn require<T: Copy>(v: Option<T>, flag: &str) -> CliResult<T> {
    v.ok_or_else(|| Failure::Input(format!("--{flag} is required")))
}

fn read(path: &Option<PathBuf>, flag: &str) -> CliResult<String> {
    let path = path.as_ref().ok_or_else(|| Failure::Input(format!("--{flag} is required")))?;
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_measure(cfg: &RunConfig) -> CliResult<Measure> {
    let text = read(&cfg.measure, "measure")?;
    parse_measure(&text).map_err(|e| Failure::Input(format!("{}: {e}", cfg.measure.as_ref().unwrap().display())))
}

fn emit(cfg: &RunConfig, text: &str) -> CliResult<()> {
    match &cfg.out {
        Some(path) => write_atomic(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(cfg: &RunConfig, value: &T) -> CliResult<()> {
    if cfg.format == Format::Csv {
        return Err(Failure::Input("this command only writes JSON".into()));
    }
    let text = canonical_json(value).map_err(|e| Failure::Numerical(e.to_string()))?;
    emit(cfg, &text)
}

#[derive(Serialize)]
struct AnalyzeReport {
    measure: &'static str,
    p: f64,
    r: f64,
    depth: u32,
    xi_grid: usize,
    regime: Regime,
    surrogate: f64,
    per_generation: Vec<f64>,
    profile_norm: f64,
    converged: bool,
    verdict: carleson_core::criteria::Verdict,
    tail: f64,
    nc_integral: NcReport,
    carleson_profile: CarlesonProfile,
}

#[derive(Serialize)]
struct NcReport {
    q: f64,
    #[serde(flatten)]
    series: SeriesSurrogate,
}

fn analyze(cfg: &RunConfig) -> CliResult<()> {
    let mu = load_measure(cfg)?;
    let p = require(cfg.p, "p")?;
    let r = cfg.r.unwrap_or(p);
    let params = AnalysisParams::new(p, r, cfg.depth, cfg.xi_grid)?;
    let verdict: SummingVerdict = summing_report(&mu, &params)?;
    let profile = if verdict.regime == Regime::PLe2 {
        phi_profile(&mu, p, cfg.xi_grid, cfg.depth)?
    } else {
        f_profile(&mu, &params)
    };
    if cfg.format == Format::Csv {
        return emit(cfg, &profile_csv(&profile.grid, &profile.values));
    }
    let q = cfg.q.unwrap_or(p.min(2.0));
    let report = AnalyzeReport {
        measure: mu.kind(),
        p,
        r,
        depth: cfg.depth,
        xi_grid: cfg.xi_grid,
        regime: verdict.regime,
        surrogate: verdict.surrogate,
        per_generation: verdict.per_generation,
        profile_norm: profile.norm,
        converged: verdict.converged,
        verdict: verdict.verdict,
        tail: verdict.tail,
        nc_integral: NcReport {
            q,
            series: nc_integral(&mu, q, cfg.depth)?,
        },
        carleson_profile: carleson_profile(&mu, cfg.depth, cfg.xi_grid),
    };
    emit_json(cfg, &report)
}

#[derive(Serialize)]
struct ComposeReport {
    symbol: String,
    p: f64,
    r: f64,
    pullback: PullbackReport,
    nevanlinna: Option<NevanlinnaSurrogate>,
    /// Nevanlinna value over the pullback surrogate.
    ratio: Option<f64>,
}

fn compose(cfg: &RunConfig, angular: usize) -> CliResult<()> {
    let text = read(&cfg.symbol, "symbol")?;
    let s = parse_symbol(&text).map_err(|e| Failure::Input(format!("{}: {e}", cfg.symbol.as_ref().unwrap().display())))?;
    let p = require(cfg.p, "p")?;
    let r = require(cfg.r, "r")?;
    let params = AnalysisParams::new(p, r, cfg.depth, cfg.xi_grid)?;
    let pullback = pullback_report(&s, cfg.samples, &params)?;
    let nevanlinna = if s.is_root_solvable() {
        Some(nevanlinna_surrogate(&s, p, r, cfg.depth, angular)?)
    } else {
        None
    };
    let ratio = nevanlinna.as_ref().map(|n| n.value / pullback.verdict.surrogate);
    emit_json(
        cfg,
        &ComposeReport {
            symbol: s.describe(),
            p,
            r,
            pullback,
            nevanlinna,
            ratio,
        },
    )
}

#[derive(Serialize)]
struct Diagnostics {
    construction: String,
    parameters: serde_json::Value,
    convergent: SeriesDiagnostic,
    divergent: SeriesDiagnostic,
}

#[derive(Serialize)]
struct PermutedOutput {
    mu: MeasureDoc,
    nu: MeasureDoc,
    pair: carleson_core::constructions::PermutedPair,
}

#[allow(clippy::too_many_arguments)]
fn construct(
    cfg: &RunConfig,
    kind: ConstructionKind,
    c: Option<f64>,
    gamma: Option<f64>,
    beta: Option<f64>,
    n_max: u32,
    n0: u32,
    convention: Convention,
    diagnostics: &Option<PathBuf>,
) -> CliResult<()> {
    let p = require(cfg.p, "p")?;
    let built: Construction = match kind {
        ConstructionKind::Noupper => noupper_measure(p, require(c, "c")?, n_max)?,
        ConstructionKind::Nolower => nolower_measure(p, require(c, "c")?, n_max)?,
        ConstructionKind::Domenig => domenig_measure(p, require(beta, "beta")?, n_max)?,
        ConstructionKind::Permuted => {
            let mut params = PermutedPairParams::new(p, require(gamma, "gamma")?);
            params.n0 = n0;
            params.n_max = n_max;
            params.convention = match convention {
                Convention::AsWritten => AtomMassConvention::AsWritten,
                Convention::Linear => AtomMassConvention::Linear,
            };
            let pair = permuted_pair(&params)?;
            return emit_json(
                cfg,
                &PermutedOutput {
                    mu: MeasureDoc::from_measure(&pair.mu),
                    nu: MeasureDoc::from_measure(&pair.nu),
                    pair,
                },
            );
        }
    };
    let diag = Diagnostics {
        construction: built.name.clone(),
        parameters: serde_json::json!({ "p": p, "c": c, "beta": beta, "n_max": n_max }),
        convergent: built.convergent.clone(),
        divergent: built.divergent.clone(),
    };
    let measure = MeasureDoc::from_measure(&built.measure);
    match &cfg.out {
        Some(out) => {
            emit_json(cfg, &measure)?;
            let path = diagnostics.clone().unwrap_or_else(|| diagnostics_path(out));
            let text = canonical_json(&diag).map_err(|e| Failure::Numerical(e.to_string()))?;
            write_atomic(&path, &text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
        }
        None => emit_json(cfg, &serde_json::json!({ "measure": measure, "diagnostics": diag })),
    }
}

fn diagnostics_path(out: &Path) -> PathBuf {
    let mut name = out.file_stem().unwrap_or_default().to_os_string();
    name.push(".diagnostics.json");
    out.with_file_name(name)
}

fn run(cli: &Cli) -> CliResult<()> {
    let cfg = &cli.run;
    match &cli.command {
        Command::Analyze => analyze(cfg),
        Command::DiagVerify { n_list, trials } => {
            let table = diag_verify(cfg.p.unwrap_or(2.0), n_list, *trials, cfg.seed, cfg.budget)?;
            if cfg.strict && table.unconverged > 0 {
                return Err(Failure::Numerical(format!(
                    "{} trials with an unconverged weak-norm ascent",
                    table.unconverged
                )));
            }
            emit_json(cfg, &table)
        }
        Command::ZygVerify { p_list, n_list, trials } => emit_json(cfg, &zyg_verify(p_list, n_list, *trials, cfg.seed)?),
        Command::Compose { angular } => compose(cfg, *angular),
        Command::Bergman { q_list, r_list } => emit_json(cfg, &bergman(cfg.p.unwrap_or(3.0), q_list, r_list, cfg.depth)?),
        Command::GfCompare => {
            let mu = load_measure(cfg)?;
            let report = gf_compare(&mu, cfg.p.unwrap_or(3.0), cfg.depth, cfg.xi_grid)?;
            if cfg.format == Format::Csv {
                return emit(cfg, &profile_csv(&report.grid, &report.ratio));
            }
            emit_json(cfg, &report)
        }
        Command::HsCrosscheck { degree } => {
            let mu = load_measure(cfg)?;
            let Measure::Atomic(atomic) = &mu else {
                return Err(Failure::Input("hs-crosscheck needs an atomic measure".into()));
            };
            emit_json(cfg, &hs_crosscheck(atomic, *degree, cfg.xi_grid, cfg.depth)?)
        }
        Command::Construct {
            kind,
            c,
            gamma,
            beta,
            n_max,
            n0,
            convention,
            diagnostics,
        } => construct(cfg, *kind, *c, *gamma, *beta, *n_max, *n0, *convention, diagnostics),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
