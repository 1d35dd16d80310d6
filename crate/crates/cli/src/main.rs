//! `pseudopath` command-line front end.
//!
//! Exit status: 0 on success, 1 when a computation fails, 2 when the
//! configuration or input files are invalid.

mod check;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pseudopath::projective::compatibility_check_with;
use pseudopath::{
    compute_kernel, eval_lj, fk_convergence_report, fk_time_sliced, fresnel_quadrature_lhs, io::write_samples_csv,
    kernel_mass, marginal_variation, parseval_rhs, Atom, AtomicComplexMeasure, Complex64, CylinderFunction,
    CylinderMarginal, Error, EvalMethod, EvolutionSpec, FiniteRankOperator, FresnelIntegrand, Grid1D, InitialDatum,
    PathFunctionalSpec, PotentialSpec, QuadratureMethod, TimeGrid,
};
use serde::{Deserialize, Serialize};

#[derive(Debug)]
pub enum CliError {
    /// Invalid flags, files or preconditions.
    Config(String),
    /// The computation itself failed.
    Compute(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::GridTooNarrow { .. }
            | Error::ResolutionLimit { .. }
            | Error::NotIntegrable(_)
            | Error::NoConvergence { .. }
            | Error::LadderDivergence(_)
            | Error::InconsistentRepresentations(_)
            | Error::NegativeVariation { .. } => CliError::Compute(msg),
            _ => CliError::Config(msg),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "pseudopath", version, about = "Complex kernels, path functionals and oscillatory integrals")]
pub struct RunConfig {
    #[command(subcommand)]
    command: Command,
    /// Output file; standard output when omitted.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Output format; each command has its own default.
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample the fundamental solution g_t on a grid.
    Kernel {
        #[arg(long)]
        p: u32,
        /// Coefficient as `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long)]
        t: f64,
        /// `xmin,xmax,n`.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        #[arg(long)]
        t_eps: Option<f64>,
    },
    /// Total variation of the marginal on a uniform partition.
    Tvgrowth {
        #[arg(long)]
        p: u32,
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        n: usize,
        /// Grid for the single-slice kernel at unit time.
        #[arg(long, allow_hyphen_values = true, default_value = "-40,40,8000")]
        grid: String,
    },
    /// Time-sliced Feynman-Kac solution with a convergence report.
    Fk {
        #[arg(long)]
        p: u32,
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        nslices: usize,
        /// Periodic grid `xmin,xmax,n`.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        #[arg(long)]
        u0: PathBuf,
        #[arg(long)]
        potential: PathBuf,
        /// Slice counts for the convergence report.
        #[arg(long, default_value = "4,8,16,32,64")]
        ladder: String,
        /// Where to write the JSON convergence report; standard error when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Quadrature and closed-form sides of the Parseval identity.
    Parseval {
        /// JSON `{d, eigenvalues, eigenvectors?, atoms, hbar}`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "regularized")]
        method: Method,
    },
    /// Evaluate the path functional on a cylinder function.
    Cylinder {
        /// JSON `{horizon, times, atoms}`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        p: u32,
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, value_enum, default_value = "fourier")]
        method: Eval,
        /// Extra times; reports the compatibility gap on the refined grid.
        #[arg(long)]
        refine: Option<String>,
    },
    /// Run the invariant suite of every module and write a report.
    Check {
        #[arg(long, default_value_t = check::DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Regularized,
    GrowingBox,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Eval {
    Fourier,
    Quadrature,
}

fn config<E: std::fmt::Display>(what: &str) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Config(format!("{what}: {e}"))
}

fn parse_list(s: &str, what: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(config(what)))
        .collect()
}

fn parse_alpha(s: &str) -> CliResult<Complex64> {
    match parse_list(s, "--alpha")?.as_slice() {
        [re, im] => Ok(Complex64::new(*re, *im)),
        _ => Err(CliError::Config(format!("--alpha expects re,im, got {s:?}"))),
    }
}

fn parse_grid(s: &str) -> CliResult<Grid1D> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::Config(format!("--grid expects xmin,xmax,n, got {s:?}")));
    }
    let x_min = parts[0].trim().parse().map_err(config("--grid xmin"))?;
    let x_max = parts[1].trim().parse().map_err(config("--grid xmax"))?;
    let n = parts[2].trim().parse().map_err(config("--grid n"))?;
    Ok(Grid1D::new(x_min, x_max, n)?)
}

fn spec(p: u32, alpha: &str, t_eps: Option<f64>) -> CliResult<EvolutionSpec> {
    let alpha = parse_alpha(alpha)?;
    Ok(match t_eps {
        Some(e) => EvolutionSpec::with_t_eps(p, alpha, e)?,
        None => EvolutionSpec::new(p, alpha)?,
    })
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable artifact");
    s.push('\n');
    s
}

/// Sampled kernel as written by `kernel --format json`.
#[derive(Serialize, Deserialize, Debug, PartialEq)]
pub struct KernelArtifact {
    pub spec: EvolutionSpec,
    pub t: f64,
    pub grid: Grid1D,
    pub mass: Complex64,
    /// Absent when the kernel is not absolutely integrable.
    pub tail_mass_bound: Option<f64>,
    pub values: Vec<Complex64>,
}

#[derive(Serialize, Deserialize, Debug, PartialEq)]
pub struct TvGrowthArtifact {
    pub p: u32,
    pub alpha: Complex64,
    pub t: f64,
    pub n: usize,
    pub per_slice_tv: f64,
    pub total: f64,
    pub verdict: pseudopath::Verdict,
}

#[derive(Deserialize, Debug)]
struct ParsevalInput {
    d: usize,
    eigenvalues: Vec<f64>,
    #[serde(default)]
    eigenvectors: Option<Vec<Vec<f64>>>,
    atoms: Vec<Atom>,
    hbar: f64,
}

#[derive(Serialize, Deserialize, Debug, PartialEq)]
pub struct ParsevalArtifact {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub rel_err: f64,
    pub method: QuadratureMethod,
}

#[derive(Serialize, Deserialize, Debug, PartialEq)]
pub struct CylinderArtifact {
    pub value: Complex64,
    pub norm: f64,
    pub within_bound: bool,
    pub method: EvalMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refined_times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compatibility_gap: Option<f64>,
}

struct Emitted {
    body: Vec<u8>,
    /// Secondary artifact and its destination.
    side: Option<(Option<PathBuf>, String)>,
    /// Nonzero status after a successful write.
    status: u8,
}

fn emit(body: impl Into<Vec<u8>>) -> Emitted {
    Emitted {
        body: body.into(),
        side: None,
        status: 0,
    }
}

fn only(format: Option<Format>, allowed: Format, cmd: &str) -> CliResult<()> {
    match format {
        Some(f) if f != allowed => Err(CliError::Config(format!("{cmd} does not support {f:?} output"))),
        _ => Ok(()),
    }
}

fn run(cfg: &RunConfig) -> CliResult<Emitted> {
    match &cfg.command {
        Command::Kernel { p, alpha, t, grid, t_eps } => {
            let s = spec(*p, alpha, *t_eps)?;
            let grid = parse_grid(grid)?;
            s.check_time(*t)?;
            let k = compute_kernel(&s, *t, &grid)?;
            match cfg.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let mut out = Vec::new();
                    write_samples_csv(&mut out, &grid, k.values()).expect("writing to memory");
                    Ok(emit(out))
                }
                Format::Json => {
                    let tail = k.tail_mass_bound();
                    Ok(emit(to_json(&KernelArtifact {
                        spec: s,
                        t: *t,
                        grid,
                        mass: kernel_mass(&k),
                        tail_mass_bound: tail.is_finite().then_some(tail),
                        values: k.values().to_vec(),
                    })))
                }
            }
        }
        Command::Tvgrowth { p, alpha, t, n, grid } => {
            only(cfg.format, Format::Json, "tvgrowth")?;
            let s = spec(*p, alpha, None)?;
            let grid = parse_grid(grid)?;
            let r = marginal_variation(&s, *t, *n, &grid)?;
            Ok(emit(to_json(&TvGrowthArtifact {
                p: *p,
                alpha: s.alpha(),
                t: *t,
                n: *n,
                per_slice_tv: r.per_slice_tv,
                total: r.total,
                verdict: r.verdict,
            })))
        }
        Command::Fk {
            p,
            alpha,
            t,
            nslices,
            grid,
            u0,
            potential,
            ladder,
            report,
        } => {
            only(cfg.format, Format::Csv, "fk")?;
            let pf = PathFunctionalSpec::new(spec(*p, alpha, None)?, *t)?;
            let grid = parse_grid(grid)?;
            let u0: InitialDatum = read_json(u0)?;
            let v: PotentialSpec = read_json(potential)?;
            let ladder = ladder
                .split(',')
                .map(|s| s.trim().parse::<usize>().map_err(config("--ladder")))
                .collect::<CliResult<Vec<_>>>()?;
            let u = fk_time_sliced(&pf, &u0, &v, *nslices, &grid)?;
            let r = fk_convergence_report(&pf, &u0, &v, &grid, &ladder)?;
            let mut out = Vec::new();
            write_samples_csv(&mut out, &grid, &u).expect("writing to memory");
            Ok(Emitted {
                body: out,
                side: Some((report.clone(), to_json(&r))),
                status: 0,
            })
        }
        Command::Parseval { input, method } => {
            only(cfg.format, Format::Json, "parseval")?;
            let raw: ParsevalInput = read_json(input)?;
            if raw.eigenvalues.len() != raw.d {
                return Err(CliError::Config(format!(
                    "d = {} but {} eigenvalues given",
                    raw.d,
                    raw.eigenvalues.len()
                )));
            }
            let b = match raw.eigenvectors {
                Some(v) => FiniteRankOperator::new(raw.eigenvalues, v)?,
                None => FiniteRankOperator::diagonal(raw.eigenvalues)?,
            };
            let f = FresnelIntegrand::new(AtomicComplexMeasure::new(raw.d, raw.atoms)?, raw.hbar)?;
            let method = match method {
                Method::Regularized => QuadratureMethod::Regularized,
                Method::GrowingBox => QuadratureMethod::GrowingBox,
            };
            let rhs = parseval_rhs(&b, &f)?;
            let lhs = fresnel_quadrature_lhs(&b, &f, method)?;
            let rel_err = (lhs - rhs).norm() / rhs.norm().max(f64::MIN_POSITIVE);
            Ok(emit(to_json(&ParsevalArtifact {
                lhs,
                rhs,
                rel_err,
                method,
            })))
        }
        Command::Cylinder {
            input,
            p,
            alpha,
            method,
            refine,
        } => {
            only(cfg.format, Format::Json, "cylinder")?;
            let s = spec(*p, alpha, None)?;
            let f: CylinderFunction = read_json(input)?;
            let method = match method {
                Eval::Fourier => EvalMethod::Fourier,
                Eval::Quadrature => EvalMethod::Quadrature,
            };
            let m = CylinderMarginal::new(s.clone(), f.grid().clone())?;
            let refined = match refine {
                Some(r) => {
                    let mut times = parse_list(r, "--refine")?;
                    times.sort_by(f64::total_cmp);
                    times.dedup();
                    let extra = TimeGrid::new(f.grid().horizon(), times)?;
                    let k = f.grid().union(&extra)?;
                    Some((k.clone(), CylinderMarginal::new(s, k)?))
                }
                None => None,
            };
            let value = eval_lj(&f, &m, method)?;
            let gap = match &refined {
                Some((k, mk)) => Some(compatibility_check_with(&f, k, &m, mk, method)?),
                None => None,
            };
            Ok(emit(to_json(&CylinderArtifact {
                value,
                norm: f.norm(),
                within_bound: value.norm() <= f.norm() + 1e-12,
                method,
                refined_times: refined.map(|(k, _)| k.times().to_vec()),
                compatibility_gap: gap,
            })))
        }
        Command::Check { seed } => {
            only(cfg.format, Format::Json, "check")?;
            let report = check::run_suite(*seed);
            Ok(Emitted {
                body: to_json(&report).into_bytes(),
                side: None,
                status: if report.pass { 0 } else { 1 },
            })
        }
    }
}

fn write_out(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| CliError::Config(format!("{}: {e}", p.display()))),
        None => io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Compute(format!("stdout: {e}"))),
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("PSEUDOPATH_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("PSEUDOPATH_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("PSEUDOPATH_THREADS: {e}")))
}

fn main() -> ExitCode {
    let cfg = RunConfig::parse();
    let result = configure_threads().and_then(|_| {
        let out = run(&cfg)?;
        write_out(cfg.output.as_deref(), &out.body)?;
        if let Some((path, text)) = out.side {
            match path {
                Some(p) => write_out(Some(&p), text.as_bytes())?,
                None => eprint!("{text}"),
            }
        }
        Ok(out.status)
    });
    match result {
        Ok(status) => ExitCode::from(status),
        Err(e) => {
            let (CliError::Config(msg) | CliError::Compute(msg)) = &e;
            eprintln!("error: {msg}");
            ExitCode::from(e.code())
        }
    }
}
