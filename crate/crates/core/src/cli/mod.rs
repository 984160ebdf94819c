//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O or serialization failure, 2 invalid input
//! (including usage errors), 3 numerical integrity or convergence failure.

pub mod config;
mod figures;
pub mod output;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analysis::{
    analysis_grid, detect_bursts, run_ensemble, BurstParams, PlateauParams, MIN_POINTS_PER_UNIT,
};
use crate::chain::{coupling_for, ChainConfig, DisorderSpec, Fluctuation};
use crate::dynamics::{long_time_populations, propagate, StateVector, TimeGrid};
use crate::error::{Error, Result};
use crate::kernels::{chiral_fg, kernel_1d_reciprocal, kernel_2d, kernel_3d, DipoleGeometry};

use config::{DisorderMode, Settings};
use output::{csv, ensemble_csv, trajectory_csv, trajectory_json, Sink};

pub use figures::FIGURES;

/// Environment variable naming the base output directory.
pub const OUT_ENV: &str = "CHIRAL_CHAIN_OUT";
pub const DEFAULT_OUT: &str = "chiral-chain-out";
pub const MANIFEST_NAME: &str = "manifest.json";
const LOG_POINTS_PER_DECADE: usize = 400;

#[derive(Debug, Parser)]
#[command(
    name = "chiral-chain",
    version,
    about = "Dissipative dynamics of chiral-coupled atomic chains"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Propagate one chain and export populations, P_tot and I_tot.
    Simulate(SimulateArgs),
    /// Regenerate every curve of a figure preset.
    Figure(FigureArgs),
    /// Tabulate a pairwise coupling kernel.
    Kernel(KernelArgs),
    /// Mean and spread over random position fluctuations.
    Ensemble(EnsembleArgs),
    /// Re-run the request recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Args, Default)]
pub struct ChainArgs {
    /// key = value configuration file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "n")]
    pub n_atoms: Option<usize>,
    /// Spacing phase in units of π; 0 is taken as a full period.
    #[arg(long, allow_negative_numbers = true)]
    pub xi_over_pi: Option<f64>,
    #[arg(long = "gamma-l", allow_negative_numbers = true)]
    pub gamma_left: Option<f64>,
    #[arg(long = "gamma-r", allow_negative_numbers = true)]
    pub gamma_right: Option<f64>,
}

impl ChainArgs {
    fn settings(&self) -> Result<Settings> {
        let file = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::default(),
        };
        Ok(file.overlay(Settings {
            n_atoms: self.n_atoms,
            xi_over_pi: self.xi_over_pi,
            gamma_left: self.gamma_left,
            gamma_right: self.gamma_right,
            ..Settings::default()
        }))
    }
}

#[derive(Debug, Args, Default)]
pub struct OutArgs {
    /// Output directory [default: $CHIRAL_CHAIN_OUT/<command> or ./chiral-chain-out/<command>].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl OutArgs {
    fn resolve(&self, leaf: &str) -> PathBuf {
        self.out.clone().unwrap_or_else(|| {
            let base = std::env::var_os(OUT_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
            base.join(leaf)
        })
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    /// 1-based atom to displace.
    #[arg(long)]
    pub shift_site: Option<usize>,
    /// Displacement as a fraction of the spacing; negative moves left.
    #[arg(long, allow_negative_numbers = true)]
    pub shift: Option<f64>,
    /// Final time γt.
    #[arg(long, default_value_t = 20.0)]
    pub horizon: f64,
    /// Points on a linear grid.
    #[arg(long, default_value_t = 2000)]
    pub points: usize,
    /// 400 log-spaced points per decade from γt = 0.01.
    #[arg(long)]
    pub log_grid: bool,
    /// Also write complex amplitudes as JSON.
    #[arg(long)]
    pub json: bool,
    /// Print the CSV to stdout and write nothing else.
    #[arg(long)]
    pub stdout: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    /// One of fig2, fig3, fig4, fig5, fig6, fig7.
    pub name: String,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelDim {
    #[value(name = "1")]
    #[serde(rename = "1")]
    OneD,
    #[value(name = "1chiral")]
    #[serde(rename = "1chiral")]
    OneDChiral,
    #[value(name = "2")]
    #[serde(rename = "2")]
    TwoD,
    #[value(name = "3")]
    #[serde(rename = "3")]
    ThreeD,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long, value_enum)]
    pub dim: KernelDim,
    /// Single value or lo:step:hi.
    #[arg(long)]
    pub xi: String,
    /// Dipole alignment p̂·r̂ for 2D and 3D.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alignment: f64,
    #[arg(long = "gamma-l", default_value_t = 1.0, allow_negative_numbers = true)]
    pub gamma_left: f64,
    #[arg(long = "gamma-r", default_value_t = 1.0, allow_negative_numbers = true)]
    pub gamma_right: f64,
    #[arg(long)]
    pub stdout: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistributionArg {
    Gaussian,
    Uniform,
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    #[command(flatten)]
    pub chain: ChainArgs,
    /// Fluctuation width as a fraction of the spacing.
    #[arg(long, allow_negative_numbers = true)]
    pub fluct: Option<f64>,
    #[arg(long)]
    pub realizations: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub distribution: Option<DistributionArg>,
    /// Final time γt [default: 1000 at spacing 0.05].
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Grid spacing in γt.
    #[arg(long, default_value_t = 1.0 / MIN_POINTS_PER_UNIT)]
    pub dt: f64,
    #[arg(long)]
    pub stdout: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridSpec {
    Linear { t_end: f64, n_points: usize },
    Step { t_end: f64, dt: f64 },
    Logarithmic { horizon: f64, per_decade: usize },
}

impl GridSpec {
    pub fn build(&self) -> Result<TimeGrid> {
        match *self {
            GridSpec::Linear { t_end, n_points } => TimeGrid::uniform(t_end, n_points),
            GridSpec::Step { t_end, dt } => TimeGrid::with_step(t_end, dt),
            GridSpec::Logarithmic {
                horizon,
                per_decade,
            } => TimeGrid::logarithmic(horizon, per_decade),
        }
    }
}

/// Fully resolved inputs of one command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Request {
    Simulate {
        chain: ChainConfig,
        disorder: DisorderSpec,
        grid: GridSpec,
        json: bool,
    },
    Figure {
        name: String,
        plateau: PlateauParams,
        burst: BurstParams,
    },
    Kernel {
        dim: KernelDim,
        xi: Vec<f64>,
        alignment: f64,
        gamma_left: f64,
        gamma_right: f64,
    },
    Ensemble {
        chain: ChainConfig,
        disorder: DisorderSpec,
        grid: GridSpec,
        burst: BurstParams,
    },
}

impl Request {
    fn leaf(&self) -> String {
        match self {
            Request::Simulate { .. } => "simulate".into(),
            Request::Figure { name, .. } => name.clone(),
            Request::Kernel { .. } => "kernel".into(),
            Request::Ensemble { .. } => "ensemble".into(),
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            Request::Simulate { disorder, .. } | Request::Ensemble { disorder, .. } => {
                match disorder {
                    DisorderSpec::Ensemble { seed, .. } => Some(*seed),
                    _ => None,
                }
            }
            Request::Figure { name, .. } => figures::seed(name),
            Request::Kernel { .. } => None,
        }
    }
}

/// Written next to every set of outputs; `replay` re-runs `request`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub request: Request,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
}

fn tool_line() -> String {
    format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))
}

/// Header lines shared by every CSV a request produces.
pub(crate) fn metadata(request: &Request) -> Result<Vec<String>> {
    let mut meta = vec![
        format!("tool: {}", tool_line()),
        format!("request: {}", serde_json::to_string(request)?),
    ];
    if !matches!(request, Request::Kernel { .. }) {
        meta.push("time unit: 1/gamma with gamma = max(gamma_left, gamma_right)".into());
    }
    Ok(meta)
}

/// Parse `lo:step:hi` or a single number.
pub fn parse_xi_range(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("bad xi range '{spec}' (expected x or lo:step:hi)"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let values = match parts[..] {
        [x] => vec![x],
        [lo, step, hi] => {
            if !(step > 0.0) || hi < lo {
                return Err(bad());
            }
            let n = ((hi - lo) / step + 1e-9).floor() as usize;
            (0..=n).map(|k| lo + k as f64 * step).collect()
        }
        _ => return Err(bad()),
    };
    if values.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::Config(format!(
            "xi must be finite and >= 0 in '{spec}'"
        )));
    }
    Ok(values)
}

fn simulate_request(args: &SimulateArgs) -> Result<Request> {
    let mut settings = args.chain.settings()?;
    settings = settings.overlay(Settings {
        site: args.shift_site,
        shift_fraction: args.shift,
        ..Settings::default()
    });
    if settings.disorder_mode() == DisorderMode::Ensemble {
        return Err(Error::Config(
            "ensemble disorder belongs to the ensemble command".into(),
        ));
    }
    let chain = settings.chain()?;
    let disorder = settings.disorder(chain.n_atoms)?;
    let grid = if args.log_grid {
        GridSpec::Logarithmic {
            horizon: args.horizon,
            per_decade: LOG_POINTS_PER_DECADE,
        }
    } else {
        GridSpec::Linear {
            t_end: args.horizon,
            n_points: args.points,
        }
    };
    Ok(Request::Simulate {
        chain,
        disorder,
        grid,
        json: args.json,
    })
}

fn ensemble_request(args: &EnsembleArgs) -> Result<Request> {
    let settings = args.chain.settings()?.overlay(Settings {
        mode: Some(DisorderMode::Ensemble),
        fluctuation_fraction: args.fluct,
        n_realizations: args.realizations,
        seed: args.seed,
        distribution: args.distribution.map(|d| match d {
            DistributionArg::Gaussian => Fluctuation::Gaussian,
            DistributionArg::Uniform => Fluctuation::Uniform,
        }),
        ..Settings::default()
    });
    let chain = settings.chain()?;
    let disorder = settings.disorder(chain.n_atoms)?;
    let grid = GridSpec::Step {
        t_end: args.horizon.unwrap_or(analysis_grid().end()),
        dt: args.dt,
    };
    Ok(Request::Ensemble {
        chain,
        disorder,
        grid,
        burst: BurstParams::default(),
    })
}

fn kernel_request(args: &KernelArgs) -> Result<Request> {
    Ok(Request::Kernel {
        dim: args.dim,
        xi: parse_xi_range(&args.xi)?,
        alignment: args.alignment,
        gamma_left: args.gamma_left,
        gamma_right: args.gamma_right,
    })
}

fn figure_request(args: &FigureArgs) -> Result<Request> {
    if !FIGURES.contains(&args.name.as_str()) {
        return Err(Error::Config(format!(
            "unknown figure '{}' (one of {})",
            args.name,
            FIGURES.join(", ")
        )));
    }
    Ok(Request::Figure {
        name: args.name.clone(),
        plateau: PlateauParams::default(),
        burst: BurstParams::default(),
    })
}

fn run_simulate(req: &Request, sink: &mut Sink) -> Result<()> {
    let Request::Simulate {
        chain,
        disorder,
        grid,
        json,
    } = req
    else {
        unreachable!()
    };
    let v = coupling_for(chain, disorder, 0)?;
    let init = StateVector::uniform(chain.n_atoms);
    let traj = match *grid {
        GridSpec::Logarithmic { horizon, .. } => long_time_populations(&v, &init, horizon, true)?,
        _ => propagate(&v, &init, &grid.build()?)?,
    };
    sink.primary("trajectory.csv", &trajectory_csv(&metadata(req)?, &traj))?;
    if *json {
        sink.file("trajectory.json", &trajectory_json(&traj)?)?;
    }
    Ok(())
}

fn run_ensemble_cmd(req: &Request, sink: &mut Sink) -> Result<()> {
    let Request::Ensemble {
        chain,
        disorder,
        grid,
        burst,
    } = req
    else {
        unreachable!()
    };
    let ens = run_ensemble(chain, disorder, &grid.build()?)?;
    let mut meta = metadata(req)?;
    meta.push(format!(
        "realizations used: {}, skipped: {}",
        ens.n_realizations, ens.n_skipped
    ));
    sink.primary("ensemble.csv", &ensemble_csv(&meta, &ens))?;
    let bursts = match detect_bursts(&ens.times, &ens.mean_i_tot, *burst) {
        Ok(b) => Some(b),
        Err(Error::Resolution(msg)) => {
            eprintln!("burst detection skipped: {msg}");
            None
        }
        Err(e) => return Err(e),
    };
    let report = serde_json::json!({
        "n_realizations": ens.n_realizations,
        "n_skipped": ens.n_skipped,
        "seed": ens.seed,
        "bursts_in_mean_intensity": bursts,
    });
    sink.file(
        "ensemble_report.json",
        &serde_json::to_string_pretty(&report)?,
    )
}

fn run_kernel(req: &Request, sink: &mut Sink) -> Result<()> {
    let Request::Kernel {
        dim,
        xi,
        alignment,
        gamma_left,
        gamma_right,
    } = req
    else {
        unreachable!()
    };
    let mut meta = metadata(req)?;
    meta.push(match dim {
        KernelDim::OneDChiral => {
            "decay = Re F, shift = Re G / 2; both reduce to the reciprocal columns at gamma_left = gamma_right = 1".into()
        }
        _ => "decay = collective rate 2 Re J, shift = frequency shift Im J, in units of the single-atom rate".into(),
    });
    let mut header: Vec<String> = vec!["xi".into(), "decay".into(), "shift".into()];
    let mut rows = Vec::with_capacity(xi.len());
    let mut divergent = Vec::new();
    for &x in xi {
        let row = match dim {
            KernelDim::OneD => {
                let k = kernel_1d_reciprocal(x)?;
                vec![x, k.collective_decay(), k.frequency_shift()]
            }
            KernelDim::OneDChiral => {
                let (f, g) = chiral_fg(x, *gamma_left, *gamma_right)?;
                vec![x, f.re, 0.5 * g.re, f.re, f.im, g.re, g.im]
            }
            KernelDim::TwoD | KernelDim::ThreeD => {
                let geom = DipoleGeometry::new(x, *alignment)?;
                let k = if *dim == KernelDim::TwoD {
                    kernel_2d(geom)
                } else {
                    kernel_3d(geom)
                };
                if k.shift_divergent {
                    divergent.push(x);
                }
                vec![x, k.collective_decay(), k.frequency_shift()]
            }
        };
        rows.push(row);
    }
    if *dim == KernelDim::OneDChiral {
        header.extend(["F_re", "F_im", "G_re", "G_im"].map(String::from));
    }
    if !divergent.is_empty() {
        let list: Vec<String> = divergent.iter().map(|x| output::num(*x)).collect();
        meta.push(format!("shift diverges (NaN) at xi = {}", list.join(", ")));
    }
    sink.primary("kernel.csv", &csv(&meta, &header, rows))
}

fn execute(req: &Request, sink: &mut Sink) -> Result<()> {
    match req {
        Request::Simulate { .. } => run_simulate(req, sink),
        Request::Ensemble { .. } => run_ensemble_cmd(req, sink),
        Request::Kernel { .. } => run_kernel(req, sink),
        Request::Figure {
            name,
            plateau,
            burst,
        } => figures::run(name, *plateau, *burst, &metadata(req)?, sink),
    }
}

/// Run `request`, then write its manifest unless output goes to stdout.
pub fn run_request(request: &Request, mut sink: Sink) -> Result<Option<RunManifest>> {
    let start = Instant::now();
    execute(request, &mut sink)?;
    let Some(dir) = sink.dir().map(|d| d.to_path_buf()) else {
        return Ok(None);
    };
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        request: request.clone(),
        seed: request.seed(),
        outputs: sink.written().to_vec(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    std::fs::write(
        dir.join(MANIFEST_NAME),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    eprintln!(
        "wrote {} files to {}",
        manifest.outputs.len() + 1,
        dir.display()
    );
    Ok(Some(manifest))
}

fn sink_for(out: &OutArgs, stdout: bool, request: &Request) -> Result<Sink> {
    if stdout {
        Ok(Sink::stdout())
    } else {
        Sink::directory(out.resolve(&request.leaf()))
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let (request, sink) = match &cli.command {
        Command::Simulate(a) => {
            let r = simulate_request(a)?;
            let s = sink_for(&a.out, a.stdout, &r)?;
            (r, s)
        }
        Command::Ensemble(a) => {
            let r = ensemble_request(a)?;
            let s = sink_for(&a.out, a.stdout, &r)?;
            (r, s)
        }
        Command::Kernel(a) => {
            let r = kernel_request(a)?;
            let s = sink_for(&a.out, a.stdout, &r)?;
            (r, s)
        }
        Command::Figure(a) => {
            let r = figure_request(a)?;
            let s = sink_for(&a.out, false, &r)?;
            (r, s)
        }
        Command::Replay(a) => {
            let manifest: RunManifest =
                serde_json::from_str(&std::fs::read_to_string(&a.manifest)?)?;
            if manifest.tool != env!("CARGO_PKG_NAME") {
                return Err(Error::Config(format!(
                    "manifest written by '{}'",
                    manifest.tool
                )));
            }
            if manifest.version != env!("CARGO_PKG_VERSION") {
                eprintln!(
                    "manifest from version {}, running {}; outputs may differ",
                    manifest.version,
                    env!("CARGO_PKG_VERSION")
                );
            }
            let s = sink_for(&a.out, false, &manifest.request)?;
            (manifest.request, s)
        }
    };
    run_request(&request, sink).map(|_| ())
}

/// Parse arguments, run, report errors on stderr; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
