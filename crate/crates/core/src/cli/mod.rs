//! `ergox` command-line front end.

pub mod config;
pub mod experiments;
pub mod io;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::ergotropy::EnergyMode;
use crate::error::{Error, Result};
use crate::protocols::ExtractionRule;
use config::{ExperimentConfig, ExperimentId, Fig2Sweep, GreedyOverrides, LiePreset};
use io::{emit, read_json, OperatorSpec, StateSpec};

#[derive(Debug, Parser)]
#[command(name = "ergox", version, about = "Work extraction from qubit-environment systems")]
pub struct Cli {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// W/GE versus number of steps for Fock, coherent and dressed inputs.
    Fig1(Fig1Args),
    /// Greedy thermal work extraction over a temperature sweep.
    Fig2(Fig2Args),
    /// Ergotropy (and optionally local ergotropy) of a state.
    Ergo(ErgoArgs),
    /// Dimension of the dynamical Lie algebra of a control problem.
    Lie(LieArgs),
    /// Replay a serialized protocol on a state.
    Protocol(ProtocolArgs),
    /// Emit the analytic Fock extraction protocol as JSON.
    Fock(FockArgs),
    /// Matrix elements and Bohr frequencies of the JC connectedness chain.
    Chain(ChainArgs),
}

#[derive(Debug, Default, Args)]
pub struct ModelArgs {
    /// Sets both qubit and cavity frequencies.
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub omega_s: Option<f64>,
    #[arg(long)]
    pub omega_e: Option<f64>,
    #[arg(long)]
    pub coupling: Option<f64>,
    /// Photon cutoff N.
    #[arg(long)]
    pub cutoff: Option<usize>,
}

#[derive(Debug, Default, Args)]
pub struct GreedyArgs {
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long)]
    pub max_local_ops: Option<usize>,
    #[arg(long)]
    pub max_consecutive_random: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// mode_energy or system_ergotropy.
    #[arg(long, value_parser = parse_extraction)]
    pub extraction: Option<ExtractionRule>,
}

#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// Master seed (fallback: ERGOX_SEED, then 7).
    #[arg(long)]
    pub seed: Option<u64>,
    /// full or noninteracting.
    #[arg(long)]
    pub energy_mode: Option<EnergyMode>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Fig1Args {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub greedy: GreedyArgs,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub alpha_sq: Option<f64>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub coherent_tol: Option<f64>,
    /// Also write a gnuplot script for the CSV.
    #[arg(long)]
    pub gnuplot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Fig2Args {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub greedy: GreedyArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Bath mean photon number.
    #[arg(long)]
    pub nbar: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Thermal tail mass above the cutoff.
    #[arg(long)]
    pub tail_tol: Option<f64>,
    /// Sweep the bath temperature with the qubit in its ground state.
    #[arg(long)]
    pub inset: bool,
    #[arg(long)]
    pub gnuplot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ErgoArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long)]
    pub ham: PathBuf,
    /// Also optimize over qubit unitaries (local ergotropy).
    #[arg(long)]
    pub local: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LieArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// heisenberg or jc.
    #[arg(long, value_parser = parse_preset)]
    pub preset: Option<LiePreset>,
    #[arg(long)]
    pub sites: Option<usize>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub controlled_sites: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Raw `{drift, controls}` JSON.
    #[arg(long)]
    pub problem: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProtocolArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub replay: PathBuf,
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long)]
    pub energy_mode: Option<EnergyMode>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FockArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 12)]
    pub photons: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ChainArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_extraction(s: &str) -> std::result::Result<ExtractionRule, String> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_"))).map_err(|_| {
        format!("unknown extraction rule `{s}` (expected mode_energy or system_ergotropy)")
    })
}

fn parse_preset(s: &str) -> std::result::Result<LiePreset, String> {
    serde_json::from_value(serde_json::Value::String(s.to_ascii_lowercase()))
        .map_err(|_| format!("unknown preset `{s}` (expected heisenberg or jc)"))
}

impl ModelArgs {
    fn apply(&self, c: &mut ExperimentConfig) {
        if let Some(w) = self.omega {
            c.model.omega_s = w;
            c.model.omega_e = w;
        }
        if let Some(w) = self.omega_s {
            c.model.omega_s = w;
        }
        if let Some(w) = self.omega_e {
            c.model.omega_e = w;
        }
        if let Some(g) = self.coupling {
            c.model.coupling = g;
        }
        if self.cutoff.is_some() {
            c.model.cutoff = self.cutoff;
        }
    }
}

impl GreedyArgs {
    fn apply(&self, c: &mut ExperimentConfig) {
        c.merge_greedy(&GreedyOverrides {
            tau: self.tau,
            grid_points: self.grid_points,
            max_local_ops: self.max_local_ops,
            max_consecutive_random: self.max_consecutive_random,
            restarts: self.restarts,
            extraction: self.extraction,
            ..Default::default()
        });
    }
}

impl RunArgs {
    fn apply(&self, c: &mut ExperimentConfig) {
        if self.seed.is_some() {
            c.seed = self.seed;
        }
        if self.energy_mode.is_some() {
            c.energy_mode = self.energy_mode;
        }
        if self.out.is_some() {
            c.output = self.out.clone();
        }
    }
}

fn set<T: Copy>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            ExperimentConfig::from_json(&text).map_err(|e| match e {
                Error::Config(msg) => Error::Config(format!("{}: {msg}", p.display())),
                other => other,
            })
        }
        None => Ok(ExperimentConfig::default()),
    }
}

fn json<T: serde::Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn csv_name(c: &ExperimentConfig, fallback: &str) -> String {
    c.output
        .as_ref()
        .map_or_else(|| fallback.to_string(), |p| p.display().to_string())
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    let mut c = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Fig1(a) => {
            a.model.apply(&mut c);
            a.greedy.apply(&mut c);
            a.run.apply(&mut c);
            set(&mut c.fig1.n, a.n);
            set(&mut c.fig1.alpha_sq, a.alpha_sq);
            set(&mut c.fig1.m, a.m);
            set(&mut c.fig1.coherent_tol, a.coherent_tol);
            c.validate(ExperimentId::Fig1)?;
            let out = experiments::run_fig1(&c)?;
            emit(c.output.as_deref(), &out.to_csv())?;
            if let Some(gp) = a.gnuplot {
                std::fs::write(gp, experiments::fig1_gnuplot(&csv_name(&c, "fig1.csv")))?;
            }
        }
        Command::Fig2(a) => {
            a.model.apply(&mut c);
            a.greedy.apply(&mut c);
            a.run.apply(&mut c);
            set(&mut c.fig2.nbar, a.nbar);
            set(&mut c.fig2.points, a.points);
            set(&mut c.fig2.tail_tol, a.tail_tol);
            if a.inset {
                c.fig2.sweep = Fig2Sweep::Inset;
            }
            c.validate(ExperimentId::Fig2)?;
            let out = experiments::run_fig2(&c)?;
            emit(c.output.as_deref(), &out.to_csv())?;
            if let Some(gp) = a.gnuplot {
                std::fs::write(gp, experiments::fig2_gnuplot(&csv_name(&c, "fig2.csv"), out.sweep))?;
            }
        }
        Command::Ergo(a) => {
            a.model.apply(&mut c);
            if a.seed.is_some() {
                c.seed = a.seed;
            }
            if a.out.is_some() {
                c.output = a.out;
            }
            c.validate(ExperimentId::Ergo)?;
            let state: StateSpec = read_json(&a.state)?;
            let ham: OperatorSpec = read_json(&a.ham)?;
            let r = experiments::run_ergo(&c, &state, &ham, a.local)?;
            emit(c.output.as_deref(), &json(&r)?)?;
        }
        Command::Lie(a) => {
            a.model.apply(&mut c);
            set(&mut c.lie.preset, a.preset);
            set(&mut c.lie.sites, a.sites);
            set(&mut c.lie.gamma, a.gamma);
            set(&mut c.lie.delta, a.delta);
            set(&mut c.lie.controlled_sites, a.controlled_sites);
            set(&mut c.lie.tol, a.tol);
            if a.problem.is_some() {
                c.lie.problem = a.problem;
            }
            if a.out.is_some() {
                c.output = a.out;
            }
            c.validate(ExperimentId::Lie)?;
            emit(c.output.as_deref(), &json(&experiments::run_lie(&c)?)?)?;
        }
        Command::Protocol(a) => {
            a.model.apply(&mut c);
            if a.energy_mode.is_some() {
                c.energy_mode = a.energy_mode;
            }
            if a.out.is_some() {
                c.output = a.out;
            }
            c.validate(ExperimentId::ProtocolRun)?;
            let proto = experiments::load_protocol(&a.replay)?;
            let state: StateSpec = read_json(&a.state)?;
            let r = experiments::run_protocol(&c, &proto, &state)?;
            emit(c.output.as_deref(), &json(&r)?)?;
        }
        Command::Fock(a) => {
            a.model.apply(&mut c);
            if a.out.is_some() {
                c.output = a.out;
            }
            c.validate(ExperimentId::Fock)?;
            let mut text = experiments::run_fock(&c, a.photons)?.to_json()?;
            text.push('\n');
            emit(c.output.as_deref(), &text)?;
        }
        Command::Chain(a) => {
            a.model.apply(&mut c);
            if a.out.is_some() {
                c.output = a.out;
            }
            c.validate(ExperimentId::Chain)?;
            emit(c.output.as_deref(), &json(&experiments::run_chain(&c)?)?)?;
        }
    }
    Ok(())
}

/// Parses `args`, runs, and maps the outcome to a process exit code:
/// 0 success, 2 configuration error, 3 numerical failure, 4 invariant violation.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("ergox: {e}");
            e.exit_code()
        }
    }
}
