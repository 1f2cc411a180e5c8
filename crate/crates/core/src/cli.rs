//! Command-line front end: configuration resolution, figure recipes, the
//! subcommands and their output files.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{k_iterate_functions, mean_offspring_series, survival_exponent, GridFunction, KOperator};
use crate::pdmp::{simulate_split_clock, simulate_trajectory, Caps};
use crate::population::{embedding_test, simulate_population, survives_to_generation, PopulationCaps};
use crate::rates::{classify_regime, holling_ii, AllometricParams};
use crate::rng::{child_seed, PathStreams};
use crate::stats::{
    criticality_test, estimate_from_paths, heavy_tail_diagnostic, phase_diagram_sweep_with, sample_paths, McOptions,
    PhaseGrid, PhaseOptions,
};

pub const MANIFEST_SCHEMA: &str = "allopdmp.manifest/1";
pub const SEED_ENV: &str = "ALLOPDMP_SEED";
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(name = "allopdmp", version, about = "Energy-structured branching PDMP toolkit")]
pub struct Cli {
    /// `key = value` file or a manifest.json from an earlier run.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; falls back to $ALLOPDMP_SEED.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub max_events: Option<u64>,
    #[arg(long, global = true)]
    pub max_time: Option<f64>,
    /// Preload the parameter recipe of figure 4, 5, 6, 7 or 8.
    #[arg(long, global = true, value_parser = clap::value_parser!(u8).range(4..=8))]
    pub figure: Option<u8>,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    #[arg(long = "c-alpha", alias = "c_alpha", global = true, allow_hyphen_values = true)]
    pub c_alpha: Option<f64>,
    #[arg(long = "c-beta", alias = "c_beta", global = true, allow_hyphen_values = true)]
    pub c_beta: Option<f64>,
    #[arg(long = "c-gamma", alias = "c_gamma", global = true, allow_hyphen_values = true)]
    pub c_gamma: Option<f64>,
    #[arg(long = "c-delta", alias = "c_delta", global = true, allow_hyphen_values = true)]
    pub c_delta: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub x0: Option<f64>,
    #[arg(long = "phi-r", alias = "phi_r", global = true, allow_hyphen_values = true)]
    pub phi_r: Option<f64>,
    /// Resource level; sets phi_r = R/(1+R).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub resource: Option<f64>,
}

impl ParamArgs {
    fn apply(&self, p: &mut AllometricParams) {
        let pairs = [
            (&mut p.alpha, self.alpha),
            (&mut p.beta, self.beta),
            (&mut p.gamma, self.gamma),
            (&mut p.delta, self.delta),
            (&mut p.c_alpha, self.c_alpha),
            (&mut p.c_beta, self.c_beta),
            (&mut p.c_gamma, self.c_gamma),
            (&mut p.c_delta, self.c_delta),
            (&mut p.x0, self.x0),
            (&mut p.phi_r, self.phi_r),
        ];
        for (slot, v) in pairs {
            if let Some(v) = v {
                *slot = v;
            }
        }
        if let Some(r) = self.resource {
            p.phi_r = holling_ii(r);
        }
    }
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Individual trajectories as event CSVs.
    Simulate(SimulateArgs),
    /// Monte Carlo mean offspring number, optionally over an x0 sweep.
    EstimateM(EstimateArgs),
    /// Regime report for the parameters.
    Classify,
    /// Criticality over a (C_beta/C_delta, C_delta/(C_gamma-C_alpha)) grid.
    PhaseDiagram(PhaseArgs),
    /// Iterates K^k 1 on a grid, the series for m and the no-jump probability.
    Koperator(KoperatorArgs),
    /// Branching population runs, generation sizes and the embedding test.
    Population(PopulationArgs),
    /// Rerun the configuration stored in a manifest.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::EstimateM(_) => "estimate-m",
            Command::Classify => "classify",
            Command::PhaseDiagram(_) => "phase-diagram",
            Command::Koperator(_) => "koperator",
            Command::Population(_) => "population",
            Command::Replay(_) => "replay",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstructionArg {
    Gillespie,
    SplitClock,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub paths: Option<usize>,
    /// Starting energy; defaults to x0.
    #[arg(long)]
    pub xi0: Option<f64>,
    #[arg(long, value_enum, default_value_t = ConstructionArg::Gillespie)]
    pub construction: ConstructionArg,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EstimateArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Lower end of a log-spaced x0 sweep.
    #[arg(long)]
    pub x0_min: Option<f64>,
    #[arg(long)]
    pub x0_max: Option<f64>,
    #[arg(long)]
    pub x0_points: Option<usize>,
    /// Write running means for every sweep point.
    #[arg(long)]
    pub trace: bool,
    #[arg(long, default_value_t = 3.0)]
    pub z: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PhaseArgs {
    /// Comma-separated C_beta/C_delta values.
    #[arg(long, value_delimiter = ',')]
    pub ratios: Option<Vec<f64>>,
    /// Comma-separated C_delta/(C_gamma - C_alpha) values.
    #[arg(long, value_delimiter = ',')]
    pub columns: Option<Vec<f64>>,
    /// Points per axis of the default grid.
    #[arg(long, default_value_t = 12)]
    pub grid: usize,
    #[arg(long, default_value_t = 20_000)]
    pub n: usize,
    #[arg(long, default_value_t = 5)]
    pub bisection_steps: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct KoperatorArgs {
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Energy for the series and the no-jump probability; defaults to x0.
    #[arg(long)]
    pub xi0: Option<f64>,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long)]
    pub no_series: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct PopulationArgs {
    #[arg(long, default_value_t = 1)]
    pub founders: usize,
    /// Founder energy; defaults to x0.
    #[arg(long)]
    pub founder_energy: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub max_individuals: usize,
    #[arg(long)]
    pub max_generation: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub runs: usize,
    /// Also count runs reaching this generation.
    #[arg(long)]
    pub survival_generation: Option<usize>,
    /// Repetitions of the embedding test (0 skips it).
    #[arg(long, default_value_t = 0)]
    pub embedding_reps: usize,
    #[arg(long, default_value_t = 2000)]
    pub embedding_runs: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CapOverrides {
    pub max_events: Option<u64>,
    pub max_time: Option<f64>,
}

impl CapOverrides {
    pub fn resolve(&self, params: &AllometricParams) -> Caps {
        let natural = Caps::natural(params);
        Caps {
            max_events: self.max_events.unwrap_or(natural.max_events),
            max_time: self.max_time.unwrap_or(natural.max_time),
        }
    }
}

/// Everything needed to reproduce a run; written as `manifest.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub schema: String,
    pub version: String,
    pub command: Command,
    pub params: AllometricParams,
    pub master_seed: u64,
    pub workers: Option<usize>,
    pub caps: CapOverrides,
    pub output_dir: PathBuf,
    pub figure: Option<u8>,
}

/// Parameters of a figure recipe; the base is the shared experimental table
/// (α = 0.75, γ = α, δ = α − 1, φ = 2/3, C_γ = 2, C_α = 1).
pub fn figure_params(figure: u8) -> Result<AllometricParams> {
    let base = AllometricParams::baseline();
    Ok(match figure {
        4 => base.with_beta(-0.2).with_constants(2.0, 0.5),
        5 => base.with_beta(-0.2).with_constants(2.0, 0.5),
        6 => base.with_beta(1.0).with_constants(2.0, 0.5),
        // the axes use C_γ − C_α as the net intake rate, i.e. φ(R) = 1
        7 => base.with_phi(1.0).with_constants(2.0, 0.5),
        8 => base.with_constants(0.55, 0.3),
        other => return Err(Error::Config(format!("no recipe for figure {other}"))),
    })
}

fn apply_figure_defaults(command: &mut Command, figure: Option<u8>) {
    let Some(f) = figure else { return };
    match command {
        Command::Simulate(a) if f == 4 => {
            a.paths.get_or_insert(6);
        }
        Command::EstimateM(a) if f == 5 || f == 8 => {
            a.x0_min.get_or_insert(1e-100);
            a.x0_max.get_or_insert(1e100);
            a.x0_points.get_or_insert(41);
            a.n.get_or_insert(50_000);
        }
        Command::EstimateM(a) if f == 6 => {
            a.n.get_or_insert(100_000);
            a.trace = true;
        }
        _ => {}
    }
}

fn read_config_file(path: &Path, params: &mut AllometricParams, cfg: &mut FileSettings) -> Result<()> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    if text.trim_start().starts_with('{') {
        let m: RunConfig = serde_json::from_str(&text).map_err(|e| Error::Config(format!("bad manifest: {e}")))?;
        *params = m.params;
        cfg.seed = Some(m.master_seed);
        cfg.workers = m.workers;
        cfg.max_events = m.caps.max_events;
        cfg.max_time = m.caps.max_time;
        return Ok(());
    }
    for (k, v) in params.apply_kv(&text)? {
        let bad = || Error::Config(format!("config key `{k}`: cannot parse `{v}`"));
        match k.as_str() {
            "seed" => cfg.seed = Some(v.parse().map_err(|_| bad())?),
            "workers" => cfg.workers = Some(v.parse().map_err(|_| bad())?),
            "max_events" => cfg.max_events = Some(v.parse::<f64>().map_err(|_| bad())? as u64),
            "max_time" => cfg.max_time = Some(v.parse().map_err(|_| bad())?),
            _ => return Err(Error::Config(format!("unknown config key `{k}`"))),
        }
    }
    Ok(())
}

#[derive(Default)]
struct FileSettings {
    seed: Option<u64>,
    workers: Option<usize>,
    max_events: Option<u64>,
    max_time: Option<f64>,
}

/// Merge recipe, config file, environment and flags, in increasing priority.
pub fn resolve(cli: Cli) -> Result<RunConfig> {
    if let Command::Replay(r) = &cli.command {
        let text = fs::read_to_string(&r.manifest)
            .map_err(|e| Error::Config(format!("cannot read manifest {}: {e}", r.manifest.display())))?;
        let mut m: RunConfig = serde_json::from_str(&text).map_err(|e| Error::Config(format!("bad manifest: {e}")))?;
        if m.schema != MANIFEST_SCHEMA {
            return Err(Error::Config(format!("unsupported manifest schema `{}`", m.schema)));
        }
        if let Some(out) = cli.out {
            m.output_dir = out;
        }
        if cli.workers.is_some() {
            m.workers = cli.workers;
        }
        return Ok(m);
    }
    let mut params = match cli.figure {
        Some(f) => figure_params(f)?,
        None => AllometricParams::baseline(),
    };
    let mut file = FileSettings::default();
    if let Some(path) = &cli.config {
        read_config_file(path, &mut params, &mut file)?;
    }
    cli.params.apply(&mut params);
    params.validate()?;
    let env_seed = match std::env::var(SEED_ENV) {
        Ok(s) => Some(s.trim().parse::<u64>().map_err(|_| Error::Config(format!("{SEED_ENV} must be a u64, got `{s}`")))?),
        Err(_) => None,
    };
    let mut command = cli.command;
    apply_figure_defaults(&mut command, cli.figure);
    Ok(RunConfig {
        schema: MANIFEST_SCHEMA.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command,
        params,
        master_seed: cli.seed.or(env_seed).or(file.seed).unwrap_or(DEFAULT_SEED),
        workers: cli.workers.or(file.workers),
        caps: CapOverrides {
            max_events: cli.max_events.or(file.max_events),
            max_time: cli.max_time.or(file.max_time),
        },
        output_dir: cli.out.unwrap_or_else(|| PathBuf::from("allopdmp-out")),
        figure: cli.figure,
    })
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Run a resolved configuration, writing its manifest first.
pub fn execute(config: &RunConfig) -> Result<()> {
    let dir = &config.output_dir;
    fs::create_dir_all(dir)?;
    write_json(dir, "manifest.json", config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    pool.install(|| match &config.command {
        Command::Simulate(a) => cmd_simulate(config, a),
        Command::EstimateM(a) => cmd_estimate_m(config, a),
        Command::Classify => cmd_classify(config),
        Command::PhaseDiagram(a) => cmd_phase_diagram(config, a),
        Command::Koperator(a) => cmd_koperator(config, a),
        Command::Population(a) => cmd_population(config, a),
        Command::Replay(_) => Err(Error::Config("a manifest cannot itself be a replay".into())),
    })
}

#[derive(Debug, Serialize)]
struct PathRecord {
    path_id: usize,
    seed_path: String,
    terminal: &'static str,
    n_births: u64,
    t_death: Option<f64>,
    censored: bool,
    jump_accumulation: bool,
    n_events: usize,
}

pub fn cmd_simulate(config: &RunConfig, a: &SimulateArgs) -> Result<()> {
    let p = &config.params;
    let xi0 = a.xi0.unwrap_or(p.x0);
    let caps = config.caps.resolve(p);
    let mut records = Vec::new();
    for i in 0..a.paths.unwrap_or(6) {
        let streams = PathStreams::new(config.master_seed, i as u64);
        let traj = match a.construction {
            ConstructionArg::Gillespie => simulate_trajectory(p, xi0, &streams, &caps)?,
            ConstructionArg::SplitClock => simulate_split_clock(p, xi0, &streams, &caps)?,
        };
        let mut w = create(&config.output_dir, &format!("path_{i:04}.csv"))?;
        traj.write_csv(i, &mut w, true)?;
        w.flush()?;
        println!("path {i}: {} births, terminal {}", traj.n_births, traj.terminal.as_str());
        records.push(PathRecord {
            path_id: i,
            seed_path: traj.seed_path.clone(),
            terminal: traj.terminal.as_str(),
            n_births: traj.n_births,
            t_death: traj.t_death,
            censored: traj.censored,
            jump_accumulation: traj.jump_accumulation,
            n_events: traj.events.len(),
        });
    }
    write_json(&config.output_dir, "summaries.json", &records)
}

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

pub fn cmd_estimate_m(config: &RunConfig, a: &EstimateArgs) -> Result<()> {
    let base = config.params;
    let n = a.n.unwrap_or(50_000);
    let x0s = match (a.x0_min, a.x0_max) {
        (Some(lo), Some(hi)) if lo > 0.0 && hi >= lo => log_space(lo, hi, a.x0_points.unwrap_or(21)),
        (None, None) => vec![base.x0],
        _ => return Err(Error::Config("x0 sweep needs 0 < x0_min <= x0_max".into())),
    };
    let mut csv = create(&config.output_dir, "estimate_m.csv")?;
    writeln!(csv, "x0,m_hat,stderr,verdict,n_censored,ci_low,ci_high")?;
    let mut trace = if a.trace { Some(create(&config.output_dir, "running_means.csv")?) } else { None };
    if let Some(t) = trace.as_mut() {
        writeln!(t, "x0,n,mean")?;
    }
    let mut diagnostics = Vec::new();
    for (i, &x0) in x0s.iter().enumerate() {
        let p = base.with_x0(x0);
        let opts = McOptions { caps: Some(config.caps.resolve(&p)), z: a.z, ..McOptions::default() };
        let paths = sample_paths(&p, x0, n, child_seed(config.master_seed, i as u64), &opts)?;
        let est = estimate_from_paths(&paths, a.z);
        let verdict = criticality_test(&est, a.z);
        writeln!(
            csv,
            "{x0:e},{},{},{},{},{},{}",
            est.mean,
            est.stderr,
            verdict.as_str(),
            est.n_censored,
            est.ci_low,
            est.ci_high
        )?;
        if let Some(t) = trace.as_mut() {
            for r in &est.running_means {
                writeln!(t, "{x0:e},{},{}", r.n, r.mean)?;
            }
        }
        let counts: Vec<f64> = paths.iter().map(|p| p.n_births as f64).collect();
        if let Ok(h) = heavy_tail_diagnostic(&counts) {
            diagnostics.push(serde_json::json!({ "x0": x0, "heavy_tail": h }));
        }
        println!("x0 = {x0:e}: m = {:.6} ± {:.2e} ({})", est.mean, est.stderr, verdict.as_str());
    }
    csv.flush()?;
    if let Some(mut t) = trace {
        t.flush()?;
    }
    write_json(&config.output_dir, "diagnostics.json", &diagnostics)
}

pub fn cmd_classify(config: &RunConfig) -> Result<()> {
    let report = classify_regime(&config.params);
    println!("{}", serde_json::to_string_pretty(&report)?);
    write_json(&config.output_dir, "classify.json", &report)
}

fn lin_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

pub fn cmd_phase_diagram(config: &RunConfig, a: &PhaseArgs) -> Result<()> {
    let grid = PhaseGrid {
        ratios: a.ratios.clone().unwrap_or_else(|| lin_space(1.1, 3.3, a.grid)),
        columns: a.columns.clone().unwrap_or_else(|| lin_space(0.1, 1.5, a.grid)),
    };
    let mut base = config.params;
    base.beta = base.alpha - 1.0;
    base.delta = base.alpha - 1.0;
    let caps = (config.caps != CapOverrides::default()).then(|| config.caps.resolve(&base));
    let opts = PhaseOptions { n: a.n, bisection_steps: a.bisection_steps, caps, ..PhaseOptions::default() };
    let diagram = phase_diagram_sweep_with(&grid, &base, config.master_seed, &opts)?;
    let mut w = create(&config.output_dir, "phase.csv")?;
    diagram.write_csv(&mut w)?;
    w.flush()?;
    write_json(&config.output_dir, "boundary.json", &diagram.boundary_json())?;
    for b in &diagram.boundary {
        match b.xi_hat {
            Some(x) => println!("column {:.3}: boundary {:.4}", b.column, x),
            None => println!("column {:.3}: no supercritical cell", b.column),
        }
    }
    Ok(())
}

pub fn cmd_koperator(config: &RunConfig, a: &KoperatorArgs) -> Result<()> {
    let p = &config.params;
    let xi0 = a.xi0.unwrap_or(p.x0);
    let op = KOperator::new(p)?;
    let ones = GridFunction::constant(op.grid(&[xi0]), 1.0)?;
    let mut w = create(&config.output_dir, "k_00.csv")?;
    ones.write_csv(&mut w)?;
    w.flush()?;
    let iterates = k_iterate_functions(p, a.k, &[xi0])?;
    let mut at_xi0 = vec![1.0];
    for (i, f) in iterates.iter().enumerate() {
        let mut w = create(&config.output_dir, &format!("k_{:02}.csv", i + 1))?;
        f.write_csv(&mut w)?;
        w.flush()?;
        let idx = f.nodes().partition_point(|&x| x < xi0);
        at_xi0.push(f.values()[idx.min(f.nodes().len() - 1)]);
    }
    write_json(&config.output_dir, "k_at_xi0.json", &serde_json::json!({ "xi0": xi0, "values": at_xi0 }))?;
    let sigma = survival_exponent(p, xi0)?;
    write_json(&config.output_dir, "survival.json", &serde_json::json!({ "xi0": xi0, "sigma": sigma }))?;
    if !a.no_series {
        let s = mean_offspring_series(p, xi0, a.tol)?;
        println!("m({xi0}) = {} (k = {}, diverged = {})", s.value, s.truncation_k, s.diverged);
        write_json(&config.output_dir, "series.json", &s)?;
    }
    Ok(())
}

pub fn cmd_population(config: &RunConfig, a: &PopulationArgs) -> Result<()> {
    let p = &config.params;
    let natural = config.caps.resolve(p);
    let caps = PopulationCaps {
        max_individuals: a.max_individuals,
        max_time: natural.max_time,
        max_generation: a.max_generation,
        max_events: natural.max_events,
    };
    let founders = vec![a.founder_energy.unwrap_or(p.x0); a.founders];
    let mut generations = Vec::with_capacity(a.runs);
    for r in 0..a.runs {
        let seed = if a.runs == 1 { config.master_seed } else { child_seed(config.master_seed, r as u64) };
        let run = simulate_population(&founders, p, seed, &caps)?;
        let name = if a.runs == 1 { "lineage.csv".to_string() } else { format!("lineage_{r:04}.csv") };
        let mut w = create(&config.output_dir, &name)?;
        run.write_lineage_csv(&mut w)?;
        w.flush()?;
        println!(
            "run {r}: {} individuals, extinct = {}, censored = {}",
            run.individuals.len(),
            run.extinct,
            run.censored
        );
        generations.push(run.generation_sizes);
    }
    if a.runs == 1 {
        write_json(&config.output_dir, "generations.json", &generations[0].counts)?;
    } else {
        let all: Vec<&Vec<u64>> = generations.iter().map(|g| &g.counts).collect();
        write_json(&config.output_dir, "generations.json", &all)?;
    }
    write_json(&config.output_dir, "generations_detail.json", &generations)?;
    if let Some(g) = a.survival_generation {
        let mut survived = 0usize;
        let mut unknown = 0usize;
        for r in 0..a.runs {
            match survives_to_generation(&founders, p, g, child_seed(config.master_seed ^ 0x5A5A, r as u64), &caps)? {
                Some(true) => survived += 1,
                Some(false) => {}
                None => unknown += 1,
            }
        }
        println!("survival to generation {g}: {survived}/{} ({unknown} undecided)", a.runs);
        write_json(
            &config.output_dir,
            "survival.json",
            &serde_json::json!({ "generation": g, "runs": a.runs, "survived": survived, "undecided": unknown }),
        )?;
    }
    if a.embedding_reps > 0 {
        let report = embedding_test(p, a.embedding_runs, a.embedding_reps, config.master_seed, 0.01)?;
        println!("embedding: {}/{} repetitions with p > 0.01", report.n_pass, a.embedding_reps);
        write_json(&config.output_dir, "embedding.json", &report)?;
    }
    Ok(())
}

/// Parse `args`, run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match resolve(cli).and_then(|c| execute(&c)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
