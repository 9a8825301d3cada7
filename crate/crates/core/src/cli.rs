//! Command-line front end. `main` parses arguments, runs one command and
//! returns the process exit code: 0 on success, 1 for usage or configuration
//! errors, 2 for numerical failures. Failures are also reported on stderr as a
//! single JSON line.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::analysis::{
    parse_grid, reproduce_table, sensitivity_sweep, summarize_run, summarize_sweep, write_sweep_csv,
    write_sweep_summary_csv, write_table_csv, SweepAxis,
};
use crate::error::{Error, Result};
use crate::experiment::{run_scenario, Estimator};
use crate::model::existence_for_model;
use crate::scenario::{Scenario, ScenarioConfig};

pub const OUTPUT_DIR_ENV: &str = "DMAE_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "dmae", version, about = "Double-model adaptive state, disturbance and fault estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a scenario and run one estimator; writes the run log (CSV, JSON) and a summary.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "dmae")]
        estimator: Estimator,
        #[arg(long, env = OUTPUT_DIR_ENV, default_value = "out")]
        output_dir: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fault-RMSE sensitivity to scaling the estimator's assumed Q or R.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        axis: SweepAxis,
        /// `lo..hi` in decades, or a comma-separated list.
        #[arg(long, default_value = "1e-3..1e3")]
        grid: String,
        /// `a..b` (half open) or a comma-separated list.
        #[arg(long, default_value = "0..10")]
        seeds: String,
        #[arg(long, env = OUTPUT_DIR_ENV, default_value = "out")]
        output_dir: PathBuf,
    },
    /// Report the decoupling existence and convergence condition verdicts.
    Check { config: PathBuf },
    /// Parse and validate a config, printing diagnostics.
    Validate { config: PathBuf },
    /// Mean RMSE of every estimator on each config, next to the reference figures.
    Table {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        #[arg(long, default_value = "0..10")]
        seeds: String,
        #[arg(long, env = OUTPUT_DIR_ENV, default_value = "out")]
        output_dir: PathBuf,
    },
}

/// Parses `a..b` (half open) or a comma-separated list of seeds.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let num = |s: &str| {
        s.trim()
            .parse::<u64>()
            .map_err(|_| Error::config("seeds", format!("`{s}` is not a seed")))
    };
    let seeds: Vec<u64> = match text.split_once("..") {
        Some((a, b)) => (num(a)?..num(b)?).collect(),
        None => text.split(',').map(num).collect::<Result<_>>()?,
    };
    if seeds.is_empty() {
        return Err(Error::config("seeds", "no seeds given"));
    }
    Ok(seeds)
}

#[derive(Serialize)]
struct ErrorLine<'a> {
    error: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<&'a str>,
    message: String,
}

/// Exit code for an error: 2 for numerical failures, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        2
    } else {
        1
    }
}

/// Single-line JSON description of an error.
pub fn error_line(err: &Error) -> String {
    let (kind, field) = match err {
        Error::Config { field, .. } => ("config", Some(field.as_str())),
        Error::Dimension { .. } => ("dimension", None),
        Error::Singular { .. } => ("singular", None),
        Error::NotPositiveDefinite { .. } => ("not_positive_definite", None),
        Error::Numerical(_) => ("numerical", None),
        Error::Io(_) => ("io", None),
        Error::Serialization(_) => ("serialization", None),
    };
    let line = ErrorLine { error: kind, field, message: err.to_string() };
    serde_json::to_string(&line).expect("error line is serializable")
}

pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    match execute(&cli.command, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", error_line(&e));
            exit_code(&e)
        }
    }
}

fn load(path: &Path) -> Result<(ScenarioConfig, Scenario)> {
    let cfg = ScenarioConfig::load(path)?;
    let scn = Scenario::from_config(&cfg)?;
    Ok((cfg, scn))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Runs one command, writing human-readable progress to `out`.
pub fn execute<W: Write>(cmd: &Command, out: &mut W) -> Result<()> {
    match cmd {
        Command::Run { config, estimator, output_dir, seed } => {
            let (cfg, scn) = load(config)?;
            let seed = cfg.resolve_seed(*seed);
            let log = run_scenario(&scn, *estimator, seed)?;
            let stem = format!("{}_{}_seed{}", cfg.name, estimator, seed);
            let (csv_path, json_path) = log.export(output_dir, &stem)?;
            let edges = scn.schedule().edges(scn.filter_model.n_f(), scn.horizon());
            let summary = summarize_run(&log, cfg.analysis.burn_in, &edges, cfg.analysis.edge_exclusion)?;
            let summary_path = output_dir.join(format!("{stem}_summary.json"));
            let mut w = create(&summary_path)?;
            serde_json::to_writer_pretty(&mut w, &summary).map_err(|e| Error::Serialization(e.to_string()))?;
            w.flush()?;
            writeln!(out, "scenario {} estimator {} seed {}", cfg.name, estimator, seed)?;
            writeln!(out, "rmse x {:?}", summary.rmse_x)?;
            writeln!(out, "rmse d {:?}", summary.rmse_d)?;
            writeln!(out, "rmse f {:?} (steady state {:?})", summary.rmse_f, summary.steady_state_rmse_f)?;
            if !summary.switches.is_empty() {
                let s: Vec<String> = summary.switches.iter().map(|(k, a, b)| format!("{k}:{a}->{b}")).collect();
                writeln!(out, "switches {}", s.join(" "))?;
            }
            for p in [csv_path, json_path, summary_path] {
                writeln!(out, "wrote {}", p.display())?;
            }
        }
        Command::Sweep { config, axis, grid, seeds, output_dir } => {
            let cfg = ScenarioConfig::load(config)?;
            let grid = parse_grid(grid)?;
            let seeds = parse_seeds(seeds)?;
            let cells = sensitivity_sweep(&cfg, *axis, &grid, &seeds)?;
            std::fs::create_dir_all(output_dir)?;
            let cells_path = output_dir.join(format!("sweep_{}_{axis}.csv", cfg.name));
            let summary_path = output_dir.join(format!("sweep_{}_{axis}_summary.csv", cfg.name));
            let mut w = create(&cells_path)?;
            write_sweep_csv(&mut w, &cells, *axis, &cfg)?;
            w.flush()?;
            let mut w = create(&summary_path)?;
            write_sweep_summary_csv(&mut w, &cells, *axis, &cfg)?;
            w.flush()?;
            writeln!(out, "k_{axis}  mean fault rmse  failures")?;
            for row in summarize_sweep(&cells) {
                writeln!(out, "{:>8e}  {:.4}  {}", row.coefficient, row.mean, row.failures)?;
            }
            writeln!(out, "wrote {}", cells_path.display())?;
            writeln!(out, "wrote {}", summary_path.display())?;
        }
        Command::Check { config } => {
            let (cfg, scn) = load(config)?;
            let model = &scn.filter_model;
            writeln!(out, "scenario: {}", cfg.name)?;
            writeln!(out, "existence condition: {}", existence_for_model(model, 0))?;
            writeln!(out, "convergence condition: {}", model.convergence_at(0))?;
        }
        Command::Validate { config } => {
            let (cfg, scn) = load(config)?;
            let m = &scn.filter_model;
            let regime = m.regime_report(0);
            writeln!(out, "config {} is valid", config.display())?;
            writeln!(out, "name: {}", cfg.name)?;
            writeln!(out, "config_sha256: {}", cfg.digest())?;
            writeln!(out, "seed: {}", cfg.resolve_seed(None))?;
            writeln!(out, "horizon: {}", cfg.horizon)?;
            writeln!(out, "dimensions: n={} m={} n_d={} n_f={} p={}", m.n(), m.m(), m.n_d(), m.n_f(), m.p())?;
            writeln!(out, "time invariant: {}", m.is_time_invariant())?;
            writeln!(
                out,
                "regime: square={} rank H={} rank E={} rank F={}",
                regime.square, regime.rank_h, regime.rank_e, regime.rank_f
            )?;
            let episodes = scn.schedule().episodes(m.n_f(), scn.horizon());
            writeln!(out, "fault episodes: {episodes:?}")?;
            if scn.dmae.adapt_qd && !regime.full_rank(m.m()) {
                writeln!(out, "warning: disturbance adaptation needs square full-rank H and E")?;
            }
        }
        Command::Table { configs, seeds, output_dir } => {
            let seeds = parse_seeds(seeds)?;
            let cfgs: Vec<ScenarioConfig> = configs.iter().map(ScenarioConfig::load).collect::<Result<_>>()?;
            let rows = reproduce_table(&cfgs, &Estimator::ALL, &seeds)?;
            std::fs::create_dir_all(output_dir)?;
            let path = output_dir.join("rmse_table.csv");
            let mut w = create(&path)?;
            let seed_list: Vec<String> = seeds.iter().map(u64::to_string).collect();
            let digests: Vec<String> = cfgs.iter().map(|c| format!("{}={}", c.name, c.digest())).collect();
            writeln!(w, "# dmae-table v1 seeds={} config_sha256 {}", seed_list.join(";"), digests.join(" "))?;
            write_table_csv(&mut w, &rows)?;
            w.flush()?;
            for r in &rows {
                let reference = r.reference.map(|v| format!("{v:.4} ({})", r.reference_method.as_deref().unwrap_or(""))).unwrap_or_default();
                writeln!(out, "{:<16} {:<5} {:<3} {:.4}  {}", r.scenario, r.method, r.channel, r.rmse, reference)?;
            }
            writeln!(out, "wrote {}", path.display())?;
        }
    }
    Ok(())
}
