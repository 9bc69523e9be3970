//! `shocknet`: simulate shock propagation through a production network,
//! calibrate it by grid search and run Monte Carlo sensitivity ensembles.
//!
//! Exit status: 0 on success, 1 when inputs are invalid, 2 when a run fails.

mod manifest;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

use shocknet_core::calibration::DistributionSet;
use shocknet_core::dynamics::{BehavioralParams, ProductionFunction};
use shocknet_core::economy::{
    read_economy_parts, validate_parts, Economy, EconomyPaths, DEFAULT_IDENTITY_TOLERANCE,
};
use shocknet_core::export::compare_trajectories;
use shocknet_core::fixtures::DEFAULT_SEED;
use shocknet_core::integrator::{IntegrationConfig, Method};
use shocknet_core::shocks::{Scenario, ScenarioFile};

use manifest::Manifest;
use run::{execute, ModelInputs, Resumption, RunConfig};

/// Invalid user input detected by the command-line layer itself.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

#[derive(Parser)]
#[command(
    name = "shocknet",
    version,
    about = "Shock propagation in production networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check economy files (and optionally a scenario) for consistency.
    ValidateData {
        #[command(flatten)]
        economy: EconomyArgs,
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Relative tolerance of the accounting identity.
        #[arg(long, default_value_t = DEFAULT_IDENTITY_TOLERANCE)]
        tolerance: f64,
    },
    /// Simulate one scenario and write trajectories.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score every point of a parameter grid against a dataset.
    GridSearch {
        #[command(flatten)]
        model: ModelArgs,
        /// Grid specification (JSON).
        #[arg(long)]
        grid: PathBuf,
        /// Indicator data, `indicator,date,sector,value_pct`.
        #[arg(long)]
        dataset: PathBuf,
        /// `nace64,nace21` sector mapping; defaults to grouping by section letter.
        #[arg(long)]
        mapping: Option<PathBuf>,
        /// Worker threads (0 = all cores).
        #[arg(long, env = "SHOCKNET_WORKERS", default_value_t = 0)]
        workers: usize,
        /// Append-only checkpoint file.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Continue from the checkpoint instead of starting over.
        #[arg(long, requires = "checkpoint")]
        resume: bool,
        /// Stop after scoring this many new points.
        #[arg(long)]
        max_points: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a Monte Carlo ensemble and write percentile bands.
    Montecarlo {
        #[command(flatten)]
        model: ModelArgs,
        /// Parameter distributions (JSON); the default set when absent.
        #[arg(long)]
        distributions: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        runs: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, env = "SHOCKNET_WORKERS", default_value_t = 0)]
        workers: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the model's own quarterly indicator values as a dataset.
    SynthesizeData {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        mapping: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Report deviations between two trajectory files.
    Compare { a: PathBuf, b: PathBuf },
    /// Write the d2, d3 and be_like fixtures.
    GenerateFixtures {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Repeat the run recorded in a manifest.
    Rerun {
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct EconomyArgs {
    /// Directory holding io_table.csv, initial_states.csv and criticality.csv.
    #[arg(long)]
    economy_dir: Option<PathBuf>,
    #[arg(long)]
    io_table: Option<PathBuf>,
    #[arg(long)]
    initial_states: Option<PathBuf>,
    #[arg(long)]
    criticality: Option<PathBuf>,
}

impl EconomyArgs {
    fn paths(&self) -> Result<EconomyPaths> {
        let base = self.economy_dir.as_ref().map(EconomyPaths::in_dir);
        let pick = |explicit: &Option<PathBuf>, from_dir: Option<&PathBuf>, flag: &str| {
            explicit
                .clone()
                .or_else(|| from_dir.cloned())
                .ok_or_else(|| InputError(format!("--{flag} or --economy-dir is required")))
        };
        Ok(EconomyPaths {
            io_table: pick(
                &self.io_table,
                base.as_ref().map(|b| &b.io_table),
                "io-table",
            )?,
            initial_states: pick(
                &self.initial_states,
                base.as_ref().map(|b| &b.initial_states),
                "initial-states",
            )?,
            criticality: pick(
                &self.criticality,
                base.as_ref().map(|b| &b.criticality),
                "criticality",
            )?,
        })
    }
}

#[derive(Args)]
struct ModelArgs {
    #[command(flatten)]
    economy: EconomyArgs,
    #[arg(long)]
    scenario: PathBuf,
    /// Behavioral parameters (JSON); individual flags below override it.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    prod_fn: Option<ProductionFunction>,
    #[arg(long)]
    tau: Option<f64>,
    /// Firing time in days; also sets the hiring time to twice this unless --gamma-h is given.
    #[arg(long)]
    gamma_f: Option<f64>,
    #[arg(long)]
    gamma_h: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    delta_s: Option<f64>,
    #[arg(long)]
    l_share: Option<f64>,
    #[arg(long)]
    method: Option<Method>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long, default_value = "2021-03-31")]
    end_date: NaiveDate,
}

fn absolute(p: &Path) -> Result<PathBuf> {
    std::path::absolute(p).with_context(|| format!("resolving {}", p.display()))
}

impl ModelArgs {
    fn resolve(&self) -> Result<ModelInputs> {
        let mut params = match &self.params {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading {}", p.display()))?;
                serde_json::from_str::<BehavioralParams>(&text)
                    .map_err(|e| InputError(format!("{}: {e}", p.display())))?
            }
            None => BehavioralParams::default(),
        };
        if let Some(v) = self.prod_fn {
            params.prod_fn = v;
        }
        if let Some(v) = self.tau {
            params.tau = v;
        }
        if let Some(v) = self.gamma_f {
            params.gamma_f = v;
            params.gamma_h = 2.0 * v;
        }
        if let Some(v) = self.gamma_h {
            params.gamma_h = v;
        }
        if let Some(v) = self.rho {
            params.rho = v;
        }
        if let Some(v) = self.delta_s {
            params.delta_s = v;
        }
        if let Some(v) = self.l_share {
            params.l_share = v;
        }
        params.validate()?;
        let mut integration = IntegrationConfig::default();
        if let Some(m) = self.method {
            integration.method = m;
        }
        if let Some(v) = self.dt {
            integration.dt = v;
        }
        if let Some(v) = self.rel_tol {
            integration.rel_tol = v;
        }
        if let Some(v) = self.abs_tol {
            integration.abs_tol = v;
        }
        integration.validate()?;
        let paths = self.economy.paths()?;
        Ok(ModelInputs {
            io_table: absolute(&paths.io_table)?,
            initial_states: absolute(&paths.initial_states)?,
            criticality: absolute(&paths.criticality)?,
            scenario: absolute(&self.scenario)?,
            params,
            integration,
            end_date: self.end_date,
        })
    }
}

fn validate_data(economy: &EconomyArgs, scenario: Option<&Path>, tolerance: f64) -> Result<()> {
    let paths = economy.paths()?;
    let parts = read_economy_parts(&paths)?;
    let report = validate_parts(&parts, tolerance);
    for w in &report.warnings {
        println!("warning: {w}");
    }
    for v in &report.violations {
        println!("error: {v}");
    }
    if !report.is_clean() {
        return Err(InputError(format!("{} violation(s)", report.violations.len())).into());
    }
    let economy = Economy::with_tolerance(parts, tolerance)?;
    println!("economy: {} sectors, identity OK", economy.n_sectors());
    if let Some(p) = scenario {
        let sc = Scenario::resolve(&ScenarioFile::read(p)?, &economy)?;
        sc.validate()?;
        println!(
            "scenario: {} key dates from {}, ok",
            sc.key_dates.len(),
            sc.start_date
        );
    }
    Ok(())
}

fn compare(a: &Path, b: &Path) -> Result<()> {
    let c = compare_trajectories(a, b)?;
    println!("rows: {}", c.rows);
    println!("column,max_abs,mean_abs,max_rel");
    for (name, d) in &c.columns {
        println!("{name},{:e},{:e},{:e}", d.max_abs, d.mean_abs, d.max_rel);
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::ValidateData {
            economy,
            scenario,
            tolerance,
        } => validate_data(&economy, scenario.as_deref(), tolerance),
        Command::Simulate { model, out } => execute(
            &RunConfig::Simulate {
                model: model.resolve()?,
            },
            &out,
            &Resumption::default(),
        ),
        Command::GridSearch {
            model,
            grid,
            dataset,
            mapping,
            workers,
            checkpoint,
            resume,
            max_points,
            out,
        } => {
            let config = RunConfig::GridSearch {
                model: model.resolve()?,
                grid: absolute(&grid)?,
                dataset: absolute(&dataset)?,
                mapping: mapping.as_deref().map(absolute).transpose()?,
                workers,
            };
            let resumption = Resumption {
                checkpoint,
                resume,
                max_points,
            };
            execute(&config, &out, &resumption)
        }
        Command::Montecarlo {
            model,
            distributions,
            runs,
            seed,
            workers,
            out,
        } => {
            let set = match &distributions {
                Some(p) => DistributionSet::read(p)?,
                None => DistributionSet::default(),
            };
            let config = RunConfig::Montecarlo {
                model: model.resolve()?,
                distributions_file: distributions.as_deref().map(absolute).transpose()?,
                distributions: set,
                runs,
                seed,
                workers,
            };
            execute(&config, &out, &Resumption::default())
        }
        Command::SynthesizeData {
            model,
            mapping,
            out,
        } => {
            let config = RunConfig::SynthesizeData {
                model: model.resolve()?,
                mapping: mapping.as_deref().map(absolute).transpose()?,
            };
            execute(&config, &out, &Resumption::default())
        }
        Command::Compare { a, b } => compare(&a, &b),
        Command::GenerateFixtures { seed, out } => execute(
            &RunConfig::GenerateFixtures { seed },
            &out,
            &Resumption::default(),
        ),
        Command::Rerun { manifest, out } => {
            let m = Manifest::read(&manifest)?;
            m.check_inputs()?;
            execute(&m.config, &out, &Resumption::default())
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let invalid = err.chain().any(|e| {
        e.downcast_ref::<InputError>().is_some()
            || e.downcast_ref::<shocknet_core::Error>()
                .is_some_and(|e| e.is_validation())
    });
    if invalid {
        1
    } else {
        2
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // help and version requests are not errors
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
