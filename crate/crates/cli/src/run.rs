//! Fully resolved run configurations and their execution. A manifest stores
//! one of these, which is all `rerun` needs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use shocknet_core::calibration::{
    grid_search, monte_carlo, reference_quarters, synthesize_dataset, CalibrationContext,
    DistributionSet, EmpiricalDataset, GridSearchOptions, GridSpec, MonteCarloSetup, Observable,
    Scorer, SectorMapping,
};
use shocknet_core::dynamics::BehavioralParams;
use shocknet_core::economy::{load_economy, Economy, EconomyPaths};
use shocknet_core::export::TrajectoryWriter;
use shocknet_core::fixtures;
use shocknet_core::integrator::{simulate_observed, IntegrationConfig};
use shocknet_core::shocks::{Scenario, ScenarioFile};

use crate::manifest::{hash_inputs, hash_outputs, Manifest};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInputs {
    pub io_table: PathBuf,
    pub initial_states: PathBuf,
    pub criticality: PathBuf,
    pub scenario: PathBuf,
    pub params: BehavioralParams,
    pub integration: IntegrationConfig,
    /// Last simulated day.
    pub end_date: NaiveDate,
}

impl ModelInputs {
    fn files(&self) -> Vec<PathBuf> {
        vec![
            self.io_table.clone(),
            self.initial_states.clone(),
            self.criticality.clone(),
            self.scenario.clone(),
        ]
    }

    fn load(&self) -> Result<(Economy, Scenario)> {
        let economy = load_economy(&EconomyPaths {
            io_table: self.io_table.clone(),
            initial_states: self.initial_states.clone(),
            criticality: self.criticality.clone(),
        })?;
        let scenario = Scenario::resolve(&ScenarioFile::read(&self.scenario)?, &economy)?;
        Ok((economy, scenario))
    }

    fn t_end(&self, scenario: &Scenario) -> Result<f64> {
        let t = scenario.day_of(self.end_date);
        if t <= 0.0 {
            return Err(crate::InputError(format!(
                "end date {} is not after the scenario start {}",
                self.end_date, scenario.start_date
            ))
            .into());
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunConfig {
    Simulate {
        model: ModelInputs,
    },
    GridSearch {
        model: ModelInputs,
        grid: PathBuf,
        dataset: PathBuf,
        /// Sector mapping file; grouping by section letter when absent.
        mapping: Option<PathBuf>,
        workers: usize,
    },
    Montecarlo {
        model: ModelInputs,
        /// Distribution file, if any; the resolved set is stored either way.
        distributions_file: Option<PathBuf>,
        distributions: DistributionSet,
        runs: usize,
        seed: u64,
        workers: usize,
    },
    GenerateFixtures {
        seed: u64,
    },
    SynthesizeData {
        model: ModelInputs,
        mapping: Option<PathBuf>,
    },
}

impl RunConfig {
    fn input_files(&self) -> Vec<PathBuf> {
        match self {
            RunConfig::Simulate { model } => model.files(),
            RunConfig::GridSearch {
                model,
                grid,
                dataset,
                mapping,
                ..
            } => {
                let mut v = model.files();
                v.push(grid.clone());
                v.push(dataset.clone());
                v.extend(mapping.clone());
                v
            }
            RunConfig::Montecarlo {
                model,
                distributions_file,
                ..
            } => {
                let mut v = model.files();
                v.extend(distributions_file.clone());
                v
            }
            RunConfig::GenerateFixtures { .. } => Vec::new(),
            RunConfig::SynthesizeData { model, mapping } => {
                let mut v = model.files();
                v.extend(mapping.clone());
                v
            }
        }
    }
}

/// Grid-search settings that do not affect results and are not recorded.
#[derive(Debug, Clone, Default)]
pub struct Resumption {
    pub checkpoint: Option<PathBuf>,
    pub resume: bool,
    pub max_points: Option<usize>,
}

/// Executes a run into `out`, writing its outputs and manifest.
pub fn execute(config: &RunConfig, out: &Path, resumption: &Resumption) -> Result<()> {
    let inputs = hash_inputs(&config.input_files())?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let started = chrono::Utc::now().to_rfc3339();
    match config {
        RunConfig::Simulate { model } => simulate(model, out)?,
        RunConfig::GridSearch {
            model,
            grid,
            dataset,
            mapping,
            workers,
        } => run_grid(
            model,
            grid,
            dataset,
            mapping.as_deref(),
            *workers,
            resumption,
            out,
        )?,
        RunConfig::Montecarlo {
            model,
            distributions,
            runs,
            seed,
            workers,
            ..
        } => run_monte_carlo(model, distributions, *runs, *seed, *workers, out)?,
        RunConfig::GenerateFixtures { seed } => {
            fixtures::write_all(out, *seed)?;
            SectorMapping::by_section(&fixtures::be_like_codes())
                .write_csv(&out.join("be_like").join("nace64_to_nace21.csv"))?;
        }
        RunConfig::SynthesizeData { model, mapping } => synthesize(model, mapping.as_deref(), out)?,
    }
    let manifest = Manifest {
        tool: "shocknet".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: config.clone(),
        inputs,
        outputs: hash_outputs(out)?,
        started,
        finished: chrono::Utc::now().to_rfc3339(),
    };
    manifest.write(out)
}

fn write(path: PathBuf, text: &str) -> Result<()> {
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

fn simulate(model: &ModelInputs, out: &Path) -> Result<()> {
    let (economy, scenario) = model.load()?;
    let t_end = model.t_end(&scenario)?;
    let mut writer = TrajectoryWriter::new(&economy, scenario.start_date);
    simulate_observed(
        &economy,
        &scenario,
        &model.params,
        &model.integration,
        t_end,
        |s| writer.push(s),
    )?;
    writer.write(out)?;
    Ok(())
}

fn load_mapping(path: Option<&Path>, economy: &Economy) -> Result<SectorMapping> {
    Ok(match path {
        Some(p) => SectorMapping::read_csv(p)?,
        None => SectorMapping::by_section(economy.sectors().codes()),
    })
}

fn synthesize(model: &ModelInputs, mapping: Option<&Path>, out: &Path) -> Result<()> {
    let (economy, scenario) = model.load()?;
    let mapping = load_mapping(mapping, &economy)?;
    let data = synthesize_dataset(
        &economy,
        &scenario,
        &model.params,
        &model.integration,
        &mapping,
        &reference_quarters(),
    )?;
    data.write_csv(&out.join("dataset.csv"))?;
    Ok(())
}

fn run_grid(
    model: &ModelInputs,
    grid: &Path,
    dataset: &Path,
    mapping: Option<&Path>,
    workers: usize,
    resumption: &Resumption,
    out: &Path,
) -> Result<()> {
    let (economy, scenario) = model.load()?;
    let spec = GridSpec::read(grid)?;
    let data = EmpiricalDataset::read_csv(dataset)?;
    let mapping = load_mapping(mapping, &economy)?;
    let scorer = Scorer::new(&economy, &data, &mapping, &reference_quarters())?;
    let ctx = CalibrationContext {
        economy: &economy,
        scenario: &scenario,
        params: &model.params,
        config: &model.integration,
        scorer: &scorer,
    };
    let opts = GridSearchOptions {
        workers,
        checkpoint: resumption.checkpoint.clone(),
        resume: resumption.resume,
        max_points: resumption.max_points,
    };
    let result = grid_search(&ctx, &spec, &opts)?;
    write(out.join("leaderboard.csv"), &result.leaderboard_csv())?;
    if !result.is_complete() {
        log::warn!(
            "stopped after {} of {} points; rerun with --resume to continue",
            result.points.len(),
            result.grid.n_points()
        );
        return Ok(());
    }
    let best = result.best().expect("complete grid is non-empty");
    let (s, p) = best.point.apply(&economy, &scenario, &model.params)?;
    let (_, fits) = scorer.score_detailed(&economy, &s, &p, &model.integration)?;
    let mut cells = String::from("indicator,quarter,aad,ad,n_sectors\n");
    for c in &best.cells {
        let _ = writeln!(
            cells,
            "{},{},{:.9},{:.9},{}",
            c.indicator, c.quarter, c.aad, c.ad, c.n_sectors
        );
    }
    write(out.join("optimum_cells.csv"), &cells)?;
    let mut sectors = String::from("indicator,quarter,sector,weight,data_pct,model_pct\n");
    for f in &fits {
        let _ = writeln!(
            sectors,
            "{},{},{},{},{},{}",
            f.indicator, f.quarter, f.sector, f.weight, f.data_pct, f.model_pct
        );
    }
    write(out.join("optimum_sectors.csv"), &sectors)?;
    println!("optimum: {} (AAD {:.9})", best.point, best.total);
    Ok(())
}

fn run_monte_carlo(
    model: &ModelInputs,
    distributions: &DistributionSet,
    runs: usize,
    seed: u64,
    workers: usize,
    out: &Path,
) -> Result<()> {
    let (economy, scenario) = model.load()?;
    let setup = MonteCarloSetup {
        economy: &economy,
        scenario: &scenario,
        params: &model.params,
        config: &model.integration,
        t_end: model.t_end(&scenario)?,
    };
    let ens = monte_carlo(&setup, distributions, runs, seed, workers)?;
    write(out.join("bands.csv"), &ens.bands_csv())?;

    let names: Vec<&String> = distributions.0.keys().collect();
    let mut samples = String::from("run");
    for n in &names {
        let _ = write!(samples, ",{n}");
    }
    samples.push('\n');
    for (k, s) in ens.samples.iter().enumerate() {
        let _ = write!(samples, "{k}");
        for n in &names {
            let _ = write!(samples, ",{}", s.0[*n]);
        }
        samples.push('\n');
    }
    write(out.join("samples.csv"), &samples)?;

    let mut ensemble = String::from("run,t");
    for o in Observable::ALL {
        let _ = write!(ensemble, ",{}", o.name());
    }
    ensemble.push('\n');
    for run in 0..ens.n_runs() {
        for (k, t) in ens.times.iter().enumerate() {
            let _ = write!(ensemble, "{run},{t}");
            for o in Observable::ALL {
                let _ = write!(ensemble, ",{}", ens.series[&o][run][k]);
            }
            ensemble.push('\n');
        }
    }
    write(out.join("ensemble.csv"), &ensemble)
}
