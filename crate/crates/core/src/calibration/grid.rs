//! Exhaustive grid search over the calibrated parameters, with an
//! append-only checkpoint so interrupted searches can resume.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::dataset::{Indicator, Quarter};
use super::objective::round_score;
use super::scoring::{CellScore, PointScore, Scorer};
use crate::dynamics::{BehavioralParams, ProductionFunction};
use crate::economy::Economy;
use crate::error::{Error, Result};
use crate::integrator::IntegrationConfig;
use crate::shocks::Scenario;

pub const RETAIL_SECTORS: [&str; 2] = ["G46", "G47"];
pub const CONSUMER_FACING_SECTORS: [&str; 7] =
    ["I55-56", "N77", "N79", "R90-92", "R93", "S94", "S96"];
/// Section letters whose household demand shock is set by `eps_d_abc`.
pub const ABC_SECTIONS: [char; 3] = ['A', 'B', 'C'];

/// Calibrated parameters, declared in canonical axis order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    ProdFn,
    /// Household demand shock of agriculture, mining and manufacturing.
    EpsDAbc,
    EpsDRetail,
    /// Household and exogenous demand shock of the consumer-facing sectors.
    EpsDConsumerFacing,
    /// `f0`-weighted mean exogenous demand shock of the other sectors.
    EpsFAggregate,
    Tau,
    /// Firing time; hiring time follows as twice this value.
    GammaF,
    L2,
}

impl AxisName {
    pub fn name(self) -> &'static str {
        match self {
            AxisName::ProdFn => "prod_fn",
            AxisName::EpsDAbc => "eps_d_abc",
            AxisName::EpsDRetail => "eps_d_retail",
            AxisName::EpsDConsumerFacing => "eps_d_consumer_facing",
            AxisName::EpsFAggregate => "eps_f_aggregate",
            AxisName::Tau => "tau",
            AxisName::GammaF => "gamma_f",
            AxisName::L2 => "l2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisValue {
    ProdFn(ProductionFunction),
    Number(f64),
}

impl AxisValue {
    fn cmp_total(&self, other: &Self) -> Ordering {
        match (self, other) {
            (AxisValue::ProdFn(a), AxisValue::ProdFn(b)) => a.cmp(b),
            (AxisValue::Number(a), AxisValue::Number(b)) => a.total_cmp(b),
            (AxisValue::ProdFn(_), AxisValue::Number(_)) => Ordering::Less,
            (AxisValue::Number(_), AxisValue::ProdFn(_)) => Ordering::Greater,
        }
    }
}

impl std::fmt::Display for AxisValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AxisValue::ProdFn(p) => write!(f, "{p}"),
            AxisValue::Number(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: AxisName,
    pub values: Vec<AxisValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub axes: Vec<Axis>,
}

impl GridSpec {
    /// The full sensitivity grid: 1,555,200 points.
    pub fn full() -> Self {
        let nums = |v: &[f64]| v.iter().map(|&x| AxisValue::Number(x)).collect::<Vec<_>>();
        let shocks = nums(&[0.0, 0.1, 0.2, 0.3, 0.4, 0.5]);
        let days = nums(&[1.0, 7.0, 14.0, 21.0, 28.0, 35.0]);
        Self {
            axes: vec![
                Axis {
                    name: AxisName::ProdFn,
                    values: ProductionFunction::ALL
                        .iter()
                        .map(|&p| AxisValue::ProdFn(p))
                        .collect(),
                },
                Axis {
                    name: AxisName::EpsDAbc,
                    values: shocks.clone(),
                },
                Axis {
                    name: AxisName::EpsDRetail,
                    values: shocks,
                },
                Axis {
                    name: AxisName::EpsDConsumerFacing,
                    values: nums(&[0.75, 0.8, 0.85, 0.9, 0.95, 1.0]),
                },
                Axis {
                    name: AxisName::EpsFAggregate,
                    values: nums(&[0.0, 0.025, 0.05, 0.075, 0.1, 0.125, 0.15, 0.175]),
                },
                Axis {
                    name: AxisName::Tau,
                    values: days.clone(),
                },
                Axis {
                    name: AxisName::GammaF,
                    values: days,
                },
                Axis {
                    name: AxisName::L2,
                    values: nums(&[28.0, 35.0, 42.0, 49.0, 56.0]),
                },
            ],
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let spec: Self = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_owned(),
            source,
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|source| Error::Json {
            path: path.to_owned(),
            source,
        })?;
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() {
            return Err(Error::Grid("grid has no axes".into()));
        }
        let mut seen = Vec::new();
        for axis in &self.axes {
            let name = axis.name.name();
            if seen.contains(&axis.name) {
                return Err(Error::Grid(format!("axis {name} listed twice")));
            }
            seen.push(axis.name);
            if axis.values.is_empty() {
                return Err(Error::Grid(format!("axis {name} has no values")));
            }
            for (k, v) in axis.values.iter().enumerate() {
                let ok = match (axis.name, v) {
                    (AxisName::ProdFn, AxisValue::ProdFn(_)) => true,
                    (AxisName::ProdFn, AxisValue::Number(_)) => false,
                    (_, AxisValue::ProdFn(_)) => false,
                    (AxisName::Tau | AxisName::GammaF | AxisName::L2, AxisValue::Number(x)) => {
                        x.is_finite() && *x > 0.0
                    }
                    (_, AxisValue::Number(x)) => (0.0..=1.0).contains(x),
                };
                if !ok {
                    return Err(Error::Grid(format!("axis {name}: invalid value {v}")));
                }
                if axis.values[..k]
                    .iter()
                    .any(|w| w.cmp_total(v) == Ordering::Equal)
                {
                    return Err(Error::Grid(format!("axis {name}: value {v} listed twice")));
                }
            }
        }
        Ok(())
    }

    /// Axes sorted into canonical order; indices and hashes refer to this form.
    pub fn canonical(&self) -> Self {
        let mut axes = self.axes.clone();
        axes.sort_by_key(|a| a.name);
        Self { axes }
    }

    pub fn n_points(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    /// Point number `index` of the canonical grid, the last axis varying
    /// fastest.
    pub fn point(&self, index: usize) -> Result<GridPoint> {
        let canon = self.canonical();
        canon.point_canonical(index)
    }

    fn point_canonical(&self, mut index: usize) -> Result<GridPoint> {
        if index >= self.n_points() {
            return Err(Error::Grid(format!(
                "index {index} outside a grid of {} points",
                self.n_points()
            )));
        }
        let mut values = vec![(AxisName::ProdFn, AxisValue::Number(0.0)); self.axes.len()];
        for (k, axis) in self.axes.iter().enumerate().rev() {
            let n = axis.values.len();
            values[k] = (axis.name, axis.values[index % n]);
            index /= n;
        }
        Ok(GridPoint { values })
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(&self.canonical()).expect("grid serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

/// One grid point as (axis, value) pairs in canonical axis order.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub values: Vec<(AxisName, AxisValue)>,
}

impl GridPoint {
    pub fn get(&self, name: AxisName) -> Option<AxisValue> {
        self.values
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| *v)
    }

    /// Lexicographic order of the values, used to break score ties.
    pub fn cmp_values(&self, other: &Self) -> Ordering {
        for ((_, a), (_, b)) in self.values.iter().zip(&other.values) {
            match a.cmp_total(b) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        self.values.len().cmp(&other.values.len())
    }

    /// The scenario and parameters at this point, starting from the base
    /// ones; axes not in the grid keep their base values.
    pub fn apply(
        &self,
        economy: &Economy,
        scenario: &Scenario,
        params: &BehavioralParams,
    ) -> Result<(Scenario, BehavioralParams)> {
        let mut scenario = scenario.clone();
        let mut params = params.clone();
        let codes = economy.sectors().codes();
        let in_set = |set: &[&str]| -> Vec<usize> {
            codes
                .iter()
                .enumerate()
                .filter(|(_, c)| set.contains(&c.as_str()))
                .map(|(i, _)| i)
                .collect()
        };
        let consumer_facing = in_set(&CONSUMER_FACING_SECTORS);
        for &(name, value) in &self.values {
            let num = match value {
                AxisValue::Number(x) => x,
                AxisValue::ProdFn(p) => {
                    params.prod_fn = p;
                    continue;
                }
            };
            match name {
                AxisName::ProdFn => unreachable!("validated grid"),
                AxisName::EpsDAbc => {
                    for (i, c) in codes.iter().enumerate() {
                        if c.starts_with(ABC_SECTIONS) {
                            scenario.eps_d_lockdown[i] = num;
                        }
                    }
                }
                AxisName::EpsDRetail => {
                    for i in in_set(&RETAIL_SECTORS) {
                        scenario.eps_d_lockdown[i] = num;
                    }
                }
                AxisName::EpsDConsumerFacing => {
                    for &i in &consumer_facing {
                        scenario.eps_d_lockdown[i] = num;
                        scenario.eps_f_lockdown[i] = num;
                    }
                }
                AxisName::EpsFAggregate => {
                    scale_exogenous_shock(&mut scenario, economy, &consumer_facing, num);
                }
                AxisName::Tau => params.tau = num,
                AxisName::GammaF => {
                    params.gamma_f = num;
                    params.gamma_h = 2.0 * num;
                }
                AxisName::L2 => scenario.l2 = num,
            }
        }
        Ok((scenario, params))
    }
}

/// Rescales the exogenous demand shocks outside `excluded` so their
/// `f0`-weighted mean equals `target`. With no base shock to scale, every
/// such sector gets `target`.
fn scale_exogenous_shock(
    scenario: &mut Scenario,
    economy: &Economy,
    excluded: &[usize],
    target: f64,
) {
    let f0 = economy.f0();
    let idx: Vec<usize> = (0..economy.n_sectors())
        .filter(|i| !excluded.contains(i))
        .collect();
    let weight: f64 = idx.iter().map(|&i| f0[i]).sum();
    let current: f64 = idx
        .iter()
        .map(|&i| f0[i] * scenario.eps_f_lockdown[i])
        .sum::<f64>();
    for &i in &idx {
        let e = &mut scenario.eps_f_lockdown[i];
        *e = if current > 0.0 && weight > 0.0 {
            (*e * target * weight / current).clamp(0.0, 1.0)
        } else {
            target
        };
    }
}

impl std::fmt::Display for GridPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (k, (n, v)) in self.values.iter().enumerate() {
            if k > 0 {
                f.write_str(";")?;
            }
            write!(f, "{}={v}", n.name())?;
        }
        Ok(())
    }
}

/// Scores of one grid point, rounded to nine decimals.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPoint {
    pub index: usize,
    pub point: GridPoint,
    pub total: f64,
    pub cells: Vec<CellScore>,
}

impl ScoredPoint {
    fn from_score(index: usize, point: GridPoint, score: PointScore) -> Self {
        let cells = score
            .cells
            .into_iter()
            .map(|c| CellScore {
                aad: round_score(c.aad),
                ad: round_score(c.ad),
                ..c
            })
            .collect();
        Self {
            index,
            point,
            total: round_score(score.total),
            cells,
        }
    }

    /// Order by score, then by parameter tuple.
    pub fn rank_cmp(&self, other: &Self) -> Ordering {
        self.total
            .total_cmp(&other.total)
            .then_with(|| self.point.cmp_values(&other.point))
    }

    fn record(&self) -> String {
        let cells: Vec<String> = self
            .cells
            .iter()
            .map(|c| {
                format!(
                    "{}:{}:{:.9}:{:.9}:{}",
                    c.indicator, c.quarter, c.aad, c.ad, c.n_sectors
                )
            })
            .collect();
        format!(
            "{},{},{:.9},{}",
            self.index,
            self.point,
            self.total,
            cells.join("|")
        )
    }

    fn parse_record(line: &str, grid: &GridSpec) -> Option<Self> {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return None;
        }
        let index: usize = fields[0].parse().ok()?;
        let point = grid.point_canonical(index).ok()?;
        if point.to_string() != fields[1] {
            return None;
        }
        let total: f64 = fields[2].parse().ok()?;
        let mut cells = Vec::new();
        if !fields[3].is_empty() {
            for c in fields[3].split('|') {
                let p: Vec<&str> = c.split(':').collect();
                if p.len() != 5 {
                    return None;
                }
                cells.push(CellScore {
                    indicator: p[0].parse::<Indicator>().ok()?,
                    quarter: p[1].parse::<Quarter>().ok()?,
                    aad: p[2].parse().ok()?,
                    ad: p[3].parse().ok()?,
                    n_sectors: p[4].parse().ok()?,
                });
            }
        }
        Some(Self {
            index,
            point,
            total,
            cells,
        })
    }
}

/// Everything a grid point is scored against.
pub struct CalibrationContext<'a> {
    pub economy: &'a Economy,
    pub scenario: &'a Scenario,
    pub params: &'a BehavioralParams,
    pub config: &'a IntegrationConfig,
    pub scorer: &'a Scorer,
}

impl CalibrationContext<'_> {
    pub fn score_point(&self, index: usize, point: &GridPoint) -> Result<PointScore> {
        let wrap = |source: Error| Error::GridPoint {
            index,
            params: point.to_string(),
            source: Box::new(source),
        };
        let (scenario, params) = point
            .apply(self.economy, self.scenario, self.params)
            .map_err(wrap)?;
        self.scorer
            .score(self.economy, &scenario, &params, self.config)
            .map_err(wrap)
    }

    /// SHA-256 over the economy, base scenario, parameters, integration
    /// settings and dataset.
    pub fn fingerprint(&self) -> String {
        let parts = self.economy.to_parts();
        let doc = serde_json::json!({
            "codes": parts.codes,
            "z": parts.z.iter().collect::<Vec<_>>(),
            "x0": parts.x0.to_vec(),
            "c0": parts.c0.to_vec(),
            "f0": parts.f0.to_vec(),
            "l0": parts.l0.to_vec(),
            "n_days": parts.n_days_inventory.to_vec(),
            "criticality": parts.criticality.iter().collect::<Vec<_>>(),
            "on_site": parts.on_site,
            "scenario": self.scenario.to_file(self.economy),
            "params": self.params,
            "config": self.config,
            "dataset": self.scorer.fingerprint(),
        });
        hex::encode(Sha256::digest(doc.to_string().as_bytes()))
    }
}

#[derive(Debug, Clone, Default)]
pub struct GridSearchOptions {
    /// Worker threads; 0 uses all available cores.
    pub workers: usize,
    pub checkpoint: Option<PathBuf>,
    /// Continue from an existing checkpoint instead of starting over.
    pub resume: bool,
    /// Stop after scoring this many new points.
    pub max_points: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct GridResult {
    /// The grid in canonical axis order.
    pub grid: GridSpec,
    /// Scored points ordered by grid index.
    pub points: Vec<ScoredPoint>,
    /// Points scored in this call, as opposed to loaded from a checkpoint.
    pub newly_scored: usize,
}

impl GridResult {
    pub fn is_complete(&self) -> bool {
        self.points.len() == self.grid.n_points()
    }

    pub fn best(&self) -> Option<&ScoredPoint> {
        self.points.iter().min_by(|a, b| a.rank_cmp(b))
    }

    pub fn leaderboard(&self) -> Vec<&ScoredPoint> {
        let mut v: Vec<&ScoredPoint> = self.points.iter().collect();
        v.sort_by(|a, b| a.rank_cmp(b));
        v
    }

    /// `rank,grid_index,<axes>,aad_total`, best first.
    pub fn leaderboard_csv(&self) -> String {
        let mut out = String::from("rank,grid_index");
        for a in &self.grid.axes {
            out.push(',');
            out.push_str(a.name.name());
        }
        out.push_str(",aad_total\n");
        for (rank, p) in self.leaderboard().into_iter().enumerate() {
            out.push_str(&format!("{},{}", rank + 1, p.index));
            for (_, v) in &p.point.values {
                out.push_str(&format!(",{v}"));
            }
            out.push_str(&format!(",{:.9}\n", p.total));
        }
        out
    }
}

const CHECKPOINT_COLUMNS: &str = "grid_index,param_tuple,aad_total,per_cell_scores";

fn checkpoint_header(grid_hash: &str, context_hash: &str) -> String {
    format!("# grid_sha256={grid_hash}\n# context_sha256={context_hash}\n{CHECKPOINT_COLUMNS}\n")
}

/// Reads the records of an existing checkpoint. A malformed last line, left
/// by an interrupted write, is dropped.
fn load_checkpoint(
    path: &Path,
    grid: &GridSpec,
    grid_hash: &str,
    context_hash: &str,
) -> Result<Vec<ScoredPoint>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mismatch = |message: String| Error::CheckpointMismatch {
        path: path.to_owned(),
        message,
    };
    let mut lines = text.lines();
    let expect = |line: Option<&str>, key: &str, value: &str| -> Result<()> {
        let want = format!("# {key}={value}");
        match line {
            Some(l) if l == want => Ok(()),
            Some(l) if l.starts_with(&format!("# {key}=")) => {
                Err(mismatch(format!("{key} differs")))
            }
            _ => Err(mismatch(format!("missing {key} header"))),
        }
    };
    expect(lines.next(), "grid_sha256", grid_hash)?;
    expect(lines.next(), "context_sha256", context_hash)?;
    if lines.next() != Some(CHECKPOINT_COLUMNS) {
        return Err(mismatch("missing column header".into()));
    }
    let body: Vec<&str> = lines.collect();
    let mut points: BTreeMap<usize, ScoredPoint> = BTreeMap::new();
    for (k, line) in body.iter().enumerate() {
        match ScoredPoint::parse_record(line, grid) {
            Some(p) => {
                if points.insert(p.index, p).is_some() {
                    return Err(mismatch(format!("record {} repeats a grid index", k + 1)));
                }
            }
            None if k + 1 == body.len() => {
                log::warn!("{}: ignoring incomplete last record", path.display());
            }
            None => return Err(mismatch(format!("record {} is malformed", k + 1))),
        }
    }
    Ok(points.into_values().collect())
}

/// Scores every point of `grid` not already in the checkpoint.
pub fn grid_search(
    ctx: &CalibrationContext<'_>,
    grid: &GridSpec,
    opts: &GridSearchOptions,
) -> Result<GridResult> {
    grid.validate()?;
    let grid = grid.canonical();
    let n = grid.n_points();
    let grid_hash = grid.hash();
    let context_hash = ctx.fingerprint();

    let mut done: Vec<ScoredPoint> = Vec::new();
    if let Some(path) = &opts.checkpoint {
        if opts.resume && path.exists() {
            done = load_checkpoint(path, &grid, &grid_hash, &context_hash)?;
            log::info!("resuming with {} of {n} points already scored", done.len());
        }
        let mut text = checkpoint_header(&grid_hash, &context_hash);
        for p in &done {
            text.push_str(&p.record());
            text.push('\n');
        }
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    }

    let mut scored = vec![false; n];
    for p in &done {
        scored[p.index] = true;
    }
    let mut todo: Vec<usize> = (0..n).filter(|&i| !scored[i]).collect();
    if let Some(max) = opts.max_points {
        todo.truncate(max);
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| Error::Grid(format!("cannot start worker pool: {e}")))?;
    let chunk = pool.current_num_threads().max(1) * 8;
    let mut writer = match &opts.checkpoint {
        Some(path) => Some((
            path.clone(),
            OpenOptions::new()
                .append(true)
                .open(path)
                .map_err(|e| Error::io(path, e))?,
        )),
        None => None,
    };
    let mut newly_scored = 0;
    for batch in todo.chunks(chunk) {
        let results: Vec<Result<ScoredPoint>> = pool.install(|| {
            batch
                .par_iter()
                .map(|&i| {
                    let point = grid.point_canonical(i)?;
                    let score = ctx.score_point(i, &point)?;
                    Ok(ScoredPoint::from_score(i, point, score))
                })
                .collect()
        });
        let mut records = String::new();
        let mut failure = None;
        for r in results {
            match r {
                Ok(p) => {
                    records.push_str(&p.record());
                    records.push('\n');
                    done.push(p);
                    newly_scored += 1;
                }
                Err(e) => {
                    failure.get_or_insert(e);
                }
            }
        }
        if let Some((path, file)) = &mut writer {
            file.write_all(records.as_bytes())
                .and_then(|_| file.flush())
                .map_err(|e| Error::io(path.as_path(), e))?;
        }
        if let Some(e) = failure {
            return Err(e);
        }
        log::debug!("{} of {n} points scored", done.len());
    }
    done.sort_by_key(|p| p.index);
    Ok(GridResult {
        grid,
        points: done,
        newly_scored,
    })
}
