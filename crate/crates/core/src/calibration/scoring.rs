//! Mapping of simulated states onto indicator series and scoring of one
//! parameter set against a dataset.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use chrono::{Duration, NaiveDate};
use sha2::{Digest, Sha256};

use super::dataset::{EmpiricalDataset, Indicator, Observation, Quarter, NATIONAL};
use super::objective::{total_aad, weighted_deviation};
use crate::dynamics::{BehavioralParams, SimState};
use crate::economy::Economy;
use crate::error::{Error, Result};
use crate::integrator::{simulate_observed, IntegrationConfig};
use crate::shocks::Scenario;

/// Groups of model sector codes reported under a coarser code, e.g. the
/// NACE-21 section letters used by the B2B series.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SectorMapping {
    groups: BTreeMap<String, Vec<String>>,
}

impl SectorMapping {
    /// Groups codes by their leading letter.
    pub fn by_section<S: AsRef<str>>(codes: &[S]) -> Self {
        let mut groups: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for c in codes {
            let c = c.as_ref();
            if let Some(letter) = c.chars().next() {
                groups
                    .entry(letter.to_string())
                    .or_default()
                    .push(c.to_string());
            }
        }
        Self { groups }
    }

    /// Reads a two-column `nace64,nace21` file.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let data = fs::read(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(data.as_slice());
        let headers = reader
            .headers()
            .map_err(|source| Error::Csv {
                path: path.to_owned(),
                source,
            })?
            .clone();
        if headers.iter().ne(["nace64", "nace21"]) {
            return Err(Error::Schema {
                path: path.to_owned(),
                message: "expected header nace64,nace21".into(),
            });
        }
        let mut groups: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let mut seen = BTreeSet::new();
        for (k, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|source| Error::Csv {
                path: path.to_owned(),
                source,
            })?;
            if rec[0].is_empty() || rec[1].is_empty() {
                return Err(Error::Parse {
                    path: path.to_owned(),
                    row: k + 2,
                    column: if rec[0].is_empty() { 1 } else { 2 },
                    message: "empty code".into(),
                });
            }
            if !seen.insert(rec[0].to_string()) {
                return Err(Error::Parse {
                    path: path.to_owned(),
                    row: k + 2,
                    column: 1,
                    message: format!("code {} mapped twice", &rec[0]),
                });
            }
            groups
                .entry(rec[1].to_string())
                .or_default()
                .push(rec[0].to_string());
        }
        Ok(Self { groups })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut rows: Vec<(&str, &str)> = self
            .groups
            .iter()
            .flat_map(|(g, members)| members.iter().map(move |m| (m.as_str(), g.as_str())))
            .collect();
        rows.sort();
        let mut out = String::from("nace64,nace21\n");
        for (m, g) in rows {
            out.push_str(&format!("{m},{g}\n"));
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn groups(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.groups.iter().map(|(g, m)| (g.as_str(), m.as_slice()))
    }

    /// Model sector positions behind a dataset sector code: every sector for
    /// the national code, the sector itself for a model code, otherwise the
    /// members of a mapped group.
    pub fn resolve(&self, code: &str, economy: &Economy) -> Option<Vec<usize>> {
        if code == NATIONAL {
            return Some((0..economy.n_sectors()).collect());
        }
        if let Some(p) = economy.sectors().position(code) {
            return Some(vec![p]);
        }
        let members = self.groups.get(code)?;
        members
            .iter()
            .map(|m| economy.sectors().position(m))
            .collect()
    }
}

/// Model quantity compared with an indicator.
fn model_values(indicator: Indicator, state: &SimState) -> ndarray::Array1<f64> {
    match indicator {
        Indicator::B2b => state.b2b_out(),
        Indicator::Gdp | Indicator::Revenue => state.x.clone(),
        Indicator::Employment => state.l.clone(),
    }
}

/// Pre-pandemic value used both to normalise and to weight an indicator.
pub fn baseline(indicator: Indicator, economy: &Economy) -> ndarray::Array1<f64> {
    match indicator {
        Indicator::B2b => economy.intermediate_sales(),
        Indicator::Gdp | Indicator::Revenue => economy.x0().clone(),
        Indicator::Employment => economy.l0().clone(),
    }
}

/// Per-quarter means of daily model output, per sector and indicator kind.
#[derive(Debug, Clone)]
pub struct QuarterlyMeans {
    pub quarters: Vec<Quarter>,
    /// `means[indicator][quarter][sector]`, `None` if the run has no sample
    /// in that quarter.
    means: BTreeMap<Indicator, Vec<Option<Vec<f64>>>>,
}

impl QuarterlyMeans {
    /// Runs one simulation over the quarters and averages the daily samples.
    pub fn simulate(
        economy: &Economy,
        scenario: &Scenario,
        params: &BehavioralParams,
        config: &IntegrationConfig,
        quarters: &[Quarter],
    ) -> Result<Self> {
        let last = quarters
            .iter()
            .max()
            .ok_or_else(|| Error::Scoring("no quarters to score".into()))?;
        let t_end = scenario.day_of(last.last_day());
        if t_end <= 0.0 {
            return Err(Error::Scoring(format!(
                "scored quarters end before the scenario start {}",
                scenario.start_date
            )));
        }
        let config = IntegrationConfig {
            output_grid: Vec::new(),
            ..config.clone()
        };
        let n = economy.n_sectors();
        let kinds = [Indicator::B2b, Indicator::Gdp, Indicator::Employment];
        let mut sums: Vec<Vec<Vec<f64>>> = vec![vec![vec![0.0; n]; quarters.len()]; kinds.len()];
        let mut counts = vec![0usize; quarters.len()];
        let start = scenario.start_date;
        simulate_observed(economy, scenario, params, &config, t_end, |s| {
            let date = start + Duration::days(s.t.floor() as i64);
            if let Some(qi) = quarters.iter().position(|&q| q == Quarter::of(date)) {
                counts[qi] += 1;
                for (k, &ind) in kinds.iter().enumerate() {
                    for (acc, v) in sums[k][qi].iter_mut().zip(model_values(ind, s).iter()) {
                        *acc += v;
                    }
                }
            }
        })?;
        let mut means = BTreeMap::new();
        for (k, &ind) in kinds.iter().enumerate() {
            let per_q: Vec<Option<Vec<f64>>> = (0..quarters.len())
                .map(|qi| {
                    (counts[qi] > 0)
                        .then(|| sums[k][qi].iter().map(|v| v / counts[qi] as f64).collect())
                })
                .collect();
            means.insert(ind, per_q);
        }
        Ok(Self {
            quarters: quarters.to_vec(),
            means,
        })
    }

    fn kind(indicator: Indicator) -> Indicator {
        match indicator {
            Indicator::Revenue => Indicator::Gdp,
            other => other,
        }
    }

    /// Quarterly mean change, in percent, of the summed quantity over
    /// `members` relative to the summed baseline.
    pub fn change_pct(
        &self,
        indicator: Indicator,
        qi: usize,
        members: &[usize],
        base: &[f64],
    ) -> Option<f64> {
        let m = self.means[&Self::kind(indicator)][qi].as_ref()?;
        let b: f64 = members.iter().map(|&i| base[i]).sum();
        if b <= 0.0 {
            return None;
        }
        let v: f64 = members.iter().map(|&i| m[i]).sum();
        Some(100.0 * (v - b) / b)
    }
}

/// One dataset series aligned with the model.
#[derive(Debug, Clone)]
struct Series {
    indicator: Indicator,
    sector: String,
    members: Vec<usize>,
    weight: f64,
    /// Quarterly data mean, per scored quarter.
    data: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellScore {
    pub indicator: Indicator,
    pub quarter: Quarter,
    pub aad: f64,
    pub ad: f64,
    pub n_sectors: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorFit {
    pub indicator: Indicator,
    pub quarter: Quarter,
    pub sector: String,
    pub weight: f64,
    pub data_pct: f64,
    pub model_pct: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointScore {
    pub total: f64,
    pub cells: Vec<CellScore>,
}

/// A dataset prepared for repeated scoring against one economy.
#[derive(Debug, Clone)]
pub struct Scorer {
    quarters: Vec<Quarter>,
    baselines: BTreeMap<Indicator, Vec<f64>>,
    series: Vec<Series>,
    fingerprint: String,
}

impl Scorer {
    pub fn new(
        economy: &Economy,
        dataset: &EmpiricalDataset,
        mapping: &SectorMapping,
        quarters: &[Quarter],
    ) -> Result<Self> {
        if quarters.is_empty() {
            return Err(Error::Scoring("no quarters to score".into()));
        }
        let mut by_series: BTreeMap<(Indicator, &str), Vec<(NaiveDate, f64)>> = BTreeMap::new();
        for o in &dataset.observations {
            by_series
                .entry((o.indicator, o.sector.as_str()))
                .or_default()
                .push((o.date, o.value_pct));
        }
        let sectoral: BTreeSet<Indicator> = by_series
            .keys()
            .filter(|(_, s)| *s != NATIONAL)
            .map(|(i, _)| *i)
            .collect();
        let baselines: BTreeMap<Indicator, Vec<f64>> = Indicator::ALL
            .iter()
            .map(|&i| (i, baseline(i, economy).to_vec()))
            .collect();
        let mut series = Vec::new();
        for ((indicator, sector), obs) in by_series {
            if sector == NATIONAL && sectoral.contains(&indicator) {
                log::debug!("{indicator}: national rows ignored in favour of sectoral rows");
                continue;
            }
            let members = mapping.resolve(sector, economy).ok_or_else(|| {
                Error::Dataset(format!(
                    "{indicator}: sector code {sector:?} matches no model sector"
                ))
            })?;
            let base = &baselines[&indicator];
            let weight: f64 = members.iter().map(|&i| base[i]).sum();
            if weight <= 0.0 {
                log::warn!("{indicator} {sector}: zero baseline, series skipped");
                continue;
            }
            let data = super::objective::quarterly_average(&obs, quarters);
            for (q, d) in quarters.iter().zip(&data) {
                if d.is_none() {
                    log::debug!("{indicator} {sector}: no observations in {q}");
                }
            }
            series.push(Series {
                indicator,
                sector: sector.to_string(),
                members,
                weight,
                data,
            });
        }
        if series.is_empty() {
            return Err(Error::Dataset("dataset has no usable series".into()));
        }
        let mut digest = Sha256::new();
        for o in &dataset.observations {
            digest.update(format!(
                "{},{},{},{}\n",
                o.indicator, o.date, o.sector, o.value_pct
            ));
        }
        for (g, members) in mapping.groups() {
            digest.update(format!("{g}:{}\n", members.join(";")));
        }
        for q in quarters {
            digest.update(format!("{q}\n"));
        }
        Ok(Self {
            quarters: quarters.to_vec(),
            baselines,
            series,
            fingerprint: hex::encode(digest.finalize()),
        })
    }

    /// SHA-256 over the dataset, the sector mapping and the scored quarters.
    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn quarters(&self) -> &[Quarter] {
        &self.quarters
    }

    pub fn score(
        &self,
        economy: &Economy,
        scenario: &Scenario,
        params: &BehavioralParams,
        config: &IntegrationConfig,
    ) -> Result<PointScore> {
        let means = QuarterlyMeans::simulate(economy, scenario, params, config, &self.quarters)?;
        self.score_means(&means).map(|(s, _)| s)
    }

    /// Scores and also returns the per-sector comparison behind each cell.
    pub fn score_detailed(
        &self,
        economy: &Economy,
        scenario: &Scenario,
        params: &BehavioralParams,
        config: &IntegrationConfig,
    ) -> Result<(PointScore, Vec<SectorFit>)> {
        let means = QuarterlyMeans::simulate(economy, scenario, params, config, &self.quarters)?;
        self.score_means(&means)
    }

    pub fn score_means(&self, means: &QuarterlyMeans) -> Result<(PointScore, Vec<SectorFit>)> {
        let mut cells = Vec::new();
        let mut fits = Vec::new();
        for indicator in Indicator::ALL {
            for (qi, &quarter) in self.quarters.iter().enumerate() {
                let (mut model, mut data, mut weights) = (Vec::new(), Vec::new(), Vec::new());
                for s in self.series.iter().filter(|s| s.indicator == indicator) {
                    let Some(d) = s.data[qi] else { continue };
                    let Some(m) =
                        means.change_pct(indicator, qi, &s.members, &self.baselines[&indicator])
                    else {
                        log::debug!("{indicator} {}: no model samples in {quarter}", s.sector);
                        continue;
                    };
                    model.push(m);
                    data.push(d);
                    weights.push(s.weight);
                    fits.push(SectorFit {
                        indicator,
                        quarter,
                        sector: s.sector.clone(),
                        weight: s.weight,
                        data_pct: d,
                        model_pct: m,
                    });
                }
                if model.is_empty() {
                    continue;
                }
                let dev = weighted_deviation(&model, &data, &weights)?;
                cells.push(CellScore {
                    indicator,
                    quarter,
                    aad: dev.aad,
                    ad: dev.ad,
                    n_sectors: model.len(),
                });
            }
        }
        let total = total_aad(&cells.iter().map(|c| c.aad).collect::<Vec<_>>())?;
        Ok((PointScore { total, cells }, fits))
    }
}

/// Builds a dataset from the model itself: one observation per series and
/// quarter, dated mid-quarter, equal to the model's quarterly mean. Sectoral
/// series cover every model sector for GDP, revenue and employment and every
/// mapped group for B2B.
pub fn synthesize_dataset(
    economy: &Economy,
    scenario: &Scenario,
    params: &BehavioralParams,
    config: &IntegrationConfig,
    mapping: &SectorMapping,
    quarters: &[Quarter],
) -> Result<EmpiricalDataset> {
    let means = QuarterlyMeans::simulate(economy, scenario, params, config, quarters)?;
    let mut observations = Vec::new();
    for indicator in Indicator::ALL {
        let base = baseline(indicator, economy).to_vec();
        let series: Vec<(String, Vec<usize>)> = match indicator {
            Indicator::B2b => mapping
                .groups()
                .filter_map(|(g, _)| mapping.resolve(g, economy).map(|m| (g.to_string(), m)))
                .collect(),
            _ => economy
                .sectors()
                .codes()
                .iter()
                .enumerate()
                .map(|(i, c)| (c.clone(), vec![i]))
                .collect(),
        };
        for (sector, members) in series {
            for (qi, q) in quarters.iter().enumerate() {
                if let Some(v) = means.change_pct(indicator, qi, &members, &base) {
                    observations.push(Observation {
                        indicator,
                        date: q.mid_day(),
                        sector: sector.clone(),
                        value_pct: v,
                    });
                }
            }
        }
    }
    EmpiricalDataset::new(observations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::dataset::reference_quarters;
    use crate::fixtures::{d2_parts, d2_scenario};

    fn d2() -> (Economy, Scenario) {
        let e = Economy::new(d2_parts()).unwrap();
        let s = Scenario::resolve(&d2_scenario(), &e).unwrap();
        (e, s)
    }

    #[test]
    fn mapping_groups_by_letter() {
        let m = SectorMapping::by_section(&["A01", "A02", "C10-12", "C13-15"]);
        let groups: Vec<(&str, usize)> = m.groups().map(|(g, v)| (g, v.len())).collect();
        assert_eq!(groups, vec![("A", 2), ("C", 2)]);
    }

    #[test]
    fn mapping_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("map.csv");
        let m = SectorMapping::by_section(&["A01", "A02", "C10-12"]);
        m.write_csv(&p).unwrap();
        assert_eq!(SectorMapping::read_csv(&p).unwrap(), m);
        fs::write(&p, "nace64,nace21\nA01,A\nA01,B\n").unwrap();
        assert!(SectorMapping::read_csv(&p).is_err());
    }

    #[test]
    fn self_generated_data_scores_zero() {
        let (e, s) = d2();
        let p = BehavioralParams::default();
        let cfg = IntegrationConfig::default();
        let qs = reference_quarters();
        let mapping = SectorMapping::by_section(e.sectors().codes());
        let ds = synthesize_dataset(&e, &s, &p, &cfg, &mapping, &qs).unwrap();
        let scorer = Scorer::new(&e, &ds, &mapping, &qs).unwrap();
        let score = scorer.score(&e, &s, &p, &cfg).unwrap();
        assert_eq!(score.total, 0.0);
        assert_eq!(score.cells.len(), 16);
        let other = BehavioralParams { tau: 1.0, ..p };
        assert!(scorer.score(&e, &s, &other, &cfg).unwrap().total > 0.0);
    }

    #[test]
    fn national_rows_yield_to_sectoral_rows() {
        let (e, _) = d2();
        let mapping = SectorMapping::by_section(e.sectors().codes());
        let date: NaiveDate = "2020-05-01".parse().unwrap();
        let obs = |sector: &str| Observation {
            indicator: Indicator::Gdp,
            date,
            sector: sector.into(),
            value_pct: -5.0,
        };
        let ds = EmpiricalDataset::new(vec![obs("BE"), obs("S0")]).unwrap();
        let scorer = Scorer::new(&e, &ds, &mapping, &reference_quarters()).unwrap();
        assert_eq!(scorer.series.len(), 1);
        assert_eq!(scorer.series[0].sector, "S0");
        let ds = EmpiricalDataset::new(vec![obs("BE")]).unwrap();
        let scorer = Scorer::new(&e, &ds, &mapping, &reference_quarters()).unwrap();
        assert_eq!(scorer.series[0].members, vec![0, 1]);
        let ds = EmpiricalDataset::new(vec![obs("XX")]).unwrap();
        assert!(Scorer::new(&e, &ds, &mapping, &reference_quarters()).is_err());
    }

    #[test]
    fn missing_quarters_are_skipped() {
        let (e, s) = d2();
        let mapping = SectorMapping::by_section(e.sectors().codes());
        let ds = EmpiricalDataset::new(vec![Observation {
            indicator: Indicator::Employment,
            date: "2020-08-15".parse().unwrap(),
            sector: "S1".into(),
            value_pct: 0.0,
        }])
        .unwrap();
        let scorer = Scorer::new(&e, &ds, &mapping, &reference_quarters()).unwrap();
        let score = scorer
            .score(
                &e,
                &s,
                &BehavioralParams::default(),
                &IntegrationConfig::default(),
            )
            .unwrap();
        assert_eq!(score.cells.len(), 1);
        assert_eq!(score.cells[0].quarter, Quarter::new(2020, 3));
    }
}
