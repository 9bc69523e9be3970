//! Monte Carlo ensembles over uncertain parameters, summarised by pointwise
//! percentile bands of aggregate quantities.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{BehavioralParams, SimState};
use crate::economy::Economy;
use crate::error::{Error, Result};
use crate::integrator::{simulate_observed, IntegrationConfig};
use crate::shocks::Scenario;

/// Parameters that can be sampled.
pub const PARAMETERS: [&str; 10] = [
    "tau",
    "gamma_f",
    "l1",
    "l2",
    "delta_s",
    "r",
    "eps_s_multiplier",
    "b",
    "rho_quarters",
    "l_share",
];

/// Rejection attempts before a truncated normal is declared infeasible.
const MAX_REJECTIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case", deny_unknown_fields)]
pub enum Distribution {
    /// Normal with the given variance, optionally truncated to `[min, max]`.
    Normal {
        mean: f64,
        variance: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        min: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max: Option<f64>,
    },
    Uniform {
        low: f64,
        high: f64,
    },
    Fixed {
        value: f64,
    },
}

impl Distribution {
    fn validate(&self, parameter: &str) -> Result<()> {
        let err = |message: &str| Error::Distribution {
            parameter: parameter.to_string(),
            message: message.to_string(),
        };
        match *self {
            Distribution::Normal {
                mean,
                variance,
                min,
                max,
            } => {
                if !mean.is_finite() || !(variance.is_finite() && variance >= 0.0) {
                    return Err(err("mean must be finite and variance non-negative"));
                }
                let lo = min.unwrap_or(f64::NEG_INFINITY);
                let hi = max.unwrap_or(f64::INFINITY);
                if lo.is_nan() || hi.is_nan() || lo > hi {
                    return Err(err("empty truncation interval"));
                }
                if variance == 0.0 && !(lo..=hi).contains(&mean) {
                    return Err(err(
                        "degenerate normal lies outside its truncation interval",
                    ));
                }
            }
            Distribution::Uniform { low, high } => {
                if !(low.is_finite() && high.is_finite() && low <= high) {
                    return Err(err("uniform bounds must be finite with low <= high"));
                }
            }
            Distribution::Fixed { value } => {
                if !value.is_finite() {
                    return Err(err("value must be finite"));
                }
            }
        }
        Ok(())
    }

    fn sample<R: Rng>(&self, rng: &mut R, parameter: &str) -> Result<f64> {
        match *self {
            Distribution::Normal {
                mean,
                variance,
                min,
                max,
            } => {
                if variance == 0.0 {
                    return Ok(mean);
                }
                let normal =
                    Normal::new(mean, variance.sqrt()).map_err(|e| Error::Distribution {
                        parameter: parameter.to_string(),
                        message: e.to_string(),
                    })?;
                let lo = min.unwrap_or(f64::NEG_INFINITY);
                let hi = max.unwrap_or(f64::INFINITY);
                for _ in 0..MAX_REJECTIONS {
                    let v = normal.sample(rng);
                    if (lo..=hi).contains(&v) {
                        return Ok(v);
                    }
                }
                Err(Error::Distribution {
                    parameter: parameter.to_string(),
                    message: "truncation interval has negligible probability".into(),
                })
            }
            Distribution::Uniform { low, high } => Ok(if low == high {
                low
            } else {
                rng.random_range(low..high)
            }),
            Distribution::Fixed { value } => Ok(value),
        }
    }
}

/// Sampled parameters by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DistributionSet(pub BTreeMap<String, Distribution>);

impl Default for DistributionSet {
    /// Restocking, firing, ramp-in and release times, savings change and
    /// between-lockdown shock ratio, with day-valued normals truncated at one
    /// day.
    fn default() -> Self {
        let normal = |mean, variance| Distribution::Normal {
            mean,
            variance,
            min: Some(1.0),
            max: None,
        };
        let uniform = |low, high| Distribution::Uniform { low, high };
        Self(BTreeMap::from([
            ("tau".to_string(), normal(14.0, 2.0)),
            ("gamma_f".to_string(), normal(28.0, 2.0)),
            ("l1".to_string(), normal(7.0, 2.0)),
            ("l2".to_string(), uniform(28.0, 56.0)),
            ("delta_s".to_string(), uniform(0.5, 1.0)),
            ("r".to_string(), uniform(0.0, 1.0)),
        ]))
    }
}

impl DistributionSet {
    pub fn validate(&self) -> Result<()> {
        for (name, d) in &self.0 {
            if !PARAMETERS.contains(&name.as_str()) {
                return Err(Error::Distribution {
                    parameter: name.clone(),
                    message: format!(
                        "unknown parameter; expected one of {}",
                        PARAMETERS.join(", ")
                    ),
                });
            }
            d.validate(name)?;
        }
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let set: Self = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_owned(),
            source,
        })?;
        set.validate()?;
        Ok(set)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|source| Error::Json {
            path: path.to_owned(),
            source,
        })?;
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    /// Draws `n` parameter sets from one seeded stream, run by run and
    /// parameter by parameter in name order.
    pub fn draw(&self, n: usize, seed: u64) -> Result<Vec<Sample>> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                self.0
                    .iter()
                    .map(|(k, d)| Ok((k.clone(), d.sample(&mut rng, k)?)))
                    .collect::<Result<BTreeMap<_, _>>>()
                    .map(Sample)
            })
            .collect()
    }
}

/// One draw of the sampled parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Sample(pub BTreeMap<String, f64>);

impl Sample {
    /// Scenario and parameters with the sampled values substituted.
    pub fn apply(
        &self,
        scenario: &Scenario,
        params: &BehavioralParams,
    ) -> Result<(Scenario, BehavioralParams)> {
        let mut s = scenario.clone();
        let mut p = params.clone();
        for (name, &v) in &self.0 {
            match name.as_str() {
                "tau" => p.tau = v,
                "gamma_f" => {
                    p.gamma_f = v;
                    p.gamma_h = 2.0 * v;
                }
                "l1" => s.l1 = v,
                "l2" => s.l2 = v,
                "delta_s" => p.delta_s = v,
                "r" => s.r = v,
                "b" => s.b = v,
                "l_share" => p.l_share = v,
                // adjustment time in quarters, converted to a daily factor
                "rho_quarters" => p.rho = 1.0 - (1.0 - v) / 90.0,
                "eps_s_multiplier" => {
                    s.eps_s_l1.mapv_inplace(|e| (e * v).clamp(0.0, 1.0));
                    s.eps_s_l2.mapv_inplace(|e| (e * v).clamp(0.0, 1.0));
                }
                other => {
                    return Err(Error::Distribution {
                        parameter: other.to_string(),
                        message: "unknown parameter".into(),
                    })
                }
            }
        }
        Ok((s, p))
    }
}

impl std::fmt::Display for Sample {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (k, (name, v)) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(";")?;
            }
            write!(f, "{name}={v}")?;
        }
        Ok(())
    }
}

/// Economy-wide totals that can be summarised over an ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Output,
    Demand,
    Labor,
    Consumption,
    ExogenousDemand,
    B2b,
}

impl Observable {
    pub const ALL: [Observable; 6] = [
        Observable::Output,
        Observable::Demand,
        Observable::Labor,
        Observable::Consumption,
        Observable::ExogenousDemand,
        Observable::B2b,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Observable::Output => "x",
            Observable::Demand => "d",
            Observable::Labor => "l",
            Observable::Consumption => "c",
            Observable::ExogenousDemand => "f",
            Observable::B2b => "b2b",
        }
    }

    pub fn of(self, s: &SimState) -> f64 {
        match self {
            Observable::Output => s.x.sum(),
            Observable::Demand => s.d.sum(),
            Observable::Labor => s.l.sum(),
            Observable::Consumption => s.c.sum(),
            Observable::ExogenousDemand => s.f.sum(),
            Observable::B2b => s.o.sum(),
        }
    }
}

impl std::str::FromStr for Observable {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| format!("unknown observable {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub lower: f64,
    pub median: f64,
    pub upper: f64,
}

impl Band {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Percentile `p` (0 to 100) of sorted values, interpolating linearly
/// between order statistics.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of an empty sample");
    let pos = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub times: Vec<f64>,
    pub samples: Vec<Sample>,
    /// `series[observable][run][time]`
    pub series: BTreeMap<Observable, Vec<Vec<f64>>>,
}

impl Ensemble {
    pub fn n_runs(&self) -> usize {
        self.samples.len()
    }

    /// 2.5, 50 and 97.5 percentiles of an observable at every sample time.
    pub fn bands(&self, observable: Observable) -> Vec<Band> {
        let runs = &self.series[&observable];
        (0..self.times.len())
            .map(|k| {
                let mut v: Vec<f64> = runs.iter().map(|r| r[k]).collect();
                v.sort_by(f64::total_cmp);
                Band {
                    lower: percentile(&v, 2.5),
                    median: percentile(&v, 50.0),
                    upper: percentile(&v, 97.5),
                }
            })
            .collect()
    }

    /// `t,observable,p2_5,p50,p97_5` rows.
    pub fn bands_csv(&self) -> String {
        let mut out = String::from("t,observable,p2_5,p50,p97_5\n");
        for obs in Observable::ALL {
            for (t, b) in self.times.iter().zip(self.bands(obs)) {
                out.push_str(&format!(
                    "{t},{},{},{},{}\n",
                    obs.name(),
                    b.lower,
                    b.median,
                    b.upper
                ));
            }
        }
        out
    }
}

pub struct MonteCarloSetup<'a> {
    pub economy: &'a Economy,
    pub scenario: &'a Scenario,
    pub params: &'a BehavioralParams,
    pub config: &'a IntegrationConfig,
    pub t_end: f64,
}

/// Runs `n_runs` simulations with parameters drawn from `distributions`.
/// Draws happen up front from `seed`, so the ensemble does not depend on the
/// number of workers (0 = all cores).
pub fn monte_carlo(
    setup: &MonteCarloSetup<'_>,
    distributions: &DistributionSet,
    n_runs: usize,
    seed: u64,
    workers: usize,
) -> Result<Ensemble> {
    if n_runs == 0 {
        return Err(Error::InvalidParams(
            "at least one Monte Carlo run is required".into(),
        ));
    }
    let samples = distributions.draw(n_runs, seed)?;
    let times = setup.config.sample_times(setup.t_end)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParams(format!("cannot start worker pool: {e}")))?;
    let runs: Vec<Result<Vec<[f64; 6]>>> = pool.install(|| {
        samples
            .par_iter()
            .enumerate()
            .map(|(run, sample)| {
                let wrap = |source: Error| Error::MonteCarloRun {
                    run,
                    sample: sample.to_string(),
                    source: Box::new(source),
                };
                let (scenario, params) =
                    sample.apply(setup.scenario, setup.params).map_err(wrap)?;
                let mut rows = Vec::with_capacity(times.len());
                simulate_observed(
                    setup.economy,
                    &scenario,
                    &params,
                    setup.config,
                    setup.t_end,
                    |s| {
                        rows.push(Observable::ALL.map(|o| o.of(s)));
                    },
                )
                .map_err(wrap)?;
                Ok(rows)
            })
            .collect()
    });
    let mut series: BTreeMap<Observable, Vec<Vec<f64>>> = Observable::ALL
        .iter()
        .map(|&o| (o, Vec::with_capacity(n_runs)))
        .collect();
    for run in runs {
        let rows = run?;
        for (k, o) in Observable::ALL.iter().enumerate() {
            series
                .get_mut(o)
                .expect("all observables")
                .push(rows.iter().map(|r| r[k]).collect());
        }
    }
    Ok(Ensemble {
        times,
        samples,
        series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{d3_parts, d3_scenario};

    #[test]
    fn percentiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(percentile(&v, 0.0), 1.0);
        assert_eq!(percentile(&v, 50.0), 3.0);
        assert_eq!(percentile(&v, 100.0), 5.0);
        assert!((percentile(&v, 2.5) - 1.1).abs() < 1e-12);
        assert_eq!(percentile(&[7.0], 97.5), 7.0);
    }

    #[test]
    fn default_set_parses_from_json() {
        let text = serde_json::to_string(&DistributionSet::default()).unwrap();
        assert!(text.contains("\"dist\":\"normal\""));
        let back: DistributionSet = serde_json::from_str(&text).unwrap();
        assert_eq!(back, DistributionSet::default());
        assert!(
            serde_json::from_str::<DistributionSet>(r#"{"tau":{"dist":"beta","a":1}}"#).is_err()
        );
    }

    #[test]
    fn invalid_distributions_are_rejected() {
        let one = |d| DistributionSet(BTreeMap::from([("tau".to_string(), d)]));
        assert!(one(Distribution::Uniform {
            low: 2.0,
            high: 1.0
        })
        .validate()
        .is_err());
        assert!(one(Distribution::Normal {
            mean: 1.0,
            variance: -1.0,
            min: None,
            max: None
        })
        .validate()
        .is_err());
        assert!(one(Distribution::Normal {
            mean: 0.0,
            variance: 0.0,
            min: Some(1.0),
            max: None
        })
        .validate()
        .is_err());
        let unknown = DistributionSet(BTreeMap::from([(
            "kappa".to_string(),
            Distribution::Fixed { value: 1.0 },
        )]));
        assert!(unknown.validate().is_err());
        let far = one(Distribution::Normal {
            mean: 0.0,
            variance: 1.0,
            min: Some(50.0),
            max: None,
        });
        assert!(far.draw(1, 0).is_err());
    }

    #[test]
    fn draws_respect_truncation_and_are_reproducible() {
        let d = DistributionSet(BTreeMap::from([(
            "l1".to_string(),
            Distribution::Normal {
                mean: 1.0,
                variance: 4.0,
                min: Some(1.0),
                max: None,
            },
        )]));
        let a = d.draw(500, 3).unwrap();
        assert!(a.iter().all(|s| s.0["l1"] >= 1.0));
        assert_eq!(a, d.draw(500, 3).unwrap());
        assert_ne!(a, d.draw(500, 4).unwrap());
    }

    #[test]
    fn sample_application() {
        let e = Economy::new(d3_parts()).unwrap();
        let sc = Scenario::resolve(&d3_scenario(), &e).unwrap();
        let p = BehavioralParams::default();
        let s = Sample(BTreeMap::from([
            ("gamma_f".to_string(), 10.0),
            ("rho_quarters".to_string(), 0.1),
            ("eps_s_multiplier".to_string(), 1.25),
        ]));
        let (s2, p2) = s.apply(&sc, &p).unwrap();
        assert_eq!((p2.gamma_f, p2.gamma_h), (10.0, 20.0));
        assert!((p2.rho - (1.0 - 0.9 / 90.0)).abs() < 1e-15);
        assert!((s2.eps_s_l1[2] - 0.625).abs() < 1e-15);
    }

    #[test]
    fn degenerate_ensemble_has_zero_width() {
        let e = Economy::new(d3_parts()).unwrap();
        let sc = Scenario::resolve(&d3_scenario(), &e).unwrap();
        let p = BehavioralParams::default();
        let cfg = IntegrationConfig::default();
        let setup = MonteCarloSetup {
            economy: &e,
            scenario: &sc,
            params: &p,
            config: &cfg,
            t_end: 120.0,
        };
        let d = DistributionSet(BTreeMap::from([(
            "tau".to_string(),
            Distribution::Normal {
                mean: 14.0,
                variance: 0.0,
                min: Some(1.0),
                max: None,
            },
        )]));
        let ens = monte_carlo(&setup, &d, 5, 1, 2).unwrap();
        let single = crate::integrator::simulate(&e, &sc, &p, &cfg, 120.0).unwrap();
        for (b, x) in ens
            .bands(Observable::Output)
            .iter()
            .zip(single.total_output())
        {
            assert_eq!(b.width(), 0.0);
            assert_eq!(b.median, x);
        }
    }

    #[test]
    fn ensembles_do_not_depend_on_workers() {
        let e = Economy::new(d3_parts()).unwrap();
        let sc = Scenario::resolve(&d3_scenario(), &e).unwrap();
        let p = BehavioralParams::default();
        let cfg = IntegrationConfig::default();
        let setup = MonteCarloSetup {
            economy: &e,
            scenario: &sc,
            params: &p,
            config: &cfg,
            t_end: 150.0,
        };
        let d = DistributionSet::default();
        let a = monte_carlo(&setup, &d, 8, 42, 1).unwrap();
        let b = monte_carlo(&setup, &d, 8, 42, 4).unwrap();
        assert_eq!(a, b);
        assert!(a.bands(Observable::Output).iter().any(|b| b.width() > 0.0));
    }
}
