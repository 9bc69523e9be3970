//! Time integration of the model over a date range, either with fixed
//! discrete steps or with an adaptive Runge-Kutta scheme on the rate form of
//! the same dynamics.
//!
//! Both methods treat scenario key dates and the ends of release periods as
//! step boundaries, so no step straddles a change in the shock schedule.

mod rk45;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::dynamics::{BehavioralParams, Model, SimState};
use crate::economy::Economy;
use crate::error::{Error, Result};
use crate::shocks::Scenario;

/// Smallest step the adaptive method may take before giving up, in days.
pub const MIN_ADAPTIVE_STEP: f64 = 1e-6;

/// Two boundary times closer than this are treated as the same instant.
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Discrete,
    ContinuousAdaptive,
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "discrete" => Ok(Method::Discrete),
            "continuous" | "continuous_adaptive" => Ok(Method::ContinuousAdaptive),
            other => Err(format!("unknown integration method {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegrationConfig {
    pub method: Method,
    /// Step length of the discrete method, in days.
    pub dt: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Sample times in days since the epoch; empty means every whole day.
    pub output_grid: Vec<f64>,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self {
            method: Method::Discrete,
            dt: 1.0,
            rel_tol: 1e-6,
            abs_tol: 1e-6,
            output_grid: Vec::new(),
        }
    }
}

impl IntegrationConfig {
    pub fn discrete(dt: f64) -> Self {
        Self {
            dt,
            ..Self::default()
        }
    }

    pub fn continuous() -> Self {
        Self {
            method: Method::ContinuousAdaptive,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.method == Method::Discrete && !(self.dt > 0.0 && self.dt <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "discrete step {} must lie in (0, 1] day",
                self.dt
            )));
        }
        if self.method == Method::ContinuousAdaptive && !(self.rel_tol > 0.0 && self.abs_tol > 0.0)
        {
            return Err(Error::InvalidParams("tolerances must be positive".into()));
        }
        Ok(())
    }

    /// The sample times for a run ending at `t_end`.
    pub fn sample_times(&self, t_end: f64) -> Result<Vec<f64>> {
        if self.output_grid.is_empty() {
            let mut times: Vec<f64> = (0..=t_end.floor() as usize).map(|d| d as f64).collect();
            if t_end > t_end.floor() {
                times.push(t_end);
            }
            return Ok(times);
        }
        let mut times = self.output_grid.clone();
        if times.iter().any(|&t| !(t >= 0.0 && t <= t_end)) {
            return Err(Error::InvalidParams(format!(
                "output grid must lie within [0, {t_end}]"
            )));
        }
        times.sort_by(f64::total_cmp);
        times.dedup();
        Ok(times)
    }
}

/// States sampled at increasing times.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SimState>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Aggregate gross output at each sample time.
    pub fn total_output(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.x.sum()).collect()
    }
}

/// Runs the model to `t_end` and returns the sampled trajectory.
pub fn simulate(
    economy: &Economy,
    scenario: &Scenario,
    params: &BehavioralParams,
    config: &IntegrationConfig,
    t_end: f64,
) -> Result<Trajectory> {
    let mut traj = Trajectory::default();
    simulate_observed(economy, scenario, params, config, t_end, |s| {
        traj.times.push(s.t);
        traj.states.push(s.clone());
    })?;
    Ok(traj)
}

/// Runs the model to `t_end`, handing each sampled state to `observer`
/// instead of storing it.
pub fn simulate_observed<F>(
    economy: &Economy,
    scenario: &Scenario,
    params: &BehavioralParams,
    config: &IntegrationConfig,
    t_end: f64,
    observer: F,
) -> Result<()>
where
    F: FnMut(&SimState),
{
    let model = Model::new(economy, scenario, params.clone())?;
    run_model(&model, config, t_end, observer)
}

/// Like [`simulate_observed`] for an already constructed model.
pub fn run_model<F>(
    model: &Model<'_>,
    config: &IntegrationConfig,
    t_end: f64,
    observer: F,
) -> Result<()>
where
    F: FnMut(&SimState),
{
    config.validate()?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "end time {t_end} must be positive"
        )));
    }
    let samples = config.sample_times(t_end)?;
    match config.method {
        Method::Discrete => run_discrete(model, config.dt, t_end, &samples, observer),
        Method::ContinuousAdaptive => run_continuous(
            model,
            rk45::Tolerances {
                rel: config.rel_tol,
                abs: config.abs_tol,
            },
            t_end,
            &samples,
            observer,
        ),
    }
}

/// Sorted boundaries in `(0, t_end]`: sample times, `t_end` and the given
/// schedule times, with near-duplicates merged.
fn stops(schedule: &[f64], samples: &[f64], t_end: f64) -> Vec<f64> {
    let mut all: Vec<f64> = schedule
        .iter()
        .chain(samples)
        .copied()
        .filter(|&t| t > 0.0 && t < t_end)
        .collect();
    all.push(t_end);
    all.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(all.len());
    for t in all {
        match out.last() {
            Some(&last) if t - last <= TIME_EPS => {}
            _ => out.push(t),
        }
    }
    out
}

fn is_sample(samples: &[f64], t: f64) -> bool {
    samples.iter().any(|&s| (s - t).abs() <= TIME_EPS)
}

fn run_discrete<F>(
    model: &Model<'_>,
    dt: f64,
    t_end: f64,
    samples: &[f64],
    mut observer: F,
) -> Result<()>
where
    F: FnMut(&SimState),
{
    let mut state = model.initial_state();
    if is_sample(samples, 0.0) {
        observer(&state);
    }
    for stop in stops(&model.scenario().breakpoints(), samples, t_end) {
        while state.t < stop {
            let remaining = stop - state.t;
            let lands = remaining <= dt * (1.0 + TIME_EPS);
            let h = if lands { remaining.min(1.0) } else { dt };
            state = model.step(&state, h)?;
            if lands || (stop - state.t).abs() <= TIME_EPS {
                state.t = stop;
            }
        }
        if is_sample(samples, stop) {
            observer(&state);
        }
    }
    Ok(())
}

/// Flat layout of the dynamic state: stocks (row-major), labor, expected
/// demand, log desired consumption, permanent-income fraction.
struct Layout {
    n: usize,
}

impl Layout {
    fn len(&self) -> usize {
        self.n * self.n + 2 * self.n + 2
    }

    fn pack(
        &self,
        s: &Array2<f64>,
        l: &Array1<f64>,
        d: &Array1<f64>,
        log_c: f64,
        zeta: f64,
    ) -> Vec<f64> {
        let mut y = Vec::with_capacity(self.len());
        y.extend(s.iter());
        y.extend(l.iter());
        y.extend(d.iter());
        y.push(log_c);
        y.push(zeta);
        y
    }

    #[allow(clippy::type_complexity)]
    fn unpack(&self, y: &[f64]) -> (Array2<f64>, Array1<f64>, Array1<f64>, f64, f64) {
        let n = self.n;
        let nn = n * n;
        let s = Array2::from_shape_vec((n, n), y[..nn].to_vec()).expect("layout");
        let l = Array1::from(y[nn..nn + n].to_vec());
        let d = Array1::from(y[nn + n..nn + 2 * n].to_vec());
        (s, l, d, y[nn + 2 * n], y[nn + 2 * n + 1])
    }
}

fn run_continuous<F>(
    model: &Model<'_>,
    tol: rk45::Tolerances,
    t_end: f64,
    samples: &[f64],
    mut observer: F,
) -> Result<()>
where
    F: FnMut(&SimState),
{
    let n = model.economy().n_sectors();
    let layout = Layout { n };
    let init = model.initial_state();
    let mut y = layout.pack(
        &init.s,
        &init.l,
        &init.demand_expectation,
        init.c_agg_d.ln(),
        init.zeta,
    );
    if is_sample(samples, 0.0) {
        observer(&init);
    }
    let mut rhs = |t: f64, y: &[f64]| -> Result<Vec<f64>> {
        let (s, l, d, log_c, zeta) = layout.unpack(y);
        let (r, _) = model.rates(t, &s, &l, &d, log_c, zeta)?;
        Ok(layout.pack(&r.s, &r.l, &r.demand_expectation, r.log_c, r.zeta))
    };
    let project = |t: f64, y: &mut [f64]| -> Result<()> {
        let nn = n * n;
        for v in &mut y[..nn] {
            *v = v.max(0.0);
        }
        let l_max = model.labor_max(t)?;
        for (v, max) in y[nn..nn + n].iter_mut().zip(&l_max) {
            *v = v.clamp(0.0, *max);
        }
        Ok(())
    };

    let first_lockdown = model.first_lockdown();
    let mut t = 0.0;
    let mut h: f64 = 0.25;
    for stop in stops(&model.scenario().kinks(), samples, t_end) {
        while t < stop {
            let remaining = stop - t;
            let lands = h >= remaining * (1.0 - TIME_EPS);
            let h_try = if lands { remaining } else { h };
            let attempt = rk45::step(&mut rhs, t, &y, h_try, tol)?;
            if attempt.error <= 1.0 {
                y = attempt.y;
                t = if lands { stop } else { t + h_try };
                project(t, &mut y)?;
                h = h_try * rk45::step_factor(attempt.error);
                h = h.min(1.0);
            } else {
                h = h_try * rk45::step_factor(attempt.error);
                if h < MIN_ADAPTIVE_STEP {
                    return Err(Error::StepUnderflow { t, step: h });
                }
            }
        }
        if first_lockdown.is_some_and(|tl| (tl - stop).abs() <= TIME_EPS) {
            let last = layout.len() - 1;
            y[last] = model.zeta_l();
        }
        if is_sample(samples, stop) {
            let (s, l, d, log_c, zeta) = layout.unpack(&y);
            observer(&model.snapshot(stop, s, l, d, log_c, zeta)?);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::economy::tests::d2_parts;
    use chrono::NaiveDate;

    fn epoch() -> NaiveDate {
        NaiveDate::from_ymd_opt(2020, 3, 1).unwrap()
    }

    #[test]
    fn stops_merge_and_clip() {
        let s = stops(&[0.0, 5.0, 5.0 + 1e-12, 50.0], &[1.0, 2.0, 10.0], 10.0);
        assert_eq!(s, vec![1.0, 2.0, 5.0, 10.0]);
    }

    #[test]
    fn sample_grid_defaults_to_days() {
        let c = IntegrationConfig::default();
        assert_eq!(c.sample_times(3.5).unwrap(), vec![0.0, 1.0, 2.0, 3.0, 3.5]);
        let c = IntegrationConfig {
            output_grid: vec![2.0, 1.0, 2.0],
            ..Default::default()
        };
        assert_eq!(c.sample_times(3.0).unwrap(), vec![1.0, 2.0]);
        let c = IntegrationConfig {
            output_grid: vec![4.0],
            ..Default::default()
        };
        assert!(c.sample_times(3.0).is_err());
    }

    #[test]
    fn both_methods_keep_equilibrium() {
        let e = Economy::new(d2_parts()).unwrap();
        let sc = Scenario::no_shocks(&e, epoch());
        let p = BehavioralParams::default();
        for cfg in [
            IntegrationConfig::discrete(1.0),
            IntegrationConfig::discrete(0.5),
            IntegrationConfig::continuous(),
        ] {
            let tr = simulate(&e, &sc, &p, &cfg, 30.0).unwrap();
            assert_eq!(tr.len(), 31);
            for s in &tr.states {
                for (a, b) in s.x.iter().zip(e.x0()) {
                    assert!((a - b).abs() <= 1e-9 * b);
                }
            }
        }
    }

    #[test]
    fn discrete_samples_land_on_requested_times() {
        let e = Economy::new(d2_parts()).unwrap();
        let sc = Scenario::no_shocks(&e, epoch());
        let cfg = IntegrationConfig {
            dt: 0.3,
            output_grid: vec![0.0, 1.0, 2.5, 7.0],
            ..Default::default()
        };
        let tr = simulate(&e, &sc, &BehavioralParams::default(), &cfg, 7.0).unwrap();
        assert_eq!(tr.times, vec![0.0, 1.0, 2.5, 7.0]);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let e = Economy::new(d2_parts()).unwrap();
        let sc = Scenario::no_shocks(&e, epoch());
        let p = BehavioralParams::default();
        assert!(simulate(&e, &sc, &p, &IntegrationConfig::discrete(1.5), 3.0).is_err());
        assert!(simulate(&e, &sc, &p, &IntegrationConfig::default(), 0.0).is_err());
    }
}
