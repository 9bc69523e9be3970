//! One time step of the production network: demand formation, constrained
//! supply, rationing, inventory update and labor adjustment.

mod demand;
mod inventory;
mod labor;
mod rationing;
mod supply;

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::economy::{derive_criticality_sets, initial_inventories, CriticalitySets, Economy};
use crate::error::{Error, Result};
use crate::shocks::{KeyEvent, LaborShockSet, Scenario, ShockSample};

pub use demand::{
    aggregate_consumption, aggregate_demand_reduction, compensated_labor_income,
    household_preferences, intermediate_demand, permanent_income,
};
pub use inventory::update_inventories;
pub use labor::adjust_labor;
pub use rationing::{ration, Allocation, Proportional, Rationing};
pub use supply::{input_constrained_capacity, labor_capacity, realized_output, ProductionFunction};

/// Sectors that keep their workforce throughout the pandemic.
pub const DEFAULT_NO_FIRING: [&str; 2] = ["O84", "P85"];

/// Behavioral constants of households and firms. Time constants are in days.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BehavioralParams {
    /// Per-day persistence of household consumption.
    pub rho: f64,
    /// Fraction of a sector-specific demand shock that is saved rather than
    /// spent on other goods.
    pub delta_s: f64,
    /// Share of labor income consumed; `None` derives `sum(c0) / sum(l0)`.
    pub m: Option<f64>,
    /// Fraction of households expecting an L-shaped recovery.
    pub l_share: f64,
    pub tau: f64,
    pub gamma_f: f64,
    pub gamma_h: f64,
    pub prod_fn: ProductionFunction,
    pub no_firing_sectors: Vec<String>,
}

impl Default for BehavioralParams {
    fn default() -> Self {
        Self {
            rho: 1.0 - 0.4 / 90.0,
            delta_s: 0.75,
            m: None,
            l_share: 1.0,
            tau: 14.0,
            gamma_f: 28.0,
            gamma_h: 56.0,
            prod_fn: ProductionFunction::HalfCritical,
            no_firing_sectors: DEFAULT_NO_FIRING.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl BehavioralParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return bad(format!("rho = {} must lie in (0, 1)", self.rho));
        }
        if !(0.0..=1.0).contains(&self.delta_s) {
            return bad(format!("delta_s = {} must lie in [0, 1]", self.delta_s));
        }
        if !(self.l_share > 0.0 && self.l_share <= 1.0) {
            return bad(format!("l_share = {} must lie in (0, 1]", self.l_share));
        }
        for (name, v) in [
            ("tau", self.tau),
            ("gamma_f", self.gamma_f),
            ("gamma_h", self.gamma_h),
        ] {
            if !(v >= 1.0 && v.is_finite()) {
                return bad(format!("{name} = {v} must be at least one day"));
            }
        }
        if let Some(m) = self.m {
            if !(m > 0.0 && m.is_finite()) {
                return bad(format!("m = {m} must be positive"));
            }
        }
        Ok(())
    }
}

/// Full model state at time `t` (days since the scenario epoch).
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub x: Array1<f64>,
    pub d: Array1<f64>,
    pub l: Array1<f64>,
    pub c: Array1<f64>,
    pub f: Array1<f64>,
    /// Realized orders, supplier `i` to buyer `j`.
    pub o: Array2<f64>,
    /// Stock of input `i` held by sector `j`.
    pub s: Array2<f64>,
    /// Desired aggregate household consumption.
    pub c_agg_d: f64,
    /// Expected permanent labor income.
    pub l_perm: f64,
    /// Demand level firms plan intermediate purchases for. With daily steps
    /// this is the previous day's demand.
    pub demand_expectation: Array1<f64>,
    /// `l_perm` as a fraction of baseline labor income.
    pub zeta: f64,
}

impl SimState {
    /// The pre-pandemic equilibrium.
    pub fn equilibrium(economy: &Economy) -> Self {
        Self {
            t: 0.0,
            x: economy.x0().clone(),
            d: economy.x0().clone(),
            l: economy.l0().clone(),
            c: economy.c0().clone(),
            f: economy.f0().clone(),
            o: economy.z().clone(),
            s: initial_inventories(economy),
            c_agg_d: economy.c0().sum(),
            l_perm: economy.l0().sum(),
            demand_expectation: economy.x0().clone(),
            zeta: 1.0,
        }
    }

    /// Intermediate sales of each sector, `sum_j O_ij`.
    pub fn b2b_out(&self) -> Array1<f64> {
        self.o.sum_axis(Axis(1))
    }
}

/// Demand, capacities and allocations at one instant.
#[derive(Debug, Clone)]
pub struct Flows {
    pub shocks: ShockSample,
    pub c_d: Array1<f64>,
    pub f_d: Array1<f64>,
    pub o_d: Array2<f64>,
    pub d: Array1<f64>,
    pub x_cap: Array1<f64>,
    pub x_inp: Array1<f64>,
    pub x: Array1<f64>,
    pub allocation: Allocation,
}

/// Time derivatives of the dynamic state, used by the continuous integrator.
#[derive(Debug, Clone)]
pub struct Rates {
    pub s: Array2<f64>,
    pub l: Array1<f64>,
    pub demand_expectation: Array1<f64>,
    pub log_c: f64,
    pub zeta: f64,
}

/// An economy, a scenario and behavioral parameters, with the quantities
/// derived from them once.
pub struct Model<'a> {
    economy: &'a Economy,
    scenario: &'a Scenario,
    params: BehavioralParams,
    sets: CriticalitySets,
    rationing: Box<dyn Rationing + 'a>,
    theta0: Array1<f64>,
    s_target: Array2<f64>,
    l_total0: f64,
    m: f64,
    zeta_l: f64,
    no_firing: Vec<bool>,
    first_lockdown: Option<f64>,
}

impl<'a> Model<'a> {
    pub fn new(
        economy: &'a Economy,
        scenario: &'a Scenario,
        params: BehavioralParams,
    ) -> Result<Self> {
        params.validate()?;
        scenario.validate()?;
        let n = economy.n_sectors();
        if scenario.n_sectors() != n {
            return Err(Error::DimensionMismatch(format!(
                "scenario has {} sectors, economy {n}",
                scenario.n_sectors()
            )));
        }
        let c_total = economy.c0().sum();
        let l_total0 = economy.l0().sum();
        if !(c_total > 0.0 && l_total0 > 0.0) {
            return Err(Error::InvalidParams(
                "household consumption and labor income must be positive".into(),
            ));
        }
        let m = params.m.unwrap_or(c_total / l_total0);
        let first_set = scenario.key_dates.iter().find_map(|k| match k.event {
            KeyEvent::LockdownStart { labor_shock } => Some(labor_shock),
            _ => None,
        });
        let zeta_l = match first_set {
            Some(set) => {
                let eps = match set {
                    LaborShockSet::L1 => &scenario.eps_s_l1,
                    LaborShockSet::L2 => &scenario.eps_s_l2,
                };
                1.0 - eps.dot(economy.l0()) / l_total0
            }
            None => 1.0,
        };
        if 1.0 - (1.0 - zeta_l) / params.l_share <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "l_share = {} drives permanent income to zero for an initial income loss of {:.4}",
                params.l_share,
                1.0 - zeta_l
            )));
        }
        let mut no_firing = vec![false; n];
        for code in &params.no_firing_sectors {
            match economy.sectors().position(code) {
                Some(i) => no_firing[i] = true,
                None => log::debug!("no-firing sector {code} is not part of this economy"),
            }
        }
        Ok(Self {
            economy,
            scenario,
            sets: derive_criticality_sets(economy)?,
            rationing: Box::new(Proportional),
            theta0: economy.c0() / c_total,
            s_target: initial_inventories(economy),
            l_total0,
            m,
            zeta_l,
            no_firing,
            first_lockdown: scenario.first_lockdown_start(),
            params,
        })
    }

    /// Replaces strict proportional rationing.
    pub fn with_rationing(mut self, rationing: Box<dyn Rationing + 'a>) -> Self {
        self.rationing = rationing;
        self
    }

    pub fn economy(&self) -> &Economy {
        self.economy
    }

    pub fn scenario(&self) -> &Scenario {
        self.scenario
    }

    pub fn params(&self) -> &BehavioralParams {
        &self.params
    }

    /// Share of labor income consumed.
    pub fn m(&self) -> f64 {
        self.m
    }

    /// Expected income fraction at the start of the first lockdown.
    pub fn zeta_l(&self) -> f64 {
        self.zeta_l
    }

    pub fn first_lockdown(&self) -> Option<f64> {
        self.first_lockdown
    }

    pub fn initial_state(&self) -> SimState {
        SimState::equilibrium(self.economy)
    }

    pub(crate) fn in_pandemic(&self, t: f64) -> bool {
        self.first_lockdown.is_some_and(|tl| t >= tl)
    }

    /// Demand, capacities, output and allocations given the stocks, labor,
    /// expected demand and desired household consumption.
    pub fn flows(
        &self,
        shocks: ShockSample,
        s: &Array2<f64>,
        l: &Array1<f64>,
        expected_demand: &Array1<f64>,
        c_total_desired: f64,
    ) -> Result<Flows> {
        let e = self.economy;
        let theta = household_preferences(&self.theta0, &shocks.eps_d);
        let c_d = theta * c_total_desired;
        let f_d = e.f0() * &shocks.eps_f.mapv(|v| 1.0 - v);
        let o_d = intermediate_demand(e.a(), expected_demand, &self.s_target, s, self.params.tau);
        let d = o_d.sum_axis(Axis(1)) + &c_d + &f_d;
        let x_cap = labor_capacity(l, e.l0(), e.x0(), &shocks.eps_s);
        let x_inp = input_constrained_capacity(s, e.a(), e.x0(), &self.sets, self.params.prod_fn);
        let x = realized_output(&x_cap, &x_inp, &d);
        let allocation = self.rationing.allocate(&x, &d, &c_d, &f_d, &o_d)?;
        Ok(Flows {
            shocks,
            c_d,
            f_d,
            o_d,
            d,
            x_cap,
            x_inp,
            x,
            allocation,
        })
    }

    fn household_inputs(&self, shocks: &ShockSample, l: &Array1<f64>) -> (f64, f64) {
        let eps_tilde =
            aggregate_demand_reduction(&self.theta0, &shocks.eps_d, self.params.delta_s);
        let l_comp = compensated_labor_income(l.sum(), self.l_total0, shocks.b);
        (eps_tilde, l_comp)
    }

    /// Advances `state` by `dt` days (`0 < dt <= 1`).
    pub fn step(&self, state: &SimState, dt: f64) -> Result<SimState> {
        if !(dt > 0.0 && dt <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "time step {dt} must lie in (0, 1]"
            )));
        }
        let t = state.t + dt;
        let shocks = self.scenario.evaluate(t)?;
        let rho = self.params.rho.powf(dt);

        let (eps_tilde, l_comp) = self.household_inputs(&shocks, &state.l);
        let zeta = match self.first_lockdown {
            Some(tl) if t >= tl && state.t < tl => self.zeta_l,
            Some(tl) if t >= tl => {
                permanent_income(state.zeta, rho, self.zeta_l, self.params.l_share, 1.0, true).1
            }
            _ => 1.0,
        };
        let l_perm = zeta * self.l_total0;
        let c_agg_d = aggregate_consumption(state.c_agg_d, eps_tilde, rho, self.m, l_comp, l_perm)
            .map_err(|e| Error::Simulation {
                t,
                message: e.to_string(),
            })?;

        let flows = self.flows(
            shocks,
            &state.s,
            &state.l,
            &state.demand_expectation,
            c_agg_d,
        )?;
        let e = self.economy;
        let s = update_inventories(&state.s, &flows.allocation.o, e.a(), &flows.x, dt);
        let l = adjust_labor(
            &state.l,
            e.l0(),
            e.x0(),
            &flows.x_cap,
            &flows.x_inp,
            &flows.d,
            &flows.shocks.eps_s,
            self.params.gamma_h,
            self.params.gamma_f,
            &self.no_firing,
            dt,
        );
        let demand_expectation = &state.demand_expectation * (1.0 - dt) + &flows.d * dt;
        let next = SimState {
            t,
            x: flows.x,
            d: flows.d,
            l,
            c: flows.allocation.c,
            f: flows.allocation.f,
            o: flows.allocation.o,
            s,
            c_agg_d,
            l_perm,
            demand_expectation,
            zeta,
        };
        if cfg!(debug_assertions) {
            self.check_invariants(&next, &flows.shocks.eps_s);
        }
        Ok(next)
    }

    /// Time derivatives of the dynamic state for the continuous integrator,
    /// with `log_c` the log of desired household consumption.
    pub fn rates(
        &self,
        t: f64,
        s: &Array2<f64>,
        l: &Array1<f64>,
        expected_demand: &Array1<f64>,
        log_c: f64,
        zeta: f64,
    ) -> Result<(Rates, Flows)> {
        let shocks = self.scenario.evaluate(t)?;
        let (eps_tilde, l_comp) = self.household_inputs(&shocks, l);
        let l_perm = zeta * self.l_total0;
        if !(l_comp > 0.0 && l_perm > 0.0) {
            return Err(Error::Simulation {
                t,
                message: format!("nonpositive income (compensated {l_comp}, permanent {l_perm})"),
            });
        }
        let kappa = -self.params.rho.ln();
        let log_income = 0.5 * ((self.m * l_comp).ln() + (self.m * l_perm).ln());
        let d_log_c = kappa * (log_income - log_c - eps_tilde);
        let d_zeta = if self.in_pandemic(t) {
            kappa * (1.0 - zeta - (1.0 - self.zeta_l) / self.params.l_share)
        } else {
            0.0
        };

        let flows = self.flows(shocks, s, l, expected_demand, log_c.exp())?;
        let e = self.economy;
        let mut ds = &flows.allocation.o - &(e.a() * &flows.x.view().insert_axis(Axis(0)));
        ndarray::Zip::from(&mut ds).and(s).for_each(|r, &s| {
            if s <= 0.0 && *r < 0.0 {
                *r = 0.0;
            }
        });
        let dl = Array1::from_shape_fn(l.len(), |i| {
            labor::labor_rate(
                i,
                e.l0(),
                e.x0(),
                &flows.x_cap,
                &flows.x_inp,
                &flows.d,
                self.params.gamma_h,
                self.params.gamma_f,
                &self.no_firing,
            )
        });
        let dd = &flows.d - expected_demand;
        Ok((
            Rates {
                s: ds,
                l: dl,
                demand_expectation: dd,
                log_c: d_log_c,
                zeta: d_zeta,
            },
            flows,
        ))
    }

    /// The labor bound `(1 - eps_s(t)) l0`.
    pub fn labor_max(&self, t: f64) -> Result<Array1<f64>> {
        let shocks = self.scenario.evaluate(t)?;
        Ok(self.economy.l0() * &shocks.eps_s.mapv(|v| 1.0 - v))
    }

    /// Builds the state snapshot the continuous integrator reports at `t`.
    pub fn snapshot(
        &self,
        t: f64,
        s: Array2<f64>,
        l: Array1<f64>,
        expected_demand: Array1<f64>,
        log_c: f64,
        zeta: f64,
    ) -> Result<SimState> {
        let (_, flows) = self.rates(t, &s, &l, &expected_demand, log_c, zeta)?;
        let state = SimState {
            t,
            x: flows.x,
            d: flows.d,
            l,
            c: flows.allocation.c,
            f: flows.allocation.f,
            o: flows.allocation.o,
            s,
            c_agg_d: log_c.exp(),
            l_perm: zeta * self.l_total0,
            demand_expectation: expected_demand,
            zeta,
        };
        if cfg!(debug_assertions) {
            self.check_invariants(&state, &flows.shocks.eps_s);
        }
        Ok(state)
    }

    /// Panics if allocations do not add up to output, a stock is negative or
    /// labor leaves its bounds. Only called in debug builds.
    fn check_invariants(&self, state: &SimState, eps_s: &Array1<f64>) {
        let b2b = state.b2b_out();
        for i in 0..state.x.len() {
            let total = state.c[i] + state.f[i] + b2b[i];
            let scale = state.x[i].abs().max(f64::MIN_POSITIVE);
            assert!(
                (total - state.x[i]).abs() <= 1e-12 * scale.max(total.abs()) || total == state.x[i],
                "allocations of sector {i} sum to {total}, output is {} (t = {})",
                state.x[i],
                state.t
            );
            assert!(
                state.x[i] >= 0.0,
                "negative output in sector {i} at t = {}",
                state.t
            );
            let l_max = (1.0 - eps_s[i]) * self.economy.l0()[i];
            assert!(
                state.l[i] >= 0.0 && state.l[i] <= l_max * (1.0 + 1e-12),
                "labor {} of sector {i} outside [0, {l_max}] at t = {}",
                state.l[i],
                state.t
            );
        }
        assert!(
            state.s.iter().all(|&v| v >= 0.0),
            "negative inventory at t = {}",
            state.t
        );
    }
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
    fn zero_shocks_keep_equilibrium() {
        let e = Economy::new(d2_parts()).unwrap();
        let sc = Scenario::no_shocks(&e, epoch());
        let model = Model::new(&e, &sc, BehavioralParams::default()).unwrap();
        for dt in [1.0, 0.5, 0.25] {
            let s0 = model.initial_state();
            let mut s = s0.clone();
            for _ in 0..(40.0 / dt) as usize {
                s = model.step(&s, dt).unwrap();
            }
            for (a, b) in
                s.x.iter()
                    .zip(&s0.x)
                    .chain(s.l.iter().zip(&s0.l))
                    .chain(s.s.iter().zip(&s0.s))
            {
                assert!((a - b).abs() <= 1e-12 * b.abs(), "{a} vs {b}");
            }
            assert!((s.c_agg_d - s0.c_agg_d).abs() <= 1e-12 * s0.c_agg_d);
        }
    }

    #[test]
    fn equilibrium_rates_vanish() {
        let e = Economy::new(d2_parts()).unwrap();
        let sc = Scenario::no_shocks(&e, epoch());
        let model = Model::new(&e, &sc, BehavioralParams::default()).unwrap();
        let s0 = model.initial_state();
        let (r, _) = model
            .rates(
                3.0,
                &s0.s,
                &s0.l,
                &s0.demand_expectation,
                s0.c_agg_d.ln(),
                1.0,
            )
            .unwrap();
        assert!(r
            .s
            .iter()
            .chain(&r.l)
            .chain(&r.demand_expectation)
            .all(|v| v.abs() < 1e-9));
        assert!(r.log_c.abs() < 1e-12);
    }

    #[test]
    fn invalid_params_are_rejected() {
        let e = Economy::new(d2_parts()).unwrap();
        let sc = Scenario::no_shocks(&e, epoch());
        for p in [
            BehavioralParams {
                rho: 1.0,
                ..Default::default()
            },
            BehavioralParams {
                tau: 0.5,
                ..Default::default()
            },
            BehavioralParams {
                l_share: 0.0,
                ..Default::default()
            },
            BehavioralParams {
                delta_s: 1.5,
                ..Default::default()
            },
        ] {
            assert!(matches!(
                Model::new(&e, &sc, p),
                Err(Error::InvalidParams(_))
            ));
        }
        let model = Model::new(&e, &sc, BehavioralParams::default()).unwrap();
        assert!(model.step(&model.initial_state(), 1.5).is_err());
        assert!(model.step(&model.initial_state(), 0.0).is_err());
    }

    #[test]
    fn derived_consumption_share() {
        let e = Economy::new(d2_parts()).unwrap();
        let sc = Scenario::no_shocks(&e, epoch());
        let model = Model::new(&e, &sc, BehavioralParams::default()).unwrap();
        assert!((model.m() - 70.0 / 90.0).abs() < 1e-15);
        assert_eq!(model.zeta_l(), 1.0);
    }
}
