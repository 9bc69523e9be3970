//! Time course of the demand and labor supply shocks.
//!
//! A scenario is a list of key dates (lockdown start, lockdown end,
//! restrictions lifted) plus per-sector shock magnitudes. Shocks are stored
//! as positive fractions in `[0, 1]` and applied as `(1 - eps)`.
//!
//! Household and exogenous demand shocks follow a common normalized
//! schedule: a linear ramp-in of `l1` days at each lockdown start, a release
//! over `l2` days to `r` times the lockdown level when a lockdown ends, and a
//! release over `l2` days to zero when restrictions are lifted. Sectors with
//! on-site consumption release along a logarithmic curve instead of a line.
//! Labor supply shocks ramp in with each lockdown and ramp out linearly over
//! `l2` days after it, so they are zero between lockdowns.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::economy::Economy;
use crate::error::{Error, Result};

/// Which labor supply shock column applies during a lockdown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LaborShockSet {
    L1,
    L2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum KeyEvent {
    LockdownStart {
        labor_shock: LaborShockSet,
    },
    /// Lockdown ends; demand shocks are released to `r` times their level.
    LockdownEnd,
    /// Remaining restrictions end; demand shocks are released to zero.
    RestrictionsLifted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyDate {
    pub date: NaiveDate,
    #[serde(flatten)]
    pub event: KeyEvent,
}

/// Shock magnitudes for one sector as written in a scenario file.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SectorShocks {
    pub eps_s_l1: f64,
    pub eps_s_l2: f64,
    pub eps_d: f64,
    pub eps_f: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub on_site: Option<bool>,
}

/// On-disk scenario description, keyed by sector code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub start_date: NaiveDate,
    pub key_dates: Vec<KeyDate>,
    pub r: f64,
    pub b: f64,
    pub l1: f64,
    pub l2: f64,
    pub shocks: BTreeMap<String, SectorShocks>,
}

impl ScenarioFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_owned(),
            source,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("scenario serializes");
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// A scenario resolved against an economy's sector order.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub start_date: NaiveDate,
    pub key_dates: Vec<KeyDate>,
    pub eps_s_l1: Array1<f64>,
    pub eps_s_l2: Array1<f64>,
    pub eps_d_lockdown: Array1<f64>,
    pub eps_f_lockdown: Array1<f64>,
    pub on_site: Vec<bool>,
    /// Demand shock between lockdowns and under lockdown-light, relative to lockdown.
    pub r: f64,
    /// Reimbursed fraction of lost labor income.
    pub b: f64,
    /// Ramp-in length in days.
    pub l1: f64,
    /// Ramp-out length in days.
    pub l2: f64,
}

/// Shocks evaluated at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ShockSample {
    pub eps_s: Array1<f64>,
    pub eps_d: Array1<f64>,
    pub eps_f: Array1<f64>,
    pub b: f64,
}

impl ShockSample {
    pub fn zeros(n: usize, b: f64) -> Self {
        Self {
            eps_s: Array1::zeros(n),
            eps_d: Array1::zeros(n),
            eps_f: Array1::zeros(n),
            b,
        }
    }
}

fn check_fraction(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidScenario(format!(
            "{name} = {v} is outside [0, 1]"
        )))
    }
}

impl Scenario {
    pub fn resolve(file: &ScenarioFile, economy: &Economy) -> Result<Self> {
        let n = economy.n_sectors();
        let mut s = Self {
            start_date: file.start_date,
            key_dates: file.key_dates.clone(),
            eps_s_l1: Array1::zeros(n),
            eps_s_l2: Array1::zeros(n),
            eps_d_lockdown: Array1::zeros(n),
            eps_f_lockdown: Array1::zeros(n),
            on_site: economy.on_site().to_vec(),
            r: file.r,
            b: file.b,
            l1: file.l1,
            l2: file.l2,
        };
        for (code, shocks) in &file.shocks {
            let i = economy.sectors().position(code).ok_or_else(|| {
                Error::InvalidScenario(format!("shock listed for unknown sector {code}"))
            })?;
            if let Some(flag) = shocks.on_site {
                if flag != s.on_site[i] {
                    return Err(Error::InvalidScenario(format!(
                        "sector {code}: on_site = {flag} disagrees with the economy data"
                    )));
                }
            }
            s.eps_s_l1[i] = shocks.eps_s_l1;
            s.eps_s_l2[i] = shocks.eps_s_l2;
            s.eps_d_lockdown[i] = shocks.eps_d;
            s.eps_f_lockdown[i] = shocks.eps_f;
        }
        s.validate()?;
        Ok(s)
    }

    /// Converts back to the file representation, listing every sector.
    pub fn to_file(&self, economy: &Economy) -> ScenarioFile {
        let shocks = economy
            .sectors()
            .codes()
            .iter()
            .enumerate()
            .map(|(i, code)| {
                (
                    code.clone(),
                    SectorShocks {
                        eps_s_l1: self.eps_s_l1[i],
                        eps_s_l2: self.eps_s_l2[i],
                        eps_d: self.eps_d_lockdown[i],
                        eps_f: self.eps_f_lockdown[i],
                        on_site: Some(self.on_site[i]),
                    },
                )
            })
            .collect();
        ScenarioFile {
            start_date: self.start_date,
            key_dates: self.key_dates.clone(),
            r: self.r,
            b: self.b,
            l1: self.l1,
            l2: self.l2,
            shocks,
        }
    }

    /// A scenario with no key dates: every shock is zero at all times.
    pub fn no_shocks(economy: &Economy, start_date: NaiveDate) -> Self {
        let n = economy.n_sectors();
        Self {
            start_date,
            key_dates: Vec::new(),
            eps_s_l1: Array1::zeros(n),
            eps_s_l2: Array1::zeros(n),
            eps_d_lockdown: Array1::zeros(n),
            eps_f_lockdown: Array1::zeros(n),
            on_site: economy.on_site().to_vec(),
            r: 0.0,
            b: 0.7,
            l1: 7.0,
            l2: 42.0,
        }
    }

    pub fn n_sectors(&self) -> usize {
        self.on_site.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.on_site.len();
        for (name, v) in [
            ("eps_s_l1", &self.eps_s_l1),
            ("eps_s_l2", &self.eps_s_l2),
            ("eps_d", &self.eps_d_lockdown),
            ("eps_f", &self.eps_f_lockdown),
        ] {
            if v.len() != n {
                return Err(Error::InvalidScenario(format!(
                    "{name} has {} entries for {n} sectors",
                    v.len()
                )));
            }
            for &x in v {
                check_fraction(name, x)?;
            }
        }
        check_fraction("r", self.r)?;
        check_fraction("b", self.b)?;
        for (name, v) in [("l1", self.l1), ("l2", self.l2)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidScenario(format!(
                    "{name} = {v} must be positive"
                )));
            }
        }
        let mut in_lockdown = false;
        let mut lifted = false;
        for (k, kd) in self.key_dates.iter().enumerate() {
            if k > 0 && kd.date <= self.key_dates[k - 1].date {
                return Err(Error::InvalidScenario(format!(
                    "key dates must be strictly increasing ({} follows {})",
                    kd.date,
                    self.key_dates[k - 1].date
                )));
            }
            if kd.date < self.start_date {
                return Err(Error::InvalidScenario(format!(
                    "key date {} precedes the start date {}",
                    kd.date, self.start_date
                )));
            }
            let ok = match kd.event {
                KeyEvent::LockdownStart { .. } => !std::mem::replace(&mut in_lockdown, true),
                KeyEvent::LockdownEnd => std::mem::replace(&mut in_lockdown, false),
                KeyEvent::RestrictionsLifted => {
                    !in_lockdown && k > 0 && !std::mem::replace(&mut lifted, true)
                }
            };
            if !ok {
                return Err(Error::InvalidScenario(format!(
                    "event {:?} on {} is out of sequence",
                    kd.event, kd.date
                )));
            }
        }
        Ok(())
    }

    /// Days between the start date and `date`.
    pub fn day_of(&self, date: NaiveDate) -> f64 {
        (date - self.start_date).num_days() as f64
    }

    pub fn date_of(&self, t: f64) -> NaiveDate {
        self.start_date + chrono::Duration::days(t.floor() as i64)
    }

    /// Start of the first lockdown, in days since the epoch.
    pub fn first_lockdown_start(&self) -> Option<f64> {
        self.key_dates
            .iter()
            .find(|k| matches!(k.event, KeyEvent::LockdownStart { .. }))
            .map(|k| self.day_of(k.date))
    }

    /// Key dates plus the derived ends of each release period, in days.
    /// These are the instants the integrators never step across.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for kd in &self.key_dates {
            let t = self.day_of(kd.date);
            out.push(t);
            if !matches!(kd.event, KeyEvent::LockdownStart { .. }) {
                out.push(t + self.l2);
            }
        }
        sort_dedup(out)
    }

    /// Every instant where a shock time course changes slope, including the
    /// ends of ramp-in periods.
    pub fn kinks(&self) -> Vec<f64> {
        let mut out = self.breakpoints();
        for kd in &self.key_dates {
            if let KeyEvent::LockdownStart { .. } = kd.event {
                out.push(self.day_of(kd.date) + self.l1);
            }
        }
        sort_dedup(out)
    }

    fn demand_segments(&self) -> Vec<Segment> {
        let mut segments: Vec<Segment> = Vec::new();
        let mut level = 0.0;
        for kd in &self.key_dates {
            let start = self.day_of(kd.date);
            if let Some(last) = segments.last_mut() {
                level = last.value_at(start.min(last.end), false);
                last.end = last.end.min(start);
            }
            let (len, to, shape) = match kd.event {
                KeyEvent::LockdownStart { .. } => (self.l1, 1.0, Shape::Linear),
                KeyEvent::LockdownEnd => (self.l2, self.r, Shape::Release),
                KeyEvent::RestrictionsLifted => (self.l2, 0.0, Shape::Release),
            };
            segments.push(Segment {
                start,
                end: start + len,
                len,
                from: level,
                to,
                shape,
            });
            level = to;
        }
        segments
    }

    /// Normalized demand shock intensity at `t` (1 = full lockdown level).
    fn demand_level(&self, t: f64, on_site: bool) -> f64 {
        let segments = self.demand_segments();
        let mut level = 0.0;
        for seg in &segments {
            if t < seg.start {
                break;
            }
            level = if t < seg.end {
                seg.value_at(t, on_site)
            } else if seg.end < seg.start + seg.len {
                // cut short by the next key date
                seg.value_at(seg.end, on_site)
            } else {
                seg.to
            };
        }
        level
    }

    /// Labor shock intensity contributed by each lockdown at `t`.
    fn labor_levels(&self, t: f64) -> Vec<(LaborShockSet, f64)> {
        let mut out = Vec::new();
        for (k, kd) in self.key_dates.iter().enumerate() {
            let KeyEvent::LockdownStart { labor_shock } = kd.event else {
                continue;
            };
            let start = self.day_of(kd.date);
            if t < start {
                continue;
            }
            let rise = |s: f64| ((s - start) / self.l1).clamp(0.0, 1.0);
            let end = self.key_dates[k + 1..]
                .iter()
                .find(|e| e.event == KeyEvent::LockdownEnd)
                .map(|e| self.day_of(e.date));
            let level = match end {
                Some(end) if t >= end => rise(end) * (1.0 - ((t - end) / self.l2).clamp(0.0, 1.0)),
                _ => rise(t),
            };
            if level > 0.0 {
                out.push((labor_shock, level));
            }
        }
        out
    }

    pub fn evaluate(&self, t: f64) -> Result<ShockSample> {
        if !(t >= 0.0) {
            return Err(Error::BeforeEpoch(t));
        }
        let n = self.n_sectors();
        let mut sample = ShockSample::zeros(n, self.b);
        let level_off = self.demand_level(t, false);
        let level_on = self.demand_level(t, true);
        for i in 0..n {
            let g = if self.on_site[i] { level_on } else { level_off };
            sample.eps_d[i] = (self.eps_d_lockdown[i] * g).clamp(0.0, 1.0);
            sample.eps_f[i] = (self.eps_f_lockdown[i] * g).clamp(0.0, 1.0);
        }
        for (set, level) in self.labor_levels(t) {
            let magnitudes = match set {
                LaborShockSet::L1 => &self.eps_s_l1,
                LaborShockSet::L2 => &self.eps_s_l2,
            };
            sample.eps_s.scaled_add(level, magnitudes);
        }
        sample.eps_s.mapv_inplace(|v| v.clamp(0.0, 1.0));
        Ok(sample)
    }
}

/// Evaluates all shocks of `scenario` at `t` days since its epoch.
pub fn evaluate_shocks(scenario: &Scenario, economy: &Economy, t: f64) -> Result<ShockSample> {
    if scenario.n_sectors() != economy.n_sectors() {
        return Err(Error::DimensionMismatch(format!(
            "scenario has {} sectors, economy {}",
            scenario.n_sectors(),
            economy.n_sectors()
        )));
    }
    scenario.evaluate(t)
}

fn sort_dedup(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

#[derive(Debug, Clone, Copy)]
enum Shape {
    Linear,
    Release,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    start: f64,
    end: f64,
    len: f64,
    from: f64,
    to: f64,
    shape: Shape,
}

impl Segment {
    fn value_at(&self, t: f64, on_site: bool) -> f64 {
        let s = (t - self.start).clamp(0.0, self.len);
        match (self.shape, on_site) {
            (Shape::Release, true) => {
                self.to + (self.from - self.to) * release_fraction(s, self.len)
            }
            _ => self.from + (self.to - self.from) * (s / self.len),
        }
    }
}

fn release_fraction(t_rel: f64, l2: f64) -> f64 {
    (100.0 - 99.0 * t_rel / l2).ln() / 100f64.ln()
}

/// Logarithmic release of an on-site demand shock: the full shock at the end
/// of lockdown, zero `l2` days later, recovering slowly at first.
pub fn on_site_release(eps_lockdown: f64, t_rel: f64, l2: f64) -> Result<f64> {
    if !(l2 > 0.0) || !(0.0..=l2).contains(&t_rel) {
        return Err(Error::Domain(format!(
            "release time {t_rel} outside [0, {l2}]"
        )));
    }
    Ok(eps_lockdown * release_fraction(t_rel, l2))
}

/// Weighted mean of a sector shock vector.
pub fn aggregate_shock(eps: &Array1<f64>, weights: &Array1<f64>) -> Result<f64> {
    if eps.len() != weights.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} shocks, {} weights",
            eps.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
        return Err(Error::Domain("weights must be nonnegative".into()));
    }
    let total = weights.sum();
    if total <= 0.0 {
        return Err(Error::Domain("weights sum to zero".into()));
    }
    Ok(eps.dot(weights) / total)
}
