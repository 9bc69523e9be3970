//! Deterministic synthetic economies and scenarios.
//!
//! * `d2`: two sectors with hand-picked flows.
//! * `d3`: three sectors, each with one critical and one important supplier.
//! * `be_like`: 63 NACE sectors with published Belgian magnitudes for output,
//!   final demand, labor compensation, inventory targets and shocks. The
//!   intermediate flow matrix is synthesized by biproportional fitting of a
//!   seeded random kernel, and criticality ratings are derived from it.

mod belgium;

use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::economy::{write_economy, Economy, EconomyParts, EconomyPaths};
use crate::error::{Error, Result};
use crate::shocks::{KeyDate, KeyEvent, LaborShockSet, ScenarioFile, SectorShocks};

pub const SCENARIO_FILE: &str = "scenario.json";
pub const DEFAULT_SEED: u64 = 2020;

/// Cumulative input-value share rated critical for each buyer.
const CRITICAL_SHARE: f64 = 0.3;
/// Cumulative input-value share up to which the remaining inputs are rated important.
const IMPORTANT_SHARE: f64 = 0.6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureSpec {
    pub name: String,
    pub n_sectors: usize,
    pub seed: u64,
    /// Upper bound on each sector's intermediate cost share `sum_i A_ij`.
    pub max_column_share: f64,
}

impl FixtureSpec {
    pub fn named(name: &str) -> Result<Self> {
        let n_sectors = match name {
            "d2" => 2,
            "d3" => 3,
            "be_like" => belgium::SECTORS.len(),
            other => return Err(Error::InvalidParams(format!("unknown fixture {other:?}"))),
        };
        Ok(Self {
            name: name.to_owned(),
            n_sectors,
            seed: DEFAULT_SEED,
            max_column_share: 0.9,
        })
    }
}

pub const FIXTURE_NAMES: [&str; 3] = ["d2", "d3", "be_like"];

/// A generated economy and the scenario that goes with it.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub economy: Economy,
    pub scenario: ScenarioFile,
}

pub fn generate_fixture(spec: &FixtureSpec) -> Result<Fixture> {
    let (parts, scenario) = match spec.name.as_str() {
        "d2" => (d2_parts(), d2_scenario()),
        "d3" => (d3_parts(), d3_scenario()),
        "be_like" => (be_like_parts(spec.seed)?, reference_scenario()),
        other => return Err(Error::InvalidParams(format!("unknown fixture {other:?}"))),
    };
    if parts.codes.len() != spec.n_sectors {
        return Err(Error::InvalidParams(format!(
            "fixture {} has {} sectors, expected {}",
            spec.name,
            parts.codes.len(),
            spec.n_sectors
        )));
    }
    let economy = Economy::new(parts)?;
    for j in 0..economy.n_sectors() {
        let share = economy.a().column(j).sum();
        if share > spec.max_column_share {
            return Err(Error::InvalidParams(format!(
                "fixture {}: cost share {share:.4} of sector {} exceeds {}",
                spec.name,
                economy.sectors().code(j),
                spec.max_column_share
            )));
        }
        if economy.l0()[j] <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "fixture {}: sector {} has no labor",
                spec.name,
                economy.sectors().code(j)
            )));
        }
    }
    Ok(Fixture { economy, scenario })
}

/// Writes the economy files and `scenario.json` into `dir`.
pub fn write_fixture(fixture: &Fixture, dir: &Path) -> Result<EconomyPaths> {
    let paths = write_economy(&fixture.economy, dir)?;
    fixture.scenario.write(&dir.join(SCENARIO_FILE))?;
    Ok(paths)
}

/// Loads a fixture directory written by [`write_fixture`].
pub fn load_fixture(dir: &Path) -> Result<Fixture> {
    let economy = crate::economy::load_economy(&EconomyPaths::in_dir(dir))?;
    let scenario = ScenarioFile::read(&dir.join(SCENARIO_FILE))?;
    Ok(Fixture { economy, scenario })
}

/// Generates every named fixture into `root/<name>/`.
pub fn write_all(root: &Path, seed: u64) -> Result<()> {
    for name in FIXTURE_NAMES {
        let mut spec = FixtureSpec::named(name)?;
        spec.seed = seed;
        let dir = root.join(name);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        write_fixture(&generate_fixture(&spec)?, &dir)?;
    }
    Ok(())
}

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid date")
}

/// Simulation epoch of the reference scenario.
pub fn reference_start_date() -> NaiveDate {
    date(2020, 3, 1)
}

/// First lockdown, second lockdown, lockdown light and its relaxation.
pub fn reference_key_dates() -> Vec<KeyDate> {
    let start = |labor_shock| KeyEvent::LockdownStart { labor_shock };
    vec![
        KeyDate {
            date: date(2020, 3, 15),
            event: start(LaborShockSet::L1),
        },
        KeyDate {
            date: date(2020, 5, 4),
            event: KeyEvent::LockdownEnd,
        },
        KeyDate {
            date: date(2020, 10, 19),
            event: start(LaborShockSet::L2),
        },
        KeyDate {
            date: date(2020, 11, 16),
            event: KeyEvent::LockdownEnd,
        },
        KeyDate {
            date: date(2021, 5, 17),
            event: KeyEvent::RestrictionsLifted,
        },
    ]
}

fn scenario_with(shocks: impl IntoIterator<Item = (String, SectorShocks)>) -> ScenarioFile {
    ScenarioFile {
        start_date: reference_start_date(),
        key_dates: reference_key_dates(),
        r: 0.5,
        b: 0.7,
        l1: 7.0,
        l2: 42.0,
        shocks: shocks.into_iter().collect(),
    }
}

/// The Belgian reference scenario on the 63 fixture sectors.
pub fn reference_scenario() -> ScenarioFile {
    scenario_with(belgium::SECTORS.iter().map(|(code, v, on_site)| {
        (
            code.to_string(),
            SectorShocks {
                eps_s_l1: v[belgium::EPS_S_L1],
                eps_s_l2: v[belgium::EPS_S_L2],
                eps_d: v[belgium::EPS_D],
                eps_f: v[belgium::EPS_F],
                on_site: Some(*on_site),
            },
        )
    }))
}

pub fn d2_parts() -> EconomyParts {
    EconomyParts {
        codes: vec!["S0".into(), "S1".into()],
        z: ndarray::array![[20.0, 30.0], [40.0, 10.0]],
        x0: ndarray::array![110.0, 100.0],
        c0: ndarray::array![30.0, 40.0],
        f0: ndarray::array![30.0, 10.0],
        l0: ndarray::array![50.0, 40.0],
        n_days_inventory: ndarray::array![10.0, 5.0],
        criticality: ndarray::array![[0.5, 1.0], [1.0, 0.5]],
        on_site: vec![false, false],
    }
}

/// A 50% first-lockdown labor shock on sector S0 only.
pub fn d2_scenario() -> ScenarioFile {
    scenario_with([(
        "S0".to_string(),
        SectorShocks {
            eps_s_l1: 0.5,
            ..Default::default()
        },
    )])
}

pub fn d3_parts() -> EconomyParts {
    let mut criticality = Array2::zeros((3, 3));
    for buyer in 0..3 {
        criticality[[(buyer + 1) % 3, buyer]] = 1.0;
        criticality[[(buyer + 2) % 3, buyer]] = 0.5;
    }
    EconomyParts {
        codes: vec!["S0".into(), "S1".into(), "S2".into()],
        z: ndarray::array![[10.0, 20.0, 5.0], [15.0, 5.0, 10.0], [5.0, 10.0, 5.0]],
        x0: ndarray::array![100.0, 100.0, 100.0],
        c0: ndarray::array![40.0, 30.0, 50.0],
        f0: ndarray::array![25.0, 40.0, 30.0],
        l0: ndarray::array![40.0, 50.0, 60.0],
        n_days_inventory: ndarray::array![20.0, 10.0, 5.0],
        criticality,
        on_site: vec![false, false, true],
    }
}

pub fn d3_scenario() -> ScenarioFile {
    let rows = [
        ("S0", 0.2, 0.05, 0.1, 0.15),
        ("S1", 0.3, 0.1, 0.0, 0.15),
        ("S2", 0.5, 0.3, 0.8, 0.8),
    ];
    scenario_with(rows.iter().map(|&(code, l1, l2, d, f)| {
        (
            code.to_string(),
            SectorShocks {
                eps_s_l1: l1,
                eps_s_l2: l2,
                eps_d: d,
                eps_f: f,
                on_site: Some(code == "S2"),
            },
        )
    }))
}

/// Scales the rows and columns of `kernel` until its row sums match `rows`
/// and its column sums match `cols`. Both targets must have the same total.
fn biproportional_fit(
    mut kernel: Array2<f64>,
    rows: &Array1<f64>,
    cols: &Array1<f64>,
) -> Result<Array2<f64>> {
    let (n, m) = kernel.dim();
    let mut converged = false;
    for _ in 0..20_000 {
        for i in 0..n {
            let s = kernel.row(i).sum();
            if s > 0.0 {
                kernel.row_mut(i).mapv_inplace(|v| v * rows[i] / s);
            }
        }
        let mut worst: f64 = 0.0;
        for j in 0..m {
            let s = kernel.column(j).sum();
            if s > 0.0 {
                worst = worst.max((s - cols[j]).abs() / cols[j].max(1.0));
                kernel.column_mut(j).mapv_inplace(|v| v * cols[j] / s);
            }
        }
        if worst < 1e-13 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::InvalidParams(
            "intermediate flows cannot match the requested row and column totals".into(),
        ));
    }
    Ok(kernel)
}

/// Ratings from each buyer's input mix: the largest suppliers covering the
/// first `CRITICAL_SHARE` of input value are critical, the next ones up to
/// `IMPORTANT_SHARE` are important.
fn ratings_from_flows(z: &Array2<f64>) -> Array2<f64> {
    let n = z.nrows();
    let mut ratings = Array2::zeros((n, n));
    for j in 0..n {
        let total = z.column(j).sum();
        if total <= 0.0 {
            continue;
        }
        let mut order: Vec<usize> = (0..n).filter(|&i| z[[i, j]] > 0.0).collect();
        order.sort_by(|&a, &b| z[[b, j]].total_cmp(&z[[a, j]]).then(a.cmp(&b)));
        let mut covered = 0.0;
        for i in order {
            ratings[[i, j]] = if covered < CRITICAL_SHARE {
                1.0
            } else if covered < IMPORTANT_SHARE {
                0.5
            } else {
                0.0
            };
            covered += z[[i, j]] / total;
        }
    }
    ratings
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

/// The 63-sector Belgian-like economy.
pub fn be_like_parts(seed: u64) -> Result<EconomyParts> {
    use belgium::{C0, F0, L0, N_DAYS, SECTORS, X0};
    let n = SECTORS.len();
    let col = |k: usize| Array1::from_iter(SECTORS.iter().map(|r| r.1[k]));
    let (x0, c0, f0, l0) = (col(X0), col(C0), col(F0), col(L0));
    let rows = &x0 - &c0 - &f0;
    if rows.iter().any(|&r| r < 0.0) {
        return Err(Error::InvalidParams("final demand exceeds output".into()));
    }
    // purchases proportional to what is left after paying labor
    let value_left = &x0 - &l0;
    let cols = &value_left * (rows.sum() / value_left.sum());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kernel = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let u: f64 = rng.random();
            let mut w = if u < 0.35 { 0.0 } else { u * u };
            if i == j {
                w += 2.0;
            }
            if rows[i] > 0.0 && cols[j] > 0.0 {
                kernel[[i, j]] = w + 1e-3;
            }
        }
    }
    let mut z = biproportional_fit(kernel, &rows, &cols)?.mapv(round6);
    for i in 0..n {
        if rows[i] == 0.0 {
            continue;
        }
        let residual = rows[i] - z.row(i).sum();
        let k = (0..n)
            .max_by(|&a, &b| z[[i, a]].total_cmp(&z[[i, b]]))
            .expect("nonempty");
        z[[i, k]] = round6(z[[i, k]] + residual);
    }
    let criticality = ratings_from_flows(&z);
    Ok(EconomyParts {
        codes: SECTORS.iter().map(|r| r.0.to_string()).collect(),
        z,
        x0,
        c0,
        f0,
        l0,
        n_days_inventory: col(N_DAYS),
        criticality,
        on_site: SECTORS.iter().map(|r| r.2).collect(),
    })
}

/// Sector codes of the Belgian-like fixture, in table order.
pub fn be_like_codes() -> Vec<&'static str> {
    belgium::SECTORS.iter().map(|r| r.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::economy::validate_parts;
    use crate::shocks::{aggregate_shock, Scenario};

    #[test]
    fn d2_matches_documented_matrices() {
        let f = generate_fixture(&FixtureSpec::named("d2").unwrap()).unwrap();
        assert_eq!(f.economy.z(), &ndarray::array![[20.0, 30.0], [40.0, 10.0]]);
        assert_eq!(f.economy.x0(), &ndarray::array![110.0, 100.0]);
    }

    #[test]
    fn d3_has_one_critical_and_one_important_supplier() {
        let f = generate_fixture(&FixtureSpec::named("d3").unwrap()).unwrap();
        let sets = crate::economy::derive_criticality_sets(&f.economy).unwrap();
        for j in 0..3 {
            assert_eq!(sets.critical[j], vec![(j + 1) % 3]);
            assert_eq!(sets.important[j], vec![(j + 2) % 3]);
        }
    }

    #[test]
    fn be_like_is_valid_and_deterministic() {
        let a = be_like_parts(DEFAULT_SEED).unwrap();
        let report = validate_parts(&a, crate::economy::DEFAULT_IDENTITY_TOLERANCE);
        assert!(report.is_clean(), "{:?}", report.violations);
        let b = be_like_parts(DEFAULT_SEED).unwrap();
        assert_eq!(a.z, b.z);
        assert_eq!(a.criticality, b.criticality);
        let c = be_like_parts(DEFAULT_SEED + 1).unwrap();
        assert_ne!(a.z, c.z);
        let f = generate_fixture(&FixtureSpec::named("be_like").unwrap()).unwrap();
        assert_eq!(f.economy.n_sectors(), 63);
    }

    #[test]
    fn be_like_aggregates_match_published_magnitudes() {
        let f = generate_fixture(&FixtureSpec::named("be_like").unwrap()).unwrap();
        let e = &f.economy;
        let m = e.c0().sum() / e.l0().sum();
        assert!((m - 0.8566).abs() < 5e-5, "m = {m}");
        let sc = Scenario::resolve(&f.scenario, e).unwrap();
        let household = aggregate_shock(&sc.eps_d_lockdown, e.c0()).unwrap();
        assert!(
            (household - 0.17).abs() < 0.01,
            "household shock {household}"
        );
        let labor = aggregate_shock(&sc.eps_s_l1, e.l0()).unwrap();
        assert!((labor - 0.25).abs() < 0.005, "labor shock {labor}");
        let labor2 = aggregate_shock(&sc.eps_s_l2, e.l0()).unwrap();
        assert!(
            (labor2 - 0.08).abs() < 0.01,
            "second lockdown labor shock {labor2}"
        );
    }

    #[test]
    fn fixtures_round_trip_through_files() {
        let dir = tempfile::tempdir().unwrap();
        write_all(dir.path(), DEFAULT_SEED).unwrap();
        for name in FIXTURE_NAMES {
            let back = load_fixture(&dir.path().join(name)).unwrap();
            let fresh = generate_fixture(&FixtureSpec::named(name).unwrap()).unwrap();
            assert_eq!(back.economy.z(), fresh.economy.z());
            assert_eq!(back.scenario, fresh.scenario);
        }
    }

    #[test]
    fn ratings_cover_value_shares() {
        // buyer 0 draws 50%, 20% and 30% of its inputs from sectors 0, 1, 2
        let z = ndarray::array![[50.0, 0.0, 0.0], [20.0, 0.0, 0.0], [30.0, 0.0, 0.0]];
        let r = ratings_from_flows(&z);
        assert_eq!(r[[0, 0]], 1.0);
        assert_eq!(r[[2, 0]], 0.5);
        assert_eq!(r[[1, 0]], 0.0);
        assert_eq!(r.column(1).sum(), 0.0);
    }
}
