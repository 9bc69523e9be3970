//! CSV output of simulated trajectories and comparison of two such files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use chrono::NaiveDate;

use crate::calibration::dataset::NATIONAL;
use crate::dynamics::SimState;
use crate::economy::Economy;
use crate::error::{Error, Result};

pub const TRAJECTORY_HEADER: &str = "t,date,sector,x,d,l,c,f,b2b_out";
pub const AGGREGATE_HEADER: &str = "t,date,x,d,l,c,f,b2b_out";
const VALUE_COLUMNS: [&str; 6] = ["x", "d", "l", "c", "f", "b2b_out"];

/// Accumulates per-sector and economy-wide rows as states arrive.
pub struct TrajectoryWriter<'a> {
    codes: &'a [String],
    start_date: NaiveDate,
    sectors: String,
    aggregate: String,
}

impl<'a> TrajectoryWriter<'a> {
    pub fn new(economy: &'a Economy, start_date: NaiveDate) -> Self {
        Self {
            codes: economy.sectors().codes(),
            start_date,
            sectors: format!("{TRAJECTORY_HEADER}\n"),
            aggregate: format!("{AGGREGATE_HEADER}\n"),
        }
    }

    pub fn push(&mut self, s: &SimState) {
        let date = self.start_date + chrono::Duration::days(s.t.floor() as i64);
        let b2b = s.b2b_out();
        for (i, code) in self.codes.iter().enumerate() {
            let _ = writeln!(
                self.sectors,
                "{},{date},{code},{},{},{},{},{},{}",
                s.t, s.x[i], s.d[i], s.l[i], s.c[i], s.f[i], b2b[i]
            );
        }
        let totals = [
            s.x.sum(),
            s.d.sum(),
            s.l.sum(),
            s.c.sum(),
            s.f.sum(),
            b2b.sum(),
        ];
        let values = totals.map(|v| v.to_string()).join(",");
        let _ = writeln!(self.sectors, "{},{date},{NATIONAL},{values}", s.t);
        let _ = writeln!(self.aggregate, "{},{date},{values}", s.t);
    }

    /// Writes `trajectory.csv` and `aggregate.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        for (name, text) in [
            ("trajectory.csv", &self.sectors),
            ("aggregate.csv", &self.aggregate),
        ] {
            let p = dir.join(name);
            fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
        }
        Ok(())
    }

    pub fn trajectory_csv(&self) -> &str {
        &self.sectors
    }

    pub fn aggregate_csv(&self) -> &str {
        &self.aggregate
    }
}

/// Deviation statistics of one value column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnDeviation {
    pub max_abs: f64,
    pub mean_abs: f64,
    /// Largest absolute deviation relative to the first file's value, over
    /// rows where that value is nonzero.
    pub max_rel: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub rows: usize,
    pub columns: BTreeMap<String, ColumnDeviation>,
}

type Rows = BTreeMap<(String, String), [f64; 6]>;

fn read_trajectory(path: &Path) -> Result<Rows> {
    let data = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(data.as_slice());
    let headers = reader
        .headers()
        .map_err(|source| Error::Csv {
            path: path.to_owned(),
            source,
        })?
        .clone();
    if headers.iter().ne(TRAJECTORY_HEADER.split(',')) {
        return Err(Error::Schema {
            path: path.to_owned(),
            message: format!("expected header {TRAJECTORY_HEADER}"),
        });
    }
    let mut rows = Rows::new();
    for (k, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|source| Error::Csv {
            path: path.to_owned(),
            source,
        })?;
        let mut values = [0.0; 6];
        for (j, v) in values.iter_mut().enumerate() {
            *v = rec[3 + j].parse().map_err(|_| Error::Parse {
                path: path.to_owned(),
                row: k + 2,
                column: 4 + j,
                message: format!("bad number {:?}", &rec[3 + j]),
            })?;
        }
        if rows
            .insert((rec[0].to_string(), rec[2].to_string()), values)
            .is_some()
        {
            return Err(Error::Parse {
                path: path.to_owned(),
                row: k + 2,
                column: 1,
                message: "repeated (t, sector) row".into(),
            });
        }
    }
    Ok(rows)
}

/// Compares two trajectory files row by row, matched on time and sector.
pub fn compare_trajectories(a: &Path, b: &Path) -> Result<Comparison> {
    let ra = read_trajectory(a)?;
    let rb = read_trajectory(b)?;
    if ra.len() != rb.len() || ra.keys().ne(rb.keys()) {
        return Err(Error::DimensionMismatch(format!(
            "{} and {} cover different (t, sector) rows",
            a.display(),
            b.display()
        )));
    }
    let mut stats = [(0.0f64, 0.0f64, 0.0f64); 6];
    for (key, va) in &ra {
        let vb = &rb[key];
        for j in 0..6 {
            let dev = (va[j] - vb[j]).abs();
            stats[j].0 = stats[j].0.max(dev);
            stats[j].1 += dev;
            if va[j] != 0.0 {
                stats[j].2 = stats[j].2.max(dev / va[j].abs());
            }
        }
    }
    let n = ra.len().max(1) as f64;
    let columns = VALUE_COLUMNS
        .iter()
        .zip(stats)
        .map(|(c, (max_abs, sum, max_rel))| {
            (
                c.to_string(),
                ColumnDeviation {
                    max_abs,
                    mean_abs: sum / n,
                    max_rel,
                },
            )
        })
        .collect();
    Ok(Comparison {
        rows: ra.len(),
        columns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::BehavioralParams;
    use crate::fixtures::{d2_parts, d2_scenario};
    use crate::integrator::{simulate_observed, IntegrationConfig};
    use crate::shocks::Scenario;

    #[test]
    fn write_and_compare() {
        let e = Economy::new(d2_parts()).unwrap();
        let sc = Scenario::resolve(&d2_scenario(), &e).unwrap();
        let run = |cfg: IntegrationConfig, dir: &Path| {
            let mut w = TrajectoryWriter::new(&e, sc.start_date);
            simulate_observed(&e, &sc, &BehavioralParams::default(), &cfg, 20.0, |s| {
                w.push(s)
            })
            .unwrap();
            w.write(dir).unwrap();
            w.aggregate_csv().lines().count()
        };
        let tmp = tempfile::tempdir().unwrap();
        let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
        fs::create_dir_all(&a).unwrap();
        fs::create_dir_all(&b).unwrap();
        assert_eq!(run(IntegrationConfig::discrete(1.0), &a), 22);
        run(IntegrationConfig::discrete(0.5), &b);
        let text = fs::read_to_string(a.join("trajectory.csv")).unwrap();
        assert!(text.starts_with("t,date,sector,x,d,l,c,f,b2b_out\n0,2020-03-01,S0,"));
        assert_eq!(text.lines().count(), 1 + 21 * 3);

        let same =
            compare_trajectories(&a.join("trajectory.csv"), &a.join("trajectory.csv")).unwrap();
        assert_eq!(same.rows, 63);
        assert!(same.columns.values().all(|c| c.max_abs == 0.0));
        let diff =
            compare_trajectories(&a.join("trajectory.csv"), &b.join("trajectory.csv")).unwrap();
        assert!(diff.columns["x"].max_abs > 0.0);
        assert!(diff.columns["x"].mean_abs <= diff.columns["x"].max_abs);
        assert!(compare_trajectories(&a.join("trajectory.csv"), &a.join("aggregate.csv")).is_err());
    }
}
