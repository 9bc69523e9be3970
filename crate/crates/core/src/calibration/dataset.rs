//! Empirical indicator time series, expressed as percentage changes from
//! pre-pandemic levels.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sector code used for nationally aggregated rows.
pub const NATIONAL: &str = "BE";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Indicator {
    /// Business-to-business sales, compared with `sum_j O_ij`.
    B2b,
    /// Synthetic GDP, compared with gross output.
    Gdp,
    /// Survey revenue, compared with gross output.
    Revenue,
    /// Survey employment, compared with labor compensation.
    Employment,
}

impl Indicator {
    pub const ALL: [Indicator; 4] = [
        Indicator::B2b,
        Indicator::Gdp,
        Indicator::Revenue,
        Indicator::Employment,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Indicator::B2b => "b2b",
            Indicator::Gdp => "gdp",
            Indicator::Revenue => "revenue",
            Indicator::Employment => "employment",
        }
    }
}

impl std::fmt::Display for Indicator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Indicator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|i| i.name() == s)
            .ok_or_else(|| format!("unknown indicator {s:?}"))
    }
}

/// A calendar quarter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Quarter {
    pub year: i32,
    pub q: u32,
}

impl Quarter {
    pub fn new(year: i32, q: u32) -> Self {
        assert!((1..=4).contains(&q), "quarter {q} out of range");
        Self { year, q }
    }

    pub fn of(date: NaiveDate) -> Self {
        Self::new(date.year(), (date.month() - 1) / 3 + 1)
    }

    pub fn first_day(self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.year, 3 * self.q - 2, 1).expect("valid quarter")
    }

    pub fn last_day(self) -> NaiveDate {
        self.next().first_day().pred_opt().expect("valid date")
    }

    pub fn next(self) -> Self {
        if self.q == 4 {
            Self::new(self.year + 1, 1)
        } else {
            Self::new(self.year, self.q + 1)
        }
    }

    /// Middle day of the quarter.
    pub fn mid_day(self) -> NaiveDate {
        let days = (self.last_day() - self.first_day()).num_days();
        self.first_day() + chrono::Duration::days(days / 2)
    }
}

impl std::fmt::Display for Quarter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}Q{}", self.year, self.q)
    }
}

impl std::str::FromStr for Quarter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (y, q) = s
            .split_once('Q')
            .ok_or_else(|| format!("bad quarter {s:?}"))?;
        let year = y.parse().map_err(|_| format!("bad quarter {s:?}"))?;
        let q: u32 = q.parse().map_err(|_| format!("bad quarter {s:?}"))?;
        if !(1..=4).contains(&q) {
            return Err(format!("bad quarter {s:?}"));
        }
        Ok(Self::new(year, q))
    }
}

/// The four quarters scored in the reference setup, 2020Q2 to 2021Q1.
pub fn reference_quarters() -> Vec<Quarter> {
    vec![
        Quarter::new(2020, 2),
        Quarter::new(2020, 3),
        Quarter::new(2020, 4),
        Quarter::new(2021, 1),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub indicator: Indicator,
    pub date: NaiveDate,
    pub sector: String,
    /// Change from the pre-pandemic level in percent (negative = contraction).
    pub value_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmpiricalDataset {
    pub observations: Vec<Observation>,
}

impl EmpiricalDataset {
    pub fn new(observations: Vec<Observation>) -> Result<Self> {
        let mut seen = HashSet::new();
        for o in &observations {
            if !o.value_pct.is_finite() {
                return Err(Error::Dataset(format!(
                    "{} {} {}: value is not a number",
                    o.indicator, o.date, o.sector
                )));
            }
            if !seen.insert((o.indicator, o.date, o.sector.as_str())) {
                return Err(Error::Dataset(format!(
                    "duplicate observation for {} {} {}",
                    o.indicator, o.date, o.sector
                )));
            }
        }
        Ok(Self { observations })
    }

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
        let expected = ["indicator", "date", "sector", "value_pct"];
        if headers.iter().ne(expected) {
            return Err(Error::Schema {
                path: path.to_owned(),
                message: format!("expected header {}", expected.join(",")),
            });
        }
        let mut observations = Vec::new();
        for (k, rec) in reader.records().enumerate() {
            let row = k + 2;
            let rec = rec.map_err(|source| Error::Csv {
                path: path.to_owned(),
                source,
            })?;
            let err = |column: usize, message: String| Error::Parse {
                path: path.to_owned(),
                row,
                column,
                message,
            };
            let indicator = rec[0].parse::<Indicator>().map_err(|m| err(1, m))?;
            let date = rec[1]
                .parse::<NaiveDate>()
                .map_err(|e| err(2, format!("bad date {:?}: {e}", &rec[1])))?;
            if rec[2].is_empty() {
                return Err(err(3, "empty sector".into()));
            }
            let value_pct = rec[3]
                .parse::<f64>()
                .map_err(|e| err(4, format!("bad value {:?}: {e}", &rec[3])))?;
            observations.push(Observation {
                indicator,
                date,
                sector: rec[2].to_string(),
                value_pct,
            });
        }
        Self::new(observations)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("indicator,date,sector,value_pct\n");
        for o in &self.observations {
            out.push_str(&format!(
                "{},{},{},{}\n",
                o.indicator, o.date, o.sector, o.value_pct
            ));
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn indicators(&self) -> Vec<Indicator> {
        let mut v: Vec<Indicator> = self.observations.iter().map(|o| o.indicator).collect();
        v.sort();
        v.dedup();
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarters_of_dates() {
        let d = |s: &str| s.parse::<NaiveDate>().unwrap();
        assert_eq!(Quarter::of(d("2020-04-01")), Quarter::new(2020, 2));
        assert_eq!(Quarter::of(d("2020-06-30")), Quarter::new(2020, 2));
        assert_eq!(Quarter::of(d("2021-03-31")), Quarter::new(2021, 1));
        assert_eq!(Quarter::new(2020, 2).last_day(), d("2020-06-30"));
        assert_eq!(Quarter::new(2020, 4).next(), Quarter::new(2021, 1));
        assert_eq!("2020Q3".parse::<Quarter>().unwrap(), Quarter::new(2020, 3));
        assert!("2020Q5".parse::<Quarter>().is_err());
        let q2 = Quarter::new(2020, 2);
        assert_eq!((q2.last_day() - q2.first_day()).num_days() + 1, 91);
    }

    #[test]
    fn duplicates_are_rejected() {
        let o = Observation {
            indicator: Indicator::Gdp,
            date: "2020-05-01".parse().unwrap(),
            sector: "BE".into(),
            value_pct: -10.0,
        };
        assert!(EmpiricalDataset::new(vec![o.clone(), o]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        let ds = EmpiricalDataset::new(vec![
            Observation {
                indicator: Indicator::B2b,
                date: "2020-05-01".parse().unwrap(),
                sector: "C".into(),
                value_pct: -12.345678901234567,
            },
            Observation {
                indicator: Indicator::Employment,
                date: "2020-08-01".parse().unwrap(),
                sector: "I55-56".into(),
                value_pct: -3.0,
            },
        ])
        .unwrap();
        ds.write_csv(&path).unwrap();
        assert_eq!(EmpiricalDataset::read_csv(&path).unwrap(), ds);
        fs::write(
            &path,
            "indicator,date,sector,value_pct\ngdp,2020-05-01,BE,abc\n",
        )
        .unwrap();
        assert!(matches!(
            EmpiricalDataset::read_csv(&path),
            Err(Error::Parse { row: 2, .. })
        ));
    }
}
