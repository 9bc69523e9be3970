use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::{Economy, EconomyParts, DEFAULT_IDENTITY_TOLERANCE};
use crate::error::{Error, Result};

pub const IO_TABLE_FILE: &str = "io_table.csv";
pub const INITIAL_STATES_FILE: &str = "initial_states.csv";
pub const CRITICALITY_FILE: &str = "criticality.csv";

const STATE_COLUMNS: [&str; 7] = ["code", "x0", "c0", "f0", "l0", "n_days", "on_site"];

/// Locations of the three files that describe an economy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EconomyPaths {
    pub io_table: PathBuf,
    pub initial_states: PathBuf,
    pub criticality: PathBuf,
}

impl EconomyPaths {
    /// The conventional file names inside one directory.
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        Self {
            io_table: dir.join(IO_TABLE_FILE),
            initial_states: dir.join(INITIAL_STATES_FILE),
            criticality: dir.join(CRITICALITY_FILE),
        }
    }

    pub fn all(&self) -> [&Path; 3] {
        [&self.io_table, &self.initial_states, &self.criticality]
    }
}

fn read_records(path: &Path) -> Result<Vec<csv::StringRecord>> {
    let data = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(data.as_slice());
    reader
        .records()
        .map(|r| {
            r.map_err(|source| Error::Csv {
                path: path.to_owned(),
                source,
            })
        })
        .filter(|r| !matches!(r, Ok(rec) if rec.iter().all(str::is_empty)))
        .collect()
}

fn parse_number(path: &Path, row: usize, column: usize, cell: &str) -> Result<f64> {
    cell.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Parse {
            path: path.to_owned(),
            row,
            column,
            message: format!("expected a number, found {cell:?}"),
        })
}

/// Reads a square matrix whose first row and column carry sector codes.
fn read_square_matrix(path: &Path) -> Result<(Vec<String>, Array2<f64>)> {
    let records = read_records(path)?;
    let schema = |message: String| Error::Schema {
        path: path.to_owned(),
        message,
    };
    let header = records
        .first()
        .ok_or_else(|| schema("file is empty".into()))?;
    let codes: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    let n = codes.len();
    if records.len() - 1 != n {
        return Err(schema(format!(
            "header lists {n} sectors but file has {} data rows",
            records.len() - 1
        )));
    }
    let mut m = Array2::zeros((n, n));
    for (i, rec) in records.iter().skip(1).enumerate() {
        let row = i + 2;
        if rec.len() != n + 1 {
            return Err(schema(format!(
                "row {row} has {} columns, expected {}",
                rec.len(),
                n + 1
            )));
        }
        if rec[0] != codes[i] {
            return Err(schema(format!(
                "row {row} is labelled {:?} but column {} is {:?}",
                &rec[0],
                i + 2,
                codes[i]
            )));
        }
        for j in 0..n {
            m[[i, j]] = parse_number(path, row, j + 2, &rec[j + 1])?;
        }
    }
    Ok((codes, m))
}

struct StateRow {
    x0: f64,
    c0: f64,
    f0: f64,
    l0: f64,
    n_days: f64,
    on_site: bool,
}

fn read_initial_states(path: &Path) -> Result<Vec<(String, StateRow)>> {
    let records = read_records(path)?;
    let schema = |message: String| Error::Schema {
        path: path.to_owned(),
        message,
    };
    let header = records
        .first()
        .ok_or_else(|| schema("file is empty".into()))?;
    if header.iter().ne(STATE_COLUMNS.iter().copied()) {
        return Err(schema(format!(
            "expected header {:?}, found {:?}",
            STATE_COLUMNS.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::with_capacity(records.len() - 1);
    for (k, rec) in records.iter().enumerate().skip(1) {
        let row = k + 1;
        if rec.len() != STATE_COLUMNS.len() {
            return Err(schema(format!(
                "row {row} has {} columns, expected {}",
                rec.len(),
                STATE_COLUMNS.len()
            )));
        }
        let num = |c: usize| parse_number(path, row, c + 1, &rec[c]);
        let on_site = match &rec[6] {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::Parse {
                    path: path.to_owned(),
                    row,
                    column: 7,
                    message: format!("on_site must be 0 or 1, found {other:?}"),
                })
            }
        };
        rows.push((
            rec[0].to_owned(),
            StateRow {
                x0: num(1)?,
                c0: num(2)?,
                f0: num(3)?,
                l0: num(4)?,
                n_days: num(5)?,
                on_site,
            },
        ));
    }
    Ok(rows)
}

/// Parses the three economy files and aligns them on the IO table's sector
/// order, without running the numeric validations.
pub fn read_economy_parts(paths: &EconomyPaths) -> Result<EconomyParts> {
    let (codes, z) = read_square_matrix(&paths.io_table)?;
    let (crit_codes, criticality) = read_square_matrix(&paths.criticality)?;
    if crit_codes != codes {
        return Err(Error::DimensionMismatch(format!(
            "criticality sectors {:?} differ from IO table sectors {:?}",
            crit_codes, codes
        )));
    }
    let states = read_initial_states(&paths.initial_states)?;
    if states.len() != codes.len() {
        return Err(Error::DimensionMismatch(format!(
            "initial states list {} sectors, IO table has {}",
            states.len(),
            codes.len()
        )));
    }
    let n = codes.len();
    let mut ordered: Vec<Option<&StateRow>> = vec![None; n];
    for (code, row) in &states {
        let pos = codes.iter().position(|c| c == code).ok_or_else(|| {
            Error::DimensionMismatch(format!(
                "initial states sector {code} is not in the IO table"
            ))
        })?;
        if ordered[pos].replace(row).is_some() {
            return Err(Error::DimensionMismatch(format!(
                "initial states list sector {code} twice"
            )));
        }
    }
    let rows: Vec<&StateRow> = ordered.into_iter().map(|r| r.expect("counted")).collect();
    let col = |f: fn(&StateRow) -> f64| rows.iter().map(|r| f(r)).collect::<Array1<f64>>();
    Ok(EconomyParts {
        z,
        x0: col(|r| r.x0),
        c0: col(|r| r.c0),
        f0: col(|r| r.f0),
        l0: col(|r| r.l0),
        n_days_inventory: col(|r| r.n_days),
        on_site: rows.iter().map(|r| r.on_site).collect(),
        criticality,
        codes,
    })
}

/// Loads and validates an economy.
pub fn load_economy(paths: &EconomyPaths) -> Result<Economy> {
    Economy::with_tolerance(read_economy_parts(paths)?, DEFAULT_IDENTITY_TOLERANCE)
}

fn write_square_matrix(path: &Path, codes: &[String], m: &Array2<f64>) -> Result<()> {
    let mut out = String::from("code");
    for c in codes {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for (i, code) in codes.iter().enumerate() {
        out.push_str(code);
        for v in m.row(i) {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Writes `economy` to the conventional file names in `dir`. Values use the
/// shortest decimal representation that parses back to the same `f64`.
pub fn write_economy(economy: &Economy, dir: &Path) -> Result<EconomyPaths> {
    write_parts(&economy.to_parts(), dir)
}

pub(crate) fn write_parts(parts: &EconomyParts, dir: &Path) -> Result<EconomyPaths> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths = EconomyPaths::in_dir(dir);
    write_square_matrix(&paths.io_table, &parts.codes, &parts.z)?;
    write_square_matrix(&paths.criticality, &parts.codes, &parts.criticality)?;

    let mut out = STATE_COLUMNS.join(",");
    out.push('\n');
    for (i, code) in parts.codes.iter().enumerate() {
        out.push_str(&format!(
            "{code},{},{},{},{},{},{}\n",
            parts.x0[i],
            parts.c0[i],
            parts.f0[i],
            parts.l0[i],
            parts.n_days_inventory[i],
            u8::from(parts.on_site[i])
        ));
    }
    fs::write(&paths.initial_states, out).map_err(|e| Error::io(&paths.initial_states, e))?;
    Ok(paths)
}
