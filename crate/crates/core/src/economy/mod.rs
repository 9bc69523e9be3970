//! Static description of the production network.
//!
//! An [`Economy`] bundles the input-output table `Z` (supplier row `i`,
//! buyer column `j`), the pre-shock final demand and labor compensation
//! vectors, the inventory targets and the input-criticality ratings. It is
//! validated once on construction and immutable afterwards.

mod io;

use std::collections::HashMap;

use ndarray::{Array1, Array2, Axis};

use crate::error::{Error, Result, Violation};

pub use io::{load_economy, read_economy_parts, write_economy, EconomyPaths};

/// Relative tolerance on `x0 = sum_j Z_ij + c0 + f0` used unless overridden.
pub const DEFAULT_IDENTITY_TOLERANCE: f64 = 1e-6;

/// Bijection between sector codes and matrix positions.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorIndex {
    codes: Vec<String>,
    positions: HashMap<String, usize>,
}

impl SectorIndex {
    pub fn new<I, S>(codes: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let codes: Vec<String> = codes.into_iter().map(Into::into).collect();
        let mut positions = HashMap::with_capacity(codes.len());
        for (i, code) in codes.iter().enumerate() {
            if code.trim().is_empty() {
                return Err(Error::InvalidParams(format!(
                    "empty sector code at position {i}"
                )));
            }
            if positions.insert(code.clone(), i).is_some() {
                return Err(Error::InvalidParams(format!(
                    "duplicate sector code {code}"
                )));
            }
        }
        Ok(Self { codes, positions })
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn code(&self, position: usize) -> &str {
        &self.codes[position]
    }

    pub fn position(&self, code: &str) -> Option<usize> {
        self.positions.get(code).copied()
    }

    pub fn codes(&self) -> &[String] {
        &self.codes
    }
}

/// Raw, unvalidated economy data as read from disk or produced by a generator.
#[derive(Debug, Clone)]
pub struct EconomyParts {
    pub codes: Vec<String>,
    pub z: Array2<f64>,
    pub x0: Array1<f64>,
    pub c0: Array1<f64>,
    pub f0: Array1<f64>,
    pub l0: Array1<f64>,
    pub n_days_inventory: Array1<f64>,
    pub criticality: Array2<f64>,
    pub on_site: Vec<bool>,
}

/// Outcome of running every economy-data check.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct Economy {
    sectors: SectorIndex,
    z: Array2<f64>,
    a: Array2<f64>,
    x0: Array1<f64>,
    c0: Array1<f64>,
    f0: Array1<f64>,
    l0: Array1<f64>,
    n_days_inventory: Array1<f64>,
    criticality: Array2<f64>,
    on_site: Vec<bool>,
}

fn is_rating(v: f64) -> bool {
    v == 0.0 || v == 0.5 || v == 1.0
}

/// Runs all checks on `parts`. Dimension problems are reported as violations
/// and stop further checks, since nothing else can be indexed safely.
pub fn validate_parts(parts: &EconomyParts, identity_tolerance: f64) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = parts.codes.len();
    let violation = |sector: Option<&str>, message: String| Violation {
        sector: sector.map(str::to_owned),
        message,
    };

    if n == 0 {
        report
            .violations
            .push(violation(None, "economy has no sectors".into()));
        return report;
    }
    let vectors = [
        ("x0", parts.x0.len()),
        ("c0", parts.c0.len()),
        ("f0", parts.f0.len()),
        ("l0", parts.l0.len()),
        ("n_days", parts.n_days_inventory.len()),
        ("on_site", parts.on_site.len()),
    ];
    for (name, len) in vectors {
        if len != n {
            report.violations.push(violation(
                None,
                format!("{name} has length {len}, expected {n}"),
            ));
        }
    }
    for (name, m) in [("Z", &parts.z), ("criticality", &parts.criticality)] {
        if m.dim() != (n, n) {
            report.violations.push(violation(
                None,
                format!("{name} has shape {:?}, expected ({n}, {n})", m.dim()),
            ));
        }
    }
    if let Err(e) = SectorIndex::new(parts.codes.iter().cloned()) {
        report.violations.push(violation(None, e.to_string()));
    }
    if !report.violations.is_empty() {
        return report;
    }

    for i in 0..n {
        let code = parts.codes[i].as_str();
        for (name, v) in [
            ("x0", parts.x0[i]),
            ("c0", parts.c0[i]),
            ("f0", parts.f0[i]),
            ("l0", parts.l0[i]),
            ("n_days", parts.n_days_inventory[i]),
        ] {
            if !v.is_finite() || v < 0.0 {
                report.violations.push(violation(
                    Some(code),
                    format!("{name} = {v} is not a nonnegative number"),
                ));
            }
        }
        for j in 0..n {
            let zij = parts.z[[i, j]];
            if !zij.is_finite() || zij < 0.0 {
                report.violations.push(violation(
                    Some(code),
                    format!(
                        "Z[{code}][{}] = {zij} is not a nonnegative number",
                        parts.codes[j]
                    ),
                ));
            }
            let r = parts.criticality[[i, j]];
            if !is_rating(r) {
                report.violations.push(violation(
                    Some(code),
                    format!(
                        "criticality of input {code} for buyer {} is {r}, expected 0, 0.5 or 1",
                        parts.codes[j]
                    ),
                ));
            }
        }
    }
    if !report.violations.is_empty() {
        return report;
    }

    for i in 0..n {
        let code = parts.codes[i].as_str();
        let row: f64 = parts.z.row(i).sum();
        let rhs = row + parts.c0[i] + parts.f0[i];
        let rel = (parts.x0[i] - rhs).abs() / parts.x0[i].max(1.0);
        if rel > identity_tolerance {
            report.violations.push(violation(
                Some(code),
                format!(
                    "accounting identity violated: x0 = {} but sum_j Z + c0 + f0 = {} (relative error {rel:.3e})",
                    parts.x0[i], rhs
                ),
            ));
        }
        if parts.x0[i] == 0.0 {
            let col: f64 = parts.z.column(i).sum();
            if col > 0.0 {
                report.violations.push(violation(
                    Some(code),
                    format!(
                        "accounting identity violated: x0 = 0 but sector purchases {col} of inputs"
                    ),
                ));
            }
        } else {
            let cost_share = parts.z.column(i).sum() / parts.x0[i];
            if cost_share > 1.0 + 1e-9 {
                report.warnings.push(violation(
                    Some(code),
                    format!("intermediate cost share {cost_share:.6} exceeds 1"),
                ));
            }
        }
    }
    report
}

impl Economy {
    /// Validates `parts` with the default identity tolerance.
    pub fn new(parts: EconomyParts) -> Result<Self> {
        Self::with_tolerance(parts, DEFAULT_IDENTITY_TOLERANCE)
    }

    pub fn with_tolerance(parts: EconomyParts, identity_tolerance: f64) -> Result<Self> {
        let report = validate_parts(&parts, identity_tolerance);
        if !report.is_clean() {
            return Err(Error::Validation(report.violations));
        }
        for w in &report.warnings {
            log::warn!("{w}");
        }
        let sectors = SectorIndex::new(parts.codes)?;
        let n = sectors.len();
        let mut a = Array2::zeros((n, n));
        for j in 0..n {
            if parts.x0[j] > 0.0 {
                for i in 0..n {
                    a[[i, j]] = parts.z[[i, j]] / parts.x0[j];
                }
            }
        }
        Ok(Self {
            sectors,
            z: parts.z,
            a,
            x0: parts.x0,
            c0: parts.c0,
            f0: parts.f0,
            l0: parts.l0,
            n_days_inventory: parts.n_days_inventory,
            criticality: parts.criticality,
            on_site: parts.on_site,
        })
    }

    pub fn n_sectors(&self) -> usize {
        self.sectors.len()
    }

    pub fn sectors(&self) -> &SectorIndex {
        &self.sectors
    }

    pub fn z(&self) -> &Array2<f64> {
        &self.z
    }

    /// Technical coefficients `A_ij = Z_ij / x0_j`, zero for columns with `x0_j = 0`.
    pub fn a(&self) -> &Array2<f64> {
        &self.a
    }

    pub fn x0(&self) -> &Array1<f64> {
        &self.x0
    }

    pub fn c0(&self) -> &Array1<f64> {
        &self.c0
    }

    pub fn f0(&self) -> &Array1<f64> {
        &self.f0
    }

    pub fn l0(&self) -> &Array1<f64> {
        &self.l0
    }

    pub fn n_days_inventory(&self) -> &Array1<f64> {
        &self.n_days_inventory
    }

    pub fn criticality(&self) -> &Array2<f64> {
        &self.criticality
    }

    pub fn on_site(&self) -> &[bool] {
        &self.on_site
    }

    /// Intermediate sales of each sector, `sum_j Z_ij`.
    pub fn intermediate_sales(&self) -> Array1<f64> {
        self.z.sum_axis(Axis(1))
    }

    pub fn to_parts(&self) -> EconomyParts {
        EconomyParts {
            codes: self.sectors.codes().to_vec(),
            z: self.z.clone(),
            x0: self.x0.clone(),
            c0: self.c0.clone(),
            f0: self.f0.clone(),
            l0: self.l0.clone(),
            n_days_inventory: self.n_days_inventory.clone(),
            criticality: self.criticality.clone(),
            on_site: self.on_site.clone(),
        }
    }
}

/// Per-buyer sets of critical (rated 1) and important (rated 0.5) suppliers.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalitySets {
    pub critical: Vec<Vec<usize>>,
    pub important: Vec<Vec<usize>>,
}

impl CriticalitySets {
    pub fn from_matrix(ratings: &Array2<f64>, sectors: &SectorIndex) -> Result<Self> {
        let n = ratings.nrows();
        if ratings.ncols() != n || sectors.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "criticality matrix {:?} for {} sectors",
                ratings.dim(),
                sectors.len()
            )));
        }
        let mut critical = vec![Vec::new(); n];
        let mut important = vec![Vec::new(); n];
        for buyer in 0..n {
            for supplier in 0..n {
                let value = ratings[[supplier, buyer]];
                if value == 1.0 {
                    critical[buyer].push(supplier);
                } else if value == 0.5 {
                    important[buyer].push(supplier);
                } else if value != 0.0 {
                    return Err(Error::InvalidCriticality {
                        supplier: sectors.code(supplier).to_owned(),
                        buyer: sectors.code(buyer).to_owned(),
                        value,
                    });
                }
            }
        }
        Ok(Self {
            critical,
            important,
        })
    }
}

pub fn derive_criticality_sets(economy: &Economy) -> Result<CriticalitySets> {
    CriticalitySets::from_matrix(economy.criticality(), economy.sectors())
}

/// Target inventories at equilibrium: `S0_ij = n_j * Z_ij`.
pub fn initial_inventories(economy: &Economy) -> Array2<f64> {
    let mut s = economy.z().clone();
    for (mut col, n) in s.columns_mut().into_iter().zip(economy.n_days_inventory()) {
        col.mapv_inplace(|z| z * n);
    }
    s
}
