//! Goodness-of-fit measures between model and data.

use chrono::NaiveDate;

use super::dataset::Quarter;
use crate::error::{Error, Result};

/// Mean of the values whose date falls in each quarter; `None` when a
/// quarter has no values.
pub fn quarterly_average(series: &[(NaiveDate, f64)], quarters: &[Quarter]) -> Vec<Option<f64>> {
    quarters
        .iter()
        .map(|&q| {
            let (sum, n) = series
                .iter()
                .filter(|(d, _)| Quarter::of(*d) == q)
                .fold((0.0, 0usize), |(s, n), (_, v)| (s + v, n + 1));
            (n > 0).then(|| sum / n as f64)
        })
        .collect()
}

/// Weighted absolute and signed deviations of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviation {
    /// `sum_i w_i / W * |data_i - model_i|`
    pub aad: f64,
    /// `sum_i w_i / W * (model_i - data_i)`; negative when the model
    /// predicts a deeper contraction than observed.
    pub ad: f64,
}

pub fn weighted_deviation(model: &[f64], data: &[f64], weights: &[f64]) -> Result<Deviation> {
    if model.len() != data.len() || model.len() != weights.len() {
        return Err(Error::DimensionMismatch(format!(
            "model {}, data {}, weights {}",
            model.len(),
            data.len(),
            weights.len()
        )));
    }
    if model.is_empty() {
        return Err(Error::Scoring("no observations to compare".into()));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::Scoring(format!("invalid weight {w}")));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::Scoring("weights sum to zero".into()));
    }
    let mut aad = 0.0;
    let mut ad = 0.0;
    for ((m, d), w) in model.iter().zip(data).zip(weights) {
        let share = w / total;
        aad += share * (d - m).abs();
        ad += share * (m - d);
    }
    Ok(Deviation { aad, ad })
}

/// Value-weighted absolute deviation alone.
pub fn aad_vw(model: &[f64], data: &[f64], weights: &[f64]) -> Result<f64> {
    weighted_deviation(model, data, weights).map(|d| d.aad)
}

/// Mean AAD over the available (indicator, quarter) cells.
pub fn total_aad(cells: &[f64]) -> Result<f64> {
    if cells.is_empty() {
        return Err(Error::Scoring("no cells to average".into()));
    }
    Ok(cells.iter().sum::<f64>() / cells.len() as f64)
}

/// Rounds a score to nine decimals so ties between grid points are decided
/// identically on every platform.
pub fn round_score(v: f64) -> f64 {
    format!("{v:.9}").parse().expect("formatted float parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sector_deviation() {
        let d = weighted_deviation(&[-10.0], &[-7.0], &[5.0]).unwrap();
        assert_eq!(d.aad, 3.0);
        assert_eq!(d.ad, -3.0);
    }

    #[test]
    fn weights_are_normalised() {
        let a = aad_vw(&[1.0, 2.0], &[0.0, 0.0], &[1.0, 3.0]).unwrap();
        let b = aad_vw(&[1.0, 2.0], &[0.0, 0.0], &[10.0, 30.0]).unwrap();
        assert!((a - 1.75).abs() < 1e-15);
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(aad_vw(&[1.0], &[1.0, 2.0], &[1.0]).is_err());
        assert!(aad_vw(&[], &[], &[]).is_err());
        assert!(aad_vw(&[1.0], &[1.0], &[0.0]).is_err());
        assert!(aad_vw(&[1.0], &[1.0], &[-1.0]).is_err());
        assert!(total_aad(&[]).is_err());
    }

    #[test]
    fn quarterly_means() {
        let d = |s: &str| s.parse::<NaiveDate>().unwrap();
        let series = [
            (d("2020-04-01"), 1.0),
            (d("2020-06-30"), 3.0),
            (d("2020-07-01"), 10.0),
        ];
        let qs = [
            Quarter::new(2020, 2),
            Quarter::new(2020, 3),
            Quarter::new(2020, 4),
        ];
        assert_eq!(
            quarterly_average(&series, &qs),
            vec![Some(2.0), Some(10.0), None]
        );
    }

    #[test]
    fn rounding_is_stable() {
        assert_eq!(round_score(1.0000000004), 1.0);
        assert_eq!(round_score(0.1234567896), 0.12345679);
    }
}
