//! Demand formation: household preferences and aggregate consumption,
//! permanent-income expectations, and intermediate orders.

use ndarray::{Array1, Array2, Zip};

use crate::error::{Error, Result};

/// Household preference shares after a demand shock, renormalized to sum to
/// one. When every good is fully shocked the baseline shares are returned.
pub fn household_preferences(theta0: &Array1<f64>, eps_d: &Array1<f64>) -> Array1<f64> {
    let mut theta = Zip::from(theta0)
        .and(eps_d)
        .map_collect(|&t0, &e| (1.0 - e) * t0);
    let total = theta.sum();
    if total > 0.0 {
        theta /= total;
        theta
    } else {
        log::warn!("household demand fully shocked for every good; keeping baseline preferences");
        theta0.clone()
    }
}

/// Share of household spending lost to the demand shock and not redirected
/// to other goods.
pub fn aggregate_demand_reduction(theta0: &Array1<f64>, eps_d: &Array1<f64>, delta_s: f64) -> f64 {
    let retained: f64 = theta0.iter().zip(eps_d).map(|(t, e)| t * (1.0 - e)).sum();
    delta_s * (1.0 - retained)
}

/// Labor income after government compensation of a fraction `b` of losses.
pub fn compensated_labor_income(l_now: f64, l_baseline: f64, b: f64) -> f64 {
    l_now + b * (l_baseline - l_now).max(0.0)
}

/// One update of the permanent-income expectation.
///
/// `zeta` is the expected income as a fraction of baseline. It stays at one
/// before the pandemic; once it starts the caller resets it to `zeta_l` and
/// it then relaxes toward `1 - (1 - zeta_l) / l_share`. Returns
/// `(l_perm, zeta)`.
pub fn permanent_income(
    prev_zeta: f64,
    rho: f64,
    zeta_l: f64,
    l_share: f64,
    l_baseline: f64,
    in_pandemic: bool,
) -> (f64, f64) {
    if !in_pandemic {
        return (l_baseline, 1.0);
    }
    let zeta = 1.0 - rho + rho * prev_zeta - (1.0 - rho) * (1.0 - zeta_l) / l_share;
    (zeta * l_baseline, zeta)
}

/// Desired aggregate household consumption, a geometric blend of last
/// period's value with current and permanent income, cut by the aggregate
/// demand reduction.
pub fn aggregate_consumption(
    prev: f64,
    eps_tilde_d: f64,
    rho: f64,
    m: f64,
    l_comp: f64,
    l_perm: f64,
) -> Result<f64> {
    for (name, v) in [
        ("previous consumption", prev),
        ("compensated income", m * l_comp),
        ("permanent income", m * l_perm),
    ] {
        if !(v > 0.0) {
            return Err(Error::Domain(format!("{name} must be positive, got {v}")));
        }
    }
    let half = (1.0 - rho) / 2.0;
    let log_c = rho * prev.ln() + half * (m * l_comp).ln() + half * (m * l_perm).ln();
    Ok((1.0 - eps_tilde_d * (1.0 - rho)) * log_c.exp())
}

/// Orders placed by each buyer `j` with each supplier `i`: the inputs needed
/// for expected demand plus a share `1/tau` of the inventory gap.
pub fn intermediate_demand(
    a: &Array2<f64>,
    expected_demand: &Array1<f64>,
    s_target: &Array2<f64>,
    s: &Array2<f64>,
    tau: f64,
) -> Array2<f64> {
    let mut o = Array2::zeros(a.raw_dim());
    Zip::indexed(&mut o)
        .and(a)
        .and(s_target)
        .and(s)
        .for_each(|(_, j), o, &a, &target, &s| {
            *o = (a * expected_demand[j] + (target - s) / tau).max(0.0);
        });
    o
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn preferences_identity_without_shock() {
        let theta0 = array![0.3, 0.7];
        assert_eq!(household_preferences(&theta0, &array![0.0, 0.0]), theta0);
    }

    #[test]
    fn preferences_move_to_unshocked_good() {
        let theta = household_preferences(&array![0.5, 0.5], &array![1.0, 0.0]);
        assert_eq!(theta, array![0.0, 1.0]);
        let theta = household_preferences(&array![0.3, 0.7], &array![0.5, 0.0]);
        assert!((theta[0] - 0.15 / 0.85).abs() < 1e-15);
        assert!((theta[1] - 0.7 / 0.85).abs() < 1e-15);
        assert!((theta.sum() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn preferences_fall_back_when_everything_is_shocked() {
        let theta0 = array![0.4, 0.6];
        assert_eq!(household_preferences(&theta0, &array![1.0, 1.0]), theta0);
    }

    #[test]
    fn demand_reduction_examples() {
        let theta0 = array![0.5, 0.5];
        assert_eq!(
            aggregate_demand_reduction(&theta0, &array![0.0, 0.0], 0.8),
            0.0
        );
        assert_eq!(
            aggregate_demand_reduction(&theta0, &array![0.8, 0.3], 0.0),
            0.0
        );
        assert!((aggregate_demand_reduction(&theta0, &array![0.8, 0.0], 1.0) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn compensation_examples() {
        assert_eq!(compensated_labor_income(80.0, 100.0, 1.0), 100.0);
        assert_eq!(compensated_labor_income(80.0, 100.0, 0.0), 80.0);
        assert!((compensated_labor_income(80.0, 100.0, 0.7) - 94.0).abs() < 1e-12);
        assert_eq!(compensated_labor_income(110.0, 100.0, 0.7), 110.0);
    }

    #[test]
    fn permanent_income_fixed_points() {
        let rho = 1.0 - 0.4 / 90.0;
        assert_eq!(
            permanent_income(1.0, rho, 0.75, 1.0, 200.0, false),
            (200.0, 1.0)
        );
        let (lp, z) = permanent_income(1.0, rho, 1.0, 0.6, 200.0, true);
        assert_eq!((lp, z), (200.0, 1.0));
        let mut zeta = 0.75;
        for _ in 0..5000 {
            zeta = permanent_income(zeta, rho, 0.75, 1.0, 1.0, true).1;
        }
        assert!((zeta - 0.75).abs() < 1e-12);
    }

    #[test]
    fn consumption_fixed_point_and_persistence() {
        let c = aggregate_consumption(86.0, 0.0, 0.99, 0.86, 100.0, 100.0).unwrap();
        assert!((c - 86.0).abs() < 1e-12);
        let c = aggregate_consumption(50.0, 0.3, 1.0, 0.86, 100.0, 70.0).unwrap();
        assert!((c - 50.0).abs() < 1e-12);
        assert!(aggregate_consumption(50.0, 0.0, 0.9, 0.86, 0.0, 70.0).is_err());
    }

    #[test]
    fn orders_close_inventory_gap() {
        let a = array![[20.0 / 110.0, 0.3], [40.0 / 110.0, 0.1]];
        let z = array![[20.0, 30.0], [40.0, 10.0]];
        let target = array![[200.0, 150.0], [400.0, 50.0]];
        let d = array![110.0, 100.0];
        let o = intermediate_demand(&a, &d, &target, &target, 14.0);
        for (o, z) in o.iter().zip(&z) {
            assert!((o - z).abs() < 1e-12);
        }
        let mut s = target.clone();
        s[[0, 1]] = 140.0;
        let o = intermediate_demand(&a, &d, &target, &s, 14.0);
        assert!((o[[0, 1]] - (30.0 + 10.0 / 14.0)).abs() < 1e-12);
        s[[0, 1]] = 150.0 + 14.0 * 30.0 + 1.0;
        let o = intermediate_demand(&a, &d, &target, &s, 14.0);
        assert_eq!(o[[0, 1]], 0.0);
    }
}
