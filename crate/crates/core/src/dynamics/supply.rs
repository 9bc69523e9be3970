//! Production capacities and realized output.

use ndarray::{Array1, Array2, Zip};
use serde::{Deserialize, Serialize};

use crate::economy::CriticalitySets;

/// How input shortages constrain production.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductionFunction {
    /// Every input binds.
    Leontief,
    /// Critical and important inputs bind.
    StronglyCritical,
    /// Critical inputs bind; a shortage of an important input halves its effect.
    HalfCritical,
    /// Only critical inputs bind.
    WeaklyCritical,
    /// Inputs are perfect substitutes.
    Linear,
}

impl ProductionFunction {
    pub const ALL: [ProductionFunction; 5] = [
        ProductionFunction::Leontief,
        ProductionFunction::StronglyCritical,
        ProductionFunction::HalfCritical,
        ProductionFunction::WeaklyCritical,
        ProductionFunction::Linear,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProductionFunction::Leontief => "leontief",
            ProductionFunction::StronglyCritical => "strongly_critical",
            ProductionFunction::HalfCritical => "half_critical",
            ProductionFunction::WeaklyCritical => "weakly_critical",
            ProductionFunction::Linear => "linear",
        }
    }
}

impl std::fmt::Display for ProductionFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ProductionFunction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown production function {s:?}"))
    }
}

/// Output each sector can produce with the labor it employs. Labor above the
/// shocked maximum `(1 - eps_s) l0` is not usable.
pub fn labor_capacity(
    l: &Array1<f64>,
    l0: &Array1<f64>,
    x0: &Array1<f64>,
    eps_s: &Array1<f64>,
) -> Array1<f64> {
    Zip::from(l)
        .and(l0)
        .and(x0)
        .and(eps_s)
        .map_collect(|&l, &l0, &x0, &e| {
            if l0 > 0.0 {
                l.min((1.0 - e) * l0).max(0.0) / l0 * x0
            } else {
                0.0
            }
        })
}

/// Output each sector can produce from its input stocks. Inputs that are not
/// part of a sector's recipe (`A = 0`) never bind; a sector with no binding
/// inputs gets `f64::INFINITY`.
pub fn input_constrained_capacity(
    s: &Array2<f64>,
    a: &Array2<f64>,
    x0: &Array1<f64>,
    sets: &CriticalitySets,
    prod_fn: ProductionFunction,
) -> Array1<f64> {
    let n = x0.len();
    let ratio = |k: usize, i: usize| s[[k, i]] / a[[k, i]];
    let in_recipe = |k: &usize, i: usize| a[[*k, i]] > 0.0;
    Array1::from_shape_fn(n, |i| {
        let critical = sets.critical[i].iter().filter(|k| in_recipe(k, i));
        let important = sets.important[i].iter().filter(|k| in_recipe(k, i));
        match prod_fn {
            ProductionFunction::Leontief => (0..n)
                .filter(|k| in_recipe(k, i))
                .map(|k| ratio(k, i))
                .fold(f64::INFINITY, f64::min),
            ProductionFunction::StronglyCritical => critical
                .chain(important)
                .map(|&k| ratio(k, i))
                .fold(f64::INFINITY, f64::min),
            ProductionFunction::HalfCritical => {
                let c = critical.map(|&k| ratio(k, i)).fold(f64::INFINITY, f64::min);
                important
                    .map(|&k| 0.5 * (ratio(k, i) + x0[i]))
                    .fold(c, f64::min)
            }
            ProductionFunction::WeaklyCritical => {
                critical.map(|&k| ratio(k, i)).fold(f64::INFINITY, f64::min)
            }
            ProductionFunction::Linear => {
                let (mut stock, mut coef) = (0.0, 0.0);
                for k in (0..n).filter(|k| in_recipe(k, i)) {
                    stock += s[[k, i]];
                    coef += a[[k, i]];
                }
                if coef > 0.0 {
                    stock / coef
                } else {
                    f64::INFINITY
                }
            }
        }
    })
}

/// Output is the smallest of labor capacity, input capacity and demand.
pub fn realized_output(x_cap: &Array1<f64>, x_inp: &Array1<f64>, d: &Array1<f64>) -> Array1<f64> {
    Zip::from(x_cap)
        .and(x_inp)
        .and(d)
        .map_collect(|&c, &i, &d| c.min(i).min(d).max(0.0))
}
