use ndarray::{Array1, Array2, Axis};

use crate::error::{Error, Result};

/// Realized deliveries to households, exogenous demand and other sectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub c: Array1<f64>,
    pub f: Array1<f64>,
    pub o: Array2<f64>,
}

/// Splits each sector's output across its customers.
pub trait Rationing: Send + Sync {
    fn allocate(
        &self,
        x: &Array1<f64>,
        d: &Array1<f64>,
        c_d: &Array1<f64>,
        f_d: &Array1<f64>,
        o_d: &Array2<f64>,
    ) -> Result<Allocation>;
}

/// Every customer of sector `i` receives the same fraction `x_i / d_i` of
/// what it asked for.
#[derive(Debug, Clone, Copy, Default)]
pub struct Proportional;

impl Rationing for Proportional {
    fn allocate(
        &self,
        x: &Array1<f64>,
        d: &Array1<f64>,
        c_d: &Array1<f64>,
        f_d: &Array1<f64>,
        o_d: &Array2<f64>,
    ) -> Result<Allocation> {
        ration(x, d, c_d, f_d, o_d)
    }
}

pub fn ration(
    x: &Array1<f64>,
    d: &Array1<f64>,
    c_d: &Array1<f64>,
    f_d: &Array1<f64>,
    o_d: &Array2<f64>,
) -> Result<Allocation> {
    let negative = x
        .iter()
        .chain(d)
        .chain(c_d)
        .chain(f_d)
        .chain(o_d)
        .any(|&v| !(v >= 0.0));
    if negative {
        return Err(Error::Domain("rationing inputs must be nonnegative".into()));
    }
    let fill = ndarray::Zip::from(x)
        .and(d)
        .map_collect(|&x, &d| if d > 0.0 { x / d } else { 0.0 });
    let o = o_d * &fill.view().insert_axis(Axis(1));
    Ok(Allocation {
        c: c_d * &fill,
        f: f_d * &fill,
        o,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn no_rationing_when_output_meets_demand() {
        let o_d = array![[10.0, 20.0], [5.0, 5.0]];
        let c_d = array![30.0, 40.0];
        let f_d = array![40.0, 10.0];
        let d = array![100.0, 60.0];
        let a = ration(&d, &d, &c_d, &f_d, &o_d).unwrap();
        assert_eq!((a.c, a.f, a.o), (c_d, f_d, o_d));
    }

    #[test]
    fn shortfall_is_shared_proportionally() {
        let a = ration(
            &array![80.0],
            &array![100.0],
            &array![30.0],
            &array![20.0],
            &array![[50.0]],
        )
        .unwrap();
        assert_eq!(a.c[0], 24.0);
        assert_eq!(a.f[0], 16.0);
        assert_eq!(a.o[[0, 0]], 40.0);
    }

    #[test]
    fn zero_demand_gets_nothing() {
        let a = ration(
            &array![0.0],
            &array![0.0],
            &array![0.0],
            &array![0.0],
            &array![[0.0]],
        )
        .unwrap();
        assert_eq!(a.c[0] + a.f[0] + a.o[[0, 0]], 0.0);
        assert!(ration(
            &array![-1.0],
            &array![1.0],
            &array![1.0],
            &array![0.0],
            &array![[0.0]]
        )
        .is_err());
    }
}
