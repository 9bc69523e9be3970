//! Dormand-Prince 5(4) embedded Runge-Kutta step.

use crate::error::Result;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

/// Fifth-order weights (equal to the last row of `A`).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];

const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

/// Outcome of one attempted step: the fifth-order solution and the scaled
/// RMS norm of the embedded error estimate (accept when `<= 1`).
pub(crate) struct StepResult {
    pub y: Vec<f64>,
    pub error: f64,
}

pub(crate) fn step<F>(f: &mut F, t: f64, y: &[f64], h: f64, tol: Tolerances) -> Result<StepResult>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    let n = y.len();
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
    let mut stage = vec![0.0; n];
    for s in 0..7 {
        stage.copy_from_slice(y);
        for (r, kr) in k.iter().enumerate() {
            let a = A[s][r];
            if a != 0.0 {
                for (v, kv) in stage.iter_mut().zip(kr) {
                    *v += h * a * kv;
                }
            }
        }
        k.push(f(t + C[s] * h, &stage)?);
    }
    // the last stage is evaluated at the fifth-order solution
    let y5 = stage;
    let mut sum = 0.0;
    for i in 0..n {
        let mut e = 0.0;
        for s in 0..7 {
            e += (B5[s] - B4[s]) * k[s][i];
        }
        let scale = tol.abs + tol.rel * y[i].abs().max(y5[i].abs());
        let r = h * e / scale;
        sum += r * r;
    }
    let error = if n == 0 { 0.0 } else { (sum / n as f64).sqrt() };
    Ok(StepResult { y: y5, error })
}

/// Step-size multiplier after an attempt with scaled error `error`.
pub(crate) fn step_factor(error: f64) -> f64 {
    if error == 0.0 {
        5.0
    } else {
        (0.9 * error.powf(-0.2)).clamp(0.2, 5.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_are_consistent() {
        assert!((B5.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((B4.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        for s in 1..7 {
            assert!((A[s].iter().sum::<f64>() - C[s]).abs() < 1e-14);
        }
    }

    #[test]
    fn exponential_decay_converges_at_fifth_order() {
        let tol = Tolerances {
            rel: 1e-8,
            abs: 1e-12,
        };
        let global_error = |steps: usize| {
            let mut f = |_t: f64, y: &[f64]| Ok(vec![-y[0]]);
            let h = 1.0 / steps as f64;
            let mut y = vec![1.0];
            for k in 0..steps {
                y = step(&mut f, k as f64 * h, &y, h, tol).unwrap().y;
            }
            (y[0] - (-1.0f64).exp()).abs()
        };
        let (coarse, fine) = (global_error(10), global_error(20));
        assert!(coarse < 2e-9);
        let order = (coarse / fine).log2();
        assert!(order > 4.7, "observed order {order}");
    }
}
