use ndarray::Array1;

/// Hiring and firing toward the labor needed for `min(x_inp, d)`.
///
/// Sectors hire at rate `1/gamma_h` and fire at rate `1/gamma_f`. Sectors
/// flagged in `no_firing` never shed labor. The result is clamped to
/// `[0, (1 - eps_s) l0]`.
#[allow(clippy::too_many_arguments)]
pub fn adjust_labor(
    l: &Array1<f64>,
    l0: &Array1<f64>,
    x0: &Array1<f64>,
    x_cap: &Array1<f64>,
    x_inp: &Array1<f64>,
    d: &Array1<f64>,
    eps_s: &Array1<f64>,
    gamma_h: f64,
    gamma_f: f64,
    no_firing: &[bool],
    dt: f64,
) -> Array1<f64> {
    Array1::from_shape_fn(l.len(), |i| {
        let rate = labor_rate(i, l0, x0, x_cap, x_inp, d, gamma_h, gamma_f, no_firing);
        (l[i] + dt * rate).clamp(0.0, (1.0 - eps_s[i]) * l0[i])
    })
}

/// Instantaneous hiring (positive) or firing (negative) rate of sector `i`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn labor_rate(
    i: usize,
    l0: &Array1<f64>,
    x0: &Array1<f64>,
    x_cap: &Array1<f64>,
    x_inp: &Array1<f64>,
    d: &Array1<f64>,
    gamma_h: f64,
    gamma_f: f64,
    no_firing: &[bool],
) -> f64 {
    if x0[i] <= 0.0 {
        return 0.0;
    }
    let gap = l0[i] / x0[i] * (x_inp[i].min(d[i]) - x_cap[i]);
    if gap >= 0.0 {
        gap / gamma_h
    } else if no_firing[i] {
        0.0
    } else {
        gap / gamma_f
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn balanced_constraints_keep_labor() {
        let l0 = array![50.0];
        let x0 = array![100.0];
        let l = adjust_labor(
            &l0,
            &l0,
            &x0,
            &x0,
            &array![150.0],
            &x0,
            &array![0.0],
            56.0,
            28.0,
            &[false],
            1.0,
        );
        assert_eq!(l, l0);
    }

    #[test]
    fn demand_collapse_fires_at_firing_speed() {
        let l0 = array![50.0];
        let x0 = array![100.0];
        let l = adjust_labor(
            &l0,
            &l0,
            &x0,
            &x0,
            &array![f64::INFINITY],
            &array![50.0],
            &array![0.0],
            56.0,
            28.0,
            &[false],
            1.0,
        );
        assert!((l[0] - (50.0 - 50.0 * 0.5 / 28.0)).abs() < 1e-12);
        let kept = adjust_labor(
            &l0,
            &l0,
            &x0,
            &x0,
            &array![f64::INFINITY],
            &array![50.0],
            &array![0.0],
            56.0,
            28.0,
            &[true],
            1.0,
        );
        assert_eq!(kept, l0);
    }

    #[test]
    fn labor_is_clamped_to_shocked_maximum() {
        let l0 = array![50.0];
        let x0 = array![100.0];
        let l = adjust_labor(
            &l0,
            &l0,
            &x0,
            &array![75.0],
            &array![f64::INFINITY],
            &x0,
            &array![0.25],
            56.0,
            28.0,
            &[true],
            1.0,
        );
        assert_eq!(l[0], 37.5);
    }
}
