use ndarray::{Array1, Array2, Zip};

/// Adds deliveries and removes inputs used in production over `dt` days,
/// never letting a stock go negative.
pub fn update_inventories(
    s_prev: &Array2<f64>,
    o: &Array2<f64>,
    a: &Array2<f64>,
    x: &Array1<f64>,
    dt: f64,
) -> Array2<f64> {
    let mut s = s_prev.clone();
    Zip::indexed(&mut s)
        .and(o)
        .and(a)
        .for_each(|(_, j), s, &o, &a| *s = (*s + dt * (o - a * x[j])).max(0.0));
    s
}
