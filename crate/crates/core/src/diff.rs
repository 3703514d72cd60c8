//! Central finite differences used whenever analytic derivatives are absent.

/// Default step: `1e-6 · max(1, |q|∞)`.
pub fn step_for(q: &[f64]) -> f64 {
    let scale = q.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    1e-6 * scale
}

/// Central-difference gradient of a scalar function.
pub fn gradient(f: impl Fn(&[f64]) -> f64, q: &[f64]) -> Vec<f64> {
    let h = step_for(q);
    let mut x = q.to_vec();
    (0..q.len())
        .map(|i| {
            x[i] = q[i] + h;
            let fp = f(&x);
            x[i] = q[i] - h;
            let fm = f(&x);
            x[i] = q[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// Central-difference Jacobian `J[i][j] = ∂f_j/∂q_i` of a vector function.
///
/// Rows are indexed by the differentiation variable, which is the layout
/// `magnetic_form` needs.
pub fn jacobian_rows(f: impl Fn(&[f64]) -> Vec<f64>, q: &[f64]) -> Vec<Vec<f64>> {
    let h = step_for(q);
    let mut x = q.to_vec();
    (0..q.len())
        .map(|i| {
            x[i] = q[i] + h;
            let fp = f(&x);
            x[i] = q[i] - h;
            let fm = f(&x);
            x[i] = q[i];
            fp.iter()
                .zip(&fm)
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect()
        })
        .collect()
}

/// Fourth-order central difference of `f` along coordinate `i` with step `h`.
pub fn partial4(f: impl Fn(&[f64]) -> f64, q: &[f64], i: usize, h: f64) -> f64 {
    let mut x = q.to_vec();
    let mut at = |s: f64| {
        x[i] = q[i] + s * h;
        f(&x)
    };
    let (p1, m1, p2, m2) = (at(1.0), at(-1.0), at(2.0), at(-2.0));
    (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h)
}
