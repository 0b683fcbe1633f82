//! Least-squares fits for flop scaling.

/// Ordinary least squares of `y` on `x`: `(slope, intercept, r²)`.
pub fn linear(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}

/// Log-log power law `y ≈ c xᵉ`: `(e, r²)`.
pub fn power_law(x: &[f64], y: &[f64]) -> (f64, f64) {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (e, _, r2) = linear(&lx, &ly);
    (e, r2)
}

/// R² of `log y = log c + log model` with the slope held at one.
pub fn proportional_r2(model: &[f64], y: &[f64]) -> f64 {
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let resid: Vec<f64> = ly.iter().zip(model).map(|(a, m)| a - m.ln()).collect();
    let mr = resid.iter().sum::<f64>() / resid.len() as f64;
    let my = ly.iter().sum::<f64>() / ly.len() as f64;
    let ss_res: f64 = resid.iter().map(|r| (r - mr).powi(2)).sum();
    let ss_tot: f64 = ly.iter().map(|v| (v - my).powi(2)).sum();
    if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot }
}
