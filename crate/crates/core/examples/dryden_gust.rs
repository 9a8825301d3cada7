//! Gust disturbance generator: stationary spread and lag correlation of both
//! discretizations.

use dmae_core::scenario::{dryden_disturbance, DrydenForm, DrydenParams};

fn stats(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let lag1 = xs.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum::<f64>() / (n * var);
    (var.sqrt(), lag1)
}

fn main() -> dmae_core::Result<()> {
    for form in [DrydenForm::Euler, DrydenForm::AsPrinted] {
        let params = DrydenParams { v: 35.0, sigma: vec![0.5, 0.8], lg: vec![2500.0, 1500.0], form, dt: 1.0 };
        let seq = dryden_disturbance(&params, 20_000, 3)?;
        for ch in 0..2 {
            let xs: Vec<f64> = seq.iter().skip(1000).map(|d| d[ch]).collect();
            let (sd, lag1) = stats(&xs);
            println!("{form:?} channel {}: std {sd:.3}, lag-1 autocorrelation {lag1:.3}", ch + 1);
        }
    }
    Ok(())
}
