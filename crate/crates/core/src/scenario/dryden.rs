//! Dryden-style gust disturbance generator.

use nalgebra::{DVector, Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use super::rng::{NormalStream, Stream};
use crate::error::{Error, Result};

/// How the per-channel second-order gust model is stepped.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DrydenForm {
    /// `s ← M s + g w` with the continuous-time matrix `M` used directly.
    AsPrinted,
    /// Forward-Euler step of length `dt`: `s ← (I + dt M) s + √dt g w`.
    #[default]
    Euler,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrydenParams {
    /// Airspeed.
    #[serde(rename = "V")]
    pub v: f64,
    pub sigma: Vec<f64>,
    #[serde(rename = "Lg")]
    pub lg: Vec<f64>,
    #[serde(default)]
    pub form: DrydenForm,
    #[serde(default = "default_dt")]
    pub dt: f64,
}

fn default_dt() -> f64 {
    1.0
}

impl DrydenParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.v > 0.0) {
            return Err(Error::config("disturbance.V", "must be positive"));
        }
        if self.sigma.len() != self.lg.len() {
            return Err(Error::config("disturbance.Lg", "needs one entry per sigma"));
        }
        if self.lg.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::config("disturbance.Lg", "must be positive"));
        }
        if self.sigma.iter().any(|&s| !(s >= 0.0)) {
            return Err(Error::config("disturbance.sigma", "must be nonnegative"));
        }
        if !(self.dt > 0.0) {
            return Err(Error::config("disturbance.dt", "must be positive"));
        }
        Ok(())
    }

    pub fn channels(&self) -> usize {
        self.sigma.len()
    }

    /// Transition matrix and noise input of channel `i` under the configured form.
    pub fn channel_system(&self, i: usize) -> (Matrix2<f64>, Vector2<f64>) {
        let (v, l, s) = (self.v, self.lg[i], self.sigma[i]);
        let m = Matrix2::new(0.0, 1.0, -v * v / (l * l), -2.0 * v / l);
        let g = Vector2::new(s * (3.0 * v / l).sqrt(), (1.0 - 2.0 * 3f64.sqrt()) * s * (v / l).powf(1.5));
        match self.form {
            DrydenForm::AsPrinted => (m, g),
            DrydenForm::Euler => (Matrix2::identity() + m * self.dt, g * self.dt.sqrt()),
        }
    }
}

/// `k` samples of the gust disturbance, one `n_d`-vector per step, starting from rest.
/// Noise comes from the disturbance stream, drawn channel by channel within each step.
pub fn dryden_disturbance(params: &DrydenParams, k: usize, seed: u64) -> Result<Vec<DVector<f64>>> {
    params.validate()?;
    let nd = params.channels();
    let systems: Vec<_> = (0..nd).map(|i| params.channel_system(i)).collect();
    let mut states = vec![Vector2::zeros(); nd];
    let mut noise = NormalStream::new(seed, Stream::Disturbance);
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let mut d = DVector::zeros(nd);
        for (i, (m, g)) in systems.iter().enumerate() {
            states[i] = m * states[i] + g * noise.normal();
            d[i] = states[i][0];
        }
        out.push(d);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference(form: DrydenForm) -> DrydenParams {
        DrydenParams { v: 35.0, sigma: vec![0.5, 0.8], lg: vec![2500.0, 1500.0], form, dt: 1.0 }
    }

    fn autocorr(xs: &[f64], lag: usize) -> f64 {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
        let cov: f64 = (0..n - lag).map(|i| (xs[i] - mean) * (xs[i + lag] - mean)).sum();
        cov / var
    }

    #[test]
    fn zero_intensity_is_silent() {
        let mut p = reference(DrydenForm::Euler);
        p.sigma = vec![0.0, 0.0];
        for d in dryden_disturbance(&p, 200, 1).unwrap() {
            assert_eq!(d.amax(), 0.0);
        }
    }

    #[test]
    fn bounded_spread_in_both_forms() {
        for form in [DrydenForm::AsPrinted, DrydenForm::Euler] {
            let seq = dryden_disturbance(&reference(form), 1000, 4).unwrap();
            for ch in 0..2 {
                let xs: Vec<f64> = seq.iter().map(|d| d[ch]).collect();
                let mean = xs.iter().sum::<f64>() / xs.len() as f64;
                let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64).sqrt();
                assert!((0.01..=5.0).contains(&sd), "{form:?} channel {ch}: sd {sd}");
            }
        }
    }

    #[test]
    fn discretized_form_is_colored() {
        let p = reference(DrydenForm::Euler);
        for seed in 0..5 {
            let seq = dryden_disturbance(&p, 1000, seed).unwrap();
            assert_eq!(seq, dryden_disturbance(&p, 1000, seed).unwrap());
            for ch in 0..2 {
                let xs: Vec<f64> = seq.iter().map(|d| d[ch]).collect();
                assert!(autocorr(&xs, 1) > autocorr(&xs, 10), "seed {seed} channel {ch}");
            }
        }
    }

    #[test]
    fn printed_form_is_nearly_white() {
        // The printed recursion has eigenvalues near 0 and -0.03, so successive
        // samples are almost uncorrelated.
        let seq = dryden_disturbance(&reference(DrydenForm::AsPrinted), 20_000, 9).unwrap();
        let xs: Vec<f64> = seq.iter().map(|d| d[0]).collect();
        assert!(autocorr(&xs, 1).abs() < 0.05);
    }
}
