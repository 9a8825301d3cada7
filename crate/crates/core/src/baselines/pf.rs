use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kalman::{GaussianBelief, Partition};
use crate::linalg;
use crate::model::{build_fault_model, LtvModel};
use crate::scenario::rng::NormalStream;

#[derive(Clone, Debug, PartialEq)]
pub struct ParticleSet {
    pub particles: Vec<DVector<f64>>,
    /// Normalized importance weights.
    pub weights: Vec<f64>,
    pub partition: Partition,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PfStepInfo {
    pub resampled: bool,
    /// Every likelihood underflowed and the weights were reset to uniform.
    pub weights_reset: bool,
}

impl ParticleSet {
    /// `count` draws from a Gaussian belief, equally weighted.
    pub fn from_belief(belief: &GaussianBelief, count: usize, noise: &mut NormalStream) -> Self {
        let s = linalg::psd_sqrt(&belief.cov);
        let particles = (0..count).map(|_| &belief.mean + noise.correlated(&s)).collect();
        ParticleSet { particles, weights: vec![1.0 / count as f64; count], partition: belief.partition }
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn estimate(&self) -> DVector<f64> {
        let mut acc = DVector::zeros(self.partition.dim());
        for (p, w) in self.particles.iter().zip(&self.weights) {
            acc.axpy(*w, p, 1.0);
        }
        acc
    }

    /// Weighted sample covariance.
    pub fn covariance(&self) -> DMatrix<f64> {
        let mean = self.estimate();
        let n = mean.len();
        let mut acc = DMatrix::zeros(n, n);
        for (p, w) in self.particles.iter().zip(&self.weights) {
            let d = p - &mean;
            acc.ger(*w, &d, &d, 1.0);
        }
        acc
    }

    pub fn effective_sample_size(&self) -> f64 {
        1.0 / self.weights.iter().map(|w| w * w).sum::<f64>()
    }
}

/// Systematic resampling: one uniform offset `u0 ∈ [0, 1)` and evenly spaced pointers.
pub fn systematic_resample(weights: &[f64], u0: f64) -> Vec<usize> {
    let n = weights.len();
    let mut out = Vec::with_capacity(n);
    let mut cumulative = weights[0];
    let mut i = 0;
    for j in 0..n {
        let target = (u0 + j as f64) / n as f64;
        while cumulative < target && i < n - 1 {
            i += 1;
            cumulative += weights[i];
        }
        out.push(i);
    }
    out
}

/// Fault-channel covariance used by the particle filter: each diagonal entry of
/// `qf` raised to at least `floor` so particles keep moving when `qf = 0`.
pub fn pf_fault_noise(qf: &DMatrix<f64>, floor: f64) -> DMatrix<f64> {
    let mut out = qf.clone();
    for i in 0..out.nrows() {
        out[(i, i)] = out[(i, i)].max(floor);
    }
    out
}

/// Bootstrap particle filter step on the `[x; d; f]` random-walk model.
///
/// Particles are propagated with sampled process noise (skipped when
/// `u_prev` is `None`, i.e. at the first step), weighted by the Gaussian
/// measurement likelihood in the log domain, and resampled systematically when
/// the effective sample size drops below half the count.
#[allow(clippy::too_many_arguments)]
pub fn bootstrap_pf_step(
    ps: &ParticleSet,
    model: &LtvModel,
    qd: &DMatrix<f64>,
    qf: &DMatrix<f64>,
    u_prev: Option<&DVector<f64>>,
    y: &DVector<f64>,
    k: usize,
    noise: &mut NormalStream,
) -> Result<(ParticleSet, PfStepInfo)> {
    let n = ps.len();
    if n == 0 {
        return Err(Error::config("pf.particles", "particle set is empty"));
    }
    let mut particles = ps.particles.clone();
    if let Some(u) = u_prev {
        let kp = k.checked_sub(1).ok_or_else(|| Error::config("u_prev", "no prediction before step 0"))?;
        let m = build_fault_model(model, qd, qf, kp)?;
        let s = linalg::psd_sqrt(&m.qbar);
        let bu = model.known_input(u, kp)?;
        for p in particles.iter_mut() {
            let mut next = &m.abar * &*p + noise.correlated(&s);
            let mut head = next.rows_mut(0, bu.len());
            head += &bu;
            *p = next;
        }
    }

    let hbar = build_fault_model(model, qd, qf, k)?.hbar;
    let chol = model
        .r(k)
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite { what: "R".into() })?;
    let l = chol.l();
    let log_w: Vec<f64> = particles
        .iter()
        .zip(&ps.weights)
        .map(|(p, w)| {
            let r = y - &hbar * p;
            let z = l.solve_lower_triangular(&r).map_or(f64::INFINITY, |z| z.norm_squared());
            w.ln() - 0.5 * z
        })
        .collect();
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut info = PfStepInfo::default();
    let weights: Vec<f64> = if max.is_finite() {
        let raw: Vec<f64> = log_w.iter().map(|v| (v - max).exp()).collect();
        let total: f64 = raw.iter().sum();
        raw.iter().map(|v| v / total).collect()
    } else {
        log::warn!("particle likelihoods underflowed at step {k}; resetting weights to uniform");
        info.weights_reset = true;
        vec![1.0 / n as f64; n]
    };
    let mut out = ParticleSet { particles, weights, partition: ps.partition };

    if out.effective_sample_size() < n as f64 / 2.0 {
        let idx = systematic_resample(&out.weights, noise.uniform());
        out.particles = idx.iter().map(|&i| out.particles[i].clone()).collect();
        out.weights = vec![1.0 / n as f64; n];
        info.resampled = true;
    }
    Ok((out, info))
}
