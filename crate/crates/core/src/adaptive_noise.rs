//! Innovation-based estimation of the disturbance random-walk covariance.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// The most recent `capacity` innovations of the fault filter.
#[derive(Clone, Debug, PartialEq)]
pub struct InnovationWindow {
    capacity: usize,
    entries: VecDeque<DVector<f64>>,
}

impl InnovationWindow {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "window capacity must be positive");
        InnovationWindow { capacity, entries: VecDeque::with_capacity(capacity) }
    }

    pub fn push(&mut self, gamma: DVector<f64>) {
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(gamma);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn iter(&self) -> impl Iterator<Item = &DVector<f64>> {
        self.entries.iter()
    }
}

/// Sample second moment of the held innovations; during warm-up the divisor is
/// the current count rather than the capacity.
pub fn innovation_cov_estimate(window: &InnovationWindow) -> Result<DMatrix<f64>> {
    let first = window
        .entries
        .front()
        .ok_or_else(|| Error::Numerical("innovation window is empty".into()))?;
    let m = first.len();
    let mut acc = DMatrix::zeros(m, m);
    for g in window.iter() {
        acc.ger(1.0, g, g, 1.0);
    }
    Ok(acc / window.len() as f64)
}

/// Diagonal `Qd` explaining the innovation excess over the modelled noise.
///
/// `q` is the process noise of the previous step; `e` the disturbance input
/// matrix of the previous step; `h`, `f`, `qf`, `r` belong to the current step.
#[allow(clippy::too_many_arguments)]
pub fn qd_update(
    c_hat: &DMatrix<f64>,
    h: &DMatrix<f64>,
    e: &DMatrix<f64>,
    q: &DMatrix<f64>,
    f: &DMatrix<f64>,
    qf: &DMatrix<f64>,
    r: &DMatrix<f64>,
    k: usize,
) -> Result<DMatrix<f64>> {
    let q_hat = c_hat - h * q * h.transpose() - f * qf * f.transpose() - r;
    let q_tilde = DMatrix::from_diagonal(&q_hat.diagonal().map(|v| v.max(0.0)));
    let h_inv = linalg::checked_inverse(h).ok_or_else(|| Error::Singular { what: "H".into(), step: k })?;
    let e_inv = linalg::checked_inverse(e).ok_or_else(|| Error::Singular { what: "E".into(), step: k })?;
    let t = &e_inv * &h_inv;
    let full = &t * q_tilde * t.transpose();
    Ok(DMatrix::from_diagonal(&full.diagonal().map(|v| v.max(0.0))))
}
