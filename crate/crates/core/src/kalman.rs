//! Predict/update steps and the Gaussian innovation log-likelihood.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Block layout of an augmented state `[x; d; f]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub nx: usize,
    pub nd: usize,
    pub nf: usize,
}

impl Partition {
    pub fn new(nx: usize, nd: usize, nf: usize) -> Self {
        Partition { nx, nd, nf }
    }
    pub fn dim(&self) -> usize {
        self.nx + self.nd + self.nf
    }
    pub fn x(&self) -> Range<usize> {
        0..self.nx
    }
    pub fn d(&self) -> Range<usize> {
        self.nx..self.nx + self.nd
    }
    pub fn f(&self) -> Range<usize> {
        self.nx + self.nd..self.dim()
    }
    /// The `[x; d]` prefix.
    pub fn xd(&self) -> Range<usize> {
        0..self.nx + self.nd
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianBelief {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
    pub partition: Partition,
}

impl GaussianBelief {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>, partition: Partition) -> Result<Self> {
        let dim = partition.dim();
        if mean.len() != dim {
            return Err(Error::dim("belief mean", dim, mean.len()));
        }
        if cov.shape() != (dim, dim) {
            return Err(Error::dim("belief covariance", format!("{dim}x{dim}"), format!("{:?}", cov.shape())));
        }
        Ok(GaussianBelief { mean, cov, partition })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn block_mean(&self, r: Range<usize>) -> DVector<f64> {
        self.mean.rows(r.start, r.len()).clone_owned()
    }

    pub fn block_cov(&self, r: Range<usize>, c: Range<usize>) -> DMatrix<f64> {
        self.cov.view((r.start, c.start), (r.len(), c.len())).clone_owned()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.cov)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KalmanStepOutput {
    pub posterior: GaussianBelief,
    pub innovation: DVector<f64>,
    pub innovation_cov: DMatrix<f64>,
    /// Rows follow the belief partition: `K^x`, `K^d`, `K^f`.
    pub gain: DMatrix<f64>,
}

/// Time update. `known` is added to the mean's leading entries (typically `B u` on the x block).
pub fn predict_with_input(
    belief: &GaussianBelief,
    abar: &DMatrix<f64>,
    qbar: &DMatrix<f64>,
    known: Option<&DVector<f64>>,
) -> GaussianBelief {
    let mut mean = abar * &belief.mean;
    if let Some(bu) = known {
        let mut head = mean.rows_mut(0, bu.len());
        head += bu;
    }
    let mut cov = abar * &belief.cov * abar.transpose() + qbar;
    linalg::symmetrize_in_place(&mut cov);
    GaussianBelief { mean, cov, partition: belief.partition }
}

pub fn predict(belief: &GaussianBelief, abar: &DMatrix<f64>, qbar: &DMatrix<f64>) -> GaussianBelief {
    predict_with_input(belief, abar, qbar, None)
}

/// Measurement update in Joseph form. `k` only labels errors.
pub fn update(
    belief: &GaussianBelief,
    y: &DVector<f64>,
    hbar: &DMatrix<f64>,
    r: &DMatrix<f64>,
    k: usize,
) -> Result<KalmanStepOutput> {
    if y.len() != hbar.nrows() {
        return Err(Error::dim("measurement", hbar.nrows(), y.len()));
    }
    let innovation = y - hbar * &belief.mean;
    let ph_t = &belief.cov * hbar.transpose();
    let mut c = hbar * &ph_t + r;
    linalg::symmetrize_in_place(&mut c);
    let chol = c.clone().cholesky().ok_or_else(|| Error::Singular {
        what: "innovation covariance".into(),
        step: k,
    })?;
    // K = P Hᵀ C⁻¹, solved as C Kᵀ = H P.
    let gain = chol.solve(&ph_t.transpose()).transpose();
    let mean = &belief.mean + &gain * &innovation;
    let dim = belief.dim();
    let j = DMatrix::identity(dim, dim) - &gain * hbar;
    let mut cov = &j * &belief.cov * j.transpose() + &gain * r * gain.transpose();
    linalg::symmetrize_in_place(&mut cov);
    Ok(KalmanStepOutput {
        posterior: GaussianBelief { mean, cov, partition: belief.partition },
        innovation,
        innovation_cov: c,
        gain,
    })
}

/// `ln N(γ; 0, C)` evaluated through a Cholesky factor of `C`.
pub fn log_likelihood(gamma: &DVector<f64>, c: &DMatrix<f64>) -> Result<f64> {
    let m = gamma.len();
    if c.shape() != (m, m) {
        return Err(Error::dim("innovation covariance", format!("{m}x{m}"), format!("{:?}", c.shape())));
    }
    let chol = c.clone().cholesky().ok_or_else(|| Error::NotPositiveDefinite {
        what: "innovation covariance".into(),
    })?;
    let l = chol.l();
    let z = l
        .solve_lower_triangular(gamma)
        .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
    let half_log_det: f64 = l.diagonal().iter().map(|v| v.ln()).sum();
    Ok(-0.5 * m as f64 * (2.0 * std::f64::consts::PI).ln() - half_log_det - 0.5 * z.norm_squared())
}
