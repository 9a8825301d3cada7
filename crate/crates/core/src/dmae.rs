//! Two parallel filters (no-fault over `[x; d]`, fault over `[x; d; f]`) fused
//! by Bayesian model probabilities, with selective reinitialization and
//! adaptive disturbance covariance.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::adaptive_noise::{innovation_cov_estimate, qd_update, InnovationWindow};
use crate::error::{Error, Result};
use crate::kalman::{self, GaussianBelief, KalmanStepOutput, Partition};
use crate::linalg;
use crate::model::{build_fault_model, build_no_fault_model, LtvModel};

/// Which hypothesis currently has the larger probability.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelIndex {
    NoFault,
    Fault,
}

impl ModelIndex {
    /// 1 for the no-fault model, 2 for the fault model.
    pub fn number(self) -> u8 {
        match self {
            ModelIndex::NoFault => 1,
            ModelIndex::Fault => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DmaeParams {
    /// Fault mean written into the fault filter on reinitialization.
    pub x0_f: DVector<f64>,
    /// Fault covariance written into the fault filter on reinitialization.
    pub p0_f: DMatrix<f64>,
    pub qf: DMatrix<f64>,
    pub prob_floor: f64,
    pub window_n: usize,
    pub freeze_fault_when_dominant: bool,
    /// `(p_nf, p_af)` before the first measurement.
    pub initial_probs: [f64; 2],
    /// Adapt `Qd` from the fault filter's innovations; otherwise `qd_initial` is kept.
    pub adapt_qd: bool,
    pub qd_initial: DMatrix<f64>,
    /// When the fault model is dominant and the fault filter's predicted
    /// innovation has a normalized squared norm above this value, the fault
    /// covariance is reset to `p0_f` before the update so a changed fault is
    /// re-acquired. `None` disables the check.
    pub rearm_threshold: Option<f64>,
}

impl DmaeParams {
    pub fn defaults(n_d: usize, n_f: usize) -> Self {
        DmaeParams {
            x0_f: DVector::from_element(n_f, 1e-3),
            p0_f: DMatrix::identity(n_f, n_f) * 100.0,
            qf: DMatrix::zeros(n_f, n_f),
            prob_floor: 1e-3,
            window_n: 10,
            freeze_fault_when_dominant: false,
            initial_probs: [0.95, 0.05],
            adapt_qd: true,
            qd_initial: DMatrix::zeros(n_d, n_d),
            rearm_threshold: None,
        }
    }

    pub fn validate(&self, model: &LtvModel) -> Result<()> {
        let (nd, nf) = (model.n_d(), model.n_f());
        if self.x0_f.len() != nf {
            return Err(Error::dim("dmae.x0_f", nf, self.x0_f.len()));
        }
        for (name, m, dim) in [("dmae.p0_f", &self.p0_f, nf), ("dmae.qf", &self.qf, nf), ("dmae.qd_initial", &self.qd_initial, nd)] {
            if m.shape() != (dim, dim) {
                return Err(Error::dim(name, format!("{dim}x{dim}"), format!("{}x{}", m.nrows(), m.ncols())));
            }
        }
        if nf > 0 && (!linalg::is_symmetric(&self.p0_f, 1e-9) || self.p0_f.clone().cholesky().is_none()) {
            return Err(Error::config("dmae.p0_f", "must be symmetric positive definite"));
        }
        if !linalg::is_psd(&self.qf) {
            return Err(Error::config("dmae.qf", "must be symmetric PSD"));
        }
        if !linalg::is_psd(&self.qd_initial) {
            return Err(Error::config("dmae.qd_initial", "must be symmetric PSD"));
        }
        if !(0.0..0.5).contains(&self.prob_floor) {
            return Err(Error::config("dmae.prob_floor", "must lie in [0, 0.5)"));
        }
        if self.window_n == 0 {
            return Err(Error::config("dmae.window", "must be positive"));
        }
        let [a, b] = self.initial_probs;
        if a < 0.0 || b < 0.0 || ((a + b) - 1.0).abs() > 1e-12 {
            return Err(Error::config("dmae.initial_probs", "must be nonnegative and sum to 1"));
        }
        if let Some(t) = self.rearm_threshold {
            if !(t > 0.0) {
                return Err(Error::config("dmae.rearm_threshold", "must be positive"));
            }
        }
        Ok(())
    }
}

/// Prior on the `[x; d]` block shared by both filters at start-up.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialBelief {
    pub x_mean: DVector<f64>,
    pub x_cov: DMatrix<f64>,
    pub d_mean: DVector<f64>,
    pub d_cov: DMatrix<f64>,
}

impl InitialBelief {
    /// Zero means with identity covariances.
    pub fn standard(n: usize, n_d: usize) -> Self {
        InitialBelief {
            x_mean: DVector::zeros(n),
            x_cov: DMatrix::identity(n, n),
            d_mean: DVector::zeros(n_d),
            d_cov: DMatrix::identity(n_d, n_d),
        }
    }

    pub fn no_fault_belief(&self) -> Result<GaussianBelief> {
        let (n, nd) = (self.x_mean.len(), self.d_mean.len());
        let mean = DVector::from_iterator(n + nd, self.x_mean.iter().chain(self.d_mean.iter()).copied());
        GaussianBelief::new(mean, linalg::block_diag(&[&self.x_cov, &self.d_cov]), Partition::new(n, nd, 0))
    }

    pub fn fault_belief(&self, x0_f: &DVector<f64>, p0_f: &DMatrix<f64>) -> Result<GaussianBelief> {
        let (n, nd, nf) = (self.x_mean.len(), self.d_mean.len(), x0_f.len());
        let mean = DVector::from_iterator(
            n + nd + nf,
            self.x_mean.iter().chain(self.d_mean.iter()).chain(x0_f.iter()).copied(),
        );
        let cov = linalg::block_diag(&[&self.x_cov, &self.d_cov, p0_f]);
        GaussianBelief::new(mean, cov, Partition::new(n, nd, nf))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DmaeState {
    pub nf: GaussianBelief,
    pub af: GaussianBelief,
    /// `(p_nf, p_af)`.
    pub probs: [f64; 2],
    pub i_max: ModelIndex,
    pub window: InnovationWindow,
    pub qd_current: DMatrix<f64>,
}

/// Probability-weighted outputs of the two filters.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedEstimates {
    pub x_hat: DVector<f64>,
    pub d_hat: DVector<f64>,
    pub f_bar: DVector<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub k: usize,
    pub estimates: WeightedEstimates,
    pub probs: [f64; 2],
    pub i_max: ModelIndex,
    pub innovation_nf: DVector<f64>,
    pub innovation_af: DVector<f64>,
    pub loglik: [f64; 2],
    /// `Qd` in force after this step's adaptation.
    pub qd: DMatrix<f64>,
    /// Gain of the fault filter's update at this step.
    pub gain_af: DMatrix<f64>,
    pub min_eig_nf: f64,
    pub min_eig_af: f64,
    pub rearmed: bool,
    pub frozen: bool,
}

/// Bayes recursion over the two hypotheses in the log domain, followed by a
/// floor: any probability below `floor` is set to `floor` and the rest are
/// rescaled to fill the remaining mass.
pub fn update_probabilities(p_prev: [f64; 2], loglik_nf: f64, loglik_af: f64, floor: f64) -> Result<[f64; 2]> {
    let lp = [p_prev[0].ln() + loglik_nf, p_prev[1].ln() + loglik_af];
    let max = lp[0].max(lp[1]);
    if !max.is_finite() {
        return Err(Error::Numerical(format!(
            "model probabilities undefined (log-likelihoods {loglik_nf}, {loglik_af})"
        )));
    }
    let w = [(lp[0] - max).exp(), (lp[1] - max).exp()];
    let p_nf = w[0] / (w[0] + w[1]);
    let p_nf = if p_nf < floor {
        floor
    } else if 1.0 - p_nf < floor {
        1.0 - floor
    } else {
        p_nf
    };
    Ok([p_nf, 1.0 - p_nf])
}

/// Picks the dominant model (ties go to the no-fault model) and overwrites the
/// losing filter from the winner.
pub fn selective_reinit(state: &mut DmaeState, params: &DmaeParams) {
    state.i_max = if state.probs[0] >= state.probs[1] { ModelIndex::NoFault } else { ModelIndex::Fault };
    let part = state.af.partition;
    let xd = part.xd();
    match state.i_max {
        ModelIndex::NoFault => {
            state.af.mean.rows_mut(0, xd.len()).copy_from(&state.nf.mean);
            state.af.mean.rows_mut(part.f().start, part.nf).copy_from(&params.x0_f);
            state.af.cov.fill(0.0);
            state.af.cov.view_mut((0, 0), (xd.len(), xd.len())).copy_from(&state.nf.cov);
            let fs = part.f().start;
            state.af.cov.view_mut((fs, fs), (part.nf, part.nf)).copy_from(&params.p0_f);
        }
        ModelIndex::Fault => {
            state.nf.mean.copy_from(&state.af.mean.rows(0, xd.len()));
            state.nf.cov.copy_from(&state.af.cov.view((0, 0), (xd.len(), xd.len())));
        }
    }
}

pub fn weighted_estimates(state: &DmaeState) -> WeightedEstimates {
    let part = state.af.partition;
    let [p_nf, p_af] = state.probs;
    let x_hat = state.nf.block_mean(part.x()) * p_nf + state.af.block_mean(part.x()) * p_af;
    let d_hat = state.nf.block_mean(part.d()) * p_nf + state.af.block_mean(part.d()) * p_af;
    let f_bar = state.af.block_mean(part.f()) * p_af;
    WeightedEstimates { x_hat, d_hat, f_bar }
}

/// Update of the fault filter with its fault block held fixed: the `[x; d]`
/// block sees `y − F f̂` through the no-fault output map, the fault mean and
/// covariance are left untouched and the cross-covariance is dropped.
fn frozen_fault_update(
    prior: &GaussianBelief,
    y: &DVector<f64>,
    hbar_af: &DMatrix<f64>,
    r: &DMatrix<f64>,
    k: usize,
) -> Result<KalmanStepOutput> {
    let part = prior.partition;
    let nxd = part.xd().len();
    let f_hat = prior.block_mean(part.f());
    let f_out = hbar_af.view((0, part.f().start), (hbar_af.nrows(), part.nf)).clone_owned();
    let h_xd = hbar_af.view((0, 0), (hbar_af.nrows(), nxd)).clone_owned();
    let sub = GaussianBelief::new(
        prior.block_mean(part.xd()),
        prior.block_cov(part.xd(), part.xd()),
        Partition::new(part.nx, part.nd, 0),
    )?;
    let y_comp = y - &f_out * &f_hat;
    let out = kalman::update(&sub, &y_comp, &h_xd, r, k)?;
    let mut mean = prior.mean.clone();
    mean.rows_mut(0, nxd).copy_from(&out.posterior.mean);
    let mut cov = DMatrix::zeros(part.dim(), part.dim());
    cov.view_mut((0, 0), (nxd, nxd)).copy_from(&out.posterior.cov);
    let fs = part.f().start;
    cov.view_mut((fs, fs), (part.nf, part.nf)).copy_from(&prior.block_cov(part.f(), part.f()));
    let mut gain = DMatrix::zeros(part.dim(), y.len());
    gain.view_mut((0, 0), (nxd, y.len())).copy_from(&out.gain);
    Ok(KalmanStepOutput {
        posterior: GaussianBelief { mean, cov, partition: part },
        innovation: out.innovation,
        innovation_cov: out.innovation_cov,
        gain,
    })
}

fn normalized_innovation(prior: &GaussianBelief, y: &DVector<f64>, hbar: &DMatrix<f64>, r: &DMatrix<f64>) -> Option<f64> {
    let gamma = y - hbar * &prior.mean;
    let c = hbar * &prior.cov * hbar.transpose() + r;
    let chol = c.cholesky()?;
    Some(gamma.dot(&chol.solve(&gamma)))
}

fn reset_fault_block(belief: &mut GaussianBelief, p0_f: &DMatrix<f64>) {
    let part = belief.partition;
    let (fs, nf, nxd) = (part.f().start, part.nf, part.xd().len());
    belief.cov.view_mut((0, fs), (nxd, nf)).fill(0.0);
    belief.cov.view_mut((fs, 0), (nf, nxd)).fill(0.0);
    belief.cov.view_mut((fs, fs), (nf, nf)).copy_from(p0_f);
}

impl DmaeState {
    pub fn new(model: &LtvModel, params: &DmaeParams, init: &InitialBelief) -> Result<Self> {
        params.validate(model)?;
        if init.x_mean.len() != model.n() || init.d_mean.len() != model.n_d() {
            return Err(Error::dim(
                "initial belief",
                format!("x:{} d:{}", model.n(), model.n_d()),
                format!("x:{} d:{}", init.x_mean.len(), init.d_mean.len()),
            ));
        }
        let nf = init.no_fault_belief()?;
        let af = init.fault_belief(&params.x0_f, &params.p0_f)?;
        let i_max = if params.initial_probs[0] >= params.initial_probs[1] { ModelIndex::NoFault } else { ModelIndex::Fault };
        Ok(DmaeState {
            nf,
            af,
            probs: params.initial_probs,
            i_max,
            window: InnovationWindow::new(params.window_n),
            qd_current: params.qd_initial.clone(),
        })
    }

    /// One full cycle at step `k`. `u_prev` is the input applied between steps
    /// `k − 1` and `k`; pass `None` at `k = 0`, where the current beliefs are
    /// already the priors.
    pub fn step(
        &mut self,
        model: &LtvModel,
        params: &DmaeParams,
        u_prev: Option<&DVector<f64>>,
        y: &DVector<f64>,
        k: usize,
    ) -> Result<StepRecord> {
        let mut nf_prior = self.nf.clone();
        let mut af_prior = self.af.clone();
        if let Some(u) = u_prev {
            let kp = k.checked_sub(1).ok_or_else(|| Error::config("u_prev", "no prediction before step 0"))?;
            let nf_model = build_no_fault_model(model, &self.qd_current, kp)?;
            let af_model = build_fault_model(model, &self.qd_current, &params.qf, kp)?;
            let bu = model.known_input(u, kp)?;
            nf_prior = kalman::predict_with_input(&self.nf, &nf_model.abar, &nf_model.qbar, Some(&bu));
            af_prior = kalman::predict_with_input(&self.af, &af_model.abar, &af_model.qbar, Some(&bu));
        }

        let r = model.r(k);
        let hbar_nf = build_no_fault_model(model, &self.qd_current, k)?.hbar;
        let hbar_af = build_fault_model(model, &self.qd_current, &params.qf, k)?.hbar;

        let mut rearmed = false;
        if let (Some(t), ModelIndex::Fault) = (params.rearm_threshold, self.i_max) {
            if normalized_innovation(&af_prior, y, &hbar_af, r).is_some_and(|nis| nis > t) {
                reset_fault_block(&mut af_prior, &params.p0_f);
                rearmed = true;
            }
        }
        let frozen = params.freeze_fault_when_dominant && self.i_max == ModelIndex::Fault && !rearmed;

        let out_nf = kalman::update(&nf_prior, y, &hbar_nf, r, k)?;
        let out_af = if frozen {
            frozen_fault_update(&af_prior, y, &hbar_af, r, k)?
        } else {
            kalman::update(&af_prior, y, &hbar_af, r, k)?
        };
        let ll_nf = kalman::log_likelihood(&out_nf.innovation, &out_nf.innovation_cov)?;
        let ll_af = kalman::log_likelihood(&out_af.innovation, &out_af.innovation_cov)?;
        self.probs = update_probabilities(self.probs, ll_nf, ll_af, params.prob_floor)?;
        self.nf = out_nf.posterior;
        self.af = out_af.posterior;

        self.window.push(out_af.innovation.clone());
        if params.adapt_qd {
            let c_hat = innovation_cov_estimate(&self.window)?;
            let kp = k.saturating_sub(1);
            self.qd_current = qd_update(&c_hat, model.h(k), model.e(kp), model.q(kp), model.f(k), &params.qf, r, k)?;
        }

        selective_reinit(self, params);

        Ok(StepRecord {
            k,
            estimates: weighted_estimates(self),
            probs: self.probs,
            i_max: self.i_max,
            innovation_nf: out_nf.innovation,
            innovation_af: out_af.innovation,
            loglik: [ll_nf, ll_af],
            qd: self.qd_current.clone(),
            gain_af: out_af.gain,
            min_eig_nf: self.nf.min_eigenvalue(),
            min_eig_af: self.af.min_eigenvalue(),
            rearmed,
            frozen,
        })
    }
}

/// Value-style wrapper around [`DmaeState::step`].
pub fn dmae_step(
    state: &DmaeState,
    model: &LtvModel,
    params: &DmaeParams,
    u_prev: Option<&DVector<f64>>,
    y: &DVector<f64>,
    k: usize,
) -> Result<(DmaeState, StepRecord)> {
    let mut next = state.clone();
    let rec = next.step(model, params, u_prev, y, k)?;
    Ok((next, rec))
}
