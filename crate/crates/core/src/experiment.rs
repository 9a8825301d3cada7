//! Simulate a scenario and run one estimator over it.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::baselines::{augmented_kf_step, bootstrap_pf_step, pf_fault_noise, ParticleSet};
use crate::dmae::{DmaeState, StepRecord};
use crate::error::{Error, Result};
use crate::kalman::{GaussianBelief, Partition};
use crate::linalg;
use crate::scenario::rng::{NormalStream, Stream};
use crate::scenario::runlog::{to_vec, RunMeta};
use crate::scenario::{simulate_truth, RunLog, Scenario, Truth};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Estimator {
    Dmae,
    Akf,
    Pf,
}

impl Estimator {
    pub const ALL: [Estimator; 3] = [Estimator::Dmae, Estimator::Akf, Estimator::Pf];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Dmae => "dmae",
            Estimator::Akf => "akf",
            Estimator::Pf => "pf",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dmae" => Ok(Estimator::Dmae),
            "akf" => Ok(Estimator::Akf),
            "pf" => Ok(Estimator::Pf),
            other => Err(Error::config("estimator", format!("unknown estimator `{other}` (expected dmae, akf or pf)"))),
        }
    }
}

fn log_with_truth(scn: &Scenario, truth: &Truth, estimator: Estimator, seed: u64) -> RunLog {
    let cfg = &scn.config;
    let mut log = RunLog::empty(RunMeta::new(estimator.name(), &cfg.name, seed, &cfg.digest()));
    log.k = (0..truth.len()).collect();
    log.u = truth.u.iter().map(to_vec).collect();
    log.x = truth.x.iter().map(to_vec).collect();
    log.y = truth.y.iter().map(to_vec).collect();
    log.d = truth.d.iter().map(to_vec).collect();
    log.f = truth.f.iter().map(to_vec).collect();
    log
}

fn u_prev(truth: &Truth, k: usize) -> Option<&DVector<f64>> {
    k.checked_sub(1).map(|j| &truth.u[j])
}

/// DMAE over a given truth; returns the log and the raw step records.
pub fn run_dmae(scn: &Scenario, truth: &Truth, seed: u64) -> Result<(RunLog, Vec<StepRecord>)> {
    let model = &scn.filter_model;
    let mut state = DmaeState::new(model, &scn.dmae, &scn.init)?;
    let mut log = log_with_truth(scn, truth, Estimator::Dmae, seed);
    let mut records = Vec::with_capacity(truth.len());
    for k in 0..truth.len() {
        let rec = state.step(model, &scn.dmae, u_prev(truth, k), &truth.y[k], k)?;
        log.xhat.push(to_vec(&rec.estimates.x_hat));
        log.dhat.push(to_vec(&rec.estimates.d_hat));
        log.fbar.push(to_vec(&rec.estimates.f_bar));
        log.p_nf.push(rec.probs[0]);
        log.p_af.push(rec.probs[1]);
        log.imax.push(rec.i_max.number());
        log.innovation.push(to_vec(&rec.innovation_af));
        log.qd.push(rec.qd.diagonal().as_slice().to_vec());
        log.cov_min_eig.push(rec.min_eig_nf.min(rec.min_eig_af));
        records.push(rec);
    }
    Ok((log, records))
}

fn fault_prior(scn: &Scenario, f_var: f64) -> Result<GaussianBelief> {
    let nf = scn.filter_model.n_f();
    scn.init.fault_belief(&DVector::zeros(nf), &(DMatrix::identity(nf, nf) * f_var))
}

/// Augmented Kalman filter over `[x; d; f]` with the scenario's fixed covariances.
pub fn run_akf(scn: &Scenario, truth: &Truth, seed: u64) -> Result<RunLog> {
    let model = &scn.filter_model;
    let mut belief = fault_prior(scn, scn.akf.f_var)?;
    let part = belief.partition;
    let mut log = log_with_truth(scn, truth, Estimator::Akf, seed);
    let qd_diag = scn.akf.qd.diagonal().as_slice().to_vec();
    for k in 0..truth.len() {
        let out = augmented_kf_step(&belief, model, &scn.akf.qd, Some(&scn.akf.qf), u_prev(truth, k), &truth.y[k], k)?;
        belief = out.posterior;
        log.xhat.push(to_vec(&belief.block_mean(part.x())));
        log.dhat.push(to_vec(&belief.block_mean(part.d())));
        log.fbar.push(to_vec(&belief.block_mean(part.f())));
        log.p_nf.push(f64::NAN);
        log.p_af.push(f64::NAN);
        log.imax.push(0);
        log.innovation.push(to_vec(&out.innovation));
        log.qd.push(qd_diag.clone());
        log.cov_min_eig.push(belief.min_eigenvalue());
    }
    Ok(log)
}

/// Bootstrap particle filter over `[x; d; f]`; particle draws use their own stream of `seed`.
pub fn run_pf(scn: &Scenario, truth: &Truth, seed: u64) -> Result<RunLog> {
    let model = &scn.filter_model;
    let prior = fault_prior(scn, scn.pf.f_var)?;
    let mut noise = NormalStream::new(seed, Stream::Particles);
    let mut ps = ParticleSet::from_belief(&prior, scn.pf.particles, &mut noise);
    let qf = pf_fault_noise(&scn.dmae.qf, scn.pf.fault_noise);
    let part: Partition = prior.partition;
    let mut log = log_with_truth(scn, truth, Estimator::Pf, seed);
    let qd_diag = scn.pf.qd.diagonal().as_slice().to_vec();
    let hbar_of = |k| crate::model::build_fault_model(model, &scn.pf.qd, &qf, k).map(|m| m.hbar);
    for k in 0..truth.len() {
        ps = bootstrap_pf_step(&ps, model, &scn.pf.qd, &qf, u_prev(truth, k), &truth.y[k], k, &mut noise)?.0;
        let est = ps.estimate();
        log.xhat.push(to_vec(&est.rows(part.x().start, part.nx).clone_owned()));
        log.dhat.push(to_vec(&est.rows(part.d().start, part.nd).clone_owned()));
        log.fbar.push(to_vec(&est.rows(part.f().start, part.nf).clone_owned()));
        log.p_nf.push(f64::NAN);
        log.p_af.push(f64::NAN);
        log.imax.push(0);
        log.innovation.push(to_vec(&(&truth.y[k] - hbar_of(k)? * &est)));
        log.qd.push(qd_diag.clone());
        log.cov_min_eig.push(linalg::min_eigenvalue(&ps.covariance()));
    }
    Ok(log)
}

/// Simulates the scenario with `seed` and runs `estimator` over it.
pub fn run_scenario(scn: &Scenario, estimator: Estimator, seed: u64) -> Result<RunLog> {
    let truth = simulate_truth(scn, seed)?;
    run_on_truth(scn, &truth, estimator, seed)
}

pub fn run_on_truth(scn: &Scenario, truth: &Truth, estimator: Estimator, seed: u64) -> Result<RunLog> {
    match estimator {
        Estimator::Dmae => run_dmae(scn, truth, seed).map(|(log, _)| log),
        Estimator::Akf => run_akf(scn, truth, seed),
        Estimator::Pf => run_pf(scn, truth, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::reference;

    #[test]
    fn estimator_names_round_trip() {
        for e in Estimator::ALL {
            assert_eq!(e.name().parse::<Estimator>().unwrap(), e);
        }
        assert!("ukf".parse::<Estimator>().is_err());
    }

    #[test]
    fn every_estimator_fills_every_column() {
        let mut cfg = reference::example2_case3();
        cfg.horizon = 40;
        cfg.faults.segments.clear();
        let scn = Scenario::from_config(&cfg).unwrap();
        for e in Estimator::ALL {
            let log = run_scenario(&scn, e, 1).unwrap();
            assert_eq!(log.len(), 40);
            log.check_lengths().unwrap();
        }
    }
}
