//! Comparison estimators: an augmented-state Kalman filter and a bootstrap particle filter.

mod akf;
mod pf;

pub use akf::augmented_kf_step;
pub use pf::{bootstrap_pf_step, pf_fault_noise, systematic_resample, ParticleSet, PfStepInfo};
