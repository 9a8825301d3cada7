//! Double-model adaptive estimation of states, disturbances and output faults
//! for linear time-varying systems, with a scenario simulator, baseline
//! estimators and analysis drivers.
//!
//! The estimator runs two augmented Kalman filters side by side: one over
//! `[x; d]` that assumes no sensor fault, and one over `[x; d; f]` that does.
//! Their innovation likelihoods drive posterior model probabilities, the less
//! likely filter is reinitialized from the dominant one, and the disturbance
//! covariance is re-estimated from a sliding innovation window.
//!
//! ```no_run
//! use dmae_core::experiment::{run_scenario, Estimator};
//! use dmae_core::scenario::{reference, Scenario};
//!
//! let scn = Scenario::from_config(&reference::example1()).unwrap();
//! let log = run_scenario(&scn, Estimator::Dmae, 7).unwrap();
//! println!("{} steps, final fault estimate {:?}", log.len(), log.fbar.last());
//! ```

pub mod adaptive_noise;
pub mod analysis;
pub mod baselines;
pub mod cli;
pub mod dmae;
pub mod error;
pub mod experiment;
pub mod kalman;
pub mod linalg;
pub mod model;
pub mod scenario;

pub use error::{Error, Result};
