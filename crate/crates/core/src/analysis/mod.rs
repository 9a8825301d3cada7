//! Error metrics, the fault-error interval bound and experiment drivers.

mod bound;
mod sweep;
mod table;

pub use bound::{fault_error_bound, ErrorBoundInputs, Interval};
pub use sweep::{
    parse_grid, sensitivity_sweep, summarize_sweep, write_sweep_csv, write_sweep_summary_csv, SweepAxis, SweepCell, SweepRow, DEFAULT_GRID,
};
pub use table::{reference_value, reproduce_table, write_table_csv, TableRow};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::RunLog;

/// Per-channel root mean square error over steps `≥ burn_in`.
pub fn rmse(estimates: &[Vec<f64>], truth: &[Vec<f64>], burn_in: usize) -> Result<Vec<f64>> {
    let mask: Vec<bool> = (0..estimates.len()).map(|k| k >= burn_in).collect();
    rmse_masked(estimates, truth, &mask)
}

/// Per-channel RMSE over the steps where `mask` is true.
pub fn rmse_masked(estimates: &[Vec<f64>], truth: &[Vec<f64>], mask: &[bool]) -> Result<Vec<f64>> {
    if estimates.len() != truth.len() || mask.len() != truth.len() {
        return Err(Error::dim("rmse inputs", truth.len(), format!("{} / {}", estimates.len(), mask.len())));
    }
    let channels = truth.first().map_or(0, |t| t.len());
    let mut sums = vec![0.0; channels];
    let mut count = 0usize;
    for ((e, t), &m) in estimates.iter().zip(truth).zip(mask) {
        if !m {
            continue;
        }
        count += 1;
        for c in 0..channels {
            sums[c] += (e[c] - t[c]).powi(2);
        }
    }
    if count == 0 {
        return Err(Error::Numerical("RMSE over an empty range".into()));
    }
    Ok(sums.into_iter().map(|s| (s / count as f64).sqrt()).collect())
}

/// Steps counted by steady-state metrics: after `burn_in` and at least
/// `exclusion` steps past every edge.
pub fn steady_state_mask(len: usize, burn_in: usize, edges: &[usize], exclusion: usize) -> Vec<bool> {
    (0..len)
        .map(|k| k >= burn_in && !edges.iter().any(|&e| k >= e && k < e + exclusion))
        .collect()
}

/// Mode changes of `i_max` as `(step, from, to)`.
pub fn switch_events(imax: &[u8]) -> Vec<(usize, u8, u8)> {
    imax.windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] != w[1])
        .map(|(i, w)| (i + 1, w[0], w[1]))
        .collect()
}

/// Latency of a `from → to` transition at or after `edge`, provided the mode
/// was `from` just before the edge. `None` if the transition never happens.
pub fn transition_latency(imax: &[u8], edge: usize, from: u8, to: u8) -> Option<usize> {
    if edge == 0 || edge > imax.len() || imax[edge - 1] != from {
        return None;
    }
    imax[edge..].iter().position(|&m| m == to)
}

/// Steps after `removal` until every channel of the weighted fault estimate is below `threshold`.
pub fn recovery_time(fbar: &[Vec<f64>], removal: usize, threshold: f64) -> Option<usize> {
    fbar.get(removal..)?
        .iter()
        .position(|f| f.iter().all(|v| v.abs() < threshold))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub estimator: String,
    pub scenario: String,
    pub seed: u64,
    pub config_digest: String,
    pub rmse_x: Vec<f64>,
    pub rmse_d: Vec<f64>,
    pub rmse_f: Vec<f64>,
    pub steady_state_rmse_f: Vec<f64>,
    pub switches: Vec<(usize, u8, u8)>,
    pub min_cov_eigenvalue: f64,
}

pub fn summarize_run(log: &RunLog, burn_in: usize, edges: &[usize], exclusion: usize) -> Result<RunSummary> {
    let mask = steady_state_mask(log.len(), burn_in, edges, exclusion);
    Ok(RunSummary {
        estimator: log.meta.estimator.clone(),
        scenario: log.meta.scenario.clone(),
        seed: log.meta.seed,
        config_digest: log.meta.config_digest.clone(),
        rmse_x: rmse(&log.xhat, &log.x, burn_in)?,
        rmse_d: rmse(&log.dhat, &log.d, burn_in)?,
        rmse_f: rmse(&log.fbar, &log.f, burn_in)?,
        steady_state_rmse_f: rmse_masked(&log.fbar, &log.f, &mask)?,
        switches: switch_events(&log.imax),
        min_cov_eigenvalue: log.cov_min_eig.iter().copied().fold(f64::INFINITY, f64::min),
    })
}
