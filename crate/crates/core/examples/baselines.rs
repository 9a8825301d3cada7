//! DMAE against the augmented Kalman filter and the bootstrap particle
//! filter on the same simulated measurements.

use dmae_core::analysis::rmse;
use dmae_core::experiment::{run_on_truth, Estimator};
use dmae_core::scenario::{reference, simulate_truth, Scenario};

fn main() -> dmae_core::Result<()> {
    for cfg in [reference::example2_case1(), reference::example2_case2()] {
        let scn = Scenario::from_config(&cfg)?;
        let truth = simulate_truth(&scn, 5)?;
        println!("{}", cfg.name);
        for est in Estimator::ALL {
            let log = run_on_truth(&scn, &truth, est, 5)?;
            println!(
                "  {est:<5} d-RMSE {:.4?}  f-RMSE {:.4?}",
                rmse(&log.dhat, &log.d, 10)?,
                rmse(&log.fbar, &log.f, 10)?
            );
        }
    }
    Ok(())
}
