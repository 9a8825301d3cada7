//! Fault-RMSE sensitivity to scaling the estimator's assumed process and
//! measurement noise while the simulated plant is unchanged.

use dmae_core::analysis::{sensitivity_sweep, summarize_sweep, SweepAxis, DEFAULT_GRID};
use dmae_core::scenario::reference;

fn main() -> dmae_core::Result<()> {
    let seeds: Vec<u64> = (0..10).collect();
    for cfg in [reference::example2_case1(), reference::example2_case3()] {
        println!("{}", cfg.name);
        for axis in [SweepAxis::Q, SweepAxis::R] {
            let rows = summarize_sweep(&sensitivity_sweep(&cfg, axis, &DEFAULT_GRID, &seeds)?);
            let line: Vec<String> = rows.iter().map(|r| format!("{:e}:{:.4}", r.coefficient, r.mean)).collect();
            println!("  k_{axis}  {}", line.join("  "));
        }
    }
    Ok(())
}
