//! Writes a run log as CSV and JSON and reads the CSV back.

use dmae_core::experiment::{run_scenario, Estimator};
use dmae_core::scenario::{reference, Scenario};

fn main() -> dmae_core::Result<()> {
    let scn = Scenario::from_config(&reference::example2_case3())?;
    let log = run_scenario(&scn, Estimator::Dmae, 1)?;
    let dir = std::env::temp_dir().join("dmae-runlog-example");
    let (csv_path, json_path) = log.export(&dir, "case3_seed1")?;
    println!("wrote {} and {}", csv_path.display(), json_path.display());

    let text = std::fs::read_to_string(&csv_path)?;
    let mut lines = text.lines();
    println!("{}", lines.next().unwrap_or_default());
    println!("{}", lines.next().unwrap_or_default());
    println!("{} data rows", lines.count());
    Ok(())
}
