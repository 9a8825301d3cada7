//! Mean RMSE of every estimator on the three reference cases (fault only,
//! gust only, both) next to the reference figures.

use dmae_core::analysis::reproduce_table;
use dmae_core::experiment::Estimator;
use dmae_core::scenario::reference;

fn main() -> dmae_core::Result<()> {
    let configs = [reference::example2_case1(), reference::example2_case2(), reference::example2_case3()];
    let seeds: Vec<u64> = (0..10).collect();
    let rows = reproduce_table(&configs, &Estimator::ALL, &seeds)?;
    println!("{:<15} {:<5} {:<3} {:>8} {:>10}", "scenario", "est", "ch", "rmse", "reference");
    for r in rows {
        let reference = match (r.reference, r.reference_method) {
            (Some(v), Some(m)) => format!("{v:.4} {m}"),
            _ => "-".into(),
        };
        println!("{:<15} {:<5} {:<3} {:>8.4} {:>10}", r.scenario, r.method, r.channel, r.rmse, reference);
    }
    Ok(())
}
