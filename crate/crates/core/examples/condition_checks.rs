//! Decoupling existence and convergence rank tests, on the reference plant
//! and on a plant with an unstable invariant zero.

use dmae_core::model::{check_convergence_condition, existence_for_model};
use dmae_core::scenario::{reference, Scenario};
use nalgebra::{dmatrix, DMatrix};

fn main() -> dmae_core::Result<()> {
    for cfg in [reference::example2_case1(), reference::example2_case2(), reference::example2_case3()] {
        let scn = Scenario::from_config(&cfg)?;
        println!("{:<15} existence: {}", cfg.name, existence_for_model(&scn.filter_model, 0));
    }
    let m = reference::example_model();
    println!("reference plant convergence: {}", check_convergence_condition(m.a(0), m.e(0), m.h(0)));

    // The disturbance enters the first state only, the sensor sees only the
    // first state, and the unmeasured second mode is unstable.
    let a = dmatrix![0.5, 0.0; 0.0, 2.0];
    let e = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
    let h = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
    let v = check_convergence_condition(&a, &e, &h);
    println!("unstable hidden mode: {v}");
    println!("finite zeros: {:?}", v.zeros);
    Ok(())
}
