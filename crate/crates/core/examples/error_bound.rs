//! Interval bound on the one-step fault estimation error given bounds on the
//! plant matrices, the prior estimation errors and the noises.

use dmae_core::analysis::{fault_error_bound, ErrorBoundInputs, Interval};

fn main() -> dmae_core::Result<()> {
    let mut b = ErrorBoundInputs::uniform(Interval::new(-0.01, 0.01));
    b.a = Interval::new(-0.01, 0.81);
    b.h = Interval::point(1.0);
    b.f = Interval::point(1.0);
    b.e = Interval::new(-0.53, 0.63);
    b.ex = Interval::new(-0.02, 0.02);
    b.ed = Interval::new(-0.1, 0.1);
    let iv = fault_error_bound(&b)?;
    println!("fault error within [{:.4}, {:.4}]", iv.lo, iv.hi);

    b.f = Interval::new(2.0, 2.0);
    let iv = fault_error_bound(&b)?;
    println!("with doubled output gain: [{:.4}, {:.4}]", iv.lo, iv.hi);
    Ok(())
}
