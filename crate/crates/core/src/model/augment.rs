use nalgebra::DMatrix;

use super::LtvModel;
use crate::error::{Error, Result};
use crate::kalman::Partition;
use crate::linalg;

/// Transition, output and process-noise matrices of an augmented filter at one step.
#[derive(Clone, Debug, PartialEq)]
pub struct AugmentedModel {
    pub abar: DMatrix<f64>,
    pub hbar: DMatrix<f64>,
    pub qbar: DMatrix<f64>,
    pub partition: Partition,
}

fn check_square(name: &str, m: &DMatrix<f64>, dim: usize) -> Result<()> {
    if m.shape() != (dim, dim) {
        return Err(Error::dim(name, format!("{dim}x{dim}"), format!("{}x{}", m.nrows(), m.ncols())));
    }
    Ok(())
}

/// Process noise of `[x; d]` when `d` follows a random walk with covariance `qd`
/// and enters the state through `e`: `[[Q + E Qd Eᵀ, E Qd], [Qd Eᵀ, Qd]]`.
pub fn assemble_process_noise(q: &DMatrix<f64>, qd: &DMatrix<f64>, e: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = q.nrows();
    let nd = qd.nrows();
    check_square("Q", q, n)?;
    check_square("Qd", qd, nd)?;
    if e.shape() != (n, nd) {
        return Err(Error::dim("E", format!("{n}x{nd}"), format!("{}x{}", e.nrows(), e.ncols())));
    }
    let eqd = e * qd;
    let mut out = DMatrix::zeros(n + nd, n + nd);
    out.view_mut((0, 0), (n, n)).copy_from(&(q + &eqd * e.transpose()));
    out.view_mut((0, n), (n, nd)).copy_from(&eqd);
    out.view_mut((n, 0), (nd, n)).copy_from(&eqd.transpose());
    out.view_mut((n, n), (nd, nd)).copy_from(qd);
    linalg::symmetrize_in_place(&mut out);
    Ok(out)
}

/// Augmented model over `[x; d]`.
pub fn build_no_fault_model(model: &LtvModel, qd: &DMatrix<f64>, k: usize) -> Result<AugmentedModel> {
    let (n, nd) = (model.n(), model.n_d());
    check_square("Qd", qd, nd)?;
    let mut abar = DMatrix::identity(n + nd, n + nd);
    abar.view_mut((0, 0), (n, n)).copy_from(model.a(k));
    abar.view_mut((0, n), (n, nd)).copy_from(model.e(k));
    let mut hbar = DMatrix::zeros(model.m(), n + nd);
    hbar.view_mut((0, 0), (model.m(), n)).copy_from(model.h(k));
    let qbar = assemble_process_noise(model.q(k), qd, model.e(k))?;
    Ok(AugmentedModel { abar, hbar, qbar, partition: Partition::new(n, nd, 0) })
}

/// Augmented model over `[x; d; f]` with random-walk faults of covariance `qf`.
pub fn build_fault_model(
    model: &LtvModel,
    qd: &DMatrix<f64>,
    qf: &DMatrix<f64>,
    k: usize,
) -> Result<AugmentedModel> {
    let nf = model.n_f();
    check_square("Qf", qf, nf)?;
    let base = build_no_fault_model(model, qd, k)?;
    let dim = base.abar.nrows();
    let abar = linalg::block_diag(&[&base.abar, &DMatrix::identity(nf, nf)]);
    let mut hbar = DMatrix::zeros(model.m(), dim + nf);
    hbar.view_mut((0, 0), (model.m(), dim)).copy_from(&base.hbar);
    hbar.view_mut((0, dim), (model.m(), nf)).copy_from(model.f(k));
    let qbar = linalg::block_diag(&[&base.qbar, qf]);
    Ok(AugmentedModel {
        abar,
        hbar,
        qbar,
        partition: Partition::new(model.n(), model.n_d(), nf),
    })
}
