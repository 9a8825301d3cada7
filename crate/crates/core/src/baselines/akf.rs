use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kalman::{self, GaussianBelief, KalmanStepOutput};
use crate::model::{build_fault_model, build_no_fault_model, AugmentedModel, LtvModel};

fn augmented(model: &LtvModel, qd: &DMatrix<f64>, qf: Option<&DMatrix<f64>>, k: usize) -> Result<AugmentedModel> {
    match qf {
        Some(qf) => build_fault_model(model, qd, qf, k),
        None => build_no_fault_model(model, qd, k),
    }
}

/// One step of a single Kalman filter over `[x; d; f]` (or `[x; d]` when `qf`
/// is `None`) with random-walk unknown inputs and fixed covariances.
///
/// `u_prev` drives the prediction from `k − 1`; with `None` the belief is
/// taken as the prior at `k` and only the update runs.
#[allow(clippy::too_many_arguments)]
pub fn augmented_kf_step(
    belief: &GaussianBelief,
    model: &LtvModel,
    qd: &DMatrix<f64>,
    qf: Option<&DMatrix<f64>>,
    u_prev: Option<&DVector<f64>>,
    y: &DVector<f64>,
    k: usize,
) -> Result<KalmanStepOutput> {
    let expected_nf = if qf.is_some() { model.n_f() } else { 0 };
    if belief.partition.nf != expected_nf {
        return Err(Error::dim("augmented filter fault block", expected_nf, belief.partition.nf));
    }
    let prior = match u_prev {
        Some(u) => {
            let kp = k.checked_sub(1).ok_or_else(|| Error::config("u_prev", "no prediction before step 0"))?;
            let m = augmented(model, qd, qf, kp)?;
            let bu = model.known_input(u, kp)?;
            kalman::predict_with_input(belief, &m.abar, &m.qbar, Some(&bu))
        }
        None => belief.clone(),
    };
    let hbar = augmented(model, qd, qf, k)?.hbar;
    kalman::update(&prior, y, &hbar, model.r(k), k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kalman::Partition;
    use crate::linalg;
    use crate::scenario::reference;
    use nalgebra::dvector;

    #[test]
    fn composes_predict_and_update_on_fault_model() {
        let model = reference::example_model();
        let qd = DMatrix::identity(2, 2) * 1e-3;
        let qf = DMatrix::identity(2, 2) * 1e-2;
        let b = GaussianBelief::new(DVector::from_element(6, 0.1), DMatrix::identity(6, 6), Partition::new(2, 2, 2)).unwrap();
        let u = dvector![0.5];
        let y = dvector![0.2, -0.3];
        let out = augmented_kf_step(&b, &model, &qd, Some(&qf), Some(&u), &y, 3).unwrap();

        let m = build_fault_model(&model, &qd, &qf, 2).unwrap();
        let mut bu = DVector::zeros(6);
        bu.rows_mut(0, 2).copy_from(&(model.b(2) * &u));
        let mut cov = &m.abar * &b.cov * m.abar.transpose() + &m.qbar;
        linalg::symmetrize_in_place(&mut cov);
        let prior = GaussianBelief { mean: &m.abar * &b.mean + bu, cov, partition: b.partition };
        let direct = kalman::update(&prior, &y, &m.hbar, model.r(3), 3).unwrap();
        assert!((out.posterior.mean - direct.posterior.mean).amax() < 1e-14);
        assert!((out.posterior.cov - direct.posterior.cov).amax() < 1e-14);
    }

    #[test]
    fn certain_disturbance_is_tracked_exactly() {
        let mut model = reference::example_model();
        model.q = DMatrix::<f64>::zeros(2, 2).into();
        let d_true = dvector![0.3, -0.2];
        let mean = DVector::from_iterator(4, [0.0, 0.0, d_true[0], d_true[1]]);
        let mut cov = DMatrix::zeros(4, 4);
        cov[(0, 0)] = 1.0;
        cov[(1, 1)] = 1.0;
        let mut b = GaussianBelief::new(mean, cov, Partition::new(2, 2, 0)).unwrap();
        let qd = DMatrix::zeros(2, 2);
        let mut x = DVector::zeros(2);
        let u = dvector![0.5];
        for k in 0..50 {
            let y = model.h(k) * &x;
            let up = (k > 0).then_some(&u);
            b = augmented_kf_step(&b, &model, &qd, None, up, &y, k).unwrap().posterior;
            assert!((b.block_mean(b.partition.d()) - &d_true).amax() < 1e-12);
            x = model.a(k) * &x + model.b(k) * &u + model.e(k) * &d_true;
        }
    }

    #[test]
    fn partition_must_match_fault_option() {
        let model = reference::example_model();
        let b = GaussianBelief::new(DVector::zeros(4), DMatrix::identity(4, 4), Partition::new(2, 2, 0)).unwrap();
        let qf = DMatrix::zeros(2, 2);
        assert!(augmented_kf_step(&b, &model, &DMatrix::zeros(2, 2), Some(&qf), None, &dvector![0.0, 0.0], 0).is_err());
    }
}
