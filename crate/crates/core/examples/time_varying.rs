//! Driving the estimator step by step on a hand-built time-varying model.

use dmae_core::dmae::{DmaeParams, DmaeState, InitialBelief};
use dmae_core::model::{LtvModel, MatrixSeq};
use dmae_core::scenario::rng::{NormalStream, Stream};
use nalgebra::{dmatrix, dvector, DMatrix};

fn main() -> dmae_core::Result<()> {
    let horizon = 300;
    // Slowly rotating dynamics; everything else constant.
    let a: Vec<DMatrix<f64>> = (0..horizon)
        .map(|k| {
            let t = 0.02 * (k as f64 / 50.0).sin();
            dmatrix![0.9 * t.cos(), -0.9 * t.sin(); 0.9 * t.sin(), 0.9 * t.cos()]
        })
        .collect();
    let i2 = DMatrix::<f64>::identity(2, 2);
    let model = LtvModel::new(
        MatrixSeq::Tabulated(a),
        DMatrix::from_column_slice(2, 1, &[0.1, 1.0]).into(),
        i2.clone().into(),
        i2.clone().into(),
        i2.clone().into(),
        (&i2 * 1e-6).into(),
        (&i2 * 1e-4).into(),
    )?;

    let mut params = DmaeParams::defaults(2, 2);
    params.qd_initial = &i2 * 1e-4;
    params.rearm_threshold = Some(25.0);
    let mut state = DmaeState::new(&model, &params, &InitialBelief::standard(2, 2))?;

    let mut w = NormalStream::new(9, Stream::ProcessNoise);
    let mut v = NormalStream::new(9, Stream::MeasurementNoise);
    let mut x = dvector![0.0, 0.0];
    let d = dvector![0.2, -0.1];
    let u = dvector![0.0];
    for k in 0..horizon {
        let f = if (120..220).contains(&k) { dvector![0.5, 0.0] } else { dvector![0.0, 0.0] };
        let y = &x + &f + v.standard_vector(2) * 1e-2;
        let rec = state.step(&model, &params, (k > 0).then_some(&u), &y, k)?;
        if k % 30 == 0 || k == 125 || k == 225 {
            println!(
                "k={k:>3} mode {} p_af {:.3} fbar [{:.3}, {:.3}] dhat [{:.3}, {:.3}]",
                rec.i_max.number(),
                rec.probs[1],
                rec.estimates.f_bar[0],
                rec.estimates.f_bar[1],
                rec.estimates.d_hat[0],
                rec.estimates.d_hat[1]
            );
        }
        x = model.a(k) * &x + model.b(k) * &u + model.e(k) * &d + w.standard_vector(2) * 1e-3;
    }
    Ok(())
}
