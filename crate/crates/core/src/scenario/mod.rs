//! Ground-truth generation for experiments.

pub mod config;
pub mod dryden;
pub mod profile;
pub mod reference;
pub mod rng;
pub mod runlog;

pub use config::{DisturbanceSpec, MatrixSpec, ScenarioConfig};
pub use dryden::{dryden_disturbance, DrydenForm, DrydenParams};
pub use profile::{default_fault_profile, fault_profile_eval, FaultSchedule, FaultSegment, InputSpec};
pub use runlog::RunLog;

use nalgebra::{DMatrix, DVector};

use crate::dmae::{DmaeParams, InitialBelief};
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::LtvModel;
use rng::{NormalStream, Stream};

#[derive(Clone, Debug, PartialEq)]
pub struct AkfSettings {
    pub qd: DMatrix<f64>,
    pub qf: DMatrix<f64>,
    pub f_var: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PfSettings {
    pub particles: usize,
    pub fault_noise: f64,
    pub qd: DMatrix<f64>,
    pub f_var: f64,
}

/// A validated, typed scenario ready to simulate and filter.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub truth_model: LtvModel,
    /// The model the estimators assume (noise scaled by the filter coefficients).
    pub filter_model: LtvModel,
    pub dmae: DmaeParams,
    pub init: InitialBelief,
    pub akf: AkfSettings,
    pub pf: PfSettings,
    pub x0: DVector<f64>,
}

fn positive(v: f64, field: &str) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(field, "must be positive"))
    }
}

impl Scenario {
    pub fn from_config(config: &ScenarioConfig) -> Result<Self> {
        if config.horizon == 0 {
            return Err(Error::config("horizon", "must be at least 1"));
        }
        let s = &config.noise;
        positive(s.truth_kq, "noise.truth_kq")?;
        positive(s.truth_kr, "noise.truth_kr")?;
        positive(s.filter_kq, "noise.filter_kq")?;
        positive(s.filter_kr, "noise.filter_kr")?;

        let base = config.model.build()?;
        base.check_horizon(config.horizon)?;
        let (n, nd, nf) = (base.n(), base.n_d(), base.n_f());
        config.faults.validate(nf, config.horizon)?;
        config.input.validate(base.p())?;
        match &config.disturbance {
            DisturbanceSpec::None => {}
            DisturbanceSpec::Constant { value } if value.len() != nd => {
                return Err(Error::config("disturbance.value", format!("expected {nd} entries, found {}", value.len())));
            }
            DisturbanceSpec::Constant { .. } => {}
            DisturbanceSpec::Dryden(p) => {
                p.validate()?;
                if p.channels() != nd {
                    return Err(Error::config("disturbance.sigma", format!("expected {nd} channels, found {}", p.channels())));
                }
            }
        }
        let x0 = match &config.x0 {
            Some(v) if v.len() != n => return Err(Error::config("x0", format!("expected {n} entries, found {}", v.len()))),
            Some(v) => DVector::from_column_slice(v),
            None => DVector::zeros(n),
        };

        let dmae = config.dmae.build(nd, nf)?;
        dmae.validate(&base)?;
        let init = config.filter_init.build(n, nd)?;

        let akf = AkfSettings {
            qd: match &config.akf.qd {
                Some(m) => m.to_matrix("akf.qd")?,
                None => dmae.qd_initial.clone(),
            },
            qf: match &config.akf.qf {
                Some(m) => m.to_matrix("akf.qf")?,
                None => dmae.qf.clone(),
            },
            f_var: config.akf.f_var.unwrap_or(1.0),
        };
        if akf.qd.shape() != (nd, nd) || !linalg::is_psd(&akf.qd) {
            return Err(Error::config("akf.qd", format!("must be a {nd}x{nd} PSD matrix")));
        }
        if akf.qf.shape() != (nf, nf) || !linalg::is_psd(&akf.qf) {
            return Err(Error::config("akf.qf", format!("must be a {nf}x{nf} PSD matrix")));
        }
        positive(akf.f_var, "akf.f_var")?;

        let pf = PfSettings {
            particles: config.pf.particles,
            fault_noise: config.pf.fault_noise,
            qd: match &config.pf.qd {
                Some(m) => m.to_matrix("pf.qd")?,
                None => akf.qd.clone(),
            },
            f_var: config.pf.f_var,
        };
        if pf.particles == 0 {
            return Err(Error::config("pf.particles", "must be at least 1"));
        }
        if pf.qd.shape() != (nd, nd) || !linalg::is_psd(&pf.qd) {
            return Err(Error::config("pf.qd", format!("must be a {nd}x{nd} PSD matrix")));
        }
        if !(pf.fault_noise >= 0.0) {
            return Err(Error::config("pf.fault_noise", "must be nonnegative"));
        }
        positive(pf.f_var, "pf.f_var")?;

        Ok(Scenario {
            config: config.clone(),
            truth_model: base.with_noise_scale(s.truth_kq, s.truth_kr),
            filter_model: base.with_noise_scale(s.filter_kq, s.filter_kr),
            dmae,
            init,
            akf,
            pf,
            x0,
        })
    }

    pub fn horizon(&self) -> usize {
        self.config.horizon
    }

    pub fn schedule(&self) -> &FaultSchedule {
        &self.config.faults
    }

    pub fn input(&self, k: usize) -> DVector<f64> {
        self.config.input.eval(k, self.truth_model.p())
    }

    pub fn fault(&self, k: usize) -> DVector<f64> {
        self.config.faults.eval(k, self.truth_model.n_f())
    }

    /// Disturbance sequence for the whole horizon.
    pub fn disturbance(&self, seed: u64) -> Result<Vec<DVector<f64>>> {
        let (k, nd) = (self.horizon(), self.truth_model.n_d());
        Ok(match &self.config.disturbance {
            DisturbanceSpec::None => vec![DVector::zeros(nd); k],
            DisturbanceSpec::Constant { value } => vec![DVector::from_column_slice(value); k],
            DisturbanceSpec::Dryden(p) => dryden_disturbance(p, k, seed)?,
        })
    }
}

/// Simulated plant signals, one entry per step.
#[derive(Clone, Debug, PartialEq)]
pub struct Truth {
    pub u: Vec<DVector<f64>>,
    pub x: Vec<DVector<f64>>,
    pub y: Vec<DVector<f64>>,
    pub d: Vec<DVector<f64>>,
    pub f: Vec<DVector<f64>>,
}

impl Truth {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// Simulates the plant for the scenario horizon. Process noise, measurement
/// noise and the disturbance each draw from their own stream of `seed`.
pub fn simulate_truth(scenario: &Scenario, seed: u64) -> Result<Truth> {
    let d = scenario.disturbance(seed)?;
    simulate_with_disturbance(scenario, seed, d)
}

/// Simulation with a given disturbance sequence.
pub fn simulate_with_disturbance(scenario: &Scenario, seed: u64, d: Vec<DVector<f64>>) -> Result<Truth> {
    let model = &scenario.truth_model;
    let horizon = scenario.horizon();
    if d.len() != horizon {
        return Err(Error::dim("disturbance sequence", horizon, d.len()));
    }
    let mut w_noise = NormalStream::new(seed, Stream::ProcessNoise);
    let mut v_noise = NormalStream::new(seed, Stream::MeasurementNoise);
    let mut x = scenario.x0.clone();
    let mut truth = Truth {
        u: Vec::with_capacity(horizon),
        x: Vec::with_capacity(horizon),
        y: Vec::with_capacity(horizon),
        d,
        f: Vec::with_capacity(horizon),
    };
    for k in 0..horizon {
        let u = scenario.input(k);
        let f = scenario.fault(k);
        let v = v_noise.correlated(&linalg::psd_sqrt(model.r(k)));
        let y = model.h(k) * &x + model.f(k) * &f + v;
        let w = w_noise.correlated(&linalg::psd_sqrt(model.q(k)));
        let next = model.a(k) * &x + model.b(k) * &u + model.e(k) * &truth.d[k] + w;
        truth.u.push(u);
        truth.x.push(std::mem::replace(&mut x, next));
        truth.y.push(y);
        truth.f.push(f);
    }
    Ok(truth)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noise_free_identity() -> ScenarioConfig {
        ScenarioConfig::from_toml_str(
            r#"
            name = "fixed-point"
            horizon = 20
            x0 = [1.0, -2.0]
            [model]
            A = { diag = [1.0, 1.0] }
            B = [[0.0], [0.0]]
            E = { diag = [1.0, 1.0] }
            H = [[1.0, 0.5], [0.0, 2.0]]
            F = { diag = [1.0, 1.0] }
            Q = { zeros = [2, 2] }
            R = { diag = [1.0, 1.0] }
            [noise]
            truth_kr = 1e-300
            "#,
        )
        .unwrap()
    }

    #[test]
    fn noise_free_fixed_point() {
        let scn = Scenario::from_config(&noise_free_identity()).unwrap();
        let t = simulate_truth(&scn, 3).unwrap();
        for k in 0..20 {
            assert_eq!(t.x[k], scn.x0);
            let expected = scn.truth_model.h(k) * &scn.x0;
            assert!((&t.y[k] - expected).amax() < 1e-140);
        }
    }

    #[test]
    fn same_seed_same_truth() {
        let scn = Scenario::from_config(&reference::example2_case3()).unwrap();
        assert_eq!(simulate_truth(&scn, 8).unwrap(), simulate_truth(&scn, 8).unwrap());
        assert_ne!(simulate_truth(&scn, 8).unwrap().y, simulate_truth(&scn, 9).unwrap().y);
    }

    #[test]
    fn replay_with_recorded_disturbance() {
        let mut cfg = reference::example2_case2();
        cfg.model.q = MatrixSpec::Zeros { zeros: [2, 2] };
        let scn = Scenario::from_config(&cfg).unwrap();
        let first = simulate_truth(&scn, 5).unwrap();
        let replay = simulate_with_disturbance(&scn, 5, first.d.clone()).unwrap();
        assert_eq!(first.x, replay.x);
    }

    #[test]
    fn constant_bias_example_has_scheduled_steps() {
        let scn = Scenario::from_config(&reference::example1()).unwrap();
        let t = simulate_truth(&scn, 0).unwrap();
        assert!(t.d.iter().all(|d| d == &DVector::from_element(2, 1.0)));
        assert_eq!(t.f[99], DVector::zeros(2));
        assert_eq!(t.f[100][0], 1.0);
        assert_eq!(t.f[150][1], 0.8);
        assert_eq!(t.u[250][0], -0.5);
    }

    #[test]
    fn config_errors_name_fields() {
        let mut cfg = reference::example1();
        cfg.noise.filter_kr = 0.0;
        let err = Scenario::from_config(&cfg).unwrap_err();
        assert!(err.to_string().contains("noise.filter_kr"), "{err}");

        let mut cfg = reference::example1();
        cfg.faults.segments[0].value = vec![1.0];
        let err = Scenario::from_config(&cfg).unwrap_err();
        assert!(err.to_string().contains("faults["), "{err}");

        let text = reference::EXAMPLE1_CFG.replace("horizon = 500", "horizon = 500\nbogus = 1");
        let err = ScenarioConfig::from_toml_str(&text).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }
}
