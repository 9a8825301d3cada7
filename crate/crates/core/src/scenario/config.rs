//! Scenario files: TOML documents describing the plant, signals, estimator
//! settings and analysis options of one experiment.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::dryden::DrydenParams;
use super::profile::{FaultSchedule, InputSpec};
use crate::dmae::{DmaeParams, InitialBelief};
use crate::error::{Error, Result};
use crate::model::{LtvModel, MatrixSeq};

/// A matrix written as rows, a diagonal, a zero block, or a per-step sequence of row lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Rows(Vec<Vec<f64>>),
    Diag {
        diag: Vec<f64>,
    },
    Zeros {
        zeros: [usize; 2],
    },
    Sequence {
        sequence: Vec<Vec<Vec<f64>>>,
    },
}

fn rows_to_matrix(rows: &[Vec<f64>], field: &str) -> Result<DMatrix<f64>> {
    let ncols = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::config(field, "rows have different lengths"));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

impl MatrixSpec {
    pub fn diag(values: &[f64]) -> Self {
        MatrixSpec::Diag { diag: values.to_vec() }
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        MatrixSpec::Rows((0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect())
    }

    pub fn to_seq(&self, field: &str) -> Result<MatrixSeq> {
        Ok(match self {
            MatrixSpec::Rows(rows) => MatrixSeq::Constant(rows_to_matrix(rows, field)?),
            MatrixSpec::Diag { diag } => MatrixSeq::Constant(DMatrix::from_diagonal(&DVector::from_column_slice(diag))),
            MatrixSpec::Zeros { zeros: [r, c] } => MatrixSeq::Constant(DMatrix::zeros(*r, *c)),
            MatrixSpec::Sequence { sequence } => {
                if sequence.is_empty() {
                    return Err(Error::config(field, "sequence is empty"));
                }
                MatrixSeq::Tabulated(
                    sequence
                        .iter()
                        .enumerate()
                        .map(|(k, rows)| rows_to_matrix(rows, &format!("{field}[{k}]")))
                        .collect::<Result<_>>()?,
                )
            }
        })
    }

    /// A single matrix; sequences are rejected.
    pub fn to_matrix(&self, field: &str) -> Result<DMatrix<f64>> {
        match self.to_seq(field)? {
            MatrixSeq::Constant(m) => Ok(m),
            MatrixSeq::Tabulated(_) => Err(Error::config(field, "must be a single matrix")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(rename = "A")]
    pub a: MatrixSpec,
    #[serde(rename = "B")]
    pub b: MatrixSpec,
    #[serde(rename = "E")]
    pub e: MatrixSpec,
    #[serde(rename = "H")]
    pub h: MatrixSpec,
    #[serde(rename = "F")]
    pub f: MatrixSpec,
    #[serde(rename = "Q")]
    pub q: MatrixSpec,
    #[serde(rename = "R")]
    pub r: MatrixSpec,
}

impl ModelSpec {
    pub fn build(&self) -> Result<LtvModel> {
        LtvModel::new(
            self.a.to_seq("model.A")?,
            self.b.to_seq("model.B")?,
            self.e.to_seq("model.E")?,
            self.h.to_seq("model.H")?,
            self.f.to_seq("model.F")?,
            self.q.to_seq("model.Q")?,
            self.r.to_seq("model.R")?,
        )
    }
}

/// Multipliers on `Q` and `R`, separately for the simulated plant and for the
/// covariances the estimators assume.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseScaling {
    pub truth_kq: f64,
    pub truth_kr: f64,
    pub filter_kq: f64,
    pub filter_kr: f64,
}

impl Default for NoiseScaling {
    fn default() -> Self {
        NoiseScaling { truth_kq: 1.0, truth_kr: 1.0, filter_kq: 1.0, filter_kr: 1.0 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DisturbanceSpec {
    #[default]
    None,
    Constant {
        value: Vec<f64>,
    },
    Dryden(DrydenParams),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DmaeSpec {
    pub x0_f: Option<Vec<f64>>,
    pub p0_f: Option<MatrixSpec>,
    pub qf: Option<MatrixSpec>,
    pub prob_floor: f64,
    pub window: usize,
    pub freeze_fault_when_dominant: bool,
    pub initial_probs: [f64; 2],
    pub adapt_qd: bool,
    pub qd_initial: Option<MatrixSpec>,
    pub rearm_threshold: Option<f64>,
}

impl Default for DmaeSpec {
    fn default() -> Self {
        DmaeSpec {
            x0_f: None,
            p0_f: None,
            qf: None,
            prob_floor: 1e-3,
            window: 10,
            freeze_fault_when_dominant: false,
            initial_probs: [0.95, 0.05],
            adapt_qd: true,
            qd_initial: None,
            rearm_threshold: None,
        }
    }
}

impl DmaeSpec {
    pub fn build(&self, n_d: usize, n_f: usize) -> Result<DmaeParams> {
        let mut p = DmaeParams::defaults(n_d, n_f);
        if let Some(v) = &self.x0_f {
            p.x0_f = DVector::from_column_slice(v);
        }
        if let Some(m) = &self.p0_f {
            p.p0_f = m.to_matrix("dmae.p0_f")?;
        }
        if let Some(m) = &self.qf {
            p.qf = m.to_matrix("dmae.qf")?;
        }
        if let Some(m) = &self.qd_initial {
            p.qd_initial = m.to_matrix("dmae.qd_initial")?;
        }
        p.prob_floor = self.prob_floor;
        p.window_n = self.window;
        p.freeze_fault_when_dominant = self.freeze_fault_when_dominant;
        p.initial_probs = self.initial_probs;
        p.adapt_qd = self.adapt_qd;
        p.rearm_threshold = self.rearm_threshold;
        Ok(p)
    }
}

/// Estimator start-up beliefs on `x` and `d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitSpec {
    pub x_mean: Option<Vec<f64>>,
    pub x_var: f64,
    pub d_mean: Option<Vec<f64>>,
    pub d_var: f64,
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec { x_mean: None, x_var: 1.0, d_mean: None, d_var: 1.0 }
    }
}

impl InitSpec {
    pub fn build(&self, n: usize, n_d: usize) -> Result<InitialBelief> {
        let vec_or_zero = |v: &Option<Vec<f64>>, len: usize, field: &str| match v {
            Some(v) if v.len() != len => Err(Error::config(field, format!("expected {len} entries, found {}", v.len()))),
            Some(v) => Ok(DVector::from_column_slice(v)),
            None => Ok(DVector::zeros(len)),
        };
        if !(self.x_var > 0.0 && self.d_var > 0.0) {
            return Err(Error::config("filter_init", "variances must be positive"));
        }
        Ok(InitialBelief {
            x_mean: vec_or_zero(&self.x_mean, n, "filter_init.x_mean")?,
            x_cov: DMatrix::identity(n, n) * self.x_var,
            d_mean: vec_or_zero(&self.d_mean, n_d, "filter_init.d_mean")?,
            d_cov: DMatrix::identity(n_d, n_d) * self.d_var,
        })
    }
}

/// Fixed random-walk covariances for the augmented Kalman filter baseline.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AkfSpec {
    pub qd: Option<MatrixSpec>,
    pub qf: Option<MatrixSpec>,
    pub f_var: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PfSpec {
    pub particles: usize,
    /// Per-step variance of the fault random walk inside the particle filter.
    pub fault_noise: f64,
    pub qd: Option<MatrixSpec>,
    pub f_var: f64,
}

impl Default for PfSpec {
    fn default() -> Self {
        PfSpec { particles: 100, fault_noise: 1e-6, qd: None, f_var: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSpec {
    pub burn_in: usize,
    /// Steps skipped after each fault edge for steady-state metrics.
    pub edge_exclusion: usize,
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        AnalysisSpec { burn_in: 10, edge_exclusion: 10 }
    }
}

fn default_horizon() -> usize {
    500
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    pub model: ModelSpec,
    /// True initial state; zero when omitted.
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default)]
    pub noise: NoiseScaling,
    #[serde(default)]
    pub disturbance: DisturbanceSpec,
    #[serde(default)]
    pub faults: FaultSchedule,
    #[serde(default)]
    pub input: InputSpec,
    #[serde(default)]
    pub dmae: DmaeSpec,
    #[serde(default)]
    pub filter_init: InitSpec,
    #[serde(default)]
    pub akf: AkfSpec,
    #[serde(default)]
    pub pf: PfSpec,
    #[serde(default)]
    pub analysis: AnalysisSpec,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let field = e.span().map(|s| format!("bytes {}..{}", s.start, s.end)).unwrap_or_default();
            Error::Config { field, message: e.message().to_string() }
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    /// SHA-256 of the canonical JSON encoding, hex encoded.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config is always serializable");
        hex::encode(Sha256::digest(bytes))
    }

    /// Command-line seed, then the config's seed, then 0.
    pub fn resolve_seed(&self, override_seed: Option<u64>) -> u64 {
        override_seed.or(self.seed).unwrap_or(0)
    }
}
