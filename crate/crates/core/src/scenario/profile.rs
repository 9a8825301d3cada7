//! Piecewise-constant fault schedules and known-input signals.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fault value held on the half-open step interval `[start, end)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultSegment {
    pub start: usize,
    pub end: usize,
    pub value: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FaultSchedule {
    pub segments: Vec<FaultSegment>,
}

impl FaultSchedule {
    pub fn new(segments: Vec<FaultSegment>) -> Self {
        FaultSchedule { segments }
    }

    /// Rejects empty, out-of-range, wrongly sized or overlapping segments.
    pub fn validate(&self, n_f: usize, horizon: usize) -> Result<()> {
        let mut sorted: Vec<&FaultSegment> = self.segments.iter().collect();
        sorted.sort_by_key(|s| s.start);
        for (i, s) in sorted.iter().enumerate() {
            let field = format!("faults[{i}]");
            if s.start >= s.end {
                return Err(Error::config(field, format!("start {} must precede end {}", s.start, s.end)));
            }
            if s.end > horizon {
                return Err(Error::config(field, format!("end {} exceeds horizon {horizon}", s.end)));
            }
            if s.value.len() != n_f {
                return Err(Error::config(field, format!("value has {} entries, fault dimension is {n_f}", s.value.len())));
            }
            if i > 0 && sorted[i - 1].end > s.start {
                return Err(Error::config(field, format!("overlaps the segment ending at {}", sorted[i - 1].end)));
            }
        }
        Ok(())
    }

    pub fn eval(&self, k: usize, n_f: usize) -> DVector<f64> {
        self.segments
            .iter()
            .find(|s| s.start <= k && k < s.end)
            .map(|s| DVector::from_column_slice(&s.value))
            .unwrap_or_else(|| DVector::zeros(n_f))
    }

    /// Steps at which the fault value changes, sorted and deduplicated.
    pub fn edges(&self, n_f: usize, horizon: usize) -> Vec<usize> {
        (1..horizon).filter(|&k| self.eval(k, n_f) != self.eval(k - 1, n_f)).collect()
    }

    /// Maximal runs of nonzero fault as `(onset, removal)` pairs.
    pub fn episodes(&self, n_f: usize, horizon: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut start = None;
        for k in 0..=horizon {
            let active = k < horizon && self.eval(k, n_f).iter().any(|&v| v != 0.0);
            match (active, start) {
                (true, None) => start = Some(k),
                (false, Some(s)) => {
                    out.push((s, k));
                    start = None;
                }
                _ => {}
            }
        }
        out
    }
}

/// Free-function form of [`FaultSchedule::eval`].
pub fn fault_profile_eval(schedule: &FaultSchedule, k: usize, n_f: usize) -> DVector<f64> {
    schedule.eval(k, n_f)
}

/// Reference two-channel profile: `f₁ = 1` on `[100, 250)`, `−0.5` on `[250, 400)`;
/// `f₂ = 0.8` on `[150, 350)`.
pub fn default_fault_profile() -> FaultSchedule {
    let seg = |start, end, a: f64, b: f64| FaultSegment { start, end, value: vec![a, b] };
    FaultSchedule::new(vec![
        seg(100, 150, 1.0, 0.0),
        seg(150, 250, 1.0, 0.8),
        seg(250, 350, -0.5, 0.8),
        seg(350, 400, -0.5, 0.0),
    ])
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InputSpec {
    /// Zero input of the model's input dimension.
    #[default]
    Zero,
    Constant { value: Vec<f64> },
    /// Scalar `low` for `start < k ≤ end`, `high` otherwise.
    Switch {
        #[serde(default = "default_high")]
        high: f64,
        #[serde(default = "default_low")]
        low: f64,
        #[serde(default = "default_switch_start")]
        start: usize,
        #[serde(default = "default_switch_end")]
        end: usize,
    },
}

fn default_high() -> f64 {
    0.5
}
fn default_low() -> f64 {
    -0.5
}
fn default_switch_start() -> usize {
    200
}
fn default_switch_end() -> usize {
    300
}

impl InputSpec {
    /// The reference switching input: −0.5 for `200 < k ≤ 300`, 0.5 otherwise.
    pub fn reference_switch() -> Self {
        InputSpec::Switch { high: 0.5, low: -0.5, start: 200, end: 300 }
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        match self {
            InputSpec::Zero => Ok(()),
            InputSpec::Constant { value } if value.len() != p => {
                Err(Error::config("input.value", format!("has {} entries, input dimension is {p}", value.len())))
            }
            InputSpec::Switch { .. } if p != 1 => Err(Error::config("input.kind", "switch input needs a scalar input")),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, k: usize, p: usize) -> DVector<f64> {
        match self {
            InputSpec::Zero => DVector::zeros(p),
            InputSpec::Constant { value } => DVector::from_column_slice(value),
            InputSpec::Switch { high, low, start, end } => {
                DVector::from_element(1, if *start < k && k <= *end { *low } else { *high })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_schedule_is_zero() {
        let s = FaultSchedule::default();
        for k in [0, 10, 1000] {
            assert_eq!(s.eval(k, 2), DVector::zeros(2));
        }
    }

    #[test]
    fn default_profile_values_and_boundaries() {
        let s = default_fault_profile();
        assert!(s.validate(2, 500).is_ok());
        let at = |k| {
            let v = s.eval(k, 2);
            (v[0], v[1])
        };
        assert_eq!(at(99), (0.0, 0.0));
        assert_eq!(at(100), (1.0, 0.0));
        assert_eq!(at(150), (1.0, 0.8));
        assert_eq!(at(249), (1.0, 0.8));
        assert_eq!(at(250), (-0.5, 0.8));
        assert_eq!(at(350), (-0.5, 0.0));
        assert_eq!(at(399), (-0.5, 0.0));
        assert_eq!(at(400), (0.0, 0.0));
        assert_eq!(s.edges(2, 500), vec![100, 150, 250, 350, 400]);
        assert_eq!(s.episodes(2, 500), vec![(100, 400)]);
    }

    #[test]
    fn overlapping_segments_rejected() {
        let s = FaultSchedule::new(vec![
            FaultSegment { start: 0, end: 10, value: vec![1.0] },
            FaultSegment { start: 5, end: 20, value: vec![2.0] },
        ]);
        let err = s.validate(1, 100).unwrap_err();
        assert!(err.to_string().contains("faults[1]"), "{err}");
    }

    #[test]
    fn eval_is_order_independent() {
        let s = default_fault_profile();
        let forward: Vec<_> = (0..500).map(|k| s.eval(k, 2)).collect();
        let backward: Vec<_> = (0..500).rev().map(|k| s.eval(k, 2)).collect();
        assert!(forward.iter().eq(backward.iter().rev()));
    }

    #[test]
    fn switch_input_definition() {
        let u = InputSpec::reference_switch();
        assert_eq!(u.eval(200, 1)[0], 0.5);
        assert_eq!(u.eval(201, 1)[0], -0.5);
        assert_eq!(u.eval(300, 1)[0], -0.5);
        assert_eq!(u.eval(301, 1)[0], 0.5);
        assert_eq!(u.eval(0, 1)[0], 0.5);
    }
}
