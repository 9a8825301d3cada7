use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }
}

/// Scalar bounds on the quantities entering the one-step fault error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBoundInputs {
    pub a: Interval,
    pub f: Interval,
    pub h: Interval,
    pub e: Interval,
    /// State estimation error.
    pub ex: Interval,
    /// Disturbance estimation error.
    pub ed: Interval,
    /// Process noise.
    pub w: Interval,
    /// Disturbance random-walk noise.
    pub wd: Interval,
    /// Measurement noise.
    pub v: Interval,
}

impl ErrorBoundInputs {
    pub fn uniform(iv: Interval) -> Self {
        ErrorBoundInputs { a: iv, f: iv, h: iv, e: iv, ex: iv, ed: iv, w: iv, wd: iv, v: iv }
    }

    pub fn validate(&self) -> Result<()> {
        let pairs = [
            ("a", self.a),
            ("f", self.f),
            ("h", self.h),
            ("e", self.e),
            ("ex", self.ex),
            ("ed", self.ed),
            ("w", self.w),
            ("wd", self.wd),
            ("v", self.v),
        ];
        for (name, iv) in pairs {
            if !(iv.lo <= iv.hi) {
                return Err(Error::config(name, format!("lower bound {} exceeds upper bound {}", iv.lo, iv.hi)));
            }
        }
        if !(self.f.lo > 0.0) {
            return Err(Error::config("f", "lower bound must be positive"));
        }
        Ok(())
    }
}

/// `[(h̲(a̲e̲ₓ + e̲e̲_d + w̲ + e̲w̲_d) + v̲)/f̄, (h̄(āēₓ + ēē_d + w̄ + ēw̄_d) + v̄)/f̲]`.
pub fn fault_error_bound(b: &ErrorBoundInputs) -> Result<Interval> {
    b.validate()?;
    let lo = (b.h.lo * (b.a.lo * b.ex.lo + b.e.lo * b.ed.lo + b.w.lo + b.e.lo * b.wd.lo) + b.v.lo) / b.f.hi;
    let hi = (b.h.hi * (b.a.hi * b.ex.hi + b.e.hi * b.ed.hi + b.w.hi + b.e.hi * b.wd.hi) + b.v.hi) / b.f.lo;
    Ok(Interval { lo, hi })
}
