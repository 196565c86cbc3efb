//! Temporal switch for the data-tracking step: a C^4 monotone ramp that is
//! identically 0 up to `t_on` and identically 1 from `t_off` on.
//!
//! The ramp is the degree-9 smoothstep, the lowest-degree polynomial whose
//! first four derivatives vanish at both ends, so products like `chi^2` and
//! the error terms that carry `chi'` stay four times continuously
//! differentiable across the matching points.

use crate::{JetkitError, Result};

/// Degree-9 smoothstep on `[0, 1]`: `s(u) = 126u^5 - 420u^6 + 540u^7 -
/// 315u^8 + 70u^9`.
fn smoothstep(u: f64) -> f64 {
    let u5 = u * u * u * u * u;
    u5 * (126.0 + u * (-420.0 + u * (540.0 + u * (-315.0 + u * 70.0))))
}

/// Derivative of [`smoothstep`]: `630 u^4 (1-u)^4`.
fn smoothstep_deriv(u: f64) -> f64 {
    let v = u * (1.0 - u);
    630.0 * v * v * v * v
}

/// The switch `chi(t)` with its ramp window `[t_on, t_off]`.
#[derive(Debug, Clone, Copy)]
pub struct TimeCutoff {
    pub t_on: f64,
    pub t_off: f64,
}

impl TimeCutoff {
    pub fn new(t_on: f64, t_off: f64) -> Result<Self> {
        if !(t_on.is_finite() && t_off.is_finite() && t_on < t_off) {
            return Err(JetkitError::Params(format!(
                "cut-off window needs t_on < t_off, got [{t_on}, {t_off}]"
            )));
        }
        Ok(TimeCutoff { t_on, t_off })
    }

    fn arg(&self, t: f64) -> f64 {
        (t - self.t_on) / (self.t_off - self.t_on)
    }

    /// `chi(t)`: 0 before the window, 1 after, smoothstep inside.
    pub fn value(&self, t: f64) -> f64 {
        let u = self.arg(t);
        if u <= 0.0 {
            0.0
        } else if u >= 1.0 {
            1.0
        } else {
            smoothstep(u)
        }
    }

    /// `chi'(t)`.
    pub fn deriv(&self, t: f64) -> f64 {
        let u = self.arg(t);
        if u <= 0.0 || u >= 1.0 {
            0.0
        } else {
            smoothstep_deriv(u) / (self.t_off - self.t_on)
        }
    }
}
