//! Band-limited divergence-free coefficient fields for the transport
//! velocity.
//!
//! Each noise channel drives one vector field made of single-trig modes
//! `amplitude * trig(wavenumber * x_axis) * e_comp`; such a mode is exactly
//! divergence free whenever the varying axis differs from the component it
//! feeds.  Channel `k` of the path is paired with `modes[k]`.

use crate::config::SigmaSpec;
use crate::field::TorusField;
use crate::grid::TorusGrid;
use crate::{JetkitError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrigPhase {
    Sin,
    Cos,
}

/// One single-frequency shear mode of a coefficient field.
#[derive(Debug, Clone, Copy)]
pub struct SigmaMode {
    /// Vector component the mode feeds.
    pub comp: usize,
    /// Coordinate axis the trig factor varies along.
    pub axis: usize,
    pub phase: TrigPhase,
    pub wavenumber: i64,
    pub amplitude: f64,
}

impl SigmaMode {
    pub fn eval(&self, x: [f64; 3]) -> [f64; 3] {
        let arg = self.wavenumber as f64 * x[self.axis];
        let t = match self.phase {
            TrigPhase::Sin => arg.sin(),
            TrigPhase::Cos => arg.cos(),
        };
        let mut v = [0.0; 3];
        v[self.comp] = self.amplitude * t;
        v
    }

    /// Gradient row: `∂_j (mode)_comp` is nonzero only at `j = axis`.
    pub fn eval_gradient(&self, x: [f64; 3]) -> [[f64; 3]; 3] {
        let w = self.wavenumber as f64;
        let arg = w * x[self.axis];
        let dt = match self.phase {
            TrigPhase::Sin => w * arg.cos(),
            TrigPhase::Cos => -w * arg.sin(),
        };
        let mut g = [[0.0; 3]; 3];
        g[self.comp][self.axis] = self.amplitude * dt;
        g
    }
}

/// The per-channel coefficient fields `sigma_k`.
#[derive(Debug, Clone, Default)]
pub struct SigmaFields {
    /// `modes[k]` lists the trig modes of channel `k`.
    pub modes: Vec<Vec<SigmaMode>>,
}

impl SigmaFields {
    /// Build from a run-configuration noise block.
    pub fn from_spec(spec: &SigmaSpec) -> Result<Self> {
        let fields = match spec {
            SigmaSpec::Zero => SigmaFields { modes: Vec::new() },
            SigmaSpec::Shear { amplitude } => {
                let a = *amplitude;
                let mk = |comp, axis| SigmaMode {
                    comp,
                    axis,
                    phase: TrigPhase::Sin,
                    wavenumber: 1,
                    amplitude: a,
                };
                SigmaFields {
                    modes: vec![vec![mk(0, 1)], vec![mk(1, 2)], vec![mk(2, 0)]],
                }
            }
        };
        fields.validate()?;
        Ok(fields)
    }

    /// A single shear channel `(amp sin(x_axis2) , 0, 0)`-style field.
    pub fn single(mode: SigmaMode) -> Result<Self> {
        let fields = SigmaFields {
            modes: vec![vec![mode]],
        };
        fields.validate()?;
        Ok(fields)
    }

    pub fn channels(&self) -> usize {
        self.modes.len()
    }

    /// Structural divergence-freeness: every mode must vary transversally
    /// to the component it feeds.
    pub fn validate(&self) -> Result<()> {
        for (k, chan) in self.modes.iter().enumerate() {
            for m in chan {
                if m.comp > 2 || m.axis > 2 {
                    return Err(JetkitError::Flow(format!(
                        "coefficient mode of channel {k} has indices out of range"
                    )));
                }
                if m.comp == m.axis {
                    return Err(JetkitError::Flow(format!(
                        "coefficient mode of channel {k} varies along its own component \
                         and is not divergence free"
                    )));
                }
                if m.wavenumber == 0 {
                    return Err(JetkitError::Flow(format!(
                        "coefficient mode of channel {k} has zero wavenumber"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Channel field at a point.
    pub fn eval_channel(&self, k: usize, x: [f64; 3]) -> [f64; 3] {
        let mut v = [0.0; 3];
        for m in &self.modes[k] {
            let u = m.eval(x);
            for (vi, ui) in v.iter_mut().zip(u.iter()) {
                *vi += ui;
            }
        }
        v
    }

    /// Transport velocity `sum_k rate_k sigma_k(x)`.
    pub fn velocity(&self, rates: &[f64], x: [f64; 3]) -> [f64; 3] {
        debug_assert_eq!(rates.len(), self.channels());
        let mut v = [0.0; 3];
        for (rate, chan) in rates.iter().zip(self.modes.iter()) {
            if *rate == 0.0 {
                continue;
            }
            for m in chan {
                let u = m.eval(x);
                for (vi, ui) in v.iter_mut().zip(u.iter()) {
                    *vi += rate * ui;
                }
            }
        }
        v
    }

    /// Grid sampling of channel `k` as a vector field.
    pub fn sample(&self, grid: &TorusGrid, k: usize) -> TorusField {
        let chan = self.modes[k].clone();
        TorusField::vector_from_fn(grid, move |x, y, z| {
            let mut v = [0.0; 3];
            for m in &chan {
                let u = m.eval([x, y, z]);
                for (vi, ui) in v.iter_mut().zip(u.iter()) {
                    *vi += ui;
                }
            }
            v
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::lp_norm;
    use crate::spectral::divergence;

    #[test]
    fn zero_spec_has_no_channels() {
        let s = SigmaFields::from_spec(&SigmaSpec::Zero).unwrap();
        assert_eq!(s.channels(), 0);
    }

    #[test]
    fn shear_spec_matches_canonical_fields() {
        let s = SigmaFields::from_spec(&SigmaSpec::Shear { amplitude: 0.7 }).unwrap();
        assert_eq!(s.channels(), 3);
        let x = [0.3, 1.1, -0.4];
        let v0 = s.eval_channel(0, x);
        assert_eq!(v0, [0.7 * x[1].sin(), 0.0, 0.0]);
        let v1 = s.eval_channel(1, x);
        assert_eq!(v1, [0.0, 0.7 * x[2].sin(), 0.0]);
        let v2 = s.eval_channel(2, x);
        assert_eq!(v2, [0.0, 0.0, 0.7 * x[0].sin()]);
    }

    #[test]
    fn self_varying_mode_is_rejected() {
        let bad = SigmaFields::single(SigmaMode {
            comp: 1,
            axis: 1,
            phase: TrigPhase::Cos,
            wavenumber: 2,
            amplitude: 1.0,
        });
        assert!(bad.is_err());
    }

    #[test]
    fn sampled_channels_are_divergence_free_spectrally() {
        let grid = TorusGrid::new(16).unwrap();
        let s = SigmaFields::from_spec(&SigmaSpec::Shear { amplitude: 2.0 }).unwrap();
        for k in 0..s.channels() {
            let f = s.sample(&grid, k);
            let norm = lp_norm(&f, 2.0);
            let div = divergence(&f).unwrap();
            let dn = lp_norm(&div, 2.0);
            assert!(
                dn < 1e-12 * norm,
                "channel {k}: ||div sigma|| = {dn} vs 1e-12 * {norm}"
            );
        }
    }

    #[test]
    fn velocity_is_linear_in_rates() {
        let s = SigmaFields::from_spec(&SigmaSpec::Shear { amplitude: 1.5 }).unwrap();
        let x = [0.2, 2.3, 4.1];
        let v = s.velocity(&[2.0, -1.0, 0.5], x);
        let expect = [
            2.0 * 1.5 * x[1].sin(),
            -1.5 * x[2].sin(),
            0.5 * 1.5 * x[0].sin(),
        ];
        for (a, b) in v.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let m = SigmaMode {
            comp: 0,
            axis: 2,
            phase: TrigPhase::Cos,
            wavenumber: 3,
            amplitude: 0.9,
        };
        let x = [0.5, 1.0, 0.7];
        let g = m.eval_gradient(x);
        let h = 1e-6;
        for j in 0..3 {
            let mut xp = x;
            xp[j] += h;
            let mut xm = x;
            xm[j] -= h;
            let fd = (m.eval(xp)[0] - m.eval(xm)[0]) / (2.0 * h);
            assert!((g[0][j] - fd).abs() < 1e-8, "axis {j}");
        }
    }
}
