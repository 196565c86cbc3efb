//! Space–time smoothing at a single length scale `ℓ`.
//!
//! Space: convolution with a product of compactly supported 1D bumps
//! `b_ℓ(x) = ℓ⁻¹ b(x/ℓ)`, applied as an exact Fourier multiplier (the
//! kernel transform is evaluated by quadrature, so constants are preserved
//! bitwise). Time: a one-sided kernel supported on `(0, ℓ)`, discretized on
//! the sample grid with weights renormalized to sum to one, so the result
//! at time `t` depends only on strictly earlier samples.

use crate::field::TorusField;
use crate::quadrature::integrate;
use crate::{JetkitError, Result};

/// `exp(-1/(1-u²))` on `(-1, 1)`, the even spatial bump (unnormalized).
fn spatial_bump(u: f64) -> f64 {
    if u.abs() < 1.0 {
        (-1.0 / (1.0 - u * u)).exp()
    } else {
        0.0
    }
}

/// `exp(-1/(u(1-u)))` on `(0, 1)`, the one-sided time bump (unnormalized).
/// Symmetric about `u = 1/2`, so its first moment is exactly `1/2`.
fn time_bump(u: f64) -> f64 {
    if u > 0.0 && u < 1.0 {
        (-1.0 / (u * (1.0 - u))).exp()
    } else {
        0.0
    }
}

#[derive(Debug, Clone)]
pub struct SpaceTimeMollifier {
    pub ell: f64,
    pub dt: f64,
    /// `b̂(kℓ)/b̂(0)` for `k = 0..=nyquist`.
    multiplier: Vec<f64>,
    /// Past-sample weights at lags `1·dt, …, J·dt`; sums to exactly 1.
    time_weights: Vec<f64>,
}

impl SpaceTimeMollifier {
    /// Build a mollifier for grids up to the given Nyquist frequency and
    /// time step.  Requires `ell ≥ 2·dt` so the one-sided time kernel sees
    /// at least one past sample; the spatial multiplier is exact on
    /// band-limited fields at any `ell > 0`, so no spatial floor is imposed.
    pub fn new(ell: f64, dt: f64, nyquist: usize) -> Result<Self> {
        let floor = 2.0 * dt;
        if !(ell > 0.0) || ell < floor {
            return Err(JetkitError::UnderResolved(format!(
                "smoothing scale {ell:.3e} below resolution floor {floor:.3e} \
                 (need ell ≥ 2·dt)"
            )));
        }

        // One fixed quadrature rule for every k keeps m(0) = 1 exactly.
        let n_nodes = 60 + 4 * ((nyquist as f64 * ell).ceil() as usize);
        let z = integrate(-1.0, 1.0, n_nodes, spatial_bump);
        let multiplier = (0..=nyquist)
            .map(|k| {
                let kl = k as f64 * ell;
                integrate(-1.0, 1.0, n_nodes, |u| spatial_bump(u) * (kl * u).cos()) / z
            })
            .collect();

        let jmax = (ell / dt - 1e-12).floor() as usize;
        let mut time_weights: Vec<f64> = (1..=jmax)
            .map(|j| time_bump(j as f64 * dt / ell))
            .collect();
        let total: f64 = time_weights.iter().sum();
        if total <= 0.0 {
            return Err(JetkitError::Mollifier(format!(
                "no past samples inside (0, {ell:.3e}) at dt = {dt:.3e}"
            )));
        }
        for w in time_weights.iter_mut() {
            *w /= total;
        }

        Ok(SpaceTimeMollifier {
            ell,
            dt,
            multiplier,
            time_weights,
        })
    }

    /// Number of past samples the time kernel reaches back.
    pub fn time_depth(&self) -> usize {
        self.time_weights.len()
    }

    pub fn time_weights(&self) -> &[f64] {
        &self.time_weights
    }

    /// First moment `Σ w_j · (j dt)` of the discrete time kernel; the
    /// continuum value is `ℓ/2`.
    pub fn discrete_time_shift(&self) -> f64 {
        self.time_weights
            .iter()
            .enumerate()
            .map(|(i, w)| w * ((i + 1) as f64) * self.dt)
            .sum()
    }

    /// Spatial smoothing of every component by the product-kernel multiplier.
    pub fn smooth_space(&self, f: &TorusField) -> Result<TorusField> {
        if (f.grid.nyquist() + 1) as usize > self.multiplier.len() {
            return Err(JetkitError::Mollifier(
                "mollifier built for a coarser grid".into(),
            ));
        }
        let mut out = TorusField::zeros(&f.grid, f.rank);
        let n = f.grid.n;
        for c in 0..f.ncomp() {
            let mut coeffs = f.to_spectral(c);
            for i in 0..n {
                let mx = self.multiplier[f.grid.freq(i).unsigned_abs() as usize];
                for j in 0..n {
                    let my = self.multiplier[f.grid.freq(j).unsigned_abs() as usize];
                    for k in 0..n {
                        let mz = self.multiplier[f.grid.freq(k).unsigned_abs() as usize];
                        coeffs[[i, j, k]] *= mx * my * mz;
                    }
                }
            }
            out.set_from_spectral(c, &coeffs);
        }
        Ok(out)
    }

    /// Causal time smoothing. `history[j]` must hold the sample at `t − j·dt`
    /// (`history[0]` is the current time, which the kernel does not touch).
    pub fn smooth_time(&self, history: &[TorusField]) -> Result<TorusField> {
        let depth = self.time_depth();
        if history.len() <= depth {
            return Err(JetkitError::TimeSeries(format!(
                "time smoothing needs {depth} past samples, have {}",
                history.len().saturating_sub(1)
            )));
        }
        let mut out = TorusField::zeros(&history[0].grid, history[0].rank);
        for (j, w) in self.time_weights.iter().enumerate() {
            out.axpy(*w, &history[j + 1])?;
        }
        Ok(out)
    }

    /// Causal time smoothing of a scalar series (same layout as above).
    pub fn smooth_time_scalars(&self, history: &[f64]) -> Result<f64> {
        let depth = self.time_depth();
        if history.len() <= depth {
            return Err(JetkitError::TimeSeries(format!(
                "time smoothing needs {depth} past samples, have {}",
                history.len().saturating_sub(1)
            )));
        }
        Ok(self
            .time_weights
            .iter()
            .enumerate()
            .map(|(j, w)| w * history[j + 1])
            .sum())
    }

    /// Full space–time smoothing: time kernel over the history, then the
    /// spatial multiplier.
    pub fn smooth(&self, history: &[TorusField]) -> Result<TorusField> {
        self.smooth_space(&self.smooth_time(history)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rejects_under_resolved_scale() {
        let err = SpaceTimeMollifier::new(0.01, 0.008, 8);
        assert!(matches!(err, Err(JetkitError::UnderResolved(_))));
    }

    #[test]
    fn constants_pass_through_exactly() {
        let g = TorusGrid::new(16).unwrap();
        let m = SpaceTimeMollifier::new(1.0, 0.05, g.nyquist() as usize).unwrap();
        let f = TorusField::scalar_from_fn(&g, |_, _, _| 2.5);
        let s = m.smooth_space(&f).unwrap();
        let err = s
            .comp(0)
            .iter()
            .map(|v| (v - 2.5).abs())
            .fold(0.0f64, f64::max);
        assert!(err < 1e-14);

        let hist: Vec<TorusField> = (0..m.time_depth() + 1).map(|_| f.clone()).collect();
        let st = m.smooth_time(&hist).unwrap();
        let err = st
            .comp(0)
            .iter()
            .map(|v| (v - 2.5).abs())
            .fold(0.0f64, f64::max);
        assert!(err < 1e-14);
    }

    #[test]
    fn spatial_action_on_single_mode_is_multiplicative() {
        let g = TorusGrid::new(16).unwrap();
        let ell = 0.8;
        let m = SpaceTimeMollifier::new(ell, 0.05, g.nyquist() as usize).unwrap();
        let f = TorusField::scalar_from_fn(&g, |x, _, _| x.sin());
        let s = m.smooth_space(&f).unwrap();
        // (b_ℓ ∗ sin)(x) = m(1)·sin(x) with m(1) = ∫ b(u) cos(ℓu) du / ∫ b
        let z = integrate(-1.0, 1.0, 80, spatial_bump);
        let m1 = integrate(-1.0, 1.0, 80, |u| spatial_bump(u) * (ell * u).cos()) / z;
        assert!(m1 < 1.0 && m1 > 0.5);
        let expected = TorusField::scalar_from_fn(&g, |x, _, _| m1 * x.sin());
        let err = s
            .comp(0)
            .iter()
            .zip(expected.comp(0).iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(err < 1e-10, "multiplier mismatch {err}");
    }

    #[test]
    fn time_kernel_shift_matches_half_ell() {
        // mollifying the ramp f(t) = t yields t − Σ w_j s_j; the continuum
        // shift is ℓ/2 by the kernel's symmetry, discretization error O(dt²)
        let ell = 0.5;
        let dt = ell / 60.0;
        let m = SpaceTimeMollifier::new(ell, dt, 8).unwrap();
        let shift = m.discrete_time_shift();
        assert_abs_diff_eq!(shift, ell / 2.0, epsilon = 1e-3 * ell);

        let t = 3.0;
        let hist: Vec<f64> = (0..m.time_depth() + 1).map(|j| t - j as f64 * dt).collect();
        let smoothed = m.smooth_time_scalars(&hist).unwrap();
        assert_abs_diff_eq!(smoothed, t - shift, epsilon = 1e-12);
    }
}
