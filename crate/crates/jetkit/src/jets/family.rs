//! Jet families: the fifteen direction-indexed oscillatory fields with
//! analytic pointwise evaluation.
//!
//! Everything is exact in frame coordinates.  For direction `xi` with
//! companion frame `(a, b)` and shift `alpha`, the scalar arguments are the
//! longitudinal phase `n* kappa (x . xi + mu t)` and the transverse phases
//! `n* kappa (x - alpha) . a`, `n* kappa (x - alpha) . b`; the profiles are
//! rescaled to widths `r_par` (longitudinal) and `r_perp` (transverse) and
//! periodized.  Because `3 xi`, `3 a`, `3 b` are integer vectors and
//! `n* = 3`, every field here is `2 pi / kappa`-periodic along each
//! coordinate axis.
//!
//! The integer phase multiplier `kappa` is the nearest integer to
//! `lambda * r_perp`, and the family works with the *effective* transverse
//! radius `kappa / lambda`, which keeps the corrector identities exact; the
//! snap discrepancy is recorded on the parameter bundle.

use std::sync::Arc;

use ndarray::parallel::prelude::*;
use ndarray::Axis;

use crate::field::TorusField;
use crate::geometry::DirectionSet;
use crate::grid::TorusGrid;
use crate::jets::profiles::JetProfiles;
use crate::{JetkitError, Result, TAU};

/// Scale bundle for one level of the iteration.
#[derive(Debug, Clone, Copy)]
pub struct JetParams {
    pub lambda: f64,
    /// Effective transverse width `kappa / lambda` (exactly consistent with
    /// the integer phase multiplier).
    pub r_perp: f64,
    /// Longitudinal width.
    pub r_par: f64,
    /// Temporal oscillation speed.
    pub mu: f64,
    /// Integer phase multiplier `kappa = round(lambda * r_perp)`.
    pub kappa: u64,
    /// `|kappa - lambda * requested_r_perp|`, recorded at the snap.
    pub kappa_discrepancy: f64,
}

impl JetParams {
    pub fn new(lambda: f64, r_perp: f64, r_par: f64, mu: f64) -> Result<Self> {
        if !(lambda >= 2.0) || !lambda.is_finite() {
            return Err(JetkitError::Params(format!(
                "lambda must be finite and >= 2, got {lambda}"
            )));
        }
        if !(r_perp > 0.0 && r_perp <= r_par && r_par < 1.0) {
            return Err(JetkitError::Params(format!(
                "need 0 < r_perp <= r_par < 1, got r_perp = {r_perp}, r_par = {r_par}"
            )));
        }
        if !(mu > 0.0) {
            return Err(JetkitError::Params(format!("mu must be positive, got {mu}")));
        }
        let exact = lambda * r_perp;
        let kappa = exact.round();
        if kappa < 1.0 {
            return Err(JetkitError::Params(format!(
                "lambda * r_perp = {exact} rounds below 1; no admissible integer phase multiplier"
            )));
        }
        let effective = kappa / lambda;
        if !(effective <= r_par) {
            return Err(JetkitError::Params(format!(
                "snapped transverse width {effective} exceeds r_par = {r_par}"
            )));
        }
        Ok(JetParams {
            lambda,
            r_perp: effective,
            r_par,
            mu,
            kappa: kappa as u64,
            kappa_discrepancy: (kappa - exact).abs(),
        })
    }
}

/// Which assembled field a grid sampler should produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JetField {
    /// The principal jet `W = psi theta xi`.
    Principal,
    /// The corrector `W^c`.
    Corrector,
    /// The vector potential `V` (so that `W + W^c = curl curl V`).
    Potential,
    /// `W + W^c`, assembled from the two definitions.
    Total,
    /// `curl curl V`, assembled independently from the potential tables.
    CurlCurlPotential,
}

/// Wrap an angle to `[-pi, pi)`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= std::f64::consts::PI {
        r - TAU
    } else {
        r
    }
}

fn dot3(x: [f64; 3], y: [f64; 3]) -> f64 {
    x[0] * y[0] + x[1] * y[1] + x[2] * y[2]
}

/// A direction set equipped with scales and profiles: the complete jet
/// family for one level.
pub struct JetFamily {
    pub params: JetParams,
    pub set: DirectionSet,
    pub profiles: Arc<JetProfiles>,
}

/// Scaled frame-coordinate arguments of one direction at one point.
#[derive(Debug, Clone, Copy)]
struct FrameArgs {
    /// Longitudinal phase, wrapped.
    long: f64,
    /// Transverse phases, wrapped.
    u: f64,
    v: f64,
}

impl JetFamily {
    pub fn new(params: JetParams, set: DirectionSet, profiles: Arc<JetProfiles>) -> Result<Self> {
        set.validate()?;
        set.check_tube_radius(params.r_perp, params.kappa)?;
        Ok(JetFamily {
            params,
            set,
            profiles,
        })
    }

    /// Family constructor that also enforces the grid resolution
    /// precondition `N >= multiplier * n_star * lambda`.
    pub fn for_grid(
        params: JetParams,
        set: DirectionSet,
        profiles: Arc<JetProfiles>,
        grid: &TorusGrid,
        multiplier: f64,
    ) -> Result<Self> {
        let fam = Self::new(params, set, profiles)?;
        fam.check_resolution(grid, multiplier)?;
        Ok(fam)
    }

    pub fn check_resolution(&self, grid: &TorusGrid, multiplier: f64) -> Result<()> {
        let need = multiplier * self.set.n_star as f64 * self.params.lambda;
        if (grid.n as f64) < need {
            return Err(JetkitError::UnderResolved(format!(
                "grid N = {} below {multiplier} * n_star * lambda = {need}",
                grid.n
            )));
        }
        Ok(())
    }

    pub fn n_dirs(&self) -> usize {
        self.set.len()
    }

    /// Phase scale `n_star * kappa`.
    pub fn phase_scale(&self) -> f64 {
        self.set.n_star as f64 * self.params.kappa as f64
    }

    fn args(&self, i: usize, x: [f64; 3], t: f64) -> FrameArgs {
        let f = &self.set.frames[i];
        let nk = self.phase_scale();
        let alpha = self.set.shift(i);
        let dx = [x[0] - alpha[0], x[1] - alpha[1], x[2] - alpha[2]];
        FrameArgs {
            long: wrap_angle(nk * (dot3(x, f.xi()) + self.params.mu * t)),
            u: wrap_angle(nk * dot3(dx, f.a())),
            v: wrap_angle(nk * dot3(dx, f.b())),
        }
    }

    /// `d^k/d(phase)^k` of the rescaled periodized longitudinal profile at
    /// the wrapped phase, for `k = 0..=kmax`.
    fn psi_pack(&self, long: f64, kmax: usize) -> Vec<f64> {
        let r = self.params.r_par;
        let w = long / r;
        if !(w.abs() < 1.0) {
            return vec![0.0; kmax + 1];
        }
        let mut d = self.profiles.psi_derivs_upto(kmax, w);
        let mut scale = 1.0 / r.sqrt();
        for v in d.iter_mut() {
            *v *= scale;
            scale /= r;
        }
        d
    }

    /// Scaled transverse profile derivative `∂^order theta_{r_perp}` at the
    /// wrapped transverse phases.
    fn theta_scaled(&self, order: (u32, u32), u: f64, v: f64) -> f64 {
        let r = self.params.r_perp;
        let (zu, zv) = (u / r, v / r);
        if zu * zu + zv * zv >= 1.0 {
            return 0.0;
        }
        let total = (order.0 + order.1) as i32;
        self.profiles.theta_deriv(order, zu, zv) * r.powi(-1 - total)
    }

    fn potential_scaled(&self, order: (u32, u32), u: f64, v: f64) -> f64 {
        let r = self.params.r_perp;
        let (zu, zv) = (u / r, v / r);
        if zu * zu + zv * zv >= 1.0 {
            return 0.0;
        }
        let total = (order.0 + order.1) as i32;
        self.profiles.potential_deriv(order, zu, zv) * r.powi(-1 - total)
    }

    /// Fast support test for direction `i` at `x` (ignores the longitudinal
    /// phase, which is time dependent).
    pub fn in_tube(&self, i: usize, x: [f64; 3]) -> bool {
        let a = self.args(i, x, 0.0);
        let r = self.params.r_perp;
        (a.u / r).powi(2) + (a.v / r).powi(2) < 1.0
    }

    /// Longitudinal scalar `psi_xi(x, t)` (and derivatives via the packs
    /// below); zero outside the support.
    pub fn psi(&self, i: usize, x: [f64; 3], t: f64) -> f64 {
        let a = self.args(i, x, t);
        self.psi_pack(a.long, 0)[0]
    }

    /// Transverse scalar `theta_xi(x)`.
    pub fn theta(&self, i: usize, x: [f64; 3]) -> f64 {
        let a = self.args(i, x, 0.0);
        self.theta_scaled((0, 0), a.u, a.v)
    }

    /// The principal jet `W_xi = xi psi_xi theta_xi`.
    pub fn w(&self, i: usize, x: [f64; 3], t: f64) -> [f64; 3] {
        let a = self.args(i, x, t);
        let s = self.psi_pack(a.long, 0)[0] * self.theta_scaled((0, 0), a.u, a.v);
        let xi = self.set.frames[i].xi();
        [s * xi[0], s * xi[1], s * xi[2]]
    }

    /// The corrector
    /// `W^c_xi = (n*^2 lambda^2)^{-1} grad(psi) x curl(Theta xi)
    ///         = (kappa/lambda)^2 psi' (Theta_u a + Theta_v b)`.
    pub fn w_corr(&self, i: usize, x: [f64; 3], t: f64) -> [f64; 3] {
        let a = self.args(i, x, t);
        let pref = (self.params.kappa as f64 / self.params.lambda).powi(2);
        let dpsi = self.psi_pack(a.long, 1)[1];
        let tu = self.potential_scaled((1, 0), a.u, a.v);
        let tv = self.potential_scaled((0, 1), a.u, a.v);
        let f = &self.set.frames[i];
        let (av, bv) = (f.a(), f.b());
        std::array::from_fn(|c| pref * dpsi * (tu * av[c] + tv * bv[c]))
    }

    /// The vector potential `V_xi = (n*^2 lambda^2)^{-1} xi psi Theta`.
    pub fn v_potential(&self, i: usize, x: [f64; 3], t: f64) -> [f64; 3] {
        let a = self.args(i, x, t);
        let nk = self.set.n_star as f64 * self.params.lambda;
        let s = self.psi_pack(a.long, 0)[0] * self.potential_scaled((0, 0), a.u, a.v)
            / (nk * nk);
        let xi = self.set.frames[i].xi();
        [s * xi[0], s * xi[1], s * xi[2]]
    }

    /// `curl curl V_xi` assembled from potential tables only (independent
    /// of the transverse profile table):
    /// `(kappa/lambda)^2 [ psi' (Theta_u a + Theta_v b)
    ///                     - psi (Theta_uu + Theta_vv) xi ]`.
    pub fn curl_curl_v(&self, i: usize, x: [f64; 3], t: f64) -> [f64; 3] {
        let a = self.args(i, x, t);
        let pref = (self.params.kappa as f64 / self.params.lambda).powi(2);
        let p = self.psi_pack(a.long, 1);
        let tu = self.potential_scaled((1, 0), a.u, a.v);
        let tv = self.potential_scaled((0, 1), a.u, a.v);
        let lap = self.potential_scaled((2, 0), a.u, a.v) + self.potential_scaled((0, 2), a.u, a.v);
        let f = &self.set.frames[i];
        let (xi, av, bv) = (f.xi(), f.a(), f.b());
        std::array::from_fn(|c| {
            pref * (p[1] * (tu * av[c] + tv * bv[c]) - p[0] * lap * xi[c])
        })
    }

    /// `div W_xi` (analytic).
    pub fn div_w(&self, i: usize, x: [f64; 3], t: f64) -> f64 {
        let a = self.args(i, x, t);
        let nk = self.phase_scale();
        nk * self.psi_pack(a.long, 1)[1] * self.theta_scaled((0, 0), a.u, a.v)
    }

    /// `div(W_xi + W^c_xi)` (analytic; identically zero when the phase
    /// multiplier is exactly `lambda * r_perp`).
    pub fn div_w_total(&self, i: usize, x: [f64; 3], t: f64) -> f64 {
        let a = self.args(i, x, t);
        let nk = self.phase_scale();
        let dpsi = self.psi_pack(a.long, 1)[1];
        let theta = self.theta_scaled((0, 0), a.u, a.v);
        let pref = (self.params.kappa as f64 / self.params.lambda).powi(2);
        let lap = self.potential_scaled((2, 0), a.u, a.v) + self.potential_scaled((0, 2), a.u, a.v);
        nk * dpsi * (theta + pref * lap)
    }

    /// `div(W_xi ⊗ W_xi)` (analytic): `2 n* kappa psi psi' theta^2 xi`.
    pub fn div_w_tensor(&self, i: usize, x: [f64; 3], t: f64) -> [f64; 3] {
        let a = self.args(i, x, t);
        let nk = self.phase_scale();
        let p = self.psi_pack(a.long, 1);
        let th = self.theta_scaled((0, 0), a.u, a.v);
        let s = 2.0 * nk * p[0] * p[1] * th * th;
        let xi = self.set.frames[i].xi();
        [s * xi[0], s * xi[1], s * xi[2]]
    }

    /// The quadratic scalar `psi^2 theta^2` for direction `i`.
    pub fn sq_scalar(&self, i: usize, x: [f64; 3], t: f64) -> f64 {
        let a = self.args(i, x, t);
        let psi = self.psi_pack(a.long, 0)[0];
        let th = self.theta_scaled((0, 0), a.u, a.v);
        psi * psi * th * th
    }

    /// Analytic `∂_t (psi^2 theta^2)`.
    pub fn sq_scalar_dt(&self, i: usize, x: [f64; 3], t: f64) -> f64 {
        let a = self.args(i, x, t);
        let p = self.psi_pack(a.long, 1);
        let th = self.theta_scaled((0, 0), a.u, a.v);
        2.0 * p[0] * p[1] * self.phase_scale() * self.params.mu * th * th
    }

    /// Evaluate one direction of the requested assembled field.
    pub fn eval(&self, which: JetField, i: usize, x: [f64; 3], t: f64) -> [f64; 3] {
        match which {
            JetField::Principal => self.w(i, x, t),
            JetField::Corrector => self.w_corr(i, x, t),
            JetField::Potential => self.v_potential(i, x, t),
            JetField::Total => {
                let w = self.w(i, x, t);
                let c = self.w_corr(i, x, t);
                [w[0] + c[0], w[1] + c[1], w[2] + c[2]]
            }
            JetField::CurlCurlPotential => self.curl_curl_v(i, x, t),
        }
    }

    /// Sum of the requested field over all directions at one point.
    pub fn eval_sum(&self, which: JetField, x: [f64; 3], t: f64) -> [f64; 3] {
        let mut out = [0.0; 3];
        for i in 0..self.n_dirs() {
            let v = self.eval(which, i, x, t);
            out[0] += v[0];
            out[1] += v[1];
            out[2] += v[2];
        }
        out
    }

    /// Sample the full family field on a collocation grid at time `t`.
    /// The resolution precondition is the caller's responsibility (see
    /// [`JetFamily::for_grid`]); sampling is exact pointwise regardless.
    pub fn sample_vector(&self, grid: &TorusGrid, t: f64, which: JetField) -> TorusField {
        let mut out = TorusField::zeros(grid, 1);
        let n = grid.n;
        let spacing = grid.spacing();
        out.data
            .axis_iter_mut(Axis(1))
            .into_par_iter()
            .enumerate()
            .for_each(|(ix, mut plane)| {
                let x0 = spacing * ix as f64;
                for iy in 0..n {
                    let x1 = spacing * iy as f64;
                    for iz in 0..n {
                        let x2 = spacing * iz as f64;
                        let v = self.eval_sum(which, [x0, x1, x2], t);
                        plane[[0, iy, iz]] = v[0];
                        plane[[1, iy, iz]] = v[1];
                        plane[[2, iy, iz]] = v[2];
                    }
                }
            });
        out
    }
}
