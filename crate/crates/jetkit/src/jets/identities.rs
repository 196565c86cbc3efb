//! Identity verification for jet families.
//!
//! All quantitative checks here are analytic: integrals factor through the
//! profile quadratures and pointwise identities are probed at synthesized
//! in-tube points, so none of them depend on a collocation grid resolving
//! the oscillation.  (Grid sampling of jets is available separately as a
//! documented-resolution diagnostic.)

use crate::geometry::sampling::halton7;
use crate::jets::family::JetFamily;
use crate::report::DiagnosticsReport;
use crate::TAU;

/// Tolerances and probe counts for [`jet_identity_report`].  The defaults
/// are the pinned verification bounds.
#[derive(Debug, Clone, Copy)]
pub struct JetCheckOptions {
    /// In-tube probes per direction.
    pub probes_per_dir: usize,
    /// Mean / zero-integral bound.
    pub tol_mean: f64,
    /// Second-moment relative bound.
    pub tol_moment: f64,
    /// Divergence cancellation relative bound.
    pub tol_div: f64,
    /// Corrector two-path relative bound.
    pub tol_two_path: f64,
    /// Oscillation identity relative bound (at the internal FD step).
    pub tol_oscillation: f64,
    /// Transport phase relative bound.
    pub tol_transport: f64,
}

impl Default for JetCheckOptions {
    fn default() -> Self {
        JetCheckOptions {
            probes_per_dir: 400,
            tol_mean: 1e-10,
            tol_moment: 1e-6,
            tol_div: 1e-8,
            tol_two_path: 1e-8,
            tol_oscillation: 1e-6,
            tol_transport: 1e-6,
        }
    }
}

/// Synthesize `count` probe points `(x, t)` inside the support tube of
/// direction `i`, sweeping the longitudinal phase, the transverse disc and
/// one temporal phase period (low-discrepancy in all four parameters).
///
/// Phase targets stay at 90% of the support radii so profile values are
/// bounded away from the (flat) support edge.
pub fn tube_probes(family: &JetFamily, i: usize, count: usize) -> Vec<([f64; 3], f64)> {
    let f = &family.set.frames[i];
    let (xi, a, b) = (f.xi(), f.a(), f.b());
    let alpha = family.set.shift(i);
    let nk = family.phase_scale();
    let mu = family.params.mu;
    let alpha_xi = alpha[0] * xi[0] + alpha[1] * xi[1] + alpha[2] * xi[2];
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let h = halton7(k as u64 + 1);
        let rho = family.params.r_perp * 0.9 * h[0].sqrt();
        let phi = TAU * h[1];
        let (u, v) = (rho * phi.cos(), rho * phi.sin());
        let w_long = family.params.r_par * 0.9 * (2.0 * h[2] - 1.0);
        let t = h[3] * TAU / (nk * mu);
        // x = alpha + s xi + (u/nk) a + (v/nk) b with s chosen so the
        // longitudinal phase lands exactly on the target.
        let s = w_long / nk - alpha_xi - mu * t;
        let x = std::array::from_fn(|c| alpha[c] + s * xi[c] + (u * a[c] + v * b[c]) / nk);
        out.push((x, t));
    }
    out
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Max over probes of `|(W + W^c) - curl curl V|`, relative to the largest
/// total-field magnitude seen, plus the corrector orthogonality residual
/// `|W . W^c|` relative to `max|W| * max|W^c|`.
pub fn corrector_residuals(family: &JetFamily, probes_per_dir: usize) -> (f64, f64) {
    let mut dev = 0.0f64;
    let mut scale = 0.0f64;
    let mut dot_max = 0.0f64;
    let mut w_max = 0.0f64;
    let mut c_max = 0.0f64;
    for i in 0..family.n_dirs() {
        for (x, t) in tube_probes(family, i, probes_per_dir) {
            let w = family.w(i, x, t);
            let c = family.w_corr(i, x, t);
            let cc = family.curl_curl_v(i, x, t);
            let total = [w[0] + c[0], w[1] + c[1], w[2] + c[2]];
            let diff = [total[0] - cc[0], total[1] - cc[1], total[2] - cc[2]];
            dev = dev.max(norm3(diff));
            scale = scale.max(norm3(total));
            dot_max = dot_max.max((w[0] * c[0] + w[1] * c[1] + w[2] * c[2]).abs());
            w_max = w_max.max(norm3(w));
            c_max = c_max.max(norm3(c));
        }
    }
    (dev / scale, dot_max / (w_max * c_max))
}

/// Max over probes of `|div(W + W^c)|` relative to `max |div W|`.
pub fn divergence_residual(family: &JetFamily, probes_per_dir: usize) -> f64 {
    let mut dev = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..family.n_dirs() {
        for (x, t) in tube_probes(family, i, probes_per_dir) {
            dev = dev.max(family.div_w_total(i, x, t).abs());
            scale = scale.max(family.div_w(i, x, t).abs());
        }
    }
    dev / scale
}

/// Oscillation identity `div(W ⊗ W) = mu^{-1} ∂_t(psi^2 theta^2) xi`:
/// the left side is analytic, the right side is a central finite difference
/// in time.  Returns the relative residual at the internal step `dt`, at
/// `dt/2`, and the residual of the analytic time derivative (which agrees
/// identically).  The step is scaled to the temporal phase rate.
pub fn oscillation_residuals(family: &JetFamily, probes_per_dir: usize) -> (f64, f64, f64) {
    let nk = family.phase_scale();
    let mu = family.params.mu;
    let dt = 3e-4 * family.params.r_par / (nk * mu);
    let mut dev_dt = 0.0f64;
    let mut dev_half = 0.0f64;
    let mut dev_exact = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..family.n_dirs() {
        let xi = family.set.frames[i].xi();
        for (x, t) in tube_probes(family, i, probes_per_dir) {
            let lhs = family.div_w_tensor(i, x, t);
            scale = scale.max(norm3(lhs));
            for (step, dev) in [(dt, &mut dev_dt), (dt / 2.0, &mut dev_half)] {
                let fd = (family.sq_scalar(i, x, t + step) - family.sq_scalar(i, x, t - step))
                    / (2.0 * step * mu);
                let r = std::array::from_fn::<f64, 3, _>(|c| lhs[c] - fd * xi[c]);
                *dev = dev.max(norm3(r));
            }
            let an = family.sq_scalar_dt(i, x, t) / mu;
            let r = std::array::from_fn::<f64, 3, _>(|c| lhs[c] - an * xi[c]);
            dev_exact = dev_exact.max(norm3(r));
        }
    }
    (dev_dt / scale, dev_half / scale, dev_exact / scale)
}

/// Transport phase consistency: the analytic longitudinal gradient
/// `xi . grad psi_xi = n* kappa psi'` against a temporal finite difference
/// `mu^{-1} ∂_t psi_xi`, relative to the largest analytic value.
pub fn transport_residual(family: &JetFamily, probes_per_dir: usize) -> f64 {
    let nk = family.phase_scale();
    let mu = family.params.mu;
    let dt = 3e-4 * family.params.r_par / (nk * mu);
    let mut dev = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..family.n_dirs() {
        for (x, t) in tube_probes(family, i, probes_per_dir) {
            let th = family.theta(i, x);
            let w_plus = family.psi(i, x, t + dt);
            let w_minus = family.psi(i, x, t - dt);
            let fd = (w_plus - w_minus) / (2.0 * dt * mu) * th;
            // both sides equal n* kappa psi' theta
            let analytic = family.div_w(i, x, t);
            dev = dev.max((analytic - fd).abs());
            scale = scale.max(analytic.abs());
        }
    }
    dev / scale
}

/// Support disjointness: every probe in the tube of direction `i` must see
/// exactly zero from every other direction.  Returns the max cross
/// magnitude (exactly `0.0` when the shift certificate holds) and the
/// fraction of probes where the home direction itself is nonzero.
pub fn disjointness_check(family: &JetFamily, probes_per_dir: usize) -> (f64, f64) {
    let mut cross = 0.0f64;
    let mut hits = 0usize;
    let mut total = 0usize;
    for i in 0..family.n_dirs() {
        for (x, t) in tube_probes(family, i, probes_per_dir) {
            if family.w(i, x, t) != [0.0; 3] {
                hits += 1;
            }
            total += 1;
            for j in 0..family.n_dirs() {
                if j != i {
                    cross = cross.max(norm3(family.w(j, x, t)));
                }
            }
        }
    }
    (cross, hits as f64 / total as f64)
}

/// Max relative change of the summed field under the axis shifts
/// `x -> x + (2 pi / kappa) e_axis` (an exact symmetry of the family).
pub fn periodicity_residual(family: &JetFamily, probes_per_dir: usize) -> f64 {
    let period = TAU / family.params.kappa as f64;
    let mut dev = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..family.n_dirs() {
        for (x, t) in tube_probes(family, i, probes_per_dir / 4 + 1) {
            let base = family.eval_sum(crate::jets::family::JetField::Total, x, t);
            scale = scale.max(norm3(base));
            for axis in 0..3 {
                let mut y = x;
                y[axis] += period;
                let shifted = family.eval_sum(crate::jets::family::JetField::Total, y, t);
                let d = std::array::from_fn::<f64, 3, _>(|c| shifted[c] - base[c]);
                dev = dev.max(norm3(d));
            }
        }
    }
    dev / scale
}

/// Assemble the full identity report for a family.
pub fn jet_identity_report(family: &JetFamily, opts: &JetCheckOptions) -> DiagnosticsReport {
    let mut rep = DiagnosticsReport::new("jet identities", "analytic", 0);
    let p = &family.profiles;
    let (r_par, r_perp) = (family.params.r_par, family.params.r_perp);

    rep.note("lambda", family.params.lambda);
    rep.note("kappa", family.params.kappa as f64);
    rep.note("kappa snap discrepancy", family.params.kappa_discrepancy);
    let cert = family
        .set
        .disjointness_certificate(family.params.kappa)
        .expect("family construction already certified the shifts");
    rep.note("certified tube radius bound", cert.max_r_perp);
    rep.note("probes per direction", opts.probes_per_dir as f64);

    // Integral identities through the profile quadratures.
    let theta_mean = p.theta_fourier(r_perp, 0.0, 1);
    rep.push("transverse profile mean", theta_mean.abs(), opts.tol_mean);
    let mean_w = (p.psi_fourier(r_par, 0, 1) * theta_mean).abs();
    rep.push("field mean magnitude", mean_w, opts.tol_mean);
    let second = p.psi_fourier(r_par, 0, 2) * p.theta_fourier(r_perp, 0.0, 2);
    rep.push("second moment deviation", (second - 1.0).abs(), opts.tol_moment);

    // Pointwise identities at in-tube probes.
    let (two_path, ortho) = corrector_residuals(family, opts.probes_per_dir);
    rep.push("corrector two-path deviation", two_path, opts.tol_two_path);
    rep.push("corrector orthogonality", ortho, 1e-14);
    let div_rel = divergence_residual(family, opts.probes_per_dir);
    rep.push("divergence cancellation", div_rel, opts.tol_div);

    let (osc_dt, osc_half, osc_exact) = oscillation_residuals(family, opts.probes_per_dir);
    rep.push("oscillation identity residual", osc_dt, opts.tol_oscillation);
    let ratio = osc_dt / osc_half;
    rep.push("oscillation step-halving ratio gap", (ratio - 4.0).abs(), 0.5);
    rep.push("oscillation analytic residual", osc_exact, 1e-12);

    let transport = transport_residual(family, opts.probes_per_dir);
    rep.push("transport phase consistency", transport, opts.tol_transport);

    let (cross, hit_frac) = disjointness_check(family, opts.probes_per_dir);
    rep.push("support overlap", cross, 0.0);
    rep.note("support hit fraction", hit_frac);

    let periodic = periodicity_residual(family, opts.probes_per_dir);
    rep.push("axis periodicity", periodic, 1e-9);

    rep
}
