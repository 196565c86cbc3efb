//! Norms and seminorms used by the diagnostic reports.
//!
//! Spatial norms integrate over the full box (volume `(2π)³`), matching the
//! conventions of [`crate::field::TorusField::l2_norm`]. Derivative-based
//! norms (`H^s`, `C^N`) differentiate spectrally and are therefore meant for
//! fields that are resolved on their grid.

use crate::field::TorusField;
use crate::spectral::{field_from_spectral, spectral_components};
use crate::Result;
use num_complex::Complex64;

/// `L^p` norm over all components: `(∫ |f|^p)^{1/p}` with `|f|` the pointwise
/// Euclidean magnitude. `p = f64::INFINITY` gives the grid sup norm.
pub fn lp_norm(f: &TorusField, p: f64) -> f64 {
    if p.is_infinite() {
        return f.sup_norm();
    }
    assert!(p >= 1.0, "lp_norm needs p ≥ 1");
    let mag2 = f.magnitude_squared();
    let mean = mag2
        .comp(0)
        .iter()
        .map(|&m| m.powf(p / 2.0))
        .sum::<f64>()
        / (f.grid.len() as f64);
    (mean * f.grid.volume()).powf(1.0 / p)
}

/// Sobolev norm `‖f‖_{H^s} = ((2π)³ Σ_k (1+|k|²)^s |f̂(k)|²)^{1/2}`,
/// summed over components.
pub fn sobolev_norm(f: &TorusField, s: f64) -> f64 {
    let comps = spectral_components(f);
    let n = f.grid.n;
    let mut acc = 0.0;
    for i in 0..n {
        let kx = f.grid.freq(i) as f64;
        for j in 0..n {
            let ky = f.grid.freq(j) as f64;
            for k in 0..n {
                let kz = f.grid.freq(k) as f64;
                let w = (1.0 + kx * kx + ky * ky + kz * kz).powf(s);
                for c in comps.iter() {
                    acc += w * c[[i, j, k]].norm_sqr();
                }
            }
        }
    }
    (acc * f.grid.volume()).sqrt()
}

/// `W^{1,p}` norm: `‖f‖_p + ‖∇f‖_p` with `∇f` the stacked component
/// gradient (any rank).
pub fn w1p_norm(f: &TorusField, p: f64) -> f64 {
    let mut grad_mag2 = TorusField::zeros(&f.grid, 0);
    for ax in 0..3 {
        let d = crate::spectral::partial(f, ax);
        let mut acc = grad_mag2.comp_mut(0);
        for c in 0..d.ncomp() {
            let dc = d.comp(c);
            ndarray::Zip::from(&mut acc).and(&dc).for_each(|o, &u| *o += u * u);
        }
    }
    // lp_norm of the magnitude field: reuse by treating mag² as a scalar
    let n = f.grid.len() as f64;
    let grad_lp = if p.is_infinite() {
        grad_mag2
            .comp(0)
            .iter()
            .map(|&m| m.sqrt())
            .fold(0.0f64, f64::max)
    } else {
        (grad_mag2
            .comp(0)
            .iter()
            .map(|&m| m.powf(p / 2.0))
            .sum::<f64>()
            / n
            * f.grid.volume())
        .powf(1.0 / p)
    };
    lp_norm(f, p) + grad_lp
}

/// Besov norm `B^s_{p,∞}`: `max_j 2^{js} ‖Δ_j f‖_{L^p}` over sharp dyadic
/// shells `2^{j−1} < |k| ≤ 2^j` (shell 0 holds `|k| ≤ 1`).
pub fn besov_norm(f: &TorusField, s: f64, p: f64) -> f64 {
    let comps = spectral_components(f);
    let n = f.grid.n;
    let nyq = f.grid.nyquist() as f64;
    let jmax = (nyq * 3.0f64.sqrt()).log2().ceil() as usize + 1;
    let mut best = 0.0f64;
    for jshell in 0..=jmax {
        let mut shell = comps.clone();
        let mut any = false;
        for i in 0..n {
            let kx = f.grid.freq(i) as f64;
            for j in 0..n {
                let ky = f.grid.freq(j) as f64;
                for k in 0..n {
                    let kz = f.grid.freq(k) as f64;
                    let kn = (kx * kx + ky * ky + kz * kz).sqrt();
                    let jj = if kn <= 1.0 { 0 } else { kn.log2().ceil() as usize };
                    if jj != jshell {
                        for c in shell.iter_mut() {
                            c[[i, j, k]] = Complex64::default();
                        }
                    } else {
                        any = true;
                    }
                }
            }
        }
        if !any {
            continue;
        }
        let piece = field_from_spectral(&f.grid, f.rank, &shell);
        best = best.max(2.0f64.powf(jshell as f64 * s) * lp_norm(&piece, p));
    }
    best
}

/// All multi-indices `(a, b, c)` with `a + b + c ≤ n`.
fn multi_indices(n: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for a in 0..=n {
        for b in 0..=(n - a) {
            for c in 0..=(n - a - b) {
                out.push([a, b, c]);
            }
        }
    }
    out
}

/// `C^N` norm: max over `|α| ≤ n` of the grid sup of `∂^α f`.
pub fn c_n_norm(f: &TorusField, n: usize) -> f64 {
    let comps = spectral_components(f);
    let grid = &f.grid;
    let mut best = 0.0f64;
    for alpha in multi_indices(n) {
        let mut dcomps = comps.clone();
        let nn = grid.n;
        for i in 0..nn {
            let kx = grid.freq(i) as f64;
            for j in 0..nn {
                let ky = grid.freq(j) as f64;
                for k in 0..nn {
                    let kz = grid.freq(k) as f64;
                    let mut mult = Complex64::new(1.0, 0.0);
                    for _ in 0..alpha[0] {
                        mult *= Complex64::new(0.0, kx);
                    }
                    for _ in 0..alpha[1] {
                        mult *= Complex64::new(0.0, ky);
                    }
                    for _ in 0..alpha[2] {
                        mult *= Complex64::new(0.0, kz);
                    }
                    for c in dcomps.iter_mut() {
                        c[[i, j, k]] *= mult;
                    }
                }
            }
        }
        let d = field_from_spectral(grid, f.rank, &dcomps);
        best = best.max(d.sup_norm());
    }
    best
}

/// Squared `L²` norms of the dyadic Fourier shells: entry `j` covers
/// `2^{j-1} < |k| ≤ 2^j` (entry 0 covers `|k| ≤ 1`).
pub fn dyadic_shell_energies(f: &TorusField) -> Vec<f64> {
    let comps = spectral_components(f);
    let n = f.grid.n;
    let nyq = f.grid.nyquist() as f64;
    let jmax = (nyq * 3.0f64.sqrt()).log2().ceil() as usize + 1;
    let mut shells = vec![0.0; jmax + 1];
    for i in 0..n {
        let kx = f.grid.freq(i) as f64;
        for j in 0..n {
            let ky = f.grid.freq(j) as f64;
            for k in 0..n {
                let kz = f.grid.freq(k) as f64;
                let kn = (kx * kx + ky * ky + kz * kz).sqrt();
                let jj = if kn <= 1.0 { 0 } else { kn.log2().ceil() as usize };
                let jj = jj.min(jmax);
                for c in comps.iter() {
                    shells[jj] += c[[i, j, k]].norm_sqr();
                }
            }
        }
    }
    for s in shells.iter_mut() {
        *s *= f.grid.volume();
    }
    shells
}

/// Discrete Hölder seminorm in time of a scalar series sampled at step `dt`:
/// `max_{i<j} |v_j − v_i| / ((j−i) dt)^alpha`.
pub fn holder_time_seminorm(values: &[f64], dt: f64, alpha: f64) -> Result<f64> {
    if values.len() < 2 || dt <= 0.0 {
        return Err(crate::JetkitError::TimeSeries(
            "need at least two samples and dt > 0".into(),
        ));
    }
    let mut best = 0.0f64;
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            let gap = ((j - i) as f64 * dt).powf(alpha);
            best = best.max((values[j] - values[i]).abs() / gap);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sobolev_norms_of_single_mode() {
        let g = TorusGrid::new(16).unwrap();
        let f = TorusField::scalar_from_fn(&g, |x, _, _| x.sin());
        let l2 = (crate::TAU.powi(3) / 2.0).sqrt();
        assert_abs_diff_eq!(sobolev_norm(&f, 0.0), l2, epsilon = 1e-12);
        // one unit of slope doubles (1+|k|²) so H¹ gains √2
        assert_abs_diff_eq!(sobolev_norm(&f, 1.0), l2 * 2.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn c_n_norm_tracks_derivative_growth() {
        let g = TorusGrid::new(32).unwrap();
        let f = TorusField::scalar_from_fn(&g, |x, _, _| (2.0 * x).sin());
        // sup|f| = 1 at x = π/4 · … — the 32-point grid hits sin = 1 exactly at x = π/4
        assert_abs_diff_eq!(c_n_norm(&f, 0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c_n_norm(&f, 1), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c_n_norm(&f, 2), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn lp_norm_quartic_moment() {
        let g = TorusGrid::new(16).unwrap();
        let f = TorusField::scalar_from_fn(&g, |x, _, _| x.sin());
        // ∫ sin⁴ = (2π)³ · 3/8
        let expected = (crate::TAU.powi(3) * 3.0 / 8.0).powf(0.25);
        assert_abs_diff_eq!(lp_norm(&f, 4.0), expected, epsilon = 1e-12);
    }

    #[test]
    fn w1p_and_besov_on_single_modes() {
        let g = TorusGrid::new(16).unwrap();
        let f = TorusField::scalar_from_fn(&g, |x, _, _| x.sin());
        let l2 = (crate::TAU.powi(3) / 2.0).sqrt();
        // ∇ sin x₁ = (cos x₁, 0, 0) has the same L² norm
        assert_abs_diff_eq!(w1p_norm(&f, 2.0), 2.0 * l2, epsilon = 1e-10);

        // two modes in shells 0 and 2: B⁰ takes the max, B¹ weights shell 2 by 4
        let two = TorusField::scalar_from_fn(&g, |x, y, _| x.sin() + 0.5 * (4.0 * y).cos());
        let m1 = l2;
        let m4 = 0.5 * l2;
        assert_abs_diff_eq!(besov_norm(&two, 0.0, 2.0), m1.max(m4), epsilon = 1e-10);
        assert_abs_diff_eq!(besov_norm(&two, 1.0, 2.0), m1.max(4.0 * m4), epsilon = 1e-10);
    }

    #[test]
    fn holder_seminorm_of_linear_ramp() {
        let dt = 0.1;
        let vals: Vec<f64> = (0..11).map(|i| 3.0 * (i as f64) * dt).collect();
        let h1 = holder_time_seminorm(&vals, dt, 1.0).unwrap();
        assert_abs_diff_eq!(h1, 3.0, epsilon = 1e-12);
        // with exponent 1/2 the largest increment dominates: 3·T / √T = 3√T
        let h_half = holder_time_seminorm(&vals, dt, 0.5).unwrap();
        assert_abs_diff_eq!(h_half, 3.0 * 1.0f64.sqrt(), epsilon = 1e-12);
    }
}
