//! Spectral differential and nonlocal operators on grid-sampled fields.
//!
//! Derivatives act exactly on band-limited data. Index conventions:
//! `(grad v)_{ij} = ∂_j v_i` (so `div grad v = Δv`) and
//! `(div T)_i = ∂_j T_{ij}` (contraction over the second index).

use crate::field::{ncomp, tidx, TorusField};
use crate::grid::TorusGrid;
use crate::{JetkitError, Result};
use ndarray::Array3;
use num_complex::Complex64;

/// FFT every component of a field.
pub fn spectral_components(f: &TorusField) -> Vec<Array3<Complex64>> {
    (0..f.ncomp()).map(|c| f.to_spectral(c)).collect()
}

/// Assemble a field of the given rank from per-component coefficients.
pub fn field_from_spectral(
    grid: &TorusGrid,
    rank: usize,
    comps: &[Array3<Complex64>],
) -> TorusField {
    assert_eq!(comps.len(), ncomp(rank));
    let mut out = TorusField::zeros(grid, rank);
    for (c, coeffs) in comps.iter().enumerate() {
        out.set_from_spectral(c, coeffs);
    }
    out
}

/// Visit every mode of an N³ coefficient array with its signed wavevector.
fn map_modes<F>(grid: &TorusGrid, arrs: &mut [Array3<Complex64>], mut f: F)
where
    F: FnMut([f64; 3], &mut [Complex64]),
{
    let n = grid.n;
    let mut vals: Vec<Complex64> = vec![Complex64::default(); arrs.len()];
    for i in 0..n {
        let kx = grid.freq(i) as f64;
        for j in 0..n {
            let ky = grid.freq(j) as f64;
            for k in 0..n {
                let kz = grid.freq(k) as f64;
                for (v, a) in vals.iter_mut().zip(arrs.iter()) {
                    *v = a[[i, j, k]];
                }
                f([kx, ky, kz], &mut vals);
                for (a, v) in arrs.iter_mut().zip(vals.iter()) {
                    a[[i, j, k]] = *v;
                }
            }
        }
    }
}

/// Spectral partial derivative `∂_axis` of every component.
pub fn partial(f: &TorusField, axis: usize) -> TorusField {
    let mut comps = spectral_components(f);
    map_modes(&f.grid, &mut comps, |k, vals| {
        let ik = Complex64::new(0.0, k[axis]);
        for v in vals.iter_mut() {
            *v *= ik;
        }
    });
    field_from_spectral(&f.grid, f.rank, &comps)
}

/// Gradient: scalar → vector `(∂_i f)`, vector → rank-2 `(∂_j v_i)`.
pub fn gradient(f: &TorusField) -> Result<TorusField> {
    match f.rank {
        0 => {
            let mut out = TorusField::zeros(&f.grid, 1);
            for ax in 0..3 {
                let d = partial(f, ax);
                out.comp_mut(ax).assign(&d.comp(0));
            }
            Ok(out)
        }
        1 => {
            let mut out = TorusField::zeros(&f.grid, 2);
            for ax in 0..3 {
                let d = partial(f, ax);
                for i in 0..3 {
                    out.comp_mut(tidx(i, ax)).assign(&d.comp(i));
                }
            }
            Ok(out)
        }
        r => Err(JetkitError::Shape(format!("gradient of rank-{r} field"))),
    }
}

/// Divergence: vector → scalar, rank-2 → vector (second-index contraction).
pub fn divergence(f: &TorusField) -> Result<TorusField> {
    match f.rank {
        1 => {
            let mut out = TorusField::zeros(&f.grid, 0);
            for ax in 0..3 {
                let d = partial(f, ax);
                let mut acc = out.comp_mut(0);
                ndarray::Zip::from(&mut acc).and(&d.comp(ax)).for_each(|o, &u| *o += u);
            }
            Ok(out)
        }
        2 => {
            let mut out = TorusField::zeros(&f.grid, 1);
            for ax in 0..3 {
                let d = partial(f, ax);
                for i in 0..3 {
                    let mut acc = out.comp_mut(i);
                    ndarray::Zip::from(&mut acc)
                        .and(&d.comp(tidx(i, ax)))
                        .for_each(|o, &u| *o += u);
                }
            }
            Ok(out)
        }
        r => Err(JetkitError::Shape(format!("divergence of rank-{r} field"))),
    }
}

/// Curl of a vector field.
pub fn curl(v: &TorusField) -> Result<TorusField> {
    if v.rank != 1 {
        return Err(JetkitError::Shape("curl needs a vector field".into()));
    }
    let comps = spectral_components(v);
    let mut out = vec![
        Array3::<Complex64>::zeros(comps[0].raw_dim()),
        Array3::<Complex64>::zeros(comps[0].raw_dim()),
        Array3::<Complex64>::zeros(comps[0].raw_dim()),
    ];
    let grid = v.grid.clone();
    let n = grid.n;
    for i in 0..n {
        let kx = grid.freq(i) as f64;
        for j in 0..n {
            let ky = grid.freq(j) as f64;
            for k in 0..n {
                let kz = grid.freq(k) as f64;
                let kk = [kx, ky, kz];
                let u = [comps[0][[i, j, k]], comps[1][[i, j, k]], comps[2][[i, j, k]]];
                for a in 0..3 {
                    let b = (a + 1) % 3;
                    let c = (a + 2) % 3;
                    out[a][[i, j, k]] = Complex64::new(0.0, 1.0) * (kk[b] * u[c] - kk[c] * u[b]);
                }
            }
        }
    }
    Ok(field_from_spectral(&grid, 1, &out))
}

/// Componentwise Laplacian.
pub fn laplacian(f: &TorusField) -> TorusField {
    let mut comps = spectral_components(f);
    map_modes(&f.grid, &mut comps, |k, vals| {
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        for v in vals.iter_mut() {
            *v *= -k2;
        }
    });
    field_from_spectral(&f.grid, f.rank, &comps)
}

/// Mean-zero inverse Laplacian (the `k = 0` mode is annihilated).
pub fn inverse_laplacian(f: &TorusField) -> TorusField {
    let mut comps = spectral_components(f);
    map_modes(&f.grid, &mut comps, |k, vals| {
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0.0 {
            for v in vals.iter_mut() {
                *v = Complex64::default();
            }
        } else {
            for v in vals.iter_mut() {
                *v /= -k2;
            }
        }
    });
    field_from_spectral(&f.grid, f.rank, &comps)
}

/// Leray projection onto divergence-free fields. Constant (`k = 0`) parts
/// are divergence-free and pass through unchanged.
pub fn leray(v: &TorusField) -> Result<TorusField> {
    if v.rank != 1 {
        return Err(JetkitError::Shape("leray needs a vector field".into()));
    }
    let mut comps = spectral_components(v);
    map_modes(&v.grid, &mut comps, |k, vals| {
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0.0 {
            return;
        }
        let dot = vals[0] * k[0] + vals[1] * k[1] + vals[2] * k[2];
        for (a, ka) in vals.iter_mut().zip(k.iter()) {
            *a -= dot * *ka / k2;
        }
    });
    Ok(field_from_spectral(&v.grid, 1, &comps))
}

/// Gradient-part projection `Q = Id − P` (zero on constants).
pub fn gradient_part(v: &TorusField) -> Result<TorusField> {
    let p = leray(v)?;
    let mut out = v.clone();
    out.axpy(-1.0, &p)?;
    Ok(out)
}

/// Which Fourier shells a band projection keeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandMode {
    /// Remove only the `k = 0` mode.
    Nonzero,
    /// Keep `|k|_∞ ≤ κ` (the mean included).
    LowPass(f64),
    /// Keep `|k|_∞ > κ` — the exact complement of `LowPass` at the same κ.
    HighPass(f64),
}

/// Sharp Fourier band projection. Returns the projected field and a
/// `resolved` flag: a low-pass band at or beyond the grid Nyquist shell
/// keeps the field unchanged and reports `false`.
pub fn fourier_projector(f: &TorusField, mode: BandMode) -> (TorusField, bool) {
    let nyq = f.grid.nyquist() as f64;
    if let BandMode::LowPass(kappa) = mode {
        if kappa >= nyq {
            return (f.clone(), false);
        }
    }
    let mut comps = spectral_components(f);
    map_modes(&f.grid, &mut comps, |k, vals| {
        let sup = k[0].abs().max(k[1].abs()).max(k[2].abs());
        let keep = match mode {
            BandMode::Nonzero => sup > 0.0,
            BandMode::LowPass(kappa) => sup <= kappa,
            BandMode::HighPass(kappa) => sup > kappa,
        };
        if !keep {
            for v in vals.iter_mut() {
                *v = Complex64::default();
            }
        }
    });
    (field_from_spectral(&f.grid, f.rank, &comps), true)
}

/// Sharp 2/3-rule dealiasing: zero every mode with `|k|_∞ > N/3`.
pub fn dealias_two_thirds(f: &TorusField) -> TorusField {
    let cut = f.grid.n as f64 / 3.0;
    let mut comps = spectral_components(f);
    map_modes(&f.grid, &mut comps, |k, vals| {
        let sup = k[0].abs().max(k[1].abs()).max(k[2].abs());
        if sup > cut {
            for v in vals.iter_mut() {
                *v = Complex64::default();
            }
        }
    });
    field_from_spectral(&f.grid, f.rank, &comps)
}

/// Symmetric trace-free antidivergence of a mean-zero vector field:
/// returns `S` with `div S = v − ⨍v`, `S = Sᵀ`, `tr S = 0`.
///
/// Per mode (`m = k/|k|`, `w = v̂/(i|k|)`):
/// `Ŝ = m⊗w + w⊗m − ½(m·w)(m⊗m + Id)`.
pub fn antidivergence(v: &TorusField) -> Result<TorusField> {
    if v.rank != 1 {
        return Err(JetkitError::Shape("antidivergence needs a vector field".into()));
    }
    let comps = spectral_components(v);
    let n = v.grid.n;
    let dim = comps[0].raw_dim();
    let mut out: Vec<Array3<Complex64>> = (0..9).map(|_| Array3::zeros(dim.clone())).collect();
    for i in 0..n {
        let kx = v.grid.freq(i) as f64;
        for j in 0..n {
            let ky = v.grid.freq(j) as f64;
            for k in 0..n {
                let kz = v.grid.freq(k) as f64;
                let k2 = kx * kx + ky * ky + kz * kz;
                if k2 == 0.0 {
                    continue;
                }
                let kn = k2.sqrt();
                let m = [kx / kn, ky / kn, kz / kn];
                let inv_ik = Complex64::new(0.0, -1.0 / kn); // 1/(i|k|)
                let w = [
                    comps[0][[i, j, k]] * inv_ik,
                    comps[1][[i, j, k]] * inv_ik,
                    comps[2][[i, j, k]] * inv_ik,
                ];
                let mw = w[0] * m[0] + w[1] * m[1] + w[2] * m[2];
                for a in 0..3 {
                    for b in 0..3 {
                        let mut s = w[a] * m[b] + w[b] * m[a] - mw * (m[a] * m[b]) * 0.5;
                        if a == b {
                            s -= mw * 0.5;
                        }
                        out[tidx(a, b)][[i, j, k]] = s;
                    }
                }
            }
        }
    }
    Ok(field_from_spectral(&v.grid, 2, &out))
}

/// `∂_i ∂_j T_{ij}` of a rank-2 field (scalar output).
pub fn div_div(t: &TorusField) -> Result<TorusField> {
    divergence(&divergence(t)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::TorusField;
    use proptest::prelude::*;

    fn grid() -> TorusGrid {
        TorusGrid::new(16).unwrap()
    }

    fn smooth_vector(g: &TorusGrid) -> TorusField {
        TorusField::vector_from_fn(g, |x, y, z| {
            [
                (x + 2.0 * y).sin() + (z).cos(),
                (y - z).cos() * (x).sin(),
                (2.0 * z).sin() + (x + y + z).cos(),
            ]
        })
    }

    #[test]
    fn inverse_laplacian_on_single_mode() {
        let g = grid();
        let f = TorusField::scalar_from_fn(&g, |x, _, _| (2.0 * x).sin());
        let u = inverse_laplacian(&f);
        let expected = TorusField::scalar_from_fn(&g, |x, _, _| -(2.0 * x).sin() / 4.0);
        let err = u
            .comp(0)
            .iter()
            .zip(expected.comp(0).iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn vector_calculus_identities() {
        let g = grid();
        let v = smooth_vector(&g);
        let f = TorusField::scalar_from_fn(&g, |x, y, z| (x).sin() * (y).cos() + (3.0 * z).sin());

        let dcv = divergence(&curl(&v).unwrap()).unwrap();
        assert!(dcv.sup_norm() < 1e-11, "div curl = {}", dcv.sup_norm());

        let cgf = curl(&gradient(&f).unwrap()).unwrap();
        assert!(cgf.sup_norm() < 1e-11, "curl grad = {}", cgf.sup_norm());

        let dgf = divergence(&gradient(&f).unwrap()).unwrap();
        let lf = laplacian(&f);
        let diff = dgf.sub(&lf).unwrap();
        assert!(diff.sup_norm() < 1e-10, "div grad vs Δ = {}", diff.sup_norm());
    }

    #[test]
    fn antidivergence_inverts_divergence() {
        let g = grid();
        let mut v = smooth_vector(&g);
        v.remove_mean();
        let s = antidivergence(&v).unwrap();
        // symmetric and trace-free
        let tr = s.trace().unwrap();
        assert!(tr.comp(0).iter().map(|x| x.abs()).fold(0.0f64, f64::max) < 1e-11);
        for a in 0..3 {
            for b in 0..3 {
                let d = s
                    .comp(tidx(a, b))
                    .iter()
                    .zip(s.comp(tidx(b, a)).iter())
                    .map(|(u, w)| (u - w).abs())
                    .fold(0.0f64, f64::max);
                assert!(d < 1e-11);
            }
        }
        let dv = divergence(&s).unwrap();
        let diff = dv.sub(&v).unwrap();
        assert!(diff.sup_norm() < 1e-10, "div S − v = {}", diff.sup_norm());
    }

    #[test]
    fn band_projection_splits_modes() {
        let g = grid();
        let f = TorusField::scalar_from_fn(&g, |x, y, _| 1.5 + (x).sin() + (5.0 * y).cos());

        // low_pass(0) keeps only the mean
        let (mean_only, resolved) = fourier_projector(&f, BandMode::LowPass(0.0));
        assert!(resolved);
        assert!(
            mean_only
                .comp(0)
                .iter()
                .map(|v| (v - 1.5).abs())
                .fold(0.0f64, f64::max)
                < 1e-12
        );

        // nonzero removes exactly the mean
        let (no_mean, _) = fourier_projector(&f, BandMode::Nonzero);
        let expected = TorusField::scalar_from_fn(&g, |x, y, _| (x).sin() + (5.0 * y).cos());
        assert!(no_mean.sub(&expected).unwrap().sup_norm() < 1e-12);

        // low + high partition the field exactly
        let (low, _) = fourier_projector(&f, BandMode::LowPass(2.0));
        let (high, _) = fourier_projector(&f, BandMode::HighPass(2.0));
        let sum = low.add(&high).unwrap();
        assert!(sum.sub(&f).unwrap().sup_norm() < 1e-12);
        let expected_low = TorusField::scalar_from_fn(&g, |x, _, _| 1.5 + (x).sin());
        assert!(low.sub(&expected_low).unwrap().sup_norm() < 1e-12);

        // a band at the Nyquist shell is returned unchanged and flagged
        let (same, resolved) = fourier_projector(&f, BandMode::LowPass(9.0));
        assert!(!resolved);
        assert!(same.sub(&f).unwrap().sup_norm() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn leray_is_idempotent_orthogonal_projection(
            a1 in -2.0f64..2.0, a2 in -2.0f64..2.0, a3 in -2.0f64..2.0,
            p1 in 1i64..3, p2 in 1i64..3,
        ) {
            let g = TorusGrid::new(12).unwrap();
            let v = TorusField::vector_from_fn(&g, |x, y, z| {
                [
                    a1 * (p1 as f64 * x).sin() + a3 * (y + z).cos(),
                    a2 * (p2 as f64 * y).cos() + a1 * (x).sin(),
                    a3 * (z).sin() + a2 * (p1 as f64 * x + y).cos(),
                ]
            });
            let pv = leray(&v).unwrap();
            let ppv = leray(&pv).unwrap();
            let qv = gradient_part(&v).unwrap();

            // idempotent
            prop_assert!(ppv.sub(&pv).unwrap().sup_norm() < 1e-10);
            // image is divergence-free
            prop_assert!(divergence(&pv).unwrap().sup_norm() < 1e-10);
            // orthogonality in L²
            let inner = pv.dot(&qv).unwrap().integral(0);
            prop_assert!(inner.abs() < 1e-9);
            // decomposition is exact
            let sum = pv.add(&qv).unwrap();
            prop_assert!(sum.sub(&v).unwrap().sup_norm() < 1e-10);
        }
    }
}
