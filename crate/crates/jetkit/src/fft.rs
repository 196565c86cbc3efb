//! Thin wrappers around `rustfft` for 1D/2D/3D complex transforms with a
//! process-wide plan cache.
//!
//! Convention: `to_spectral` produces coefficients `c_k = N^{-d} Σ_j f(x_j)
//! e^{-i k·x_j}` so that `f(x_j) = Σ_k c_k e^{i k·x_j}` is the exact
//! synthesis; `from_spectral` applies that synthesis in place.

use ndarray::{Array3, Axis};
use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

static PLANS: Lazy<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Fetch (and cache) a plan of length `n`; `inverse` selects the direction.
pub fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut map = PLANS.lock().unwrap();
    map.entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            let dir = if inverse {
                FftDirection::Inverse
            } else {
                FftDirection::Forward
            };
            planner.plan_fft(n, dir)
        })
        .clone()
}

/// Unnormalized in-place transform of every lane along `axis`.
fn transform_axis(data: &mut Array3<Complex64>, axis: usize, inverse: bool) {
    let n = data.shape()[axis];
    let fft = plan(n, inverse);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let mut lane_buf = vec![Complex64::default(); n];
    for mut lane in data.lanes_mut(Axis(axis)) {
        if let Some(slice) = lane.as_slice_mut() {
            fft.process_with_scratch(slice, &mut scratch);
        } else {
            for (b, v) in lane_buf.iter_mut().zip(lane.iter()) {
                *b = *v;
            }
            fft.process_with_scratch(&mut lane_buf, &mut scratch);
            for (v, b) in lane.iter_mut().zip(lane_buf.iter()) {
                *v = *b;
            }
        }
    }
}

/// Forward transform with `N^{-3}` normalization: samples → coefficients.
pub fn to_spectral_3d(data: &mut Array3<Complex64>) {
    for axis in 0..3 {
        transform_axis(data, axis, false);
    }
    let scale = 1.0 / (data.len() as f64);
    data.mapv_inplace(|z| z * scale);
}

/// Inverse transform without extra normalization: coefficients → samples.
pub fn from_spectral_3d(data: &mut Array3<Complex64>) {
    for axis in 0..3 {
        transform_axis(data, axis, true);
    }
}

/// 1D forward with 1/N normalization (samples → Fourier coefficients).
pub fn to_spectral_1d(data: &mut [Complex64]) {
    let fft = plan(data.len(), false);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(data, &mut scratch);
    let scale = 1.0 / data.len() as f64;
    for z in data.iter_mut() {
        *z *= scale;
    }
}

/// 2D forward with 1/N² normalization on a row-major `rows × cols` buffer.
pub fn to_spectral_2d(data: &mut [Complex64], rows: usize, cols: usize) {
    assert_eq!(data.len(), rows * cols);
    let fr = plan(cols, false);
    let mut scratch = vec![Complex64::default(); fr.get_inplace_scratch_len()];
    for r in 0..rows {
        fr.process_with_scratch(&mut data[r * cols..(r + 1) * cols], &mut scratch);
    }
    let fc = plan(rows, false);
    let mut col = vec![Complex64::default(); rows];
    let mut scratch_c = vec![Complex64::default(); fc.get_inplace_scratch_len()];
    for c in 0..cols {
        for r in 0..rows {
            col[r] = data[r * cols + c];
        }
        fc.process_with_scratch(&mut col, &mut scratch_c);
        for r in 0..rows {
            data[r * cols + c] = col[r];
        }
    }
    let scale = 1.0 / (rows * cols) as f64;
    for z in data.iter_mut() {
        *z *= scale;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::TAU;

    #[test]
    fn three_d_round_trip_and_mode_pickoff() {
        let n = 16;
        let mut a = Array3::<Complex64>::zeros((n, n, n));
        // f = 2 cos(3x) sin(2y) + 1
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let x = TAU * i as f64 / n as f64;
                    let y = TAU * j as f64 / n as f64;
                    let _ = k;
                    a[[i, j, k]] =
                        Complex64::new(2.0 * (3.0 * x).cos() * (2.0 * y).sin() + 1.0, 0.0);
                }
            }
        }
        let orig = a.clone();
        to_spectral_3d(&mut a);
        // mean
        assert!((a[[0, 0, 0]].re - 1.0).abs() < 1e-12);
        // 2cos(3x)sin(2y) = (e^{i3x}+e^{-i3x}) (e^{i2y}-e^{-i2y})/(2i)
        let c = a[[3, 2, 0]];
        assert!((c - Complex64::new(0.0, -0.5)).norm() < 1e-12);
        from_spectral_3d(&mut a);
        let err = a
            .iter()
            .zip(orig.iter())
            .map(|(u, v)| (u - v).norm())
            .fold(0.0f64, f64::max);
        assert!(err < 1e-12, "round trip error {err}");
    }
}
