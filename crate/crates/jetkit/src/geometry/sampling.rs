//! Deterministic low-discrepancy sampling of the admissible matrix ball,
//! used by the exhaustive coefficient-map surveys.

use nalgebra::Matrix3;
use rayon::prelude::*;

use super::gamma::GammaSolver;
use crate::Result;

/// Radical-inverse (van der Corput) value of `index` in the given base.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % base) as f64 * f;
        index /= base;
        f *= inv;
    }
    out
}

const BASES: [u64; 7] = [2, 3, 5, 7, 11, 13, 17];

/// Halton point in `[0,1)^7` (1-based index; index 0 maps to the origin and
/// is skipped by the samplers).
pub fn halton7(index: u64) -> [f64; 7] {
    std::array::from_fn(|d| radical_inverse(index, BASES[d]))
}

/// Deterministic symmetric matrix in the closed ball of the given
/// operator-norm radius around the identity.
///
/// Six Halton coordinates pick the deviation direction (entries in
/// `[-1,1]`, normalized to unit operator norm), the seventh picks the
/// radial factor `u^(1/6)`, which weights samples toward the boundary where
/// the coefficient map is most strained.
pub fn sample_ball(index: u64, radius: f64) -> Matrix3<f64> {
    let h = halton7(index);
    let e: [f64; 6] = std::array::from_fn(|d| 2.0 * h[d] - 1.0);
    let dev = Matrix3::new(e[0], e[3], e[4], e[3], e[1], e[5], e[4], e[5], e[2]);
    let op = dev
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0f64, |m, &x| m.max(x.abs()));
    if op == 0.0 {
        return Matrix3::identity();
    }
    let r = radius * h[6].powf(1.0 / 6.0);
    Matrix3::identity() + dev * (r / op)
}

/// Aggregate result of a coefficient-map survey over Halton samples.
#[derive(Debug, Clone, Copy)]
pub struct SurveyStats {
    pub n_samples: u64,
    /// Largest Frobenius reconstruction residual observed.
    pub max_residual: f64,
    /// Smallest squared coefficient observed (positivity margin).
    pub min_coefficient: f64,
    /// Halton index achieving the worst residual.
    pub worst_index: u64,
}

/// Run the coefficient map over `n_samples` deterministic ball samples and
/// report the worst reconstruction residual and the positivity margin.
/// Any solver failure aborts the survey with the underlying error.
pub fn coefficient_survey(
    solver: &GammaSolver,
    n_samples: u64,
    radius: f64,
) -> Result<SurveyStats> {
    // Fixed-size chunks keep the reduction deterministic regardless of
    // thread count (max/min are order-independent, but error selection and
    // tie-breaking follow chunk order).
    let chunk: u64 = 4096;
    let n_chunks = n_samples.div_ceil(chunk);
    let partials: Vec<Result<(f64, f64, u64)>> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let lo = ci * chunk + 1;
            let hi = (ci * chunk + chunk).min(n_samples);
            let mut max_res = 0.0f64;
            let mut min_c = f64::INFINITY;
            let mut worst = lo;
            for idx in lo..=hi {
                let r = sample_ball(idx, radius);
                let c = solver.coefficients(&r)?;
                let res = (solver.reconstruct(&c) - r).norm();
                if res > max_res {
                    max_res = res;
                    worst = idx;
                }
                for &ci in &c {
                    min_c = min_c.min(ci);
                }
            }
            Ok((max_res, min_c, worst))
        })
        .collect();
    let mut stats = SurveyStats {
        n_samples,
        max_residual: 0.0,
        min_coefficient: f64::INFINITY,
        worst_index: 0,
    };
    for p in partials {
        let (res, minc, idx) = p?;
        if res > stats.max_residual {
            stats.max_residual = res;
            stats.worst_index = idx;
        }
        stats.min_coefficient = stats.min_coefficient.min(minc);
    }
    Ok(stats)
}
