//! Least-squares slope fitting for scaling surveys.

use crate::{JetkitError, Result};

/// Result of a simple linear regression `y ≈ intercept + slope·x`.
#[derive(Debug, Clone, Copy)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope estimate (0 when only two points).
    pub stderr: f64,
    pub r_squared: f64,
}

/// Ordinary least squares on the given samples.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<SlopeFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(JetkitError::Params(
            "linear_fit needs two equal-length samples of size ≥ 2".into(),
        ));
    }
    let n = x.len() as f64;
    let xm = x.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|&u| (u - xm) * (u - xm)).sum();
    if sxx == 0.0 {
        return Err(JetkitError::Params("degenerate abscissae in fit".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(&u, &v)| (u - xm) * (v - ym)).sum();
    let syy: f64 = y.iter().map(|&v| (v - ym) * (v - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(&u, &v)| {
            let r = v - (intercept + slope * u);
            r * r
        })
        .sum();
    let stderr = if x.len() > 2 {
        (ss_res / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(SlopeFit {
        slope,
        intercept,
        stderr,
        r_squared,
    })
}

/// Fit `y = C · x^slope` by regressing `ln y` on `ln x`.
/// All samples must be strictly positive.
pub fn log_log_fit(x: &[f64], y: &[f64]) -> Result<SlopeFit> {
    if x.iter().chain(y).any(|&v| v <= 0.0) {
        return Err(JetkitError::Params(
            "log_log_fit needs strictly positive samples".into(),
        ));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly)
}
