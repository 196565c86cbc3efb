//! Discrete flow-regularity estimates across a mollification ladder.
//!
//! Continuum statements about `C^beta_t C^kappa_x` regularity are probed
//! here with grid proxies: spatial Hölder seminorms are taken over axis
//! shifts of a few grid strides, time Hölder seminorms over snapshot
//! pairs whose separation lies in `[dt, window]`, and time derivatives
//! are divided differences on the snapshot ladder.  Every reported row
//! also carries the ratio of the measured value to its expected
//! mollification bound, so sweeps over the width can be fitted directly.
//!
//! All norms act on displacements (forward map minus identity): the
//! identity part cancels in every difference and derivative reported
//! here, and the smallest-width flow of a ladder is the operational
//! reference the increments are measured against.

use std::io::Write as _;
use std::path::Path;

use crate::field::TorusField;
use crate::flows::flowmap::FlowMap;
use crate::{JetkitError, Result};

/// One measured norm with its bound ratio.
#[derive(Debug, Clone)]
pub struct FlowNormRow {
    pub level: usize,
    pub varsigma: f64,
    pub norm_id: String,
    pub value: f64,
    /// `value / bound`, where the bound is the mollification power law
    /// the row is compared against (1 when no bound applies).
    pub bound_ratio: f64,
}

/// The collected rows of one report call.
#[derive(Debug, Clone, Default)]
pub struct FlowEstimates {
    pub rows: Vec<FlowNormRow>,
}

impl FlowEstimates {
    pub fn get(&self, norm_id: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.norm_id == norm_id)
            .map(|r| r.value)
    }

    /// Append rows from another report.
    pub fn extend(&mut self, other: FlowEstimates) {
        self.rows.extend(other.rows);
    }

    /// CSV with one row per norm: `n, varsigma, norm_id, value, bound_ratio`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        writeln!(f, "n,varsigma,norm_id,value,bound_ratio")?;
        for r in &self.rows {
            writeln!(
                f,
                "{},{:.17e},{},{:.17e},{:.17e}",
                r.level, r.varsigma, r.norm_id, r.value, r.bound_ratio
            )?;
        }
        Ok(())
    }
}

/// Controls for [`flow_estimate_report`].
#[derive(Debug, Clone)]
pub struct FlowEstimateOptions {
    /// Time-Hölder exponent of the increment norm.
    pub beta: f64,
    /// Spatial Hölder exponent (0 gives plain sup norms).
    pub kappa_x: f64,
    /// Largest time separation entering Hölder quotients.
    pub window: f64,
    /// Axis shifts (in grid cells) probing the spatial seminorm.
    pub strides: Vec<usize>,
}

impl Default for FlowEstimateOptions {
    fn default() -> Self {
        FlowEstimateOptions {
            beta: 0.0,
            kappa_x: 0.0,
            window: f64::INFINITY,
            strides: vec![1, 2, 4, 8],
        }
    }
}

/// Sup norm over all components.
fn sup_norm(f: &TorusField) -> f64 {
    f.data.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
}

/// Discrete spatial `C^kappa` norm: sup plus shifted-difference quotients
/// along the axes.  `kappa = 0` reduces to the sup norm.
pub fn spatial_holder_norm(f: &TorusField, kappa: f64, strides: &[usize]) -> f64 {
    let sup = sup_norm(f);
    if kappa == 0.0 {
        return sup;
    }
    let n = f.grid.n;
    let spacing = f.grid.spacing();
    let mut semi = 0.0f64;
    for c in 0..f.ncomp() {
        let arr = f.comp(c);
        for &s in strides {
            let s = s % n;
            if s == 0 {
                continue;
            }
            let h = (s as f64 * spacing).powf(kappa);
            for axis in 0..3 {
                let mut worst = 0.0f64;
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            let mut idx = [i, j, k];
                            idx[axis] = (idx[axis] + s) % n;
                            let d = (arr[[idx[0], idx[1], idx[2]]] - arr[[i, j, k]]).abs();
                            worst = worst.max(d);
                        }
                    }
                }
                semi = semi.max(worst / h);
            }
        }
    }
    sup + semi
}

fn ladder_spacing(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(JetkitError::TimeSeries(
            "flow estimates need at least two snapshot times".into(),
        ));
    }
    let dt = times[1] - times[0];
    for w in times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-10 * dt.abs().max(1.0) {
            return Err(JetkitError::TimeSeries(
                "flow estimates need a uniform snapshot ladder".into(),
            ));
        }
    }
    Ok(dt)
}

fn field_diff(a: &TorusField, b: &TorusField) -> Result<TorusField> {
    let mut d = a.clone();
    d.axpy(-1.0, b)?;
    Ok(d)
}

/// Time-Hölder seminorm of a snapshot sequence under a spatial norm.
fn time_holder(
    fields: &[TorusField],
    times: &[f64],
    beta: f64,
    window: f64,
    spatial: impl Fn(&TorusField) -> f64,
) -> Result<f64> {
    let dt = ladder_spacing(times)?;
    let mut worst = 0.0f64;
    for i in 0..fields.len() {
        for j in i + 1..fields.len() {
            let sep = times[j] - times[i];
            if sep < dt * (1.0 - 1e-9) || sep > window {
                continue;
            }
            let d = field_diff(&fields[j], &fields[i])?;
            let q = spatial(&d) / sep.powf(beta);
            worst = worst.max(q);
        }
    }
    Ok(worst)
}

/// Sup over the ladder of the spatial norm.
fn time_sup(fields: &[TorusField], spatial: impl Fn(&TorusField) -> f64) -> f64 {
    fields.iter().map(&spatial).fold(0.0, f64::max)
}

/// Divided-difference time derivative of order `r` (1 or 2), sup over
/// the ladder under the spatial norm.
fn time_derivative_norm(
    fields: &[TorusField],
    times: &[f64],
    r: usize,
    spatial: impl Fn(&TorusField) -> f64,
) -> Result<f64> {
    let dt = ladder_spacing(times)?;
    let mut worst = 0.0f64;
    match r {
        1 => {
            for w in fields.windows(2) {
                let d = field_diff(&w[1], &w[0])?;
                worst = worst.max(spatial(&d) / dt);
            }
        }
        2 => {
            for w in fields.windows(3) {
                let mut d = field_diff(&w[2], &w[1])?;
                let e = field_diff(&w[1], &w[0])?;
                d.axpy(-1.0, &e)?;
                worst = worst.max(spatial(&d) / (dt * dt));
            }
        }
        _ => {
            return Err(JetkitError::Params(
                "time derivatives are probed at orders 1 and 2".into(),
            ))
        }
    }
    Ok(worst)
}

fn dense_ladder(flow: &FlowMap, inverse: bool) -> Result<Vec<TorusField>> {
    (0..flow.n_times())
        .map(|i| {
            if inverse {
                flow.inverse_displacement(i)
            } else {
                flow.forward_displacement(i)
            }
        })
        .collect()
}

/// Regularity report for the flow pair `(phi_n, phi_{n+1})` of a
/// mollification ladder.  `coarse` is level `n`, `fine` is level `n+1`;
/// the increment rows measure `phi_{n+1} - phi_n` and are normalized by
/// `(n+1) varsigma^{1/4-beta}`, the single-flow rows are normalized by
/// the matching `varsigma^{1/4-r}` law.
pub fn flow_estimate_report(
    coarse: &FlowMap,
    fine: &FlowMap,
    level: usize,
    opts: &FlowEstimateOptions,
) -> Result<FlowEstimates> {
    if coarse.times != fine.times {
        return Err(JetkitError::TimeSeries(
            "flow increment estimates need matching snapshot ladders".into(),
        ));
    }
    if coarse.grid.n != fine.grid.n {
        return Err(JetkitError::Grid(
            "flow increment estimates need matching grids".into(),
        ));
    }
    let times = &coarse.times;
    let spatial = |f: &TorusField| spatial_holder_norm(f, opts.kappa_x, &opts.strides);
    // the bound laws are phrased in the width being removed (the coarse one)
    let varsigma = coarse.varsigma.max(f64::MIN_POSITIVE);
    let mut rows = Vec::new();

    let fwd_coarse = dense_ladder(coarse, false)?;
    let fwd_fine = dense_ladder(fine, false)?;
    let inv_coarse = dense_ladder(coarse, true)?;
    let inv_fine = dense_ladder(fine, true)?;

    let diff_fwd: Vec<TorusField> = fwd_fine
        .iter()
        .zip(fwd_coarse.iter())
        .map(|(a, b)| field_diff(a, b))
        .collect::<Result<_>>()?;
    let diff_inv: Vec<TorusField> = inv_fine
        .iter()
        .zip(inv_coarse.iter())
        .map(|(a, b)| field_diff(a, b))
        .collect::<Result<_>>()?;

    let increment_bound = (level as f64 + 1.0) * varsigma.powf(0.25 - opts.beta);
    let mut push = |id: &str, value: f64, bound: f64| {
        rows.push(FlowNormRow {
            level,
            varsigma,
            norm_id: id.to_string(),
            value,
            bound_ratio: value / bound,
        });
    };

    // increment norms (sup-in-time part plus the time-Hölder seminorm)
    let inc_sup = time_sup(&diff_fwd, spatial);
    let inc_semi = if opts.beta > 0.0 {
        time_holder(&diff_fwd, times, opts.beta, opts.window, spatial)?
    } else {
        0.0
    };
    push("increment_time_holder", inc_sup + inc_semi, increment_bound);
    push("increment_sup", inc_sup, increment_bound);

    let inv_sup = time_sup(&diff_inv, spatial);
    let inv_semi = if opts.beta > 0.0 {
        time_holder(&diff_inv, times, opts.beta, opts.window, spatial)?
    } else {
        0.0
    };
    push("inverse_increment_time_holder", inv_sup + inv_semi, increment_bound);
    push("inverse_increment_sup", inv_sup, increment_bound);

    // quarter-Hölder regularity of the coarse flow itself
    let quarter = time_holder(&fwd_coarse, times, 0.25, opts.window, spatial)?;
    push("flow_time_quarter_holder", quarter, 1.0);
    let quarter_inv = time_holder(&inv_coarse, times, 0.25, opts.window, spatial)?;
    push("inverse_time_quarter_holder", quarter_inv, 1.0);

    // divided-difference time derivatives of the coarse flow
    for r in [1usize, 2] {
        let v = time_derivative_norm(&fwd_coarse, times, r, spatial)?;
        let bound = varsigma.powf(0.25 - r as f64);
        push(&format!("flow_time_d{r}"), v, bound);
        let vi = time_derivative_norm(&inv_coarse, times, r, spatial)?;
        push(&format!("inverse_time_d{r}"), vi, bound);
    }

    Ok(FlowEstimates { rows })
}
