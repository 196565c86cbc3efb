//! Adapted stopping-time estimates for the flow-regularity functional.
//!
//! The tracked size of a flow at a snapshot time is
//! `S(t) = max(||phi - id||_inf, ||Dphi - Id||_inf)`; it is computed from
//! the snapshot at `t` alone, and the flow march itself is causal, so the
//! first crossing time below is adapted to the driving path.  A run that
//! never crosses reports the ladder horizon (the estimate is a lower
//! bound in that case, which is the conservative side for the regime
//! checks built on it).

use crate::flows::flowmap::FlowMap;
use crate::spectral::gradient;
use crate::Result;

/// `max(||displacement||_inf, ||D(displacement)||_inf)` at one snapshot.
pub fn tracked_norm(flow: &FlowMap, idx: usize) -> Result<f64> {
    let disp = flow.forward_displacement(idx)?;
    let sup = disp.data.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let grad = gradient(&disp)?;
    let gsup = grad.data.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    Ok(sup.max(gsup))
}

/// One threshold's crossing record.
#[derive(Debug, Clone, Copy)]
pub struct StoppingTime {
    pub threshold: f64,
    /// First snapshot time with `S(t) > scale * threshold`; the ladder
    /// horizon when the functional never crosses.
    pub time: f64,
    pub crossed: bool,
}

/// First crossing times of `S(t) > scale * L` for each threshold `L`,
/// evaluated on the flow's snapshot ladder.
pub fn stopping_time_estimate(
    flow: &FlowMap,
    thresholds: &[f64],
    scale: f64,
) -> Result<Vec<StoppingTime>> {
    let series: Vec<f64> = (0..flow.n_times())
        .map(|i| tracked_norm(flow, i))
        .collect::<Result<_>>()?;
    let horizon = *flow.times.last().expect("flows carry at least one time");
    Ok(thresholds
        .iter()
        .map(|&level| {
            for (i, &s) in series.iter().enumerate() {
                if s > scale * level {
                    return StoppingTime {
                        threshold: level,
                        time: flow.times[i],
                        crossed: true,
                    };
                }
            }
            StoppingTime {
                threshold: level,
                time: horizon,
                crossed: false,
            }
        })
        .collect())
}
