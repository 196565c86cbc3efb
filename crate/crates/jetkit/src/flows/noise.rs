//! Brownian driving paths and their one-sided (causal) mollification.
//!
//! A [`NoisePath`] holds independent channels sampled on a uniform time
//! grid `[t0, horizon]` with `t0 <= 0`; every value at a non-positive time
//! is exactly zero, and increments over positive times are independent
//! Gaussians of variance `dt`.  A [`MollifiedPath`] smooths a path against
//! a bump kernel supported in `(0, 1)` — so its value at time `t` depends
//! only on path values in `[t - varsigma, t]`, never on the future — and
//! evaluates both the smoothed path and its time derivative on demand by
//! segment-exact quadrature (the kernel is integrated with Gauss-Legendre
//! panels split at the path's nodes, where the piecewise-linear path has
//! kinks).

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::quadrature::integrate;
use crate::{JetkitError, Result};

/// Independent Brownian channels on a uniform time grid, zero at and
/// before time zero.
#[derive(Debug, Clone)]
pub struct NoisePath {
    pub seed: u64,
    /// First node time (`<= 0`, an exact multiple of `dt`).
    pub t0: f64,
    pub dt: f64,
    /// `samples[k][i]` = channel `k` at time `t0 + i * dt`.
    pub samples: Vec<Vec<f64>>,
}

impl NoisePath {
    /// Number of time nodes.
    pub fn len(&self) -> usize {
        self.samples.first().map_or(0, |c| c.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channels(&self) -> usize {
        self.samples.len()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + self.dt * i as f64
    }

    pub fn horizon(&self) -> f64 {
        self.time(self.len().saturating_sub(1))
    }

    /// Piecewise-linear evaluation of channel `k`; times at or before zero
    /// give exactly zero, times beyond the horizon are an error.
    pub fn eval(&self, k: usize, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        if t > self.horizon() + 1e-12 * self.dt {
            return Err(JetkitError::TimeSeries(format!(
                "path evaluation at t = {t} beyond horizon {}",
                self.horizon()
            )));
        }
        let s = ((t - self.t0) / self.dt).clamp(0.0, (self.len() - 1) as f64);
        let i = (s.floor() as usize).min(self.len() - 2);
        let w = s - i as f64;
        let c = &self.samples[k];
        Ok(c[i] * (1.0 - w) + c[i + 1] * w)
    }

    /// Construct from explicit samples (deterministic test paths).
    pub fn from_samples(t0: f64, dt: f64, samples: Vec<Vec<f64>>) -> Result<Self> {
        if dt <= 0.0 || t0 > 0.0 {
            return Err(JetkitError::TimeSeries(
                "need dt > 0 and t0 <= 0 for a noise path".into(),
            ));
        }
        let n = samples.first().map_or(0, |c| c.len());
        if n < 2 || samples.iter().any(|c| c.len() != n) {
            return Err(JetkitError::TimeSeries(
                "noise channels must share a length of at least 2".into(),
            ));
        }
        Ok(NoisePath {
            seed: 0,
            t0,
            dt,
            samples,
        })
    }

    /// Truncate to the nodes with `time <= t` (used by causality tests).
    pub fn truncated(&self, t: f64) -> Self {
        let keep = self
            .samples
            .first()
            .map_or(0, |c| c.len())
            .min(((t - self.t0) / self.dt).floor() as usize + 1);
        NoisePath {
            seed: self.seed,
            t0: self.t0,
            dt: self.dt,
            samples: self.samples.iter().map(|c| c[..keep].to_vec()).collect(),
        }
    }
}

/// Sample `channels` independent Brownian paths on `[-t_pre, horizon]`.
///
/// Reproducible: the same seed yields the same path bitwise.  Increments
/// are drawn node-by-node (channels inner), so extending the horizon with
/// the same seed preserves the earlier values.
pub fn sample_brownian(
    seed: u64,
    dt: f64,
    t_pre: f64,
    horizon: f64,
    channels: usize,
) -> Result<NoisePath> {
    if dt <= 0.0 || horizon <= 0.0 || t_pre < 0.0 || channels == 0 {
        return Err(JetkitError::TimeSeries(
            "sample_brownian needs dt > 0, horizon > 0, t_pre >= 0, channels >= 1".into(),
        ));
    }
    let n_pre = (t_pre / dt).ceil() as usize;
    let n_post = (horizon / dt).ceil() as usize;
    let t0 = -(n_pre as f64) * dt;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut samples = vec![vec![0.0f64; n_pre + n_post + 1]; channels];
    let sqrt_dt = dt.sqrt();
    for i in n_pre + 1..=n_pre + n_post {
        for chan in samples.iter_mut() {
            let g: f64 = StandardNormal.sample(&mut rng);
            chan[i] = chan[i - 1] + sqrt_dt * g;
        }
    }
    Ok(NoisePath {
        seed,
        t0,
        dt,
        samples,
    })
}

/// The mollification kernel: a bump supported in `(0, 1)` with unit mass.
#[derive(Debug, Clone)]
pub struct OneSidedKernel {
    norm: f64,
}

impl OneSidedKernel {
    pub fn new() -> Self {
        // normalize int_0^1 exp(-1/(s(1-s))) ds to one
        let raw = integrate(0.0, 1.0, 64, bump01);
        OneSidedKernel { norm: 1.0 / raw }
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.norm * bump01(s)
    }

    /// First moment `int s theta(s) ds` (enters the ramp-response oracle).
    pub fn first_moment(&self) -> f64 {
        integrate(0.0, 1.0, 64, |s| s * self.eval(s))
    }
}

impl Default for OneSidedKernel {
    fn default() -> Self {
        Self::new()
    }
}

fn bump01(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        0.0
    } else {
        (-1.0 / (s * (1.0 - s))).exp()
    }
}

/// A noise path together with a causal mollification width.
///
/// `value(k, t) = int_0^1 B^k(t - varsigma s) theta(s) ds`, and
/// `rate(k, t) = int_0^1 (B^k)'(t - varsigma s) theta(s) ds` with the
/// piecewise-constant derivative integrated segment-exactly.
#[derive(Debug, Clone)]
pub struct MollifiedPath {
    pub base: NoisePath,
    pub varsigma: f64,
    kernel: OneSidedKernel,
}

impl MollifiedPath {
    pub fn new(base: NoisePath, varsigma: f64) -> Result<Self> {
        if varsigma < 2.0 * base.dt {
            return Err(JetkitError::Mollifier(format!(
                "mollification width {varsigma} under-resolved by path step {} (need >= 2 dt)",
                base.dt
            )));
        }
        Ok(MollifiedPath {
            base,
            varsigma,
            kernel: OneSidedKernel::new(),
        })
    }

    pub fn channels(&self) -> usize {
        self.base.channels()
    }

    /// Latest time at which the mollified path can be evaluated.
    pub fn horizon(&self) -> f64 {
        self.base.horizon()
    }

    /// Split points of `s -> B(t - varsigma s)` on `[0, 1]`: kernel-support
    /// endpoints plus the preimages of base-path nodes (and of time zero,
    /// where the path stops being identically zero).
    fn segments(&self, t: f64) -> Vec<f64> {
        let mut cuts = vec![0.0, 1.0];
        let lo = t - self.varsigma;
        // node times within (lo, t)
        let i0 = ((lo - self.base.t0) / self.base.dt).floor() as i64;
        let i1 = ((t - self.base.t0) / self.base.dt).ceil() as i64;
        for i in i0..=i1 {
            let tn = self.base.t0 + self.base.dt * i as f64;
            let s = (t - tn) / self.varsigma;
            if s > 1e-14 && s < 1.0 - 1e-14 {
                cuts.push(s);
            }
        }
        let s_zero = t / self.varsigma;
        if s_zero > 1e-14 && s_zero < 1.0 - 1e-14 {
            cuts.push(s_zero);
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        cuts
    }

    /// Smoothed value of channel `k` at time `t`.
    pub fn value(&self, k: usize, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        let cuts = self.segments(t);
        let mut acc = 0.0;
        for w in cuts.windows(2) {
            acc += integrate(w[0], w[1], 12, |s| {
                self.base.eval(k, t - self.varsigma * s).unwrap_or(0.0)
                    * self.kernel.eval(s)
            });
        }
        Ok(acc)
    }

    /// Smoothed derivative of channel `k` at time `t`: the path slope is
    /// constant between nodes, so each segment contributes
    /// `slope * int_seg theta`.
    pub fn rate(&self, k: usize, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        let cuts = self.segments(t);
        let mut acc = 0.0;
        for w in cuts.windows(2) {
            let sm = 0.5 * (w[0] + w[1]);
            let tm = t - self.varsigma * sm;
            let slope = self.base_slope(k, tm)?;
            if slope != 0.0 {
                acc += slope * integrate(w[0], w[1], 12, |s| self.kernel.eval(s));
            }
        }
        Ok(acc)
    }

    /// Slope of the piecewise-linear base path at time `t` (zero at or
    /// before time zero).
    fn base_slope(&self, k: usize, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        let b = &self.base;
        if t > b.horizon() + 1e-12 * b.dt {
            return Err(JetkitError::TimeSeries(format!(
                "path slope at t = {t} beyond horizon {}",
                b.horizon()
            )));
        }
        let s = ((t - b.t0) / b.dt).clamp(0.0, (b.len() - 1) as f64);
        let i = (s.floor() as usize).min(b.len() - 2);
        Ok((b.samples[k][i + 1] - b.samples[k][i]) / b.dt)
    }

    /// All channel values at `t`.
    pub fn values_at(&self, t: f64) -> Result<Vec<f64>> {
        (0..self.channels()).map(|k| self.value(k, t)).collect()
    }

    /// All channel rates at `t`.
    pub fn rates_at(&self, t: f64) -> Result<Vec<f64>> {
        (0..self.channels()).map(|k| self.rate(k, t)).collect()
    }

    /// Kernel first moment (for the ramp-response oracle).
    pub fn kernel_first_moment(&self) -> f64 {
        self.kernel.first_moment()
    }
}
