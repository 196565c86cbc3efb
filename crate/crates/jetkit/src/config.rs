//! Run configuration: a single JSON document that pins every knob of a
//! verification run so that reruns are bitwise reproducible.
//!
//! Two *regimes* are supported.  In `Paper` regime every scale is derived
//! from the double-exponential frequency ladder `lambda_n = a^(b^n)` and the
//! canonical exponent map; this regime overflows f64 after a handful of
//! levels and is meant for parameter audits, not field computations.  In
//! `Desk` regime the ladder and the exponent map are overridden by explicit,
//! machine-sized values so that whole iteration steps fit in memory; the
//! named constructors below are the documented desk states used by the
//! verification suite.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::{JetkitError, Result};

/// Which parameter map is in force.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Canonical double-exponential ladder and exponents.
    Paper,
    /// Explicit ladder / override exponents sized for direct computation.
    Desk,
}

impl std::str::FromStr for Regime {
    type Err = JetkitError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "paper" => Ok(Regime::Paper),
            "desk" => Ok(Regime::Desk),
            other => Err(JetkitError::Config(format!(
                "unknown regime `{other}` (expected `paper` or `desk`)"
            ))),
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::Paper => write!(f, "paper"),
            Regime::Desk => write!(f, "desk"),
        }
    }
}

/// Which variant of the iteration step is run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeMode {
    /// Pump the kinetic energy toward a prescribed profile `e(t)`.
    PrescribedEnergy,
    /// Track prescribed increments `gamma_n` with temporal cut-offs and a
    /// transported linear background field.
    PrescribedData,
    /// Identity-flow companion construction with its exact pressure balance.
    Auxiliary,
}

impl std::str::FromStr for SchemeMode {
    type Err = JetkitError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "prescribed_energy" | "energy" => Ok(SchemeMode::PrescribedEnergy),
            "prescribed_data" | "data" => Ok(SchemeMode::PrescribedData),
            "auxiliary" | "aux" => Ok(SchemeMode::Auxiliary),
            other => Err(JetkitError::Config(format!(
                "unknown scheme mode `{other}` (expected `energy`, `data`, or `auxiliary`)"
            ))),
        }
    }
}

impl std::fmt::Display for SchemeMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SchemeMode::PrescribedEnergy => write!(f, "prescribed_energy"),
            SchemeMode::PrescribedData => write!(f, "prescribed_data"),
            SchemeMode::Auxiliary => write!(f, "auxiliary"),
        }
    }
}

/// Ladder bases and per-regime overrides for the scale map.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamConfig {
    /// Ladder base; must be an even natural number in paper regime.
    pub a: f64,
    /// Ladder super-exponent; must be a multiple of 7 in paper regime.
    pub b: f64,
    /// Mollification exponent.
    pub alpha: f64,
    /// Energy-decay exponent.
    pub beta: f64,
    /// Desk regime: explicit frequencies `lambda_0, lambda_1, ...`.
    #[serde(default)]
    pub lambda_ladder: Option<Vec<f64>>,
    /// Desk regime: `r_perp = lambda^(-r_perp_exp)` (canonical 6/7).
    #[serde(default)]
    pub r_perp_exp: Option<f64>,
    /// Desk regime: `r_par = lambda^(-r_par_exp)` (canonical 4/7).
    #[serde(default)]
    pub r_par_exp: Option<f64>,
    /// Desk regime: `mu = lambda^(mu_exp)` (canonical 9/7).
    #[serde(default)]
    pub mu_exp: Option<f64>,
    /// Desk regime: fixed space-time mollification length.
    #[serde(default)]
    pub ell_override: Option<f64>,
    /// Desk regime: base path-mollification width for the flows.  The level-n
    /// flow uses `varsigma_override / (n + 1)^4`, so deeper flows are sharper
    /// and the widths are summable, mirroring the canonical map.
    #[serde(default)]
    pub varsigma_override: Option<f64>,
    /// Desk regime: fixed low-pass band for the transported background.
    #[serde(default)]
    pub kappa_band_override: Option<f64>,
}

/// Time-axis knobs.  The three step sizes are deliberately independent:
/// `dt_fd` is a probe spacing for finite-difference checks of analytic
/// fields, `dt_moll` samples the one-sided temporal mollifier, and `dt_z`
/// advances the transported background solver.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    /// End of the run interval `[0, horizon]`.
    pub horizon: f64,
    /// Finite-difference probe spacing for analytic-in-time fields.
    pub dt_fd: f64,
    /// Temporal mollifier sample spacing; defaults to `ell / 8`.
    #[serde(default)]
    pub dt_moll: Option<f64>,
    /// Step size of the transported-background solver.
    pub dt_z: f64,
    /// Number of report sample times across the run interval.
    pub n_time_samples: usize,
}

/// Energy profile `e(t) = e_mean + e_slope * t` and the data-regime
/// increment toggle.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyConfig {
    pub e_mean: f64,
    #[serde(default)]
    pub e_slope: f64,
    /// Data mode: value of the increment coefficient at the starting level,
    /// either 0 or 1; deeper levels use the dyadic default.
    #[serde(default = "default_gamma_start")]
    pub gamma_start: f64,
}

fn default_gamma_start() -> f64 {
    1.0
}

/// Transport-noise coefficients.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields, tag = "kind")]
pub enum SigmaSpec {
    /// No noise: flows degenerate to the identity.
    Zero,
    /// Three unit shear modes `(sin x2, 0, 0)`, `(0, sin x3, 0)`,
    /// `(0, 0, sin x1)`, scaled by `amplitude`.
    Shear { amplitude: f64 },
}

/// Iteration constants carried by the report (ratios only; breaches of the
/// canonical inequalities are reported, not asserted, in desk regime).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantConfig {
    pub c_v: f64,
    pub c_q: f64,
    pub c_r: f64,
    pub c_e: f64,
    pub c_z: f64,
}

/// The complete description of one verification run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Free-form label echoed into every report produced by the run.
    pub label: String,
    pub regime: Regime,
    pub scheme_mode: SchemeMode,
    pub seed: u64,
    /// Grid points per axis.
    pub grid_n: usize,
    /// Resolution precondition: require `grid_n >= multiplier * nstar * lambda`.
    pub resolution_multiplier: f64,
    /// The step runs from level `step_index` to `step_index + 1`.
    pub step_index: usize,
    pub params: ParamConfig,
    pub time: TimeConfig,
    pub energy: EnergyConfig,
    pub sigma: SigmaSpec,
    pub constants: ConstantConfig,
}

impl RunConfig {
    /// Documented desk state for the energy-pumping step: one level of the
    /// dyadic ladder starting from the zero velocity state.
    pub fn desk_energy() -> Self {
        RunConfig {
            label: "desk-energy".into(),
            regime: Regime::Desk,
            scheme_mode: SchemeMode::PrescribedEnergy,
            seed: 7,
            grid_n: 48,
            resolution_multiplier: 2.0,
            step_index: 0,
            params: ParamConfig {
                a: 2.0,
                b: 7.0,
                alpha: 0.01,
                beta: 1.0,
                lambda_ladder: Some(vec![8.0, 16.0, 32.0]),
                r_perp_exp: Some(1.0),
                r_par_exp: Some(2.0 / 7.0),
                mu_exp: Some(2.2),
                ell_override: Some(0.004),
                varsigma_override: Some(0.25),
                kappa_band_override: Some(2.0),
            },
            time: TimeConfig {
                horizon: 1.0,
                dt_fd: 1e-5,
                dt_moll: None,
                dt_z: 1e-3,
                n_time_samples: 5,
            },
            energy: EnergyConfig {
                e_mean: 6000.0,
                e_slope: 0.0,
                gamma_start: 1.0,
            },
            sigma: SigmaSpec::Shear { amplitude: 0.5 },
            constants: ConstantConfig {
                c_v: 10.0,
                c_q: 10.0,
                c_r: 100.0,
                c_e: 3.0,
                c_z: 10.0,
            },
        }
    }

    /// Documented desk state for the data-tracking step: level 3 -> 4 of a
    /// short ladder, starting from the transported-background zero state.
    pub fn desk_data() -> Self {
        let mut cfg = Self::desk_energy();
        cfg.label = "desk-data".into();
        cfg.scheme_mode = SchemeMode::PrescribedData;
        cfg.step_index = 3;
        cfg.params.lambda_ladder = Some(vec![4.0, 6.0, 8.0, 12.0, 16.0, 24.0]);
        cfg.params.ell_override = Some(2e-4);
        cfg.time.horizon = 2.0;
        cfg.time.n_time_samples = 9;
        cfg
    }

    /// Documented desk state for the identity-flow companion construction.
    pub fn desk_auxiliary() -> Self {
        let mut cfg = Self::desk_energy();
        cfg.label = "desk-auxiliary".into();
        cfg.scheme_mode = SchemeMode::Auxiliary;
        cfg.sigma = SigmaSpec::Zero;
        cfg
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| JetkitError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_n < 8 || self.grid_n % 2 != 0 {
            return Err(JetkitError::Config(format!(
                "grid_n must be even and at least 8, got {}",
                self.grid_n
            )));
        }
        if !(self.resolution_multiplier > 0.0) {
            return Err(JetkitError::Config(
                "resolution_multiplier must be positive".into(),
            ));
        }
        if !(self.time.horizon > 0.0) || !(self.time.dt_fd > 0.0) || !(self.time.dt_z > 0.0) {
            return Err(JetkitError::Config(
                "horizon, dt_fd, dt_z must all be positive".into(),
            ));
        }
        if self.time.n_time_samples < 2 {
            return Err(JetkitError::Config(
                "n_time_samples must be at least 2".into(),
            ));
        }
        if self.energy.gamma_start != 0.0 && self.energy.gamma_start != 1.0 {
            return Err(JetkitError::Config(format!(
                "gamma_start must be 0 or 1, got {}",
                self.energy.gamma_start
            )));
        }
        if self.regime == Regime::Desk && self.params.lambda_ladder.is_none() {
            return Err(JetkitError::Config(
                "desk regime requires an explicit lambda_ladder".into(),
            ));
        }
        if let Some(ladder) = &self.params.lambda_ladder {
            if ladder.len() < self.step_index + 3 {
                return Err(JetkitError::Config(format!(
                    "lambda_ladder must reach two levels past step_index (need {} entries, got {})",
                    self.step_index + 3,
                    ladder.len()
                )));
            }
            if ladder.windows(2).any(|w| w[1] <= w[0]) || ladder[0] <= 1.0 {
                return Err(JetkitError::Config(
                    "lambda_ladder must be strictly increasing and > 1".into(),
                ));
            }
        }
        if self.scheme_mode == SchemeMode::PrescribedEnergy {
            let e_min = self.energy.e_mean
                + (self.energy.e_slope * self.time.horizon).min(0.0);
            if !(self.energy.e_mean > 0.0) || !(e_min > 0.0) {
                return Err(JetkitError::Config(
                    "energy profile must stay positive on the run interval".into(),
                ));
            }
            if self.constants.c_r >= e_min / 48.0 {
                return Err(JetkitError::Config(format!(
                    "c_r = {} must be below inf e / 48 = {}",
                    self.constants.c_r,
                    e_min / 48.0
                )));
            }
        }
        Ok(())
    }

    /// Energy target at time `t`.
    pub fn energy_at(&self, t: f64) -> f64 {
        self.energy.e_mean + self.energy.e_slope * t
    }
}
