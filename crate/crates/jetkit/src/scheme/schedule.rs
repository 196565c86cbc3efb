//! Scale schedules: from the run configuration to the concrete numbers that
//! drive one iteration step.
//!
//! In the paper regime every scale is a power of the double-exponential
//! ladder `lambda_n = a^(b^n)`; the map is faithful and therefore leaves
//! f64 range after a few levels, at which point construction fails with an
//! error that points at the desk regime.  In the desk regime the ladder is
//! explicit and the exponents are configurable, so the same formulas produce
//! machine-sized scales.
//!
//! The canonical ordering between the smoothing scales,
//! `ell <= varsigma_{n+1} <= varsigma_n <= tau_{n+1}`, is enforced as a hard
//! error in the paper regime and surfaced as report rows in the desk regime
//! (where a deliberately mis-sized override is a legitimate experiment).

use crate::config::{Regime, RunConfig, SchemeMode};
use crate::jets::family::JetParams;
use crate::{JetkitError, Result};

/// The level at which the data-tracking increment is a free toggle in
/// `{0, 1}` rather than the dyadic default.
pub const GAMMA_TOGGLE_LEVEL: usize = 4;

/// Canonical exponents of the jet scales in the paper regime:
/// `r_perp = lambda^(-6/7)`, `r_par = lambda^(-4/7)`, `mu = lambda^(9/7)`.
pub const CANONICAL_R_PERP_EXP: f64 = 6.0 / 7.0;
pub const CANONICAL_R_PAR_EXP: f64 = 4.0 / 7.0;
pub const CANONICAL_MU_EXP: f64 = 9.0 / 7.0;

/// Scales attached to a single ladder level.
#[derive(Debug, Clone, Copy)]
pub struct LevelScales {
    pub level: usize,
    /// Ladder frequency `lambda_n`.
    pub lambda: f64,
    /// Energy gap `delta_n = lambda_1^(2 beta) lambda_n^(-2 beta)`.
    pub delta: f64,
    /// Temporal cut-off scale `tau_n = 2^(-n)`.
    pub tau: f64,
    /// Data-tracking energy increment `gamma_n` (dyadic, with the toggle
    /// level free in `{0, 1}`).
    pub gamma_increment: f64,
    /// Path-mollification width of the level-n flow.
    pub varsigma: f64,
    /// Low-pass band for the transported background at this level.
    pub z_band: f64,
}

/// Scales specific to the step from `from_level` to `from_level + 1`.
#[derive(Debug, Clone, Copy)]
pub struct StepScales {
    pub from_level: usize,
    /// Space-time mollification length for the incoming state.
    pub ell: f64,
    /// Jet scales of the incoming perturbation (level `from_level + 1`).
    pub jets: JetParams,
}

/// One ordering constraint between two schedule scales.
#[derive(Debug, Clone)]
pub struct OrderingRow {
    pub name: &'static str,
    /// Left-hand side (must not exceed `rhs`).
    pub lhs: f64,
    pub rhs: f64,
}

impl OrderingRow {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

/// The complete scale schedule for one run: per-level scales for
/// `0 ..= step_index + 2` and the step-scoped scales.
#[derive(Debug, Clone)]
pub struct ParamSchedule {
    pub regime: Regime,
    pub mode: SchemeMode,
    levels: Vec<LevelScales>,
    step: StepScales,
}

/// Fail with a message that names the offending scale and points the user
/// at the desk regime.
fn paper_range_error(what: &str, level: usize, value: f64) -> JetkitError {
    JetkitError::Params(format!(
        "paper-regime scale {what} at level {level} left f64 range (value {value:e}); \
         rerun in desk regime with an explicit ladder"
    ))
}

fn require_finite_positive(what: &str, level: usize, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(paper_range_error(what, level, value))
    }
}

/// Base-2 logarithms of the ladder frequencies.  All powers of `lambda_k`
/// are taken through `exp2(e * log2 lambda_k)`, so a derived scale (an
/// energy gap, a band exponent) stays representable even when a deeper
/// `lambda` itself would not be; the range error fires exactly when a scale
/// that is actually needed leaves f64.
struct Ladder {
    log2: Vec<f64>,
    /// Exact configured values (desk regime only), so `lambda` itself never
    /// picks up a log/exp round trip.
    exact: Option<Vec<f64>>,
}

impl Ladder {
    fn value(&self, what: &str, k: usize) -> Result<f64> {
        match &self.exact {
            Some(vals) if k < vals.len() => Ok(vals[k]),
            _ => require_finite_positive(what, k, (self.log2[k]).exp2()),
        }
    }

    fn pow(&self, what: &str, k: usize, e: f64) -> Result<f64> {
        require_finite_positive(what, k, (e * self.log2[k]).exp2())
    }
}

impl ParamSchedule {
    /// Build the schedule for `cfg.step_index -> cfg.step_index + 1`.
    pub fn from_config(cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.step_index;
        let n_max = n + 2;
        let p = &cfg.params;

        let ladder = match cfg.regime {
            Regime::Paper => {
                if p.a < 2.0 || p.a.fract() != 0.0 || (p.a as u64) % 2 != 0 {
                    return Err(JetkitError::Params(format!(
                        "paper regime requires an even natural ladder base, got a = {}",
                        p.a
                    )));
                }
                if p.b <= 0.0 || p.b.fract() != 0.0 || (p.b as u64) % 7 != 0 {
                    return Err(JetkitError::Params(format!(
                        "paper regime requires a positive multiple of 7 as super-exponent, \
                         got b = {}",
                        p.b
                    )));
                }
                Ladder {
                    log2: (0..=n_max + 1)
                        .map(|k| p.b.powi(k as i32) * p.a.log2())
                        .collect(),
                    exact: None,
                }
            }
            Regime::Desk => {
                let vals = p.lambda_ladder.as_ref().ok_or_else(|| {
                    JetkitError::Config("desk regime requires an explicit lambda_ladder".into())
                })?;
                // reuse the top rung when the band of the deepest level asks
                // one past the configured ladder
                let mut log2: Vec<f64> = vals[..=n_max].iter().map(|l| l.log2()).collect();
                log2.push(if vals.len() > n_max + 1 {
                    vals[n_max + 1].log2()
                } else {
                    log2[n_max]
                });
                Ladder {
                    log2,
                    exact: Some(vals[..vals.len().min(n_max + 2)].to_vec()),
                }
            }
        };

        let two_beta = 2.0 * p.beta;
        let levels: Vec<LevelScales> = (0..=n_max)
            .map(|k| -> Result<LevelScales> {
                let lambda = ladder.value("lambda", k)?;
                let delta = require_finite_positive(
                    "delta",
                    k,
                    (two_beta * (ladder.log2[1] - ladder.log2[k])).exp2(),
                )?;
                let decay = ((k + 1) as f64).powi(4);
                let varsigma = match (cfg.regime, p.varsigma_override) {
                    (Regime::Desk, Some(base)) => base / decay,
                    _ => require_finite_positive(
                        "varsigma",
                        k,
                        ladder.pow("varsigma", k, -1.0 / 100.0)? / decay,
                    )?,
                };
                let z_band = match (cfg.regime, p.kappa_band_override) {
                    (Regime::Desk, Some(band)) => band,
                    _ => ladder.pow("z_band", k + 1, p.alpha / 16.0)?,
                };
                let gamma_increment = if k == GAMMA_TOGGLE_LEVEL {
                    cfg.energy.gamma_start
                } else {
                    0.5f64.powi(k as i32)
                };
                Ok(LevelScales {
                    level: k,
                    lambda,
                    delta,
                    tau: 0.5f64.powi(k as i32),
                    gamma_increment,
                    varsigma,
                    z_band,
                })
            })
            .collect::<Result<_>>()?;

        let ell = match (cfg.regime, p.ell_override) {
            (Regime::Desk, Some(ell)) => ell,
            _ => require_finite_positive(
                "ell",
                n,
                (-1.5 * p.alpha * ladder.log2[n + 1] - 100.0 * ladder.log2[n]).exp2(),
            )?,
        };

        let (rpe, rle, mue) = match cfg.regime {
            Regime::Paper => (CANONICAL_R_PERP_EXP, CANONICAL_R_PAR_EXP, CANONICAL_MU_EXP),
            Regime::Desk => (
                p.r_perp_exp.unwrap_or(CANONICAL_R_PERP_EXP),
                p.r_par_exp.unwrap_or(CANONICAL_R_PAR_EXP),
                p.mu_exp.unwrap_or(CANONICAL_MU_EXP),
            ),
        };
        let lam_next = ladder.value("lambda", n + 1)?;
        let r_perp = ladder.pow("r_perp", n + 1, -rpe)?;
        let r_par = ladder.pow("r_par", n + 1, -rle)?;
        let mu = ladder.pow("mu", n + 1, mue)?;
        let jets = JetParams::new(lam_next, r_perp, r_par, mu)?;

        let schedule = ParamSchedule {
            regime: cfg.regime,
            mode: cfg.scheme_mode,
            levels,
            step: StepScales {
                from_level: n,
                ell,
                jets,
            },
        };

        if cfg.regime == Regime::Paper {
            if let Some(bad) = schedule.ordering_rows().iter().find(|r| !r.holds()) {
                return Err(JetkitError::Params(format!(
                    "schedule ordering `{}` fails: {:e} > {:e}",
                    bad.name, bad.lhs, bad.rhs
                )));
            }
        }
        Ok(schedule)
    }

    /// Scales of ladder level `k` (available for `0 ..= step_index + 2`).
    pub fn level(&self, k: usize) -> &LevelScales {
        &self.levels[k]
    }

    pub fn levels(&self) -> &[LevelScales] {
        &self.levels
    }

    pub fn step(&self) -> &StepScales {
        &self.step
    }

    /// The canonical scale-ordering constraints for this step, as rows
    /// `lhs <= rhs`.  The temporal-cut-off comparison only binds in the
    /// data-tracking variant, the one place the cut-off scale exists.
    pub fn ordering_rows(&self) -> Vec<OrderingRow> {
        let n = self.step.from_level;
        let here = &self.levels[n];
        let next = &self.levels[n + 1];
        let mut rows = vec![
            OrderingRow {
                name: "sched_ell_le_varsigma_next",
                lhs: self.step.ell,
                rhs: next.varsigma,
            },
            OrderingRow {
                name: "sched_varsigma_decreasing",
                lhs: next.varsigma,
                rhs: here.varsigma,
            },
        ];
        if self.mode == SchemeMode::PrescribedData {
            rows.push(OrderingRow {
                name: "sched_varsigma_le_tau_next",
                lhs: here.varsigma,
                rhs: next.tau,
            });
        }
        rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;
    use proptest::prelude::*;

    fn paper_config(step_index: usize) -> RunConfig {
        let mut cfg = RunConfig::desk_energy();
        cfg.regime = Regime::Paper;
        cfg.step_index = step_index;
        cfg.params.lambda_ladder = None;
        cfg.params.ell_override = None;
        cfg.params.varsigma_override = None;
        cfg.params.kappa_band_override = None;
        cfg
    }

    #[test]
    fn ladder_start_is_exact() {
        let s = ParamSchedule::from_config(&paper_config(0)).unwrap();
        assert_eq!(s.level(0).lambda, 2.0);
        assert_eq!(s.level(1).lambda, 128.0);
        assert_eq!(s.level(1).delta, 1.0);
        assert_eq!(s.level(0).tau, 1.0);
        assert_eq!(s.level(1).tau, 0.5);
    }

    #[test]
    fn flow_width_at_level_zero_matches_reference_value() {
        // 2^(-1/100), evaluated independently via exp(-ln 2 / 100) to full
        // precision and frozen here.
        let s = ParamSchedule::from_config(&paper_config(0)).unwrap();
        let frozen = 0.993_092_495_437_035_9_f64;
        assert!((s.level(0).varsigma - frozen).abs() < 1e-15);
        assert!((s.level(0).varsigma - (-std::f64::consts::LN_2 / 100.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn canonical_exponents_drive_the_jet_scales() {
        let s = ParamSchedule::from_config(&paper_config(0)).unwrap();
        let lam = s.step().jets.lambda;
        assert_eq!(lam, 128.0);
        // the transverse width is snapped to kappa / lambda
        let kappa = s.step().jets.kappa as f64;
        assert_eq!(kappa, (128.0f64.powf(1.0 - CANONICAL_R_PERP_EXP)).round());
        assert!((s.step().jets.r_perp - kappa / 128.0).abs() < 1e-15);
        assert!((s.step().jets.r_par - 128.0f64.powf(-CANONICAL_R_PAR_EXP)).abs() < 1e-15);
        assert!((s.step().jets.mu - 128.0f64.powf(CANONICAL_MU_EXP)).abs() < 1e-12);
    }

    #[test]
    fn paper_regime_overflows_into_a_desk_hint() {
        let err = ParamSchedule::from_config(&paper_config(2)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("desk"), "error should point at desk regime: {msg}");
    }

    #[test]
    fn paper_ordering_holds_on_the_first_step() {
        let s = ParamSchedule::from_config(&paper_config(0)).unwrap();
        for row in s.ordering_rows() {
            assert!(row.holds(), "{} fails: {} > {}", row.name, row.lhs, row.rhs);
        }
    }

    #[test]
    fn desk_states_produce_expected_scales() {
        let s = ParamSchedule::from_config(&RunConfig::desk_energy()).unwrap();
        assert_eq!(s.level(0).varsigma, 0.25);
        assert_eq!(s.level(1).varsigma, 0.25 / 16.0);
        assert_eq!(s.step().ell, 0.004);
        assert_eq!(s.step().jets.lambda, 16.0);
        for row in s.ordering_rows() {
            assert!(row.holds(), "{} fails in desk-energy", row.name);
        }

        let d = ParamSchedule::from_config(&RunConfig::desk_data()).unwrap();
        assert_eq!(d.step().from_level, 3);
        assert_eq!(d.level(4).gamma_increment, 1.0);
        assert_eq!(d.level(3).gamma_increment, 0.125);
        assert_eq!(d.level(5).gamma_increment, 0.03125);
        for row in d.ordering_rows() {
            assert!(row.holds(), "{} fails in desk-data", row.name);
        }
    }

    #[test]
    fn toggle_level_follows_the_config() {
        let mut cfg = RunConfig::desk_data();
        cfg.energy.gamma_start = 0.0;
        let s = ParamSchedule::from_config(&cfg).unwrap();
        assert_eq!(s.level(GAMMA_TOGGLE_LEVEL).gamma_increment, 0.0);
    }

    proptest! {
        /// Deeper levels always have smaller energy gaps and flow widths,
        /// for any admissible desk ladder and positive beta.
        #[test]
        fn desk_schedule_scales_are_monotone(
            base in 3.0f64..20.0,
            growth in prop::collection::vec(1.2f64..3.0, 5),
            beta in 0.2f64..2.0,
        ) {
            let mut ladder = vec![base];
            for g in &growth {
                ladder.push(ladder.last().unwrap() * g);
            }
            let mut cfg = RunConfig::desk_data();
            cfg.params.lambda_ladder = Some(ladder);
            cfg.params.beta = beta;
            cfg.params.ell_override = Some(1e-6);
            let s = ParamSchedule::from_config(&cfg).unwrap();
            for w in s.levels().windows(2) {
                prop_assert!(w[1].lambda > w[0].lambda);
                prop_assert!(w[1].delta < w[0].delta);
                prop_assert!(w[1].varsigma < w[0].varsigma);
                prop_assert!(w[1].tau < w[0].tau);
            }
        }
    }
}
