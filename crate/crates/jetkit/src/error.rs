//! Typed error hierarchy for the toolkit.

use thiserror::Error;

/// Everything that can go wrong across the crate.
#[derive(Debug, Error)]
pub enum JetkitError {
    /// Grid construction or compatibility failures.
    #[error("grid error: {0}")]
    Grid(String),

    /// A field operation was asked of incompatible shapes/ranks.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// The symmetric-matrix argument left the domain of the coefficient map.
    #[error("matrix outside the admissible ball: operator norm {op_norm:.6} > {radius:.6}")]
    OutOfBall { op_norm: f64, radius: f64 },

    /// The coefficient map Newton solve failed to converge.
    #[error("coefficient solve did not converge: residual {residual:.3e} after {iters} iterations")]
    GammaNoConvergence { residual: f64, iters: usize },

    /// Energy pumping would need a negative coefficient.
    #[error("energy deficit: prescribed energy leaves gap {gap:.6e} at t = {t:.6}")]
    EnergyDeficit { gap: f64, t: f64 },

    /// Two jet tubes would overlap for the requested transverse radius.
    #[error("jet support collision between directions {first} and {second}: separation {separation:.6e} < required {required:.6e}")]
    ShiftCollision {
        first: usize,
        second: usize,
        separation: f64,
        required: f64,
    },

    /// A resolution precondition was violated.
    #[error("under-resolved: {0}")]
    UnderResolved(String),

    /// Direction-set data failed an exact structural identity.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// A mollification length or time horizon is inconsistent with the data.
    #[error("mollifier error: {0}")]
    Mollifier(String),

    /// Flow integration failure (Jacobian drift, inconsistent levels, ...).
    #[error("flow error: {0}")]
    Flow(String),

    /// Configuration parsing / validation failure.
    #[error("config error: {0}")]
    Config(String),

    /// Missing or inconsistent time slices for a temporal operation.
    #[error("time series error: {0}")]
    TimeSeries(String),

    /// Parameter-map violation (orderings, integrality, positivity).
    #[error("parameter error: {0}")]
    Params(String),

    /// I/O wrapper.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization wrapper.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// CSV writing wrapper.
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
