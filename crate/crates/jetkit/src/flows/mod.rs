//! Transport-noise flow machinery: driving paths, causal mollification,
//! divergence-free coefficient fields, volume-preserving flow maps, warp
//! composition, conjugated operators, regularity estimates and adapted
//! stopping times.
//!
//! The pipeline runs left to right: [`noise`] samples Brownian channels
//! and smooths them against a one-sided kernel, [`sigma`] builds the
//! coefficient fields the channels drive, [`flowmap`] integrates the
//! resulting transport velocity into snapshot ladders of forward and
//! inverse maps, [`compose`] evaluates grid fields at warped points,
//! [`conjugate`] chains pullback, plain spectral operator and
//! pushforward into the conjugated operators the iteration uses, and
//! [`estimates`]/[`stopping`] turn snapshot ladders into the discrete
//! regularity diagnostics the scheme reports.

pub mod compose;
pub mod conjugate;
pub mod estimates;
pub mod flowmap;
pub mod noise;
pub mod sigma;
pub mod stopping;

pub use compose::{compose_at_points, culled_modes, dense_field, grid_points, SpectralModes};
pub use conjugate::{conjugate_apply, pullback, pushforward, ConjOp};
pub use estimates::{
    flow_estimate_report, spatial_holder_norm, FlowEstimateOptions, FlowEstimates, FlowNormRow,
};
pub use flowmap::{
    advect_points, det_deviation, integrate_flow, FlowMap, FlowOptions, FlowSnapshot,
};
pub use noise::{sample_brownian, MollifiedPath, NoisePath, OneSidedKernel};
pub use sigma::{SigmaFields, SigmaMode, TrigPhase};
pub use stopping::{stopping_time_estimate, tracked_norm, StoppingTime};
