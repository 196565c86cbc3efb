//! jetkit: a spectral toolkit for flow-conjugated convex-integration diagnostics
//! on the 3-torus `T^3 = (R/2πZ)^3`.
//!
//! The crate is organized around one hard numerical fact: intermittent jet
//! fields oscillate far below any affordable 3D grid scale, while everything
//! else in the construction (mollified states, transported noise fields, flow
//! maps, amplitude envelopes) is smooth and band-limited. The two worlds get
//! different representations:
//!
//! * smooth fields live on an `N^3` collocation grid with exact spectral
//!   calculus ([`field`], [`spectral`], [`norms`], [`mollify`]);
//! * jets are evaluated analytically in orthonormal frame coordinates
//!   ([`jets`]), with statistics computed by exact factorized quadrature and
//!   nonlocal operators applied blockwise on the rotated cubic lattice that
//!   the frame generates ([`scheme::modfield`]).
//!
//! Flow maps, transported noise, and conjugated operators are in [`flows`];
//! the iteration step itself (amplitudes, perturbations, pressure, stress
//! update, energy accounting) is in [`scheme`]; [`geometry`] holds the exact
//! rational direction set and the positive coefficient map; [`cli`] wires the
//! command-line entry points.

pub mod container;
pub mod error;
pub mod fft;
pub mod field;
pub mod fit;
pub mod geometry;
pub mod grid;
pub mod jets;
pub mod mollify;
pub mod norms;
pub mod quadrature;
pub mod spectral;

pub mod flows;
pub mod scheme;

pub mod cli;
pub mod config;
pub mod report;

pub use error::JetkitError;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, JetkitError>;

/// 2π, the torus period.
pub const TAU: f64 = std::f64::consts::TAU;
