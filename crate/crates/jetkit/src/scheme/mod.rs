//! The iteration step: everything between one velocity/stress pair and the
//! next.
//!
//! The submodules follow the order of the construction itself: [`schedule`]
//! turns the run configuration into concrete scales for every level;
//! [`cutoff`] holds the temporal switch used by the data-tracking variant;
//! [`tube_ops`] evaluates the nonlocal operators (inverse Laplacian, Leray
//! projections) on jet-modulated scalars through screened radial potentials;
//! [`envelopes`] builds the energy increments, the trace part `rho`, and the
//! amplitude fields; [`modfield`] assembles the modulated perturbations and
//! their exact lattice statistics; [`stokes_z`] advances the transported
//! linear background; [`state`] carries one level of iteration data;
//! [`pressure`] solves for the oscillation pressure and updates `q`;
//! [`reynolds`] assembles the new stress term by term; [`step`] orchestrates
//! a full level advance and writes the diagnostics report; [`auxiliary`]
//! runs the identity-flow companion construction.

pub mod cutoff;
pub mod schedule;

pub mod tube_ops;

pub mod envelopes;
pub mod modfield;
pub mod stokes_z;

pub mod pressure;
pub mod reynolds;
pub mod state;

pub mod auxiliary;
pub mod step;
