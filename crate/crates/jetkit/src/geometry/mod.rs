//! Exact direction-set geometry and the positive coefficient map.
//!
//! [`directions`] stores the fifteen-direction rational frame table with its
//! integer validation and tube-disjointness certificate; [`gamma`] solves
//! for positive weights reproducing a given symmetric matrix; [`sampling`]
//! drives deterministic surveys of the whole admissible ball.

pub mod directions;
pub mod gamma;
pub mod sampling;

pub use directions::{DirectionSet, DisjointnessCertificate, Frame};
pub use gamma::{GammaJet, GammaSolver};
pub use sampling::{coefficient_survey, sample_ball, SurveyStats};
