//! Intermittent jets: compactly supported oscillatory building blocks with
//! exact analytic derivative calculus, identity verification, and scaling
//! surveys.

pub mod family;
pub mod identities;
pub mod profiles;
pub mod survey;

pub use family::{JetFamily, JetField, JetParams};
pub use identities::{jet_identity_report, JetCheckOptions};
pub use profiles::JetProfiles;
pub use survey::{scaling_survey, ScaleMap, SurveyQuantity, SurveyReport};
