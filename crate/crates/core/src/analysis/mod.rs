//! Closed-form analysis around the iteration: sufficient conditions,
//! bootstrap exponents, the variational functional, and Gagliardo-Nirenberg
//! ratio estimators.

pub mod bootstrap;
pub mod certify;
pub mod conditions;
pub mod gn;
pub mod variational;

pub use bootstrap::{bootstrap_exponents, BootstrapTrace};
pub use certify::{certify, problem_constants, Certification};
pub use conditions::{
    check_conditions, derive_exponents, AnalyticConstants, ConditionEval, ConditionMode,
    ConditionReport, Exponents, Provenance,
};
pub use gn::{estimate_gn_ratio, GnEstimate, GnVariant};
pub use variational::{el_transform, variational_functional};
