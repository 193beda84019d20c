//! Finite-dimensional variational analysis: lower Dini subderivatives,
//! convex and Clarke subdifferentials, Minty variational inequalities,
//! the increase-along-rays property and monotone polars of sampled graphs.
//!
//! The ambient space is R^n with the dot product pairing. Quantifiers over
//! the whole space are replaced by deterministic grids over a truncation
//! box, which every report states.

pub mod error;
pub mod extreal;
pub mod graph;
pub mod library;
pub mod minty;
pub mod oracle;
pub mod polar;
pub mod region;
pub mod subderivative;
pub mod subdifferential;
pub mod suite;
pub mod verdict;
pub mod vector;

pub use error::{Error, Result};
pub use extreal::ExtReal;
pub use graph::{GraphMeta, GraphSample, GraphSource, SampledGraph};
pub use library::{lookup, test_library, FUNCTION_IDS};
pub use minty::{cross_validate, iar_check, minty_subderivative, minty_subdifferential, EquivalenceReport, MintyReport};
pub use oracle::{eval_shifted, CovectorSampling, FunctionOracle, SubdiffSet};
pub use polar::{
    is_absorbing, is_monotone, polar_contains, polar_membership_via_iar, polar_of_sample, PolarVerdict,
};
pub use region::{sample_region, Region};
pub use subderivative::{
    clarke_directional, lower_dini, mean_value_witness, ClarkeParams, LiminfScheme, SubderivEstimate,
};
pub use subdifferential::{
    cdd_inequality_check, clarke_subdiff_contains, convex_subdiff_contains, epsilon_enlargement,
    sample_subdiff_graph, EnlargementParams, MembershipVerdict,
};
pub use suite::{explain, run_suite, Report, RunConfig, SuiteKind};
pub use verdict::{Agreement, Verdict, Witness};
pub use vector::Vector;
