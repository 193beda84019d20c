use serde::Serialize;

use crate::extreal::serde_f64;
use crate::vector::Vector;

/// Comparison tolerance used wherever a real is compared to 0.
pub const DEFAULT_TOL: f64 = 1e-6;
/// Tolerance for monotonicity products over exactly representable samples.
pub const EXACT_TOL: f64 = 1e-9;
/// Residual band inside which two discretized routes may legitimately disagree.
pub const DEFAULT_BAND: f64 = 1e-3;
/// Band on `min_product` for the two polar-membership routes.
pub const POLAR_BAND: f64 = 1e-2;

/// What explains a verdict: the point, direction, pair or parameter that
/// achieved the residual.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Point { x: Vector },
    Direction { d: Vector },
    Pair { x: Vector, xstar: Vector },
    TwoPairs { first: (Vector, Vector), second: (Vector, Vector) },
    Ray { y: Vector, t: f64 },
    Epsilon { epsilon: f64 },
}

/// Boolean outcome, the residual that decided it, and a witness.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub holds: bool,
    #[serde(serialize_with = "serde_f64::serialize")]
    pub residual: f64,
    pub witness: Option<Witness>,
    /// Set when a covector search hit the truncation box.
    pub truncated: bool,
}

impl Verdict {
    pub fn new(holds: bool, residual: f64, witness: Option<Witness>) -> Self {
        Verdict { holds, residual, witness, truncated: false }
    }
}

/// Outcome of comparing two routes that should agree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum Agreement {
    Agree,
    /// The routes disagree, but only by a residual inside the band.
    Indeterminate,
    /// The routes disagree by a clear margin.
    Disagree,
}

/// Classifies two boolean verdicts. When they differ, `offending_residual`
/// is the residual of the side that reported a violation; the disagreement
/// is hard only if it exceeds `band`.
pub fn classify(a: bool, b: bool, offending_residual: f64, band: f64) -> Agreement {
    if a == b {
        Agreement::Agree
    } else if offending_residual.abs() <= band {
        Agreement::Indeterminate
    } else {
        Agreement::Disagree
    }
}
