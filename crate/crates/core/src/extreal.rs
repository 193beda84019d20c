//! Extended reals on `]-inf, +inf]`.
//!
//! Every function in this crate maps into this set. `-inf` is not
//! representable; `+inf` absorbs under addition and dominates the order.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Copy, Debug)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    /// Lifts an `f64`. Returns `None` for NaN and `-inf`.
    pub fn new(x: f64) -> Option<Self> {
        if x.is_nan() || x == f64::NEG_INFINITY {
            None
        } else if x == f64::INFINITY {
            Some(ExtReal::PosInf)
        } else {
            Some(ExtReal::Finite(x))
        }
    }

    /// Lifts a finite real. Panics on NaN or infinities.
    pub fn finite(x: f64) -> Self {
        assert!(x.is_finite(), "ExtReal::finite called with {x}");
        ExtReal::Finite(x)
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn is_inf(self) -> bool {
        matches!(self, ExtReal::PosInf)
    }

    pub fn as_finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            ExtReal::PosInf => None,
        }
    }

    /// `+inf` maps to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(x) => x,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    /// `self - c` for a finite `c`; `+inf - c = +inf`.
    pub fn sub_finite(self, c: f64) -> Self {
        match self {
            ExtReal::Finite(x) => ExtReal::Finite(x - c),
            ExtReal::PosInf => ExtReal::PosInf,
        }
    }

    /// Multiplication by a strictly positive finite scalar.
    pub fn scale_pos(self, s: f64) -> Self {
        debug_assert!(s > 0.0 && s.is_finite());
        match self {
            ExtReal::Finite(x) => ExtReal::Finite(x * s),
            ExtReal::PosInf => ExtReal::PosInf,
        }
    }

    /// Division by a strictly positive finite scalar.
    pub fn div_pos(self, s: f64) -> Self {
        debug_assert!(s > 0.0 && s.is_finite());
        match self {
            ExtReal::Finite(x) => ExtReal::Finite(x / s),
            ExtReal::PosInf => ExtReal::PosInf,
        }
    }

    /// Difference quotient `(self - base) / t` with `base` finite and `t > 0`.
    pub fn quotient(self, base: f64, t: f64) -> Self {
        self.sub_finite(base).div_pos(t)
    }

    /// `self <= other + tol`.
    pub fn le_tol(self, other: ExtReal, tol: f64) -> bool {
        match (self, other) {
            (_, ExtReal::PosInf) => true,
            (ExtReal::PosInf, ExtReal::Finite(_)) => false,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a <= b + tol,
        }
    }

    pub fn abs_diff(self, other: ExtReal) -> Option<f64> {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => Some((a - b).abs()),
            (ExtReal::PosInf, ExtReal::PosInf) => Some(0.0),
            _ => None,
        }
    }
}

impl From<f64> for ExtReal {
    /// Panics on NaN and `-inf`.
    fn from(x: f64) -> Self {
        ExtReal::new(x).unwrap_or_else(|| panic!("{x} is not in ]-inf, +inf]"))
    }
}

impl PartialEq for ExtReal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtReal::PosInf, ExtReal::PosInf) => Ordering::Equal,
            (ExtReal::PosInf, _) => Ordering::Greater,
            (_, ExtReal::PosInf) => Ordering::Less,
            // -0.0 and 0.0 compare equal; NaN is excluded by construction.
            (ExtReal::Finite(a), ExtReal::Finite(b)) => {
                a.partial_cmp(b).unwrap_or_else(|| a.total_cmp(b))
            }
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::PosInf,
        }
    }
}

impl Add<f64> for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: f64) -> ExtReal {
        debug_assert!(rhs.is_finite());
        self.sub_finite(-rhs)
    }
}

/// Negation is only defined on finite values; `-(+inf)` would leave the set.
impl Neg for ExtReal {
    type Output = Option<ExtReal>;
    fn neg(self) -> Option<ExtReal> {
        self.as_finite().map(|x| ExtReal::Finite(-x))
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::PosInf => f.write_str("+inf"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(x) => s.serialize_f64(*x),
            ExtReal::PosInf => s.serialize_str("+inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => ExtReal::new(x).ok_or_else(|| serde::de::Error::custom("not an extended real")),
            Repr::Str(s) if s == "+inf" || s == "inf" => Ok(ExtReal::PosInf),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("bad extended real `{s}`"))),
        }
    }
}

/// Serde helper for plain `f64` fields that may hold `±inf`.
pub mod serde_f64 {
    use serde::Serializer;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if *x > 0.0 {
            s.serialize_str("+inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinity_absorbs_addition() {
        assert_eq!(ExtReal::finite(3.0) + ExtReal::PosInf, ExtReal::PosInf);
        assert_eq!(ExtReal::PosInf + -7.5, ExtReal::PosInf);
        assert_eq!(ExtReal::finite(1.0) + ExtReal::finite(2.0), ExtReal::finite(3.0));
    }

    #[test]
    fn rejects_nan_and_negative_infinity() {
        assert!(ExtReal::new(f64::NAN).is_none());
        assert!(ExtReal::new(f64::NEG_INFINITY).is_none());
        assert_eq!(ExtReal::new(f64::INFINITY), Some(ExtReal::PosInf));
    }

    #[test]
    fn quotient_keeps_infinity() {
        assert_eq!(ExtReal::PosInf.quotient(2.0, 1e-6), ExtReal::PosInf);
        assert_eq!(ExtReal::finite(3.0).quotient(1.0, 0.5), ExtReal::finite(4.0));
    }

    #[test]
    fn json_round_trip() {
        let v = vec![ExtReal::finite(-1.5), ExtReal::PosInf];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"[-1.5,"+inf"]"#);
        let back: Vec<ExtReal> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }

    proptest::proptest! {
        #[test]
        fn order_is_total_with_inf_maximum(a in -1e6f64..1e6, b in -1e6f64..1e6, ia: bool, ib: bool) {
            let x = if ia { ExtReal::PosInf } else { ExtReal::finite(a) };
            let y = if ib { ExtReal::PosInf } else { ExtReal::finite(b) };
            let n = [x < y, x == y, x > y].iter().filter(|&&c| c).count();
            proptest::prop_assert_eq!(n, 1);
            proptest::prop_assert!(x <= ExtReal::PosInf);
        }
    }
}
