//! Curated test functions with exact ground truth.
//!
//! | id             | f                         | convex |
//! |----------------|---------------------------|--------|
//! | `abs`          | `|x|`                     | yes    |
//! | `square`       | `x^2`                     | yes    |
//! | `neg_abs`      | `-|x|`                    | no     |
//! | `ind_halfline` | indicator of `[0, inf)`   | yes    |
//! | `ind_origin`   | indicator of `{0}`        | yes    |
//! | `relu`         | `max(x, 0)`               | yes    |
//! | `twowell`      | `min(|x|, |x-2| + 1)`     | no     |
//! | `norm2d`       | `||x||` on R^2            | yes    |
//! | `mixed2d`      | `x1^2 + |x2|` on R^2      | yes    |

use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::oracle::{FunctionOracle, SubdiffSet};
use crate::region::Region;
use crate::vector::{norm, Vector};

pub const FUNCTION_IDS: [&str; 9] = [
    "abs",
    "square",
    "neg_abs",
    "ind_halfline",
    "ind_origin",
    "relu",
    "twowell",
    "norm2d",
    "mixed2d",
];

fn fin(x: f64) -> ExtReal {
    ExtReal::finite(x)
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn point(x: f64) -> SubdiffSet {
    SubdiffSet::singleton(Vector::scalar(x))
}

fn interval(lo: f64, hi: f64) -> SubdiffSet {
    SubdiffSet::Interval { lo, hi }
}

fn line(lo: f64, hi: f64) -> Region {
    Region::interval(lo, hi)
}

pub fn abs() -> FunctionOracle {
    FunctionOracle::new("abs", 1, |x| fin(x[0].abs()))
        .convex(true)
        .domain("R")
        .region(line(-2.0, 2.0))
        .covector_probe(line(-2.0, 2.0), 17)
        .with_exact_subderivative(|x, d| fin(if x[0] == 0.0 { d[0].abs() } else { sign(x[0]) * d[0] }))
        .with_exact_subdifferential(|x| if x[0] == 0.0 { interval(-1.0, 1.0) } else { point(sign(x[0])) })
}

pub fn square() -> FunctionOracle {
    FunctionOracle::new("square", 1, |x| fin(x[0] * x[0]))
        .convex(true)
        .domain("R")
        .region(line(-2.0, 2.0))
        .covector_probe(line(-4.0, 4.0), 17)
        .with_exact_subderivative(|x, d| fin(2.0 * x[0] * d[0]))
        .with_exact_subdifferential(|x| point(2.0 * x[0]))
}

pub fn neg_abs() -> FunctionOracle {
    FunctionOracle::new("neg_abs", 1, |x| fin(-x[0].abs()))
        .convex(false)
        .domain("R")
        .region(line(-2.0, 2.0))
        .covector_probe(line(-2.0, 2.0), 17)
        .with_exact_subderivative(|x, d| fin(if x[0] == 0.0 { -d[0].abs() } else { -sign(x[0]) * d[0] }))
}

pub fn ind_halfline() -> FunctionOracle {
    FunctionOracle::new("ind_halfline", 1, |x| if x[0] >= 0.0 { ExtReal::ZERO } else { ExtReal::PosInf })
        .convex(true)
        .domain("[0, inf)")
        .region(line(-2.0, 2.0))
        .covector_probe(line(-2.0, 2.0), 17)
        .with_exact_subderivative(|x, d| {
            if x[0] > 0.0 || d[0] >= 0.0 {
                ExtReal::ZERO
            } else {
                ExtReal::PosInf
            }
        })
        .with_exact_subdifferential(|x| {
            if x[0] > 0.0 {
                point(0.0)
            } else if x[0] == 0.0 {
                interval(f64::NEG_INFINITY, 0.0)
            } else {
                SubdiffSet::Empty
            }
        })
}

pub fn ind_origin() -> FunctionOracle {
    FunctionOracle::new("ind_origin", 1, |x| if x[0] == 0.0 { ExtReal::ZERO } else { ExtReal::PosInf })
        .convex(true)
        .domain("{0}")
        .region(line(-2.0, 2.0))
        .covector_probe(line(-2.0, 2.0), 17)
        .with_exact_subderivative(|_, d| if d[0] == 0.0 { ExtReal::ZERO } else { ExtReal::PosInf })
        .with_exact_subdifferential(|x| {
            if x[0] == 0.0 {
                interval(f64::NEG_INFINITY, f64::INFINITY)
            } else {
                SubdiffSet::Empty
            }
        })
}

pub fn relu() -> FunctionOracle {
    FunctionOracle::new("relu", 1, |x| fin(x[0].max(0.0)))
        .convex(true)
        .domain("R")
        .region(line(-2.0, 2.0))
        .covector_probe(line(-2.0, 2.0), 17)
        .with_exact_subderivative(|x, d| {
            fin(if x[0] > 0.0 {
                d[0]
            } else if x[0] < 0.0 {
                0.0
            } else {
                d[0].max(0.0)
            })
        })
        .with_exact_subdifferential(|x| {
            if x[0] > 0.0 {
                point(1.0)
            } else if x[0] < 0.0 {
                point(0.0)
            } else {
                interval(0.0, 1.0)
            }
        })
}

/// Two local minima (0 and 2) joined by a concave kink at 1.5.
pub fn twowell() -> FunctionOracle {
    FunctionOracle::new("twowell", 1, |x| fin(x[0].abs().min((x[0] - 2.0).abs() + 1.0)))
        .convex(false)
        .domain("R")
        .region(line(-1.0, 3.0))
        .covector_probe(line(-2.0, 2.0), 17)
        .with_exact_subderivative(|x, d| {
            let (x, d) = (x[0], d[0]);
            fin(if x < 0.0 {
                -d
            } else if x == 0.0 {
                d.abs()
            } else if x < 1.5 {
                d
            } else if x == 1.5 {
                -d.abs()
            } else if x < 2.0 {
                -d
            } else if x == 2.0 {
                d.abs()
            } else {
                d
            })
        })
}

pub fn norm2d() -> FunctionOracle {
    FunctionOracle::new("norm2d", 2, |x| fin(norm(x)))
        .convex(true)
        .domain("R^2")
        .region(Region::cube(2, -2.0, 2.0))
        .covector_probe(Region::cube(2, -1.0, 1.0), 3)
        .with_exact_subderivative(|x, d| {
            let n = norm(x);
            fin(if n == 0.0 { norm(d) } else { (x[0] * d[0] + x[1] * d[1]) / n })
        })
        .with_exact_subdifferential(|x| {
            let n = norm(x);
            if n == 0.0 {
                SubdiffSet::Ball { center: Vector::zeros(2), radius: 1.0 }
            } else {
                SubdiffSet::singleton(Vector::new(vec![x[0] / n, x[1] / n]))
            }
        })
        .registered_points(vec![Vector::zeros(2)])
}

pub fn mixed2d() -> FunctionOracle {
    FunctionOracle::new("mixed2d", 2, |x| fin(x[0] * x[0] + x[1].abs()))
        .convex(true)
        .domain("R^2")
        .region(Region::cube(2, -2.0, 2.0))
        .covector_probe(Region::Box { lo: vec![-3.0, -1.0], hi: vec![3.0, 1.0] }, 7)
        .with_exact_subderivative(|x, d| {
            let kink = if x[1] == 0.0 { d[1].abs() } else { sign(x[1]) * d[1] };
            fin(2.0 * x[0] * d[0] + kink)
        })
        .with_exact_subdifferential(|x| {
            let g = 2.0 * x[0];
            if x[1] == 0.0 {
                SubdiffSet::segment(Vector::new(vec![g, -1.0]), Vector::new(vec![g, 1.0]))
            } else {
                SubdiffSet::singleton(Vector::new(vec![g, sign(x[1])]))
            }
        })
        .registered_points(vec![Vector::zeros(2)])
}

/// Every curated function, in the order of [`FUNCTION_IDS`].
pub fn test_library() -> Vec<FunctionOracle> {
    vec![abs(), square(), neg_abs(), ind_halfline(), ind_origin(), relu(), twowell(), norm2d(), mixed2d()]
}

pub fn lookup(id: &str) -> Result<FunctionOracle> {
    test_library()
        .into_iter()
        .find(|f| f.id() == id)
        .ok_or_else(|| Error::UnknownFunction(id.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::sphere_directions;

    #[test]
    fn ids_are_stable_and_complete() {
        let ids: Vec<String> = test_library().iter().map(|f| f.id().to_string()).collect();
        assert_eq!(ids, FUNCTION_IDS.iter().map(|s| s.to_string()).collect::<Vec<_>>());
        assert!(matches!(lookup("bogus"), Err(Error::UnknownFunction(_))));
    }

    #[test]
    fn library_entries_carry_required_oracles() {
        for f in test_library() {
            assert!(f.is_proper(), "{} must be proper", f.id());
            assert!(f.has_exact_subderivative(), "{} lacks exact subderivative", f.id());
            if f.meta.is_convex {
                assert!(f.has_exact_subdifferential(), "{} lacks exact subdifferential", f.id());
            }
        }
    }

    #[test]
    fn textbook_facts() {
        assert_eq!(abs().exact_subdifferential(&[0.0]), Some(interval(-1.0, 1.0)));
        assert!(!neg_abs().meta.is_convex);
        assert_eq!(ind_halfline().eval(&[-1.0]), ExtReal::PosInf);
        assert_eq!(twowell().eval(&[1.5]), fin(1.5));
        assert_eq!(twowell().eval(&[2.0]), fin(1.0));
    }

    fn test_grid(f: &FunctionOracle) -> Vec<Vector> {
        f.meta.default_region.grid(if f.dim() == 1 { 33 } else { 9 }).unwrap()
    }

    #[test]
    fn exact_subderivative_is_positively_homogeneous() {
        for f in test_library() {
            for x in test_grid(&f) {
                if !f.eval(&x).is_finite() {
                    continue;
                }
                for d in sphere_directions(f.dim(), 8) {
                    let base = f.exact_subderivative(&x, &d).unwrap();
                    for tau in [0.5, 2.0, 10.0] {
                        let scaled = f.exact_subderivative(&x, &d.scale(tau)).unwrap();
                        let want = base.scale_pos(tau);
                        let diff = scaled.abs_diff(want).expect("same infinity pattern");
                        assert!(diff <= 1e-12 * (1.0 + want.to_f64().abs()), "{} at {x} along {d}", f.id());
                    }
                }
            }
        }
    }

    /// Exact side-oracles agree with `eval`: one-sided difference quotients
    /// at a moderate step bracket the exact subderivative for these
    /// piecewise linear/quadratic functions.
    #[test]
    fn exact_oracles_match_eval() {
        let h = 1e-6;
        for f in test_library() {
            for x in test_grid(&f) {
                let Some(fx) = f.eval(&x).as_finite() else { continue };
                for d in sphere_directions(f.dim(), 8) {
                    let q = f.eval(&x.axpy(h, &d)).quotient(fx, h);
                    let exact = f.exact_subderivative(&x, &d).unwrap();
                    match exact.abs_diff(q) {
                        Some(e) => assert!(e < 1e-5, "{} at {x} along {d}: {q} vs {exact}", f.id()),
                        None => panic!("{} at {x} along {d}: {q} vs {exact}", f.id()),
                    }
                }
                if let Some(set) = f.exact_subdifferential(&x) {
                    // the support function of the convex subdifferential is f'(x; .)
                    for d in sphere_directions(f.dim(), 8) {
                        let s = set.support(&d).unwrap();
                        let exact = f.exact_subderivative(&x, &d).unwrap();
                        assert!(s.abs_diff(exact).is_some_and(|e| e < 1e-12), "{} at {x}", f.id());
                    }
                }
            }
        }
    }

    #[test]
    fn convex_entries_are_midpoint_convex() {
        for f in test_library().into_iter().filter(|f| f.meta.is_convex) {
            let grid = test_grid(&f);
            for a in &grid {
                for b in &grid {
                    let (Some(fa), Some(fb)) = (f.eval(a).as_finite(), f.eval(b).as_finite()) else { continue };
                    let mid = a.add(b).scale(0.5);
                    let fm = f.eval(&mid);
                    assert!(fm.le_tol(fin(0.5 * (fa + fb)), 1e-12), "{} at {a}, {b}", f.id());
                }
            }
        }
    }
}
