//! Evaluable proper lsc functions on R^n and their exact side-oracles.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::extreal::ExtReal;
use crate::region::Region;
use crate::vector::{dot, sphere_directions, Vector};

pub type EvalFn = Arc<dyn Fn(&[f64]) -> ExtReal + Send + Sync>;
/// `(x, d) -> f'(x; d)`, meaningful for `x` in the domain.
pub type SubderivFn = Arc<dyn Fn(&[f64], &[f64]) -> ExtReal + Send + Sync>;
pub type SubdiffFn = Arc<dyn Fn(&[f64]) -> SubdiffSet + Send + Sync>;

/// Closed convex set of covectors, as returned by exact subdifferential oracles.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SubdiffSet {
    Empty,
    /// 1-D interval; either end may be infinite.
    Interval { lo: f64, hi: f64 },
    /// Convex hull of a finite vertex list. A singleton is a one-vertex polytope.
    Polytope { vertices: Vec<Vector> },
    Ball { center: Vector, radius: f64 },
}

/// How to turn a covector set into finitely many representatives.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CovectorSampling {
    /// Unbounded sets are clipped to `[-half_width, half_width]^n`.
    pub half_width: f64,
    /// Optional extra fill spacing inside the set.
    pub fill: Option<f64>,
    /// Boundary directions used for balls.
    pub sphere_resolution: usize,
}

impl Default for CovectorSampling {
    fn default() -> Self {
        CovectorSampling { half_width: 10.0, fill: None, sphere_resolution: 16 }
    }
}

/// A representative covector and whether it was produced by clipping an
/// unbounded set to the truncation box.
#[derive(Clone, Debug, PartialEq)]
pub struct Representative {
    pub covector: Vector,
    pub clipped: bool,
}

impl SubdiffSet {
    pub fn singleton(v: Vector) -> Self {
        SubdiffSet::Polytope { vertices: vec![v] }
    }

    pub fn segment(a: Vector, b: Vector) -> Self {
        SubdiffSet::Polytope { vertices: vec![a, b] }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, SubdiffSet::Empty)
    }

    pub fn is_bounded(&self) -> bool {
        match self {
            SubdiffSet::Interval { lo, hi } => lo.is_finite() && hi.is_finite(),
            _ => true,
        }
    }

    /// Shift rule helper: the set `self - xstar`.
    pub fn translate(&self, xstar: &Vector) -> SubdiffSet {
        match self {
            SubdiffSet::Empty => SubdiffSet::Empty,
            SubdiffSet::Interval { lo, hi } => SubdiffSet::Interval { lo: lo - xstar[0], hi: hi - xstar[0] },
            SubdiffSet::Polytope { vertices } => SubdiffSet::Polytope {
                vertices: vertices.iter().map(|v| v.sub(xstar)).collect(),
            },
            SubdiffSet::Ball { center, radius } => SubdiffSet::Ball { center: center.sub(xstar), radius: *radius },
        }
    }

    /// Support function `sup { <v, d> : v in self }`; `None` when empty.
    pub fn support(&self, d: &[f64]) -> Option<ExtReal> {
        match self {
            SubdiffSet::Empty => None,
            SubdiffSet::Interval { lo, hi } => {
                let d = d[0];
                let v = if d > 0.0 {
                    hi * d
                } else if d < 0.0 {
                    lo * d
                } else {
                    0.0
                };
                ExtReal::new(v)
            }
            SubdiffSet::Polytope { vertices } => vertices
                .iter()
                .map(|v| ExtReal::finite(v.dot(d)))
                .max(),
            SubdiffSet::Ball { center, radius } => {
                Some(ExtReal::finite(center.dot(d) + radius * dot(d, d).sqrt()))
            }
        }
    }

    /// Exact membership up to `tol` (Euclidean distance to the set).
    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        match self {
            SubdiffSet::Empty => false,
            SubdiffSet::Interval { lo, hi } => *lo - tol <= v[0] && v[0] <= *hi + tol,
            SubdiffSet::Ball { center, radius } => {
                let d: Vec<f64> = v.iter().zip(center.iter()).map(|(a, b)| a - b).collect();
                dot(&d, &d).sqrt() <= radius + tol
            }
            SubdiffSet::Polytope { vertices } => polytope_distance(vertices, v) <= tol,
        }
    }

    /// Finite representatives: endpoints and midpoint of intervals, vertices
    /// of polytopes, centre plus boundary directions of balls, and optionally
    /// a fill grid of spacing `sampling.fill` inside the set.
    pub fn representatives(&self, sampling: &CovectorSampling) -> Vec<Representative> {
        let w = sampling.half_width;
        let mut out: Vec<Representative> = Vec::new();
        let mut push = |covector: Vector, clipped: bool| {
            if !out.iter().any(|r| r.covector == covector) {
                out.push(Representative { covector, clipped });
            }
        };
        match self {
            SubdiffSet::Empty => {}
            SubdiffSet::Interval { lo, hi } => {
                let (lo_c, lo_clip) = if lo.is_finite() { (*lo, false) } else { ((-w).min(*hi), true) };
                let (hi_c, hi_clip) = if hi.is_finite() { (*hi, false) } else { (w.max(lo_c), true) };
                push(Vector::scalar(lo_c), lo_clip);
                push(Vector::scalar(0.5 * (lo_c + hi_c)), false);
                push(Vector::scalar(hi_c), hi_clip);
                if let Some(h) = sampling.fill {
                    for v in fill_axis(lo_c, hi_c, h) {
                        push(Vector::scalar(v), false);
                    }
                }
            }
            SubdiffSet::Polytope { vertices } => {
                for v in vertices {
                    push(v.clone(), false);
                }
                if let (Some(h), true) = (sampling.fill, vertices.len() > 1) {
                    let dim = vertices[0].dim();
                    let lo: Vec<f64> = (0..dim).map(|i| vertices.iter().map(|v| v[i]).fold(f64::INFINITY, f64::min)).collect();
                    let hi: Vec<f64> = (0..dim).map(|i| vertices.iter().map(|v| v[i]).fold(f64::NEG_INFINITY, f64::max)).collect();
                    for p in box_fill(&lo, &hi, h) {
                        if polytope_distance(vertices, &p) <= 1e-12 {
                            push(Vector::new(p), false);
                        }
                    }
                }
            }
            SubdiffSet::Ball { center, radius } => {
                push(center.clone(), false);
                for d in sphere_directions(center.dim(), sampling.sphere_resolution) {
                    push(center.axpy(*radius, &d), false);
                }
                if let Some(h) = sampling.fill {
                    let lo: Vec<f64> = center.iter().map(|c| c - radius).collect();
                    let hi: Vec<f64> = center.iter().map(|c| c + radius).collect();
                    for p in box_fill(&lo, &hi, h) {
                        let v = Vector::new(p);
                        if v.dist(center) <= *radius {
                            push(v, false);
                        }
                    }
                }
            }
        }
        out
    }
}

/// Points `lo, lo+h, ...` up to `hi`, anchored on multiples of `h` so that
/// fills of neighbouring sets line up.
fn fill_axis(lo: f64, hi: f64, h: f64) -> Vec<f64> {
    let k0 = (lo / h).ceil() as i64;
    let k1 = (hi / h).floor() as i64;
    (k0..=k1).map(|k| k as f64 * h).collect()
}

fn box_fill(lo: &[f64], hi: &[f64], h: f64) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> = lo.iter().zip(hi).map(|(&a, &b)| fill_axis(a, b, h)).collect();
    let mut out = vec![Vec::new()];
    for ax in &axes {
        out = out
            .into_iter()
            .flat_map(|p| {
                ax.iter().map(move |&c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    out
}

/// Euclidean distance from `p` to the convex hull of `vertices`.
fn polytope_distance(vertices: &[Vector], p: &[f64]) -> f64 {
    match vertices.len() {
        0 => f64::INFINITY,
        1 => vertices[0].iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
        2 => segment_distance(&vertices[0], &vertices[1], p),
        _ if p.len() == 1 => {
            let lo = vertices.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
            let hi = vertices.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
            (lo - p[0]).max(p[0] - hi).max(0.0)
        }
        _ if p.len() == 2 => polygon_distance(vertices, p),
        _ => frank_wolfe_distance(vertices, p),
    }
}

fn segment_distance(a: &[f64], b: &[f64], p: &[f64]) -> f64 {
    let ab: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
    let ap: Vec<f64> = p.iter().zip(a).map(|(x, y)| x - y).collect();
    let len2 = dot(&ab, &ab);
    let s = if len2 == 0.0 { 0.0 } else { (dot(&ap, &ab) / len2).clamp(0.0, 1.0) };
    ap.iter().zip(&ab).map(|(u, v)| (u - s * v).powi(2)).sum::<f64>().sqrt()
}

fn cross(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Distance to a planar convex hull (monotone chain hull, then edge tests).
fn polygon_distance(vertices: &[Vector], p: &[f64]) -> f64 {
    let mut pts: Vec<[f64; 2]> = vertices.iter().map(|v| [v[0], v[1]]).collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return match pts.len() {
            1 => ((pts[0][0] - p[0]).powi(2) + (pts[0][1] - p[1]).powi(2)).sqrt(),
            _ => segment_distance(&pts[0], &pts[1], p),
        };
    }
    let mut hull: Vec<[f64; 2]> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for q in iter {
            while hull.len() >= start + 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], q) <= 0.0 {
                hull.pop();
            }
            hull.push(*q);
        }
        hull.pop();
    }
    if hull.len() < 3 {
        return segment_distance(&hull[0], &hull[hull.len() - 1], p);
    }
    let n = hull.len();
    let inside = (0..n).all(|i| cross(&hull[i], &hull[(i + 1) % n], p) >= 0.0);
    if inside {
        return 0.0;
    }
    (0..n)
        .map(|i| segment_distance(&hull[i], &hull[(i + 1) % n], p))
        .fold(f64::INFINITY, f64::min)
}

fn frank_wolfe_distance(vertices: &[Vector], p: &[f64]) -> f64 {
    let mut x: Vec<f64> = vertices[0].to_vec();
    for k in 0..5000 {
        let g: Vec<f64> = x.iter().zip(p).map(|(a, b)| a - b).collect();
        let s = vertices
            .iter()
            .min_by(|a, b| a.dot(&g).total_cmp(&b.dot(&g)))
            .expect("nonempty");
        let dir: Vec<f64> = s.iter().zip(&x).map(|(a, b)| a - b).collect();
        let dd = dot(&dir, &dir);
        if dd == 0.0 || -dot(&g, &dir) <= 1e-15 {
            break;
        }
        let step = (-dot(&g, &dir) / dd).clamp(0.0, 1.0);
        for (xi, di) in x.iter_mut().zip(&dir) {
            *xi += step * di;
        }
        if k > 0 && step == 0.0 {
            break;
        }
    }
    x.iter().zip(p).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

/// Descriptive metadata and the sampling profile used by verification suites.
#[derive(Clone, Debug, Serialize)]
pub struct OracleMeta {
    pub is_convex: bool,
    pub domain_description: String,
    /// Region on which suites quantify by default.
    pub default_region: Region,
    /// Box of candidate covectors for polar and absorption checks.
    pub covector_probe: Region,
    pub covector_resolution: usize,
    /// Points known to lie in the domain (properness witnesses).
    pub registered_points: Vec<Vector>,
}

/// A proper lower semicontinuous function `R^n -> ]-inf, +inf]`.
///
/// Lower semicontinuity is taken on trust from the constructor.
#[derive(Clone)]
pub struct FunctionOracle {
    id: String,
    dim: usize,
    eval: EvalFn,
    pub meta: OracleMeta,
    exact_subderivative: Option<SubderivFn>,
    exact_subdifferential: Option<SubdiffFn>,
}

impl fmt::Debug for FunctionOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionOracle")
            .field("id", &self.id)
            .field("dim", &self.dim)
            .field("meta", &self.meta)
            .field("exact_subderivative", &self.exact_subderivative.is_some())
            .field("exact_subdifferential", &self.exact_subdifferential.is_some())
            .finish()
    }
}

impl FunctionOracle {
    pub fn new<F>(id: impl Into<String>, dim: usize, eval: F) -> Self
    where
        F: Fn(&[f64]) -> ExtReal + Send + Sync + 'static,
    {
        let w = 2.0;
        FunctionOracle {
            id: id.into(),
            dim,
            eval: Arc::new(eval),
            meta: OracleMeta {
                is_convex: false,
                domain_description: "R^n".into(),
                default_region: Region::cube(dim, -w, w),
                covector_probe: Region::cube(dim, -w, w),
                covector_resolution: 17,
                registered_points: vec![Vector::zeros(dim)],
            },
            exact_subderivative: None,
            exact_subdifferential: None,
        }
    }

    pub fn convex(mut self, is_convex: bool) -> Self {
        self.meta.is_convex = is_convex;
        self
    }

    pub fn domain(mut self, description: impl Into<String>) -> Self {
        self.meta.domain_description = description.into();
        self
    }

    pub fn region(mut self, region: Region) -> Self {
        self.meta.default_region = region;
        self
    }

    pub fn covector_probe(mut self, probe: Region, resolution: usize) -> Self {
        self.meta.covector_probe = probe;
        self.meta.covector_resolution = resolution;
        self
    }

    pub fn registered_points(mut self, points: Vec<Vector>) -> Self {
        self.meta.registered_points = points;
        self
    }

    pub fn with_exact_subderivative<F>(mut self, f: F) -> Self
    where
        F: Fn(&[f64], &[f64]) -> ExtReal + Send + Sync + 'static,
    {
        self.exact_subderivative = Some(Arc::new(f));
        self
    }

    pub fn with_exact_subdifferential<F>(mut self, f: F) -> Self
    where
        F: Fn(&[f64]) -> SubdiffSet + Send + Sync + 'static,
    {
        self.exact_subdifferential = Some(Arc::new(f));
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Evaluates without a dimension check; callers guarantee `x.len() == dim`.
    #[inline]
    pub fn eval(&self, x: &[f64]) -> ExtReal {
        debug_assert_eq!(x.len(), self.dim);
        (self.eval)(x)
    }

    pub fn eval_checked(&self, x: &[f64]) -> Result<ExtReal> {
        check_dim(self.dim, x.len())?;
        Ok(self.eval(x))
    }

    /// `f(x)` when finite, else [`Error::OutsideDomain`].
    pub fn finite_at(&self, x: &Vector) -> Result<f64> {
        self.eval_checked(x)?
            .as_finite()
            .ok_or_else(|| Error::OutsideDomain(x.clone()))
    }

    pub fn has_exact_subderivative(&self) -> bool {
        self.exact_subderivative.is_some()
    }

    pub fn has_exact_subdifferential(&self) -> bool {
        self.exact_subdifferential.is_some()
    }

    pub fn exact_subderivative(&self, x: &[f64], d: &[f64]) -> Option<ExtReal> {
        self.exact_subderivative.as_ref().map(|g| g(x, d))
    }

    pub fn exact_subdifferential(&self, x: &[f64]) -> Option<SubdiffSet> {
        self.exact_subdifferential.as_ref().map(|g| g(x))
    }

    /// Properness: some registered point has a finite value.
    pub fn is_proper(&self) -> bool {
        self.meta.registered_points.iter().any(|p| self.eval(p).is_finite())
    }

    /// The perturbed function `y -> f(y) - <xstar, y>`, with side-oracles
    /// shifted accordingly.
    pub fn shifted(&self, xstar: &Vector) -> Result<FunctionOracle> {
        xstar.same_dim(self.dim)?;
        let base = self.eval.clone();
        let s = xstar.clone();
        let mut out = FunctionOracle {
            id: format!("{}-<{},.>", self.id, xstar),
            dim: self.dim,
            eval: Arc::new(move |y: &[f64]| base(y).sub_finite(s.dot(y))),
            meta: self.meta.clone(),
            exact_subderivative: None,
            exact_subdifferential: None,
        };
        // an affine perturbation does not change convexity
        if let Some(g) = self.exact_subderivative.clone() {
            let s = xstar.clone();
            out.exact_subderivative = Some(Arc::new(move |x: &[f64], d: &[f64]| g(x, d).sub_finite(s.dot(d))));
        }
        if let Some(g) = self.exact_subdifferential.clone() {
            let s = xstar.clone();
            out.exact_subdifferential = Some(Arc::new(move |x: &[f64]| g(x).translate(&s)));
        }
        Ok(out)
    }
}

/// `f(y) - <xstar, y>`, with `+inf` preserved.
pub fn eval_shifted(f: &FunctionOracle, xstar: &Vector, y: &Vector) -> Result<ExtReal> {
    xstar.same_dim(f.dim())?;
    let v = f.eval_checked(y)?;
    Ok(v.sub_finite(xstar.dot(y)))
}

/// Uniform grid on the candidate covector box of `f`.
pub fn covector_candidates(f: &FunctionOracle) -> Result<Vec<Vector>> {
    f.meta.covector_probe.grid(f.meta.covector_resolution)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> FunctionOracle {
        FunctionOracle::new("square", 1, |x| ExtReal::finite(x[0] * x[0]))
    }

    fn ind_origin() -> FunctionOracle {
        FunctionOracle::new("ind_origin", 1, |x| if x[0] == 0.0 { ExtReal::ZERO } else { ExtReal::PosInf })
    }

    #[test]
    fn shifted_evaluation() {
        let f = square();
        let v = |s: f64, y: f64| eval_shifted(&f, &Vector::scalar(s), &Vector::scalar(y)).unwrap();
        assert_eq!(v(0.0, 3.0), ExtReal::finite(9.0));
        assert_eq!(v(2.0, 1.0), ExtReal::finite(-1.0));
        let g = ind_origin();
        assert_eq!(eval_shifted(&g, &Vector::scalar(5.0), &Vector::scalar(1.0)).unwrap(), ExtReal::PosInf);
    }

    #[test]
    fn shifted_rejects_dimension_mismatch() {
        let f = square();
        let err = eval_shifted(&f, &Vector::new(vec![1.0, 2.0]), &Vector::scalar(1.0));
        assert!(matches!(err, Err(Error::DimensionMismatch { expected: 1, found: 2 })));
        assert!(eval_shifted(&f, &Vector::scalar(1.0), &Vector::new(vec![0.0, 0.0])).is_err());
    }

    #[test]
    fn interval_representatives_clip_unbounded_ends() {
        let s = SubdiffSet::Interval { lo: f64::NEG_INFINITY, hi: 0.0 };
        let reps = s.representatives(&CovectorSampling::default());
        let vals: Vec<(f64, bool)> = reps.iter().map(|r| (r.covector[0], r.clipped)).collect();
        assert_eq!(vals, vec![(-10.0, true), (-5.0, false), (0.0, false)]);
    }

    #[test]
    fn interval_fill_is_grid_aligned() {
        let s = SubdiffSet::Interval { lo: -1.0, hi: 1.0 };
        let sampling = CovectorSampling { fill: Some(0.5), ..Default::default() };
        let mut vals: Vec<f64> = s.representatives(&sampling).iter().map(|r| r.covector[0]).collect();
        vals.sort_by(f64::total_cmp);
        assert_eq!(vals, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn polytope_membership() {
        let seg = SubdiffSet::segment(Vector::new(vec![2.0, -1.0]), Vector::new(vec![2.0, 1.0]));
        assert!(seg.contains(&[2.0, 0.3], 1e-12));
        assert!(!seg.contains(&[2.1, 0.3], 1e-12));
        let tri = SubdiffSet::Polytope {
            vertices: vec![Vector::new(vec![0.0, 0.0]), Vector::new(vec![1.0, 0.0]), Vector::new(vec![0.0, 1.0])],
        };
        assert!(tri.contains(&[0.25, 0.25], 0.0));
        assert!(!tri.contains(&[0.75, 0.75], 1e-9));
        let tet = SubdiffSet::Polytope {
            vertices: vec![
                Vector::new(vec![0.0, 0.0, 0.0]),
                Vector::new(vec![1.0, 0.0, 0.0]),
                Vector::new(vec![0.0, 1.0, 0.0]),
                Vector::new(vec![0.0, 0.0, 1.0]),
            ],
        };
        assert!(tet.contains(&[0.2, 0.2, 0.2], 1e-6));
        assert!(!tet.contains(&[0.6, 0.6, 0.6], 1e-6));
    }

    #[test]
    fn support_functions() {
        let ball = SubdiffSet::Ball { center: Vector::zeros(2), radius: 1.0 };
        assert_eq!(ball.support(&[3.0, 4.0]), Some(ExtReal::finite(5.0)));
        let half = SubdiffSet::Interval { lo: f64::NEG_INFINITY, hi: 0.0 };
        assert_eq!(half.support(&[-1.0]), Some(ExtReal::PosInf));
        assert_eq!(half.support(&[1.0]), Some(ExtReal::finite(0.0)));
        assert_eq!(SubdiffSet::Empty.support(&[1.0]), None);
    }
}
