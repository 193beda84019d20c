//! Lower Dini subderivative, Clarke directional derivative and the mean
//! value witness search.
//!
//! Step sizes in a [`LiminfScheme`] are displacement lengths: along a
//! direction `d` the parameter actually used is `t / ||d||`. This is a
//! reparametrisation of the same `t -> 0` limit and makes the estimates
//! exactly positively homogeneous for power-of-two scalings of `d`.

use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::extreal::ExtReal;
use crate::oracle::FunctionOracle;
use crate::region::linspace;
use crate::vector::{axpy_into, norm, Vector};
use crate::verdict::DEFAULT_TOL;

/// Geometric step grid `t0 * ratio^i`, `i < steps`, of which the smallest
/// `ceil(tail_fraction * steps)` steps form the tail window.
#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct LiminfScheme {
    pub t0: f64,
    pub ratio: f64,
    pub steps: usize,
    pub tail_fraction: f64,
}

impl Default for LiminfScheme {
    fn default() -> Self {
        LiminfScheme { t0: 0.1, ratio: 0.5, steps: 20, tail_fraction: 0.25 }
    }
}

/// Smallest admissible step.
pub const MIN_STEP: f64 = 1e-12;

impl LiminfScheme {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidScheme(m));
        if !(self.t0.is_finite() && self.t0 > 0.0) {
            return bad(format!("t0 = {} must be positive", self.t0));
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return bad(format!("ratio = {} must lie in (0, 1)", self.ratio));
        }
        if self.steps == 0 {
            return bad("steps must be positive".into());
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            return bad(format!("tail_fraction = {} must lie in (0, 1]", self.tail_fraction));
        }
        let smallest = self.t0 * self.ratio.powi(self.steps as i32 - 1);
        if smallest < MIN_STEP {
            return bad(format!("smallest step {smallest:e} is below {MIN_STEP:e}"));
        }
        Ok(())
    }

    pub fn tail_len(&self) -> usize {
        ((self.steps as f64 * self.tail_fraction).ceil() as usize).clamp(1, self.steps)
    }

    /// The tail window, largest step first.
    pub fn tail(&self) -> Vec<f64> {
        let start = self.steps - self.tail_len();
        (start..self.steps).map(|i| self.t0 * self.ratio.powi(i as i32)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubderivEstimate {
    pub value: ExtReal,
    /// Smallest difference quotient over the tail window.
    pub low: ExtReal,
    /// Largest difference quotient over the tail window.
    pub high: ExtReal,
    pub scheme_used: LiminfScheme,
}

impl SubderivEstimate {
    fn constant(v: ExtReal, scheme: &LiminfScheme) -> Self {
        SubderivEstimate { value: v, low: v, high: v, scheme_used: scheme.clone() }
    }
}

fn check_inputs(f: &FunctionOracle, xbar: &Vector, d: &Vector, scheme: &LiminfScheme) -> Result<f64> {
    check_dim(f.dim(), xbar.dim())?;
    check_dim(f.dim(), d.dim())?;
    scheme.validate()?;
    f.finite_at(xbar)
}

/// Estimates `f'(xbar; d) = liminf_{t -> 0+} (f(xbar + t d) - f(xbar)) / t`
/// by the minimum quotient over the tail window.
pub fn lower_dini(f: &FunctionOracle, xbar: &Vector, d: &Vector, scheme: &LiminfScheme) -> Result<SubderivEstimate> {
    let fx = check_inputs(f, xbar, d, scheme)?;
    if d.is_zero() {
        return Ok(SubderivEstimate::constant(ExtReal::ZERO, scheme));
    }
    let len = d.norm();
    let mut buf = Vec::with_capacity(f.dim());
    let mut low = ExtReal::PosInf;
    let mut high: Option<ExtReal> = None;
    for t in scheme.tail() {
        let s = t / len;
        axpy_into(&mut buf, xbar, s, d);
        let q = f.eval(&buf).quotient(fx, s);
        low = low.min(q);
        high = Some(high.map_or(q, |h| h.max(q)));
    }
    Ok(SubderivEstimate { value: low, low, high: high.unwrap_or(low), scheme_used: scheme.clone() })
}

/// Discretisation parameters for the Clarke directional derivative.
#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct ClarkeParams {
    pub scheme: LiminfScheme,
    /// Radii of the direction balls `d + delta B`; the outer supremum runs over these.
    pub deltas: Vec<f64>,
    /// Grid points per axis of the base-point neighbourhood.
    pub nbhd_resolution: usize,
    /// Neighbourhood radius at step `t` is `nbhd_factor * t`; the same
    /// radius bounds `|f(x) - f(xbar)|`.
    pub nbhd_factor: f64,
}

impl Default for ClarkeParams {
    fn default() -> Self {
        ClarkeParams {
            scheme: LiminfScheme::default(),
            deltas: vec![1e-2, 1e-4, 1e-6, 1e-8],
            nbhd_resolution: 9,
            nbhd_factor: 2.0,
        }
    }
}

impl ClarkeParams {
    pub fn validate(&self) -> Result<()> {
        self.scheme.validate()?;
        if self.deltas.is_empty() || self.deltas.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(Error::InvalidParameter("deltas must be a nonempty list of positive reals".into()));
        }
        if self.deltas.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidParameter("deltas must be strictly decreasing".into()));
        }
        if self.nbhd_resolution < 2 {
            return Err(Error::InvalidParameter("nbhd_resolution must be at least 2".into()));
        }
        if !(self.nbhd_factor > 0.0) {
            return Err(Error::InvalidParameter("nbhd_factor must be positive".into()));
        }
        Ok(())
    }
}

/// Offsets of the unit-ball neighbourhood grid, centre included when the
/// resolution is odd.
fn unit_ball_grid(dim: usize, resolution: usize) -> Vec<Vec<f64>> {
    let axis = linspace(-1.0, 1.0, resolution);
    let mut pts: Vec<Vec<f64>> = vec![Vec::new()];
    for _ in 0..dim {
        pts = pts
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    pts.retain(|p| norm(p) <= 1.0);
    pts
}

/// Estimates the Clarke directional derivative
/// `sup_delta limsup_{t -> 0+, x ->_f xbar} inf_{d' in d + delta B} (f(x + t d') - f(x)) / t`.
///
/// For each `delta` and each tail step `t`, the base point ranges over a grid
/// of the ball of radius `nbhd_factor * t` around `xbar`, restricted to
/// `|f(x) - f(xbar)| <= nbhd_factor * t`; the inner infimum runs over `d`
/// and its `2n` axis perturbations of size `delta`. The limsup is the
/// largest level value over the tail, and the outer sup is the largest
/// value over `deltas`.
pub fn clarke_directional(
    f: &FunctionOracle,
    xbar: &Vector,
    d: &Vector,
    params: &ClarkeParams,
) -> Result<SubderivEstimate> {
    let fx = check_inputs(f, xbar, d, &params.scheme)?;
    params.validate()?;
    if d.is_zero() {
        return Ok(SubderivEstimate::constant(ExtReal::ZERO, &params.scheme));
    }
    let n = f.dim();
    let len = d.norm();
    let offsets = unit_ball_grid(n, params.nbhd_resolution);
    let tail = params.scheme.tail();
    let mut best: Option<(ExtReal, ExtReal, ExtReal)> = None;
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for &delta in &params.deltas {
        let mut dirs: Vec<Vec<f64>> = vec![d.to_vec()];
        for i in 0..n {
            for sgn in [1.0, -1.0] {
                let mut p = d.to_vec();
                p[i] += sgn * delta;
                dirs.push(p);
            }
        }
        let mut level_low = ExtReal::PosInf;
        let mut level_high: Option<ExtReal> = None;
        for &t in &tail {
            let s = t / len;
            let r = params.nbhd_factor * t;
            let mut level: Option<ExtReal> = None;
            for u in &offsets {
                axpy_into(&mut x, xbar, r, u);
                let Some(fxx) = f.eval(&x).as_finite() else { continue };
                if (fxx - fx).abs() > r {
                    continue;
                }
                let inner = dirs
                    .iter()
                    .map(|dp| {
                        axpy_into(&mut y, &x, s, dp);
                        f.eval(&y).quotient(fxx, s)
                    })
                    .min()
                    .expect("direction set is nonempty");
                level = Some(level.map_or(inner, |l| l.max(inner)));
            }
            // the centre always qualifies, so `level` is set
            let level = level.expect("xbar belongs to its own neighbourhood");
            level_low = level_low.min(level);
            level_high = Some(level_high.map_or(level, |h| h.max(level)));
        }
        let high = level_high.expect("tail is nonempty");
        if best.is_none_or(|(v, _, _)| high > v) {
            best = Some((high, level_low, high));
        }
    }
    let (value, low, high) = best.expect("deltas are nonempty");
    Ok(SubderivEstimate { value, low, high, scheme_used: params.scheme.clone() })
}

/// Searches `[x, xbar[` for `x0` with `f'(x0; xbar - x) >= lambda - tol`.
///
/// Scans `ray_resolution` equally spaced points and returns the first
/// admissible one; otherwise refines once around the best candidate.
pub fn mean_value_witness(
    f: &FunctionOracle,
    x: &Vector,
    xbar: &Vector,
    lambda: f64,
    scheme: &LiminfScheme,
    ray_resolution: usize,
) -> Result<Vector> {
    check_dim(f.dim(), x.dim())?;
    check_dim(f.dim(), xbar.dim())?;
    let fx = f.finite_at(x)?;
    if ray_resolution < 2 {
        return Err(Error::InvalidParameter("ray_resolution must be at least 2".into()));
    }
    if !lambda.is_finite() || !ExtReal::finite(lambda).le_tol(f.eval(xbar).sub_finite(fx), 0.0) {
        return Err(Error::InvalidParameter(format!("lambda = {lambda} exceeds f(xbar) - f(x)")));
    }
    if x == xbar {
        return Err(Error::InvalidParameter("the segment [x, xbar[ is empty".into()));
    }
    let d = xbar.sub(x);
    let target = ExtReal::finite(lambda);
    let scan = |params: &[f64], best: &mut Option<(f64, ExtReal)>| -> Result<Option<Vector>> {
        for &s in params {
            let x0 = x.axpy(s, &d);
            if !f.eval(&x0).is_finite() {
                continue;
            }
            let v = lower_dini(f, &x0, &d, scheme)?.value;
            if target.le_tol(v, DEFAULT_TOL) {
                return Ok(Some(x0));
            }
            if best.is_none_or(|(_, b)| v > b) {
                *best = Some((s, v));
            }
        }
        Ok(None)
    };
    let mut best: Option<(f64, ExtReal)> = None;
    let step = 1.0 / ray_resolution as f64;
    let coarse: Vec<f64> = (0..ray_resolution).map(|k| k as f64 * step).collect();
    if let Some(w) = scan(&coarse, &mut best)? {
        return Ok(w);
    }
    let (sb, _) = best.expect("s = 0 lies in the domain");
    let lo = (sb - step).max(0.0);
    let hi = (sb + step).min(1.0);
    let fine: Vec<f64> = linspace(lo, hi, ray_resolution + 1)
        .into_iter()
        .filter(|&s| s < 1.0)
        .collect();
    if let Some(w) = scan(&fine, &mut best)? {
        return Ok(w);
    }
    let (sb, vb) = best.expect("s = 0 lies in the domain");
    Err(Error::NoWitness { best: x.axpy(sb, &d), value: vb })
}
