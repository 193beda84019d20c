//! Membership tests and graph sampling for the convex-analysis and Clarke
//! subdifferentials, the epsilon-enlargement, and the subderivative /
//! subdifferential inequality check.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::extreal::{serde_f64, ExtReal};
use crate::graph::{GraphMeta, GraphSample, GraphSource, SampledGraph};
use crate::oracle::{CovectorSampling, FunctionOracle};
use crate::region::Region;
use crate::subderivative::{clarke_directional, lower_dini, ClarkeParams};
use crate::vector::{dot, sphere_directions, Vector};
use crate::verdict::{Verdict, Witness, DEFAULT_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnlargementParams {
    pub epsilon: f64,
}

impl EnlargementParams {
    pub fn new(epsilon: f64) -> Result<Self> {
        if epsilon > 0.0 && epsilon.is_finite() {
            Ok(EnlargementParams { epsilon })
        } else {
            Err(Error::InvalidParameter(format!("epsilon = {epsilon} must be positive")))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MembershipVerdict {
    pub contains: bool,
    /// Worst violated margin; `<= tol` exactly when `contains`.
    #[serde(serialize_with = "serde_f64::serialize")]
    pub residual: f64,
    /// The probe point `y` (convex test) or direction `d` (Clarke test)
    /// achieving the residual.
    pub witness: Option<Vector>,
}

/// `xstar` belongs to the convex-analysis subdifferential at `xbar` iff
/// `<xstar, y - xbar> + f(xbar) <= f(y) + tol` for every probe-grid `y`.
pub fn convex_subdiff_contains(
    f: &FunctionOracle,
    xbar: &Vector,
    xstar: &Vector,
    probe: &Region,
    resolution: usize,
) -> Result<MembershipVerdict> {
    check_dim(f.dim(), xstar.dim())?;
    check_dim(f.dim(), probe.dim())?;
    let fx = f.finite_at(xbar)?;
    let mut residual = f64::NEG_INFINITY;
    let mut witness = None;
    for y in probe.grid(resolution)? {
        let Some(fy) = f.eval(&y).as_finite() else { continue };
        let gap = xstar.dot(&y.sub(xbar)) + fx - fy;
        if gap > residual {
            residual = gap;
            witness = Some(y);
        }
    }
    Ok(MembershipVerdict { contains: residual <= DEFAULT_TOL, residual, witness })
}

/// Estimated Clarke directional derivatives at `xbar` along `dirs`.
pub fn clarke_profile(
    f: &FunctionOracle,
    xbar: &Vector,
    dirs: &[Vector],
    params: &ClarkeParams,
) -> Result<Vec<ExtReal>> {
    dirs.iter()
        .map(|d| clarke_directional(f, xbar, d, params).map(|e| e.value))
        .collect()
}

fn clarke_residual(xstar: &[f64], dirs: &[Vector], profile: &[ExtReal]) -> (f64, Option<usize>) {
    let mut residual = f64::NEG_INFINITY;
    let mut arg = None;
    for (i, (d, up)) in dirs.iter().zip(profile).enumerate() {
        let Some(up) = up.as_finite() else { continue };
        let gap = dot(xstar, d) - up;
        if gap > residual {
            residual = gap;
            arg = Some(i);
        }
    }
    (residual, arg)
}

/// `xstar` belongs to the Clarke subdifferential at `xbar` iff
/// `<xstar, d> <= f^(xbar; d) + tol` for every unit `d` in a sphere grid of
/// at least `dir_resolution` directions (in 1-D the sphere is `{-1, 1}`).
pub fn clarke_subdiff_contains(
    f: &FunctionOracle,
    xbar: &Vector,
    xstar: &Vector,
    dir_resolution: usize,
    params: &ClarkeParams,
) -> Result<MembershipVerdict> {
    check_dim(f.dim(), xstar.dim())?;
    let dirs = sphere_directions(f.dim(), dir_resolution);
    let profile = clarke_profile(f, xbar, &dirs, params)?;
    let (residual, arg) = clarke_residual(xstar, &dirs, &profile);
    Ok(MembershipVerdict {
        contains: residual <= DEFAULT_TOL,
        residual,
        witness: arg.map(|i| dirs[i].clone()),
    })
}

/// Knobs for [`sample_subdiff_graph`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphOptions {
    pub covectors: CovectorSampling,
    pub clarke: ClarkeParams,
    /// Sphere directions for numerical Clarke membership.
    pub dir_resolution: usize,
    /// Spacing of the candidate covector grid in clarke-numeric mode.
    pub numeric_spacing: f64,
}

impl Default for GraphOptions {
    fn default() -> Self {
        GraphOptions {
            covectors: CovectorSampling::default(),
            clarke: ClarkeParams::default(),
            dir_resolution: 16,
            numeric_spacing: 0.25,
        }
    }
}

fn axis_grid(half_width: f64, h: f64) -> Vec<f64> {
    let k = (half_width / h).floor() as i64;
    (-k..=k).map(|i| i as f64 * h).collect()
}

/// Samples the graph of a subdifferential lying between the convex and the
/// Clarke subdifferential: exact representatives where the oracle provides
/// them, or a covector grid filtered by numerical Clarke membership.
pub fn sample_subdiff_graph(
    f: &FunctionOracle,
    region: &Region,
    resolution: usize,
    source: GraphSource,
    opts: &GraphOptions,
) -> Result<SampledGraph> {
    check_dim(f.dim(), region.dim())?;
    if source == GraphSource::Exact && !f.has_exact_subdifferential() {
        return Err(Error::MissingExactOracle(f.id().to_string()));
    }
    let points: Vec<Vector> = region
        .grid(resolution)?
        .into_iter()
        .filter(|x| f.eval(x).is_finite())
        .collect();
    let w = opts.covectors.half_width;
    let per_point: Vec<Vec<(Vector, bool)>> = match source {
        GraphSource::Exact => points
            .iter()
            .map(|x| {
                let set = f.exact_subdifferential(x).expect("checked above");
                set.representatives(&opts.covectors)
                    .into_iter()
                    .map(|r| (r.covector, r.clipped))
                    .collect()
            })
            .collect(),
        GraphSource::ClarkeNumeric => {
            let dirs = sphere_directions(f.dim(), opts.dir_resolution);
            let axis = axis_grid(w, opts.numeric_spacing);
            let mut candidates: Vec<Vec<f64>> = vec![Vec::new()];
            for _ in 0..f.dim() {
                candidates = candidates
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
            points
                .par_iter()
                .map(|x| {
                    let profile = clarke_profile(f, x, &dirs, &opts.clarke)?;
                    Ok(candidates
                        .iter()
                        .filter(|c| clarke_residual(c, &dirs, &profile).0 <= DEFAULT_TOL)
                        .map(|c| {
                            let on_box = c.iter().any(|v| v.abs() >= w);
                            (Vector::new(c.clone()), on_box)
                        })
                        .collect())
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    let mut sample = GraphSample::new(f.dim());
    let mut clipped = Vec::new();
    for (x, covs) in points.iter().zip(per_point) {
        for (c, clip) in covs {
            if sample.push(x.clone(), c)? {
                clipped.push(clip);
            }
        }
    }
    let truncated = clipped.iter().any(|&c| c);
    let meta = GraphMeta {
        function_id: f.id().to_string(),
        region: region.clone(),
        resolution,
        source,
        covector_half_width: w,
        truncated,
        pairs: sample.len(),
    };
    Ok(SampledGraph { sample, clipped, meta })
}

/// The exact source when available, Clarke-numeric otherwise.
pub fn preferred_source(f: &FunctionOracle) -> GraphSource {
    if f.has_exact_subdifferential() {
        GraphSource::Exact
    } else {
        GraphSource::ClarkeNumeric
    }
}

pub(crate) fn enlargement_indices(g: &GraphSample, f: &FunctionOracle, xbar: &Vector, eps: f64) -> Result<Vec<usize>> {
    check_dim(f.dim(), g.dim())?;
    let fx = f.finite_at(xbar)?;
    Ok(g.iter()
        .enumerate()
        .filter(|(_, (x, s))| {
            let near = x.dist(xbar) <= eps;
            let level = f.eval(x).as_finite().is_some_and(|v| (v - fx).abs() <= eps);
            near && level && s.dot(&x.sub(xbar)) <= eps
        })
        .map(|(i, _)| i)
        .collect())
}

/// Pairs `(x, x*)` of `g` with `||x - xbar|| <= eps`, `|f(x) - f(xbar)| <= eps`
/// and `<x*, x - xbar> <= eps`.
pub fn epsilon_enlargement(
    g: &GraphSample,
    f: &FunctionOracle,
    xbar: &Vector,
    p: &EnlargementParams,
) -> Result<GraphSample> {
    let idx = enlargement_indices(g, f, xbar, p.epsilon)?;
    Ok(g.select(&idx))
}

/// Sampling for [`cdd_inequality_check`]: at each epsilon the graph is
/// sampled on the box `xbar + [-eps, eps]^n` at `local_resolution` points
/// per axis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CddSampling {
    pub local_resolution: usize,
    pub graph: GraphOptions,
    pub tol: f64,
}

impl Default for CddSampling {
    fn default() -> Self {
        CddSampling { local_resolution: 9, graph: GraphOptions::default(), tol: DEFAULT_TOL }
    }
}

/// `1, 1/2, ..., 2^-10`.
pub fn default_eps_list() -> Vec<f64> {
    (0..=10).map(|k| 0.5f64.powi(k)).collect()
}

/// Checks `f'(xbar; d) <= min_eps sup <enlargement_eps(xbar), d> + tol`
/// together with nonemptiness of every sampled enlargement.
///
/// A supremum attained at a clipped covector stands for `+inf` and sets the
/// verdict's truncation flag. An empty enlargement fails the verdict with
/// that epsilon as witness.
pub fn cdd_inequality_check(
    f: &FunctionOracle,
    xbar: &Vector,
    d: &Vector,
    eps_list: &[f64],
    sampling: &CddSampling,
) -> Result<Verdict> {
    Ok(cdd_directions(f, xbar, std::slice::from_ref(d), eps_list, sampling)?.remove(0))
}

/// [`cdd_inequality_check`] for several directions sharing the sampled
/// enlargements.
pub fn cdd_directions(
    f: &FunctionOracle,
    xbar: &Vector,
    dirs: &[Vector],
    eps_list: &[f64],
    sampling: &CddSampling,
) -> Result<Vec<Verdict>> {
    for d in dirs {
        check_dim(f.dim(), d.dim())?;
    }
    if eps_list.is_empty() || eps_list.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidParameter("eps_list must be nonempty and positive".into()));
    }
    let source = preferred_source(f);
    // per direction: (rhs, eps attaining it, truncated)
    let mut state: Vec<(ExtReal, f64, bool)> = vec![(ExtReal::PosInf, eps_list[0], false); dirs.len()];
    let mut empty_at = None;
    for &eps in eps_list {
        let local = Region::Box {
            lo: xbar.iter().map(|c| c - eps).collect(),
            hi: xbar.iter().map(|c| c + eps).collect(),
        };
        let graph = sample_subdiff_graph(f, &local, sampling.local_resolution, source, &sampling.graph)?;
        let idx = enlargement_indices(&graph.sample, f, xbar, eps)?;
        if idx.is_empty() {
            empty_at = Some(eps);
            break;
        }
        for (d, st) in dirs.iter().zip(state.iter_mut()) {
            let (best, clipped) = idx
                .iter()
                .map(|&i| (graph.sample.pairs()[i].1.dot(d), graph.clipped[i]))
                .max_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                .expect("nonempty");
            let sup = if clipped {
                st.2 = true;
                ExtReal::PosInf
            } else {
                ExtReal::finite(best)
            };
            if sup < st.0 {
                st.0 = sup;
                st.1 = eps;
            }
        }
    }
    dirs.iter()
        .zip(state)
        .map(|(d, (rhs, rhs_eps, truncated))| {
            let mut v = if let Some(eps) = empty_at {
                Verdict::new(false, f64::INFINITY, Some(Witness::Epsilon { epsilon: eps }))
            } else {
                let lhs = lower_dini(f, xbar, d, &sampling.graph.clarke.scheme)?.value;
                let residual = match (lhs, rhs) {
                    (ExtReal::PosInf, ExtReal::PosInf) => 0.0,
                    (l, r) => l.to_f64() - r.to_f64(),
                };
                Verdict::new(lhs.le_tol(rhs, sampling.tol), residual, Some(Witness::Epsilon { epsilon: rhs_eps }))
            };
            v.truncated = truncated;
            Ok(v)
        })
        .collect()
}
