//! Monotone polars of finite graphs, monotonicity and absorption
//! predicates, and polar membership through the increase-along-rays
//! property of `f - x*`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::extreal::{serde_f64, ExtReal};
use crate::graph::GraphSample;
use crate::oracle::FunctionOracle;
use crate::region::{linspace, Region};
use crate::vector::Vector;
use crate::verdict::{Verdict, Witness, DEFAULT_TOL};

/// Outcome of a monotone-relation test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolarVerdict {
    pub related: bool,
    /// Minimum of `<y* - x*, y - x>`; `+inf` over an empty graph.
    #[serde(serialize_with = "serde_f64::serialize")]
    pub min_product: f64,
    /// Graph element achieving the minimum.
    pub witness: Option<(Vector, Vector)>,
    /// For [`is_monotone`], the second element of the minimising pair.
    pub partner: Option<(Vector, Vector)>,
}

fn product(y: &[f64], ys: &[f64], x: &[f64], xs: &[f64]) -> f64 {
    y.iter().zip(x).zip(ys.iter().zip(xs)).map(|((a, b), (c, d))| (c - d) * (a - b)).sum()
}

/// Is `(x, xstar)` monotonically related to every element of `t`?
pub fn polar_contains(t: &GraphSample, x: &Vector, xstar: &Vector) -> PolarVerdict {
    polar_contains_tol(t, x, xstar, DEFAULT_TOL)
}

pub fn polar_contains_tol(t: &GraphSample, x: &Vector, xstar: &Vector, tol: f64) -> PolarVerdict {
    let mut min = f64::INFINITY;
    let mut arg = None;
    for (i, (y, ys)) in t.iter().enumerate() {
        let p = product(y, ys, x, xstar);
        if p < min {
            min = p;
            arg = Some(i);
        }
    }
    PolarVerdict {
        related: min >= -tol,
        min_product: min,
        witness: arg.map(|i| t.pairs()[i].clone()),
        partner: None,
    }
}

/// Does every pair of elements of `t` satisfy `<y* - x*, y - x> >= -tol`?
pub fn is_monotone(t: &GraphSample) -> PolarVerdict {
    is_monotone_tol(t, DEFAULT_TOL)
}

pub fn is_monotone_tol(t: &GraphSample, tol: f64) -> PolarVerdict {
    let pairs = t.pairs();
    let best = (0..pairs.len())
        .into_par_iter()
        .filter_map(|i| {
            let (x, xs) = &pairs[i];
            (i + 1..pairs.len())
                .map(|j| (product(&pairs[j].0, &pairs[j].1, x, xs), i, j))
                .min_by(|a, b| a.0.total_cmp(&b.0))
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    match best {
        Some((p, i, j)) => PolarVerdict {
            related: p >= -tol,
            min_product: p,
            witness: Some(pairs[i].clone()),
            partner: Some(pairs[j].clone()),
        },
        None => PolarVerdict { related: true, min_product: f64::INFINITY, witness: None, partner: None },
    }
}

/// The candidates monotonically related to `t`.
pub fn polar_of_sample(t: &GraphSample, candidates: &GraphSample) -> GraphSample {
    let keep: Vec<usize> = candidates
        .pairs()
        .par_iter()
        .enumerate()
        .filter(|(_, (x, xs))| polar_contains(t, x, xs).related)
        .map(|(i, _)| i)
        .collect();
    candidates.select(&keep)
}

/// Graph distance `max(||x - y||, ||x* - y*||)` from a pair to `t`.
pub fn graph_distance(t: &GraphSample, x: &Vector, xstar: &Vector) -> f64 {
    t.iter()
        .map(|(y, ys)| x.dist(y).max(xstar.dist(ys)))
        .fold(f64::INFINITY, f64::min)
}

/// Is every candidate related to `t` within `match_radius` of `t`?
pub fn is_absorbing(t: &GraphSample, candidates: &GraphSample, match_radius: f64) -> Verdict {
    is_absorbing_with_oracle(t, candidates, match_radius, None)
}

/// As [`is_absorbing`], additionally accepting related candidates that the
/// exact subdifferential of `f` contains. The residual is the largest
/// graph distance of an unaccepted related candidate minus the radius.
pub fn is_absorbing_with_oracle(
    t: &GraphSample,
    candidates: &GraphSample,
    match_radius: f64,
    f: Option<&FunctionOracle>,
) -> Verdict {
    let worst = candidates
        .pairs()
        .par_iter()
        .enumerate()
        .filter(|(_, (x, xs))| polar_contains(t, x, xs).related)
        .filter(|(_, (x, xs))| {
            let exact = f.and_then(|f| f.exact_subdifferential(x));
            !exact.is_some_and(|s| s.contains(xs, DEFAULT_TOL))
        })
        .map(|(i, (x, xs))| (graph_distance(t, x, xs), i))
        .max_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
    match worst {
        Some((dist, i)) => {
            let (x, xstar) = candidates.pairs()[i].clone();
            Verdict::new(dist <= match_radius, dist - match_radius, Some(Witness::Pair { x, xstar }))
        }
        None => Verdict::new(true, f64::NEG_INFINITY, None),
    }
}

/// Polar membership through ray monotonicity of the shifted function: `(x, x*)` is
/// accepted iff `g(y + t (x - y)) <= g(y) + tol` for `g = f - <x*, .>`,
/// every `y` of the probe grid and every `t` of a uniform `[0, 1]` grid
/// with `ray_resolution` points.
pub fn polar_membership_via_iar(
    f: &FunctionOracle,
    x: &Vector,
    xstar: &Vector,
    probe: &Region,
    probe_resolution: usize,
    ray_resolution: usize,
) -> Result<Verdict> {
    check_dim(f.dim(), x.dim())?;
    check_dim(f.dim(), xstar.dim())?;
    check_dim(f.dim(), probe.dim())?;
    if ray_resolution < 2 {
        return Err(Error::InvalidParameter("ray_resolution must be at least 2".into()));
    }
    let g = |p: &[f64]| f.eval(p).sub_finite(xstar.dot(p));
    let ts = linspace(0.0, 1.0, ray_resolution);
    let mut residual = f64::NEG_INFINITY;
    let mut witness = None;
    let mut buf = Vec::with_capacity(f.dim());
    for y in probe.grid(probe_resolution)? {
        let Some(gy) = g(&y).as_finite() else { continue };
        for &t in &ts {
            buf.clear();
            buf.extend(y.iter().zip(x.iter()).map(|(a, b)| a + t * (b - a)));
            let gap = match g(&buf) {
                ExtReal::Finite(v) => v - gy,
                ExtReal::PosInf => f64::INFINITY,
            };
            if gap > residual {
                residual = gap;
                witness = Some(Witness::Ray { y: y.clone(), t });
            }
        }
    }
    Ok(Verdict::new(residual <= DEFAULT_TOL, residual, witness))
}
