//! Minty variational inequalities of subderivative and subdifferential type,
//! the increase-along-rays check, and the cross-validator comparing them.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::extreal::ExtReal;
use crate::graph::{GraphSample, GraphSource};
use crate::oracle::FunctionOracle;
use crate::region::{linspace, Region};
use crate::subderivative::{lower_dini, LiminfScheme};
use crate::subdifferential::{preferred_source, sample_subdiff_graph, GraphOptions};
use crate::vector::Vector;
use crate::verdict::{classify, Agreement, Witness, DEFAULT_BAND, DEFAULT_TOL};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeMeta {
    pub region: Region,
    pub resolution: usize,
    pub t_resolution: Option<usize>,
    /// Only interior grid points were probed.
    pub interior_only: bool,
}

/// Supremum of a Minty-type residual over a probe grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MintyReport {
    pub residual: ExtReal,
    pub solution: bool,
    pub witness: Option<Witness>,
    pub probe: ProbeMeta,
}

fn finish(residual: ExtReal, witness: Option<Witness>, probe: ProbeMeta) -> MintyReport {
    MintyReport { residual, solution: residual.le_tol(ExtReal::ZERO, DEFAULT_TOL), witness, probe }
}

fn require_member(region: &Region, xbar: &Vector, interior: bool) -> Result<()> {
    check_dim(region.dim(), xbar.dim())?;
    let inside = if interior { region.contains_interior(xbar) } else { region.contains(xbar) };
    if inside {
        Ok(())
    } else {
        Err(Error::InvalidRegion(format!("{xbar} does not lie in {}", region.describe())))
    }
}

/// Largest `f(y + t (xbar - y)) - f(y)` over `ts`, or `None` when `f(y)` is infinite.
fn ray_gap(f: &FunctionOracle, xbar: &[f64], y: &[f64], ts: &[f64], buf: &mut Vec<f64>) -> Option<(ExtReal, f64)> {
    let fy = f.eval(y).as_finite()?;
    let mut best = (ExtReal::finite(-f64::MAX), 0.0);
    for &t in ts {
        buf.clear();
        buf.extend(y.iter().zip(xbar).map(|(a, b)| a + t * (b - a)));
        let gap = f.eval(buf).sub_finite(fy);
        if gap > best.0 {
            best = (gap, t);
        }
    }
    Some(best)
}

struct Max {
    value: Option<ExtReal>,
    witness: Option<Witness>,
}

impl Max {
    fn new() -> Self {
        Max { value: None, witness: None }
    }

    fn offer(&mut self, v: ExtReal, w: impl FnOnce() -> Witness) {
        if self.value.is_none_or(|cur| v > cur) {
            self.value = Some(v);
            self.witness = Some(w());
        }
    }

    fn into_report(self, probe: ProbeMeta) -> MintyReport {
        // an empty scan has no violation
        let residual = self.value.unwrap_or(ExtReal::finite(-f64::MAX));
        finish(residual, self.witness, probe)
    }
}

/// Increase-along-rays check: is `f(y + t (xbar - y)) <= f(y)` for every
/// probe-grid `y` of `c` with `f(y)` finite and every `t` of a uniform
/// `[0, 1]` grid of `t_resolution` points?
pub fn iar_check(
    f: &FunctionOracle,
    xbar: &Vector,
    c: &Region,
    resolution: usize,
    t_resolution: usize,
) -> Result<MintyReport> {
    check_dim(f.dim(), xbar.dim())?;
    require_member(c, xbar, false)?;
    if t_resolution < 2 {
        return Err(Error::InvalidParameter("t_resolution must be at least 2".into()));
    }
    let ts = linspace(0.0, 1.0, t_resolution);
    let mut buf = Vec::new();
    let mut max = Max::new();
    for y in c.grid(resolution)? {
        if let Some((gap, t)) = ray_gap(f, xbar, &y, &ts, &mut buf) {
            max.offer(gap, || Witness::Ray { y: y.clone(), t });
        }
    }
    Ok(max.into_report(ProbeMeta {
        region: c.clone(),
        resolution,
        t_resolution: Some(t_resolution),
        interior_only: false,
    }))
}

/// Minty inequality of subderivative type: the largest estimated
/// `f'(y; xbar - y)` over probe-grid `y` of `c` in the domain.
pub fn minty_subderivative(
    f: &FunctionOracle,
    xbar: &Vector,
    c: &Region,
    resolution: usize,
    scheme: &LiminfScheme,
) -> Result<MintyReport> {
    check_dim(f.dim(), xbar.dim())?;
    require_member(c, xbar, false)?;
    let mut max = Max::new();
    for y in c.grid(resolution)? {
        if !f.eval(&y).is_finite() {
            continue;
        }
        let v = lower_dini(f, &y, &xbar.sub(&y), scheme)?.value;
        max.offer(v, || Witness::Point { x: y.clone() });
    }
    Ok(max.into_report(ProbeMeta { region: c.clone(), resolution, t_resolution: None, interior_only: false }))
}

/// Minty inequality of subdifferential type: the largest `<y*, xbar - y>`
/// over graph pairs with `y` in the interior of `u`.
pub fn minty_subdifferential(f: &FunctionOracle, xbar: &Vector, u: &Region, graph: &GraphSample) -> Result<MintyReport> {
    check_dim(f.dim(), xbar.dim())?;
    check_dim(f.dim(), graph.dim())?;
    require_member(u, xbar, true)?;
    let mut max = Max::new();
    let mut used = false;
    for (y, ys) in graph.iter().filter(|(y, _)| u.contains_interior(y)) {
        used = true;
        let v = ExtReal::finite(ys.dot(&xbar.sub(y)));
        max.offer(v, || Witness::Pair { x: y.clone(), xstar: ys.clone() });
    }
    if !used {
        return Err(Error::UnusableSample);
    }
    Ok(max.into_report(ProbeMeta { region: u.clone(), resolution: 0, t_resolution: None, interior_only: true }))
}

/// Resolutions and tolerances for [`cross_validate`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossParams {
    /// Grid points per axis for the tested `xbar`.
    pub resolution: usize,
    /// The probe grid has `refinement * (resolution - 1) + 1` points per axis,
    /// so it contains every tested `xbar`.
    pub refinement: usize,
    pub t_resolution: usize,
    pub scheme: LiminfScheme,
    pub graph: GraphOptions,
    /// Graph source override; exact where available otherwise.
    pub source: Option<GraphSource>,
    pub band: f64,
}

impl CrossParams {
    pub fn new(resolution: usize) -> Self {
        CrossParams {
            resolution,
            refinement: 4,
            t_resolution: 64,
            scheme: LiminfScheme::default(),
            graph: GraphOptions::default(),
            source: None,
            band: DEFAULT_BAND,
        }
    }

    pub fn probe_resolution(&self) -> usize {
        self.refinement * (self.resolution - 1) + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution < 2 || self.refinement < 1 || self.t_resolution < 2 {
            return Err(Error::InvalidParameter("resolutions must be at least 2 and refinement at least 1".into()));
        }
        if !(self.band > 0.0) {
            return Err(Error::InvalidParameter("band must be positive".into()));
        }
        self.scheme.validate()
    }
}

/// Boolean verdict with residual and witness, as stored per grid point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RouteVerdict {
    pub solution: bool,
    pub residual: ExtReal,
    pub witness: Option<Witness>,
}

impl From<MintyReport> for RouteVerdict {
    fn from(r: MintyReport) -> Self {
        RouteVerdict { solution: r.solution, residual: r.residual, witness: r.witness }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceRow {
    pub xbar: Vector,
    /// Subderivative-type Minty over the closed region.
    pub minty_subderivative: RouteVerdict,
    /// Increase along rays over the closed region.
    pub iar: RouteVerdict,
    pub prop1: Agreement,
    /// Subdifferential-type Minty over the open interior; absent on the boundary.
    pub minty_subdifferential: Option<RouteVerdict>,
    /// Increase along rays over the open interior.
    pub iar_interior: Option<RouteVerdict>,
    pub thm2: Option<Agreement>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AgreementCounts {
    pub agree: usize,
    pub indeterminate: usize,
    pub disagree: usize,
}

impl AgreementCounts {
    pub fn add(&mut self, a: Agreement) {
        match a {
            Agreement::Agree => self.agree += 1,
            Agreement::Indeterminate => self.indeterminate += 1,
            Agreement::Disagree => self.disagree += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.agree + self.indeterminate + self.disagree
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Discrepancy {
    pub equivalence: &'static str,
    pub xbar: Vector,
    pub agreement: Agreement,
    pub residual: ExtReal,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub function_id: String,
    pub region: Region,
    pub resolution: usize,
    pub probe_resolution: usize,
    pub t_resolution: usize,
    pub graph_source: GraphSource,
    pub graph_truncated: bool,
    pub band: f64,
    pub prop1: AgreementCounts,
    pub thm2: AgreementCounts,
    pub rows: Vec<EquivalenceRow>,
    /// Every row where two routes disagree, hard or inside the band.
    pub discrepancies: Vec<Discrepancy>,
}

impl EquivalenceReport {
    pub fn hard_disagreements(&self) -> usize {
        self.prop1.disagree + self.thm2.disagree
    }

    /// One row per tested `xbar`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.region.dim();
        let mut header: Vec<String> = (1..=n).map(|i| format!("xbar_{i}")).collect();
        header.extend(
            [
                "minty_subderivative",
                "minty_subderivative_residual",
                "iar",
                "iar_residual",
                "prop1",
                "minty_subdifferential",
                "minty_subdifferential_residual",
                "iar_interior",
                "iar_interior_residual",
                "thm2",
            ]
            .map(String::from),
        );
        writeln!(w, "{}", header.join(","))?;
        let label = |a: Agreement| match a {
            Agreement::Agree => "agree",
            Agreement::Indeterminate => "indeterminate",
            Agreement::Disagree => "disagree",
        };
        let route = |r: &Option<RouteVerdict>| match r {
            Some(r) => format!("{},{}", r.solution, r.residual),
            None => ",".to_string(),
        };
        for row in &self.rows {
            let mut cells: Vec<String> = row.xbar.iter().map(|c| c.to_string()).collect();
            cells.push(format!("{},{}", row.minty_subderivative.solution, row.minty_subderivative.residual));
            cells.push(format!("{},{}", row.iar.solution, row.iar.residual));
            cells.push(label(row.prop1).to_string());
            cells.push(route(&row.minty_subdifferential));
            cells.push(route(&row.iar_interior));
            cells.push(row.thm2.map_or(String::new(), |a| label(a).to_string()));
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

fn offending(a: &RouteVerdict, b: &RouteVerdict) -> (f64, ExtReal, Option<Witness>) {
    let bad = if a.solution { b } else { a };
    (bad.residual.to_f64(), bad.residual, bad.witness.clone())
}

fn compare(a: &RouteVerdict, b: &RouteVerdict, band: f64) -> (Agreement, ExtReal, Option<Witness>) {
    let (r, res, w) = offending(a, b);
    (classify(a.solution, b.solution, r, band), res, w)
}

/// Runs both Minty routes and the increase-along-rays check at every
/// domain point of the `xbar` grid, and classifies agreement.
///
/// The first equivalence is tested over the closed region, the second over
/// its interior: `xbar` ranges over interior grid points and probes over
/// interior probe points, which drops exactly one grid cell at the border.
pub fn cross_validate(f: &FunctionOracle, region: &Region, params: &CrossParams) -> Result<EquivalenceReport> {
    check_dim(f.dim(), region.dim())?;
    region.validate()?;
    params.validate()?;
    let pres = params.probe_resolution();
    let probes: Vec<Vector> = region.grid(pres)?;
    let interior: Vec<bool> = probes.iter().map(|y| region.contains_interior(y)).collect();
    let source = params.source.unwrap_or_else(|| preferred_source(f));
    let graph = sample_subdiff_graph(f, region, pres, source, &params.graph)?;
    let ts = linspace(0.0, 1.0, params.t_resolution);
    let xbars: Vec<Vector> = region.grid(params.resolution)?.into_iter().filter(|x| f.eval(x).is_finite()).collect();
    let meta_c = ProbeMeta {
        region: region.clone(),
        resolution: pres,
        t_resolution: Some(params.t_resolution),
        interior_only: false,
    };
    let rows: Vec<EquivalenceRow> = xbars
        .par_iter()
        .map(|xbar| -> Result<EquivalenceRow> {
            let mut buf = Vec::with_capacity(f.dim());
            let mut iar_c = Max::new();
            let mut iar_u = Max::new();
            let mut dini = Max::new();
            for (y, &inner) in probes.iter().zip(&interior) {
                let Some((gap, t)) = ray_gap(f, xbar, y, &ts, &mut buf) else { continue };
                iar_c.offer(gap, || Witness::Ray { y: y.clone(), t });
                if inner {
                    iar_u.offer(gap, || Witness::Ray { y: y.clone(), t });
                }
                let v = lower_dini(f, y, &xbar.sub(y), &params.scheme)?.value;
                dini.offer(v, || Witness::Point { x: y.clone() });
            }
            let ms: RouteVerdict = dini.into_report(meta_c.clone()).into();
            let iar: RouteVerdict = iar_c.into_report(meta_c.clone()).into();
            let (prop1, ..) = compare(&ms, &iar, params.band);
            let (msd, iu, thm2) = if region.contains_interior(xbar) {
                let msd: RouteVerdict = minty_subdifferential(f, xbar, region, &graph.sample)?.into();
                let iu: RouteVerdict = iar_u.into_report(meta_c.clone()).into();
                let (a, ..) = compare(&msd, &iu, params.band);
                (Some(msd), Some(iu), Some(a))
            } else {
                (None, None, None)
            };
            Ok(EquivalenceRow {
                xbar: xbar.clone(),
                minty_subderivative: ms,
                iar,
                prop1,
                minty_subdifferential: msd,
                iar_interior: iu,
                thm2,
            })
        })
        .collect::<Result<_>>()?;
    let mut prop1 = AgreementCounts::default();
    let mut thm2 = AgreementCounts::default();
    let mut discrepancies = Vec::new();
    for row in &rows {
        prop1.add(row.prop1);
        if row.prop1 != Agreement::Agree {
            let (_, residual, witness) = offending(&row.minty_subderivative, &row.iar);
            discrepancies.push(Discrepancy {
                equivalence: "prop1",
                xbar: row.xbar.clone(),
                agreement: row.prop1,
                residual,
                witness,
            });
        }
        if let (Some(a), Some(m), Some(i)) = (row.thm2, &row.minty_subdifferential, &row.iar_interior) {
            thm2.add(a);
            if a != Agreement::Agree {
                let (_, residual, witness) = offending(m, i);
                discrepancies.push(Discrepancy { equivalence: "thm2", xbar: row.xbar.clone(), agreement: a, residual, witness });
            }
        }
    }
    Ok(EquivalenceReport {
        function_id: f.id().to_string(),
        region: region.clone(),
        resolution: params.resolution,
        probe_resolution: pres,
        t_resolution: params.t_resolution,
        graph_source: source,
        graph_truncated: graph.meta.truncated,
        band: params.band,
        prop1,
        thm2,
        rows,
        discrepancies,
    })
}
