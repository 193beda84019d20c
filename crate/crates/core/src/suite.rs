//! Verification suites over the curated library and single-point
//! explanations. Everything here is deterministic: grids are traversed in
//! lexicographic order and functions in the order they are configured.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::graph::{GraphSample, GraphSource, SampledGraph};
use crate::library::{lookup, FUNCTION_IDS};
use crate::minty::{cross_validate, iar_check, minty_subderivative, AgreementCounts, CrossParams, EquivalenceReport};
use crate::oracle::{covector_candidates, CovectorSampling, FunctionOracle};
use crate::polar::{is_absorbing_with_oracle, is_monotone, polar_contains, polar_membership_via_iar};
use crate::region::Region;
use crate::subderivative::{clarke_directional, lower_dini, mean_value_witness, ClarkeParams, LiminfScheme};
use crate::subdifferential::{
    cdd_directions, clarke_subdiff_contains, convex_subdiff_contains, default_eps_list, preferred_source,
    sample_subdiff_graph, CddSampling, GraphOptions,
};
use crate::vector::{sphere_directions, Vector};
use crate::verdict::{classify, Agreement, Witness, DEFAULT_BAND, POLAR_BAND};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteKind {
    Prop1,
    Thm2,
    Thm3,
    Cdd,
    Predicates,
    Mvi,
    Sanity,
    All,
}

impl SuiteKind {
    pub const CONCRETE: [SuiteKind; 7] = [
        SuiteKind::Prop1,
        SuiteKind::Thm2,
        SuiteKind::Thm3,
        SuiteKind::Cdd,
        SuiteKind::Predicates,
        SuiteKind::Mvi,
        SuiteKind::Sanity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteKind::Prop1 => "prop1",
            SuiteKind::Thm2 => "thm2",
            SuiteKind::Thm3 => "thm3",
            SuiteKind::Cdd => "cdd",
            SuiteKind::Predicates => "predicates",
            SuiteKind::Mvi => "mvi",
            SuiteKind::Sanity => "sanity",
            SuiteKind::All => "all",
        }
    }
}

impl fmt::Display for SuiteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SuiteKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SuiteKind::CONCRETE
            .iter()
            .chain([&SuiteKind::All])
            .find(|k| k.name() == s)
            .copied()
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite '{s}'")))
    }
}

/// Everything a suite run depends on. Missing keys take their defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub functions: Vec<String>,
    pub suites: Vec<SuiteKind>,
    /// Overrides the per-dimension grid resolutions below.
    pub resolution: Option<usize>,
    pub resolution_1d: usize,
    pub resolution_2d: usize,
    /// Region overrides keyed by function id.
    pub regions: BTreeMap<String, Region>,
    /// Probe grids are this many times finer than the tested grid.
    pub refinement: usize,
    pub t_resolution: usize,
    pub ray_resolution: usize,
    pub dir_resolution: usize,
    pub candidate_resolution_1d: usize,
    pub candidate_resolution_2d: usize,
    pub covector_half_width: f64,
    pub scheme: LiminfScheme,
    pub clarke: ClarkeParams,
    /// Tolerance of the subderivative / enlargement inequality.
    pub tol: f64,
    /// Residual band for the Minty equivalences.
    pub band: f64,
    /// Band on `min_product` for the two polar routes.
    pub polar_band: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            functions: FUNCTION_IDS.iter().map(|s| s.to_string()).collect(),
            suites: vec![SuiteKind::All],
            resolution: None,
            resolution_1d: 65,
            resolution_2d: 17,
            regions: BTreeMap::new(),
            refinement: 4,
            t_resolution: 64,
            ray_resolution: 64,
            dir_resolution: 16,
            candidate_resolution_1d: 17,
            candidate_resolution_2d: 9,
            covector_half_width: 10.0,
            scheme: LiminfScheme::default(),
            clarke: ClarkeParams::default(),
            tol: 1e-3,
            band: DEFAULT_BAND,
            polar_band: POLAR_BAND,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.functions.is_empty() {
            return Err(Error::InvalidParameter("no functions selected".into()));
        }
        for id in self.functions.iter().chain(self.regions.keys()) {
            lookup(id)?;
        }
        for (id, r) in &self.regions {
            r.validate()?;
            if r.dim() != lookup(id)?.dim() {
                return Err(Error::InvalidRegion(format!("region for '{id}' has the wrong dimension")));
            }
        }
        let res = [
            self.resolution.unwrap_or(2),
            self.resolution_1d,
            self.resolution_2d,
            self.t_resolution,
            self.ray_resolution,
            self.dir_resolution,
            self.candidate_resolution_1d,
            self.candidate_resolution_2d,
        ];
        if res.iter().any(|&r| r < 2) || self.refinement < 1 {
            return Err(Error::InvalidParameter("resolutions must be at least 2".into()));
        }
        for (name, v) in [
            ("tol", self.tol),
            ("band", self.band),
            ("polar_band", self.polar_band),
            ("covector_half_width", self.covector_half_width),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive")));
            }
        }
        self.clarke.validate()?;
        self.scheme.validate()
    }

    /// The selected suites with `all` expanded, in canonical order.
    pub fn selected_suites(&self) -> Vec<SuiteKind> {
        let mut out: Vec<SuiteKind> = if self.suites.contains(&SuiteKind::All) {
            SuiteKind::CONCRETE.to_vec()
        } else {
            self.suites.clone()
        };
        out.sort();
        out.dedup();
        out
    }

    pub fn oracles(&self) -> Result<Vec<FunctionOracle>> {
        self.functions.iter().map(|id| lookup(id)).collect()
    }

    pub fn region_for(&self, f: &FunctionOracle) -> Region {
        self.regions.get(f.id()).cloned().unwrap_or_else(|| f.meta.default_region.clone())
    }

    pub fn resolution_for(&self, f: &FunctionOracle) -> usize {
        self.resolution.unwrap_or(if f.dim() == 1 { self.resolution_1d } else { self.resolution_2d })
    }

    fn candidate_resolution_for(&self, f: &FunctionOracle) -> usize {
        if f.dim() == 1 {
            self.candidate_resolution_1d
        } else {
            self.candidate_resolution_2d
        }
    }

    pub fn graph_options(&self) -> GraphOptions {
        GraphOptions {
            covectors: CovectorSampling { half_width: self.covector_half_width, ..Default::default() },
            clarke: self.clarke.clone(),
            dir_resolution: self.dir_resolution,
            ..Default::default()
        }
    }

    fn cross_params(&self, f: &FunctionOracle) -> CrossParams {
        CrossParams {
            resolution: self.resolution_for(f),
            refinement: self.refinement,
            t_resolution: self.t_resolution,
            scheme: self.scheme.clone(),
            graph: self.graph_options(),
            source: None,
            band: self.band,
        }
    }
}

/// A discrepancy or failure worth reporting, with what explains it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Finding {
    pub at: String,
    pub agreement: Agreement,
    pub residual: ExtReal,
    pub witness: Option<Witness>,
}

/// Per-function outcome of one suite.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FunctionResult {
    pub function_id: String,
    pub region: String,
    pub passed: bool,
    /// `agree` counts passing checks, `disagree` hard failures.
    pub counts: AgreementCounts,
    pub truncated: bool,
    pub metrics: BTreeMap<String, Value>,
    pub findings: Vec<Finding>,
}

impl FunctionResult {
    fn new(f: &FunctionOracle, region: &Region) -> Self {
        FunctionResult {
            function_id: f.id().to_string(),
            region: region.describe(),
            passed: true,
            counts: AgreementCounts::default(),
            truncated: false,
            metrics: BTreeMap::new(),
            findings: Vec::new(),
        }
    }

    fn record(&mut self, at: impl FnOnce() -> String, a: Agreement, residual: ExtReal, witness: Option<Witness>) {
        self.counts.add(a);
        if a != Agreement::Agree {
            self.findings.push(Finding { at: at(), agreement: a, residual, witness });
        }
    }

    fn metric(&mut self, key: &str, v: impl Into<Value>) {
        self.metrics.insert(key.to_string(), v.into());
    }

    fn close(mut self) -> Self {
        self.passed = self.passed && self.counts.disagree == 0;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteResult {
    pub suite: SuiteKind,
    pub passed: bool,
    pub counts: AgreementCounts,
    pub functions: Vec<FunctionResult>,
    /// Suite-level checks that are not attached to one function.
    pub metrics: BTreeMap<String, Value>,
}

impl SuiteResult {
    fn new(suite: SuiteKind, functions: Vec<FunctionResult>) -> Self {
        let mut counts = AgreementCounts::default();
        for r in &functions {
            counts.agree += r.counts.agree;
            counts.indeterminate += r.counts.indeterminate;
            counts.disagree += r.counts.disagree;
        }
        let passed = functions.iter().all(|r| r.passed);
        SuiteResult { suite, passed, counts, functions, metrics: BTreeMap::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Timing {
    pub total_ms: u128,
    pub per_suite_ms: BTreeMap<String, u128>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub config: RunConfig,
    pub passed: bool,
    pub hard_disagreements: usize,
    pub truncated: bool,
    pub suites: Vec<SuiteResult>,
    /// Wall-clock timing; the only nondeterministic field.
    pub timing: Timing,
}

impl Report {
    /// The report as JSON without the timing field.
    pub fn to_json_without_timing(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("report serialises");
        if let Value::Object(m) = &mut v {
            m.remove("timing");
        }
        v
    }

    pub fn suite(&self, kind: SuiteKind) -> Option<&SuiteResult> {
        self.suites.iter().find(|s| s.suite == kind)
    }
}

/// Runs the selected suites in canonical order.
pub fn run_suite(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let oracles = config.oracles()?;
    let kinds = config.selected_suites();
    let start = Instant::now();
    let mut per_suite_ms = BTreeMap::new();
    let need_cross = kinds.iter().any(|k| matches!(k, SuiteKind::Prop1 | SuiteKind::Thm2));
    let mut cross: Vec<(EquivalenceReport, u128)> = Vec::new();
    if need_cross {
        for f in &oracles {
            let t = Instant::now();
            let r = cross_validate(f, &config.region_for(f), &config.cross_params(f))?;
            cross.push((r, t.elapsed().as_millis()));
        }
    }
    let mut suites = Vec::new();
    for kind in kinds {
        let t = Instant::now();
        let result = match kind {
            SuiteKind::Prop1 | SuiteKind::Thm2 => equivalence_suite(kind, &oracles, &cross),
            SuiteKind::Thm3 => thm3_suite(config, &oracles)?,
            SuiteKind::Cdd => cdd_suite(config, &oracles)?,
            SuiteKind::Predicates => predicate_suite(config, &oracles)?,
            SuiteKind::Mvi => mvi_suite(config, &oracles)?,
            SuiteKind::Sanity => sanity_suite(config, &oracles)?,
            SuiteKind::All => unreachable!("expanded"),
        };
        let mut ms = t.elapsed().as_millis();
        if matches!(kind, SuiteKind::Prop1 | SuiteKind::Thm2) {
            ms += cross.iter().map(|c| c.1).sum::<u128>();
        }
        per_suite_ms.insert(kind.name().to_string(), ms);
        suites.push(result);
    }
    let hard = suites.iter().map(|s| s.counts.disagree).sum();
    let truncated = suites.iter().flat_map(|s| &s.functions).any(|f| f.truncated);
    Ok(Report {
        config: config.clone(),
        passed: suites.iter().all(|s| s.passed),
        hard_disagreements: hard,
        truncated,
        suites,
        timing: Timing { total_ms: start.elapsed().as_millis(), per_suite_ms },
    })
}

fn equivalence_suite(kind: SuiteKind, oracles: &[FunctionOracle], cross: &[(EquivalenceReport, u128)]) -> SuiteResult {
    let prop1 = kind == SuiteKind::Prop1;
    let functions = oracles
        .iter()
        .zip(cross)
        .map(|(f, (r, _))| {
            let mut out = FunctionResult::new(f, &r.region);
            out.truncated = !prop1 && r.graph_truncated;
            out.counts = if prop1 { r.prop1 } else { r.thm2 };
            let label = if prop1 { "prop1" } else { "thm2" };
            out.findings = r
                .discrepancies
                .iter()
                .filter(|d| d.equivalence == label)
                .map(|d| Finding {
                    at: format!("xbar={}", d.xbar),
                    agreement: d.agreement,
                    residual: d.residual,
                    witness: d.witness.clone(),
                })
                .collect();
            let solutions: Vec<Value> = r
                .rows
                .iter()
                .filter(|row| if prop1 { row.iar.solution } else { row.iar_interior.as_ref().is_some_and(|v| v.solution) })
                .map(|row| json!(row.xbar))
                .collect();
            let total = out.counts.total();
            out.metric("grid_points", total);
            out.metric("probe_resolution", r.probe_resolution);
            out.metric(
                "indeterminate_fraction",
                if total == 0 { 0.0 } else { out.counts.indeterminate as f64 / total as f64 },
            );
            out.metric("solutions", solutions);
            if !prop1 {
                out.metric("graph_source", json!(r.graph_source));
            }
            out.close()
        })
        .collect();
    SuiteResult::new(kind, functions)
}

/// Candidate pairs for the polar suites: interior grid points times the
/// function's covector probe grid.
pub fn polar_candidates(config: &RunConfig, f: &FunctionOracle, region: &Region) -> Result<GraphSample> {
    let pts: Vec<Vector> = region.interior_grid(config.candidate_resolution_for(f))?;
    GraphSample::product(&pts, &covector_candidates(f)?)
}

/// A graph sample four times finer than the polar candidate grid.
pub struct DenseGraph {
    pub graph: SampledGraph,
    pub resolution: usize,
    /// Graph-distance scale: the larger of point and covector spacing.
    pub spacing: f64,
}

pub fn dense_graph(config: &RunConfig, f: &FunctionOracle, region: &Region) -> Result<DenseGraph> {
    let c = config.candidate_resolution_for(f);
    let resolution = config.refinement.max(4) * (c - 1) + 1;
    let probe = &f.meta.covector_probe;
    let (lo, hi) = probe.bounds();
    let cov_spacing = lo
        .iter()
        .zip(&hi)
        .map(|(a, b)| (b - a) / (f.meta.covector_resolution - 1) as f64)
        .fold(f64::INFINITY, f64::min);
    let fill = cov_spacing / 4.0;
    let mut opts = config.graph_options();
    opts.covectors.fill = Some(fill);
    opts.numeric_spacing = fill;
    let graph = sample_subdiff_graph(f, region, resolution, preferred_source(f), &opts)?;
    let spacing = region.spacing(resolution).max(fill);
    Ok(DenseGraph { graph, resolution, spacing })
}

fn thm3_suite(config: &RunConfig, oracles: &[FunctionOracle]) -> Result<SuiteResult> {
    let functions = oracles
        .iter()
        .map(|f| -> Result<FunctionResult> {
            let region = config.region_for(f);
            let cands = polar_candidates(config, f, &region)?;
            let dense = dense_graph(config, f, &region)?;
            let rows: Vec<(bool, bool, f64, Option<Witness>, ExtReal)> = cands
                .pairs()
                .par_iter()
                .map(|(x, xs)| -> Result<_> {
                    let p = polar_contains(&dense.graph.sample, x, xs);
                    let v = polar_membership_via_iar(f, x, xs, &region, dense.resolution, config.ray_resolution)?;
                    let residual = ExtReal::new(v.residual).unwrap_or(ExtReal::PosInf);
                    let witness = if p.related { v.witness } else { p.witness.map(|(x, xstar)| Witness::Pair { x, xstar }) };
                    Ok((p.related, v.holds, p.min_product, witness, residual))
                })
                .collect::<Result<_>>()?;
            let mut out = FunctionResult::new(f, &region);
            out.truncated = dense.graph.meta.truncated;
            let mut members = 0usize;
            for ((x, xs), (a, b, minp, w, res)) in cands.iter().zip(rows) {
                let agreement = classify(a, b, minp, config.polar_band);
                members += usize::from(a && b);
                let residual = if a { res } else { ExtReal::new(minp).unwrap_or(ExtReal::PosInf) };
                out.record(|| format!("x={x} xstar={xs}"), agreement, residual, w);
            }
            out.metric("candidates", cands.len());
            out.metric("candidate_resolution", config.candidate_resolution_for(f));
            out.metric("dense_resolution", dense.resolution);
            out.metric("dense_pairs", dense.graph.sample.len());
            out.metric("graph_source", json!(dense.graph.meta.source));
            out.metric("polar_members", members);
            Ok(out.close())
        })
        .collect::<Result<_>>()?;
    Ok(SuiteResult::new(SuiteKind::Thm3, functions))
}

fn cdd_suite(config: &RunConfig, oracles: &[FunctionOracle]) -> Result<SuiteResult> {
    let sampling = CddSampling { graph: config.graph_options(), tol: config.tol, ..Default::default() };
    let eps = default_eps_list();
    let functions = oracles
        .iter()
        .map(|f| -> Result<FunctionResult> {
            let region = config.region_for(f);
            let xbars: Vec<Vector> =
                region.grid(config.resolution_for(f))?.into_iter().filter(|x| f.eval(x).is_finite()).collect();
            let dirs: Vec<Vector> =
                (0..f.dim()).flat_map(|i| [Vector::unit(f.dim(), i), Vector::unit(f.dim(), i).scale(-1.0)]).collect();
            let verdicts: Vec<Vec<crate::verdict::Verdict>> = xbars
                .par_iter()
                .map(|x| cdd_directions(f, x, &dirs, &eps, &sampling))
                .collect::<Result<_>>()?;
            let mut out = FunctionResult::new(f, &region);
            let mut worst = f64::NEG_INFINITY;
            for (x, vs) in xbars.iter().zip(verdicts) {
                for (d, v) in dirs.iter().zip(vs) {
                    out.truncated |= v.truncated;
                    if v.residual.is_finite() {
                        worst = worst.max(v.residual);
                    }
                    let a = if v.holds { Agreement::Agree } else { Agreement::Disagree };
                    let residual = ExtReal::new(v.residual).unwrap_or(ExtReal::PosInf);
                    out.record(|| format!("xbar={x} d={d}"), a, residual, v.witness);
                }
            }
            out.metric("cases", out.counts.total());
            out.metric("worst_residual", worst);
            Ok(out.close())
        })
        .collect::<Result<_>>()?;
    Ok(SuiteResult::new(SuiteKind::Cdd, functions))
}

fn predicate_suite(config: &RunConfig, oracles: &[FunctionOracle]) -> Result<SuiteResult> {
    let functions = oracles
        .iter()
        .map(|f| -> Result<FunctionResult> {
            let region = config.region_for(f);
            let mut out = FunctionResult::new(f, &region);
            let res = config.resolution_for(f);
            if f.meta.is_convex && f.has_exact_subdifferential() {
                let g = sample_subdiff_graph(f, &region, res, GraphSource::Exact, &config.graph_options())?;
                let v = is_monotone(&g.sample);
                out.metric("monotone_min_product", v.min_product);
                let a = if v.related { Agreement::Agree } else { Agreement::Disagree };
                let w = v.witness.zip(v.partner).map(|(first, second)| Witness::TwoPairs { first, second });
                out.record(|| "exact graph monotone".into(), a, ExtReal::new(v.min_product).unwrap_or(ExtReal::PosInf), w);
            }
            if f.id() == "neg_abs" {
                let g = sample_subdiff_graph(f, &region, res, GraphSource::ClarkeNumeric, &config.graph_options())?;
                let v = is_monotone(&g.sample);
                out.metric("clarke_monotone_min_product", v.min_product);
                let has_pair = v.witness.is_some() && v.partner.is_some();
                let a = if !v.related && has_pair { Agreement::Agree } else { Agreement::Disagree };
                let w = v.witness.zip(v.partner).map(|(first, second)| Witness::TwoPairs { first, second });
                if let Some(Witness::TwoPairs { first, second }) = &w {
                    out.metric("violating_pair", json!([first, second]));
                }
                out.record(|| "Clarke graph not monotone".into(), a, ExtReal::new(v.min_product).unwrap_or(ExtReal::PosInf), w);
            }
            let cands = polar_candidates(config, f, &region)?;
            let dense = dense_graph(config, f, &region)?;
            let radius = 2.0 * dense.spacing;
            let exact = f.has_exact_subdifferential().then_some(f);
            let v = is_absorbing_with_oracle(&dense.graph.sample, &cands, radius, exact);
            out.truncated = dense.graph.meta.truncated;
            out.metric("match_radius", radius);
            if v.residual.is_finite() {
                out.metric("absorbing_residual", v.residual);
            }
            let a = if v.holds { Agreement::Agree } else { Agreement::Disagree };
            out.record(|| "dense graph absorbing".into(), a, ExtReal::new(v.residual).unwrap_or(ExtReal::PosInf), v.witness);
            Ok(out.close())
        })
        .collect::<Result<_>>()?;
    Ok(SuiteResult::new(SuiteKind::Predicates, functions))
}

fn mvi_suite(config: &RunConfig, oracles: &[FunctionOracle]) -> Result<SuiteResult> {
    let functions = oracles
        .iter()
        .filter(|f| f.dim() == 1)
        .map(|f| -> Result<FunctionResult> {
            let region = config.region_for(f);
            let grid = region.grid(9)?;
            let mut triples = Vec::new();
            for x in &grid {
                let Some(fx) = f.eval(x).as_finite() else { continue };
                for xbar in &grid {
                    let Some(fb) = f.eval(xbar).as_finite() else { continue };
                    if x == xbar {
                        continue;
                    }
                    // lambda = diff / 2 qualifies only when it does not exceed diff
                    let diff = fb - fx;
                    for lambda in [diff, 0.5 * diff] {
                        if lambda <= diff {
                            triples.push((x.clone(), xbar.clone(), lambda));
                        }
                    }
                }
            }
            let found: Vec<std::result::Result<Vector, Error>> = triples
                .par_iter()
                .map(|(x, xbar, l)| mean_value_witness(f, x, xbar, *l, &config.scheme, config.ray_resolution))
                .collect();
            let mut out = FunctionResult::new(f, &region);
            for ((x, xbar, l), r) in triples.iter().zip(found) {
                match r {
                    Ok(_) => out.counts.add(Agreement::Agree),
                    Err(Error::NoWitness { best, value }) => out.record(
                        || format!("x={x} xbar={xbar} lambda={l}"),
                        Agreement::Disagree,
                        value,
                        Some(Witness::Point { x: best }),
                    ),
                    Err(e) => return Err(e),
                }
            }
            out.metric("triples", triples.len());
            Ok(out.close())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut s = SuiteResult::new(SuiteKind::Mvi, functions);
    s.metrics.insert("witnesses".into(), json!(s.counts.agree));
    Ok(s)
}

fn rel_close(a: ExtReal, b: ExtReal, rel: f64) -> bool {
    match (a, b) {
        (ExtReal::PosInf, ExtReal::PosInf) => true,
        (ExtReal::Finite(a), ExtReal::Finite(b)) => (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300),
        _ => false,
    }
}

fn sanity_suite(config: &RunConfig, oracles: &[FunctionOracle]) -> Result<SuiteResult> {
    let functions = oracles
        .iter()
        .map(|f| -> Result<FunctionResult> {
            let region = config.region_for(f);
            let res = if f.dim() == 1 { 17 } else { 9 };
            let dirs = sphere_directions(f.dim(), 8);
            let cases: Vec<(Vector, Vector)> = region
                .grid(res)?
                .into_iter()
                .filter(|x| f.eval(x).is_finite())
                .flat_map(|x| dirs.iter().map(move |d| (x.clone(), d.clone())))
                .collect();
            let checks: Vec<[(bool, ExtReal); 3]> = cases
                .par_iter()
                .map(|(x, d)| -> Result<_> {
                    let v = lower_dini(f, x, d, &config.scheme)?.value;
                    let exact = match f.exact_subderivative(x, d) {
                        Some(e) => match (v, e) {
                            (ExtReal::PosInf, ExtReal::PosInf) => (true, ExtReal::ZERO),
                            _ => {
                                let diff = v.abs_diff(e).unwrap_or(f64::INFINITY);
                                (diff <= 1e-4, ExtReal::new(diff).unwrap_or(ExtReal::PosInf))
                            }
                        },
                        None => (true, ExtReal::ZERO),
                    };
                    let mut homog = (true, ExtReal::ZERO);
                    for tau in [0.5, 2.0, 10.0] {
                        let scaled = lower_dini(f, x, &d.scale(tau), &config.scheme)?.value;
                        if !rel_close(scaled, v.scale_pos(tau), 1e-8) {
                            homog = (false, scaled);
                        }
                    }
                    let up = clarke_directional(f, x, d, &config.clarke)?.value;
                    let dom = (v.le_tol(up, 1e-6), up);
                    Ok([exact, homog, dom])
                })
                .collect::<Result<_>>()?;
            let mut out = FunctionResult::new(f, &region);
            let names = ["exact", "homogeneity", "dominance"];
            let mut passed = [0usize; 3];
            for ((x, d), c) in cases.iter().zip(checks) {
                for (k, (ok, r)) in c.into_iter().enumerate() {
                    if ok {
                        passed[k] += 1;
                        out.counts.add(Agreement::Agree);
                    } else {
                        out.record(|| format!("{} at x={x} d={d}", names[k]), Agreement::Disagree, r, None);
                    }
                }
            }
            out.metric("cases", cases.len());
            out.metric("exact_compared", usize::from(f.has_exact_subderivative()) * cases.len());
            for (k, n) in names.iter().enumerate() {
                out.metric(&format!("{n}_passed"), passed[k]);
            }
            Ok(out.close())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut s = SuiteResult::new(SuiteKind::Sanity, functions);
    let compared: u64 = s.functions.iter().filter_map(|r| r.metrics["exact_compared"].as_u64()).sum();
    s.metrics.insert("exact_cases".into(), json!(compared));
    Ok(s)
}

/// Everything the library can say about one point (and optionally one covector).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Explanation {
    pub function_id: String,
    pub x: Vector,
    pub xstar: Option<Vector>,
    pub region: Region,
    pub value: ExtReal,
    pub subderivatives: Vec<DirectionalRow>,
    pub minty_subderivative: crate::minty::MintyReport,
    pub iar: crate::minty::MintyReport,
    pub convex_membership: Option<crate::subdifferential::MembershipVerdict>,
    pub clarke_membership: Option<crate::subdifferential::MembershipVerdict>,
    pub polar: Option<crate::polar::PolarVerdict>,
    pub polar_via_iar: Option<crate::verdict::Verdict>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectionalRow {
    pub d: Vector,
    pub lower_dini: ExtReal,
    pub clarke: ExtReal,
    pub exact: Option<ExtReal>,
}

/// Drill-down at `x`: subderivatives along sphere directions, the Minty and
/// increase-along-rays verdicts with `xbar = x`, and, given `xstar`, both
/// membership tests and both polar routes for `(x, xstar)`.
pub fn explain(config: &RunConfig, function_id: &str, x: &Vector, xstar: Option<&Vector>) -> Result<Explanation> {
    config.validate()?;
    let f = lookup(function_id)?;
    crate::error::check_dim(f.dim(), x.dim())?;
    if let Some(s) = xstar {
        crate::error::check_dim(f.dim(), s.dim())?;
    }
    let value = f.eval(x);
    if !value.is_finite() {
        return Err(Error::OutsideDomain(x.clone()));
    }
    let region = config.region_for(&f);
    let params = config.cross_params(&f);
    let probe_res = params.probe_resolution();
    let subderivatives = sphere_directions(f.dim(), config.dir_resolution)
        .into_iter()
        .map(|d| -> Result<DirectionalRow> {
            Ok(DirectionalRow {
                lower_dini: lower_dini(&f, x, &d, &config.scheme)?.value,
                clarke: clarke_directional(&f, x, &d, &config.clarke)?.value,
                exact: f.exact_subderivative(x, &d),
                d,
            })
        })
        .collect::<Result<_>>()?;
    let minty = minty_subderivative(&f, x, &region, probe_res, &config.scheme)?;
    let iar = iar_check(&f, x, &region, probe_res, config.t_resolution)?;
    let (mut cvx, mut clk, mut polar, mut via) = (None, None, None, None);
    if let Some(xs) = xstar {
        let full = Region::Box {
            lo: vec![-config.covector_half_width; f.dim()],
            hi: vec![config.covector_half_width; f.dim()],
        };
        let cres = if f.dim() == 1 { 161 } else { 41 };
        cvx = Some(convex_subdiff_contains(&f, x, xs, &full, cres)?);
        clk = Some(clarke_subdiff_contains(&f, x, xs, config.dir_resolution, &config.clarke)?);
        let dense = dense_graph(config, &f, &region)?;
        polar = Some(polar_contains(&dense.graph.sample, x, xs));
        via = Some(polar_membership_via_iar(&f, x, xs, &region, dense.resolution, config.ray_resolution)?);
    }
    Ok(Explanation {
        function_id: f.id().to_string(),
        x: x.clone(),
        xstar: xstar.cloned(),
        region,
        value,
        subderivatives,
        minty_subderivative: minty,
        iar,
        convex_membership: cvx,
        clarke_membership: clk,
        polar,
        polar_via_iar: via,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(functions: &[&str], suite: SuiteKind) -> RunConfig {
        RunConfig {
            functions: functions.iter().map(|s| s.to_string()).collect(),
            suites: vec![suite],
            resolution_1d: 17,
            resolution_2d: 5,
            ..Default::default()
        }
    }

    #[test]
    fn suite_names_round_trip() {
        for k in SuiteKind::CONCRETE.iter().chain([&SuiteKind::All]) {
            assert_eq!(k.name().parse::<SuiteKind>().unwrap(), *k);
        }
        assert!("nope".parse::<SuiteKind>().is_err());
    }

    #[test]
    fn all_expands_in_order() {
        let c = RunConfig { suites: vec![SuiteKind::Thm3, SuiteKind::All], ..Default::default() };
        assert_eq!(c.selected_suites(), SuiteKind::CONCRETE.to_vec());
    }

    #[test]
    fn unknown_function_is_rejected() {
        let c = quick(&["bogus"], SuiteKind::Prop1);
        assert!(matches!(run_suite(&c), Err(Error::UnknownFunction(id)) if id == "bogus"));
    }

    #[test]
    fn convex_prop1_run_agrees_everywhere() {
        let r = run_suite(&quick(&["square", "abs"], SuiteKind::Prop1)).unwrap();
        assert!(r.passed);
        let s = r.suite(SuiteKind::Prop1).unwrap();
        assert_eq!(s.counts.disagree, 0);
        for f in &s.functions {
            assert_eq!(f.counts.total(), 17);
            assert_eq!(f.metrics["solutions"], json!([[0.0]]));
        }
    }

    #[test]
    fn neg_abs_thm3_run_passes() {
        let r = run_suite(&quick(&["neg_abs"], SuiteKind::Thm3)).unwrap();
        assert!(r.passed);
        let f = &r.suite(SuiteKind::Thm3).unwrap().functions[0];
        assert!(f.counts.total() >= 200);
        assert_eq!(f.metrics["polar_members"], json!(0));
    }

    #[test]
    fn explain_square() {
        let c = RunConfig::default();
        let e = explain(&c, "square", &Vector::scalar(0.0), Some(&Vector::scalar(0.0))).unwrap();
        assert!(e.iar.solution && e.minty_subderivative.solution);
        assert!(e.convex_membership.unwrap().contains);
        assert!(e.clarke_membership.unwrap().contains);
        assert!(e.polar.unwrap().related);
        assert!(e.polar_via_iar.unwrap().holds);

        let e = explain(&c, "square", &Vector::scalar(0.0), Some(&Vector::scalar(1.0))).unwrap();
        assert!(!e.polar.as_ref().unwrap().related);
        let v = e.polar_via_iar.unwrap();
        assert!(!v.holds);
        match v.witness {
            Some(Witness::Ray { y, .. }) => assert!((y[0] - 0.5).abs() < 0.1),
            w => panic!("{w:?}"),
        }
        let (wy, _) = e.polar.unwrap().witness.unwrap();
        assert!(wy[0] > 0.0 && wy[0] < 0.6);

        let e = explain(&c, "abs", &Vector::scalar(0.0), None).unwrap();
        assert!(e.minty_subderivative.solution && e.iar.solution);
    }

    #[test]
    fn config_parses_with_defaults() {
        let c: RunConfig = serde_json::from_value(json!({"functions": ["abs"], "suites": ["cdd"]})).unwrap();
        assert_eq!(c.resolution_1d, 65);
        assert!(serde_json::from_value::<RunConfig>(json!({"colour": 1})).is_err());
    }
}
