//! Library routes checked against independent brute-force computations.

use varpolar_core::minty::CrossParams;
use varpolar_core::region::linspace;
use varpolar_core::subdifferential::GraphOptions;
use varpolar_core::{
    cross_validate, lookup, polar_of_sample, sample_subdiff_graph, Agreement, CovectorSampling, FunctionOracle,
    GraphSample, GraphSource, Region, Vector,
};

const ONE_D: [&str; 7] = ["abs", "square", "neg_abs", "ind_halfline", "ind_origin", "relu", "twowell"];

/// Increase along rays by plain loops over the same grids.
fn brute_iar(f: &FunctionOracle, xbar: f64, probes: &[f64], ts: &[f64]) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for &y in probes {
        let fy = f.eval(&[y]).to_f64();
        if !fy.is_finite() {
            continue;
        }
        for &t in ts {
            worst = worst.max(f.eval(&[y + t * (xbar - y)]).to_f64() - fy);
        }
    }
    worst
}

/// Minty residual of subderivative type from the exact subderivative.
fn exact_minty(f: &FunctionOracle, xbar: f64, probes: &[f64]) -> f64 {
    probes
        .iter()
        .filter(|&&y| f.eval(&[y]).is_finite())
        .map(|&y| f.exact_subderivative(&[y], &[xbar - y]).unwrap().to_f64())
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn one_dimensional_rows_match_brute_force() {
    for id in ONE_D {
        let f = lookup(id).unwrap();
        let region = f.meta.default_region.clone();
        let params = CrossParams::new(33);
        let report = cross_validate(&f, &region, &params).unwrap();
        let (lo, hi) = region.bounds();
        let probes = linspace(lo[0], hi[0], params.probe_resolution());
        let ts = linspace(0.0, 1.0, params.t_resolution);
        for row in &report.rows {
            let x = row.xbar[0];
            let iar = brute_iar(&f, x, &probes, &ts);
            assert_eq!(row.iar.residual.to_f64(), iar, "{id} iar at {x}");
            let minty = exact_minty(&f, x, &probes);
            let close = (row.minty_subderivative.residual.to_f64() - minty).abs() < 1e-4
                || (minty.is_infinite() && row.minty_subderivative.residual.is_inf());
            assert!(close, "{id} minty at {x}: {} vs {minty}", row.minty_subderivative.residual);
            // outside the band the exact Minty residual and the ray check agree
            if minty.abs() > 1e-3 && iar.abs() > 1e-3 {
                assert_eq!(minty <= 1e-6, iar <= 1e-6, "{id} at {x}");
            }
        }
        assert_eq!(report.hard_disagreements(), 0, "{id}");
    }
}

#[test]
fn analytic_solution_sets() {
    // argmin of a convex function is its Minty solution set
    let cases: [(&str, &[f64]); 4] = [("abs", &[0.0]), ("square", &[0.0]), ("ind_origin", &[0.0]), ("neg_abs", &[])];
    for (id, want) in cases {
        let f = lookup(id).unwrap();
        let r = cross_validate(&f, &f.meta.default_region, &CrossParams::new(17)).unwrap();
        let got: Vec<f64> = r.rows.iter().filter(|row| row.iar.solution).map(|row| row.xbar[0]).collect();
        assert_eq!(got, want, "{id}");
        for row in &r.rows {
            assert_eq!(row.prop1, Agreement::Agree, "{id} at {}", row.xbar);
        }
    }
    // relu: every point of [-2, 0] minimises
    let f = lookup("relu").unwrap();
    let r = cross_validate(&f, &f.meta.default_region, &CrossParams::new(17)).unwrap();
    let got: Vec<f64> = r.rows.iter().filter(|row| row.iar.solution).map(|row| row.xbar[0]).collect();
    assert_eq!(got, linspace(-2.0, 0.0, 9));
    // twowell: not even the global minimiser 0 solves, since the ray from
    // y = 2 to 0 climbs over the kink at 1.5
    let f = lookup("twowell").unwrap();
    let r = cross_validate(&f, &f.meta.default_region, &CrossParams::new(17)).unwrap();
    assert!(r.rows.iter().all(|row| !row.iar.solution && !row.minty_subderivative.solution));
}

fn dense(f: &FunctionOracle, res: usize, fill: f64) -> GraphSample {
    let opts = GraphOptions {
        covectors: CovectorSampling { fill: Some(fill), ..Default::default() },
        ..Default::default()
    };
    sample_subdiff_graph(f, &f.meta.default_region, res, GraphSource::Exact, &opts).unwrap().sample
}

#[test]
fn convex_polars_equal_exact_graphs() {
    // a convex subdifferential is maximal monotone: its polar is itself
    for (id, cres) in [("abs", 17), ("square", 17), ("relu", 17), ("norm2d", 9), ("mixed2d", 9)] {
        let f = lookup(id).unwrap();
        let region = &f.meta.default_region;
        let pts = region.interior_grid(cres).unwrap();
        let covs = f.meta.covector_probe.grid(f.meta.covector_resolution).unwrap();
        let cands = GraphSample::product(&pts, &covs).unwrap();
        let (lo, hi) = f.meta.covector_probe.bounds();
        let h = (hi[0] - lo[0]) / (f.meta.covector_resolution - 1) as f64;
        let polar = polar_of_sample(&dense(&f, 4 * (cres - 1) + 1, h / 4.0), &cands);
        for (x, xs) in cands.iter() {
            let exact = f.exact_subdifferential(x).unwrap().contains(xs, 1e-9);
            assert_eq!(polar.contains(x, xs), exact, "{id} at ({x}, {xs})");
        }
    }
}

#[test]
fn user_defined_function_goes_through_every_route() {
    // f(x) = |x| + x^2, minimised at 0 with subdifferential [-1, 1] there
    let f = FunctionOracle::new("abs_plus_square", 1, |x| varpolar_core::ExtReal::finite(x[0].abs() + x[0] * x[0]))
        .convex(true)
        .region(Region::interval(-1.0, 1.0));
    let r = cross_validate(&f, &Region::interval(-1.0, 1.0), &CrossParams::new(17)).unwrap();
    assert_eq!(r.graph_source, GraphSource::ClarkeNumeric);
    assert_eq!(r.hard_disagreements(), 0);
    let sols: Vec<Vector> = r.rows.iter().filter(|row| row.iar.solution).map(|row| row.xbar.clone()).collect();
    assert_eq!(sols, vec![Vector::scalar(0.0)]);
}
