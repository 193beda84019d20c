use proptest::prelude::*;
use varpolar_core::subdifferential::GraphOptions;
use varpolar_core::{
    clarke_directional, is_monotone, iar_check, lookup, lower_dini, polar_of_sample, sample_subdiff_graph,
    ClarkeParams, GraphSample, GraphSource, LiminfScheme, Region, Vector, FUNCTION_IDS,
};

fn id_strategy() -> impl Strategy<Value = &'static str> {
    prop::sample::select(FUNCTION_IDS.to_vec())
}

fn point_in(f: &varpolar_core::FunctionOracle, u: &[f64]) -> Vector {
    let (lo, hi) = f.meta.default_region.bounds();
    Vector::new((0..f.dim()).map(|i| lo[i] + u[i] * (hi[i] - lo[i])).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn power_of_two_scaling_is_exact(id in id_strategy(), u in prop::collection::vec(0.0..1.0f64, 2),
                                     d in prop::collection::vec(-1.0..1.0f64, 2), k in -3i32..=3) {
        let f = lookup(id).unwrap();
        let x = point_in(&f, &u);
        prop_assume!(f.eval(&x).is_finite());
        let d = Vector::new(d[..f.dim()].to_vec());
        let sc = LiminfScheme::default();
        let tau = 2f64.powi(k);
        let a = lower_dini(&f, &x, &d.scale(tau), &sc).unwrap().value;
        let b = lower_dini(&f, &x, &d, &sc).unwrap().value.scale_pos(tau);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn lower_dini_below_clarke(id in id_strategy(), u in prop::collection::vec(0.0..1.0f64, 2),
                               d in prop::collection::vec(-1.0..1.0f64, 2)) {
        let f = lookup(id).unwrap();
        let x = point_in(&f, &u);
        prop_assume!(f.eval(&x).is_finite());
        let d = Vector::new(d[..f.dim()].to_vec());
        let lo = lower_dini(&f, &x, &d, &LiminfScheme::default()).unwrap().value;
        let up = clarke_directional(&f, &x, &d, &ClarkeParams::default()).unwrap().value;
        prop_assert!(lo.le_tol(up, 1e-6), "{} > {}", lo, up);
    }

    #[test]
    fn lower_dini_matches_exact_away_from_kinks(id in id_strategy(), u in prop::collection::vec(0.01..0.99f64, 2),
                                                d in prop::collection::vec(-1.0..1.0f64, 2)) {
        let f = lookup(id).unwrap();
        let x = point_in(&f, &u);
        prop_assume!(f.eval(&x).is_finite());
        let d = Vector::new(d[..f.dim()].to_vec());
        let est = lower_dini(&f, &x, &d, &LiminfScheme::default()).unwrap().value;
        let exact = f.exact_subderivative(&x, &d).unwrap();
        prop_assert!(est == exact || est.abs_diff(exact).unwrap_or(f64::INFINITY) < 1e-4, "{} vs {}", est, exact);
    }

    #[test]
    fn convex_graph_subsets_are_monotone(keep in prop::collection::vec(any::<bool>(), 33), id in prop::sample::select(vec!["abs", "square", "relu", "ind_halfline"])) {
        let f = lookup(id).unwrap();
        let g = sample_subdiff_graph(&f, &Region::interval(-2.0, 2.0), 11, GraphSource::Exact, &GraphOptions::default()).unwrap();
        let idx: Vec<usize> = (0..g.sample.len()).filter(|&i| keep[i % keep.len()]).collect();
        prop_assert!(is_monotone(&g.sample.select(&idx)).related);
    }

    #[test]
    fn shrinking_the_graph_grows_the_polar(keep in prop::collection::vec(any::<bool>(), 40)) {
        let f = lookup("twowell").unwrap();
        let g = sample_subdiff_graph(&f, &Region::interval(-1.0, 3.0), 9, GraphSource::ClarkeNumeric, &GraphOptions::default()).unwrap();
        let idx: Vec<usize> = (0..g.sample.len()).filter(|&i| keep[i % keep.len()]).collect();
        let small = g.sample.select(&idx);
        let pts: Vec<Vector> = Region::interval(-1.0, 3.0).grid(9).unwrap();
        let covs: Vec<Vector> = Region::interval(-2.0, 2.0).grid(9).unwrap();
        let c = GraphSample::product(&pts, &covs).unwrap();
        prop_assert!(polar_of_sample(&g.sample, &c).is_subset_of(&polar_of_sample(&small, &c)));
    }

    #[test]
    fn larger_probe_regions_never_create_solutions(x in -0.9..0.9f64, k in 0usize..16) {
        let f = lookup("twowell").unwrap();
        let xb = Vector::scalar(x);
        // both grids have spacing 0.125, so the small one is a subset
        let small = iar_check(&f, &xb, &Region::interval(-1.0, 1.0), 17, 16).unwrap();
        let big = iar_check(&f, &xb, &Region::interval(-1.0, 1.0 + 0.125 * k as f64), 17 + k, 16).unwrap();
        prop_assert!(big.residual >= small.residual);
        prop_assert!(!(big.solution && !small.solution));
    }
}
