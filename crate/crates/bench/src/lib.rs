//! Fixed workloads shared by the benchmarks.

use varpolar_core::{lookup, FunctionOracle, GraphSample, Region, Vector};

pub fn oracle(id: &str) -> FunctionOracle {
    lookup(id).expect("library id")
}

/// Interior points of the default region crossed with the covector probe grid.
pub fn polar_candidates(f: &FunctionOracle, resolution: usize) -> GraphSample {
    let pts = f.meta.default_region.interior_grid(resolution).expect("valid region");
    let cov = f.meta.covector_probe.grid(f.meta.covector_resolution).expect("valid probe");
    GraphSample::product(&pts, &cov).expect("same dimension")
}

pub fn point(coords: &[f64]) -> Vector {
    Vector::new(coords.to_vec())
}

pub fn region(f: &FunctionOracle) -> Region {
    f.meta.default_region.clone()
}
