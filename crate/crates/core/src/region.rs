//! Convex sampling regions in R^n.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vector::{norm, Vector};

/// Default half-width of the box that stands in for all of R^n.
pub const DEFAULT_HALF_WIDTH: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    /// All of R^n, truncated to `[-half_width, half_width]^n`.
    FullSpace { dim: usize, half_width: f64 },
}

impl Region {
    pub fn interval(lo: f64, hi: f64) -> Self {
        Region::Box { lo: vec![lo], hi: vec![hi] }
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        Region::Box { lo: vec![lo; dim], hi: vec![hi; dim] }
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        Region::Ball { center, radius }
    }

    pub fn full_space(dim: usize) -> Self {
        Region::FullSpace { dim, half_width: DEFAULT_HALF_WIDTH }
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Box { lo, .. } => lo.len(),
            Region::Ball { center, .. } => center.len(),
            Region::FullSpace { dim, .. } => *dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidRegion(m));
        match self {
            Region::Box { lo, hi } => {
                if lo.is_empty() || lo.len() != hi.len() {
                    return bad(format!("box bounds of lengths {} and {}", lo.len(), hi.len()));
                }
                for (a, b) in lo.iter().zip(hi) {
                    if !(a.is_finite() && b.is_finite() && a < b) {
                        return bad(format!("axis interval [{a}, {b}] is empty or unbounded"));
                    }
                }
            }
            Region::Ball { center, radius } => {
                if center.is_empty() || center.iter().any(|c| !c.is_finite()) {
                    return bad("ball center must be finite and nonempty".into());
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    return bad(format!("ball radius {radius} must be positive"));
                }
            }
            Region::FullSpace { dim, half_width } => {
                if *dim == 0 {
                    return bad("dimension 0".into());
                }
                if !(half_width.is_finite() && *half_width > 0.0) {
                    return bad(format!("truncation half-width {half_width} must be positive"));
                }
            }
        }
        Ok(())
    }

    /// Axis-aligned bounding box `(lo, hi)`.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Region::Box { lo, hi } => (lo.clone(), hi.clone()),
            Region::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            Region::FullSpace { dim, half_width } => (vec![-half_width; *dim], vec![*half_width; *dim]),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            Region::Ball { center, radius } => dist(x, center) <= *radius,
            _ => {
                let (lo, hi) = self.bounds();
                x.iter().zip(lo.iter().zip(&hi)).all(|(v, (a, b))| *a <= *v && *v <= *b)
            }
        }
    }

    /// Membership in the topological interior.
    pub fn contains_interior(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            Region::Ball { center, radius } => dist(x, center) < *radius,
            _ => {
                let (lo, hi) = self.bounds();
                x.iter().zip(lo.iter().zip(&hi)).all(|(v, (a, b))| *a < *v && *v < *b)
            }
        }
    }

    /// Per-axis grid spacing at the given resolution.
    pub fn spacing(&self, resolution: usize) -> f64 {
        let (lo, hi) = self.bounds();
        lo.iter()
            .zip(&hi)
            .map(|(a, b)| (b - a) / (resolution.max(2) - 1) as f64)
            .fold(0.0, f64::max)
    }

    /// Deterministic tensor grid of member points, first axis slowest.
    pub fn grid(&self, resolution: usize) -> Result<Vec<Vector>> {
        self.validate()?;
        if resolution < 2 {
            return Err(Error::InvalidParameter(format!("resolution {resolution} < 2")));
        }
        let (lo, hi) = self.bounds();
        let axes: Vec<Vec<f64>> = lo
            .iter()
            .zip(&hi)
            .map(|(&a, &b)| linspace(a, b, resolution))
            .collect();
        let mut out = Vec::new();
        let mut idx = vec![0usize; axes.len()];
        loop {
            let p: Vec<f64> = idx.iter().zip(&axes).map(|(&i, ax)| ax[i]).collect();
            if self.contains(&p) {
                out.push(Vector::new(p));
            }
            // odometer increment, last axis fastest
            let mut k = axes.len();
            loop {
                if k == 0 {
                    return Ok(out);
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < resolution {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    /// Grid points lying in the interior; models an open convex set.
    pub fn interior_grid(&self, resolution: usize) -> Result<Vec<Vector>> {
        Ok(self
            .grid(resolution)?
            .into_iter()
            .filter(|p| self.contains_interior(p))
            .collect())
    }

    /// Short human-readable description, used in reports.
    pub fn describe(&self) -> String {
        match self {
            Region::Box { lo, hi } => {
                let parts: Vec<String> = lo.iter().zip(hi).map(|(a, b)| format!("[{a}, {b}]")).collect();
                parts.join(" x ")
            }
            Region::Ball { center, radius } => format!("ball(center={center:?}, radius={radius})"),
            Region::FullSpace { dim, half_width } => {
                format!("R^{dim} truncated to [-{half_width}, {half_width}]^{dim}")
            }
        }
    }
}

/// `n` equally spaced points from `a` to `b`, both endpoints exact.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let last = (n - 1) as f64;
    (0..n)
        .map(|k| {
            if k == n - 1 {
                b
            } else {
                a + (b - a) * (k as f64 / last)
            }
        })
        .collect()
}

fn dist(x: &[f64], c: &[f64]) -> f64 {
    let d: Vec<f64> = x.iter().zip(c).map(|(a, b)| a - b).collect();
    norm(&d)
}

/// Samples `region` at `resolution` points per axis.
pub fn sample_region(region: &Region, resolution: usize) -> Result<Vec<Vector>> {
    region.grid(resolution)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(points: &[Vector]) -> Vec<Vec<f64>> {
        points.iter().map(|p| p.coords().to_vec()).collect()
    }

    #[test]
    fn unit_interval_three_points() {
        let g = sample_region(&Region::interval(0.0, 1.0), 3).unwrap();
        assert_eq!(flat(&g), vec![vec![0.0], vec![0.5], vec![1.0]]);
    }

    #[test]
    fn square_corners() {
        let g = sample_region(&Region::cube(2, -1.0, 1.0), 2).unwrap();
        assert_eq!(
            flat(&g),
            vec![vec![-1.0, -1.0], vec![-1.0, 1.0], vec![1.0, -1.0], vec![1.0, 1.0]]
        );
    }

    #[test]
    fn ball_in_one_dimension() {
        let g = sample_region(&Region::ball(vec![0.0], 1.0), 3).unwrap();
        assert_eq!(flat(&g), vec![vec![-1.0], vec![0.0], vec![1.0]]);
    }

    #[test]
    fn ball_grid_drops_corners() {
        let g = sample_region(&Region::ball(vec![0.0, 0.0], 1.0), 3).unwrap();
        assert_eq!(g.len(), 5);
        assert!(g.iter().all(|p| p.norm() <= 1.0));
    }

    #[test]
    fn full_space_uses_truncation_box() {
        let r = Region::full_space(1);
        let g = r.grid(5).unwrap();
        assert_eq!(flat(&g), vec![vec![-10.0], vec![-5.0], vec![0.0], vec![5.0], vec![10.0]]);
    }

    #[test]
    fn interior_excludes_boundary() {
        let g = Region::interval(-2.0, 2.0).interior_grid(5).unwrap();
        assert_eq!(flat(&g), vec![vec![-1.0], vec![0.0], vec![1.0]]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Region::interval(1.0, 0.0).grid(3).is_err());
        assert!(Region::interval(0.0, 1.0).grid(1).is_err());
        assert!(Region::ball(vec![0.0], -1.0).grid(3).is_err());
    }

    proptest::proptest! {
        #[test]
        fn grid_points_are_members(
            a in -5.0f64..0.0, w in 0.1f64..5.0, res in 2usize..12, r in 0.1f64..3.0
        ) {
            let b = Region::cube(2, a, a + w);
            let g = b.grid(res).unwrap();
            proptest::prop_assert_eq!(g.len(), res * res);
            proptest::prop_assert!(g.iter().all(|p| b.contains(p)));
            let ball = Region::ball(vec![a, 0.0], r);
            let gb = ball.grid(res).unwrap();
            proptest::prop_assert!(gb.len() <= res * res);
            proptest::prop_assert!(gb.iter().all(|p| ball.contains(p)));
        }
    }
}
