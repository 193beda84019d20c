use std::fmt;
use std::ops::{Deref, Index};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// A point or covector in R^n. Pairing is the Euclidean dot product.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(Vec<f64>);

impl Vector {
    /// Panics on empty or non-finite input; use [`Vector::try_new`] for untrusted data.
    pub fn new(coords: Vec<f64>) -> Self {
        Self::try_new(coords).expect("vector coordinates must be finite and nonempty")
    }

    pub fn try_new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter("vector of dimension 0".into()));
        }
        if let Some(c) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite coordinate {c}")));
        }
        Ok(Vector(coords))
    }

    pub fn scalar(x: f64) -> Self {
        Vector::new(vec![x])
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[axis] = 1.0;
        Vector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.0, other)
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn add(&self, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, s: f64) -> Vector {
        Vector(self.0.iter().map(|a| a * s).collect())
    }

    /// `self + s * dir`
    pub fn axpy(&self, s: f64, dir: &Vector) -> Vector {
        Vector(self.0.iter().zip(&dir.0).map(|(a, d)| a + s * d).collect())
    }

    pub fn dist(&self, other: &Vector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    pub fn same_dim(&self, dim: usize) -> Result<()> {
        check_dim(dim, self.dim())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Writes `base + s * dir` into `out`, reusing its allocation.
pub(crate) fn axpy_into(out: &mut Vec<f64>, base: &[f64], s: f64, dir: &[f64]) {
    out.clear();
    out.extend(base.iter().zip(dir).map(|(b, d)| b + s * d));
}

impl Deref for Vector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector::new(v)
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

/// Deterministic grid of unit directions on the sphere of R^dim with at least
/// `count` members. In 1-D the sphere is `{-1, +1}`. In 2-D the angles are
/// equally spaced starting at 0 with a count rounded up to a multiple of 4,
/// so the coordinate axes are always present. In 3-D the six axis directions
/// come first, followed by a Fibonacci lattice.
pub fn sphere_directions(dim: usize, count: usize) -> Vec<Vector> {
    match dim {
        1 => vec![Vector::scalar(1.0), Vector::scalar(-1.0)],
        2 => {
            let m = count.max(4).div_ceil(4) * 4;
            (0..m)
                .map(|k| {
                    let a = std::f64::consts::TAU * k as f64 / m as f64;
                    // snap the axis directions so they are exact
                    let (s, c) = match (4 * k) % m {
                        0 => match (4 * k) / m {
                            0 => (0.0, 1.0),
                            1 => (1.0, 0.0),
                            2 => (0.0, -1.0),
                            _ => (-1.0, 0.0),
                        },
                        _ => a.sin_cos(),
                    };
                    Vector(vec![c, s])
                })
                .collect()
        }
        _ => {
            let mut dirs: Vec<Vector> = Vec::new();
            for axis in 0..dim {
                dirs.push(Vector::unit(dim, axis));
                dirs.push(Vector::unit(dim, axis).scale(-1.0));
            }
            if dim == 3 {
                let extra = count.saturating_sub(dirs.len());
                let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
                for k in 0..extra {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / extra as f64;
                    let r = (1.0 - z * z).sqrt();
                    let th = golden * k as f64;
                    dirs.push(Vector(vec![r * th.cos(), r * th.sin(), z]));
                }
            }
            dirs
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        assert!(Vector::try_new(vec![1.0, f64::INFINITY]).is_err());
        assert!(Vector::try_new(vec![]).is_err());
    }

    #[test]
    fn sphere_grid_contains_axes() {
        let dirs = sphere_directions(2, 6);
        assert_eq!(dirs.len(), 8);
        for axis in [vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0]] {
            assert!(dirs.iter().any(|d| d.coords() == axis.as_slice()));
        }
        for d in &dirs {
            assert!((d.norm() - 1.0).abs() < 1e-15);
        }
        assert!(sphere_directions(3, 20).len() >= 20);
        assert_eq!(sphere_directions(1, 10).len(), 2);
    }
}
