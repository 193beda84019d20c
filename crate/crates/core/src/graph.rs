//! Finite samples of set-valued operators `T ⊂ R^n x R^n` and their CSV form.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::region::Region;
use crate::vector::Vector;

/// Finite list of distinct `(point, covector)` pairs of a common dimension.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct GraphSample {
    dim: usize,
    pairs: Vec<(Vector, Vector)>,
    #[serde(skip)]
    seen: HashSet<Vec<u64>>,
}

fn key(x: &[f64], xs: &[f64]) -> Vec<u64> {
    // +0.0 == -0.0 for duplicate detection
    x.iter().chain(xs).map(|v| (v + 0.0).to_bits()).collect()
}

impl GraphSample {
    pub fn new(dim: usize) -> Self {
        GraphSample { dim, pairs: Vec::new(), seen: HashSet::new() }
    }

    /// Builds a sample, dropping duplicate pairs.
    pub fn from_pairs(dim: usize, pairs: impl IntoIterator<Item = (Vector, Vector)>) -> Result<Self> {
        let mut g = GraphSample::new(dim);
        for (x, xs) in pairs {
            g.push(x, xs)?;
        }
        Ok(g)
    }

    /// Inserts a pair; returns `false` if it was already present.
    pub fn push(&mut self, x: Vector, xstar: Vector) -> Result<bool> {
        x.same_dim(self.dim)?;
        xstar.same_dim(self.dim)?;
        if self.seen.insert(key(&x, &xstar)) {
            self.pairs.push((x, xstar));
            Ok(true)
        } else {
            Ok(false)
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(Vector, Vector)] {
        &self.pairs
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Vector, Vector)> {
        self.pairs.iter()
    }

    pub fn contains(&self, x: &[f64], xstar: &[f64]) -> bool {
        self.seen.contains(&key(x, xstar))
    }

    /// Every pair of `self` is in `other`.
    pub fn is_subset_of(&self, other: &GraphSample) -> bool {
        self.pairs.iter().all(|(x, s)| other.contains(x, s))
    }

    /// Subsample keeping the pairs at the given indices (in order).
    pub fn select(&self, indices: &[usize]) -> GraphSample {
        let mut g = GraphSample::new(self.dim);
        for &i in indices {
            let (x, s) = &self.pairs[i];
            g.push(x.clone(), s.clone()).expect("same dimension");
        }
        g
    }

    /// Cartesian product of points and covectors.
    pub fn product(points: &[Vector], covectors: &[Vector]) -> Result<Self> {
        let dim = points.first().map_or(0, |p| p.dim());
        GraphSample::from_pairs(
            dim,
            points.iter().flat_map(|p| covectors.iter().map(move |c| (p.clone(), c.clone()))),
        )
    }

    /// Writes the table: header `x_1..x_n,xstar_1..xstar_n`, one row per pair.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut header: Vec<String> = (1..=self.dim).map(|i| format!("x_{i}")).collect();
        header.extend((1..=self.dim).map(|i| format!("xstar_{i}")));
        writeln!(w, "{}", header.join(","))?;
        for (x, s) in &self.pairs {
            let row: Vec<String> = x.iter().chain(s.iter()).map(|v| format!("{v}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::MalformedTable("missing header".into()))?
            .map_err(|e| Error::MalformedTable(e.to_string()))?;
        let cols: Vec<&str> = header.trim().split(',').collect();
        if !cols.len().is_multiple_of(2) || cols.is_empty() {
            return Err(Error::MalformedTable(format!("odd column count {}", cols.len())));
        }
        let dim = cols.len() / 2;
        for (i, c) in cols.iter().enumerate() {
            let want = if i < dim { format!("x_{}", i + 1) } else { format!("xstar_{}", i - dim + 1) };
            if *c != want {
                return Err(Error::MalformedTable(format!("column {i} is `{c}`, expected `{want}`")));
            }
        }
        let mut g = GraphSample::new(dim);
        for (n, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::MalformedTable(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .trim()
                .split(',')
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::MalformedTable(format!("row {}: {e}", n + 1)))?;
            if vals.len() != 2 * dim {
                return Err(Error::MalformedTable(format!("row {} has {} fields", n + 1, vals.len())));
            }
            let x = Vector::try_new(vals[..dim].to_vec())?;
            let s = Vector::try_new(vals[dim..].to_vec())?;
            g.push(x, s)?;
        }
        Ok(g)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphSource {
    /// Representatives of the exact convex subdifferential.
    Exact,
    /// Covector grid filtered by numerical Clarke membership.
    ClarkeNumeric,
}

impl std::str::FromStr for GraphSource {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(GraphSource::Exact),
            "clarke-numeric" | "clarke" => Ok(GraphSource::ClarkeNumeric),
            _ => Err(Error::InvalidParameter(format!("unknown graph source `{s}`"))),
        }
    }
}

/// Sidecar record written next to a graph table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphMeta {
    pub function_id: String,
    pub region: Region,
    pub resolution: usize,
    pub source: GraphSource,
    pub covector_half_width: f64,
    /// Some covector set was unbounded and got clipped to the truncation box.
    pub truncated: bool,
    pub pairs: usize,
}

/// A graph sample together with per-pair clipping flags and metadata.
#[derive(Clone, Debug)]
pub struct SampledGraph {
    pub sample: GraphSample,
    /// `clipped[i]` is set when pair `i` sits on the truncation box because
    /// its covector set is unbounded there.
    pub clipped: Vec<bool>,
    pub meta: GraphMeta,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64) -> Vector {
        Vector::scalar(x)
    }

    #[test]
    fn duplicates_are_dropped() {
        let g = GraphSample::from_pairs(1, vec![(v(0.0), v(1.0)), (v(0.0), v(1.0)), (v(-0.0), v(1.0))]).unwrap();
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn dimension_is_enforced() {
        let mut g = GraphSample::new(2);
        assert!(g.push(v(0.0), v(1.0)).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let g = GraphSample::from_pairs(
            2,
            vec![
                (Vector::new(vec![0.5, -1.0]), Vector::new(vec![1.0, 0.1])),
                (Vector::new(vec![0.0, 0.0]), Vector::new(vec![-0.25, 3.0])),
            ],
        )
        .unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x_1,x_2,xstar_1,xstar_2\n0.5,-1,1,0.1\n"));
        let back = GraphSample::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.pairs(), g.pairs());
    }

    #[test]
    fn csv_rejects_bad_header() {
        assert!(GraphSample::read_csv("a,b\n1,2\n".as_bytes()).is_err());
        assert!(GraphSample::read_csv("x_1,xstar_1\n1\n".as_bytes()).is_err());
    }
}
