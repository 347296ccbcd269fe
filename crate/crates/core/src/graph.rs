//! Dense weighted undirected graphs and their edge distribution.
//!
//! A network of `n` nodes is held as a dense symmetric weight matrix. Node
//! identity is positional; labels travel alongside as plain metadata.
//! Normalizing the weights yields [`NormalizedAdjacency`], the joint
//! distribution of the endpoints of a randomly drawn (directed) edge, whose
//! row sums are the [`NodeMarginals`].

use std::io::{Read, Write};

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::format::fmt_g17;
use crate::sum::{sum, CompensatedSum};

const SYMMETRY_TOL: f64 = 1e-12;
const TOTAL_TOL: f64 = 1e-12;

/// Raw symmetric non-negative edge weights, zero pairs stored explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeightMatrix {
    weights: Array2<f64>,
}

impl EdgeWeightMatrix {
    /// Validates squareness, exact symmetry, finiteness, non-negativity and
    /// the presence of at least one positive weight.
    pub fn new(weights: Array2<f64>) -> Result<Self> {
        let (rows, cols) = weights.dim();
        if rows != cols {
            return Err(Error::InvalidWeights(format!(
                "matrix is {rows}x{cols}, expected square"
            )));
        }
        if rows == 0 {
            return Err(Error::InvalidWeights("matrix is empty".into()));
        }
        let mut any_positive = false;
        for ((i, j), &w) in weights.indexed_iter() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidWeights(format!(
                    "weight ({i},{j}) = {w} is not a finite non-negative number"
                )));
            }
            if w != weights[[j, i]] {
                return Err(Error::InvalidWeights(format!(
                    "weights ({i},{j}) and ({j},{i}) differ"
                )));
            }
            any_positive |= w > 0.0;
        }
        if !any_positive {
            return Err(Error::AllZeroWeights);
        }
        Ok(Self { weights })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        Self::new(Array2::from_shape_fn((n, n), |(i, j)| f(i, j)))
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights[[i, j]]
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.weights
    }
}

/// Symmetric probabilities over ordered node pairs, summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency {
    probabilities: Array2<f64>,
}

impl NormalizedAdjacency {
    /// Wraps an already-normalized matrix after checking every invariant:
    /// square, symmetric and non-negative, with a total of one (within
    /// 1e-12). Row and column marginals then coincide.
    pub fn from_probabilities(probabilities: Array2<f64>) -> Result<Self> {
        let (rows, cols) = probabilities.dim();
        if rows != cols || rows == 0 {
            return Err(Error::InvalidAdjacency(format!(
                "matrix is {rows}x{cols}, expected non-empty square"
            )));
        }
        for ((i, j), &p) in probabilities.indexed_iter() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidAdjacency(format!(
                    "entry ({i},{j}) = {p} is not a probability"
                )));
            }
            if (p - probabilities[[j, i]]).abs() > SYMMETRY_TOL {
                return Err(Error::InvalidAdjacency(format!(
                    "entries ({i},{j}) and ({j},{i}) differ"
                )));
            }
        }
        let total = sum(probabilities.iter().copied());
        if (total - 1.0).abs() > TOTAL_TOL {
            return Err(Error::InvalidAdjacency(format!(
                "ordered-pair total is {total}, expected 1"
            )));
        }
        Ok(Self { probabilities })
    }

    pub fn n(&self) -> usize {
        self.probabilities.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.probabilities[[i, j]]
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.probabilities
    }

    pub fn marginals(&self) -> NodeMarginals {
        node_marginals(self)
    }
}

/// Probability that a random edge endpoint is node `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeMarginals {
    k: Array1<f64>,
}

impl NodeMarginals {
    pub fn as_array(&self) -> &Array1<f64> {
        &self.k
    }

    pub fn get(&self, i: usize) -> f64 {
        self.k[i]
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }
}

/// Diagonal weights are divided by `T = Σ_{i≤j} w_ij`, off-diagonal weights
/// by `2T`, so every undirected edge splits its mass over both directions.
pub fn normalize_adjacency(weights: &EdgeWeightMatrix) -> Result<NormalizedAdjacency> {
    let w = weights.as_array();
    let n = weights.n();
    let mut total = CompensatedSum::new();
    for i in 0..n {
        for j in i..n {
            total.add(w[[i, j]]);
        }
    }
    let total = total.value();
    if total <= 0.0 {
        return Err(Error::AllZeroWeights);
    }
    let probabilities = Array2::from_shape_fn((n, n), |(i, j)| {
        if i == j {
            w[[i, j]] / total
        } else {
            w[[i, j]] / (2.0 * total)
        }
    });
    Ok(NormalizedAdjacency { probabilities })
}

pub fn node_marginals(adjacency: &NormalizedAdjacency) -> NodeMarginals {
    let k = adjacency
        .as_array()
        .rows()
        .into_iter()
        .map(|row| sum(row.iter().copied()))
        .collect();
    NodeMarginals { k }
}

/// Writes `src,dst,weight,normalized_weight`, one row per unordered pair
/// (`src <= dst` by position) with nonzero weight. `normalized_weight` is
/// the matrix entry `A[src][dst]`.
pub fn write_edge_list<W: Write>(
    out: W,
    labels: &[String],
    weights: &EdgeWeightMatrix,
    adjacency: &NormalizedAdjacency,
) -> Result<()> {
    let n = weights.n();
    if labels.len() != n || adjacency.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: labels.len().min(adjacency.n()),
        });
    }
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["src", "dst", "weight", "normalized_weight"])?;
    for i in 0..n {
        for j in i..n {
            let w = weights.get(i, j);
            if w != 0.0 {
                writer.write_record([
                    labels[i].as_str(),
                    labels[j].as_str(),
                    &fmt_g17(w),
                    &fmt_g17(adjacency.get(i, j)),
                ])?;
            }
        }
    }
    writer.flush()?;
    Ok(())
}

/// Reads an edge list written by [`write_edge_list`] back into a weight
/// matrix over the given node labels. Pairs absent from the file are zero.
pub fn read_edge_list<R: Read>(input: R, labels: &[String]) -> Result<EdgeWeightMatrix> {
    let index: std::collections::HashMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let n = labels.len();
    let mut w = Array2::<f64>::zeros((n, n));
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::input(Some(1), format!("edge list is missing column {name:?}")))
    };
    let (src, dst, weight) = (column("src")?, column("dst")?, column("weight")?);
    for row in reader.records() {
        let row = row?;
        let line = row.position().map(|p| p.line());
        let node = |field: usize| -> Result<usize> {
            let code = row.get(field).unwrap_or_default();
            index
                .get(code)
                .copied()
                .ok_or_else(|| Error::input(line, format!("edge references unknown node {code:?}")))
        };
        let (i, j) = (node(src)?, node(dst)?);
        let value: f64 = row
            .get(weight)
            .unwrap_or_default()
            .trim()
            .parse()
            .map_err(|_| Error::input(line, "weight is not a number"))?;
        w[[i, j]] = value;
        w[[j, i]] = value;
    }
    EdgeWeightMatrix::new(w).map_err(|e| match e {
        Error::InvalidWeights(m) => Error::input(None, m),
        other => other,
    })
}
