//! Assortativity measures over a normalized adjacency.
//!
//! The edge distribution `A` gives the joint law of the attributes `(X, Y)`
//! at the two ends of a randomly drawn edge. Scalar assortativity is the
//! Pearson correlation of `X` and `Y`; vector assortativity is their
//! distance correlation. Because `A` is symmetric, `X` and `Y` share the
//! marginal law given by the node marginals `k`.
//!
//! [`vector_assortativity`] uses the closed form, where the only fourth-order
//! term is the inner product `⟨A, B·A·B⟩` of the edge distribution with the
//! distance matrix sandwich, so the cost is `O(n³)`. [`dcor_oracle`] evaluates
//! the definition term by term in `O(n⁴)` and exists to audit the closed form.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::graph::{NodeMarginals, NormalizedAdjacency};
use crate::sum::{sum, CompensatedSum};

/// Rounding can leave `f1`/`f2` slightly negative. Values down to this
/// fraction of the largest contributing term are clamped to zero; anything
/// more negative is a numerical failure.
pub const NEGATIVE_CLAMP_RELATIVE: f64 = 1e-12;

/// One finite real attribute per node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarAttributes(Array1<f64>);

impl ScalarAttributes {
    pub fn new(values: impl Into<Array1<f64>>) -> Result<Self> {
        let values = values.into();
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidAttributes(format!(
                "attribute of node {i} is not finite"
            )));
        }
        Ok(Self(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_array(&self) -> &Array1<f64> {
        &self.0
    }
}

/// `n × d` matrix of finite node attributes, one row per node.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeMatrix(Array2<f64>);

impl AttributeMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if values.ncols() == 0 {
            return Err(Error::InvalidAttributes(
                "attribute dimension is zero".into(),
            ));
        }
        if let Some(((i, j), _)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidAttributes(format!(
                "attribute ({i},{j}) is not finite"
            )));
        }
        Ok(Self(values))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidAttributes("rows have unequal length".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let values = Array2::from_shape_vec((rows.len(), d), flat)
            .map_err(|e| Error::InvalidAttributes(e.to_string()))?;
        Self::new(values)
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn dim(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    /// Column `j` as scalar attributes.
    pub fn column(&self, j: usize) -> ScalarAttributes {
        ScalarAttributes(self.0.column(j).to_owned())
    }
}

/// Euclidean distances between attribute rows.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseDistanceMatrix(Array2<f64>);

impl PairwiseDistanceMatrix {
    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[[i, j]]
    }
}

fn check_dims(adjacency: &NormalizedAdjacency, n: usize) -> Result<()> {
    if adjacency.n() != n {
        return Err(Error::DimensionMismatch {
            expected: adjacency.n(),
            found: n,
        });
    }
    Ok(())
}

/// True when every node carrying marginal mass has the same attribute.
fn scalar_constant_on_support(k: &NodeMarginals, x: &Array1<f64>) -> bool {
    let mut support = (0..k.len()).filter(|&i| k.get(i) > 0.0).map(|i| x[i]);
    match support.next() {
        None => true,
        Some(first) => support.all(|v| v == first),
    }
}

fn rows_constant_on_support(k: &NodeMarginals, x: &Array2<f64>) -> bool {
    let mut support = (0..k.len()).filter(|&i| k.get(i) > 0.0);
    match support.next() {
        None => true,
        Some(first) => support.all(|i| x.row(i) == x.row(first)),
    }
}

/// Weighted Pearson assortativity
/// `r = Σ_ij A_ij (x_i − x̄)(x_j − x̄) / Σ_i k_i (x_i − x̄)²` with `x̄ = Σ_i k_i x_i`.
pub fn scalar_assortativity(adjacency: &NormalizedAdjacency, x: &ScalarAttributes) -> Result<f64> {
    check_dims(adjacency, x.len())?;
    let k = adjacency.marginals();
    let x = x.as_array();
    if scalar_constant_on_support(&k, x) {
        return Err(Error::DegenerateAttribute { column: None });
    }
    let mean = sum((0..x.len()).map(|i| k.get(i) * x[i]));
    let centered: Array1<f64> = x.mapv(|v| v - mean);
    let a = adjacency.as_array();
    let mut numerator = CompensatedSum::new();
    for ((i, j), &p) in a.indexed_iter() {
        if p != 0.0 {
            numerator.add(p * centered[i] * centered[j]);
        }
    }
    let variance = sum((0..x.len()).map(|i| k.get(i) * centered[i] * centered[i]));
    if variance <= 0.0 {
        return Err(Error::DegenerateAttribute { column: None });
    }
    Ok(numerator.value() / variance)
}

/// Mean of [`scalar_assortativity`] over the attribute columns.
pub fn averaged_scalar_assortativity(
    adjacency: &NormalizedAdjacency,
    x: &AttributeMatrix,
) -> Result<f64> {
    check_dims(adjacency, x.n())?;
    let mut total = CompensatedSum::new();
    for j in 0..x.dim() {
        let r = scalar_assortativity(adjacency, &x.column(j)).map_err(|e| match e {
            Error::DegenerateAttribute { .. } => Error::DegenerateAttribute { column: Some(j) },
            other => other,
        })?;
        total.add(r);
    }
    Ok(total.value() / x.dim() as f64)
}

pub fn pairwise_distances(x: &AttributeMatrix) -> PairwiseDistanceMatrix {
    let values = x.as_array();
    let n = x.n();
    let mut b = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let d = values
                .row(i)
                .iter()
                .zip(values.row(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            b[[i, j]] = d;
            b[[j, i]] = d;
        }
    }
    PairwiseDistanceMatrix(b)
}

fn clamp_nonnegative(value: f64, scale: f64, what: &str) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -NEGATIVE_CLAMP_RELATIVE * scale {
        Ok(0.0)
    } else {
        Err(Error::NumericalFailure(format!(
            "{what} = {value:e} is negative beyond rounding (scale {scale:e})"
        )))
    }
}

/// Numerator and denominator of the squared vector assortativity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceCorrelationTerms {
    /// `dCov²(X, Y)` after clamping.
    pub f1: f64,
    /// `dCov²(X, X)` after clamping.
    pub f2: f64,
}

/// Closed-form `f1` and `f2`:
///
/// ```text
/// f1 = ⟨A, B·A·B⟩ − 2 aᵀ A a + D²
/// f2 = kᵀ (B∘B) k − 2 Σ_i k_i a_i² + D²
/// ```
///
/// where `a = B k` and `D = kᵀ a`.
pub fn distance_correlation_terms(
    adjacency: &NormalizedAdjacency,
    x: &AttributeMatrix,
) -> Result<DistanceCorrelationTerms> {
    check_dims(adjacency, x.n())?;
    let k = adjacency.marginals();
    if rows_constant_on_support(&k, x.as_array()) {
        return Err(Error::DegenerateAttribute { column: None });
    }
    let a = adjacency.as_array();
    let b = pairwise_distances(x);
    let b = b.as_array();
    let kv = k.as_array();
    let n = x.n();

    let mean_distance: Array1<f64> = (0..n)
        .map(|i| sum((0..n).map(|j| b[[i, j]] * kv[j])))
        .collect();
    let grand = sum((0..n).map(|i| kv[i] * mean_distance[i]));

    let sandwich = b.dot(a).dot(b);
    let quad = sum(a.iter().zip(sandwich.iter()).map(|(p, s)| p * s));
    let cross = sum(a
        .indexed_iter()
        .map(|((i, j), &p)| p * mean_distance[i] * mean_distance[j]));
    let grand_sq = grand * grand;
    let f1 = sum([quad, -2.0 * cross, grand_sq]);

    let second = sum(b.indexed_iter().map(|((i, j), &d)| kv[i] * kv[j] * d * d));
    let spread = sum((0..n).map(|i| kv[i] * mean_distance[i] * mean_distance[i]));
    let f2 = sum([second, -2.0 * spread, grand_sq]);

    let f1 = clamp_nonnegative(f1, quad.max(2.0 * cross).max(grand_sq), "f1")?;
    let f2 = clamp_nonnegative(f2, second.max(2.0 * spread).max(grand_sq), "f2")?;
    if f2 == 0.0 {
        return Err(Error::DegenerateAttribute { column: None });
    }
    Ok(DistanceCorrelationTerms { f1, f2 })
}

/// Distance correlation of the attribute vectors at the two ends of a random
/// edge, `r = sqrt(f1 / f2)`.
pub fn vector_assortativity(adjacency: &NormalizedAdjacency, x: &AttributeMatrix) -> Result<f64> {
    let terms = distance_correlation_terms(adjacency, x)?;
    Ok((terms.f1 / terms.f2).sqrt())
}

/// Population distance covariances of the edge-endpoint attributes,
/// evaluated straight from the double-centred definition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceCovariances {
    /// `dCov²(X, Y)`
    pub xy: f64,
    /// `dCov²(X, X)`
    pub xx: f64,
    /// `dCov²(Y, Y)`
    pub yy: f64,
}

/// Brute-force distance covariances.
///
/// With `(X', Y')` an independent copy of `(X, Y)` and
/// `d_μ(x, x') = ‖x − x'‖ − a_μ(x) − a_μ(x') + D(μ)`, this sums
/// `P(i, j) P(i', j') d_μ(x_i, x_i') d_ν(x_j, x_j')` over all ordered pairs
/// `(i, j)` and `(i', j')`. The marginal of `X` is taken from row sums and
/// that of `Y` from column sums, so nothing assumes symmetry. Cost is
/// `O(n⁴)`.
pub fn distance_covariances_oracle(
    adjacency: &NormalizedAdjacency,
    x: &AttributeMatrix,
) -> Result<DistanceCovariances> {
    check_dims(adjacency, x.n())?;
    let n = x.n();
    let p = adjacency.as_array();
    let rows = x.as_array();

    let mut dist = vec![vec![0.0; n]; n];
    for (i, row) in dist.iter_mut().enumerate() {
        for (j, d) in row.iter_mut().enumerate() {
            let mut s = 0.0;
            for c in 0..x.dim() {
                let diff = rows[[i, c]] - rows[[j, c]];
                s += diff * diff;
            }
            *d = s.sqrt();
        }
    }

    let mut p_x = vec![0.0; n];
    let mut p_y = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            p_x[i] += p[[i, j]];
            p_y[j] += p[[i, j]];
        }
    }

    let centred = |marginal: &[f64]| -> Vec<Vec<f64>> {
        let a: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|i2| marginal[i2] * dist[i][i2]).sum())
            .collect();
        let big_d: f64 = (0..n).map(|i| marginal[i] * a[i]).sum();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|i2| dist[i][i2] - a[i] - a[i2] + big_d)
                    .collect()
            })
            .collect()
    };
    let cx = centred(&p_x);
    let cy = centred(&p_y);

    let (mut xy, mut xx, mut yy) = (
        CompensatedSum::new(),
        CompensatedSum::new(),
        CompensatedSum::new(),
    );
    for i in 0..n {
        for j in 0..n {
            let pij = p[[i, j]];
            if pij == 0.0 {
                continue;
            }
            for i2 in 0..n {
                for j2 in 0..n {
                    let w = pij * p[[i2, j2]];
                    if w == 0.0 {
                        continue;
                    }
                    xy.add(w * cx[i][i2] * cy[j][j2]);
                    xx.add(w * cx[i][i2] * cx[i][i2]);
                    yy.add(w * cy[j][j2] * cy[j][j2]);
                }
            }
        }
    }
    Ok(DistanceCovariances {
        xy: xy.value(),
        xx: xx.value(),
        yy: yy.value(),
    })
}

/// Vector assortativity computed from [`distance_covariances_oracle`]:
/// `sqrt(dCov²(X,Y) / dCov²(X,X))`. Intended for small networks.
pub fn dcor_oracle(adjacency: &NormalizedAdjacency, x: &AttributeMatrix) -> Result<f64> {
    check_dims(adjacency, x.n())?;
    let k = adjacency.marginals();
    if rows_constant_on_support(&k, x.as_array()) {
        return Err(Error::DegenerateAttribute { column: None });
    }
    let cov = distance_covariances_oracle(adjacency, x)?;
    let xy = clamp_nonnegative(cov.xy, cov.xx, "dCov²(X,Y)")?;
    if cov.xx <= 0.0 {
        return Err(Error::DegenerateAttribute { column: None });
    }
    Ok((xy / cov.xx).sqrt())
}
