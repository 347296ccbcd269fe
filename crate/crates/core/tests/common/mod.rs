#![allow(dead_code)]

use assortnet_core::{normalize_adjacency, AttributeMatrix, EdgeWeightMatrix, NormalizedAdjacency};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub struct Instance {
    pub weights: EdgeWeightMatrix,
    pub adjacency: NormalizedAdjacency,
    pub attributes: AttributeMatrix,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random symmetric non-negative weights with n in [2, 12]: roughly a fifth
/// of pairs are zero, a third of instances carry self-loops, and at least
/// one off-diagonal pair is positive.
pub fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> EdgeWeightMatrix {
    let self_loops = rng.random_bool(1.0 / 3.0);
    let mut w = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            if i == j && !self_loops {
                continue;
            }
            let v = if rng.random_bool(0.2) {
                0.0
            } else {
                rng.random_range(0.0..5.0)
            };
            w[[i, j]] = v;
            w[[j, i]] = v;
        }
    }
    let (i, j) = (0, 1 + rng.random_range(0..n - 1));
    w[[i, j]] += 0.1;
    w[[j, i]] = w[[i, j]];
    EdgeWeightMatrix::new(w).unwrap()
}

pub fn random_attributes(rng: &mut ChaCha8Rng, n: usize, d: usize) -> AttributeMatrix {
    let discrete = rng.random_bool(0.3);
    AttributeMatrix::new(Array2::from_shape_fn((n, d), |_| {
        if discrete {
            rng.random_range(0..3) as f64
        } else {
            rng.sample::<f64, _>(StandardNormal)
        }
    }))
    .unwrap()
}

pub fn random_instance(seed: u64) -> Instance {
    let mut rng = rng(seed);
    let n = rng.random_range(2..=12);
    let d = rng.random_range(1..=4);
    let weights = random_weights(&mut rng, n);
    let adjacency = normalize_adjacency(&weights).unwrap();
    let attributes = random_attributes(&mut rng, n, d);
    Instance {
        weights,
        adjacency,
        attributes,
    }
}

/// Random orthogonal matrix from Gram-Schmidt on a Gaussian matrix.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, d: usize) -> Array2<f64> {
    let mut q = Array2::from_shape_fn((d, d), |_| rng.sample::<f64, _>(StandardNormal));
    for j in 0..d {
        for k in 0..j {
            let proj: f64 = (0..d).map(|i| q[[i, j]] * q[[i, k]]).sum();
            for i in 0..d {
                q[[i, j]] -= proj * q[[i, k]];
            }
        }
        let norm: f64 = (0..d).map(|i| q[[i, j]] * q[[i, j]]).sum::<f64>().sqrt();
        for i in 0..d {
            q[[i, j]] /= norm;
        }
    }
    q
}

pub fn random_permutation(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        p.swap(i, rng.random_range(0..=i));
    }
    p
}

/// `P·A·Pᵀ` and `P·X` for the permutation `perm` (new node i is old perm[i]).
pub fn permute(
    adjacency: &NormalizedAdjacency,
    attributes: &AttributeMatrix,
    perm: &[usize],
) -> (NormalizedAdjacency, AttributeMatrix) {
    let a = adjacency.as_array();
    let x = attributes.as_array();
    let n = perm.len();
    let pa = Array2::from_shape_fn((n, n), |(i, j)| a[[perm[i], perm[j]]]);
    let px = Array2::from_shape_fn(x.dim(), |(i, c)| x[[perm[i], c]]);
    (
        NormalizedAdjacency::from_probabilities(pa).unwrap(),
        AttributeMatrix::new(px).unwrap(),
    )
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
    cov / (vx * vy).sqrt()
}
