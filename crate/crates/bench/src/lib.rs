//! Input generators shared by the benchmarks.

use assortnet_core::{
    generate_population, normalize_adjacency, AnalysisConfig, AttributeMatrix, EdgeWeightMatrix,
    NormalizedAdjacency, PersonRecord, SynthParams,
};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense random network on `n` nodes with `d` uniform attributes.
pub fn random_network(n: usize, d: usize, seed: u64) -> (NormalizedAdjacency, AttributeMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.random_range(0.0..1.0);
            w[[i, j]] = v;
            w[[j, i]] = v;
        }
    }
    let adjacency = normalize_adjacency(&EdgeWeightMatrix::new(w).unwrap()).unwrap();
    let x = Array2::from_shape_fn((n, d), |_| rng.random_range(0.0..2.0));
    (adjacency, AttributeMatrix::new(x).unwrap())
}

/// Synthetic records labelled with every default category, segregated on
/// gender.
pub fn synthetic_records(n_persons: usize, n_occupations: usize, seed: u64) -> Vec<PersonRecord> {
    let mut schemas = AnalysisConfig::default().categories;
    let at = schemas.iter().position(|s| s.name() == "gender").unwrap();
    let schema = schemas.remove(at);
    let params = SynthParams {
        n_persons,
        n_occupations,
        seed,
        extra_schemas: schemas,
        ..SynthParams::new(schema)
    };
    generate_population(&params).unwrap()
}
