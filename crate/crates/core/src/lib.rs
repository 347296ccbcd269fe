//! Occupational networks and their assortativity.
//!
//! Person-level microdata are turned into a weighted network of occupations
//! ([`ons`]), whose edge distribution ([`graph`]) is used to measure how
//! strongly connected occupations share categorical make-up ([`measures`]).
//! [`cohort`] repeats this over sliding birth cohorts and [`synth`] produces
//! test populations with controlled segregation.

pub mod cohort;
pub mod config;
pub mod error;
pub mod format;
pub mod graph;
pub mod io;
pub mod measures;
pub mod ons;
pub mod sum;
pub mod synth;

pub use cohort::{
    cohort_windows, run_cohort, run_series, CohortWindow, SeriesPoint, SeriesStatus, SeriesTable,
    WindowSpec,
};
pub use config::AnalysisConfig;
pub use error::{Error, Result};
pub use graph::{
    node_marginals, normalize_adjacency, EdgeWeightMatrix, NodeMarginals, NormalizedAdjacency,
};
pub use measures::{
    averaged_scalar_assortativity, dcor_oracle, pairwise_distances, scalar_assortativity,
    vector_assortativity, AttributeMatrix, PairwiseDistanceMatrix, ScalarAttributes,
};
pub use ons::{
    build_edge_weights, build_ons, recode_education, representation_vector, support_distribution,
    tv_distance, CategorySchema, EducationLevel, EducationRecode, OccupationalNetwork,
    PersonRecord, Population, RepresentationVector, SupportCell, SupportDistribution,
};
pub use synth::{generate_population, SynthParams};
