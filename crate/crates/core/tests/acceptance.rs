//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the criteria execute in order and
//! their timings are not skewed by other tests sharing the machine.

mod common;

use std::time::{Duration, Instant};

use assortnet_core::{
    averaged_scalar_assortativity, build_ons, dcor_oracle, generate_population,
    normalize_adjacency, run_series, scalar_assortativity, support_distribution, tv_distance,
    vector_assortativity, AnalysisConfig, AttributeMatrix, CategorySchema, EdgeWeightMatrix,
    EducationLevel, Error, NormalizedAdjacency, Population, ScalarAttributes, SupportCell,
    SupportDistribution, SynthParams, WindowSpec,
};
use common::{random_instance, random_orthogonal, random_permutation, rng, spearman, Instance};
use ndarray::{array, Array2};
use rand::Rng;

const ORACLE_INSTANCES: u64 = 500;
const ORACLE_TOL: f64 = 1e-9;
const RANGE_TOL: f64 = 1e-9;
const EXACT_TOL: f64 = 1e-12;
const INVARIANCE_TOL: f64 = 1e-10;
const METRIC_SAMPLES: u64 = 1_000;
const SWEEP_PERSONS: usize = 100_000;
const SWEEP_SEEDS: u64 = 5;
const SPEARMAN_MIN: f64 = 0.95;
const FULL_SEGREGATION_MIN: f64 = 0.9;
const NO_SEGREGATION_MAX: f64 = 0.1;
const COHORT_BUDGET: Duration = Duration::from_secs(1);
const SERIES_BUDGET: Duration = Duration::from_secs(60);
const ORACLE_BUDGET: Duration = Duration::from_secs(60);
const SERIES_PERSONS: usize = 1_000_000;

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for seed in 0..ORACLE_INSTANCES {
        let Instance {
            adjacency,
            attributes,
            ..
        } = random_instance(seed);
        let fast = vector_assortativity(&adjacency, &attributes);
        let slow = dcor_oracle(&adjacency, &attributes);
        match (fast, slow) {
            (Ok(f), Ok(s)) => {
                let diff = (f - s).abs();
                worst = worst.max(diff);
                ensure(diff <= ORACLE_TOL, || {
                    format!("seed {seed}: |{f} - {s}| = {diff:e}")
                })?;
            }
            (Err(Error::DegenerateAttribute { .. }), Err(Error::DegenerateAttribute { .. })) => {}
            (f, s) => return Err(format!("seed {seed}: closed form {f:?}, oracle {s:?}")),
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < ORACLE_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{ORACLE_INSTANCES} instances, max |Δ| = {worst:.2e}, {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn constant_attributes(n: usize, d: usize) -> AttributeMatrix {
    AttributeMatrix::new(Array2::from_elem((n, d), 0.7)).unwrap()
}

fn range_and_degeneracy() -> Outcome {
    let (mut scalars, mut vectors) = (0usize, 0usize);
    for seed in 0..ORACLE_INSTANCES {
        let Instance {
            adjacency,
            attributes,
            ..
        } = random_instance(seed);
        for j in 0..attributes.dim() {
            if let Ok(r) = scalar_assortativity(&adjacency, &attributes.column(j)) {
                scalars += 1;
                ensure((-1.0 - RANGE_TOL..=1.0 + RANGE_TOL).contains(&r), || {
                    format!("seed {seed} column {j}: scalar r = {r}")
                })?;
            }
        }
        if let Ok(r) = vector_assortativity(&adjacency, &attributes) {
            vectors += 1;
            ensure((-RANGE_TOL..=1.0 + RANGE_TOL).contains(&r), || {
                format!("seed {seed}: vector r = {r}")
            })?;
        }
        let constant = constant_attributes(adjacency.n(), attributes.dim());
        let degenerate =
            |r: Result<f64, Error>| matches!(r, Err(Error::DegenerateAttribute { .. }));
        ensure(
            degenerate(scalar_assortativity(&adjacency, &constant.column(0)))
                && degenerate(averaged_scalar_assortativity(&adjacency, &constant))
                && degenerate(vector_assortativity(&adjacency, &constant))
                && degenerate(dcor_oracle(&adjacency, &constant)),
            || format!("seed {seed}: constant attributes not reported degenerate"),
        )?;
    }
    Ok(format!(
        "{scalars} scalar and {vectors} vector values in range, constants degenerate"
    ))
}

fn two_dyads() -> NormalizedAdjacency {
    let w = EdgeWeightMatrix::new(array![
        [0.0, 1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, 1.0, 0.0],
    ])
    .unwrap();
    normalize_adjacency(&w).unwrap()
}

fn exact_fixtures() -> Outcome {
    let dyads = two_dyads();
    let x = ScalarAttributes::new(array![0.0, 0.0, 1.0, 1.0]).unwrap();
    let r_plus = scalar_assortativity(&dyads, &x).map_err(|e| e.to_string())?;
    ensure((r_plus - 1.0).abs() <= EXACT_TOL, || {
        format!("two dyads scalar r = {r_plus}")
    })?;

    let edge = normalize_adjacency(&EdgeWeightMatrix::new(array![[0.0, 1.0], [1.0, 0.0]]).unwrap())
        .unwrap();
    let x = ScalarAttributes::new(array![0.0, 1.0]).unwrap();
    let r_minus = scalar_assortativity(&edge, &x).map_err(|e| e.to_string())?;
    ensure((r_minus + 1.0).abs() <= EXACT_TOL, || {
        format!("single edge scalar r = {r_minus}")
    })?;

    let u = AttributeMatrix::new(array![[1.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 1.0]]).unwrap();
    let v = vector_assortativity(&dyads, &u).map_err(|e| e.to_string())?;
    ensure((v - 1.0).abs() <= ORACLE_TOL, || {
        format!("two dyads vector r = {v}")
    })?;
    Ok(format!("scalar {r_plus} and {r_minus}, vector {v}"))
}

fn close(
    a: Result<f64, Error>,
    b: Result<f64, Error>,
    what: &str,
    tol: f64,
) -> Result<bool, String> {
    match (a, b) {
        (Ok(a), Ok(b)) => {
            ensure((a - b).abs() <= tol, || format!("{what}: {a} vs {b}"))?;
            Ok(true)
        }
        (Err(Error::DegenerateAttribute { .. }), Err(Error::DegenerateAttribute { .. })) => {
            Ok(false)
        }
        (a, b) => Err(format!("{what}: {a:?} vs {b:?}")),
    }
}

fn invariances() -> Outcome {
    let mut checks = 0usize;
    for seed in 0..200 {
        let Instance {
            weights,
            adjacency,
            attributes,
        } = random_instance(seed);
        let mut rng = rng(10_000 + seed);
        let x = attributes.as_array();
        let (n, d) = x.dim();
        let vector = || vector_assortativity(&adjacency, &attributes);
        let tag = |what: &str| format!("seed {seed} {what}");

        let col = attributes.column(0);
        let scalar = || scalar_assortativity(&adjacency, &col);
        for a in [rng.random_range(0.1..10.0), -rng.random_range(0.1..10.0)] {
            let b = rng.random_range(-5.0..5.0);
            let moved = ScalarAttributes::new(col.as_array().mapv(|v| a * v + b)).unwrap();
            checks += close(
                scalar_assortativity(&adjacency, &moved),
                scalar(),
                &tag("scalar affine"),
                INVARIANCE_TOL,
            )? as usize;
        }

        let shift: Vec<f64> = (0..d).map(|_| rng.random_range(-10.0..10.0)).collect();
        let translated = Array2::from_shape_fn((n, d), |(i, j)| x[[i, j]] + shift[j]);
        checks += close(
            vector_assortativity(&adjacency, &AttributeMatrix::new(translated).unwrap()),
            vector(),
            &tag("translation"),
            INVARIANCE_TOL,
        )? as usize;

        let s = rng.random_range(0.01..100.0);
        checks += close(
            vector_assortativity(&adjacency, &AttributeMatrix::new(x * s).unwrap()),
            vector(),
            &tag("scaling"),
            INVARIANCE_TOL,
        )? as usize;

        let q = random_orthogonal(&mut rng, d);
        checks += close(
            vector_assortativity(&adjacency, &AttributeMatrix::new(x.dot(&q)).unwrap()),
            vector(),
            &tag("rotation"),
            INVARIANCE_TOL,
        )? as usize;

        let perm = random_permutation(&mut rng, n);
        let (pa, px) = common::permute(&adjacency, &attributes, &perm);
        checks += close(
            vector_assortativity(&pa, &px),
            vector(),
            &tag("vector permutation"),
            INVARIANCE_TOL,
        )? as usize;
        checks += close(
            scalar_assortativity(&pa, &px.column(0)),
            scalar(),
            &tag("scalar permutation"),
            INVARIANCE_TOL,
        )? as usize;

        let c = rng.random_range(0.001..1000.0);
        let scaled = EdgeWeightMatrix::new(weights.as_array() * c).unwrap();
        let sa = normalize_adjacency(&scaled).unwrap();
        checks += close(
            vector_assortativity(&sa, &attributes),
            vector(),
            &tag("weight scaling (vector)"),
            INVARIANCE_TOL,
        )? as usize;
        checks += close(
            scalar_assortativity(&sa, &col),
            scalar(),
            &tag("weight scaling (scalar)"),
            INVARIANCE_TOL,
        )? as usize;
    }
    Ok(format!("{checks} non-degenerate comparisons"))
}

fn random_distribution(rng: &mut rand_chacha::ChaCha8Rng) -> SupportDistribution {
    let industries = ["A", "B", "C", "D", "E", "F"];
    let mut cells = Vec::new();
    for e in 1..=4 {
        for ind in industries {
            if rng.random_bool(0.3) {
                let level = EducationLevel::new(e).unwrap();
                cells.push((SupportCell::new(level, ind), rng.random_range(0.01..10.0)));
            }
        }
    }
    if cells.is_empty() {
        cells.push((SupportCell::new(EducationLevel::new(1).unwrap(), "A"), 1.0));
    }
    support_distribution("x", cells).unwrap()
}

fn metric_suite() -> Outcome {
    let mut rng = rng(77);
    let mut zero_distance_pairs = 0;
    for _ in 0..METRIC_SAMPLES {
        let p = random_distribution(&mut rng);
        let q = random_distribution(&mut rng);
        let s = random_distribution(&mut rng);
        let pq = tv_distance(&p, &q);
        ensure(pq == tv_distance(&q, &p), || format!("asymmetric: {pq}"))?;
        ensure((0.0..=1.0).contains(&pq), || format!("out of bounds: {pq}"))?;
        ensure(tv_distance(&p, &p) == 0.0, || "d(p, p) != 0".into())?;
        if pq == 0.0 {
            zero_distance_pairs += 1;
            ensure(p.mass() == q.mass(), || {
                "zero distance between different distributions".into()
            })?;
        }
        let (ps, sq) = (tv_distance(&p, &s), tv_distance(&s, &q));
        ensure(pq <= ps + sq + 1e-15, || {
            format!("triangle: {pq} > {ps} + {sq}")
        })?;
    }
    Ok(format!(
        "{METRIC_SAMPLES} triples, {zero_distance_pairs} coincident pairs"
    ))
}

fn gender() -> CategorySchema {
    CategorySchema::new("gender", vec!["male".into(), "female".into()]).unwrap()
}

fn segregation_sweep() -> Outcome {
    let config = AnalysisConfig {
        categories: vec![gender()],
        ..AnalysisConfig::default()
    };
    let lambdas: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let mut rhos = Vec::new();
    let (mut top, mut bottom) = (f64::INFINITY, f64::NEG_INFINITY);
    for seed in 0..SWEEP_SEEDS {
        let mut values = Vec::new();
        for &lambda in &lambdas {
            let params = SynthParams {
                n_persons: SWEEP_PERSONS,
                segregation: lambda,
                seed,
                ..SynthParams::new(gender())
            };
            let records = generate_population(&params).map_err(|e| e.to_string())?;
            let net = build_ons(&records, &gender(), &config).map_err(|e| e.to_string())?;
            let r = vector_assortativity(&net.adjacency, &net.attributes)
                .map_err(|e| format!("λ={lambda} seed {seed}: {e}"))?;
            values.push(r);
        }
        top = top.min(values[10]);
        bottom = bottom.max(values[0]);
        ensure(values[10] >= FULL_SEGREGATION_MIN, || {
            format!("seed {seed}: λ=1 gives r = {}", values[10])
        })?;
        ensure(values[0] <= NO_SEGREGATION_MAX, || {
            format!("seed {seed}: λ=0 gives r = {}", values[0])
        })?;
        let rho = spearman(&lambdas, &values);
        ensure(rho >= SPEARMAN_MIN, || {
            format!("seed {seed}: ρ = {rho}, r = {values:?}")
        })?;
        rhos.push(rho);
    }
    let min_rho = rhos.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(format!(
        "min ρ over {SWEEP_SEEDS} seeds = {min_rho:.4}, min r(λ=1) = {top:.4}, max r(λ=0) = {bottom:.4}"
    ))
}

fn synth_records(n_persons: usize, seed: u64) -> Result<Vec<assortnet_core::PersonRecord>, String> {
    let defaults = AnalysisConfig::default();
    let mut schemas = defaults.categories.clone();
    let gender_at = schemas.iter().position(|s| s.name() == "gender").unwrap();
    let schema = schemas.remove(gender_at);
    let params = SynthParams {
        n_persons,
        seed,
        extra_schemas: schemas,
        ..SynthParams::new(schema)
    };
    generate_population(&params).map_err(|e| e.to_string())
}

fn series_csv(n_persons: usize, seed: u64) -> Result<(usize, usize, Vec<u8>), String> {
    let config = AnalysisConfig::default();
    let records = synth_records(n_persons, seed)?;
    let population = Population::from_records(&records, &config);
    let windows = config.windows.windows().map_err(|e| e.to_string())?;
    let table = run_series(
        &population,
        &windows,
        &config.category_names(),
        config.min_cell,
    )
    .map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    table.write_csv(&mut out).map_err(|e| e.to_string())?;
    Ok((windows.len(), table.len(), out))
}

fn pipeline_shape() -> Outcome {
    let windows = WindowSpec::default().windows().map_err(|e| e.to_string())?;
    ensure(windows.len() == 41, || format!("{} windows", windows.len()))?;
    let (first, last) = (windows[0], windows[40]);
    ensure(
        (
            first.start_year(),
            first.end_year(),
            last.start_year(),
            last.end_year(),
        ) == (1940, 1949, 1980, 1989),
        || format!("first {first}, last {last}"),
    )?;
    let categories = AnalysisConfig::default().categories.len();
    let (n_windows, rows, a) = series_csv(50_000, 11)?;
    ensure(rows == n_windows * categories, || format!("{rows} rows"))?;
    let lines = a.iter().filter(|&&b| b == b'\n').count();
    ensure(lines == rows + 1, || format!("{lines} CSV lines"))?;
    let (_, _, b) = series_csv(50_000, 11)?;
    ensure(a == b, || "repeated runs differ".into())?;
    Ok(format!(
        "windows {first}..{last}, {rows} rows = 41 × {categories}, repeated run byte-identical"
    ))
}

fn performance() -> Outcome {
    let mut rng = rng(2024);
    let n = 100;
    let mut w = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.random_range(0.0..1.0);
            w[[i, j]] = v;
            w[[j, i]] = v;
        }
    }
    let adjacency = normalize_adjacency(&EdgeWeightMatrix::new(w).unwrap()).unwrap();
    let x = Array2::from_shape_fn((n, 4), |_| rng.random_range(0.0..2.0));
    let attributes = AttributeMatrix::new(x).unwrap();
    let start = Instant::now();
    vector_assortativity(&adjacency, &attributes).map_err(|e| e.to_string())?;
    let cohort = start.elapsed();
    ensure(cohort < COHORT_BUDGET, || {
        format!("n=100 cohort took {cohort:?}")
    })?;

    let records = synth_records(SERIES_PERSONS, 3)?;
    let config = AnalysisConfig::default();
    let start = Instant::now();
    let population = Population::from_records(&records, &config);
    let windows = config.windows.windows().map_err(|e| e.to_string())?;
    let table = run_series(
        &population,
        &windows,
        &config.category_names(),
        config.min_cell,
    )
    .map_err(|e| e.to_string())?;
    let series = start.elapsed();
    ensure(table.len() == 41 * 3, || format!("{} rows", table.len()))?;
    let ok = table
        .points()
        .iter()
        .filter(|p| p.vector_r.is_some())
        .count();
    ensure(series < SERIES_BUDGET, || {
        format!("1M-record series took {series:?}")
    })?;
    Ok(format!(
        "n=100 d=4 cohort {:.2}ms; 41×3 series on {SERIES_PERSONS} records {:.2}s ({ok} defined)",
        cohort.as_secs_f64() * 1e3,
        series.as_secs_f64()
    ))
}

fn main() {
    let criteria: [Check; 8] = [
        ("oracle equivalence", oracle_equivalence),
        ("range and degeneracy", range_and_degeneracy),
        ("exact fixtures", exact_fixtures),
        ("invariance suite", invariances),
        ("metric suite", metric_suite),
        ("segregation sweep", segregation_sweep),
        ("pipeline shape", pipeline_shape),
        ("performance", performance),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
