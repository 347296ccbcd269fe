//! `assortnet`: build occupational networks, measure their assortativity
//! and run birth-cohort series from survey microdata.
//!
//! Exit status is 0 on success (including analysis-level nulls such as a
//! degenerate attribute, which are reported as status words) and 2 on any
//! input, configuration or I/O problem.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use assortnet_core::format::fmt_g17;
use assortnet_core::graph::{read_edge_list, write_edge_list};
use assortnet_core::io::{read_attributes, read_microdata, write_attributes, write_microdata};
use assortnet_core::{
    averaged_scalar_assortativity, build_ons, dcor_oracle, generate_population,
    normalize_adjacency, run_series, vector_assortativity, AnalysisConfig, AttributeMatrix,
    CategorySchema, Error, NormalizedAdjacency, Population, SeriesStatus, SynthParams, WindowSpec,
};

const THREADS_VAR: &str = "ASSORTNET_THREADS";

#[derive(Parser)]
#[command(
    name = "assortnet",
    version,
    about = "Assortativity of occupational networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build one occupational network and write its edge list, attribute
    /// matrix and exclusion report.
    BuildGraph(BuildGraphArgs),
    /// Compute vector and averaged scalar assortativity of one network.
    Assort(AssortArgs),
    /// Assortativity over sliding birth-cohort windows.
    Series(SeriesArgs),
    /// Generate synthetic microdata with controlled segregation.
    Synth(SynthArgs),
}

#[derive(Args)]
struct Analysis {
    /// Analysis configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Minimum records per occupation; overrides the configuration.
    #[arg(long)]
    min_cell: Option<usize>,
    /// Count every record once, ignoring survey weights.
    #[arg(long)]
    unweighted: bool,
}

impl Analysis {
    fn load(&self) -> Result<AnalysisConfig> {
        let mut config = match &self.config {
            Some(path) => AnalysisConfig::load(path)
                .with_context(|| format!("reading config {}", path.display()))?,
            None => AnalysisConfig::default(),
        };
        if let Some(m) = self.min_cell {
            config.min_cell = m;
        }
        if self.unweighted {
            config.weighted = false;
        }
        Ok(config)
    }
}

#[derive(Args)]
struct BuildGraphArgs {
    /// Microdata CSV.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    analysis: Analysis,
    /// Category defining the attribute columns (default: first configured).
    #[arg(long)]
    category: Option<String>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct AssortArgs {
    /// Microdata CSV; the network is built from all in-scope records.
    #[arg(long, conflicts_with_all = ["edges", "attributes"], required_unless_present = "edges")]
    input: Option<PathBuf>,
    /// Prebuilt edge list (as written by build-graph).
    #[arg(long, requires = "attributes")]
    edges: Option<PathBuf>,
    /// Prebuilt attribute matrix (as written by build-graph).
    #[arg(long, requires = "edges")]
    attributes: Option<PathBuf>,
    #[command(flatten)]
    analysis: Analysis,
    #[arg(long)]
    category: Option<String>,
    /// Also evaluate the brute-force distance correlation and print the
    /// absolute difference.
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SeriesArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    analysis: Analysis,
    /// Categories to run, repeatable (default: all configured).
    #[arg(long)]
    category: Vec<String>,
    /// Window grid as first:last:width:step; overrides the configuration.
    #[arg(long)]
    windows: Option<WindowSpec>,
    /// Write each window's edge list under <out-dir>/edges.
    #[arg(long)]
    dump_edges: bool,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// Supplies the category schemas (default: built-in categories).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Category whose groups drive occupation choice.
    #[arg(long, default_value = "gender")]
    category: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    n_persons: usize,
    #[arg(long, default_value_t = 40)]
    n_occupations: usize,
    #[arg(long, default_value_t = 20)]
    n_industries: usize,
    #[arg(long, default_value_t = 4)]
    n_education: usize,
    /// Segregation strength in [0, 1].
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    concentration: f64,
    /// Birth years as first:last.
    #[arg(long, default_value = "1940:1989", value_parser = parse_year_range)]
    birth_years: (i32, i32),
    /// Let occupations in different blocks share industries.
    #[arg(long)]
    shared_supports: bool,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn parse_year_range(s: &str) -> std::result::Result<(i32, i32), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("{s:?} is not first:last"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<i32>()
            .map_err(|_| format!("{v:?} is not a year"))
    };
    Ok((parse(a)?, parse(b)?))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(BufReader::new(file))
}

fn prepare_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn load_microdata(
    path: &Path,
    config: &AnalysisConfig,
) -> Result<Vec<assortnet_core::PersonRecord>> {
    read_microdata(open(path)?, &config.extra_columns())
        .with_context(|| format!("reading {}", path.display()))
}

fn pick_category<'a>(config: &'a AnalysisConfig, name: Option<&str>) -> Result<&'a CategorySchema> {
    match name {
        Some(n) => Ok(config.category(n)?),
        None => config
            .categories
            .first()
            .context("configuration declares no categories"),
    }
}

fn build_graph(args: BuildGraphArgs) -> Result<()> {
    let config = args.analysis.load()?;
    let schema = pick_category(&config, args.category.as_deref())?;
    let records = load_microdata(&args.input, &config)?;
    let network = build_ons(&records, schema, &config)?;
    prepare_out_dir(&args.out_dir)?;

    let mut out = create(&args.out_dir, "edges.csv")?;
    write_edge_list(
        &mut out,
        &network.labels,
        &network.weights,
        &network.adjacency,
    )?;
    out.flush()?;
    let mut out = create(&args.out_dir, "attributes.csv")?;
    write_attributes(&mut out, &network)?;
    out.flush()?;
    let mut out = create(&args.out_dir, "exclusions.csv")?;
    network.exclusions.write_csv(&mut out)?;
    out.flush()?;

    println!(
        "category={} occupations={} persons={} excluded_records={} dropped_occupations={}",
        schema.name(),
        network.n(),
        network.n_persons,
        network.exclusions.excluded_records(),
        network.exclusions.dropped_occupations().len()
    );
    Ok(())
}

struct AssortRow {
    category: String,
    n_occupations: usize,
    vector_r: Option<f64>,
    avg_scalar_r: Option<f64>,
    oracle_r: Option<f64>,
    status: SeriesStatus,
    diagnostic: Option<String>,
}

fn null_status(e: &Error) -> SeriesStatus {
    match e {
        Error::TooFewOccupations { .. } => SeriesStatus::TooFewOccupations,
        _ => SeriesStatus::DegenerateAttribute,
    }
}

fn measure(
    adjacency: &NormalizedAdjacency,
    attributes: &AttributeMatrix,
    oracle: bool,
    row: &mut AssortRow,
) -> Result<()> {
    let mut problems = Vec::new();
    let mut keep = |r: assortnet_core::Result<f64>| -> Result<Option<f64>> {
        match r {
            Ok(v) => Ok(Some(v)),
            Err(e @ (Error::DegenerateAttribute { .. } | Error::NumericalFailure(_))) => {
                problems.push(e.to_string());
                Ok(None)
            }
            Err(e) => Err(e.into()),
        }
    };
    row.vector_r = keep(vector_assortativity(adjacency, attributes))?;
    row.avg_scalar_r = keep(averaged_scalar_assortativity(adjacency, attributes))?;
    if oracle {
        row.oracle_r = keep(dcor_oracle(adjacency, attributes))?;
    }
    if problems.is_empty() {
        row.status = SeriesStatus::Ok;
    } else {
        row.status = SeriesStatus::DegenerateAttribute;
        problems.dedup();
        row.diagnostic = Some(problems.join("; "));
    }
    Ok(())
}

fn value(v: Option<f64>) -> String {
    v.map(fmt_g17).unwrap_or_else(|| "NA".into())
}

fn assort(args: AssortArgs) -> Result<()> {
    let mut row = AssortRow {
        category: String::new(),
        n_occupations: 0,
        vector_r: None,
        avg_scalar_r: None,
        oracle_r: None,
        status: SeriesStatus::Ok,
        diagnostic: None,
    };
    match (&args.input, &args.edges, &args.attributes) {
        (Some(input), _, _) => {
            let config = args.analysis.load()?;
            let schema = pick_category(&config, args.category.as_deref())?;
            row.category = schema.name().to_string();
            let records = load_microdata(input, &config)?;
            match build_ons(&records, schema, &config) {
                Ok(net) => {
                    row.n_occupations = net.n();
                    measure(&net.adjacency, &net.attributes, args.oracle, &mut row)?;
                }
                Err(e) if e.is_analysis_null() => {
                    row.status = null_status(&e);
                    row.diagnostic = Some(e.to_string());
                }
                Err(e) => return Err(e.into()),
            }
        }
        (None, Some(edges), Some(attributes)) => {
            let table = read_attributes(open(attributes)?)
                .with_context(|| format!("reading {}", attributes.display()))?;
            row.category = args.category.clone().unwrap_or_default();
            row.n_occupations = table.labels.len();
            let weights = read_edge_list(open(edges)?, &table.labels);
            match weights.and_then(|w| normalize_adjacency(&w)) {
                Ok(adjacency) => measure(&adjacency, &table.attributes, args.oracle, &mut row)?,
                Err(e @ Error::AllZeroWeights) => {
                    row.status = SeriesStatus::DegenerateAttribute;
                    row.diagnostic = Some(e.to_string());
                }
                Err(e) => {
                    return Err(
                        anyhow::Error::from(e).context(format!("reading {}", edges.display()))
                    )
                }
            }
        }
        _ => bail!("give either --input or both --edges and --attributes"),
    }

    let mut line = format!(
        "vector_r={} avg_scalar_r={}",
        value(row.vector_r),
        value(row.avg_scalar_r)
    );
    let diff = match (row.vector_r, row.oracle_r) {
        (Some(a), Some(b)) => Some((a - b).abs()),
        _ => None,
    };
    if args.oracle {
        line.push_str(&format!(
            " oracle_r={} abs_diff={}",
            value(row.oracle_r),
            value(diff)
        ));
    }
    line.push_str(&format!(" status={}", row.status.as_str()));
    println!("{line}");
    if let Some(d) = &row.diagnostic {
        eprintln!("note: {d}");
    }

    prepare_out_dir(&args.out_dir)?;
    let mut w = csv::Writer::from_writer(create(&args.out_dir, "assort.csv")?);
    w.write_record([
        "category",
        "n_occupations",
        "vector_assortativity",
        "avg_scalar_assortativity",
        "dcor_oracle",
        "abs_diff",
        "status",
    ])?;
    let field = |v: Option<f64>| v.map(fmt_g17).unwrap_or_default();
    w.write_record([
        row.category.clone(),
        row.n_occupations.to_string(),
        field(row.vector_r),
        field(row.avg_scalar_r),
        field(row.oracle_r),
        field(diff),
        row.status.as_str().to_string(),
    ])?;
    w.flush()?;
    Ok(())
}

fn series(args: SeriesArgs) -> Result<()> {
    let mut config = args.analysis.load()?;
    if let Some(spec) = args.windows {
        config.windows = spec;
    }
    let categories = if args.category.is_empty() {
        config.category_names()
    } else {
        for c in &args.category {
            config.category(c)?;
        }
        args.category.clone()
    };
    let windows = config.windows.windows()?;
    let records = load_microdata(&args.input, &config)?;
    let population = Population::from_records(&records, &config);
    drop(records);
    let table = run_series(&population, &windows, &categories, config.min_cell)?;

    prepare_out_dir(&args.out_dir)?;
    let mut out = create(&args.out_dir, "series.csv")?;
    table.write_csv(&mut out)?;
    out.flush()?;
    for c in &categories {
        let mut out = create(&args.out_dir, &format!("series_{c}.dat"))?;
        table.write_gnuplot(&mut out, c)?;
        out.flush()?;
    }
    if args.dump_edges {
        let dir = args.out_dir.join("edges");
        prepare_out_dir(&dir)?;
        for c in &categories {
            let index = population.category_index(c)?;
            for &window in &windows {
                let Ok(network) = population.build_network(index, Some(window), config.min_cell)
                else {
                    continue;
                };
                let name = format!("{c}_{}_{}.csv", window.start_year(), window.end_year());
                let mut out = create(&dir, &name)?;
                write_edge_list(
                    &mut out,
                    &network.labels,
                    &network.weights,
                    &network.adjacency,
                )?;
                out.flush()?;
            }
        }
    }

    let ok = table
        .points()
        .iter()
        .filter(|p| p.status == SeriesStatus::Ok)
        .count();
    println!(
        "rows={} ok={} windows={} categories={} excluded_records={}",
        table.len(),
        ok,
        windows.len(),
        categories.len(),
        population.exclusions().excluded_records()
    );
    Ok(())
}

fn synth(args: SynthArgs) -> Result<()> {
    let config = match &args.config {
        Some(path) => AnalysisConfig::load(path)
            .with_context(|| format!("reading config {}", path.display()))?,
        None => AnalysisConfig::default(),
    };
    let schema = config.category(&args.category)?.clone();
    let extra_schemas = config
        .categories
        .iter()
        .filter(|s| s.name() != schema.name())
        .cloned()
        .collect();
    let params = SynthParams {
        n_persons: args.n_persons,
        n_occupations: args.n_occupations,
        n_industries: args.n_industries,
        n_education_levels: args.n_education,
        extra_schemas,
        segregation: args.lambda,
        birth_year_range: args.birth_years,
        seed: args.seed,
        disjoint_block_supports: !args.shared_supports,
        concentration: args.concentration,
        ..SynthParams::new(schema)
    };
    let records = generate_population(&params)?;
    prepare_out_dir(&args.out_dir)?;
    let mut out = create(&args.out_dir, "microdata.csv")?;
    write_microdata(&mut out, &records, &params.category_columns())?;
    out.flush()?;
    println!(
        "records={} seed={} lambda={}",
        records.len(),
        args.seed,
        args.lambda
    );
    Ok(())
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("{THREADS_VAR}={raw:?} is not a positive integer"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring the thread pool")
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::BuildGraph(a) => build_graph(a),
        Command::Assort(a) => assort(a),
        Command::Series(a) => series(a),
        Command::Synth(a) => synth(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
