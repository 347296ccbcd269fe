//! Sliding birth-cohort series.
//!
//! For every (category, window) pair the population is restricted to people
//! born inside the window, an occupational network is built from that
//! cohort alone (its workforce is the denominator of the representation
//! ratios), and both assortativity measures are computed. Measures that are
//! undefined for a cohort become empty fields with a status word.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::format::fmt_g17;
use crate::measures::{averaged_scalar_assortativity, vector_assortativity};
use crate::ons::Population;

/// Birth years `start_year..=end_year`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CohortWindow {
    start_year: i32,
    end_year: i32,
}

impl CohortWindow {
    pub fn new(start_year: i32, end_year: i32) -> Result<Self> {
        if start_year > end_year {
            return Err(Error::InvalidParameter(format!(
                "window [{start_year}, {end_year}] is inverted"
            )));
        }
        Ok(Self {
            start_year,
            end_year,
        })
    }

    pub fn start_year(&self) -> i32 {
        self.start_year
    }

    pub fn end_year(&self) -> i32 {
        self.end_year
    }

    pub fn width(&self) -> i32 {
        self.end_year - self.start_year + 1
    }

    pub fn contains(&self, year: i32) -> bool {
        (self.start_year..=self.end_year).contains(&year)
    }
}

impl fmt::Display for CohortWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start_year, self.end_year)
    }
}

/// Windows `[s, s + width − 1]` for `s = first_start, first_start + step, …`
/// up to and including `last_start` when it falls on the grid.
pub fn cohort_windows(
    first_start: i32,
    last_start: i32,
    width: i32,
    step: i32,
) -> Result<Vec<CohortWindow>> {
    if first_start > last_start {
        return Err(Error::InvalidParameter(format!(
            "first window start {first_start} is after last start {last_start}"
        )));
    }
    if width < 1 || step < 1 {
        return Err(Error::InvalidParameter(format!(
            "window width ({width}) and step ({step}) must be at least 1"
        )));
    }
    (first_start..=last_start)
        .step_by(step as usize)
        .map(|s| CohortWindow::new(s, s + width - 1))
        .collect()
}

/// The four numbers behind a window grid, as written `first:last:width:step`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub first_start: i32,
    pub last_start: i32,
    pub width: i32,
    pub step: i32,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self {
            first_start: 1940,
            last_start: 1980,
            width: 10,
            step: 1,
        }
    }
}

impl WindowSpec {
    pub fn validate(&self) -> Result<()> {
        self.windows().map(|_| ())
    }

    pub fn windows(&self) -> Result<Vec<CohortWindow>> {
        cohort_windows(self.first_start, self.last_start, self.width, self.step)
    }
}

impl FromStr for WindowSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad =
            || Error::InvalidParameter(format!("window spec {s:?} is not first:last:width:step"));
        if parts.len() != 4 {
            return Err(bad());
        }
        let mut nums = [0i32; 4];
        for (n, p) in nums.iter_mut().zip(&parts) {
            *n = p.trim().parse().map_err(|_| bad())?;
        }
        let spec = WindowSpec {
            first_start: nums[0],
            last_start: nums[1],
            width: nums[2],
            step: nums[3],
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeriesStatus {
    Ok,
    DegenerateAttribute,
    TooFewOccupations,
    EmptyWindow,
}

impl SeriesStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SeriesStatus::Ok => "ok",
            SeriesStatus::DegenerateAttribute => "degenerate_attribute",
            SeriesStatus::TooFewOccupations => "too_few_occupations",
            SeriesStatus::EmptyWindow => "empty_window",
        }
    }
}

impl fmt::Display for SeriesStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPoint {
    pub window: CohortWindow,
    pub category: String,
    pub vector_r: Option<f64>,
    pub avg_scalar_r: Option<f64>,
    pub n_occupations: usize,
    pub n_persons: usize,
    pub total_weight: f64,
    pub status: SeriesStatus,
    /// Why a measure is missing, when one is.
    pub diagnostic: Option<String>,
}

/// Series points ordered by (category, window start), one per pair.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SeriesTable {
    points: Vec<SeriesPoint>,
}

pub const SERIES_HEADER: [&str; 9] = [
    "category",
    "window_start",
    "window_end",
    "vector_assortativity",
    "avg_scalar_assortativity",
    "n_occupations",
    "n_persons",
    "total_weight",
    "status",
];

impl SeriesTable {
    pub fn new(mut points: Vec<SeriesPoint>) -> Result<Self> {
        points
            .sort_by(|a, b| (a.category.as_str(), a.window).cmp(&(b.category.as_str(), b.window)));
        if let Some(pair) = points
            .windows(2)
            .find(|p| p[0].category == p[1].category && p[0].window == p[1].window)
        {
            return Err(Error::InvalidParameter(format!(
                "duplicate series point for {} {}",
                pair[0].category, pair[0].window
            )));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[SeriesPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Distinct categories in table order.
    pub fn categories(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for p in &self.points {
            if out.last() != Some(&p.category.as_str()) {
                out.push(&p.category);
            }
        }
        out
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(SERIES_HEADER)?;
        let opt = |v: Option<f64>| v.map(fmt_g17).unwrap_or_default();
        for p in &self.points {
            w.write_record([
                p.category.clone(),
                p.window.start_year().to_string(),
                p.window.end_year().to_string(),
                opt(p.vector_r),
                opt(p.avg_scalar_r),
                p.n_occupations.to_string(),
                p.n_persons.to_string(),
                fmt_g17(p.total_weight),
                p.status.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Two whitespace-separated columns, `window_start vector_r`, for one
    /// category; undefined values are written as `NaN`.
    pub fn write_gnuplot<W: Write>(&self, mut out: W, category: &str) -> Result<()> {
        writeln!(out, "# window_start vector_assortativity ({category})")?;
        for p in self.points.iter().filter(|p| p.category == category) {
            let value = p.vector_r.map(fmt_g17).unwrap_or_else(|| "NaN".into());
            writeln!(out, "{} {value}", p.window.start_year())?;
        }
        Ok(())
    }
}

/// Computes both measures for one category over one birth cohort.
///
/// Analysis-level failures (no records, too few occupations, degenerate
/// attributes) come back as status markers; only unexpected errors are
/// returned as `Err`.
pub fn run_cohort(
    population: &Population,
    window: CohortWindow,
    category: &str,
    min_cell: usize,
) -> Result<SeriesPoint> {
    let index = population.category_index(category)?;
    let tally = population.tally(index, Some(window));
    let mut point = SeriesPoint {
        window,
        category: category.to_string(),
        vector_r: None,
        avg_scalar_r: None,
        n_occupations: tally.surviving_occupations(min_cell),
        n_persons: tally.n_persons(),
        total_weight: tally.total_weight(),
        status: SeriesStatus::EmptyWindow,
        diagnostic: None,
    };
    if point.n_persons == 0 {
        point.diagnostic = Some("no records in window".into());
        return Ok(point);
    }
    let network = match tally.into_network(min_cell) {
        Ok(n) => n,
        Err(e @ Error::TooFewOccupations { .. }) => {
            point.status = SeriesStatus::TooFewOccupations;
            point.diagnostic = Some(e.to_string());
            return Ok(point);
        }
        Err(e) if e.is_analysis_null() => {
            point.status = SeriesStatus::DegenerateAttribute;
            point.diagnostic = Some(e.to_string());
            return Ok(point);
        }
        Err(e) => return Err(e),
    };

    let mut problems = Vec::new();
    let mut measured = |result: Result<f64>, what: &str| match result {
        Ok(r) => Ok(Some(r)),
        Err(e @ (Error::DegenerateAttribute { .. } | Error::NumericalFailure(_))) => {
            problems.push(format!("{what}: {e}"));
            Ok(None)
        }
        Err(e) => Err(e),
    };
    point.vector_r = measured(
        vector_assortativity(&network.adjacency, &network.attributes),
        "vector",
    )?;
    point.avg_scalar_r = measured(
        averaged_scalar_assortativity(&network.adjacency, &network.attributes),
        "averaged scalar",
    )?;
    if problems.is_empty() {
        point.status = SeriesStatus::Ok;
    } else {
        point.status = SeriesStatus::DegenerateAttribute;
        point.diagnostic = Some(problems.join("; "));
    }
    Ok(point)
}

/// Runs every (category, window) pair in parallel and assembles the table
/// in a fixed order.
pub fn run_series<S: AsRef<str> + Sync>(
    population: &Population,
    windows: &[CohortWindow],
    categories: &[S],
    min_cell: usize,
) -> Result<SeriesTable> {
    for c in categories {
        population.category_index(c.as_ref())?;
    }
    let grid: Vec<(&str, CohortWindow)> = categories
        .iter()
        .flat_map(|c| windows.iter().map(move |w| (c.as_ref(), *w)))
        .collect();
    let points = grid
        .par_iter()
        .map(|&(category, window)| run_cohort(population, window, category, min_cell))
        .collect::<Result<Vec<_>>>()?;
    SeriesTable::new(points)
}
