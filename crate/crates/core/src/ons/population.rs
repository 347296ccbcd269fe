use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::Write;

use crate::cohort::CohortWindow;
use crate::config::AnalysisConfig;
use crate::error::{Error, Result};
use crate::graph::{normalize_adjacency, EdgeWeightMatrix, NormalizedAdjacency};
use crate::measures::AttributeMatrix;
use crate::sum::CompensatedSum;

use super::{
    build_edge_weights, representation_from_totals, support_distribution, CategorySchema,
    EducationLevel, Label, LabelInterner, PersonRecord, RepresentationVector, SupportCell,
    SupportDistribution,
};

/// Why a record (or an occupation) was left out of a network.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Exclusion {
    InvalidWeight,
    BirthYearOutOfRange,
    FilteredOut,
    MissingOccupation,
    MissingIndustry,
    UnknownEducationCode(String),
    MissingCategoryValue { category: String },
    UnknownGroup { category: String, group: String },
}

impl Exclusion {
    pub fn reason(&self) -> &'static str {
        match self {
            Exclusion::InvalidWeight => "invalid_weight",
            Exclusion::BirthYearOutOfRange => "birth_year_out_of_range",
            Exclusion::FilteredOut => "filtered_out",
            Exclusion::MissingOccupation => "missing_occupation",
            Exclusion::MissingIndustry => "missing_industry",
            Exclusion::UnknownEducationCode(_) => "unknown_education_code",
            Exclusion::MissingCategoryValue { .. } => "missing_category_value",
            Exclusion::UnknownGroup { .. } => "unknown_group",
        }
    }

    pub fn detail(&self) -> String {
        match self {
            Exclusion::UnknownEducationCode(code) => code.clone(),
            Exclusion::MissingCategoryValue { category } => category.clone(),
            Exclusion::UnknownGroup { category, group } => format!("{category}={group}"),
            _ => String::new(),
        }
    }
}

impl fmt::Display for Exclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let detail = self.detail();
        if detail.is_empty() {
            f.write_str(self.reason())
        } else {
            write!(f, "{} ({detail})", self.reason())
        }
    }
}

/// Counts of excluded records by reason, plus occupations dropped for
/// having fewer than `min_cell` records.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExclusionReport {
    counts: BTreeMap<Exclusion, usize>,
    dropped_occupations: Vec<(String, usize)>,
}

impl ExclusionReport {
    pub fn add(&mut self, exclusion: Exclusion) {
        self.add_n(exclusion, 1);
    }

    fn add_n(&mut self, exclusion: Exclusion, n: usize) {
        if n > 0 {
            *self.counts.entry(exclusion).or_default() += n;
        }
    }

    pub fn count(&self, exclusion: &Exclusion) -> usize {
        self.counts.get(exclusion).copied().unwrap_or(0)
    }

    pub fn excluded_records(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Exclusion, usize)> {
        self.counts.iter().map(|(e, &n)| (e, n))
    }

    pub fn dropped_occupations(&self) -> &[(String, usize)] {
        &self.dropped_occupations
    }

    pub fn merge(&mut self, other: &ExclusionReport) {
        for (e, n) in other.iter() {
            self.add_n(e.clone(), n);
        }
        self.dropped_occupations
            .extend(other.dropped_occupations.iter().cloned());
    }

    /// `reason,detail,count`; dropped occupations appear as
    /// `below_min_cell,<code>,<records>`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["reason", "detail", "count"])?;
        for (e, n) in self.iter() {
            w.write_record([e.reason(), &e.detail(), &n.to_string()])?;
        }
        for (code, n) in &self.dropped_occupations {
            w.write_record(["below_min_cell", code, &n.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

const MISSING_GROUP: u16 = u16::MAX;

#[derive(Debug, Clone, Copy)]
struct EncodedRecord {
    birth_year: i32,
    occupation: u32,
    industry: u32,
    education: EducationLevel,
    weight: f64,
}

/// In-scope records with codes resolved to dense indices, sorted by birth
/// year so that a cohort window is a contiguous slice.
///
/// Group memberships are stored per category; a value `< d` is a group
/// index, [`MISSING_GROUP`] marks an absent value and anything else points
/// into the category's table of unrecognised labels.
#[derive(Debug, Clone)]
pub struct Population {
    categories: Vec<CategorySchema>,
    occupations: Vec<Label>,
    industries: Vec<Label>,
    records: Vec<EncodedRecord>,
    groups: Vec<u16>,
    unknown_groups: Vec<Vec<String>>,
    exclusions: ExclusionReport,
    input_records: usize,
}

fn truncate(code: &str, len: Option<usize>) -> &str {
    let code = code.trim();
    match len {
        Some(len) => match code.char_indices().nth(len) {
            Some((idx, _)) => &code[..idx],
            None => code,
        },
        None => code,
    }
}

impl Population {
    /// Validates, recodes and indexes `records`. Records failing any check
    /// are counted in [`Population::exclusions`], never imputed.
    pub fn from_records(records: &[PersonRecord], config: &AnalysisConfig) -> Self {
        let mut exclusions = ExclusionReport::default();
        let mut interner = LabelInterner::new();
        let (min_year, max_year) = config.birth_year_range;

        let mut pending = Vec::with_capacity(records.len());
        for record in records {
            if !(record.weight.is_finite() && record.weight > 0.0) {
                exclusions.add(Exclusion::InvalidWeight);
                continue;
            }
            if record.birth_year < min_year || record.birth_year > max_year {
                exclusions.add(Exclusion::BirthYearOutOfRange);
                continue;
            }
            if let Some(filter) = &config.filter {
                if !filter.accepts(record.category_value(&filter.column)) {
                    exclusions.add(Exclusion::FilteredOut);
                    continue;
                }
            }
            let occupation = truncate(&record.occupation_code, config.occupation_code_len);
            if occupation.is_empty() {
                exclusions.add(Exclusion::MissingOccupation);
                continue;
            }
            let industry = truncate(&record.industry_code, config.industry_code_len);
            if industry.is_empty() {
                exclusions.add(Exclusion::MissingIndustry);
                continue;
            }
            let education = match config.education.recode(record.education_code.trim()) {
                Ok(level) => level,
                Err(_) => {
                    exclusions.add(Exclusion::UnknownEducationCode(
                        record.education_code.to_string(),
                    ));
                    continue;
                }
            };
            pending.push((
                record,
                interner.intern(occupation),
                interner.intern(industry),
                education,
            ));
        }

        let occupations: Vec<Label> = pending
            .iter()
            .map(|p| p.1.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let industries: Vec<Label> = pending
            .iter()
            .map(|p| p.2.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let occupation_index: HashMap<&str, u32> = occupations
            .iter()
            .enumerate()
            .map(|(i, c)| (&**c, i as u32))
            .collect();
        let industry_index: HashMap<&str, u32> = industries
            .iter()
            .enumerate()
            .map(|(i, c)| (&**c, i as u32))
            .collect();

        let n_categories = config.categories.len();
        let mut unknown_groups: Vec<Vec<String>> = vec![Vec::new(); n_categories];
        let mut encoded = Vec::with_capacity(pending.len());
        let mut groups = Vec::with_capacity(pending.len() * n_categories);
        for (record, occupation, industry, education) in &pending {
            encoded.push(EncodedRecord {
                birth_year: record.birth_year,
                occupation: occupation_index[&**occupation],
                industry: industry_index[&**industry],
                education: *education,
                weight: if config.weighted { record.weight } else { 1.0 },
            });
            for (c, schema) in config.categories.iter().enumerate() {
                let code = match record.category_value(schema.name()).map(str::trim) {
                    None | Some("") => MISSING_GROUP,
                    Some(value) => match schema.group_index(value) {
                        Some(g) => g as u16,
                        None => {
                            let table = &mut unknown_groups[c];
                            let pos = table.iter().position(|u| u == value).unwrap_or_else(|| {
                                table.push(value.to_string());
                                table.len() - 1
                            });
                            (schema.dim() + pos) as u16
                        }
                    },
                };
                groups.push(code);
            }
        }

        let mut order: Vec<usize> = (0..encoded.len()).collect();
        order.sort_by_key(|&i| encoded[i].birth_year);
        let sorted: Vec<EncodedRecord> = order.iter().map(|&i| encoded[i]).collect();
        let groups: Vec<u16> = order
            .iter()
            .flat_map(|&i| {
                groups[i * n_categories..(i + 1) * n_categories]
                    .iter()
                    .copied()
            })
            .collect();

        Self {
            categories: config.categories.clone(),
            occupations,
            industries,
            records: sorted,
            groups,
            unknown_groups,
            exclusions,
            input_records: records.len(),
        }
    }

    pub fn categories(&self) -> &[CategorySchema] {
        &self.categories
    }

    pub fn category_index(&self, name: &str) -> Result<usize> {
        self.categories
            .iter()
            .position(|c| c.name() == name)
            .ok_or_else(|| Error::UnknownCategory {
                name: name.to_string(),
                configured: self
                    .categories
                    .iter()
                    .map(|c| c.name().to_string())
                    .collect(),
            })
    }

    /// Record-level exclusions made while building the population.
    pub fn exclusions(&self) -> &ExclusionReport {
        &self.exclusions
    }

    pub fn input_records(&self) -> usize {
        self.input_records
    }

    /// Number of records that passed record-level validation.
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn occupations(&self) -> &[Label] {
        &self.occupations
    }

    fn window_range(&self, window: Option<CohortWindow>) -> std::ops::Range<usize> {
        match window {
            None => 0..self.records.len(),
            Some(w) => {
                let lo = self
                    .records
                    .partition_point(|r| r.birth_year < w.start_year());
                let hi = self
                    .records
                    .partition_point(|r| r.birth_year <= w.end_year());
                lo..hi
            }
        }
    }

    /// Aggregates the records in `window` (all records when `None`) for one
    /// category.
    pub fn tally(&self, category: usize, window: Option<CohortWindow>) -> CohortTally {
        let schema = self.categories[category].clone();
        let d = schema.dim();
        let n_categories = self.categories.len();
        let n_cells = EducationLevel::MAX as usize * self.industries.len();
        let mut occupations: Vec<Option<OccupationTally>> = vec![None; self.occupations.len()];
        let mut workforce = vec![CompensatedSum::new(); d];
        let mut total_weight = CompensatedSum::new();
        let mut n_persons = 0usize;
        let mut missing = 0usize;
        let mut unknown = vec![0usize; self.unknown_groups[category].len()];

        for idx in self.window_range(window) {
            let record = &self.records[idx];
            let g = self.groups[idx * n_categories + category];
            if g == MISSING_GROUP {
                missing += 1;
                continue;
            }
            let g = g as usize;
            if g >= d {
                unknown[g - d] += 1;
                continue;
            }
            n_persons += 1;
            total_weight.add(record.weight);
            workforce[g].add(record.weight);
            let tally =
                occupations[record.occupation as usize].get_or_insert_with(|| OccupationTally {
                    records: 0,
                    cells: vec![CompensatedSum::new(); n_cells],
                    groups: vec![CompensatedSum::new(); d],
                });
            tally.records += 1;
            let cell = (record.education.get() as usize - 1) * self.industries.len()
                + record.industry as usize;
            tally.cells[cell].add(record.weight);
            tally.groups[g].add(record.weight);
        }

        let mut exclusions = ExclusionReport::default();
        exclusions.add_n(
            Exclusion::MissingCategoryValue {
                category: schema.name().to_string(),
            },
            missing,
        );
        for (label, n) in self.unknown_groups[category].iter().zip(unknown) {
            exclusions.add_n(
                Exclusion::UnknownGroup {
                    category: schema.name().to_string(),
                    group: label.clone(),
                },
                n,
            );
        }

        CohortTally {
            schema,
            industries: self.industries.clone(),
            occupations: self
                .occupations
                .iter()
                .zip(occupations)
                .filter_map(|(code, t)| t.map(|t| (code.clone(), t)))
                .collect(),
            workforce: workforce.iter().map(CompensatedSum::value).collect(),
            n_persons,
            total_weight: total_weight.value(),
            exclusions,
        }
    }

    /// Builds the occupational network of one category over a window.
    pub fn build_network(
        &self,
        category: usize,
        window: Option<CohortWindow>,
        min_cell: usize,
    ) -> Result<OccupationalNetwork> {
        self.tally(category, window).into_network(min_cell)
    }
}

#[derive(Debug, Clone)]
struct OccupationTally {
    records: usize,
    cells: Vec<CompensatedSum>,
    groups: Vec<CompensatedSum>,
}

/// Weighted totals of one category over one slice of the population.
#[derive(Debug, Clone)]
pub struct CohortTally {
    schema: CategorySchema,
    industries: Vec<Label>,
    occupations: Vec<(Label, OccupationTally)>,
    workforce: Vec<f64>,
    n_persons: usize,
    total_weight: f64,
    exclusions: ExclusionReport,
}

impl CohortTally {
    /// In-scope records with a valid group label.
    pub fn n_persons(&self) -> usize {
        self.n_persons
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    /// Occupations with at least `min_cell` records.
    pub fn surviving_occupations(&self, min_cell: usize) -> usize {
        self.occupations
            .iter()
            .filter(|(_, t)| t.records >= min_cell)
            .count()
    }

    pub fn into_network(self, min_cell: usize) -> Result<OccupationalNetwork> {
        let mut exclusions = self.exclusions;
        let mut survivors = Vec::new();
        for (code, tally) in self.occupations {
            if tally.records >= min_cell {
                survivors.push((code, tally));
            } else {
                exclusions
                    .dropped_occupations
                    .push((code.to_string(), tally.records));
            }
        }
        if survivors.len() < 2 {
            return Err(Error::TooFewOccupations {
                found: survivors.len(),
            });
        }

        let n_industries = self.industries.len();
        let mut distributions = Vec::with_capacity(survivors.len());
        let mut representation = Vec::with_capacity(survivors.len());
        for (code, tally) in &survivors {
            let cells = tally.cells.iter().enumerate().filter_map(|(c, s)| {
                let w = s.value();
                (w > 0.0).then(|| {
                    let level = EducationLevel((c / n_industries) as u8 + 1);
                    (
                        SupportCell::new(level, self.industries[c % n_industries].clone()),
                        w,
                    )
                })
            });
            distributions.push(support_distribution(code, cells)?);
            let own: Vec<f64> = tally.groups.iter().map(CompensatedSum::value).collect();
            representation.push(representation_from_totals(
                code,
                &own,
                &self.workforce,
                &self.schema,
            )?);
        }

        let weights = build_edge_weights(&distributions)?;
        let adjacency = normalize_adjacency(&weights)?;
        let rows: Vec<Vec<f64>> = representation.iter().map(|r| r.values.clone()).collect();
        let attributes = AttributeMatrix::from_rows(&rows)?;
        Ok(OccupationalNetwork {
            labels: survivors.iter().map(|(c, _)| c.to_string()).collect(),
            schema: self.schema,
            distributions,
            representation,
            weights,
            adjacency,
            attributes,
            n_persons: self.n_persons,
            total_weight: self.total_weight,
            exclusions,
        })
    }
}

/// An occupational network together with the data it was built from.
#[derive(Debug, Clone)]
pub struct OccupationalNetwork {
    /// Occupation codes in node order (lexicographic).
    pub labels: Vec<String>,
    pub schema: CategorySchema,
    pub distributions: Vec<SupportDistribution>,
    pub representation: Vec<RepresentationVector>,
    pub weights: EdgeWeightMatrix,
    pub adjacency: NormalizedAdjacency,
    pub attributes: AttributeMatrix,
    pub n_persons: usize,
    pub total_weight: f64,
    pub exclusions: ExclusionReport,
}

impl OccupationalNetwork {
    pub fn n(&self) -> usize {
        self.labels.len()
    }
}

/// Builds the occupational network of `schema` over `records`, treating all
/// of them as the analysis population. Occupations with fewer than
/// `config.min_cell` records are dropped; the returned exclusions cover
/// both record-level and category-level drops.
pub fn build_ons(
    records: &[PersonRecord],
    schema: &CategorySchema,
    config: &AnalysisConfig,
) -> Result<OccupationalNetwork> {
    let population = Population::from_records(records, &config.with_single_category(schema));
    let mut network = population.build_network(0, None, config.min_cell)?;
    let mut exclusions = population.exclusions().clone();
    exclusions.merge(&network.exclusions);
    network.exclusions = exclusions;
    Ok(network)
}
