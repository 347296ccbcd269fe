//! Occupational network construction from person-level microdata.
//!
//! Every occupation is described by how its workers spread over the
//! education × industry grid. Two occupations are joined by an edge of
//! weight `1 − TV`, where `TV` is the total variation distance between
//! those spreads; self-loops are dropped. Each occupation's attribute is
//! its representation vector for a category: the share of every group
//! among its workers divided by that group's share of the workforce.

mod population;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::graph::EdgeWeightMatrix;
use crate::sum::{sum, CompensatedSum};

pub use population::{
    build_ons, CohortTally, Exclusion, ExclusionReport, OccupationalNetwork, Population,
};

/// Shared, cheaply cloned code or label.
pub type Label = Arc<str>;

/// Deduplicates labels so a large population holds each distinct code once.
#[derive(Debug, Default)]
pub struct LabelInterner {
    labels: HashMap<Box<str>, Label>,
}

impl LabelInterner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, value: &str) -> Label {
        if let Some(label) = self.labels.get(value) {
            return label.clone();
        }
        let label: Label = Arc::from(value);
        self.labels.insert(value.into(), label.clone());
        label
    }
}

/// One surveyed individual.
#[derive(Debug, Clone, PartialEq)]
pub struct PersonRecord {
    pub person_id: String,
    /// Survey sampling weight, strictly positive.
    pub weight: f64,
    pub birth_year: i32,
    pub occupation_code: Label,
    pub industry_code: Label,
    /// Raw education code, mapped to a level by an [`EducationRecode`].
    pub education_code: Label,
    /// `(column, value)` pairs for the category columns (and any filter
    /// column) carried by the input.
    pub category_values: Vec<(Label, Label)>,
}

impl PersonRecord {
    pub fn category_value(&self, category: &str) -> Option<&str> {
        self.category_values
            .iter()
            .find(|(name, _)| &**name == category)
            .map(|(_, value)| &**value)
    }
}

/// A category (e.g. gender) and the ordered groups that make up its
/// attribute vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategorySchema {
    name: String,
    groups: Vec<String>,
}

impl CategorySchema {
    pub fn new(name: impl Into<String>, groups: Vec<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::Config("category name is empty".into()));
        }
        if groups.len() < 2 {
            return Err(Error::Config(format!(
                "category {name:?} needs at least two groups, found {}",
                groups.len()
            )));
        }
        for (i, g) in groups.iter().enumerate() {
            if g.is_empty() {
                return Err(Error::Config(format!(
                    "category {name:?} has an empty group"
                )));
            }
            if groups[..i].contains(g) {
                return Err(Error::Config(format!(
                    "category {name:?} lists group {g:?} twice"
                )));
            }
        }
        Ok(Self { name, groups })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn groups(&self) -> &[String] {
        &self.groups
    }

    pub fn dim(&self) -> usize {
        self.groups.len()
    }

    pub fn group_index(&self, group: &str) -> Option<usize> {
        self.groups.iter().position(|g| g == group)
    }
}

/// Education level 1..=4: below primary, primary to below secondary,
/// secondary to below graduation, graduation and above.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EducationLevel(u8);

impl EducationLevel {
    pub const MIN: u8 = 1;
    pub const MAX: u8 = 4;

    pub fn new(level: i64) -> Result<Self> {
        if (Self::MIN as i64..=Self::MAX as i64).contains(&level) {
            Ok(Self(level as u8))
        } else {
            Err(Error::Config(format!(
                "education level {level} outside {}..={}",
                Self::MIN,
                Self::MAX
            )))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl fmt::Display for EducationLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Total map from raw education codes to levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EducationRecode {
    map: HashMap<String, EducationLevel>,
}

impl EducationRecode {
    /// Fails with a configuration error if any level lies outside 1..=4.
    pub fn new<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, i64)>,
        S: Into<String>,
    {
        let mut map = HashMap::new();
        for (code, level) in entries {
            let code = code.into();
            let level = EducationLevel::new(level)
                .map_err(|e| Error::Config(format!("education code {code:?}: {e}")))?;
            map.insert(code, level);
        }
        if map.is_empty() {
            return Err(Error::Config("education recode map is empty".into()));
        }
        Ok(Self { map })
    }

    /// `"1" → 1, …, "4" → 4`.
    pub fn identity() -> Self {
        Self::new((1..=4).map(|l| (l.to_string(), l))).expect("levels are in range")
    }

    pub fn recode(&self, raw: &str) -> Result<EducationLevel> {
        self.map
            .get(raw)
            .copied()
            .ok_or_else(|| Error::UnknownEducationCode(raw.to_string()))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, EducationLevel)> {
        self.map.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

pub fn recode_education(raw: &str, recode: &EducationRecode) -> Result<EducationLevel> {
    recode.recode(raw)
}

/// A cell of the education × industry support.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SupportCell {
    pub education: EducationLevel,
    pub industry: Label,
}

impl SupportCell {
    pub fn new(education: EducationLevel, industry: impl Into<Label>) -> Self {
        Self {
            education,
            industry: industry.into(),
        }
    }
}

/// An occupation's probability mass over the support; only cells with
/// positive mass are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportDistribution {
    occupation_code: String,
    mass: BTreeMap<SupportCell, f64>,
}

impl SupportDistribution {
    pub fn occupation_code(&self) -> &str {
        &self.occupation_code
    }

    pub fn mass(&self) -> &BTreeMap<SupportCell, f64> {
        &self.mass
    }

    pub fn get(&self, cell: &SupportCell) -> f64 {
        self.mass.get(cell).copied().unwrap_or(0.0)
    }
}

/// Weighted share of each support cell among an occupation's workers.
pub fn support_distribution<I>(occupation_code: &str, cells: I) -> Result<SupportDistribution>
where
    I: IntoIterator<Item = (SupportCell, f64)>,
{
    let mut totals: BTreeMap<SupportCell, CompensatedSum> = BTreeMap::new();
    for (cell, weight) in cells {
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "record weight {weight} in occupation {occupation_code:?} is not positive"
            )));
        }
        totals.entry(cell).or_default().add(weight);
    }
    let totals: Vec<(SupportCell, f64)> = totals.into_iter().map(|(c, s)| (c, s.value())).collect();
    let grand = sum(totals.iter().map(|(_, w)| *w));
    if totals.is_empty() || grand <= 0.0 {
        return Err(Error::EmptyOccupation(occupation_code.to_string()));
    }
    Ok(SupportDistribution {
        occupation_code: occupation_code.to_string(),
        mass: totals.into_iter().map(|(c, w)| (c, w / grand)).collect(),
    })
}

/// Half the L1 distance between two distributions over the union of their
/// supports. Exactly 1 when no cell carries mass under both.
pub fn tv_distance(p: &SupportDistribution, q: &SupportDistribution) -> f64 {
    let mut diff = CompensatedSum::new();
    let mut overlap = false;
    let mut left = p.mass.iter().peekable();
    let mut right = q.mass.iter().peekable();
    loop {
        match (left.peek(), right.peek()) {
            (Some((lc, lm)), Some((rc, rm))) => match lc.cmp(rc) {
                std::cmp::Ordering::Less => {
                    diff.add(**lm);
                    left.next();
                }
                std::cmp::Ordering::Greater => {
                    diff.add(**rm);
                    right.next();
                }
                std::cmp::Ordering::Equal => {
                    overlap = true;
                    diff.add((**lm - **rm).abs());
                    left.next();
                    right.next();
                }
            },
            (Some((_, lm)), None) => {
                diff.add(**lm);
                left.next();
            }
            (None, Some((_, rm))) => {
                diff.add(**rm);
                right.next();
            }
            (None, None) => break,
        }
    }
    if !overlap {
        return 1.0;
    }
    (0.5 * diff.value()).clamp(0.0, 1.0)
}

/// `W[i][j] = 1 − TV(i, j)` off the diagonal, zero on it.
pub fn build_edge_weights(distributions: &[SupportDistribution]) -> Result<EdgeWeightMatrix> {
    let n = distributions.len();
    if n < 2 {
        return Err(Error::TooFewOccupations { found: n });
    }
    let mut w = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let weight = 1.0 - tv_distance(&distributions[i], &distributions[j]);
            w[[i, j]] = weight;
            w[[j, i]] = weight;
        }
    }
    EdgeWeightMatrix::new(w)
}

/// Per-occupation ratios of group share to workforce group share, ordered
/// like the schema's groups.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationVector {
    pub occupation_code: String,
    pub values: Vec<f64>,
}

/// Builds a representation vector from per-group weight totals of one
/// occupation and of the whole workforce.
pub fn representation_from_totals(
    occupation_code: &str,
    occupation_groups: &[f64],
    workforce_groups: &[f64],
    schema: &CategorySchema,
) -> Result<RepresentationVector> {
    let d = schema.dim();
    if occupation_groups.len() != d || workforce_groups.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: occupation_groups.len().min(workforce_groups.len()),
        });
    }
    let occupation_total = sum(occupation_groups.iter().copied());
    if occupation_total <= 0.0 {
        return Err(Error::EmptyOccupation(occupation_code.to_string()));
    }
    let workforce_total = sum(workforce_groups.iter().copied());
    let mut values = Vec::with_capacity(d);
    for (g, (&own, &all)) in occupation_groups.iter().zip(workforce_groups).enumerate() {
        if all <= 0.0 {
            return Err(Error::ZeroWorkforceGroup {
                category: schema.name().to_string(),
                group: schema.groups()[g].clone(),
            });
        }
        values.push((own / occupation_total) / (all / workforce_total));
    }
    Ok(RepresentationVector {
        occupation_code: occupation_code.to_string(),
        values,
    })
}

/// Representation vector of `occupation_code` relative to all of
/// `records_all`; records without a valid group label for the schema are
/// ignored.
pub fn representation_vector(
    records_all: &[PersonRecord],
    occupation_code: &str,
    schema: &CategorySchema,
) -> Result<RepresentationVector> {
    let d = schema.dim();
    let mut own = vec![CompensatedSum::new(); d];
    let mut all = vec![CompensatedSum::new(); d];
    for record in records_all {
        let Some(g) = record
            .category_value(schema.name())
            .and_then(|v| schema.group_index(v))
        else {
            continue;
        };
        all[g].add(record.weight);
        if &*record.occupation_code == occupation_code {
            own[g].add(record.weight);
        }
    }
    let own: Vec<f64> = own.iter().map(CompensatedSum::value).collect();
    let all: Vec<f64> = all.iter().map(CompensatedSum::value).collect();
    representation_from_totals(occupation_code, &own, &all, schema)
}
