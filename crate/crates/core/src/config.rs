//! Analysis configuration, read from a TOML file.
//!
//! ```toml
//! min_cell = 30
//! weighted = true
//! birth_year_range = [1900, 2010]
//! occupation_code_len = 2   # truncate occupation codes to this many characters
//! industry_code_len = 1     # likewise for industry codes
//!
//! [windows]
//! first_start = 1940
//! last_start = 1980
//! width = 10
//! step = 1
//!
//! [education]               # raw code -> level 1..=4
//! "01" = 1
//! "02" = 2
//!
//! [filter]                  # keep only records whose column is listed
//! column = "status"
//! include = ["employed"]
//!
//! [[category]]
//! name = "gender"
//! groups = ["male", "female"]
//! ```
//!
//! Every key is optional; the defaults are a 4-level identity education map,
//! the categories sector, gender and social_group, `min_cell = 30`, weighted
//! mode, and 10-year windows starting 1940 through 1980 in steps of one year.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::cohort::WindowSpec;
use crate::error::{Error, Result};
use crate::ons::{CategorySchema, EducationRecode};

pub const DEFAULT_MIN_CELL: usize = 30;
pub const DEFAULT_BIRTH_YEAR_RANGE: (i32, i32) = (1900, 2010);

/// Keeps records whose `column` value is one of `include`.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordFilter {
    pub column: String,
    pub include: Vec<String>,
}

impl RecordFilter {
    pub fn accepts(&self, value: Option<&str>) -> bool {
        value.is_some_and(|v| self.include.iter().any(|i| i == v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub education: EducationRecode,
    pub categories: Vec<CategorySchema>,
    pub min_cell: usize,
    pub weighted: bool,
    pub birth_year_range: (i32, i32),
    pub occupation_code_len: Option<usize>,
    pub industry_code_len: Option<usize>,
    pub filter: Option<RecordFilter>,
    pub windows: WindowSpec,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            education: EducationRecode::identity(),
            categories: default_categories(),
            min_cell: DEFAULT_MIN_CELL,
            weighted: true,
            birth_year_range: DEFAULT_BIRTH_YEAR_RANGE,
            occupation_code_len: None,
            industry_code_len: None,
            filter: None,
            windows: WindowSpec::default(),
        }
    }
}

pub fn default_categories() -> Vec<CategorySchema> {
    let schema = |name: &str, groups: &[&str]| {
        CategorySchema::new(name, groups.iter().map(|g| g.to_string()).collect())
            .expect("built-in schema is valid")
    };
    vec![
        schema("sector", &["rural", "urban"]),
        schema("gender", &["male", "female"]),
        schema("social_group", &["GEN", "OBC", "SC", "ST"]),
    ]
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    min_cell: Option<usize>,
    weighted: Option<bool>,
    birth_year_range: Option<[i32; 2]>,
    occupation_code_len: Option<usize>,
    industry_code_len: Option<usize>,
    windows: Option<WindowSpec>,
    education: Option<BTreeMap<String, i64>>,
    filter: Option<RecordFilter>,
    #[serde(default)]
    category: Vec<RawCategory>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCategory {
    name: String,
    groups: Vec<String>,
}

impl AnalysisConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let defaults = Self::default();
        let education = match raw.education {
            Some(map) => EducationRecode::new(map)?,
            None => defaults.education,
        };
        let categories = if raw.category.is_empty() {
            defaults.categories
        } else {
            let mut out: Vec<CategorySchema> = Vec::with_capacity(raw.category.len());
            for c in raw.category {
                if out.iter().any(|s| s.name() == c.name) {
                    return Err(Error::Config(format!(
                        "category {:?} declared twice",
                        c.name
                    )));
                }
                out.push(CategorySchema::new(c.name, c.groups)?);
            }
            out
        };
        let min_cell = raw.min_cell.unwrap_or(DEFAULT_MIN_CELL);
        if min_cell == 0 {
            return Err(Error::Config("min_cell must be at least 1".into()));
        }
        let birth_year_range = raw
            .birth_year_range
            .map(|[lo, hi]| (lo, hi))
            .unwrap_or(DEFAULT_BIRTH_YEAR_RANGE);
        if birth_year_range.0 > birth_year_range.1 {
            return Err(Error::Config("birth_year_range is inverted".into()));
        }
        for (key, len) in [
            ("occupation_code_len", raw.occupation_code_len),
            ("industry_code_len", raw.industry_code_len),
        ] {
            if len == Some(0) {
                return Err(Error::Config(format!("{key} must be at least 1")));
            }
        }
        let windows = raw.windows.unwrap_or_default();
        windows
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(Self {
            education,
            categories,
            min_cell,
            weighted: raw.weighted.unwrap_or(true),
            birth_year_range,
            occupation_code_len: raw.occupation_code_len,
            industry_code_len: raw.industry_code_len,
            filter: raw.filter,
            windows,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn category(&self, name: &str) -> Result<&CategorySchema> {
        self.categories
            .iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| Error::UnknownCategory {
                name: name.to_string(),
                configured: self.category_names(),
            })
    }

    pub fn category_names(&self) -> Vec<String> {
        self.categories
            .iter()
            .map(|c| c.name().to_string())
            .collect()
    }

    /// Input columns beyond the fixed ones: categories, then the filter column.
    pub fn extra_columns(&self) -> Vec<String> {
        let mut columns = self.category_names();
        if let Some(f) = &self.filter {
            if !columns.contains(&f.column) {
                columns.push(f.column.clone());
            }
        }
        columns
    }

    /// Copy restricted to one category.
    pub fn with_single_category(&self, schema: &CategorySchema) -> Self {
        Self {
            categories: vec![schema.clone()],
            ..self.clone()
        }
    }
}
