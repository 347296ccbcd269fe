//! Synthetic microdata with a tunable amount of categorical segregation.
//!
//! Occupations are split into one contiguous block per group of the
//! segregating category. Each person gets a uniformly drawn group; with
//! probability `segregation` their occupation is drawn uniformly from their
//! group's block, otherwise uniformly from all occupations. Education and
//! industry come from the occupation's own fixed distribution over the
//! education × industry grid, drawn once per seed from a symmetric
//! Dirichlet law. With `disjoint_block_supports`, industries are dealt out
//! to blocks round-robin and each block's occupations only use their own
//! industries, so occupations in different blocks are never linked.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Gamma;

use crate::error::{Error, Result};
use crate::ons::{CategorySchema, Label, PersonRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub n_persons: usize,
    pub n_occupations: usize,
    pub n_industries: usize,
    pub n_education_levels: usize,
    /// Category whose groups drive occupation choice.
    pub schema: CategorySchema,
    /// Further categories, labelled independently of everything else.
    pub extra_schemas: Vec<CategorySchema>,
    pub segregation: f64,
    pub birth_year_range: (i32, i32),
    pub seed: u64,
    pub disjoint_block_supports: bool,
    /// Dirichlet concentration of the per-occupation grid distributions.
    pub concentration: f64,
}

impl SynthParams {
    /// 100k people in 40 occupations, 20 industries and 4 education levels,
    /// born 1940–1989, with half-strength segregation on `schema`.
    pub fn new(schema: CategorySchema) -> Self {
        Self {
            n_persons: 100_000,
            n_occupations: 40,
            n_industries: 20,
            n_education_levels: 4,
            schema,
            extra_schemas: Vec::new(),
            segregation: 0.5,
            birth_year_range: (1940, 1989),
            seed: 0,
            disjoint_block_supports: true,
            concentration: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.n_persons < 2 {
            return bad(format!("n_persons = {} (need at least 2)", self.n_persons));
        }
        let groups = self.schema.dim();
        if self.n_occupations < 2 || self.n_occupations < groups {
            return bad(format!(
                "n_occupations = {} (need at least 2 and one per group, {groups})",
                self.n_occupations
            ));
        }
        if self.n_industries < 2 {
            return bad(format!(
                "n_industries = {} (need at least 2)",
                self.n_industries
            ));
        }
        if self.disjoint_block_supports && self.n_industries < groups {
            return bad(format!(
                "disjoint block supports need one industry per group ({groups}), got {}",
                self.n_industries
            ));
        }
        if !(1..=4).contains(&self.n_education_levels) {
            return bad(format!(
                "n_education_levels = {} (need 1..=4)",
                self.n_education_levels
            ));
        }
        if !(0.0..=1.0).contains(&self.segregation) {
            return bad(format!("segregation = {} (need 0..=1)", self.segregation));
        }
        if self.birth_year_range.0 > self.birth_year_range.1 {
            return bad("birth year range is inverted".into());
        }
        if !(self.concentration.is_finite() && self.concentration > 0.0) {
            return bad(format!("concentration = {} (need > 0)", self.concentration));
        }
        Ok(())
    }

    /// Every category column the generated records carry.
    pub fn category_columns(&self) -> Vec<String> {
        std::iter::once(&self.schema)
            .chain(&self.extra_schemas)
            .map(|s| s.name().to_string())
            .collect()
    }
}

fn industry_code(i: usize, n: usize) -> String {
    if n <= 26 {
        char::from(b'A' + i as u8).to_string()
    } else {
        format!("S{:02}", i + 1)
    }
}

fn occupation_code(o: usize, n: usize) -> String {
    let width = n.to_string().len().max(2);
    format!("{:0width$}", o + 1)
}

pub fn generate_population(params: &SynthParams) -> Result<Vec<PersonRecord>> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let groups = params.schema.dim();
    let n_occ = params.n_occupations;
    let n_ind = params.n_industries;

    let block_of = |o: usize| o * groups / n_occ;
    let blocks: Vec<Vec<usize>> = (0..groups)
        .map(|b| (0..n_occ).filter(|&o| block_of(o) == b).collect())
        .collect();

    let cells: Vec<(usize, usize)> = (0..params.n_education_levels)
        .flat_map(|e| (0..n_ind).map(move |i| (e, i)))
        .collect();
    let gamma = Gamma::new(params.concentration, 1.0)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut grid_draws = Vec::with_capacity(n_occ);
    for o in 0..n_occ {
        let block = block_of(o);
        let weights: Vec<f64> = cells
            .iter()
            .map(|&(_, i)| {
                let allowed = !params.disjoint_block_supports || i % groups == block;
                // floor keeps every allowed cell drawable and the weights valid
                if allowed {
                    gamma.sample(&mut rng).max(1e-12)
                } else {
                    0.0
                }
            })
            .collect();
        grid_draws.push(
            WeightedIndex::new(&weights).map_err(|e| Error::InvalidParameter(e.to_string()))?,
        );
    }

    let label = |s: String| -> Label { s.as_str().into() };
    let occupation_labels: Vec<Label> = (0..n_occ)
        .map(|o| label(occupation_code(o, n_occ)))
        .collect();
    let industry_labels: Vec<Label> = (0..n_ind).map(|i| label(industry_code(i, n_ind))).collect();
    let education_labels: Vec<Label> = (1..=params.n_education_levels)
        .map(|e| label(e.to_string()))
        .collect();
    let schemas: Vec<(Label, Vec<Label>)> = std::iter::once(&params.schema)
        .chain(&params.extra_schemas)
        .map(|s| {
            (
                Label::from(s.name()),
                s.groups().iter().map(|g| Label::from(g.as_str())).collect(),
            )
        })
        .collect();

    let (first_year, last_year) = params.birth_year_range;
    let mut records = Vec::with_capacity(params.n_persons);
    for p in 0..params.n_persons {
        let group = rng.random_range(0..groups);
        let occupation = if rng.random::<f64>() < params.segregation {
            let block = &blocks[group];
            block[rng.random_range(0..block.len())]
        } else {
            rng.random_range(0..n_occ)
        };
        let (education, industry) = cells[grid_draws[occupation].sample(&mut rng)];
        let birth_year = rng.random_range(first_year..=last_year);
        let mut category_values = Vec::with_capacity(schemas.len());
        category_values.push((schemas[0].0.clone(), schemas[0].1[group].clone()));
        for (name, labels) in &schemas[1..] {
            category_values.push((
                name.clone(),
                labels[rng.random_range(0..labels.len())].clone(),
            ));
        }
        records.push(PersonRecord {
            person_id: format!("P{:07}", p + 1),
            weight: 1.0,
            birth_year,
            occupation_code: occupation_labels[occupation].clone(),
            industry_code: industry_labels[industry].clone(),
            education_code: education_labels[education].clone(),
            category_values,
        });
    }
    Ok(records)
}
