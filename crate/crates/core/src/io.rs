//! Microdata and attribute-matrix CSV files.
//!
//! Microdata header: `person_id,weight,birth_year,occupation_code,
//! industry_code,education_code,<extra columns…>`, where the extra columns are
//! the configured categories (plus a filter column, if any). Column order
//! in the input is free; only presence is checked.

use std::io::{Read, Write};

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::format::fmt_g17;
use crate::measures::AttributeMatrix;
use crate::ons::{LabelInterner, OccupationalNetwork, PersonRecord};

pub const MICRODATA_COLUMNS: [&str; 6] = [
    "person_id",
    "weight",
    "birth_year",
    "occupation_code",
    "industry_code",
    "education_code",
];

/// Reads microdata, requiring every fixed column and every name in
/// `extra_columns`. Malformed numbers and non-positive weights are errors
/// carrying the line number; empty codes are kept and excluded later.
pub fn read_microdata<R: Read>(input: R, extra_columns: &[String]) -> Result<Vec<PersonRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::input(Some(1), format!("missing required column {name:?}")))
    };
    let fixed: Vec<usize> = MICRODATA_COLUMNS
        .iter()
        .map(|c| find(c))
        .collect::<Result<_>>()?;
    let extra: Vec<usize> = extra_columns
        .iter()
        .map(|c| find(c))
        .collect::<Result<_>>()?;

    let mut interner = LabelInterner::new();
    let extra_labels: Vec<_> = extra_columns.iter().map(|c| interner.intern(c)).collect();
    let mut records = Vec::new();
    let mut row = csv::StringRecord::new();
    while reader.read_record(&mut row)? {
        let line = row.position().map(|p| p.line());
        let field = |i: usize| row.get(fixed[i]).unwrap_or_default();
        let weight: f64 = field(1)
            .parse()
            .map_err(|_| Error::input(line, format!("weight {:?} is not a number", field(1))))?;
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::input(
                line,
                format!("weight {weight} must be positive"),
            ));
        }
        let birth_year: i32 = field(2).parse().map_err(|_| {
            Error::input(line, format!("birth_year {:?} is not an integer", field(2)))
        })?;
        records.push(PersonRecord {
            person_id: field(0).to_string(),
            weight,
            birth_year,
            occupation_code: interner.intern(field(3)),
            industry_code: interner.intern(field(4)),
            education_code: interner.intern(field(5)),
            category_values: extra
                .iter()
                .zip(&extra_labels)
                .map(|(&col, name)| {
                    (
                        name.clone(),
                        interner.intern(row.get(col).unwrap_or_default()),
                    )
                })
                .collect(),
        });
    }
    Ok(records)
}

/// Writes microdata with the fixed columns followed by `extra_columns`.
pub fn write_microdata<W: Write>(
    out: W,
    records: &[PersonRecord],
    extra_columns: &[String],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<&str> = MICRODATA_COLUMNS
        .iter()
        .copied()
        .chain(extra_columns.iter().map(String::as_str))
        .collect();
    w.write_record(&header)?;
    let mut row: Vec<String> = Vec::with_capacity(header.len());
    for r in records {
        row.clear();
        row.push(r.person_id.clone());
        row.push(fmt_g17(r.weight));
        row.push(r.birth_year.to_string());
        row.push(r.occupation_code.to_string());
        row.push(r.industry_code.to_string());
        row.push(r.education_code.to_string());
        for c in extra_columns {
            row.push(r.category_value(c).unwrap_or_default().to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `occupation_code,<group_1>,…,<group_d>` with one row per node.
pub fn write_attributes<W: Write>(out: W, network: &OccupationalNetwork) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["occupation_code".to_string()];
    header.extend(network.schema.groups().iter().cloned());
    w.write_record(&header)?;
    for (label, row) in network
        .labels
        .iter()
        .zip(network.attributes.as_array().rows())
    {
        let mut record = vec![label.clone()];
        record.extend(row.iter().map(|v| fmt_g17(*v)));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// An attribute-matrix file: node labels, group names and values.
#[derive(Debug, Clone)]
pub struct AttributeTable {
    pub labels: Vec<String>,
    pub groups: Vec<String>,
    pub attributes: AttributeMatrix,
}

pub fn read_attributes<R: Read>(input: R) -> Result<AttributeTable> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.get(0) != Some("occupation_code") || headers.len() < 2 {
        return Err(Error::input(
            Some(1),
            "attribute file header must be occupation_code,<group_1>,…",
        ));
    }
    let groups: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let mut labels = Vec::new();
    let mut values = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map(|p| p.line());
        let label = row.get(0).unwrap_or_default().to_string();
        if labels.contains(&label) {
            return Err(Error::input(
                line,
                format!("duplicate occupation {label:?}"),
            ));
        }
        labels.push(label);
        for v in row.iter().skip(1) {
            values.push(
                v.parse::<f64>()
                    .map_err(|_| Error::input(line, format!("{v:?} is not a number")))?,
            );
        }
    }
    let matrix = Array2::from_shape_vec((labels.len(), groups.len()), values)
        .map_err(|e| Error::input(None, e.to_string()))?;
    let attributes = AttributeMatrix::new(matrix).map_err(|e| Error::input(None, e.to_string()))?;
    Ok(AttributeTable {
        labels,
        groups,
        attributes,
    })
}
