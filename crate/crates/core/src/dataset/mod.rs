//! Tabular examples, their schema, and the views derived from them.
//!
//! Every column other than the target (and an optional id column) becomes a
//! feature. A feature is numeric when every non-missing cell parses as a
//! finite real, categorical otherwise. Feature names are normalised into
//! lowercase predicate names so that they can be written as logic atoms.

mod encode;
mod folds;
mod logic;

use std::collections::{HashMap, HashSet};
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

pub use encode::{
    encode_binary, encode_mixed, equal_frequency_cuts, merge_ranges, normalize_for_clustering,
    ColumnSource, EncodeOptions, EncodedMatrix, DEFAULT_BINS, DEFAULT_MERGE_TOLERANCE,
};
pub use folds::{make_folds, Fold, FoldSplit};
pub use logic::{parse_program, LogicProgram};

use crate::error::DataError;

/// Token that marks a boolean attribute as holding. Categorical literals on
/// this category render as plain unary atoms, e.g. `bird(X)`.
pub const TRUE_TOKEN: &str = "true";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    Categorical,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Feature {
    /// Predicate-safe name used in rendered theories.
    pub name: String,
    /// Header text the feature was read from.
    pub column: String,
    pub kind: FeatureKind,
    /// Observed category tokens, in first-seen order. Empty for numeric features.
    pub categories: Vec<String>,
}

impl Feature {
    pub fn numeric(name: impl Into<String>) -> Self {
        let name = name.into();
        Self { column: name.clone(), name, kind: FeatureKind::Numeric, categories: Vec::new() }
    }

    pub fn categorical<S: Into<String>>(
        name: impl Into<String>,
        categories: impl IntoIterator<Item = S>,
    ) -> Self {
        let name = name.into();
        Self {
            column: name.clone(),
            name,
            kind: FeatureKind::Categorical,
            categories: categories.into_iter().map(Into::into).collect(),
        }
    }

    pub fn category_index(&self, token: &str) -> Option<u32> {
        self.categories.iter().position(|c| c == token).map(|i| i as u32)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSchema {
    pub features: Vec<Feature>,
    /// Predicate name of the learned concept.
    pub target: String,
    pub positive_label: String,
}

impl FeatureSchema {
    pub fn new(
        features: Vec<Feature>,
        target: impl Into<String>,
        positive_label: impl Into<String>,
    ) -> Result<Self, DataError> {
        let target = target.into();
        let mut seen = HashSet::new();
        for f in &features {
            if !seen.insert(f.name.as_str()) || f.name == target {
                return Err(DataError::DuplicateFeature(f.name.clone()));
            }
            if f.kind == FeatureKind::Categorical && f.categories.is_empty() {
                return Err(DataError::EmptyCategorical(f.name.clone()));
            }
        }
        Ok(Self { features, target, positive_label: positive_label.into() })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn category_name(&self, feature: usize, category: u32) -> &str {
        &self.features[feature].categories[category as usize]
    }
}

/// A single cell. Categories are indices into the feature's category list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Category(u32),
    Number(f64),
    Missing,
}

impl Value {
    pub fn as_number(self) -> Option<f64> {
        match self {
            Value::Number(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub id: String,
    pub values: Vec<Value>,
    pub label: Label,
    /// 1 for an active example. Demotion happens on index sets inside the
    /// learner, so loaded examples always carry weight 1.
    pub weight: f64,
}

impl Example {
    pub fn new(id: impl Into<String>, values: Vec<Value>, label: Label) -> Self {
        Self { id: id.into(), values, label, weight: 1.0 }
    }

    pub fn is_positive(&self) -> bool {
        self.label == Label::Positive
    }
}

/// A schema together with the examples that conform to it.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub schema: Arc<FeatureSchema>,
    pub examples: Vec<Example>,
}

impl Dataset {
    pub fn new(schema: FeatureSchema, examples: Vec<Example>) -> Self {
        Self { schema: Arc::new(schema), examples }
    }

    pub fn from_csv(path: impl AsRef<Path>, options: &LoadOptions) -> Result<Self, DataError> {
        let (schema, examples) = load_csv_with(path, options)?;
        Ok(Self::new(schema, examples))
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.examples.iter().map(|e| e.label).collect()
    }

    pub fn select(&self, indices: &[usize]) -> Vec<&Example> {
        indices.iter().map(|&i| &self.examples[i]).collect()
    }

    pub fn positives(&self) -> Vec<&Example> {
        self.examples.iter().filter(|e| e.is_positive()).collect()
    }

    pub fn negatives(&self) -> Vec<&Example> {
        self.examples.iter().filter(|e| !e.is_positive()).collect()
    }
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub target: String,
    pub positive_label: String,
    /// Column holding example identifiers. Row numbers (from 1) are used otherwise.
    pub id_column: Option<String>,
    /// Without `id_column`, treat the first non-numeric column whose values
    /// are all present and distinct as the identifier.
    pub detect_id: bool,
}

impl LoadOptions {
    pub fn new(target: impl Into<String>, positive_label: impl Into<String>) -> Self {
        Self { target: target.into(), positive_label: positive_label.into(), id_column: None, detect_id: false }
    }

    pub fn detecting_id(mut self) -> Self {
        self.detect_id = true;
        self
    }

    pub fn with_id_column(mut self, column: impl Into<String>) -> Self {
        self.id_column = Some(column.into());
        self
    }
}

/// Load a CSV file with a header row.
pub fn load_csv(
    path: impl AsRef<Path>,
    target: &str,
    positive_label: &str,
) -> Result<(FeatureSchema, Vec<Example>), DataError> {
    load_csv_with(path, &LoadOptions::new(target, positive_label))
}

pub fn load_csv_with(
    path: impl AsRef<Path>,
    options: &LoadOptions,
) -> Result<(FeatureSchema, Vec<Example>), DataError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)
        .map_err(|source| DataError::Io { path: path.to_path_buf(), source })?;
    read_csv(file, options)
}

pub fn read_csv<R: Read>(
    reader: R,
    options: &LoadOptions,
) -> Result<(FeatureSchema, Vec<Example>), DataError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();

    let target_col = header
        .iter()
        .position(|h| *h == options.target)
        .ok_or_else(|| DataError::MissingTarget(options.target.clone()))?;
    let id_col = match &options.id_column {
        Some(name) => Some(
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| DataError::MissingIdColumn(name.clone()))?,
        ),
        None => None,
    };

    let mut cells: Vec<Vec<Option<String>>> = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() == 1 && record.get(0).is_some_and(|c| c.trim().is_empty()) {
            continue;
        }
        if record.len() != header.len() {
            return Err(DataError::RowArity {
                row: i + 1,
                expected: header.len(),
                found: record.len(),
            });
        }
        cells.push(record.iter().map(parse_cell).collect());
    }

    let id_col = id_col.or_else(|| {
        if !options.detect_id || cells.len() < 2 {
            return None;
        }
        (0..header.len()).filter(|&c| c != target_col).find(|&c| {
            let mut seen = HashSet::new();
            cells.iter().all(|r| r[c].as_deref().is_some_and(|v| parse_number(v).is_none() && seen.insert(v)))
        })
    });

    let feature_cols: Vec<usize> =
        (0..header.len()).filter(|&c| c != target_col && Some(c) != id_col).collect();

    let target_name = predicate_name(&options.target);
    let mut taken: HashSet<String> = HashSet::from([target_name.clone()]);
    let mut features = Vec::new();
    let mut kept_cols = Vec::new();
    for &col in &feature_cols {
        let present: Vec<&str> = cells.iter().filter_map(|r| r[col].as_deref()).collect();
        if present.is_empty() {
            continue;
        }
        let numeric = present.iter().all(|s| parse_number(s).is_some());
        let name = unique_name(predicate_name(&header[col]), &mut taken);
        let feature = if numeric {
            Feature { name, column: header[col].clone(), kind: FeatureKind::Numeric, categories: vec![] }
        } else {
            let mut categories: Vec<String> = Vec::new();
            let mut index = HashSet::new();
            for s in &present {
                if index.insert(*s) {
                    categories.push(s.to_string());
                }
            }
            Feature { name, column: header[col].clone(), kind: FeatureKind::Categorical, categories }
        };
        features.push(feature);
        kept_cols.push(col);
    }

    let lookups: Vec<HashMap<&str, u32>> = features
        .iter()
        .map(|f| f.categories.iter().enumerate().map(|(i, c)| (c.as_str(), i as u32)).collect())
        .collect();

    let mut examples = Vec::with_capacity(cells.len());
    for (row, record) in cells.iter().enumerate() {
        let label = match &record[target_col] {
            Some(v) if *v == options.positive_label => Label::Positive,
            Some(_) => Label::Negative,
            None => return Err(DataError::MissingLabel { row: row + 1 }),
        };
        let id = match id_col {
            Some(c) => record[c].clone().unwrap_or_else(|| (row + 1).to_string()),
            None => (row + 1).to_string(),
        };
        let values = kept_cols
            .iter()
            .zip(&features)
            .zip(&lookups)
            .map(|((&col, feature), lookup)| match (&record[col], feature.kind) {
                (None, _) => Value::Missing,
                (Some(s), FeatureKind::Numeric) => Value::Number(parse_number(s).unwrap()),
                (Some(s), FeatureKind::Categorical) => Value::Category(lookup[s.as_str()]),
            })
            .collect();
        examples.push(Example::new(id, values, label));
    }

    check_both_classes(&examples)?;
    let schema = FeatureSchema::new(features, target_name, options.positive_label.clone())?;
    Ok((schema, examples))
}

pub(crate) fn check_both_classes(examples: &[Example]) -> Result<(), DataError> {
    let positives = examples.iter().filter(|e| e.is_positive()).count();
    let negatives = examples.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(DataError::Degenerate { positives, negatives });
    }
    Ok(())
}

fn parse_cell(raw: &str) -> Option<String> {
    let s = raw.trim();
    if s.is_empty() || s == "?" {
        None
    } else {
        Some(s.to_string())
    }
}

fn parse_number(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Lowercase `[a-z0-9_]` identifier starting with a letter.
pub fn predicate_name(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut last_underscore = false;
    for ch in raw.chars() {
        let c = ch.to_ascii_lowercase();
        if c.is_ascii_alphanumeric() {
            out.push(c);
            last_underscore = false;
        } else if !last_underscore && !out.is_empty() {
            out.push('_');
            last_underscore = true;
        }
    }
    while out.ends_with('_') {
        out.pop();
    }
    if !out.starts_with(|c: char| c.is_ascii_lowercase()) {
        out.insert_str(0, "f_");
    }
    out
}

fn unique_name(base: String, taken: &mut HashSet<String>) -> String {
    let mut name = base.clone();
    let mut n = 2;
    while taken.contains(&name) {
        name = format!("{base}_{n}");
        n += 1;
    }
    taken.insert(name.clone());
    name
}
