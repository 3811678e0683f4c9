use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while loading, encoding or splitting data.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("failed to read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("target column `{0}` not found in header")]
    MissingTarget(String),
    #[error("id column `{0}` not found in header")]
    MissingIdColumn(String),
    #[error("row {row} has {found} cells, header has {expected}")]
    RowArity { row: usize, expected: usize, found: usize },
    #[error("row {row} has no value for the target column")]
    MissingLabel { row: usize },
    #[error("degenerate dataset: {positives} positive and {negatives} negative examples")]
    Degenerate { positives: usize, negatives: usize },
    #[error("duplicate feature name `{0}`")]
    DuplicateFeature(String),
    #[error("categorical feature `{0}` has no observed values")]
    EmptyCategorical(String),
    #[error("bin count must be at least 1")]
    InvalidBins,
    #[error("cannot split {n} examples into {k} folds")]
    InvalidFolds { n: usize, k: usize },
    #[error("logic program line {line}: {message}")]
    Program { line: usize, message: String },
}

/// Structural problems in a hypothesis or its text form.
#[derive(Debug, Error, PartialEq)]
pub enum HypothesisError {
    #[error("ab{0} is referenced but never defined")]
    DanglingAbnormal(usize),
    #[error("abnormality dependencies form a cycle through ab{0}")]
    Cyclic(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown feature predicate `{0}`")]
    UnknownFeature(String),
    #[error("feature `{feature}` has no category `{category}`")]
    UnknownCategory { feature: String, category: String },
}

/// Errors from `#pred` files and English rendering.
#[derive(Debug, Error, PartialEq)]
pub enum TranslateError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: duplicate directive for {predicate}")]
    Duplicate { line: usize, predicate: String },
    #[error("no #pred directive for {0}")]
    MissingDirective(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClusterError {
    #[error("number of clusters must be at least 1")]
    InvalidK,
    #[error("cannot cluster an empty point set")]
    NoPoints,
    #[error("points have inconsistent dimensions")]
    Ragged,
}
