//! KDD Cup '99 connection records: schema, class taxonomy, parsing and
//! dataset files.

mod dataset;
mod record;
mod schema;
pub mod synthetic;
mod taxonomy;

use std::path::Path;

use thiserror::Error;

pub use dataset::{
    load_dataset, load_dataset_with, parse_cache, parse_dataset, read_cache, read_records,
    read_text, write_cache, write_cache_to, ClassCounts, Dataset, LoadOptions,
};
pub use record::{
    parse_record, parse_record_strict, serialize_record, FeatureValue, IngestMode, KddRecord,
};
pub use schema::{
    FeatureDef, FeatureKind, FeatureSchema, SymbolDomain, DEFAULT_PRUNED_FEATURES, KDD_FEATURES,
};
pub use taxonomy::{classify_label, AttackClass, ClassTaxonomy, KDD_LABELS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataError {
    #[error("expected {expected} fields, found {found}")]
    FieldCountMismatch { expected: usize, found: usize },
    #[error("feature {index}: cannot parse {value:?} as a finite number")]
    NumericParse { index: usize, value: String },
    #[error("feature {index}: unknown symbol {symbol:?}")]
    UnknownNominalSymbol { index: usize, symbol: String },
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("unknown class {0:?}")]
    UnknownClass(String),
    #[error("duplicate feature name {0:?}")]
    DuplicateFeature(String),
    #[error("{records} records but {classes} class labels")]
    Misaligned { records: usize, classes: usize },
    #[error("dataset schema does not match")]
    SchemaMismatch,
    #[error("{path}: {message}")]
    Io {
        path: String,
        kind: std::io::ErrorKind,
        message: String,
    },
    #[error("malformed input: {}", summarize(errors))]
    TooManyErrors { errors: Vec<LineError> },
    #[error("bad cache file: {0}")]
    BadCache(String),
}

impl DataError {
    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        DataError::Io {
            path: path.display().to_string(),
            kind: e.kind(),
            message: e.to_string(),
        }
    }
}

/// A rejected input line.
#[derive(Debug, Clone, PartialEq)]
pub struct LineError {
    /// 1-based line number.
    pub line: usize,
    pub error: DataError,
}

fn summarize(errors: &[LineError]) -> String {
    let shown: Vec<String> = errors
        .iter()
        .take(3)
        .map(|e| format!("line {}: {}", e.line, e.error))
        .collect();
    let more = errors.len().saturating_sub(3);
    if more > 0 {
        format!("{} (and {more} more)", shown.join("; "))
    } else {
        shown.join("; ")
    }
}
