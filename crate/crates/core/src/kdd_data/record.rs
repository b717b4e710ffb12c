use std::fmt::Write as _;
use std::hash::{Hash, Hasher};

use super::schema::{FeatureKind, FeatureSchema};
use super::DataError;

/// Whether unseen nominal symbols extend the schema domain or are rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IngestMode {
    #[default]
    Open,
    Strict,
}

/// Typed view of one feature value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeatureValue<'a> {
    Numeric(f64),
    Nominal(&'a str),
}

/// One connection sample.
///
/// Numeric features are stored as-is; nominal features are stored as the code
/// of their symbol in the schema domain. Equality and hashing are bitwise over
/// the stored values, which is what exact-duplicate detection needs.
#[derive(Debug, Clone)]
pub struct KddRecord {
    values: Box<[f64]>,
    label: Box<str>,
}

impl KddRecord {
    pub fn new(values: Vec<f64>, label: impl Into<String>) -> Self {
        KddRecord {
            values: values.into_boxed_slice(),
            label: label.into().into_boxed_str(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value<'s>(&self, index: usize, schema: &'s FeatureSchema) -> FeatureValue<'s> {
        let def = schema.feature(index);
        match def.kind {
            FeatureKind::Numeric => FeatureValue::Numeric(self.values[index]),
            FeatureKind::Nominal => {
                FeatureValue::Nominal(def.domain.symbol(self.values[index] as u32).unwrap_or("?"))
            }
        }
    }

    pub(crate) fn project(&self, indices: &[usize]) -> KddRecord {
        KddRecord {
            values: indices.iter().map(|&i| self.values[i]).collect(),
            label: self.label.clone(),
        }
    }

    pub(crate) fn with_values(&self, values: Vec<f64>) -> KddRecord {
        KddRecord {
            values: values.into_boxed_slice(),
            label: self.label.clone(),
        }
    }
}

impl PartialEq for KddRecord {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label
            && self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(other.values.iter())
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl Eq for KddRecord {}

impl Hash for KddRecord {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.label.hash(state);
        for v in self.values.iter() {
            state.write_u64(v.to_bits());
        }
    }
}

/// A line split into fields with numerics parsed but nominal symbols not yet
/// interned. Produced in parallel, interned sequentially.
#[derive(Debug)]
pub(crate) struct SplitLine<'a> {
    values: Vec<f64>,
    symbols: Vec<(usize, &'a str)>,
    label: &'a str,
}

pub(crate) fn split_line<'a>(
    line: &'a str,
    schema: &FeatureSchema,
) -> Result<SplitLine<'a>, DataError> {
    let line = line.trim_end_matches(['\r', '\n']);
    let expected = schema.len() + 1;
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != expected {
        return Err(DataError::FieldCountMismatch {
            expected,
            found: fields.len(),
        });
    }
    let mut values = vec![0.0; schema.len()];
    let mut symbols = Vec::new();
    for (def, field) in schema.features().iter().zip(&fields) {
        let field = field.trim();
        match def.kind {
            FeatureKind::Numeric => {
                let v: f64 = field.parse().map_err(|_| DataError::NumericParse {
                    index: def.index,
                    value: field.to_string(),
                })?;
                if !v.is_finite() {
                    return Err(DataError::NumericParse {
                        index: def.index,
                        value: field.to_string(),
                    });
                }
                values[def.index] = v;
            }
            FeatureKind::Nominal => symbols.push((def.index, field)),
        }
    }
    let label = fields[expected - 1].trim();
    let label = label.strip_suffix('.').unwrap_or(label);
    Ok(SplitLine {
        values,
        symbols,
        label,
    })
}

pub(crate) fn intern_line(
    split: SplitLine<'_>,
    schema: &mut FeatureSchema,
    mode: IngestMode,
) -> Result<KddRecord, DataError> {
    let SplitLine {
        mut values,
        symbols,
        label,
    } = split;
    for (index, symbol) in symbols {
        let domain = schema.domain_mut(index);
        let code = match (domain.code(symbol), mode) {
            (Some(code), _) => code,
            (None, IngestMode::Open) => domain.intern(symbol),
            (None, IngestMode::Strict) => {
                return Err(DataError::UnknownNominalSymbol {
                    index,
                    symbol: symbol.to_string(),
                })
            }
        };
        values[index] = f64::from(code);
    }
    Ok(KddRecord::new(values, label))
}

/// Parses one comma-separated KDD line (41 features then the label).
///
/// In [`IngestMode::Open`] unseen nominal symbols are appended to the schema's
/// domains.
pub fn parse_record(
    line: &str,
    schema: &mut FeatureSchema,
    mode: IngestMode,
) -> Result<KddRecord, DataError> {
    let split = split_line(line, schema)?;
    intern_line(split, schema, mode)
}

/// Parses against a frozen schema; unseen nominal symbols are an error.
pub fn parse_record_strict(line: &str, schema: &FeatureSchema) -> Result<KddRecord, DataError> {
    let split = split_line(line, schema)?;
    let mut values = split.values;
    for (index, symbol) in split.symbols {
        let code = schema.feature(index).domain.code(symbol).ok_or_else(|| {
            DataError::UnknownNominalSymbol {
                index,
                symbol: symbol.to_string(),
            }
        })?;
        values[index] = f64::from(code);
    }
    Ok(KddRecord::new(values, split.label))
}

/// Writes a record back in the KDD comma-separated layout (no trailing period).
pub fn serialize_record(record: &KddRecord, schema: &FeatureSchema) -> String {
    let mut out = String::with_capacity(record.len() * 4 + 16);
    for (i, def) in schema.features().iter().enumerate() {
        match record.value(i, schema) {
            FeatureValue::Numeric(v) => {
                let _ = write!(out, "{v}");
            }
            FeatureValue::Nominal(s) => out.push_str(s),
        }
        debug_assert_eq!(def.index, i);
        out.push(',');
    }
    out.push_str(record.label());
    out
}
