use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::ops::Index;
use std::path::Path;

use flate2::read::MultiGzDecoder;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::record::{intern_line, serialize_record, split_line, IngestMode, KddRecord};
use super::schema::{FeatureKind, FeatureSchema, SymbolDomain};
use super::taxonomy::{AttackClass, ClassTaxonomy};
use super::{DataError, LineError};

/// Per-class record counts, indexed by [`AttackClass`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts(pub [usize; AttackClass::COUNT]);

impl ClassCounts {
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn add(&mut self, class: AttackClass) {
        self.0[class.index()] += 1;
    }

    pub fn iter(&self) -> impl Iterator<Item = (AttackClass, usize)> + '_ {
        AttackClass::ALL.into_iter().map(|c| (c, self.0[c.index()]))
    }

    /// Share of `class` in percent; 0 for an empty histogram.
    pub fn ratio_percent(&self, class: AttackClass) -> f64 {
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            self.0[class.index()] as f64 * 100.0 / total as f64
        }
    }
}

impl Index<AttackClass> for ClassCounts {
    type Output = usize;

    fn index(&self, class: AttackClass) -> &usize {
        &self.0[class.index()]
    }
}

/// An ordered collection of records sharing one schema, each with its class.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: FeatureSchema,
    records: Vec<KddRecord>,
    classes: Vec<AttackClass>,
}

impl Dataset {
    pub fn empty(schema: FeatureSchema) -> Self {
        Dataset {
            schema,
            records: Vec::new(),
            classes: Vec::new(),
        }
    }

    /// Classifies every record's label with `taxonomy`.
    pub fn new(
        schema: FeatureSchema,
        records: Vec<KddRecord>,
        taxonomy: &ClassTaxonomy,
    ) -> Result<Self, DataError> {
        let classes = records
            .iter()
            .map(|r| taxonomy.classify(r.label()))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_parts(schema, records, classes)
    }

    pub fn from_parts(
        schema: FeatureSchema,
        records: Vec<KddRecord>,
        classes: Vec<AttackClass>,
    ) -> Result<Self, DataError> {
        if records.len() != classes.len() {
            return Err(DataError::Misaligned {
                records: records.len(),
                classes: classes.len(),
            });
        }
        if let Some(r) = records.iter().find(|r| r.len() != schema.len()) {
            return Err(DataError::FieldCountMismatch {
                expected: schema.len(),
                found: r.len(),
            });
        }
        Ok(Dataset {
            schema,
            records,
            classes,
        })
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn records(&self) -> &[KddRecord] {
        &self.records
    }

    pub fn classes(&self) -> &[AttackClass] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&KddRecord, AttackClass)> {
        self.records.iter().zip(self.classes.iter().copied())
    }

    pub fn class_counts(&self) -> ClassCounts {
        let mut counts = ClassCounts::default();
        for &c in &self.classes {
            counts.add(c);
        }
        counts
    }

    /// A new dataset holding the rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
            classes: indices.iter().map(|&i| self.classes[i]).collect(),
        }
    }

    /// Replaces the schema with one that has the same layout (e.g. a domain
    /// grown by a later ingest).
    pub fn with_schema(mut self, schema: FeatureSchema) -> Result<Self, DataError> {
        if !self.schema.is_compatible(&schema) {
            return Err(DataError::SchemaMismatch);
        }
        self.schema = schema;
        Ok(self)
    }
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub mode: IngestMode,
    /// Number of malformed lines tolerated (and skipped) before loading aborts.
    pub error_budget: usize,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            mode: IngestMode::Open,
            error_budget: 0,
        }
    }
}

/// Reads a file, transparently gunzipping it when it starts with the gzip magic.
pub fn read_text(path: &Path) -> Result<String, DataError> {
    let io = |e: std::io::Error| DataError::io(path, e);
    let mut file = File::open(path).map_err(io)?;
    let mut magic = [0u8; 2];
    let n = file.read(&mut magic).map_err(io)?;
    let file = File::open(path).map_err(io)?;
    let mut text = String::new();
    if n == 2 && magic == [0x1f, 0x8b] {
        MultiGzDecoder::new(BufReader::new(file))
            .read_to_string(&mut text)
            .map_err(io)?;
    } else {
        BufReader::new(file).read_to_string(&mut text).map_err(io)?;
    }
    Ok(text)
}

/// Parses KDD text. Lines are split and numerically parsed in parallel; symbol
/// interning then runs in file order so domain codes do not depend on the
/// thread count.
pub fn parse_dataset(
    text: &str,
    mut schema: FeatureSchema,
    taxonomy: &ClassTaxonomy,
    options: &LoadOptions,
) -> Result<(Dataset, Vec<LineError>), DataError> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l))
        .collect();
    let split: Vec<_> = lines
        .par_iter()
        .map(|&(no, line)| (no, split_line(line, &schema)))
        .collect();

    let mut records = Vec::with_capacity(split.len());
    let mut classes = Vec::with_capacity(split.len());
    let mut rejected = Vec::new();
    for (line, parsed) in split {
        let outcome = parsed
            .and_then(|s| intern_line(s, &mut schema, options.mode))
            .and_then(|r| taxonomy.classify(r.label()).map(|c| (r, c)));
        match outcome {
            Ok((r, c)) => {
                records.push(r);
                classes.push(c);
            }
            Err(error) => {
                rejected.push(LineError { line, error });
                if rejected.len() > options.error_budget {
                    return Err(DataError::TooManyErrors { errors: rejected });
                }
            }
        }
    }
    let ds = Dataset::from_parts(schema, records, classes)?;
    Ok((ds, rejected))
}

/// Loads a plain or gzip-compressed KDD file with the default options
/// (open-world domains, no malformed lines tolerated).
pub fn load_dataset(
    path: &Path,
    schema: FeatureSchema,
    taxonomy: &ClassTaxonomy,
) -> Result<Dataset, DataError> {
    load_dataset_with(path, schema, taxonomy, &LoadOptions::default()).map(|(ds, _)| ds)
}

pub fn load_dataset_with(
    path: &Path,
    schema: FeatureSchema,
    taxonomy: &ClassTaxonomy,
    options: &LoadOptions,
) -> Result<(Dataset, Vec<LineError>), DataError> {
    let text = read_text(path)?;
    parse_dataset(&text, schema, taxonomy, options)
}

const CACHE_MAGIC: &str = "#chids-cache v1";

/// Writes a dataset cache.
///
/// Layout (UTF-8, `\n` line ends):
///
/// ```text
/// #chids-cache v1
/// #records <n>
/// #feature\t<name>\tnumeric
/// #feature\t<name>\tnominal\t<sym0>,<sym1>,...
/// <value>,<value>,...,<label>          (one line per record)
/// ```
///
/// Nominal domains are written in code order so a reload reproduces the same
/// symbol codes.
pub fn write_cache(ds: &Dataset, path: &Path) -> Result<(), DataError> {
    let io = |e: std::io::Error| DataError::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    write_cache_to(ds, &mut out).map_err(io)?;
    out.flush().map_err(io)
}

pub fn write_cache_to(ds: &Dataset, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "{CACHE_MAGIC}")?;
    writeln!(out, "#records {}", ds.len())?;
    for f in ds.schema().features() {
        match f.kind {
            FeatureKind::Numeric => writeln!(out, "#feature\t{}\tnumeric", f.name)?,
            FeatureKind::Nominal => writeln!(
                out,
                "#feature\t{}\tnominal\t{}",
                f.name,
                f.domain.symbols().join(",")
            )?,
        }
    }
    for r in ds.records() {
        writeln!(out, "{}", serialize_record(r, ds.schema()))?;
    }
    Ok(())
}

pub fn read_cache(path: &Path, taxonomy: &ClassTaxonomy) -> Result<Dataset, DataError> {
    let io = |e: std::io::Error| DataError::io(path, e);
    let file = File::open(path).map_err(io)?;
    let mut reader = BufReader::new(file);
    let mut text = String::new();
    reader.read_to_string(&mut text).map_err(io)?;
    parse_cache(&text, taxonomy)
}

pub fn parse_cache(text: &str, taxonomy: &ClassTaxonomy) -> Result<Dataset, DataError> {
    let mut lines = text.lines();
    if lines.next() != Some(CACHE_MAGIC) {
        return Err(DataError::BadCache("missing version header".into()));
    }
    let declared: usize = lines
        .next()
        .and_then(|l| l.strip_prefix("#records "))
        .and_then(|n| n.trim().parse().ok())
        .ok_or_else(|| DataError::BadCache("missing record count".into()))?;
    let mut defs = Vec::new();
    let mut body_start = 2;
    for line in text.lines().skip(2) {
        let Some(rest) = line.strip_prefix("#feature\t") else {
            break;
        };
        body_start += 1;
        let parts: Vec<&str> = rest.split('\t').collect();
        let def = match parts.as_slice() {
            [name, "numeric"] => (
                name.to_string(),
                FeatureKind::Numeric,
                SymbolDomain::default(),
            ),
            [name, "nominal"] => (
                name.to_string(),
                FeatureKind::Nominal,
                SymbolDomain::default(),
            ),
            [name, "nominal", syms] => (
                name.to_string(),
                FeatureKind::Nominal,
                SymbolDomain::from_symbols(syms.split(',').filter(|s| !s.is_empty())),
            ),
            _ => return Err(DataError::BadCache(format!("bad feature line: {line}"))),
        };
        defs.push(def);
    }
    let schema = FeatureSchema::from_defs(defs)?;
    let body: String = text
        .lines()
        .skip(body_start)
        .flat_map(|l| [l, "\n"])
        .collect();
    let options = LoadOptions {
        mode: IngestMode::Strict,
        error_budget: 0,
    };
    let (ds, _) = parse_dataset(&body, schema, taxonomy, &options)?;
    if ds.len() != declared {
        return Err(DataError::BadCache(format!(
            "header declares {declared} records, found {}",
            ds.len()
        )));
    }
    Ok(ds)
}

/// Streams lines from a reader into records against a frozen schema extended
/// in open mode; used for record streams at detection time.
pub fn read_records(
    reader: impl BufRead,
    schema: &mut FeatureSchema,
    mode: IngestMode,
) -> Result<Vec<KddRecord>, DataError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| DataError::io(Path::new("<stream>"), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let r = super::record::parse_record(&line, schema, mode).map_err(|error| {
            DataError::TooManyErrors {
                errors: vec![LineError { line: i + 1, error }],
            }
        })?;
        out.push(r);
    }
    Ok(out)
}
