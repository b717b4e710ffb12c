use std::fmt::Write as _;

use super::rules::RuleSet;
use super::LearnError;
use crate::kdd_data::{AttackClass, FeatureKind, FeatureSchema, KddRecord, SymbolDomain};
use crate::preprocess::{FeatureStats, NormalizationStats};

const MODEL_MAGIC: &str = "#chids-model v1";

/// Code given to symbols the model never saw; matches no `=` test.
pub const UNSEEN_CODE: f64 = u32::MAX as f64;

/// A trained decision list together with the feature layout and z-score
/// statistics it expects.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionModel {
    pub schema: FeatureSchema,
    pub normalizer: NormalizationStats,
    pub rules: RuleSet,
}

impl DetectionModel {
    pub fn new(
        schema: FeatureSchema,
        normalizer: NormalizationStats,
        rules: RuleSet,
    ) -> Result<Self, LearnError> {
        if !normalizer.matches(&schema) {
            return Err(LearnError::SchemaMismatch);
        }
        Ok(DetectionModel {
            schema,
            normalizer,
            rules,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{MODEL_MAGIC}\n");
        for f in self.schema.features() {
            match f.kind {
                FeatureKind::Numeric => {
                    let _ = writeln!(out, "#feature\t{}\tnumeric", f.name);
                }
                FeatureKind::Nominal => {
                    let _ = writeln!(
                        out,
                        "#feature\t{}\tnominal\t{}",
                        f.name,
                        f.domain.symbols().join(",")
                    );
                }
            }
        }
        for (name, s) in self.normalizer.names.iter().zip(&self.normalizer.stats) {
            let _ = match s {
                FeatureStats::Numeric { mu, sigma, n } => {
                    writeln!(out, "#norm\t{name}\t{mu}\t{sigma}\t{n}")
                }
                FeatureStats::PassThrough => writeln!(out, "#norm\t{name}\tpassthrough"),
            };
        }
        out.push_str(&self.rules.render(&self.schema));
        out
    }

    pub fn from_text(text: &str) -> Result<Self, LearnError> {
        let bad = |m: String| LearnError::ModelFormat(m);
        let mut lines = text.lines().peekable();
        if lines.next() != Some(MODEL_MAGIC) {
            return Err(bad("missing model header".into()));
        }
        let mut defs = Vec::new();
        while let Some(rest) = lines.peek().and_then(|l| l.strip_prefix("#feature\t")) {
            let parts: Vec<&str> = rest.split('\t').collect();
            defs.push(match parts.as_slice() {
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
                _ => return Err(bad(format!("bad feature line {rest:?}"))),
            });
            lines.next();
        }
        let schema = FeatureSchema::from_defs(defs).map_err(|e| bad(e.to_string()))?;
        let mut names = Vec::new();
        let mut stats = Vec::new();
        while let Some(rest) = lines.peek().and_then(|l| l.strip_prefix("#norm\t")) {
            let parts: Vec<&str> = rest.split('\t').collect();
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| bad(format!("bad number {s:?}")))
            };
            let (name, s) = match parts.as_slice() {
                [name, "passthrough"] => (name, FeatureStats::PassThrough),
                [name, mu, sigma, n] => (
                    name,
                    FeatureStats::Numeric {
                        mu: num(mu)?,
                        sigma: num(sigma)?,
                        n: n.parse().map_err(|_| bad(format!("bad count {n:?}")))?,
                    },
                ),
                _ => return Err(bad(format!("bad norm line {rest:?}"))),
            };
            names.push(name.to_string());
            stats.push(s);
            lines.next();
        }
        let rest: Vec<&str> = lines.collect();
        let rules = RuleSet::parse(&rest.join("\n"), &schema)?;
        DetectionModel::new(schema, NormalizationStats { names, stats }, rules)
    }

    /// Resolves the model's features against the layout of incoming records.
    pub fn bind(&self, input: &FeatureSchema) -> Result<BoundModel<'_>, LearnError> {
        let mut sources = Vec::with_capacity(self.schema.len());
        let mut remap = Vec::with_capacity(self.schema.len());
        for f in self.schema.features() {
            let src = input.index_of(&f.name).ok_or(LearnError::SchemaMismatch)?;
            let g = input.feature(src);
            if g.kind != f.kind {
                return Err(LearnError::SchemaMismatch);
            }
            sources.push(src);
            remap.push(match f.kind {
                FeatureKind::Numeric => None,
                FeatureKind::Nominal => Some(
                    g.domain
                        .symbols()
                        .iter()
                        .map(|s| f.domain.code(s).map_or(UNSEEN_CODE, |c| c as f64))
                        .collect::<Vec<f64>>(),
                ),
            });
        }
        Ok(BoundModel {
            model: self,
            sources,
            remap,
            width: input.len(),
        })
    }
}

/// A model ready to score records of one input layout.
#[derive(Debug, Clone)]
pub struct BoundModel<'a> {
    model: &'a DetectionModel,
    sources: Vec<usize>,
    remap: Vec<Option<Vec<f64>>>,
    width: usize,
}

impl BoundModel<'_> {
    pub fn model(&self) -> &DetectionModel {
        self.model
    }

    /// Number of values in the records this binding expects.
    pub fn input_width(&self) -> usize {
        self.width
    }

    /// Projects, recodes and normalizes a record into model space.
    pub fn prepare(&self, record: &KddRecord) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .sources
            .iter()
            .zip(&self.remap)
            .map(|(&s, map)| {
                let x = record.values()[s];
                match map {
                    None => x,
                    Some(m) => m.get(x as usize).copied().unwrap_or(UNSEEN_CODE),
                }
            })
            .collect();
        self.model.normalizer.apply_values(&mut v);
        v
    }

    pub fn predict(&self, record: &KddRecord) -> AttackClass {
        self.model.rules.predict_values(&self.prepare(record))
    }
}
