use serde::{Deserialize, Serialize};

use super::PreprocessError;
use crate::kdd_data::{Dataset, FeatureKind, FeatureSchema};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FeatureStats {
    /// Mean and population standard deviation over `n` training values.
    Numeric { mu: f64, sigma: f64, n: usize },
    /// Nominal features are left untouched.
    PassThrough,
}

/// Z-score parameters fitted on a training set, one entry per feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub names: Vec<String>,
    pub stats: Vec<FeatureStats>,
}

impl NormalizationStats {
    /// Normalizes one value vector in place (layout must match `names`).
    pub fn apply_values(&self, values: &mut [f64]) {
        for (v, s) in values.iter_mut().zip(&self.stats) {
            if let FeatureStats::Numeric { mu, sigma, .. } = *s {
                *v = if sigma > 0.0 { (*v - mu) / sigma } else { 0.0 };
            }
        }
    }

    pub fn matches(&self, schema: &FeatureSchema) -> bool {
        self.names.len() == schema.len()
            && schema
                .features()
                .iter()
                .zip(&self.names)
                .zip(&self.stats)
                .all(|((f, name), s)| {
                    f.name == *name
                        && matches!(
                            (f.kind, s),
                            (FeatureKind::Numeric, FeatureStats::Numeric { .. })
                                | (FeatureKind::Nominal, FeatureStats::PassThrough)
                        )
                })
    }
}

/// Fits mean and population standard deviation of every numeric feature.
///
/// Both passes sum in record order, so the result is bit-stable.
pub fn fit_normalizer(train: &Dataset) -> Result<NormalizationStats, PreprocessError> {
    if train.is_empty() {
        return Err(PreprocessError::EmptyDataset);
    }
    let n = train.len();
    let schema = train.schema();
    let stats = schema
        .features()
        .iter()
        .map(|f| match f.kind {
            FeatureKind::Nominal => FeatureStats::PassThrough,
            FeatureKind::Numeric => {
                let col = || train.records().iter().map(|r| r.values()[f.index]);
                let mu = col().sum::<f64>() / n as f64;
                let var = col().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n as f64;
                FeatureStats::Numeric {
                    mu,
                    sigma: var.sqrt(),
                    n,
                }
            }
        })
        .collect();
    Ok(NormalizationStats {
        names: schema.names().map(str::to_string).collect(),
        stats,
    })
}

/// Applies `(v - mu) / sigma` to numeric features; zero-variance features map to 0.
pub fn apply_normalizer(
    ds: &Dataset,
    stats: &NormalizationStats,
) -> Result<Dataset, PreprocessError> {
    if !stats.matches(ds.schema()) {
        return Err(PreprocessError::SchemaMismatch);
    }
    let records = ds
        .records()
        .iter()
        .map(|r| {
            let mut values = r.values().to_vec();
            stats.apply_values(&mut values);
            r.with_values(values)
        })
        .collect();
    Ok(
        Dataset::from_parts(ds.schema().clone(), records, ds.classes().to_vec())
            .expect("layout unchanged"),
    )
}
