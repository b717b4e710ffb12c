//! Feature ranking: supervised discretization, chi-squared and information
//! gain ratio scores, top-k selection.

mod discretize;

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kdd_data::{AttackClass, Dataset};

pub(crate) use discretize::entropy;
pub use discretize::{discretize, mdl_cut_points, Binning, Discretization};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RankError {
    #[error("cannot select {k} of {available} features")]
    TooManyRequested { k: usize, available: usize },
    #[error("discretization does not match the dataset schema")]
    SchemaMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMethod {
    ChiSquared,
    InfoGainRatio,
}

impl ScoreMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ScoreMethod::ChiSquared => "chi_squared",
            ScoreMethod::InfoGainRatio => "info_gain_ratio",
        }
    }
}

impl fmt::Display for ScoreMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScore {
    pub feature: String,
    /// Position in the scored schema; breaks score ties.
    pub index: usize,
    pub score: f64,
    pub method: ScoreMethod,
}

/// Bin x class counts for one feature.
pub fn contingency(
    train: &Dataset,
    disc: &Discretization,
    feature: usize,
) -> Vec<[usize; AttackClass::COUNT]> {
    let mut table: Vec<[usize; AttackClass::COUNT]> = Vec::new();
    for (r, c) in train.iter() {
        let b = disc.bin(feature, r.values()[feature]);
        if b >= table.len() {
            table.resize(b + 1, [0; AttackClass::COUNT]);
        }
        table[b][c.index()] += 1;
    }
    table
}

/// Pearson statistic; cells with zero expected count contribute nothing.
pub fn chi_squared(table: &[[usize; AttackClass::COUNT]]) -> f64 {
    let n: usize = table.iter().flatten().sum();
    if n == 0 {
        return 0.0;
    }
    let mut cols = [0usize; AttackClass::COUNT];
    for row in table {
        for (k, &o) in row.iter().enumerate() {
            cols[k] += o;
        }
    }
    let n = n as f64;
    let mut chi = 0.0;
    for row in table {
        let rt: usize = row.iter().sum();
        for (k, &o) in row.iter().enumerate() {
            let e = rt as f64 * cols[k] as f64 / n;
            if e > 0.0 {
                let d = o as f64 - e;
                chi += d * d / e;
            }
        }
    }
    chi
}

/// Information gain over split information, 0 when the split information is 0.
pub fn info_gain_ratio(table: &[[usize; AttackClass::COUNT]]) -> f64 {
    let n: usize = table.iter().flatten().sum();
    if n == 0 {
        return 0.0;
    }
    let mut cols = [0usize; AttackClass::COUNT];
    for row in table {
        for (k, &o) in row.iter().enumerate() {
            cols[k] += o;
        }
    }
    let sizes: Vec<usize> = table.iter().map(|r| r.iter().sum()).collect();
    let split_info = entropy(&sizes);
    if split_info <= 0.0 {
        return 0.0;
    }
    let cond: f64 = table
        .iter()
        .zip(&sizes)
        .map(|(row, &s)| s as f64 / n as f64 * entropy(row))
        .sum();
    ((entropy(&cols) - cond) / split_info).max(0.0)
}

fn check(train: &Dataset, disc: &Discretization) -> Result<(), RankError> {
    if disc.names.len() != train.schema().len()
        || train.schema().names().zip(&disc.names).any(|(a, b)| a != b)
    {
        return Err(RankError::SchemaMismatch);
    }
    Ok(())
}

pub fn chi_squared_score(
    train: &Dataset,
    disc: &Discretization,
    feature: usize,
) -> Result<FeatureScore, RankError> {
    check(train, disc)?;
    Ok(score_one(train, disc, feature, ScoreMethod::ChiSquared))
}

pub fn info_gain_ratio_score(
    train: &Dataset,
    disc: &Discretization,
    feature: usize,
) -> Result<FeatureScore, RankError> {
    check(train, disc)?;
    Ok(score_one(train, disc, feature, ScoreMethod::InfoGainRatio))
}

fn score_one(
    train: &Dataset,
    disc: &Discretization,
    feature: usize,
    method: ScoreMethod,
) -> FeatureScore {
    let table = contingency(train, disc, feature);
    let score = match method {
        ScoreMethod::ChiSquared => chi_squared(&table),
        ScoreMethod::InfoGainRatio => info_gain_ratio(&table),
    };
    FeatureScore {
        feature: disc.names[feature].clone(),
        index: feature,
        score,
        method,
    }
}

/// Scores every feature, in schema order.
pub fn score_features(
    train: &Dataset,
    disc: &Discretization,
    method: ScoreMethod,
) -> Result<Vec<FeatureScore>, RankError> {
    check(train, disc)?;
    Ok((0..disc.names.len())
        .into_par_iter()
        .map(|f| score_one(train, disc, f, method))
        .collect())
}

/// Descending score, ascending index on ties.
pub fn rank(scores: &[FeatureScore]) -> Vec<FeatureScore> {
    let mut v = scores.to_vec();
    v.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.index.cmp(&b.index)));
    v
}

/// Names of the `k` best features, best first.
pub fn select_top_k(scores: &[FeatureScore], k: usize) -> Result<Vec<String>, RankError> {
    if k > scores.len() {
        return Err(RankError::TooManyRequested {
            k,
            available: scores.len(),
        });
    }
    Ok(rank(scores)
        .into_iter()
        .take(k)
        .map(|s| s.feature)
        .collect())
}

pub fn mean_score(scores: &[FeatureScore]) -> f64 {
    if scores.is_empty() {
        0.0
    } else {
        scores.iter().map(|s| s.score).sum::<f64>() / scores.len() as f64
    }
}

/// Tab-separated `rank feature method score`, best first.
pub fn rank_report(scores: &[FeatureScore]) -> String {
    let mut out = String::from("rank\tfeature\tmethod\tscore\n");
    for (i, s) in rank(scores).iter().enumerate() {
        out.push_str(&format!(
            "{}\t{}\t{}\t{:.6}\n",
            i + 1,
            s.feature,
            s.method,
            s.score
        ));
    }
    out
}
