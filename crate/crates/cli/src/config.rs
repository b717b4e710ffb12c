//! Run configuration: a TOML file, then `--seed`, `--out` and `--set`
//! overrides on top.

use std::path::{Path, PathBuf};

use chids_core::anomaly_engine::RuleConfig;
use chids_core::hybrid_pipeline::DecisionPolicy;
use chids_core::kdd_data::{AttackClass, DEFAULT_PRUNED_FEATURES};
use chids_core::misuse_learner::LearnerParams;
use chids_core::preprocess::SplitSpec;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{Failure, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMethod {
    Chi2,
    Igr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSection {
    pub train_size: usize,
    pub test_size: usize,
    pub minority_classes: Vec<AttackClass>,
}

impl Default for SplitSection {
    fn default() -> Self {
        let s = SplitSpec::default();
        SplitSection {
            train_size: s.train_size,
            test_size: s.test_size,
            minority_classes: s.minority_classes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureSection {
    pub prune: Vec<String>,
    pub method: SelectionMethod,
    pub k: usize,
}

impl Default for FeatureSection {
    fn default() -> Self {
        FeatureSection {
            prune: DEFAULT_PRUNED_FEATURES
                .iter()
                .map(|s| s.to_string())
                .collect(),
            method: SelectionMethod::Chi2,
            k: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnomalyMode {
    /// Rule verdicts over an event stream.
    #[default]
    Events,
    /// Every record goes to the classifier.
    All,
    /// Records labeled as attacks go to the classifier.
    Labels,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineSection {
    pub policy: DecisionPolicy,
    pub anomaly: AnomalyMode,
    /// `stdout`, `none` or a path; empty means `<out>/detect/alerts.jsonl`.
    pub alerts: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: PathBuf,
    pub seed: u64,
    pub out: PathBuf,
    pub split: SplitSection,
    pub features: FeatureSection,
    pub learner: LearnerParams,
    pub rules: RuleConfig,
    pub pipeline: PipelineSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: PathBuf::from("data/kddcup.data_10_percent.gz"),
            seed: SplitSpec::default().seed,
            out: PathBuf::from("out"),
            split: SplitSection::default(),
            features: FeatureSection::default(),
            learner: LearnerParams::default(),
            rules: RuleConfig::default(),
            pipeline: PipelineSection::default(),
        }
    }
}

impl RunConfig {
    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec {
            train_size: self.split.train_size,
            test_size: self.split.test_size,
            minority_classes: self.split.minority_classes.clone(),
            seed: self.seed,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// A `--set` value: TOML syntax if it parses, a bare string otherwise.
fn parse_value(raw: &str) -> Value {
    match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => Value::String(raw.to_string()),
    }
}

fn set_path(table: &mut Table, key: &str, value: Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Failure::config(format!("bad key {key:?}")));
    }
    let mut t = table;
    for p in &parts[..parts.len() - 1] {
        let entry = t
            .entry(p.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        t = match entry {
            Value::Table(inner) => inner,
            _ => return Err(Failure::config(format!("{key}: {p} is not a table"))),
        };
    }
    t.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

pub fn load(
    path: Option<&Path>,
    sets: &[String],
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<RunConfig> {
    let mut table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::io(p, e))?;
            text.parse::<Table>()
                .map_err(|e| Failure::config(format!("{}: {e}", p.display())))?
        }
        None => Table::new(),
    };
    for s in sets {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| Failure::config(format!("--set expects key=value, got {s:?}")))?;
        set_path(&mut table, k.trim(), parse_value(v.trim()))?;
    }
    if let Some(seed) = seed {
        table.insert("seed".into(), Value::Integer(seed as i64));
    }
    if let Some(out) = out {
        table.insert("out".into(), Value::String(out.display().to_string()));
    }
    let cfg: RunConfig = table
        .try_into()
        .map_err(|e: toml::de::Error| Failure::config(e.to_string().trim_end().to_string()))?;
    cfg.learner
        .validate()
        .map_err(|e| Failure::config(e.to_string()))?;
    cfg.rules
        .validate()
        .map_err(|e| Failure::config(e.to_string()))?;
    if cfg.features.k == 0 {
        return Err(Failure::config("features.k must be at least 1"));
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = RunConfig::default();
        let back: RunConfig = toml::from_str(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn set_overrides_nested_keys() {
        let sets = [
            "features.k=6".to_string(),
            "features.method=igr".to_string(),
            "pipeline.policy=trust_misuse".to_string(),
            "rules.window = 5.5".to_string(),
            "dataset=/tmp/x.txt".to_string(),
        ];
        let cfg = load(None, &sets, Some(9), None).unwrap();
        assert_eq!(cfg.features.k, 6);
        assert_eq!(cfg.features.method, SelectionMethod::Igr);
        assert_eq!(cfg.pipeline.policy, DecisionPolicy::TrustMisuse);
        assert_eq!(cfg.rules.window, 5.5);
        assert_eq!(cfg.dataset, PathBuf::from("/tmp/x.txt"));
        assert_eq!(cfg.split_spec().seed, 9);
    }

    #[test]
    fn unknown_keys_and_bad_values_rejected() {
        assert!(load(None, &["features.kk=3".into()], None, None).is_err());
        assert!(load(None, &["features.k=many".into()], None, None).is_err());
        assert!(load(None, &["noequals".into()], None, None).is_err());
        assert!(load(None, &["rules.collision_limit=0".into()], None, None).is_err());
    }
}
