//! The two-stage detector: the anomaly filter passes quiet traffic straight
//! through and hands flagged records to the misuse classifier, whose answer
//! goes through a final decision step.

mod alerts;

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::anomaly_engine::VerdictIndex;
use crate::kdd_data::{AttackClass, KddRecord};
use crate::misuse_learner::Classifier;

pub use alerts::{alerts, emit_alerts, write_alerts, Alert, AlertContext, AlertSink};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("record {record} has {found} values, the model expects {expected}")]
    SchemaMismatch {
        record: usize,
        expected: usize,
        found: usize,
    },
    #[error("verdict index refers to record {0}, past the end of the input")]
    IndexOutOfRange(usize),
    #[error("alert sink unavailable: {0}")]
    SinkUnavailable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Anomaly,
    Misuse,
    Decision,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Anomaly => "anomaly",
            Stage::Misuse => "misuse",
            Stage::Decision => "decision",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    PassedNormal,
    /// Always a non-Normal class.
    ClassifiedAttack(AttackClass),
    ClassifiedNormal,
    UnresolvedAlert,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::PassedNormal => "passed_normal",
            Outcome::ClassifiedAttack(_) => "classified_attack",
            Outcome::ClassifiedNormal => "classified_normal",
            Outcome::UnresolvedAlert => "unresolved_alert",
        }
    }

    /// Whether the record raises an alert.
    pub fn is_alert(self) -> bool {
        matches!(
            self,
            Outcome::ClassifiedAttack(_) | Outcome::UnresolvedAlert
        )
    }

    /// Whether the record was attributed to an attack class.
    pub fn is_detection(self) -> bool {
        matches!(self, Outcome::ClassifiedAttack(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Disposition {
    pub record: usize,
    pub outcome: Outcome,
    pub stage: Stage,
}

/// What to do with a flagged record the classifier calls Normal.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionPolicy {
    #[default]
    AlertUnresolved,
    TrustMisuse,
}

impl DecisionPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            DecisionPolicy::AlertUnresolved => "alert_unresolved",
            DecisionPolicy::TrustMisuse => "trust_misuse",
        }
    }
}

impl fmt::Display for DecisionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DecisionPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "alert_unresolved" => Ok(DecisionPolicy::AlertUnresolved),
            "trust_misuse" => Ok(DecisionPolicy::TrustMisuse),
            _ => Err(format!(
                "unknown decision policy {s:?} (alert_unresolved or trust_misuse)"
            )),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub policy: DecisionPolicy,
    pub sink: AlertSink,
}

/// Classifies every record; output order follows input order.
pub fn run_pipeline<C: Classifier + ?Sized>(
    records: &[KddRecord],
    index: &VerdictIndex,
    model: &C,
    cfg: &PipelineConfig,
) -> Result<Vec<Disposition>, PipelineError> {
    if let Some(last) = index.last() {
        if last >= records.len() {
            return Err(PipelineError::IndexOutOfRange(last));
        }
    }
    if let Some(expected) = model.input_width() {
        if let Some((record, r)) = records
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != expected)
        {
            return Err(PipelineError::SchemaMismatch {
                record,
                expected,
                found: r.len(),
            });
        }
    }
    Ok(records
        .par_iter()
        .enumerate()
        .map(|(record, r)| {
            let (outcome, stage) = if !index.is_flagged(record) {
                (Outcome::PassedNormal, Stage::Anomaly)
            } else {
                match model.classify(r) {
                    AttackClass::Normal => match cfg.policy {
                        DecisionPolicy::AlertUnresolved => {
                            (Outcome::UnresolvedAlert, Stage::Decision)
                        }
                        DecisionPolicy::TrustMisuse => (Outcome::ClassifiedNormal, Stage::Decision),
                    },
                    class => (Outcome::ClassifiedAttack(class), Stage::Misuse),
                }
            };
            Disposition {
                record,
                outcome,
                stage,
            }
        })
        .collect())
}

/// Wraps a classifier and counts how often it is asked.
#[derive(Debug)]
pub struct CountingClassifier<C> {
    inner: C,
    calls: AtomicUsize,
}

impl<C> CountingClassifier<C> {
    pub fn new(inner: C) -> Self {
        CountingClassifier {
            inner,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn into_inner(self) -> C {
        self.inner
    }
}

impl<C: Classifier> Classifier for CountingClassifier<C> {
    fn classify(&self, record: &KddRecord) -> AttackClass {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.classify(record)
    }

    fn input_width(&self) -> Option<usize> {
        self.inner.input_width()
    }
}

/// Outcome counts, one per outcome kind plus attacks by class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DispositionSummary {
    pub passed_normal: usize,
    pub classified_attack: usize,
    pub classified_normal: usize,
    pub unresolved_alert: usize,
    pub attacks_by_class: [usize; AttackClass::COUNT],
}

impl DispositionSummary {
    pub fn of(dispositions: &[Disposition]) -> Self {
        let mut s = DispositionSummary::default();
        for d in dispositions {
            match d.outcome {
                Outcome::PassedNormal => s.passed_normal += 1,
                Outcome::ClassifiedAttack(c) => {
                    s.classified_attack += 1;
                    s.attacks_by_class[c.index()] += 1;
                }
                Outcome::ClassifiedNormal => s.classified_normal += 1,
                Outcome::UnresolvedAlert => s.unresolved_alert += 1,
            }
        }
        s
    }

    pub fn total(&self) -> usize {
        self.passed_normal + self.classified_attack + self.classified_normal + self.unresolved_alert
    }

    pub fn alerts(&self) -> usize {
        self.classified_attack + self.unresolved_alert
    }
}

/// Tab-separated dump: `record  outcome  class  stage`; class is `-` unless
/// the record was attributed to an attack.
pub fn write_dispositions(dispositions: &[Disposition]) -> String {
    let mut out = String::from("record\toutcome\tclass\tstage\n");
    for d in dispositions {
        let class = match d.outcome {
            Outcome::ClassifiedAttack(c) => c.as_str(),
            _ => "-",
        };
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            d.record,
            d.outcome.as_str(),
            class,
            d.stage.as_str()
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Fixed(AttackClass);

    impl Classifier for Fixed {
        fn classify(&self, _: &KddRecord) -> AttackClass {
            self.0
        }
    }

    fn records(n: usize) -> Vec<KddRecord> {
        (0..n)
            .map(|i| KddRecord::new(vec![i as f64], "normal"))
            .collect()
    }

    #[test]
    fn nothing_flagged_never_calls_the_model() {
        let m = CountingClassifier::new(Fixed(AttackClass::DoS));
        let d = run_pipeline(
            &records(20),
            &VerdictIndex::default(),
            &m,
            &PipelineConfig::default(),
        )
        .unwrap();
        assert_eq!(m.calls(), 0);
        assert!(d
            .iter()
            .all(|d| d.outcome == Outcome::PassedNormal && d.stage == Stage::Anomaly));
    }

    #[test]
    fn flagged_attack_is_classified_at_misuse() {
        let idx = VerdictIndex::from_flags(&[false, true]);
        let d = run_pipeline(
            &records(2),
            &idx,
            &Fixed(AttackClass::DoS),
            &PipelineConfig::default(),
        )
        .unwrap();
        assert_eq!(
            d[1],
            Disposition {
                record: 1,
                outcome: Outcome::ClassifiedAttack(AttackClass::DoS),
                stage: Stage::Misuse
            }
        );
    }

    #[test]
    fn flagged_normal_follows_policy() {
        let idx = VerdictIndex::from_flags(&[true]);
        let d = run_pipeline(
            &records(1),
            &idx,
            &Fixed(AttackClass::Normal),
            &PipelineConfig::default(),
        )
        .unwrap();
        assert_eq!(
            (d[0].outcome, d[0].stage),
            (Outcome::UnresolvedAlert, Stage::Decision)
        );
        let cfg = PipelineConfig {
            policy: DecisionPolicy::TrustMisuse,
            ..PipelineConfig::default()
        };
        let d = run_pipeline(&records(1), &idx, &Fixed(AttackClass::Normal), &cfg).unwrap();
        assert_eq!(
            (d[0].outcome, d[0].stage),
            (Outcome::ClassifiedNormal, Stage::Decision)
        );
    }

    #[test]
    fn index_past_the_end_rejected() {
        let idx = VerdictIndex::from_flags(&[false, false, true]);
        let r = run_pipeline(
            &records(2),
            &idx,
            &Fixed(AttackClass::DoS),
            &PipelineConfig::default(),
        );
        assert!(matches!(r, Err(PipelineError::IndexOutOfRange(2))));
    }

    #[test]
    fn policy_names() {
        for p in [DecisionPolicy::AlertUnresolved, DecisionPolicy::TrustMisuse] {
            assert_eq!(p.as_str().parse::<DecisionPolicy>().unwrap(), p);
        }
        assert!("ignore".parse::<DecisionPolicy>().is_err());
    }

    #[test]
    fn dump_has_one_line_per_record() {
        let idx = VerdictIndex::from_flags(&[true, false, true]);
        let d = run_pipeline(
            &records(3),
            &idx,
            &Fixed(AttackClass::Probe),
            &PipelineConfig::default(),
        )
        .unwrap();
        let text = write_dispositions(&d);
        assert_eq!(text.lines().count(), 4);
        assert_eq!(
            text.lines().nth(1).unwrap(),
            "0\tclassified_attack\tProbe\tmisuse"
        );
        assert_eq!(text.lines().nth(2).unwrap(), "1\tpassed_normal\t-\tanomaly");
    }
}
