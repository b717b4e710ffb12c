//! Confusion matrices, detection and false-alarm rates, and report files.

mod report;

use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kdd_data::{AttackClass, Dataset};
use crate::misuse_learner::Classifier;

pub use report::{
    classifier_table, emit_report, split_summary, ClassifierResult, ReportFormat, ReportInputs,
    REPORT_FILES, TIMING_FILE,
};

const K: usize = AttackClass::COUNT;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("test set is empty")]
    EmptyTestSet,
    #[error("record layout does not match the model")]
    SchemaMismatch,
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Counts indexed by (actual, predicted).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; K]; K],
}

impl ConfusionMatrix {
    pub fn add(&mut self, actual: AttackClass, predicted: AttackClass) {
        self.counts[actual.index()][predicted.index()] += 1;
    }

    pub fn merge(mut self, other: &ConfusionMatrix) -> ConfusionMatrix {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        self
    }

    pub fn get(&self, actual: AttackClass, predicted: AttackClass) -> u64 {
        self.counts[actual.index()][predicted.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn actual(&self, class: AttackClass) -> u64 {
        self.counts[class.index()].iter().sum()
    }

    pub fn predicted(&self, class: AttackClass) -> u64 {
        self.counts.iter().map(|row| row[class.index()]).sum()
    }

    /// Attack records, whatever they were predicted as.
    pub fn attacks(&self) -> u64 {
        self.total() - self.actual(AttackClass::Normal)
    }

    /// Attack records predicted as any attack class.
    pub fn detected_attacks(&self) -> u64 {
        self.attacks() - self.missed_attacks()
    }

    /// Attack records predicted Normal.
    pub fn missed_attacks(&self) -> u64 {
        self.predicted(AttackClass::Normal) - self.get(AttackClass::Normal, AttackClass::Normal)
    }

    /// Normal records predicted as any attack class.
    pub fn false_alarms(&self) -> u64 {
        self.actual(AttackClass::Normal) - self.get(AttackClass::Normal, AttackClass::Normal)
    }

    pub fn correct(&self) -> u64 {
        (0..K).map(|i| self.counts[i][i]).sum()
    }
}

/// A count ratio kept exact until it is shown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Self {
        Ratio { num, den }
    }

    /// Percentage; `None` when the denominator is zero.
    pub fn percent(&self) -> Option<f64> {
        (self.den > 0).then(|| self.num as f64 * 100.0 / self.den as f64)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.percent() {
            Some(p) => write!(f, "{p:.2}"),
            None => f.write_str("n/a"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: AttackClass,
    pub support: u64,
    pub recall: Ratio,
    pub precision: Ratio,
}

/// Everything derived from one confusion matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub records: u64,
    pub attacks: u64,
    pub detected_attacks: u64,
    pub missed_attacks: u64,
    pub normals: u64,
    pub false_alarms: u64,
    /// Attacks flagged as any attack class, over all attacks.
    pub detection_rate: Ratio,
    /// Normal records flagged as an attack, over all normal records.
    pub false_alarm_rate: Ratio,
    /// Exact five-class agreement.
    pub accuracy: Ratio,
    pub per_class: Vec<ClassMetrics>,
}

impl MetricsReport {
    pub fn from_matrix(m: &ConfusionMatrix) -> Self {
        let normals = m.actual(AttackClass::Normal);
        MetricsReport {
            records: m.total(),
            attacks: m.attacks(),
            detected_attacks: m.detected_attacks(),
            missed_attacks: m.missed_attacks(),
            normals,
            false_alarms: m.false_alarms(),
            detection_rate: Ratio::new(m.detected_attacks(), m.attacks()),
            false_alarm_rate: Ratio::new(m.false_alarms(), normals),
            accuracy: Ratio::new(m.correct(), m.total()),
            per_class: AttackClass::ALL
                .iter()
                .map(|&c| ClassMetrics {
                    class: c,
                    support: m.actual(c),
                    recall: Ratio::new(m.get(c, c), m.actual(c)),
                    precision: Ratio::new(m.get(c, c), m.predicted(c)),
                })
                .collect(),
        }
    }
}

/// Result of scoring one model on one test set.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub matrix: ConfusionMatrix,
    pub metrics: MetricsReport,
    /// Wall-clock seconds spent in the prediction loop.
    pub test_seconds: f64,
}

/// Predicts every test record and tallies the outcome.
pub fn evaluate<C: Classifier + ?Sized>(
    model: &C,
    test: &Dataset,
) -> Result<Evaluation, EvalError> {
    if test.is_empty() {
        return Err(EvalError::EmptyTestSet);
    }
    if model
        .input_width()
        .is_some_and(|w| w != test.schema().len())
    {
        return Err(EvalError::SchemaMismatch);
    }
    let start = Instant::now();
    let matrix = test
        .records()
        .par_iter()
        .zip(test.classes().par_iter())
        .fold(ConfusionMatrix::default, |mut m, (r, &c)| {
            m.add(c, model.classify(r));
            m
        })
        .reduce(ConfusionMatrix::default, |a, b| a.merge(&b));
    let test_seconds = start.elapsed().as_secs_f64();
    Ok(Evaluation {
        metrics: MetricsReport::from_matrix(&matrix),
        matrix,
        test_seconds,
    })
}
