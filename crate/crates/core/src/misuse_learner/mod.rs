//! Misuse detection: a C4.5-style tree learner and the PART decision-list
//! learner built on partial trees.

mod model;
mod part;
mod rules;
mod tree;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kdd_data::{AttackClass, Dataset, KddRecord};

pub use model::{BoundModel, DetectionModel, UNSEEN_CODE};
pub use part::{
    build_partial_tree_rule, extract_rule, grow_partial_tree, train_part, train_part_matrix,
    PartialNode,
};
pub use rules::{Condition, Rule, RuleSet};
pub use tree::{
    added_errors, build_tree, build_tree_matrix, choose_split, evaluate_feature, leaf_estimate,
    ClassDist, ClassOrder, FeatureMatrix, NodeTest, SplitCandidate, TreeNode,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("invalid learner parameters: {0}")]
    InvalidParams(String),
    #[error("record layout does not match the model")]
    SchemaMismatch,
    #[error("malformed model: {0}")]
    ModelFormat(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearnerParams {
    /// Minimum rows in at least two branches of a split.
    pub min_leaf: usize,
    /// Confidence factor of the pessimistic error estimate.
    pub confidence: f64,
    /// Splits with smaller information gain are not considered.
    pub min_gain: f64,
    pub max_depth: Option<usize>,
    pub prune: bool,
}

impl Default for LearnerParams {
    fn default() -> Self {
        LearnerParams {
            min_leaf: 2,
            confidence: 0.25,
            min_gain: 1e-9,
            max_depth: None,
            prune: true,
        }
    }
}

impl LearnerParams {
    pub fn validate(&self) -> Result<(), LearnError> {
        if self.min_leaf == 0 {
            return Err(LearnError::InvalidParams(
                "min_leaf must be at least 1".into(),
            ));
        }
        if !(self.confidence > 0.0 && self.confidence <= 0.5) {
            return Err(LearnError::InvalidParams(format!(
                "confidence {} outside (0, 0.5]",
                self.confidence
            )));
        }
        if !(self.min_gain >= 0.0) {
            return Err(LearnError::InvalidParams(
                "min_gain must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Anything that maps a feature vector in training layout to a class.
pub trait Predictor {
    fn predict_values(&self, values: &[f64]) -> AttackClass;
}

impl Predictor for RuleSet {
    fn predict_values(&self, values: &[f64]) -> AttackClass {
        RuleSet::predict_values(self, values)
    }
}

impl Predictor for TreeNode {
    fn predict_values(&self, values: &[f64]) -> AttackClass {
        TreeNode::predict_values(self, values)
    }
}

/// Always answers the majority training class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MajorityBaseline {
    pub class: AttackClass,
}

impl Predictor for MajorityBaseline {
    fn predict_values(&self, _: &[f64]) -> AttackClass {
        self.class
    }
}

pub fn train_majority_baseline(train: &Dataset) -> Result<MajorityBaseline, LearnError> {
    if train.is_empty() {
        return Err(LearnError::EmptyTrainingSet);
    }
    let counts = train.class_counts().0;
    Ok(MajorityBaseline {
        class: ClassOrder::new(counts).majority(&counts),
    })
}

/// Predicts a record laid out like the training set of `model`.
pub fn predict<M: Predictor + ?Sized>(
    model: &M,
    train_layout: &crate::kdd_data::FeatureSchema,
    record: &KddRecord,
) -> Result<AttackClass, LearnError> {
    if record.len() != train_layout.len() {
        return Err(LearnError::SchemaMismatch);
    }
    Ok(model.predict_values(record.values()))
}

/// Record-level classifier used by the detection pipeline.
pub trait Classifier: Sync {
    fn classify(&self, record: &KddRecord) -> AttackClass;

    /// Record length the classifier accepts, if it checks one.
    fn input_width(&self) -> Option<usize> {
        None
    }
}

impl Classifier for MajorityBaseline {
    fn classify(&self, _: &KddRecord) -> AttackClass {
        self.class
    }
}

impl Classifier for BoundModel<'_> {
    fn classify(&self, record: &KddRecord) -> AttackClass {
        self.predict(record)
    }

    fn input_width(&self) -> Option<usize> {
        Some(BoundModel::input_width(self))
    }
}
