//! Hybrid intrusion detection for cluster-head nodes.
//!
//! A rule-based anomaly filter over cluster message events hands suspicious
//! traffic to a PART decision-list classifier trained on preprocessed KDD
//! Cup '99 connection records.

pub mod anomaly_engine;
pub mod eval_report;
pub mod feature_rank;
pub mod hybrid_pipeline;
pub mod kdd_data;
pub mod misuse_learner;
pub mod preprocess;
