use std::fmt;

use chids_core::anomaly_engine::AnomalyError;
use chids_core::eval_report::EvalError;
use chids_core::feature_rank::RankError;
use chids_core::hybrid_pipeline::PipelineError;
use chids_core::kdd_data::DataError;
use chids_core::misuse_learner::LearnError;
use chids_core::preprocess::PreprocessError;

pub const EXIT_OTHER: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_DATA: u8 = 4;
pub const EXIT_MISSING_ARTIFACT: u8 = 5;
pub const EXIT_INFEASIBLE_SPLIT: u8 = 6;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Failure::new(EXIT_CONFIG, message)
    }

    pub fn data(message: impl Into<String>) -> Self {
        Failure::new(EXIT_DATA, message)
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Failure::new(EXIT_IO, format!("{}: {e}", path.display()))
    }

    pub fn missing(what: &std::path::Path, command: &str) -> Self {
        Failure::new(
            EXIT_MISSING_ARTIFACT,
            format!(
                "{} not found\nhint: run `chids {command}` first",
                what.display()
            ),
        )
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub type Result<T> = std::result::Result<T, Failure>;

impl From<DataError> for Failure {
    fn from(e: DataError) -> Self {
        match e {
            DataError::Io { .. } => Failure::new(EXIT_IO, e.to_string()),
            _ => Failure::data(e.to_string()),
        }
    }
}

impl From<PreprocessError> for Failure {
    fn from(e: PreprocessError) -> Self {
        match e {
            PreprocessError::InfeasibleSplit(_) => {
                Failure::new(EXIT_INFEASIBLE_SPLIT, e.to_string())
            }
            PreprocessError::UnknownFeatureName(_) => Failure::config(e.to_string()),
            _ => Failure::data(e.to_string()),
        }
    }
}

impl From<RankError> for Failure {
    fn from(e: RankError) -> Self {
        match e {
            RankError::TooManyRequested { .. } => Failure::config(e.to_string()),
            _ => Failure::data(e.to_string()),
        }
    }
}

impl From<LearnError> for Failure {
    fn from(e: LearnError) -> Self {
        match e {
            LearnError::InvalidParams(_) => Failure::config(e.to_string()),
            _ => Failure::data(e.to_string()),
        }
    }
}

impl From<AnomalyError> for Failure {
    fn from(e: AnomalyError) -> Self {
        match e {
            AnomalyError::InvalidConfig(_) | AnomalyError::UnknownScenario(_) => {
                Failure::config(e.to_string())
            }
            _ => Failure::data(e.to_string()),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::SinkUnavailable(_) => Failure::new(EXIT_IO, e.to_string()),
            _ => Failure::data(e.to_string()),
        }
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Io { .. } => Failure::new(EXIT_IO, e.to_string()),
            _ => Failure::data(e.to_string()),
        }
    }
}
