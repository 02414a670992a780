//! Fitness evaluators and normal-map quality metrics.
//!
//! The engine treats fitness as opaque: an evaluator scores a batch of
//! individuals, may be told which one was committed as the round's best,
//! and may ask the run to stop. [`IouEvaluator`] scores by volumetric IoU
//! against a target; [`ExternalEvaluator`] drives a learner subprocess over
//! newline-delimited JSON.

mod external;
mod iou;
mod metrics;
pub mod protocol;
mod target;
mod validation;

use std::time::Duration;

use serde_json::Value;
use thiserror::Error;

use crate::evolution::{Individual, IndividualId};
use crate::render::RenderError;

pub use external::{ExternalEvaluator, ExternalOptions};
pub use iou::{iou_fitness, IouEvaluator};
pub use metrics::{normal_metrics, MetricsError, NormalMetrics};
pub use target::{bite_graph, TargetError, TargetSpec, BUILTIN_TARGETS};
pub use validation::write_validation_set;

#[derive(Clone, Debug, PartialEq)]
pub struct Score {
    pub id: IndividualId,
    pub fitness: f64,
    /// Evaluator diagnostics, `Value::Null` when there are none.
    pub aux: Value,
}

#[derive(Debug, Error)]
pub enum EvaluatorError {
    #[error("evaluator I/O failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("evaluator timed out after {0:?} waiting for {1}")]
    Timeout(Duration, String),
    #[error("malformed evaluator response {0:?}: {1}")]
    Malformed(String, String),
    #[error("evaluator exited: {0}")]
    Exited(String),
    #[error("evaluator reported an error: {0}")]
    Remote(String),
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("rendering a candidate failed: {0}")]
    Render(#[from] RenderError),
}

pub trait FitnessEvaluator: Send {
    /// One score per candidate, each finite and non-negative.
    fn evaluate(
        &mut self,
        candidates: &[&Individual],
        iteration: u64,
    ) -> Result<Vec<Score>, EvaluatorError>;

    /// Names the round's best candidate once selection is done.
    fn commit(&mut self, _id: IndividualId, _iteration: u64) -> Result<(), EvaluatorError> {
        Ok(())
    }

    fn should_stop(&self, _best_fitness: f64) -> bool {
        false
    }

    /// Called once when the run ends normally.
    fn finish(&mut self) -> Result<(), EvaluatorError> {
        Ok(())
    }
}
