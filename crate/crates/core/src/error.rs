//! Crate-level error type.

use crate::engine::EngineError;
use crate::env::EnvError;
use crate::scheduler::ScheduleError;
use crate::syntax::SyntaxError;
use crate::transform::TransformError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("parse error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("invalid program: {0}")]
    Invalid(String),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("bundle replay diverged at step {step}")]
    ReplayMismatch { step: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
