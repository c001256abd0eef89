//! The Scratch probe: a randomly initialised transformer encoder whose
//! backbone stays frozen while an MLM head, and optionally an additive
//! scale-embedding table, are trained on cloze samples.

pub mod checkpoint;
pub mod config;
pub mod encoder;
pub mod gradcheck;
pub mod report;
pub mod run;
pub mod train;
pub mod vocab;

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};
use std::path::PathBuf;

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive};
use thiserror::Error;

pub use config::{ModelConfig, TrainConfig};
pub use encoder::{init_model, Encoder, Input, Partition};
pub use gradcheck::{finite_difference_check, GradCheckReport};
pub use run::{run_seeds, RunOutput, SeedRun, EVAL_SPLITS};
pub use report::{fingerprint, render_table, EvalReport, ReportRow, SplitResult};
pub use train::{encode_text, evaluate, loss_and_gradients, predict, predict_text, prepare, train_head, EpochRecord, Example, TrainHistory};
pub use vocab::Vocab;

use crate::datagen::DatagenError;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model configuration: {0}")]
    Config(String),
    #[error("input has no mask token")]
    NoMask,
    #[error("input has {0} mask tokens")]
    MultipleMasks(usize),
    #[error("sequence of {len} tokens exceeds the maximum of {max}")]
    SequenceTooLong { len: usize, max: usize },
    #[error("candidate {0:?} is not in the vocabulary")]
    UnknownCandidate(String),
    #[error("non-finite loss {loss} at epoch {epoch}, step {step}")]
    Divergence { epoch: usize, step: usize, loss: f64 },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Data(#[from] DatagenError),
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;

/// Floating-point element type of the encoder: `f32` for training, `f64`
/// for gradient checks.
pub trait Real:
    LinalgScalar
    + Float
    + FromPrimitive
    + ScalarOperand
    + Debug
    + Send
    + Sync
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

pub(crate) fn real<F: Real>(x: f64) -> F {
    F::from_f64(x).expect("representable constant")
}
