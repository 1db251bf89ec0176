//! Small differentiable numeric core.
//!
//! Every layer exposes `forward` (returning whatever the backward pass needs
//! to reuse) and `backward`, which accumulates parameter gradients into a
//! gradient value of the same layer type and returns the input gradient.
//! All math is `f64`. [`gradcheck`] compares each backward pass against
//! central finite differences.

mod conv;
mod dense;
mod embedding;
pub mod gradcheck;
mod loss;
mod lstm;
pub mod math;
mod rmsprop;
mod tensor;

use alloc::string::String;
use core::fmt;

pub use conv::{Conv1d, Conv1dCache};
pub use dense::Dense;
pub use embedding::Embedding;
pub use loss::{masked_softmax_ce, masked_softmax_ce_sum, softmax_rows};
pub use lstm::{BiLstm, BiLstmCache, Lstm, LstmCache};
pub use rmsprop::{rmsprop_step, RmsProp, RmsPropConfig};
pub use tensor::Tensor;

#[derive(Debug, Clone, PartialEq)]
pub enum NnError {
    IdOutOfRange { id: u32, vocab: usize },
    ShapeMismatch(String),
    AllMasked,
}

impl fmt::Display for NnError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NnError::IdOutOfRange { id, vocab } => {
                write!(f, "token id {id} outside embedding table of {vocab} rows")
            }
            NnError::ShapeMismatch(why) => write!(f, "shape mismatch: {why}"),
            NnError::AllMasked => f.write_str("every position is masked"),
        }
    }
}

impl core::error::Error for NnError {}

pub(crate) fn shape_err(why: impl Into<String>) -> NnError {
    NnError::ShapeMismatch(why.into())
}
