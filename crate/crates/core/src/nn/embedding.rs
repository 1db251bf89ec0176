use alloc::format;

use super::{shape_err, NnError, Tensor};
use crate::rng::SplitMix64;

/// Lookup table `vocab × dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub table: Tensor,
}

impl Embedding {
    pub fn new(table: Tensor) -> Result<Self, NnError> {
        if table.shape().len() != 2 {
            return Err(shape_err("embedding table must be 2-D"));
        }
        Ok(Self { table })
    }

    pub fn init(vocab: usize, dim: usize, rng: &mut SplitMix64) -> Self {
        Self {
            table: Tensor::uniform(&[vocab, dim], -0.05, 0.05, rng),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            table: Tensor::zeros(self.table.shape()),
        }
    }

    pub fn vocab(&self) -> usize {
        self.table.rows()
    }

    pub fn dim(&self) -> usize {
        self.table.cols()
    }

    pub fn forward(&self, ids: &[u32]) -> Result<Tensor, NnError> {
        if ids.is_empty() {
            return Err(shape_err("empty id sequence"));
        }
        let mut out = Tensor::zeros(&[ids.len(), self.dim()]);
        for (t, &id) in ids.iter().enumerate() {
            if id as usize >= self.vocab() {
                return Err(NnError::IdOutOfRange {
                    id,
                    vocab: self.vocab(),
                });
            }
            out.row_mut(t).copy_from_slice(self.table.row(id as usize));
        }
        Ok(out)
    }

    /// Adds each output-row gradient into the table row it was read from.
    pub fn backward(&self, ids: &[u32], grad_out: &Tensor, grad: &mut Embedding) -> Result<(), NnError> {
        if grad_out.shape() != [ids.len(), self.dim()] {
            return Err(shape_err(format!(
                "embedding grad {:?} vs ids {}",
                grad_out.shape(),
                ids.len()
            )));
        }
        for (t, &id) in ids.iter().enumerate() {
            let row = grad.table.row_mut(id as usize);
            for (g, u) in row.iter_mut().zip(grad_out.row(t)) {
                *g += u;
            }
        }
        Ok(())
    }
}
