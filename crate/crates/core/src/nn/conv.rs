use alloc::format;

use super::tensor::{axpy, dot};
use super::{shape_err, NnError, Tensor};
use crate::rng::SplitMix64;

/// Same-padded 1-D convolution over the time axis followed by ReLU.
/// `kernel: k × d_in × d_out`, `k` odd, zero padding of `(k-1)/2` each side.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv1d {
    pub kernel: Tensor,
    pub bias: Tensor,
}

/// Pre-activation values kept for the backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv1dCache {
    pub pre: Tensor,
}

impl Conv1d {
    pub fn new(kernel: Tensor, bias: Tensor) -> Result<Self, NnError> {
        let s = kernel.shape();
        if s.len() != 3 || s[0].is_multiple_of(2) || bias.shape() != [s[2]] {
            return Err(shape_err(format!(
                "conv kernel {:?} (k must be odd) with bias {:?}",
                s,
                bias.shape()
            )));
        }
        Ok(Self { kernel, bias })
    }

    pub fn init(k: usize, d_in: usize, d_out: usize, rng: &mut SplitMix64) -> Self {
        assert!(k % 2 == 1, "kernel size must be odd");
        Self {
            kernel: Tensor::uniform(&[k, d_in, d_out], -0.05, 0.05, rng),
            bias: Tensor::zeros(&[d_out]),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            kernel: Tensor::zeros(self.kernel.shape()),
            bias: Tensor::zeros(self.bias.shape()),
        }
    }

    pub fn k(&self) -> usize {
        self.kernel.shape()[0]
    }

    pub fn d_in(&self) -> usize {
        self.kernel.shape()[1]
    }

    pub fn d_out(&self) -> usize {
        self.kernel.shape()[2]
    }

    /// Input position read by kernel tap `j` at output `t`, if inside the sequence.
    #[inline]
    fn source(&self, t: usize, j: usize, len: usize) -> Option<usize> {
        let pad = (self.k() - 1) / 2;
        let src = (t + j).checked_sub(pad)?;
        (src < len).then_some(src)
    }

    fn tap(&self, j: usize) -> &[f64] {
        let size = self.d_in() * self.d_out();
        &self.kernel.data()[j * size..(j + 1) * size]
    }

    pub fn forward(&self, x: &Tensor) -> Result<(Tensor, Conv1dCache), NnError> {
        if x.shape().len() != 2 || x.cols() != self.d_in() {
            return Err(shape_err(format!(
                "conv input {:?}, expected [_, {}]",
                x.shape(),
                self.d_in()
            )));
        }
        let (len, d_out) = (x.rows(), self.d_out());
        let mut pre = Tensor::zeros(&[len, d_out]);
        for t in 0..len {
            let out = pre.row_mut(t);
            out.copy_from_slice(self.bias.data());
            for j in 0..self.k() {
                let Some(src) = self.source(t, j, len) else { continue };
                let tap = self.tap(j);
                for (i, &xv) in x.row(src).iter().enumerate() {
                    if xv != 0.0 {
                        axpy(out, xv, &tap[i * d_out..(i + 1) * d_out]);
                    }
                }
            }
        }
        let mut y = pre.clone();
        for v in y.data_mut() {
            *v = v.max(0.0);
        }
        Ok((y, Conv1dCache { pre }))
    }

    pub fn backward(
        &self,
        x: &Tensor,
        cache: &Conv1dCache,
        grad_y: &Tensor,
        grad: &mut Conv1d,
    ) -> Result<Tensor, NnError> {
        let (len, d_in, d_out) = (x.rows(), self.d_in(), self.d_out());
        if grad_y.shape() != [len, d_out] || cache.pre.shape() != [len, d_out] {
            return Err(shape_err(format!("conv upstream grad {:?}", grad_y.shape())));
        }
        let mut grad_pre = grad_y.clone();
        for (g, &p) in grad_pre.data_mut().iter_mut().zip(cache.pre.data()) {
            if p <= 0.0 {
                *g = 0.0;
            }
        }
        let mut grad_x = Tensor::zeros(&[len, d_in]);
        let tap_size = d_in * d_out;
        for t in 0..len {
            let gp = grad_pre.row(t);
            if gp.iter().all(|&g| g == 0.0) {
                continue;
            }
            for (gb, g) in grad.bias.data_mut().iter_mut().zip(gp) {
                *gb += g;
            }
            for j in 0..self.k() {
                let Some(src) = self.source(t, j, len) else { continue };
                let grad_tap = &mut grad.kernel.data_mut()[j * tap_size..(j + 1) * tap_size];
                for (i, &xv) in x.row(src).iter().enumerate() {
                    if xv != 0.0 {
                        axpy(&mut grad_tap[i * d_out..(i + 1) * d_out], xv, gp);
                    }
                }
                let tap = self.tap(j);
                let gx = grad_x.row_mut(src);
                for (i, g) in gx.iter_mut().enumerate() {
                    *g += dot(&tap[i * d_out..(i + 1) * d_out], gp);
                }
            }
        }
        Ok(grad_x)
    }
}
