use alloc::format;

use super::tensor::{matmul_a_bt_acc, matmul_acc, matmul_at_b_acc};
use super::{shape_err, NnError, Tensor};
use crate::rng::SplitMix64;

/// Affine map `y = x·W + b`, `W: in × out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub w: Tensor,
    pub b: Tensor,
}

impl Dense {
    pub fn new(w: Tensor, b: Tensor) -> Result<Self, NnError> {
        if w.shape().len() != 2 || b.shape() != [w.shape()[1]] {
            return Err(shape_err(format!("dense W {:?} b {:?}", w.shape(), b.shape())));
        }
        Ok(Self { w, b })
    }

    pub fn init(d_in: usize, d_out: usize, rng: &mut SplitMix64) -> Self {
        Self {
            w: Tensor::uniform(&[d_in, d_out], -0.05, 0.05, rng),
            b: Tensor::zeros(&[d_out]),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            w: Tensor::zeros(self.w.shape()),
            b: Tensor::zeros(self.b.shape()),
        }
    }

    pub fn d_in(&self) -> usize {
        self.w.shape()[0]
    }

    pub fn d_out(&self) -> usize {
        self.w.shape()[1]
    }

    fn check_input(&self, x: &Tensor) -> Result<(), NnError> {
        if x.shape().len() != 2 || x.cols() != self.d_in() {
            return Err(shape_err(format!(
                "dense input {:?}, expected [_, {}]",
                x.shape(),
                self.d_in()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor, NnError> {
        self.check_input(x)?;
        let (n, k, m) = (x.rows(), self.d_in(), self.d_out());
        let mut y = Tensor::zeros(&[n, m]);
        for t in 0..n {
            y.row_mut(t).copy_from_slice(self.b.data());
        }
        matmul_acc(y.data_mut(), x.data(), self.w.data(), n, k, m);
        Ok(y)
    }

    pub fn backward(&self, x: &Tensor, grad_y: &Tensor, grad: &mut Dense) -> Result<Tensor, NnError> {
        self.check_input(x)?;
        let (n, k, m) = (x.rows(), self.d_in(), self.d_out());
        if grad_y.shape() != [n, m] {
            return Err(shape_err(format!("dense upstream grad {:?}", grad_y.shape())));
        }
        matmul_at_b_acc(grad.w.data_mut(), x.data(), grad_y.data(), n, k, m);
        for t in 0..n {
            for (gb, g) in grad.b.data_mut().iter_mut().zip(grad_y.row(t)) {
                *gb += g;
            }
        }
        let mut grad_x = Tensor::zeros(&[n, k]);
        matmul_a_bt_acc(grad_x.data_mut(), grad_y.data(), self.w.data(), n, k, m);
        Ok(grad_x)
    }
}
