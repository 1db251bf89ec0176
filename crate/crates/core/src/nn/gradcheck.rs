//! Central finite-difference verification of every backward pass.
//!
//! Each layer is wrapped in a scalar objective `L = Σ y ⊙ R` with a fixed
//! random projection `R`, so the upstream gradient is `R` itself. The
//! analytic gradient of `L` with respect to every parameter and every input
//! element is compared with `(L(θ+ε) − L(θ−ε)) / 2ε`.

use alloc::vec;
use alloc::vec::Vec;

use super::{masked_softmax_ce, BiLstm, Conv1d, Dense, Embedding, Lstm, NnError, Tensor};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradTarget {
    Embedding {
        vocab: usize,
        dim: usize,
        len: usize,
    },
    Dense {
        len: usize,
        d_in: usize,
        d_out: usize,
    },
    Conv1d {
        len: usize,
        d_in: usize,
        d_out: usize,
        k: usize,
    },
    Lstm {
        len: usize,
        d: usize,
        h: usize,
    },
    BiLstm {
        len: usize,
        d: usize,
        h: usize,
    },
    SoftmaxCe {
        len: usize,
        classes: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    /// Number of scalar entries compared.
    pub checked: usize,
}

/// `|a − n| / max(1e-8, |a| + |n|)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-8)
}

trait Case {
    fn tensors(&mut self) -> Vec<&mut Tensor>;
    fn loss(&self) -> Result<f64, NnError>;
    fn analytic(&self) -> Result<Vec<Tensor>, NnError>;
}

fn project(y: &Tensor, r: &Tensor) -> f64 {
    y.data().iter().zip(r.data()).map(|(a, b)| a * b).sum()
}

struct EmbeddingCase {
    layer: Embedding,
    ids: Vec<u32>,
    r: Tensor,
}

impl Case for EmbeddingCase {
    fn tensors(&mut self) -> Vec<&mut Tensor> {
        vec![&mut self.layer.table]
    }
    fn loss(&self) -> Result<f64, NnError> {
        Ok(project(&self.layer.forward(&self.ids)?, &self.r))
    }
    fn analytic(&self) -> Result<Vec<Tensor>, NnError> {
        let mut g = self.layer.zeros_like();
        self.layer.backward(&self.ids, &self.r, &mut g)?;
        Ok(vec![g.table])
    }
}

struct DenseCase {
    layer: Dense,
    x: Tensor,
    r: Tensor,
}

impl Case for DenseCase {
    fn tensors(&mut self) -> Vec<&mut Tensor> {
        vec![&mut self.layer.w, &mut self.layer.b, &mut self.x]
    }
    fn loss(&self) -> Result<f64, NnError> {
        Ok(project(&self.layer.forward(&self.x)?, &self.r))
    }
    fn analytic(&self) -> Result<Vec<Tensor>, NnError> {
        let mut g = self.layer.zeros_like();
        let gx = self.layer.backward(&self.x, &self.r, &mut g)?;
        Ok(vec![g.w, g.b, gx])
    }
}

struct ConvCase {
    layer: Conv1d,
    x: Tensor,
    r: Tensor,
}

impl Case for ConvCase {
    fn tensors(&mut self) -> Vec<&mut Tensor> {
        vec![&mut self.layer.kernel, &mut self.layer.bias, &mut self.x]
    }
    fn loss(&self) -> Result<f64, NnError> {
        Ok(project(&self.layer.forward(&self.x)?.0, &self.r))
    }
    fn analytic(&self) -> Result<Vec<Tensor>, NnError> {
        let (_, cache) = self.layer.forward(&self.x)?;
        let mut g = self.layer.zeros_like();
        let gx = self.layer.backward(&self.x, &cache, &self.r, &mut g)?;
        Ok(vec![g.kernel, g.bias, gx])
    }
}

struct LstmCase {
    layer: Lstm,
    x: Tensor,
    r: Tensor,
}

impl Case for LstmCase {
    fn tensors(&mut self) -> Vec<&mut Tensor> {
        vec![&mut self.layer.w_x, &mut self.layer.w_h, &mut self.layer.b, &mut self.x]
    }
    fn loss(&self) -> Result<f64, NnError> {
        Ok(project(&self.layer.forward(&self.x)?.0, &self.r))
    }
    fn analytic(&self) -> Result<Vec<Tensor>, NnError> {
        let (_, cache) = self.layer.forward(&self.x)?;
        let mut g = self.layer.zeros_like();
        let gx = self.layer.backward(&self.x, &cache, &self.r, &mut g)?;
        Ok(vec![g.w_x, g.w_h, g.b, gx])
    }
}

struct BiLstmCase {
    layer: BiLstm,
    x: Tensor,
    r: Tensor,
}

impl Case for BiLstmCase {
    fn tensors(&mut self) -> Vec<&mut Tensor> {
        let (f, b) = (&mut self.layer.forward, &mut self.layer.backward);
        vec![
            &mut f.w_x,
            &mut f.w_h,
            &mut f.b,
            &mut b.w_x,
            &mut b.w_h,
            &mut b.b,
            &mut self.x,
        ]
    }
    fn loss(&self) -> Result<f64, NnError> {
        Ok(project(&self.layer.forward(&self.x)?.0, &self.r))
    }
    fn analytic(&self) -> Result<Vec<Tensor>, NnError> {
        let (_, cache) = self.layer.forward(&self.x)?;
        let mut g = self.layer.zeros_like();
        let gx = self.layer.backward(&self.x, &cache, &self.r, &mut g)?;
        Ok(vec![
            g.forward.w_x,
            g.forward.w_h,
            g.forward.b,
            g.backward.w_x,
            g.backward.w_h,
            g.backward.b,
            gx,
        ])
    }
}

struct SoftmaxCase {
    logits: Tensor,
    targets: Vec<usize>,
    mask: Vec<u8>,
}

impl Case for SoftmaxCase {
    fn tensors(&mut self) -> Vec<&mut Tensor> {
        vec![&mut self.logits]
    }
    fn loss(&self) -> Result<f64, NnError> {
        Ok(masked_softmax_ce(&self.logits, &self.targets, &self.mask)?.0)
    }
    fn analytic(&self) -> Result<Vec<Tensor>, NnError> {
        Ok(vec![masked_softmax_ce(&self.logits, &self.targets, &self.mask)?.1])
    }
}

fn run(case: &mut dyn Case, eps: f64) -> Result<GradCheckReport, NnError> {
    let analytic = case.analytic()?;
    let mut report = GradCheckReport {
        max_relative_error: 0.0,
        checked: 0,
    };
    for (ti, grad) in analytic.iter().enumerate() {
        for e in 0..grad.len() {
            let original = case.tensors()[ti].data()[e];
            case.tensors()[ti].data_mut()[e] = original + eps;
            let plus = case.loss()?;
            case.tensors()[ti].data_mut()[e] = original - eps;
            let minus = case.loss()?;
            case.tensors()[ti].data_mut()[e] = original;
            let numeric = (plus - minus) / (2.0 * eps);
            let err = relative_error(grad.data()[e], numeric);
            if err > report.max_relative_error {
                report.max_relative_error = err;
            }
            report.checked += 1;
        }
    }
    Ok(report)
}

/// Builds a random instance of `target` from `seed` and returns the worst
/// relative error between analytic and central-difference gradients.
pub fn grad_check(target: GradTarget, seed: u64, eps: f64) -> Result<GradCheckReport, NnError> {
    let mut rng = SplitMix64::new(seed);
    let uniform = |shape: &[usize], rng: &mut SplitMix64| Tensor::uniform(shape, -1.0, 1.0, rng);
    match target {
        GradTarget::Embedding { vocab, dim, len } => {
            let layer = Embedding::new(uniform(&[vocab, dim], &mut rng))?;
            let ids = (0..len).map(|_| rng.below(vocab) as u32).collect();
            let r = uniform(&[len, dim], &mut rng);
            run(&mut EmbeddingCase { layer, ids, r }, eps)
        }
        GradTarget::Dense { len, d_in, d_out } => {
            let layer = Dense::new(uniform(&[d_in, d_out], &mut rng), uniform(&[d_out], &mut rng))?;
            let x = uniform(&[len, d_in], &mut rng);
            let r = uniform(&[len, d_out], &mut rng);
            run(&mut DenseCase { layer, x, r }, eps)
        }
        GradTarget::Conv1d { len, d_in, d_out, k } => {
            let layer = Conv1d::new(uniform(&[k, d_in, d_out], &mut rng), uniform(&[d_out], &mut rng))?;
            let x = uniform(&[len, d_in], &mut rng);
            let r = uniform(&[len, d_out], &mut rng);
            run(&mut ConvCase { layer, x, r }, eps)
        }
        GradTarget::Lstm { len, d, h } => {
            let layer = Lstm::new(
                uniform(&[d, 4 * h], &mut rng),
                uniform(&[h, 4 * h], &mut rng),
                uniform(&[4 * h], &mut rng),
            )?;
            let x = uniform(&[len, d], &mut rng);
            let r = uniform(&[len, h], &mut rng);
            run(&mut LstmCase { layer, x, r }, eps)
        }
        GradTarget::BiLstm { len, d, h } => {
            let lstm = |rng: &mut SplitMix64| {
                Lstm::new(
                    uniform(&[d, 4 * h], rng),
                    uniform(&[h, 4 * h], rng),
                    uniform(&[4 * h], rng),
                )
            };
            let layer = BiLstm {
                forward: lstm(&mut rng)?,
                backward: lstm(&mut rng)?,
            };
            let x = Tensor::uniform(&[len, d], -1.0, 1.0, &mut rng);
            let r = Tensor::uniform(&[len, 2 * h], -1.0, 1.0, &mut rng);
            run(&mut BiLstmCase { layer, x, r }, eps)
        }
        GradTarget::SoftmaxCe { len, classes } => {
            let logits = Tensor::uniform(&[len, classes], -3.0, 3.0, &mut rng);
            let targets = (0..len).map(|_| rng.below(classes)).collect();
            let mut mask: Vec<u8> = (0..len).map(|_| rng.bernoulli(0.7) as u8).collect();
            mask[0] = 1;
            run(&mut SoftmaxCase { logits, targets, mask }, eps)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_error_floor() {
        assert_eq!(relative_error(0.0, 0.0), 0.0);
        assert_eq!(relative_error(1.0, 1.0), 0.0);
        assert!((relative_error(1.0, 0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn every_layer_passes_one_seed() {
        let cases = [
            (
                GradTarget::Embedding {
                    vocab: 5,
                    dim: 4,
                    len: 3,
                },
                1e-6,
            ),
            (
                GradTarget::Dense {
                    len: 3,
                    d_in: 4,
                    d_out: 3,
                },
                1e-6,
            ),
            (
                GradTarget::Conv1d {
                    len: 7,
                    d_in: 3,
                    d_out: 2,
                    k: 3,
                },
                1e-5,
            ),
            (GradTarget::Lstm { len: 4, d: 3, h: 2 }, 1e-4),
            (GradTarget::BiLstm { len: 4, d: 3, h: 2 }, 1e-4),
            (GradTarget::SoftmaxCe { len: 4, classes: 5 }, 1e-6),
        ];
        for (target, tol) in cases {
            let report = grad_check(target, 17, 1e-5).unwrap();
            assert!(report.checked > 0);
            assert!(report.max_relative_error < tol, "{target:?}: {report:?}");
        }
    }

    #[test]
    fn detects_a_wrong_gradient() {
        // Sanity check on the driver itself: a case whose "analytic"
        // gradient is deliberately off must be flagged.
        struct Broken(Tensor);
        impl Case for Broken {
            fn tensors(&mut self) -> Vec<&mut Tensor> {
                vec![&mut self.0]
            }
            fn loss(&self) -> Result<f64, NnError> {
                Ok(self.0.data().iter().map(|v| v * v).sum())
            }
            fn analytic(&self) -> Result<Vec<Tensor>, NnError> {
                Ok(vec![self.0.clone()]) // should be 2x
            }
        }
        let mut case = Broken(Tensor::filled(&[3], 0.5));
        assert!(run(&mut case, 1e-5).unwrap().max_relative_error > 0.1);
    }
}
