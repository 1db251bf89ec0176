use alloc::format;

use super::math::{sigmoid, sqrt, tanh};
use super::tensor::{matmul_a_bt_acc, matmul_acc, matmul_at_b_acc};
use super::{shape_err, NnError, Tensor};
use crate::rng::SplitMix64;

/// Single-layer LSTM with zero initial state.
///
/// Gate pre-activations are laid out `[i | f | g | o]` along the `4h` axis:
/// `i, f, o` use the logistic sigmoid, the candidate `g` uses tanh,
/// `c_t = f⊙c_{t-1} + i⊙g` and `h_t = o⊙tanh(c_t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lstm {
    /// `d × 4h`
    pub w_x: Tensor,
    /// `h × 4h`
    pub w_h: Tensor,
    /// `4h`
    pub b: Tensor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmCache {
    /// Post-activation gates per step, `len × 4h`.
    gates: Tensor,
    /// Cell states, `len × h`.
    c: Tensor,
    /// `tanh(c_t)`, `len × h`.
    tanh_c: Tensor,
    /// Hidden states, `len × h` (the layer output).
    h: Tensor,
}

impl Lstm {
    pub fn new(w_x: Tensor, w_h: Tensor, b: Tensor) -> Result<Self, NnError> {
        let ok = w_x.shape().len() == 2
            && w_h.shape().len() == 2
            && w_x.shape()[1].is_multiple_of(4)
            && w_h.shape() == [w_x.shape()[1] / 4, w_x.shape()[1]]
            && b.shape() == [w_x.shape()[1]];
        if !ok {
            return Err(shape_err(format!(
                "lstm W_x {:?} W_h {:?} b {:?}",
                w_x.shape(),
                w_h.shape(),
                b.shape()
            )));
        }
        Ok(Self { w_x, w_h, b })
    }

    /// Weights uniform in `±1/√h`, forget-gate bias 1, other biases 0.
    pub fn init(d: usize, h: usize, rng: &mut SplitMix64) -> Self {
        let bound = 1.0 / sqrt(h as f64);
        let w_x = Tensor::uniform(&[d, 4 * h], -bound, bound, rng);
        let w_h = Tensor::uniform(&[h, 4 * h], -bound, bound, rng);
        let mut b = Tensor::zeros(&[4 * h]);
        b.data_mut()[h..2 * h].fill(1.0);
        Self { w_x, w_h, b }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            w_x: Tensor::zeros(self.w_x.shape()),
            w_h: Tensor::zeros(self.w_h.shape()),
            b: Tensor::zeros(self.b.shape()),
        }
    }

    pub fn d_in(&self) -> usize {
        self.w_x.shape()[0]
    }

    pub fn hidden(&self) -> usize {
        self.w_h.shape()[0]
    }

    pub fn forward(&self, x: &Tensor) -> Result<(Tensor, LstmCache), NnError> {
        if x.shape().len() != 2 || x.cols() != self.d_in() {
            return Err(shape_err(format!(
                "lstm input {:?}, expected [_, {}]",
                x.shape(),
                self.d_in()
            )));
        }
        let (len, d, h) = (x.rows(), self.d_in(), self.hidden());
        let h4 = 4 * h;
        // Input contributions for all steps at once.
        let mut gates = Tensor::zeros(&[len, h4]);
        for t in 0..len {
            gates.row_mut(t).copy_from_slice(self.b.data());
        }
        matmul_acc(gates.data_mut(), x.data(), self.w_x.data(), len, d, h4);

        let mut c = Tensor::zeros(&[len, h]);
        let mut tanh_c = Tensor::zeros(&[len, h]);
        let mut hs = Tensor::zeros(&[len, h]);
        let mut c_prev = alloc::vec![0.0; h];
        let mut h_prev = alloc::vec![0.0; h];
        for t in 0..len {
            let z = gates.row_mut(t);
            matmul_acc(z, &h_prev, self.w_h.data(), 1, h, h4);
            for u in 0..h {
                z[u] = sigmoid(z[u]);
                z[h + u] = sigmoid(z[h + u]);
                z[2 * h + u] = tanh(z[2 * h + u]);
                z[3 * h + u] = sigmoid(z[3 * h + u]);
            }
            let z = gates.row(t);
            for u in 0..h {
                let cell = z[h + u] * c_prev[u] + z[u] * z[2 * h + u];
                c_prev[u] = cell;
                h_prev[u] = z[3 * h + u] * tanh(cell);
            }
            c.row_mut(t).copy_from_slice(&c_prev);
            for (tcv, &cv) in tanh_c.row_mut(t).iter_mut().zip(&c_prev) {
                *tcv = tanh(cv);
            }
            hs.row_mut(t).copy_from_slice(&h_prev);
        }
        let out = hs.clone();
        Ok((
            out,
            LstmCache {
                gates,
                c,
                tanh_c,
                h: hs,
            },
        ))
    }

    /// Backpropagation through time.
    pub fn backward(&self, x: &Tensor, cache: &LstmCache, grad_h: &Tensor, grad: &mut Lstm) -> Result<Tensor, NnError> {
        let (len, d, h) = (x.rows(), self.d_in(), self.hidden());
        let h4 = 4 * h;
        if grad_h.shape() != [len, h] || cache.h.shape() != [len, h] {
            return Err(shape_err(format!("lstm upstream grad {:?}", grad_h.shape())));
        }
        let mut dz_all = Tensor::zeros(&[len, h4]);
        let mut dh_next = alloc::vec![0.0; h];
        let mut dc_next = alloc::vec![0.0; h];
        for t in (0..len).rev() {
            let z = cache.gates.row(t);
            let tc = cache.tanh_c.row(t);
            let dz = dz_all.row_mut(t);
            for u in 0..h {
                let (i, f, g, o) = (z[u], z[h + u], z[2 * h + u], z[3 * h + u]);
                let c_prev = if t > 0 { cache.c.row(t - 1)[u] } else { 0.0 };
                let dh = grad_h.row(t)[u] + dh_next[u];
                let d_o = dh * tc[u];
                let dc = dh * o * (1.0 - tc[u] * tc[u]) + dc_next[u];
                dz[u] = dc * g * i * (1.0 - i);
                dz[h + u] = dc * c_prev * f * (1.0 - f);
                dz[2 * h + u] = dc * i * (1.0 - g * g);
                dz[3 * h + u] = d_o * o * (1.0 - o);
                dc_next[u] = dc * f;
            }
            dh_next.fill(0.0);
            matmul_a_bt_acc(&mut dh_next, dz, self.w_h.data(), 1, h, h4);
            if t > 0 {
                matmul_at_b_acc(grad.w_h.data_mut(), cache.h.row(t - 1), dz, 1, h, h4);
            }
        }
        matmul_at_b_acc(grad.w_x.data_mut(), x.data(), dz_all.data(), len, d, h4);
        for t in 0..len {
            for (gb, g) in grad.b.data_mut().iter_mut().zip(dz_all.row(t)) {
                *gb += g;
            }
        }
        let mut grad_x = Tensor::zeros(&[len, d]);
        matmul_a_bt_acc(grad_x.data_mut(), dz_all.data(), self.w_x.data(), len, d, h4);
        Ok(grad_x)
    }
}

/// Forward LSTM over the sequence and a second LSTM over the reversed
/// sequence; outputs concatenated per position as `[forward | backward]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiLstm {
    pub forward: Lstm,
    pub backward: Lstm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiLstmCache {
    forward: LstmCache,
    backward: LstmCache,
    reversed_x: Tensor,
}

fn reverse_rows(x: &Tensor) -> Tensor {
    let mut out = x.clone();
    let n = x.rows();
    for t in 0..n {
        out.row_mut(t).copy_from_slice(x.row(n - 1 - t));
    }
    out
}

impl BiLstm {
    pub fn init(d: usize, h: usize, rng: &mut SplitMix64) -> Self {
        let forward = Lstm::init(d, h, rng);
        let backward = Lstm::init(d, h, rng);
        Self { forward, backward }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            forward: self.forward.zeros_like(),
            backward: self.backward.zeros_like(),
        }
    }

    pub fn hidden(&self) -> usize {
        self.forward.hidden()
    }

    pub fn forward(&self, x: &Tensor) -> Result<(Tensor, BiLstmCache), NnError> {
        if self.forward.w_x.shape() != self.backward.w_x.shape() {
            return Err(shape_err("bilstm directions differ in shape"));
        }
        let (hf, fwd_cache) = self.forward.forward(x)?;
        let reversed_x = reverse_rows(x);
        let (hb_rev, bwd_cache) = self.backward.forward(&reversed_x)?;
        let hb = reverse_rows(&hb_rev);
        let (len, h) = (x.rows(), self.hidden());
        let mut out = Tensor::zeros(&[len, 2 * h]);
        for t in 0..len {
            let row = out.row_mut(t);
            row[..h].copy_from_slice(hf.row(t));
            row[h..].copy_from_slice(hb.row(t));
        }
        Ok((
            out,
            BiLstmCache {
                forward: fwd_cache,
                backward: bwd_cache,
                reversed_x,
            },
        ))
    }

    pub fn backward(
        &self,
        x: &Tensor,
        cache: &BiLstmCache,
        grad_y: &Tensor,
        grad: &mut BiLstm,
    ) -> Result<Tensor, NnError> {
        let (len, h) = (x.rows(), self.hidden());
        if grad_y.shape() != [len, 2 * h] {
            return Err(shape_err(format!("bilstm upstream grad {:?}", grad_y.shape())));
        }
        let mut gf = Tensor::zeros(&[len, h]);
        let mut gb_rev = Tensor::zeros(&[len, h]);
        for t in 0..len {
            gf.row_mut(t).copy_from_slice(&grad_y.row(t)[..h]);
            gb_rev.row_mut(len - 1 - t).copy_from_slice(&grad_y.row(t)[h..]);
        }
        let mut grad_x = self.forward.backward(x, &cache.forward, &gf, &mut grad.forward)?;
        let gx_rev = self
            .backward
            .backward(&cache.reversed_x, &cache.backward, &gb_rev, &mut grad.backward)?;
        grad_x.add_assign(&reverse_rows(&gx_rev));
        Ok(grad_x)
    }
}
