use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::math::sqrt;
use super::{shape_err, NnError, Tensor};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmsPropConfig {
    pub learning_rate: f64,
    pub rho: f64,
    pub epsilon: f64,
}

impl Default for RmsPropConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            rho: 0.9,
            epsilon: 1e-8,
        }
    }
}

/// `s ← ρ·s + (1−ρ)·g²; p ← p − lr·g / (√s + ε)`, elementwise.
pub fn rmsprop_step(
    params: &mut [f64],
    grads: &[f64],
    mean_square: &mut [f64],
    config: &RmsPropConfig,
) -> Result<(), NnError> {
    if params.len() != grads.len() || params.len() != mean_square.len() {
        return Err(shape_err(format!(
            "rmsprop: {} params, {} grads, {} accumulators",
            params.len(),
            grads.len(),
            mean_square.len()
        )));
    }
    let RmsPropConfig {
        learning_rate,
        rho,
        epsilon,
    } = *config;
    for ((p, &g), s) in params.iter_mut().zip(grads).zip(mean_square.iter_mut()) {
        *s = rho * *s + (1.0 - rho) * g * g;
        *p -= learning_rate * g / (sqrt(*s) + epsilon);
    }
    Ok(())
}

/// RMSProp state over an ordered list of parameter tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct RmsProp {
    pub config: RmsPropConfig,
    mean_square: Vec<Vec<f64>>,
}

impl RmsProp {
    pub fn new(config: RmsPropConfig, sizes: impl IntoIterator<Item = usize>) -> Self {
        Self {
            config,
            mean_square: sizes.into_iter().map(|n| vec![0.0; n]).collect(),
        }
    }

    pub fn mean_square(&self) -> &[Vec<f64>] {
        &self.mean_square
    }

    pub fn step(&mut self, params: Vec<&mut Tensor>, grads: Vec<&Tensor>) -> Result<(), NnError> {
        if params.len() != self.mean_square.len() || grads.len() != params.len() {
            return Err(shape_err("rmsprop: parameter list changed"));
        }
        for ((p, g), s) in params.into_iter().zip(grads).zip(&mut self.mean_square) {
            rmsprop_step(p.data_mut(), g.data(), s, &self.config)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_step_on_quadratic() {
        let config = RmsPropConfig {
            learning_rate: 0.1,
            ..RmsPropConfig::default()
        };
        let mut w = [1.0];
        let mut s = [0.0];
        {
            let g = [2.0 * w[0]];
            rmsprop_step(&mut w, &g, &mut s, &config)
        }
        .unwrap();
        assert!((s[0] - 0.4).abs() < 1e-15);
        // 1 - 0.1·2/(√0.4 + 1e-8)
        assert!((w[0] - 0.683772).abs() < 1e-6, "{}", w[0]);
    }

    #[test]
    fn zero_gradient_only_decays() {
        let config = RmsPropConfig::default();
        let mut w = [0.7, -3.0];
        let mut s = [0.5, 2.0];
        rmsprop_step(&mut w, &[0.0, 0.0], &mut s, &config).unwrap();
        assert_eq!(w, [0.7, -3.0]);
        assert!((s[0] - 0.45).abs() < 1e-15 && (s[1] - 1.8).abs() < 1e-15);
    }

    #[test]
    fn converges_on_quadratic() {
        // With lr = 0.1 the iterate settles into an oscillation of |w| ~ 0.05;
        // lr = 0.01 reaches the 1e-2 ball well within 200 steps.
        let config = RmsPropConfig {
            learning_rate: 0.01,
            ..RmsPropConfig::default()
        };
        // Oracle recurrence written out independently of `rmsprop_step`.
        let (mut w_ref, mut s_ref) = (1.0f64, 0.0f64);
        let mut w = [1.0];
        let mut s = [0.0];
        let mut prev = f64::INFINITY;
        for step in 0..200 {
            let g = 2.0 * w_ref;
            s_ref = 0.9 * s_ref + 0.1 * g * g;
            w_ref -= 0.01 * g / (s_ref.sqrt() + 1e-8);
            {
                let g = [2.0 * w[0]];
                rmsprop_step(&mut w, &g, &mut s, &config)
            }
            .unwrap();
            assert!((w[0] - w_ref).abs() < 1e-12);
            let loss = w[0] * w[0];
            if step > 0 && step < 5 {
                assert!(loss < prev);
            }
            prev = loss;
        }
        assert!(w[0].abs() < 1e-2, "{}", w[0]);
    }

    #[test]
    fn default_config_decreases_quadratic_monotonically() {
        let config = RmsPropConfig::default();
        let mut w = [1.0];
        let mut s = [0.0];
        let mut prev = 1.0;
        for _ in 0..500 {
            {
                let g = [2.0 * w[0]];
                rmsprop_step(&mut w, &g, &mut s, &config)
            }
            .unwrap();
            let loss = w[0] * w[0];
            assert!(loss < prev);
            prev = loss;
        }
    }

    #[test]
    fn shape_mismatch() {
        let mut w = [1.0, 2.0];
        let mut s = [0.0, 0.0];
        assert!(rmsprop_step(&mut w, &[1.0], &mut s, &RmsPropConfig::default()).is_err());
    }
}
