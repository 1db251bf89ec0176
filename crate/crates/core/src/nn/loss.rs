use alloc::format;

use super::math::{exp, ln};
use super::{shape_err, NnError, Tensor};

/// Row-wise softmax with max subtraction.
pub fn softmax_rows(logits: &Tensor) -> Tensor {
    let mut out = logits.clone();
    for t in 0..out.rows() {
        let row = out.row_mut(t);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for v in row.iter_mut() {
            *v = exp(*v - max);
            total += *v;
        }
        for v in row.iter_mut() {
            *v /= total;
        }
    }
    out
}

/// Unnormalized masked cross-entropy: `(Σ mask·nll, Σ mask·∂nll/∂logits, Σ mask)`.
pub fn masked_softmax_ce_sum(logits: &Tensor, targets: &[usize], mask: &[u8]) -> Result<(f64, Tensor, usize), NnError> {
    let (len, m) = (logits.rows(), logits.cols());
    if targets.len() != len || mask.len() != len {
        return Err(shape_err(format!(
            "{len} logit rows, {} targets, {} mask entries",
            targets.len(),
            mask.len()
        )));
    }
    let mut grad = Tensor::zeros(&[len, m]);
    let mut loss = 0.0;
    let mut count = 0usize;
    for t in 0..len {
        if mask[t] == 0 {
            continue;
        }
        let target = targets[t];
        if target >= m {
            return Err(shape_err(format!("target {target} outside {m} classes")));
        }
        let row = logits.row(t);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum_exp: f64 = row.iter().map(|&v| exp(v - max)).sum();
        let log_z = max + ln(sum_exp);
        loss += log_z - row[target];
        let g = grad.row_mut(t);
        for (gv, &v) in g.iter_mut().zip(row) {
            *gv = exp(v - log_z);
        }
        g[target] -= 1.0;
        count += 1;
    }
    Ok((loss, grad, count))
}

/// Mean negative log-likelihood over unmasked positions and its gradient
/// with respect to the logits (zero on masked rows).
pub fn masked_softmax_ce(logits: &Tensor, targets: &[usize], mask: &[u8]) -> Result<(f64, Tensor), NnError> {
    let (loss, mut grad, count) = masked_softmax_ce_sum(logits, targets, mask)?;
    if count == 0 {
        return Err(NnError::AllMasked);
    }
    let scale = 1.0 / count as f64;
    grad.scale(scale);
    Ok((loss * scale, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use alloc::vec;

    #[test]
    fn uniform_logits_give_ln_m() {
        let logits = Tensor::zeros(&[2, 8]);
        let (loss, _) = masked_softmax_ce(&logits, &[3, 0], &[1, 0]).unwrap();
        assert!((loss - 8f64.ln()).abs() < 1e-12);
        assert!((loss - 2.0794).abs() < 1e-4);
    }

    #[test]
    fn confident_correct_logit() {
        let mut logits = Tensor::zeros(&[1, 8]);
        logits.data_mut()[5] = 50.0;
        let (loss, _) = masked_softmax_ce(&logits, &[5], &[1]).unwrap();
        assert!(loss < 1e-8);
    }

    #[test]
    fn masked_rows_ignored() {
        let mut rng = SplitMix64::new(5);
        let logits = Tensor::uniform(&[3, 4], -2.0, 2.0, &mut rng);
        let (base, grad) = masked_softmax_ce(&logits, &[1, 2, 3], &[1, 0, 1]).unwrap();
        let mut perturbed = logits.clone();
        perturbed.row_mut(1).fill(100.0);
        let (again, _) = masked_softmax_ce(&perturbed, &[1, 2, 3], &[1, 0, 1]).unwrap();
        assert_eq!(base, again);
        assert!(grad.row(1).iter().all(|&g| g == 0.0));
    }

    #[test]
    fn all_masked_is_error() {
        let logits = Tensor::zeros(&[2, 3]);
        assert_eq!(masked_softmax_ce(&logits, &[0, 0], &[0, 0]), Err(NnError::AllMasked));
    }

    #[test]
    fn stable_for_huge_logits() {
        let logits = Tensor::from_vec(&[2, 3], vec![1e4, -1e4, 0.0, -1e4, -1e4, 1e4]).unwrap();
        let (loss, grad) = masked_softmax_ce(&logits, &[1, 2], &[1, 1]).unwrap();
        assert!(loss.is_finite());
        assert!(grad.data().iter().all(|g| g.is_finite()));
        let sm = softmax_rows(&logits);
        for t in 0..2 {
            assert!((sm.row(t).iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
