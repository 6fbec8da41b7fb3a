use crate::{Error, Result};

/// Scores are clamped to `[eps, 1 - eps]` before taking logs.
pub const SCORE_EPSILON: f64 = 1e-7;

fn check(scores: &[f64], labels: &[u8]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch(scores.len(), labels.len()));
    }
    if scores.is_empty() {
        return Err(Error::InvalidParam("empty score sequence".into()));
    }
    if let Some(l) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::InvalidParam(format!("label {l} is not binary")));
    }
    Ok(())
}

fn mean_bce(scores: &[f64], labels: &[u8]) -> f64 {
    let total: f64 = scores
        .iter()
        .zip(labels)
        .map(|(&s, &y)| {
            let s = s.clamp(SCORE_EPSILON, 1.0 - SCORE_EPSILON);
            if y == 1 {
                -s.ln()
            } else {
                -(1.0 - s).ln()
            }
        })
        .sum();
    total / scores.len() as f64
}

/// Mean binary cross-entropy over every position, special tokens included.
pub fn bce_loss(scores: &[f64], labels: &[u8]) -> Result<f64> {
    check(scores, labels)?;
    Ok(mean_bce(scores, labels))
}

/// Loss plus its gradient with respect to the pre-sigmoid logits,
/// `(s_i - y_i) / L`.
///
/// The gradient ignores the clamp so saturated wrong predictions still get
/// pushed back; it equals the exact gradient wherever the clamp is inactive.
pub fn bce_loss_with_logit_grad(scores: &[f64], labels: &[u8]) -> (f64, Vec<f64>) {
    debug_assert_eq!(scores.len(), labels.len());
    let n = scores.len() as f64;
    let grad = scores.iter().zip(labels).map(|(&s, &y)| (s - y as f64) / n).collect();
    (mean_bce(scores, labels), grad)
}
