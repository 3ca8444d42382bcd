use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LossKind {
    /// Binary cross-entropy on logits; the network output passes through a sigmoid.
    Bce,
    Mse,
    Mae,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Bce => "bce",
            LossKind::Mse => "mse",
            LossKind::Mae => "mae",
        }
    }

    /// Whether raw network outputs are logits rather than values in `[0, 1]`.
    pub fn outputs_logits(self) -> bool {
        matches!(self, LossKind::Bce)
    }
}

impl std::str::FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bce" => Ok(LossKind::Bce),
            "mse" => Ok(LossKind::Mse),
            "mae" => Ok(LossKind::Mae),
            other => Err(Error::Invalid(format!("unknown loss {other:?}"))),
        }
    }
}

#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn check_targets<T: Real>(kind: LossKind, targets: &[T]) -> Result<()> {
    if kind == LossKind::Bce {
        if let Some(t) = targets.iter().find(|&&t| t != T::zero() && t != T::one()) {
            return Err(Error::Invalid(format!("binary cross-entropy needs {{0,1}} targets, found {t}")));
        }
    }
    Ok(())
}

/// Sum of per-element losses, and per-element gradients multiplied by `scale`.
pub(crate) fn loss_terms<T: Real>(kind: LossKind, preds: &[T], targets: &[T], scale: f64) -> (f64, Vec<T>) {
    let mut total = 0.0;
    let grads = preds
        .iter()
        .zip(targets)
        .map(|(&p, &t)| {
            let (p, t) = (p.to_f64().unwrap_or(f64::NAN), t.to_f64().unwrap_or(f64::NAN));
            let (l, g) = match kind {
                LossKind::Bce => {
                    // max(z,0) - z t + log(1 + e^-|z|)
                    let l = p.max(0.0) - p * t + (-p.abs()).exp().ln_1p();
                    (l, sigmoid(p) - t)
                }
                LossKind::Mse => {
                    let d = p - t;
                    (d * d, 2.0 * d)
                }
                LossKind::Mae => {
                    let d = p - t;
                    let g = if d > 0.0 {
                        1.0
                    } else if d < 0.0 {
                        -1.0
                    } else {
                        0.0
                    };
                    (d.abs(), g)
                }
            };
            total += l;
            lit::<T>(g * scale)
        })
        .collect();
    (total, grads)
}

/// Mean loss over the batch and its gradient with respect to the predictions.
pub fn loss_eval<T: Real>(kind: LossKind, predictions: &[T], targets: &[T]) -> Result<(f64, Vec<T>)> {
    if predictions.len() != targets.len() {
        return Err(Error::Shape(format!(
            "{} predictions for {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::Invalid("empty batch".into()));
    }
    check_targets(kind, targets)?;
    let n = predictions.len() as f64;
    let (sum, grads) = loss_terms(kind, predictions, targets, 1.0 / n);
    Ok((sum / n, grads))
}
