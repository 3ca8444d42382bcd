use crate::error::{Error, Result};
use crate::network::Gradients;
use crate::real::{lit, Real};

/// Moment accumulators for bias-corrected Adam.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    first: Vec<Vec<T>>,
    second: Vec<Vec<T>>,
}

impl<T: Real> AdamState<T> {
    pub fn new(block_sizes: impl IntoIterator<Item = usize>) -> Self {
        let sizes: Vec<usize> = block_sizes.into_iter().collect();
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            first: sizes.iter().map(|&n| vec![T::zero(); n]).collect(),
            second: sizes.iter().map(|&n| vec![T::zero(); n]).collect(),
        }
    }

    pub fn for_params(params: &[&[T]]) -> Self {
        Self::new(params.iter().map(|p| p.len()))
    }

    pub fn first_moment(&self) -> &[Vec<T>] {
        &self.first
    }

    pub fn second_moment(&self) -> &[Vec<T>] {
        &self.second
    }
}

/// One Adam update of `params` in place.
///
/// Nothing is modified when any gradient is non-finite.
pub fn adam_step<T: Real>(state: &mut AdamState<T>, params: &mut [&mut [T]], grads: &Gradients<T>, lr: f64) -> Result<()> {
    if params.len() != grads.blocks.len() || params.len() != state.first.len() {
        return Err(Error::Shape(format!(
            "{} parameter blocks, {} gradient blocks, {} optimizer blocks",
            params.len(),
            grads.blocks.len(),
            state.first.len()
        )));
    }
    for (i, (p, g)) in params.iter().zip(&grads.blocks).enumerate() {
        if p.len() != g.len() || p.len() != state.first[i].len() {
            return Err(Error::Shape(format!("parameter block {i} size mismatch")));
        }
    }
    if let Some(block) = grads.blocks.iter().position(|g| g.iter().any(|v| !v.is_finite())) {
        return Err(Error::NonFiniteGradient { block });
    }
    state.step += 1;
    let t = state.step as i32;
    let b1: T = lit(state.beta1);
    let b2: T = lit(state.beta2);
    let c1: T = lit(1.0 - state.beta1);
    let c2: T = lit(1.0 - state.beta2);
    // lr * sqrt(1 - b2^t) / (1 - b1^t) folded with the bias-corrected denominator
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    let step_size: T = lit(lr / bc1);
    let inv_bc2: T = lit(1.0 / bc2);
    let eps: T = lit(state.eps);
    for (((p, g), m), v) in params
        .iter_mut()
        .zip(&grads.blocks)
        .zip(state.first.iter_mut())
        .zip(state.second.iter_mut())
    {
        for (((pi, &gi), mi), vi) in p.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
            *mi = b1 * *mi + c1 * gi;
            *vi = b2 * *vi + c2 * gi * gi;
            *pi = *pi - step_size * *mi / ((*vi * inv_bc2).sqrt() + eps);
        }
    }
    Ok(())
}
