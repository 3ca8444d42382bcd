//! Coordinate grids, losses, Adam and the lossless-stopping fit loop.

mod adam;
mod fit;
mod grid;
mod loss;
mod report;

use serde::{Deserialize, Serialize};

pub use adam::{adam_step, AdamState};
pub use fit::{
    fit, fit_model, predict_planes, verify_lossless, verify_lossless_model, within_error_ceiling, LosslessCheck,
    Trainable,
};
pub use grid::{axis_coordinate, bit_coordinate, make_grid, make_grid_for_planes, make_spatial_grid, BitMapping, CoordinateGrid};
pub use loss::{loss_eval, LossKind};
pub use report::{Checkpoint, TrainReport};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BatchMode {
    FullBatch,
    MiniBatch(usize),
}

/// Multiply the learning rate by `factor` every `every` steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrDecay {
    pub factor: f64,
    pub every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub loss: LossKind,
    pub learning_rate: f64,
    pub max_iterations: usize,
    /// Iterations between lossless checks.
    pub check_interval: usize,
    pub batch_mode: BatchMode,
    pub seed: u64,
    pub lr_decay: Option<LrDecay>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            loss: LossKind::Bce,
            learning_rate: 1e-4,
            max_iterations: 20_000,
            check_interval: 50,
            batch_mode: BatchMode::FullBatch,
            seed: 0,
            lr_decay: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Invalid(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if self.check_interval == 0 {
            return Err(Error::Invalid("check interval must be at least 1".into()));
        }
        if let BatchMode::MiniBatch(0) = self.batch_mode {
            return Err(Error::Invalid("mini-batch size must be positive".into()));
        }
        if let Some(d) = self.lr_decay {
            if d.every == 0 || !(d.factor > 0.0) {
                return Err(Error::Invalid("learning-rate decay needs a positive factor and period".into()));
            }
        }
        Ok(())
    }

    pub fn learning_rate_at(&self, step: usize) -> f64 {
        match self.lr_decay {
            Some(d) => self.learning_rate * d.factor.powi((step / d.every) as i32),
            None => self.learning_rate,
        }
    }
}
