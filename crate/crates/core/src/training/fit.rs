use std::time::Instant;

use rand::seq::index;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics;
use crate::network::ternary::TernaryMlp;
use crate::network::{rng_from_seed, Gradients, Mlp};
use crate::real::{lit, Real};
use crate::signal::{decompose, epsilon, max_level, quantize_unchecked, recompose, DigitalSignal, QuantizedStack};
use crate::training::adam::{adam_step, AdamState};
use crate::training::grid::{make_grid_for_planes, make_spatial_grid, BitMapping};
use crate::training::loss::{check_targets, loss_terms, sigmoid, LossKind};
use crate::training::report::{Checkpoint, TrainReport};
use crate::training::{BatchMode, TrainConfig};

/// Rows per forward/backward chunk. Fixed so reductions do not depend on
/// the worker count.
const CHUNK_ROWS: usize = 2048;

/// A coordinate model the fit loop can optimize.
pub trait Trainable<T: Real>: Sync {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn predict(&self, coords: &[T]) -> Result<Vec<T>>;
    /// Forward pass, then gradients for the upstream computed from its outputs.
    fn forward_backward(&self, coords: &[T], upstream: &mut dyn FnMut(&[T]) -> Vec<T>) -> Result<Gradients<T>>;
    fn block_sizes(&self) -> Vec<usize>;
    fn params_mut(&mut self) -> Vec<&mut [T]>;
    fn after_update(&mut self) {}
}

impl<T: Real> Trainable<T> for Mlp<T> {
    fn input_dim(&self) -> usize {
        Mlp::input_dim(self)
    }

    fn output_dim(&self) -> usize {
        Mlp::output_dim(self)
    }

    fn predict(&self, coords: &[T]) -> Result<Vec<T>> {
        self.forward(coords)
    }

    fn forward_backward(&self, coords: &[T], upstream: &mut dyn FnMut(&[T]) -> Vec<T>) -> Result<Gradients<T>> {
        let trace = self.forward_trace(coords)?;
        let up = upstream(trace.output());
        self.backward_trace(&trace, &up)
    }

    fn block_sizes(&self) -> Vec<usize> {
        self.params().iter().map(|b| b.len()).collect()
    }

    fn params_mut(&mut self) -> Vec<&mut [T]> {
        Mlp::params_mut(self)
    }
}

impl<T: Real> Trainable<T> for TernaryMlp<T> {
    fn input_dim(&self) -> usize {
        TernaryMlp::input_dim(self)
    }

    fn output_dim(&self) -> usize {
        TernaryMlp::output_dim(self)
    }

    fn predict(&self, coords: &[T]) -> Result<Vec<T>> {
        self.forward(coords)
    }

    fn forward_backward(&self, coords: &[T], upstream: &mut dyn FnMut(&[T]) -> Vec<T>) -> Result<Gradients<T>> {
        Ok(TernaryMlp::forward_backward(self, coords, |o| upstream(o))?.1)
    }

    fn block_sizes(&self) -> Vec<usize> {
        self.shadow_params().iter().map(|b| b.len()).collect()
    }

    fn params_mut(&mut self) -> Vec<&mut [T]> {
        self.shadow_params_mut()
    }

    fn after_update(&mut self) {
        self.requantize();
    }
}

/// Coordinates and targets for every plane of one signal.
struct Problem<T> {
    stack: QuantizedStack,
    dim: usize,
    channels: usize,
    coords: Vec<T>,
    targets: Vec<T>,
}

impl<T: Real> Problem<T> {
    fn new(signal: &DigitalSignal, plane_bits: u32, mapping: Option<BitMapping>) -> Result<Self> {
        let stack = decompose(signal, plane_bits)?;
        let m = stack.plane_count();
        let grid = match mapping {
            None if m == 1 => make_spatial_grid(signal.shape())?,
            None => make_grid_for_planes(signal.shape(), &(0..m).collect::<Vec<_>>(), m)?,
            Some(map) => make_grid_for_planes(signal.shape(), &(map.offset..map.offset + m).collect::<Vec<_>>(), map.n_map)?,
        };
        let scale = max_level(plane_bits) as f64;
        let targets = stack
            .planes()
            .iter()
            .flatten()
            .map(|&v| lit::<T>(v as f64 / scale))
            .collect();
        Ok(Self {
            dim: grid.dim,
            channels: signal.channels(),
            coords: grid.points.iter().map(|&v| lit(v)).collect(),
            targets,
            stack,
        })
    }

    fn rows(&self) -> usize {
        self.coords.len() / self.dim
    }

    fn check_model<M: Trainable<T>>(&self, model: &M) -> Result<()> {
        if model.input_dim() != self.dim {
            return Err(Error::Shape(format!(
                "model takes {} coordinates but the grid has {} (spatial axes{})",
                model.input_dim(),
                self.dim,
                if self.dim > self.stack.shape().len() { " + bit axis" } else { "" }
            )));
        }
        if model.output_dim() != self.channels {
            return Err(Error::Shape(format!(
                "model outputs {} values per point, signal has {} channels",
                model.output_dim(),
                self.channels
            )));
        }
        Ok(())
    }
}

fn predict_chunked<T: Real, M: Trainable<T>>(model: &M, coords: &[T], dim: usize) -> Result<Vec<T>> {
    let parts = coords
        .par_chunks(CHUNK_ROWS * dim)
        .map(|c| model.predict(c))
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.concat())
}

/// Map raw outputs to plane levels.
fn output_levels<T: Real>(outputs: &[T], plane_bits: u32, loss: LossKind) -> Vec<u32> {
    outputs
        .iter()
        .map(|&o| {
            let v = o.to_f64().unwrap_or(f64::NAN);
            if loss.outputs_logits() {
                // sigma(z) >= 0.5 exactly when z >= 0
                (v >= 0.0) as u32
            } else {
                quantize_unchecked(v, plane_bits)
            }
        })
        .collect()
}

/// Outcome of reassembling a model's quantized planes.
#[derive(Debug, Clone, PartialEq)]
pub struct LosslessCheck {
    pub is_lossless: bool,
    pub ber: f64,
    pub psnr: f64,
    pub per_plane_ber: Vec<f64>,
    pub reconstructed: DigitalSignal,
}

fn check_problem<T: Real, M: Trainable<T>>(model: &M, problem: &Problem<T>, signal: &DigitalSignal, loss: LossKind) -> Result<LosslessCheck> {
    let outputs = predict_chunked(model, &problem.coords, problem.dim)?;
    let k = problem.stack.plane_bits();
    let levels = output_levels(&outputs, k, loss);
    let plane_len = signal.len();
    let planes = levels.chunks(plane_len).map(<[u32]>::to_vec).collect();
    let stack = QuantizedStack::from_planes(
        signal.shape().to_vec(),
        signal.channels(),
        signal.bit_depth(),
        k,
        planes,
    )?;
    let reconstructed = recompose(&stack)?;
    let ber = metrics::ber(signal, &reconstructed)?;
    Ok(LosslessCheck {
        is_lossless: reconstructed == *signal,
        ber,
        psnr: metrics::psnr(signal, &reconstructed)?,
        per_plane_ber: metrics::per_plane_ber(signal, &reconstructed)?,
        reconstructed,
    })
}

/// Quantize every plane prediction, reassemble, and compare to the signal exactly.
pub fn verify_lossless<T: Real>(net: &Mlp<T>, signal: &DigitalSignal, plane_bits: u32, loss: LossKind) -> Result<LosslessCheck> {
    verify_lossless_model(net, signal, plane_bits, None, loss)
}

pub fn verify_lossless_model<T: Real, M: Trainable<T>>(
    model: &M,
    signal: &DigitalSignal,
    plane_bits: u32,
    mapping: Option<BitMapping>,
    loss: LossKind,
) -> Result<LosslessCheck> {
    let problem = Problem::<T>::new(signal, plane_bits, mapping)?;
    problem.check_model(model)?;
    check_problem(model, &problem, signal, loss)
}

/// The sup-norm criterion: every normalized plane prediction lies within
/// `epsilon(k)` of its target.
///
/// Agrees with [`verify_lossless`] except on exact quantization midpoints.
pub fn within_error_ceiling<T: Real>(net: &Mlp<T>, signal: &DigitalSignal, plane_bits: u32, loss: LossKind) -> Result<bool> {
    let problem = Problem::<T>::new(signal, plane_bits, None)?;
    problem.check_model(net)?;
    let outputs = predict_chunked(net, &problem.coords, problem.dim)?;
    let eps = epsilon(plane_bits)?;
    Ok(outputs.iter().zip(&problem.targets).all(|(&o, &t)| {
        let o = o.to_f64().unwrap_or(f64::NAN);
        let p = if loss.outputs_logits() { sigmoid(o) } else { o.clamp(0.0, 1.0) };
        (p - t.to_f64().unwrap_or(f64::NAN)).abs() <= eps
    }))
}

/// Predicted levels for arbitrary global plane indices, one vector per plane.
pub fn predict_planes<T: Real, M: Trainable<T>>(
    model: &M,
    shape: &[usize],
    planes: &[usize],
    n_map: usize,
    plane_bits: u32,
    loss: LossKind,
) -> Result<Vec<Vec<u32>>> {
    let grid = make_grid_for_planes(shape, planes, n_map)?;
    if model.input_dim() != grid.dim {
        return Err(Error::Shape(format!("model takes {} coordinates, grid has {}", model.input_dim(), grid.dim)));
    }
    let coords: Vec<T> = grid.points.iter().map(|&v| lit(v)).collect();
    let out = predict_chunked(model, &coords, grid.dim)?;
    let per_plane = grid.grid_len * model.output_dim();
    Ok(output_levels(&out, plane_bits, loss)
        .chunks(per_plane)
        .map(<[u32]>::to_vec)
        .collect())
}

/// Fit an [`Mlp`] to every `k`-bit plane of `signal`.
pub fn fit<T: Real>(signal: &DigitalSignal, plane_bits: u32, net: Mlp<T>, config: &TrainConfig) -> Result<(Mlp<T>, TrainReport)> {
    fit_model(signal, plane_bits, None, net, config)
}

/// The general fit loop.
///
/// Planes are addressed through `mapping` when given (always with a bit
/// axis); otherwise a bit axis is used only when there is more than one plane.
pub fn fit_model<T: Real, M: Trainable<T>>(
    signal: &DigitalSignal,
    plane_bits: u32,
    mapping: Option<BitMapping>,
    mut model: M,
    config: &TrainConfig,
) -> Result<(M, TrainReport)> {
    config.validate()?;
    let start = Instant::now();
    let problem = Problem::<T>::new(signal, plane_bits, mapping)?;
    problem.check_model(&model)?;
    if config.loss == LossKind::Bce {
        check_targets(config.loss, &problem.targets)?;
    }
    let rows = problem.rows();
    let (dim, out_dim) = (problem.dim, problem.channels);
    let mut adam = AdamState::<T>::new(model.block_sizes());
    let mut rng = rng_from_seed(config.seed);
    let mut records = Vec::new();
    let mut at_lossless = None;
    let mut batch_coords = Vec::new();
    let mut batch_targets = Vec::new();

    for step in 1..=config.max_iterations {
        let (coords, targets) = match config.batch_mode {
            BatchMode::MiniBatch(size) if size < rows => {
                batch_coords.clear();
                batch_targets.clear();
                for i in index::sample(&mut rng, rows, size).iter() {
                    batch_coords.extend_from_slice(&problem.coords[i * dim..(i + 1) * dim]);
                    batch_targets.extend_from_slice(&problem.targets[i * out_dim..(i + 1) * out_dim]);
                }
                (&batch_coords[..], &batch_targets[..])
            }
            _ => (&problem.coords[..], &problem.targets[..]),
        };
        let scale = 1.0 / targets.len() as f64;
        let parts = coords
            .par_chunks(CHUNK_ROWS * dim)
            .zip(targets.par_chunks(CHUNK_ROWS * out_dim))
            .map(|(c, t)| {
                let mut sum = 0.0;
                let g = model.forward_backward(c, &mut |out: &[T]| {
                    let (s, up) = loss_terms(config.loss, out, t, scale);
                    sum = s;
                    up
                })?;
                Ok((sum, g))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut parts = parts.into_iter();
        let (mut loss_sum, mut grads) = parts.next().expect("at least one chunk");
        for (s, g) in parts {
            loss_sum += s;
            grads.add_assign(&g);
        }
        let loss = loss_sum * scale;
        if !loss.is_finite() {
            return Err(Error::Diverged { iteration: step, loss });
        }
        adam_step(&mut adam, &mut model.params_mut(), &grads, config.learning_rate_at(step - 1))?;
        model.after_update();

        if step % config.check_interval == 0 || step == config.max_iterations {
            let check = check_problem(&model, &problem, signal, config.loss)?;
            records.push(Checkpoint {
                iteration: step,
                loss,
                ber: check.ber,
                psnr: check.psnr,
                per_plane_ber: check.per_plane_ber,
            });
            if check.is_lossless {
                at_lossless = Some(step);
                break;
            }
        }
    }

    Ok((
        model,
        TrainReport {
            records,
            iteration_at_lossless: at_lossless,
            wall_time_secs: start.elapsed().as_secs_f64(),
            config: config.clone(),
            plane_bits,
            bit_depth: signal.bit_depth(),
        },
    ))
}
