//! Coordinate MLPs with exact reverse-mode gradients.
//!
//! Batches are row-major: a batch of `B` points of dimension `d` is a flat
//! slice of length `B * d`. Weight matrices are `d_out x d_in`, row-major.

mod activation;
pub mod ternary;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use activation::{positional_encoding, ActivationKind};
pub use crate::real::{Precision, Real};

use crate::error::{Error, Result};
use crate::real::lit;

/// Seeded generator used for every random draw in the crate.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer<T> {
    pub d_in: usize,
    pub d_out: usize,
    pub weight: Vec<T>,
    pub bias: Option<Vec<T>>,
}

impl<T: Real> Layer<T> {
    pub fn new(d_in: usize, d_out: usize, weight: Vec<T>, bias: Option<Vec<T>>) -> Result<Self> {
        if d_in == 0 || d_out == 0 {
            return Err(Error::Shape("layer dimensions must be positive".into()));
        }
        if weight.len() != d_in * d_out {
            return Err(Error::Shape(format!(
                "weight has {} entries, expected {d_out}x{d_in}",
                weight.len()
            )));
        }
        if let Some(b) = &bias {
            if b.len() != d_out {
                return Err(Error::Shape(format!("bias has {} entries, expected {d_out}", b.len())));
            }
        }
        Ok(Self {
            d_in,
            d_out,
            weight,
            bias,
        })
    }

    pub fn param_count(&self) -> usize {
        self.d_in * self.d_out + self.bias.as_ref().map_or(0, Vec::len)
    }

    /// `out = x W^T + b` for a batch of `rows` inputs.
    fn affine(&self, x: &[T], rows: usize, out: &mut [T]) {
        match &self.bias {
            Some(b) => {
                for row in out.chunks_exact_mut(self.d_out) {
                    row.copy_from_slice(b);
                }
            }
            None => out.iter_mut().for_each(|v| *v = T::zero()),
        }
        T::gemm(
            rows,
            self.d_in,
            self.d_out,
            T::one(),
            x,
            self.d_in,
            1,
            &self.weight,
            1,
            self.d_in,
            T::one(),
            out,
            self.d_out,
            1,
        );
    }
}

/// Architecture description shared by every network built for an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetSpec {
    pub hidden_dim: usize,
    /// Number of hidden (activated) layers.
    pub depth: usize,
    pub activation: ActivationKind,
}

impl NetSpec {
    pub fn new(hidden_dim: usize, depth: usize, activation: ActivationKind) -> Self {
        Self {
            hidden_dim,
            depth,
            activation,
        }
    }

    pub fn build<T: Real>(&self, input_dim: usize, output_dim: usize, seed: u64) -> Result<Mlp<T>> {
        Mlp::init(input_dim, self.hidden_dim, self.depth, output_dim, self.activation, seed)
    }
}

/// A fully connected coordinate network.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T> {
    input_dim: usize,
    activation: ActivationKind,
    seed: u64,
    layers: Vec<Layer<T>>,
}

/// Per-parameter gradients, in the order of [`Mlp::params`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub blocks: Vec<Vec<T>>,
}

impl<T: Real> Gradients<T> {
    pub fn zeros_like(blocks: &[&[T]]) -> Self {
        Self {
            blocks: blocks.iter().map(|b| vec![T::zero(); b.len()]).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            for (x, y) in a.iter_mut().zip(b) {
                *x = *x + *y;
            }
        }
    }

    pub fn scale(&mut self, factor: T) {
        self.blocks.iter_mut().flatten().for_each(|v| *v = *v * factor);
    }
}

/// Activations kept from a forward pass for the backward pass.
#[derive(Debug, Clone)]
pub struct Trace<T> {
    rows: usize,
    /// First-layer input (positionally encoded if applicable).
    input: Vec<T>,
    /// Activated outputs of the hidden layers.
    hidden: Vec<Vec<T>>,
    /// Activation derivatives of the hidden layers.
    derivs: Vec<Vec<T>>,
    output: Vec<T>,
}

impl<T> Trace<T> {
    pub fn output(&self) -> &[T] {
        &self.output
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
}

impl<T: Real> Mlp<T> {
    /// Random initialization; deterministic given `seed`.
    ///
    /// Sine networks use the first-layer bound `1/d_in` and
    /// `sqrt(6/d_in)/omega0` elsewhere; other activations use `sqrt(6/d_in)`.
    /// Biases start at zero.
    pub fn init(
        input_dim: usize,
        hidden_dim: usize,
        depth: usize,
        output_dim: usize,
        activation: ActivationKind,
        seed: u64,
    ) -> Result<Self> {
        if input_dim == 0 || hidden_dim == 0 || depth == 0 || output_dim == 0 {
            return Err(Error::Invalid(format!(
                "network dimensions must be positive (input {input_dim}, hidden {hidden_dim}, depth {depth}, output {output_dim})"
            )));
        }
        activation.validate()?;
        let mut rng = rng_from_seed(seed);
        let mut dims = vec![activation.encoded_dim(input_dim)];
        dims.extend(std::iter::repeat_n(hidden_dim, depth));
        dims.push(output_dim);
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let (d_in, d_out) = (w[0], w[1]);
                let bound = match activation {
                    ActivationKind::Sine { .. } if i == 0 => 1.0 / d_in as f64,
                    ActivationKind::Sine { omega0 } => (6.0 / d_in as f64).sqrt() / omega0,
                    _ => (6.0 / d_in as f64).sqrt(),
                };
                let weight = (0..d_in * d_out)
                    .map(|_| lit::<T>(rng.gen_range(-bound..=bound)))
                    .collect();
                Layer {
                    d_in,
                    d_out,
                    weight,
                    bias: Some(vec![T::zero(); d_out]),
                }
            })
            .collect();
        Ok(Self {
            input_dim,
            activation,
            seed,
            layers,
        })
    }

    pub fn from_layers(input_dim: usize, activation: ActivationKind, seed: u64, layers: Vec<Layer<T>>) -> Result<Self> {
        activation.validate()?;
        let first = layers
            .first()
            .ok_or_else(|| Error::Shape("network needs at least one layer".into()))?;
        if first.d_in != activation.encoded_dim(input_dim) {
            return Err(Error::Shape(format!(
                "first layer takes {} inputs, encoding produces {}",
                first.d_in,
                activation.encoded_dim(input_dim)
            )));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].d_out != pair[1].d_in {
                return Err(Error::Shape(format!(
                    "layer {i} outputs {} but layer {} takes {}",
                    pair[0].d_out,
                    i + 1,
                    pair[1].d_in
                )));
            }
        }
        if layers.iter().flat_map(|l| l.weight.iter().chain(l.bias.iter().flatten())).any(|v| !v.is_finite()) {
            return Err(Error::Invalid("network parameters must be finite".into()));
        }
        Ok(Self {
            input_dim,
            activation,
            seed,
            layers,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.d_out)
    }

    pub fn activation(&self) -> ActivationKind {
        self.activation
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn precision(&self) -> Precision {
        T::PRECISION
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    /// Parameter blocks in layer order: weight, then bias when present.
    pub fn params(&self) -> Vec<&[T]> {
        let mut out = Vec::with_capacity(self.layers.len() * 2);
        for l in &self.layers {
            out.push(l.weight.as_slice());
            if let Some(b) = &l.bias {
                out.push(b.as_slice());
            }
        }
        out
    }

    pub fn params_mut(&mut self) -> Vec<&mut [T]> {
        let mut out = Vec::with_capacity(self.layers.len() * 2);
        for l in &mut self.layers {
            out.push(l.weight.as_mut_slice());
            if let Some(b) = &mut l.bias {
                out.push(b.as_mut_slice());
            }
        }
        out
    }

    fn check_coords(&self, coords: &[T]) -> Result<usize> {
        if !coords.len().is_multiple_of(self.input_dim) {
            return Err(Error::Shape(format!(
                "{} coordinate values is not a multiple of input dimension {}",
                coords.len(),
                self.input_dim
            )));
        }
        Ok(coords.len() / self.input_dim)
    }

    fn encode(&self, coords: &[T]) -> Vec<T> {
        match self.activation.encoding_frequencies() {
            Some(f) => positional_encoding(coords, f),
            None => coords.to_vec(),
        }
    }

    pub fn forward(&self, coords: &[T]) -> Result<Vec<T>> {
        Ok(self.forward_trace(coords)?.output)
    }

    /// Forward pass that keeps what [`Mlp::backward_trace`] needs.
    pub fn forward_trace(&self, coords: &[T]) -> Result<Trace<T>> {
        let rows = self.check_coords(coords)?;
        let input = self.encode(coords);
        let last = self.layers.len() - 1;
        let mut hidden = Vec::with_capacity(last);
        let mut derivs = Vec::with_capacity(last);
        let mut output = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            let x = if i == 0 { &input } else { &hidden[i - 1] };
            let mut z = vec![T::zero(); rows * layer.d_out];
            layer.affine(x, rows, &mut z);
            if i == last {
                output = z;
            } else {
                let mut d = vec![T::zero(); z.len()];
                self.activation.apply(&mut z, &mut d);
                hidden.push(z);
                derivs.push(d);
            }
        }
        Ok(Trace {
            rows,
            input,
            hidden,
            derivs,
            output,
        })
    }

    /// Gradient of `sum_r upstream[r] . f(x_r)` with respect to every parameter.
    pub fn backward_trace(&self, trace: &Trace<T>, upstream: &[T]) -> Result<Gradients<T>> {
        let rows = trace.rows;
        if upstream.len() != rows * self.output_dim() {
            return Err(Error::Shape(format!(
                "upstream gradient has {} entries, expected {}",
                upstream.len(),
                rows * self.output_dim()
            )));
        }
        let mut blocks: Vec<Vec<T>> = Vec::with_capacity(self.layers.len() * 2);
        let mut delta = upstream.to_vec();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let x = if i == 0 { &trace.input } else { &trace.hidden[i - 1] };
            if layer.bias.is_some() {
                let mut db = vec![T::zero(); layer.d_out];
                for row in delta.chunks_exact(layer.d_out) {
                    for (g, &d) in db.iter_mut().zip(row) {
                        *g = *g + d;
                    }
                }
                blocks.push(db);
            }
            // dW = delta^T x
            let mut dw = vec![T::zero(); layer.d_out * layer.d_in];
            T::gemm(
                layer.d_out,
                rows,
                layer.d_in,
                T::one(),
                &delta,
                1,
                layer.d_out,
                x,
                layer.d_in,
                1,
                T::zero(),
                &mut dw,
                layer.d_in,
                1,
            );
            blocks.push(dw);
            if i > 0 {
                let mut dx = vec![T::zero(); rows * layer.d_in];
                T::gemm(
                    rows,
                    layer.d_out,
                    layer.d_in,
                    T::one(),
                    &delta,
                    layer.d_out,
                    1,
                    &layer.weight,
                    layer.d_in,
                    1,
                    T::zero(),
                    &mut dx,
                    layer.d_in,
                    1,
                );
                for (g, &d) in dx.iter_mut().zip(&trace.derivs[i - 1]) {
                    *g = *g * d;
                }
                delta = dx;
            }
        }
        blocks.reverse();
        Ok(Gradients { blocks })
    }

    pub fn backward(&self, coords: &[T], upstream: &[T]) -> Result<Gradients<T>> {
        let trace = self.forward_trace(coords)?;
        self.backward_trace(&trace, upstream)
    }
}

/// Number of trainable scalars.
pub fn param_count<T: Real>(net: &Mlp<T>) -> usize {
    net.param_count()
}
