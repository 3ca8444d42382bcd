//! Ternary-weight layers trained with a straight-through estimator.
//!
//! Each layer keeps full-precision shadow weights `W`. The forward pass uses
//! `beta * W~` with `beta = ||W||_1 / (d_in d_out)` and
//! `W~ = clamp(round(W / beta), -1, 1)`, and an 8-bit absmax quantization of
//! its per-sample layer-normalized input. Gradients pass through both
//! quantizers unchanged.

use crate::error::{Error, Result};
use crate::network::activation::{gelu, positional_encoding};
use crate::network::{rng_from_seed, Gradients};
use crate::real::{lit, Real};
use rand::Rng;

const TINY: f64 = 1e-8;
const LN_EPS: f64 = 1e-5;
/// Largest magnitude of the signed 8-bit activation grid.
pub const ACT_LEVELS: f64 = 127.0;

#[derive(Debug, Clone, PartialEq)]
pub struct TernaryLayer<T> {
    pub d_in: usize,
    pub d_out: usize,
    pub shadow: Vec<T>,
    pub quantized: Vec<i8>,
    pub beta: T,
    /// Layer-normalize each input row before activation quantization.
    pub normalize_input: bool,
}

impl<T: Real> TernaryLayer<T> {
    pub fn new(d_in: usize, d_out: usize, shadow: Vec<T>, normalize_input: bool) -> Result<Self> {
        if d_in == 0 || d_out == 0 || shadow.len() != d_in * d_out {
            return Err(Error::Shape(format!(
                "ternary layer {d_out}x{d_in} with {} shadow weights",
                shadow.len()
            )));
        }
        let mut layer = Self {
            d_in,
            d_out,
            shadow,
            quantized: vec![0; d_in * d_out],
            beta: T::zero(),
            normalize_input,
        };
        ternary_quantize(&mut layer);
        Ok(layer)
    }

    /// Rebuilds a layer from its stored ternary view; shadow weights become `beta * W~`.
    pub fn from_quantized(d_in: usize, d_out: usize, quantized: Vec<i8>, beta: T, normalize_input: bool) -> Result<Self> {
        if quantized.len() != d_in * d_out || quantized.iter().any(|q| !(-1..=1).contains(q)) {
            return Err(Error::Shape("ternary weights must be a d_out x d_in matrix over {-1,0,1}".into()));
        }
        let shadow = quantized.iter().map(|&q| beta * lit(q as f64)).collect();
        Ok(Self {
            d_in,
            d_out,
            shadow,
            quantized,
            beta,
            normalize_input,
        })
    }

    fn effective_weights(&self) -> Vec<T> {
        self.quantized.iter().map(|&q| self.beta * lit(q as f64)).collect()
    }
}

/// Recomputes `beta` and the ternary view from the shadow weights.
pub fn ternary_quantize<T: Real>(layer: &mut TernaryLayer<T>) {
    let n = layer.shadow.len();
    let l1 = layer.shadow.iter().fold(T::zero(), |acc, w| acc + w.abs());
    layer.beta = l1 / lit(n as f64);
    let denom = layer.beta + lit(TINY);
    for (q, &w) in layer.quantized.iter_mut().zip(&layer.shadow) {
        let r = (w / denom).round().max(-T::one()).min(T::one());
        *q = r.to_i8().unwrap_or(0);
    }
}

/// Quantized input rows and what the backward pass needs.
struct ActQuant<T> {
    /// `gamma * x~` per row.
    values: Vec<T>,
    /// Layer-normalized rows (or raw rows when normalization is off).
    normed: Vec<T>,
    /// Per-row reciprocal standard deviation (1 when not normalizing).
    inv_std: Vec<T>,
}

fn quantize_activations<T: Real>(x: &[T], width: usize, normalize: bool) -> ActQuant<T> {
    let rows = x.len() / width;
    let mut normed = x.to_vec();
    let mut inv_std = vec![T::one(); rows];
    let mut values = vec![T::zero(); x.len()];
    let levels: T = lit(ACT_LEVELS);
    for r in 0..rows {
        let row = &mut normed[r * width..(r + 1) * width];
        if normalize {
            let n: T = lit(width as f64);
            let mean = row.iter().fold(T::zero(), |a, &v| a + v) / n;
            let var = row.iter().fold(T::zero(), |a, &v| a + (v - mean) * (v - mean)) / n;
            let is = T::one() / (var + lit(LN_EPS)).sqrt();
            row.iter_mut().for_each(|v| *v = (*v - mean) * is);
            inv_std[r] = is;
        }
        let gamma = row.iter().fold(T::zero(), |a, v| a.max(v.abs()));
        if gamma > T::zero() {
            let out = &mut values[r * width..(r + 1) * width];
            for (o, &u) in out.iter_mut().zip(row.iter()) {
                let q = (u * levels / gamma).round().max(-levels).min(levels);
                *o = gamma * q / levels;
            }
        }
    }
    ActQuant {
        values,
        normed,
        inv_std,
    }
}

/// `y = beta * gamma * W~ x~` for a batch of row vectors.
pub fn ternary_forward<T: Real>(layer: &TernaryLayer<T>, x: &[T]) -> Result<Vec<T>> {
    if !x.len().is_multiple_of(layer.d_in) {
        return Err(Error::Shape(format!("input length {} not a multiple of {}", x.len(), layer.d_in)));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("ternary layer input must be finite".into()));
    }
    let rows = x.len() / layer.d_in;
    let aq = quantize_activations(x, layer.d_in, layer.normalize_input);
    Ok(matmul_t(&aq.values, rows, &layer.effective_weights(), layer.d_in, layer.d_out))
}

/// `x W^T` for `x: rows x d_in`, `W: d_out x d_in`.
fn matmul_t<T: Real>(x: &[T], rows: usize, w: &[T], d_in: usize, d_out: usize) -> Vec<T> {
    let mut out = vec![T::zero(); rows * d_out];
    T::gemm(rows, d_in, d_out, T::one(), x, d_in, 1, w, 1, d_in, T::zero(), &mut out, d_out, 1);
    out
}

/// Raw coordinates followed by their sinusoidal encoding.
///
/// The raw values are kept because `sin`/`cos(2^j pi x)` coincide at
/// `x = -1` and `x = 1`.
fn encoded_width(input_dim: usize, encoding: usize) -> usize {
    input_dim * (1 + 2 * encoding)
}

/// A bias-free stack of ternary layers with GELU between them.
#[derive(Debug, Clone, PartialEq)]
pub struct TernaryMlp<T> {
    input_dim: usize,
    /// Positional-encoding octaves appended to the raw coordinates (0 = none).
    encoding: usize,
    seed: u64,
    layers: Vec<TernaryLayer<T>>,
}

struct TernaryTrace<T> {
    rows: usize,
    inputs: Vec<ActQuant<T>>,
    derivs: Vec<Vec<T>>,
    output: Vec<T>,
}

impl<T: Real> TernaryMlp<T> {
    /// Uniform `sqrt(6/d_in)` initialization of the shadow weights.
    ///
    /// The first layer sees coordinates without layer normalization; every
    /// later layer normalizes its input.
    pub fn init(input_dim: usize, encoding: usize, hidden_dim: usize, depth: usize, output_dim: usize, seed: u64) -> Result<Self> {
        if input_dim == 0 || hidden_dim == 0 || depth == 0 || output_dim == 0 {
            return Err(Error::Invalid("ternary network dimensions must be positive".into()));
        }
        let mut rng = rng_from_seed(seed);
        let first = encoded_width(input_dim, encoding);
        let mut dims = vec![first];
        dims.extend(std::iter::repeat_n(hidden_dim, depth));
        dims.push(output_dim);
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let bound = (6.0 / w[0] as f64).sqrt();
                let shadow = (0..w[0] * w[1]).map(|_| lit::<T>(rng.gen_range(-bound..=bound))).collect();
                TernaryLayer::new(w[0], w[1], shadow, i > 0)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            input_dim,
            encoding,
            seed,
            layers,
        })
    }

    pub fn from_layers(input_dim: usize, encoding: usize, seed: u64, layers: Vec<TernaryLayer<T>>) -> Result<Self> {
        let first = encoded_width(input_dim, encoding);
        if layers.is_empty() || layers[0].d_in != first {
            return Err(Error::Shape("ternary layer stack does not match the input encoding".into()));
        }
        if layers.windows(2).any(|p| p[0].d_out != p[1].d_in) {
            return Err(Error::Shape("ternary layer dimensions do not chain".into()));
        }
        Ok(Self {
            input_dim,
            encoding,
            seed,
            layers,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn encoding(&self) -> usize {
        self.encoding
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.d_out)
    }

    pub fn layers(&self) -> &[TernaryLayer<T>] {
        &self.layers
    }

    /// Weight count; there are no biases.
    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.d_in * l.d_out).sum()
    }

    pub fn shadow_params_mut(&mut self) -> Vec<&mut [T]> {
        self.layers.iter_mut().map(|l| l.shadow.as_mut_slice()).collect()
    }

    pub fn shadow_params(&self) -> Vec<&[T]> {
        self.layers.iter().map(|l| l.shadow.as_slice()).collect()
    }

    /// Refreshes every layer's ternary view after a shadow-weight update.
    pub fn requantize(&mut self) {
        self.layers.iter_mut().for_each(ternary_quantize);
    }

    fn encode(&self, coords: &[T]) -> Result<Vec<T>> {
        if !coords.len().is_multiple_of(self.input_dim) {
            return Err(Error::Shape(format!("coordinates not a multiple of {}", self.input_dim)));
        }
        if self.encoding == 0 {
            return Ok(coords.to_vec());
        }
        let d = self.input_dim;
        let pe = positional_encoding(coords, self.encoding);
        let width = 2 * self.encoding * d;
        let mut out = Vec::with_capacity(coords.len() / d * encoded_width(d, self.encoding));
        for (x, e) in coords.chunks_exact(d).zip(pe.chunks_exact(width)) {
            out.extend_from_slice(x);
            out.extend_from_slice(e);
        }
        Ok(out)
    }

    fn trace(&self, coords: &[T]) -> Result<TernaryTrace<T>> {
        let mut h = self.encode(coords)?;
        let rows = coords.len() / self.input_dim;
        let last = self.layers.len() - 1;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut derivs = Vec::with_capacity(last);
        for (i, layer) in self.layers.iter().enumerate() {
            let aq = quantize_activations(&h, layer.d_in, layer.normalize_input);
            let mut z = matmul_t(&aq.values, rows, &layer.effective_weights(), layer.d_in, layer.d_out);
            inputs.push(aq);
            if i < last {
                let mut d = vec![T::zero(); z.len()];
                for (v, g) in z.iter_mut().zip(d.iter_mut()) {
                    let (a, da) = gelu(*v);
                    *v = a;
                    *g = da;
                }
                derivs.push(d);
            }
            h = z;
        }
        Ok(TernaryTrace {
            rows,
            inputs,
            derivs,
            output: h,
        })
    }

    pub fn forward(&self, coords: &[T]) -> Result<Vec<T>> {
        Ok(self.trace(coords)?.output)
    }

    /// Forward pass plus straight-through gradients with respect to the shadow weights.
    pub fn forward_backward<F>(&self, coords: &[T], upstream: F) -> Result<(Vec<T>, Gradients<T>)>
    where
        F: FnOnce(&[T]) -> Vec<T>,
    {
        let tr = self.trace(coords)?;
        let rows = tr.rows;
        let mut delta = upstream(&tr.output);
        let mut blocks = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let aq = &tr.inputs[i];
            let mut dw = vec![T::zero(); layer.d_out * layer.d_in];
            T::gemm(
                layer.d_out,
                rows,
                layer.d_in,
                T::one(),
                &delta,
                1,
                layer.d_out,
                &aq.values,
                layer.d_in,
                1,
                T::zero(),
                &mut dw,
                layer.d_in,
                1,
            );
            blocks.push(dw);
            if i == 0 {
                break;
            }
            let weights = layer.effective_weights();
            let mut du = vec![T::zero(); rows * layer.d_in];
            T::gemm(rows, layer.d_out, layer.d_in, T::one(), &delta, layer.d_out, 1, &weights, layer.d_in, 1, T::zero(), &mut du, layer.d_in, 1);
            if layer.normalize_input {
                layer_norm_backward(&mut du, &aq.normed, &aq.inv_std, layer.d_in);
            }
            for (g, &d) in du.iter_mut().zip(&tr.derivs[i - 1]) {
                *g = *g * d;
            }
            delta = du;
        }
        blocks.reverse();
        Ok((tr.output, Gradients { blocks }))
    }
}

/// In place: `du` (gradient w.r.t. normalized rows) becomes the gradient w.r.t. the raw rows.
fn layer_norm_backward<T: Real>(du: &mut [T], normed: &[T], inv_std: &[T], width: usize) {
    let n: T = lit(width as f64);
    for ((g, u), &is) in du.chunks_exact_mut(width).zip(normed.chunks_exact(width)).zip(inv_std) {
        let mean_g = g.iter().fold(T::zero(), |a, &v| a + v) / n;
        let mean_gu = g.iter().zip(u).fold(T::zero(), |a, (&gv, &uv)| a + gv * uv) / n;
        for (gv, &uv) in g.iter_mut().zip(u) {
            *gv = is * (*gv - mean_g - uv * mean_gu);
        }
    }
}
