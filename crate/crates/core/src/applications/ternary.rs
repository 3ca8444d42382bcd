use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::ternary_payload_len;
use crate::network::ternary::TernaryMlp;
use crate::network::{ActivationKind, Layer, Mlp};
use crate::signal::DigitalSignal;
use crate::training::{fit_model, TrainConfig, TrainReport};

/// Architecture of a ternary coordinate network (GELU, no biases).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TernarySpec {
    pub hidden_dim: usize,
    pub depth: usize,
    /// Positional-encoding octaves on the input (0 = raw coordinates).
    pub encoding: usize,
}

/// Weight storage in bytes for one network shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelSize {
    /// 2-bit packing plus one `f32` scale per layer.
    pub ternary_packed: usize,
    /// `log2(3)` bits per weight plus the scales.
    pub ternary_entropy: f64,
    /// The same weights as `f32`.
    pub binary32: usize,
}

impl ModelSize {
    pub fn of(net: &TernaryMlp<f32>) -> Self {
        let w = net.param_count();
        let layers = net.layers().len();
        Self {
            ternary_packed: ternary_payload_len(w, layers),
            ternary_entropy: w as f64 * 3f64.log2() / 8.0 + 4.0 * layers as f64,
            binary32: 4 * w,
        }
    }
}

/// A bias-free Binary32 network with the same layer shapes, taking the
/// encoded features as its input.
pub fn dense_equivalent(net: &TernaryMlp<f32>) -> Result<Mlp<f32>> {
    let layers = net
        .layers()
        .iter()
        .map(|l| Layer::new(l.d_in, l.d_out, l.shadow.clone(), None))
        .collect::<Result<Vec<_>>>()?;
    Mlp::from_layers(layers[0].d_in, ActivationKind::Gelu, net.seed(), layers)
}

#[derive(Debug, Clone)]
pub struct TernaryFit {
    pub net: TernaryMlp<f32>,
    pub report: TrainReport,
    pub size: ModelSize,
}

/// Fits one binary plane with a ternary-weight network.
pub fn fit_ternary(plane: &DigitalSignal, spec: &TernarySpec, config: &TrainConfig) -> Result<TernaryFit> {
    if plane.bit_depth() != 1 {
        return Err(Error::Invalid(format!("ternary fit expects a binary plane, got {} bits", plane.bit_depth())));
    }
    let net = TernaryMlp::init(plane.shape().len(), spec.encoding, spec.hidden_dim, spec.depth, plane.channels(), config.seed)?;
    let (net, report) = fit_model(plane, 1, None, net, config)?;
    Ok(TernaryFit {
        size: ModelSize::of(&net),
        net,
        report,
    })
}
