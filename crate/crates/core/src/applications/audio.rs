use crate::error::{Error, Result};
use crate::network::{Mlp, NetSpec};
use crate::signal::fp32_bits_signal;
use crate::training::{fit, verify_lossless, TrainConfig, TrainReport};

#[derive(Debug, Clone)]
pub struct AudioFit {
    pub net: Mlp<f32>,
    pub report: TrainReport,
    pub reconstructed: Vec<f32>,
    /// Every reconstructed sample has the source's 32-bit pattern.
    pub exact: bool,
}

/// Fits the 32 bit-planes of an FP32 clip over (time, bit) coordinates.
pub fn fit_audio_fp32(samples: &[f32], net_spec: &NetSpec, config: &TrainConfig) -> Result<AudioFit> {
    if samples.is_empty() {
        return Err(Error::Invalid("audio clip is empty".into()));
    }
    let signal = fp32_bits_signal(samples)?;
    let net = net_spec.build(2, 1, config.seed)?;
    let (net, report) = fit(&signal, 1, net, config)?;
    let check = verify_lossless(&net, &signal, 1, config.loss)?;
    let reconstructed: Vec<f32> = check.reconstructed.samples().iter().map(|&b| f32::from_bits(b)).collect();
    let exact = reconstructed.iter().zip(samples).all(|(a, b)| a.to_bits() == b.to_bits());
    Ok(AudioFit {
        net,
        report,
        reconstructed,
        exact,
    })
}
