use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::MetricReport;
use crate::network::{Mlp, NetSpec};
use crate::signal::DigitalSignal;
use crate::training::{fit_model, predict_planes, BitMapping, TrainConfig, TrainReport};

const DEPTH: u32 = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionResult {
    #[serde(skip)]
    pub predicted: DigitalSignal,
    pub metrics: MetricReport,
    pub zero_padding: MetricReport,
    pub bit_replication: MetricReport,
    /// The prediction's top planes equal the training planes.
    pub msb_exact: bool,
    pub report: TrainReport,
}

/// Keep the top `m` bits of each 16-bit sample as an `m`-bit signal.
pub fn truncate_to_msbs(signal: &DigitalSignal, m: u32) -> Result<DigitalSignal> {
    let shift = signal.bit_depth() - m;
    DigitalSignal::new(
        signal.shape().to_vec(),
        signal.channels(),
        m,
        signal.samples().iter().map(|&v| v >> shift).collect(),
    )
}

/// `m`-bit samples shifted up to 16 bits with zero LSBs.
pub fn zero_padding(msbs: &DigitalSignal) -> Result<DigitalSignal> {
    let shift = DEPTH - msbs.bit_depth();
    DigitalSignal::new(msbs.shape().to_vec(), msbs.channels(), DEPTH, msbs.samples().iter().map(|&v| v << shift).collect())
}

/// `m`-bit samples with their bit pattern repeated down into the LSBs.
pub fn bit_replication(msbs: &DigitalSignal) -> Result<DigitalSignal> {
    let m = msbs.bit_depth();
    let replicate = |v: u32| {
        let mut out = 0u32;
        let mut filled = 0;
        while filled < DEPTH {
            let take = m.min(DEPTH - filled);
            out |= (v >> (m - take)) << (DEPTH - filled - take);
            filled += take;
        }
        out
    };
    DigitalSignal::new(msbs.shape().to_vec(), msbs.channels(), DEPTH, msbs.samples().iter().map(|&v| replicate(v)).collect())
}

fn check(signal16: &DigitalSignal, m_train: u32) -> Result<()> {
    if signal16.bit_depth() != DEPTH {
        return Err(Error::Invalid(format!("bit-depth expansion needs a 16-bit signal, got {}", signal16.bit_depth())));
    }
    if !(1..DEPTH).contains(&m_train) {
        return Err(Error::Invalid(format!("training planes must be in 1..16, got {m_train}")));
    }
    Ok(())
}

/// Fit the `m_train` most significant bit-planes on the full 16-plane bit
/// coordinate scale, then read the missing planes off unseen bit coordinates.
pub fn expand_bit_depth(
    signal16: &DigitalSignal,
    m_train: u32,
    net_spec: &NetSpec,
    config: &TrainConfig,
) -> Result<(Mlp<f32>, ExpansionResult)> {
    check(signal16, m_train)?;
    let msbs = truncate_to_msbs(signal16, m_train)?;
    let offset = (DEPTH - m_train) as usize;
    let mapping = BitMapping {
        offset,
        n_map: DEPTH as usize,
    };
    let net: Mlp<f32> = net_spec.build(signal16.shape().len() + 1, signal16.channels(), config.seed)?;
    let (net, report) = fit_model(&msbs, 1, Some(mapping), net, config)?;
    let planes: Vec<usize> = (0..DEPTH as usize).collect();
    let bits = predict_planes(&net, signal16.shape(), &planes, DEPTH as usize, 1, config.loss)?;
    let mut samples = vec![0u32; signal16.len()];
    for (i, plane) in bits.iter().enumerate() {
        for (s, &b) in samples.iter_mut().zip(plane) {
            *s |= (b & 1) << i;
        }
    }
    let predicted = DigitalSignal::new(signal16.shape().to_vec(), signal16.channels(), DEPTH, samples)?;
    let msb_exact = truncate_to_msbs(&predicted, m_train)? == msbs;
    Ok((
        net,
        ExpansionResult {
            metrics: MetricReport::compute(signal16, &predicted)?,
            zero_padding: MetricReport::compute(signal16, &zero_padding(&msbs)?)?,
            bit_replication: MetricReport::compute(signal16, &bit_replication(&msbs)?)?,
            predicted,
            msb_exact,
            report,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::ActivationKind;

    fn sig(samples: Vec<u32>) -> DigitalSignal {
        DigitalSignal::mono(vec![samples.len()], 16, samples).unwrap()
    }

    #[test]
    fn baselines() {
        let m = truncate_to_msbs(&sig(vec![0xabcd, 0xffff, 0x0000]), 8).unwrap();
        assert_eq!(m.samples(), &[0xab, 0xff, 0x00]);
        assert_eq!(zero_padding(&m).unwrap().samples(), &[0xab00, 0xff00, 0]);
        assert_eq!(bit_replication(&m).unwrap().samples(), &[0xabab, 0xffff, 0]);
        let m5 = truncate_to_msbs(&sig(vec![0b1011_0000_0000_0000]), 5).unwrap();
        assert_eq!(m5.samples(), &[0b10110]);
        // 10110 10110 10110 1
        assert_eq!(bit_replication(&m5).unwrap().samples(), &[0b1011_0101_1010_1101]);
    }

    #[test]
    fn rejects_bad_requests() {
        let spec = NetSpec::new(8, 1, ActivationKind::sine());
        let cfg = TrainConfig::default();
        assert!(expand_bit_depth(&sig(vec![1, 2]), 16, &spec, &cfg).is_err());
        assert!(expand_bit_depth(&sig(vec![1, 2]), 0, &spec, &cfg).is_err());
        let eight = DigitalSignal::mono(vec![2], 8, vec![1, 2]).unwrap();
        assert!(expand_bit_depth(&eight, 4, &spec, &cfg).is_err());
    }

    #[test]
    fn zero_lsbs_make_zero_padding_exact() {
        let s: Vec<u32> = (0..64).map(|i| ((i * 37 % 256) as u32) << 8).collect();
        let signal = DigitalSignal::mono(vec![8, 8], 16, s).unwrap();
        let spec = NetSpec::new(16, 1, ActivationKind::sine());
        let cfg = TrainConfig {
            max_iterations: 20,
            check_interval: 10,
            learning_rate: 1e-3,
            ..TrainConfig::default()
        };
        let (_, r) = expand_bit_depth(&signal, 8, &spec, &cfg).unwrap();
        assert_eq!(r.zero_padding.psnr, f64::INFINITY);
        assert!(r.metrics.psnr.is_finite() || r.msb_exact);
        assert_eq!(r.predicted.bit_depth(), 16);
    }
}
