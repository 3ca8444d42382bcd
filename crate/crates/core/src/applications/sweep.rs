use serde::Serialize;

use crate::bounds::{format_sig3, relative_factor};
use crate::error::{Error, Result};
use crate::network::{Mlp, NetSpec};
use crate::signal::{decompose, epsilon, DigitalSignal};
use crate::training::{fit_model, BitMapping, TrainConfig};

/// Iterations-to-lossless for one plane width across seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub k: u32,
    pub epsilon: f64,
    /// `(2^{k+1} - 2)^{2d}` as a decimal string.
    pub relative_factor: String,
    pub relative_factor_3sf: String,
    pub seeds: Vec<u64>,
    /// `None` when the run hit the iteration cap.
    pub iterations: Vec<Option<usize>>,
    /// Median with capped runs counted as infinite.
    #[serde(with = "crate::metrics::float_or_string")]
    pub median: f64,
}

impl SweepRecord {
    pub fn all_capped(&self) -> bool {
        self.iterations.iter().all(Option::is_none)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub records: Vec<SweepRecord>,
    pub param_count: usize,
    /// Medians are nondecreasing in k, ignoring widths where every run capped.
    pub nondecreasing: bool,
}

/// Median of iteration counts, capped runs as `+inf`.
pub fn median_iterations(runs: &[Option<usize>]) -> f64 {
    let mut v: Vec<f64> = runs.iter().map(|r| r.map_or(f64::INFINITY, |i| i as f64)).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Whether the medians of the records that are not fully capped never decrease.
pub fn ordering_holds(records: &[SweepRecord]) -> bool {
    let medians: Vec<f64> = records.iter().filter(|r| !r.all_capped()).map(|r| r.median).collect();
    medians.windows(2).all(|w| w[0] <= w[1])
}

/// Fits `signal` once per (k, seed) with the same architecture and reports
/// iterations-to-lossless.
///
/// Every width shares one input layout (spatial axes plus a bit axis) so the
/// parameter count is identical across k; a single plane sits at bit
/// coordinate -1.
pub fn hypothesis_sweep(
    signal: &DigitalSignal,
    ks: &[u32],
    net_spec: &NetSpec,
    config: &TrainConfig,
    seeds: &[u64],
) -> Result<SweepResult> {
    if ks.is_empty() || seeds.is_empty() {
        return Err(Error::Invalid("sweep needs at least one k and one seed".into()));
    }
    let d = signal.shape().len();
    let mut records = Vec::with_capacity(ks.len());
    let mut param_count = 0;
    for &k in ks {
        decompose(signal, k)?;
        let mut iterations = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            let net: Mlp<f32> = net_spec.build(d + 1, signal.channels(), seed)?;
            param_count = net.param_count();
            let cfg = TrainConfig { seed, ..config.clone() };
            let mapping = BitMapping::contiguous((signal.bit_depth() / k) as usize);
            let (_, report) = fit_model(signal, k, Some(mapping), net, &cfg)?;
            iterations.push(report.iteration_at_lossless);
        }
        let factor = relative_factor(d as u32, k);
        records.push(SweepRecord {
            k,
            epsilon: epsilon(k)?,
            relative_factor: factor.to_string(),
            relative_factor_3sf: format_sig3(&factor),
            seeds: seeds.to_vec(),
            median: median_iterations(&iterations),
            iterations,
        });
    }
    Ok(SweepResult {
        nondecreasing: ordering_holds(&records),
        records,
        param_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::ActivationKind;
    use crate::training::LossKind;

    fn record(k: u32, iterations: Vec<Option<usize>>) -> SweepRecord {
        SweepRecord {
            k,
            epsilon: 0.0,
            relative_factor: String::new(),
            relative_factor_3sf: String::new(),
            seeds: vec![],
            median: median_iterations(&iterations),
            iterations,
        }
    }

    #[test]
    fn medians() {
        assert_eq!(median_iterations(&[Some(3), Some(1), Some(2)]), 2.0);
        assert_eq!(median_iterations(&[Some(4), Some(1), Some(2), Some(10)]), 3.0);
        assert_eq!(median_iterations(&[Some(4), None, None]), f64::INFINITY);
        assert_eq!(median_iterations(&[Some(4), None, Some(1)]), 4.0);
        assert_eq!(median_iterations(&[None, None]), f64::INFINITY);
    }

    #[test]
    fn ordering_verdicts() {
        assert!(ordering_holds(&[record(1, vec![Some(5)])]));
        assert!(ordering_holds(&[record(1, vec![Some(5)]), record(2, vec![Some(5)]), record(4, vec![Some(9)])]));
        assert!(!ordering_holds(&[record(1, vec![Some(5)]), record(2, vec![Some(4)])]));
        // a fully capped width is left out, a partly capped one counts as infinite
        assert!(ordering_holds(&[record(1, vec![Some(5)]), record(2, vec![None, None]), record(4, vec![Some(7)])]));
        assert!(!ordering_holds(&[record(1, vec![None, None, Some(1)]), record(2, vec![Some(7); 3])]));
    }

    #[test]
    fn sweep_is_reproducible_and_shape_constant() {
        let s: Vec<u32> = (0..36).map(|i| (i * 7 % 16) as u32).collect();
        let sig = DigitalSignal::mono(vec![6, 6], 4, s).unwrap();
        let spec = NetSpec::new(16, 1, ActivationKind::sine());
        let cfg = TrainConfig {
            loss: LossKind::Mse,
            learning_rate: 1e-3,
            max_iterations: 30,
            check_interval: 10,
            ..TrainConfig::default()
        };
        let a = hypothesis_sweep(&sig, &[1, 2, 4], &spec, &cfg, &[0, 1]).unwrap();
        let b = hypothesis_sweep(&sig, &[1, 2, 4], &spec, &cfg, &[0, 1]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.param_count, 3 * 16 + 16 + 16 + 1);
        assert_eq!(a.records[0].relative_factor, "16");
        assert_eq!(a.records[2].relative_factor, "810000");
        assert!(hypothesis_sweep(&sig, &[3], &spec, &cfg, &[0]).is_err());
    }
}
