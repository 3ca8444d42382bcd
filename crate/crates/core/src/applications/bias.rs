use serde::Serialize;

use crate::error::{Error, Result};
use crate::training::TrainReport;

/// Per-plane BER over training.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasProfile {
    pub iterations: Vec<usize>,
    /// `ber[c][i]`: BER of bit-plane `i` (LSB first) at checkpoint `c`.
    pub ber: Vec<Vec<f64>>,
    /// Spearman correlation between distance from the MSB and plane BER per
    /// checkpoint: positive when less significant planes are worse. `None`
    /// when undefined (all planes equal).
    pub lsb_correlation: Vec<Option<f64>>,
}

impl BiasProfile {
    /// Index of the checkpoint whose iteration is closest to `iteration`
    /// (earlier one on ties).
    pub fn nearest(&self, iteration: usize) -> Option<usize> {
        (0..self.iterations.len()).min_by_key(|&c| self.iterations[c].abs_diff(iteration))
    }
}

/// Ranks starting at 1; ties share their average rank.
fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Pearson correlation of the ranks; `None` if either side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        None
    } else {
        Some(sxy / (sxx * syy).sqrt())
    }
}

pub fn bias_profile(report: &TrainReport) -> Result<BiasProfile> {
    let n = report.bit_depth as usize;
    if report.records.is_empty() {
        return Err(Error::Invalid("report has no checkpoints".into()));
    }
    if report.records.iter().any(|r| r.per_plane_ber.len() != n) {
        return Err(Error::Invalid(format!("report lacks {n}-plane BER traces")));
    }
    let lsb_rank: Vec<f64> = (0..n).map(|i| (n - 1 - i) as f64).collect();
    Ok(BiasProfile {
        iterations: report.records.iter().map(|r| r.iteration).collect(),
        ber: report.records.iter().map(|r| r.per_plane_ber.clone()).collect(),
        lsb_correlation: report.records.iter().map(|r| spearman(&lsb_rank, &r.per_plane_ber)).collect(),
    })
}
