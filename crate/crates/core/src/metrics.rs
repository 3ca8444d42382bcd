//! Reconstruction quality on the integer sample scale.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{max_level, DigitalSignal};

/// All metrics for one prediction against its ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    /// Decibels; `f64::INFINITY` for identical signals.
    #[serde(with = "float_or_string")]
    pub psnr: f64,
    pub rmse: f64,
    /// `None` when the grid is too small for the SSIM window or not 2-D.
    pub ssim: Option<f64>,
    pub ber: f64,
    pub per_plane_ber: Vec<f64>,
}

impl MetricReport {
    pub fn compute(truth: &DigitalSignal, pred: &DigitalSignal) -> Result<Self> {
        Ok(Self {
            psnr: psnr(truth, pred)?,
            rmse: rmse(truth, pred)?,
            ssim: ssim(truth, pred).ok(),
            ber: ber(truth, pred)?,
            per_plane_ber: per_plane_ber(truth, pred)?,
        })
    }
}

/// Serializes non-finite floats as strings so JSON stays valid.
pub(crate) mod float_or_string {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&v.to_string())
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Fraction of differing bits over all samples and all `n` bit positions.
pub fn ber(a: &DigitalSignal, b: &DigitalSignal) -> Result<f64> {
    a.check_same_layout(b)?;
    let diff: u64 = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(x, y)| (x ^ y).count_ones() as u64)
        .sum();
    Ok(diff as f64 / (a.bit_depth() as f64 * a.len() as f64))
}

/// BER restricted to each bit position, least significant first.
pub fn per_plane_ber(a: &DigitalSignal, b: &DigitalSignal) -> Result<Vec<f64>> {
    a.check_same_layout(b)?;
    let n = a.bit_depth() as usize;
    let mut counts = vec![0u64; n];
    for (x, y) in a.samples().iter().zip(b.samples()) {
        let mut d = x ^ y;
        while d != 0 {
            counts[d.trailing_zeros() as usize] += 1;
            d &= d - 1;
        }
    }
    let total = a.len() as f64;
    Ok(counts.into_iter().map(|c| c as f64 / total).collect())
}

/// Mean squared error on the integer scale, all channels jointly.
pub fn mse(a: &DigitalSignal, b: &DigitalSignal) -> Result<f64> {
    a.check_same_layout(b)?;
    let sum: f64 = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    Ok(sum / a.len() as f64)
}

pub fn rmse(a: &DigitalSignal, b: &DigitalSignal) -> Result<f64> {
    Ok(mse(a, b)?.sqrt())
}

/// PSNR with peak `2^n - 1`; infinite for identical inputs.
pub fn psnr(a: &DigitalSignal, b: &DigitalSignal) -> Result<f64> {
    let m = mse(a, b)?;
    if m == 0.0 {
        return Ok(f64::INFINITY);
    }
    let peak = max_level(a.bit_depth()) as f64;
    Ok(10.0 * (peak * peak / m).log10())
}

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

fn gaussian_window() -> Vec<f64> {
    let c = (SSIM_WINDOW / 2) as f64;
    let w: Vec<f64> = (0..SSIM_WINDOW)
        .map(|i| (-((i as f64 - c).powi(2)) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp())
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Separable Gaussian filter over the valid region.
fn filter(img: &[f64], h: usize, w: usize, win: &[f64]) -> (Vec<f64>, usize, usize) {
    let k = win.len();
    let ow = w - k + 1;
    let oh = h - k + 1;
    let mut tmp = vec![0.0; h * ow];
    for y in 0..h {
        for x in 0..ow {
            tmp[y * ow + x] = (0..k).map(|i| win[i] * img[y * w + x + i]).sum();
        }
    }
    let mut out = vec![0.0; oh * ow];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = (0..k).map(|i| win[i] * tmp[(y + i) * ow + x]).sum();
        }
    }
    (out, oh, ow)
}

/// Mean SSIM with an 11x11 Gaussian window (sigma 1.5), averaged over channels.
pub fn ssim(a: &DigitalSignal, b: &DigitalSignal) -> Result<f64> {
    a.check_same_layout(b)?;
    let shape = a.shape();
    if shape.len() != 2 {
        return Err(Error::Shape(format!("SSIM needs a 2-D grid, got {shape:?}")));
    }
    let (h, w) = (shape[0], shape[1]);
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(Error::Shape(format!("SSIM needs extents of at least {SSIM_WINDOW}, got {h}x{w}")));
    }
    let peak = max_level(a.bit_depth()) as f64;
    let c1 = (SSIM_K1 * peak).powi(2);
    let c2 = (SSIM_K2 * peak).powi(2);
    let win = gaussian_window();
    let ch = a.channels();
    let mut total = 0.0;
    for c in 0..ch {
        let x: Vec<f64> = a.samples().iter().skip(c).step_by(ch).map(|&v| v as f64).collect();
        let y: Vec<f64> = b.samples().iter().skip(c).step_by(ch).map(|&v| v as f64).collect();
        let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
        let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
        let xy: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p * q).collect();
        let (mx, _, _) = filter(&x, h, w, &win);
        let (my, _, _) = filter(&y, h, w, &win);
        let (sxx, _, _) = filter(&xx, h, w, &win);
        let (syy, _, _) = filter(&yy, h, w, &win);
        let (sxy, _, _) = filter(&xy, h, w, &win);
        let mut acc = 0.0;
        for i in 0..mx.len() {
            let (ux, uy) = (mx[i], my[i]);
            let vx = sxx[i] - ux * ux;
            let vy = syy[i] - uy * uy;
            let cov = sxy[i] - ux * uy;
            acc += ((2.0 * ux * uy + c1) * (2.0 * cov + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2));
        }
        total += acc / mx.len() as f64;
    }
    Ok(total / ch as f64)
}
