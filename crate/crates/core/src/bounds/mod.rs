//! Explicit parameter bounds for ε-accurate fits and the ReLU constructions
//! behind them.

mod relu_net;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;

pub use relu_net::{build_l1_net, build_max_net, build_maxconv_net, ReluNet};

use crate::error::{Error, Result};
use crate::signal::{max_level, DigitalSignal};

/// Inputs to the bound: dimension `d`, bit depth `n`, L1 Lipschitz
/// constant and the per-axis domain `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundQuery {
    pub d: u32,
    pub n: u32,
    pub lipschitz: f64,
    pub a: f64,
    pub b: f64,
}

impl BoundQuery {
    pub fn new(d: u32, n: u32, lipschitz: f64, a: f64, b: f64) -> Result<Self> {
        let q = Self { d, n, lipschitz, a, b };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.n == 0 {
            return Err(Error::Invalid("dimension and bit depth must be at least 1".into()));
        }
        if !(self.lipschitz >= 0.0 && self.lipschitz.is_finite()) {
            return Err(Error::Invalid(format!("Lipschitz constant must be finite and >= 0, got {}", self.lipschitz)));
        }
        if !(self.a <= self.b) || !self.a.is_finite() || !self.b.is_finite() {
            return Err(Error::Invalid(format!("domain [{}, {}] is not an interval", self.a, self.b)));
        }
        Ok(())
    }
}

/// `9 (3d max{L(b-a), 1})^{2d} d^2`.
pub fn coefficient(q: &BoundQuery) -> f64 {
    let d = q.d as f64;
    let spread = (q.lipschitz * (q.b - q.a)).max(1.0);
    9.0 * (3.0 * d * spread).powf(2.0 * d) * d * d
}

/// `(2^{n+1} - 2)^{2d}`, exactly.
pub fn relative_factor(d: u32, n: u32) -> BigUint {
    let base = (BigUint::from(1u8) << (n as usize + 1)) - BigUint::from(2u8);
    base.pow(2 * d)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpperBound {
    /// Bound in units of the coefficient.
    #[serde(serialize_with = "serialize_big")]
    pub relative: BigUint,
    pub coefficient: f64,
    /// Coefficient times the relative factor in floating point; `None` when
    /// the product overflows `f64` (use `relative` and `coefficient`).
    pub absolute: Option<f64>,
}

fn serialize_big<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

impl UpperBound {
    pub fn is_saturated(&self) -> bool {
        self.absolute.is_none()
    }
}

pub fn upper_bound(q: &BoundQuery) -> Result<UpperBound> {
    q.validate()?;
    let relative = relative_factor(q.d, q.n);
    let c = coefficient(q);
    let absolute = relative.to_f64().map(|r| r * c).filter(|v| v.is_finite());
    Ok(UpperBound {
        relative,
        coefficient: c,
        absolute,
    })
}

/// Three significant figures with SI suffixes (`16`, `1.30K`, `67.7G`);
/// scientific notation past tera.
pub fn format_sig3(v: &BigUint) -> String {
    let digits = v.to_string();
    if digits.len() <= 3 {
        return digits;
    }
    let bytes = digits.as_bytes();
    let mut lead: u64 = digits[..3].parse().expect("decimal digits");
    let mut exp = digits.len() - 1;
    if bytes[3] >= b'5' {
        lead += 1;
        if lead == 1000 {
            lead = 100;
            exp += 1;
        }
    }
    let lead = lead.to_string();
    let group = exp / 3;
    if group > 4 {
        return format!("{}.{}e{}", &lead[..1], &lead[1..], exp);
    }
    let suffix = ["", "K", "M", "G", "T"][group];
    let int_digits = exp % 3 + 1;
    if int_digits == 3 {
        format!("{lead}{suffix}")
    } else {
        format!("{}.{}{suffix}", &lead[..int_digits], &lead[int_digits..])
    }
}

/// Largest normalized change between axis-adjacent samples per unit of
/// coordinate, each axis spanning `[a, b]`.
pub fn lipschitz_estimate(signal: &DigitalSignal, a: f64, b: f64) -> Result<f64> {
    let shape = signal.shape();
    if !shape.iter().any(|&e| e >= 2) {
        return Err(Error::Shape("Lipschitz estimate needs at least 2 samples along some axis".into()));
    }
    let scale = max_level(signal.bit_depth()) as f64;
    let ch = signal.channels();
    let s = signal.samples();
    let mut best: f64 = 0.0;
    let mut stride = ch;
    for axis in (0..shape.len()).rev() {
        let extent = shape[axis];
        if extent >= 2 {
            let step = (b - a) / (extent - 1) as f64;
            for i in 0..s.len() {
                if (i / stride) % extent + 1 < extent {
                    let dv = (s[i + stride] as f64 - s[i] as f64).abs() / scale;
                    best = best.max(dv / step);
                }
            }
        }
        stride *= extent;
    }
    Ok(best)
}

/// Sup over a probe lattice of `probes_per_axis` points per axis on
/// `[a, b]^d` of the L1 distance to the nearest point.
pub fn covering_radius(points: &[Vec<f64>], a: f64, b: f64, probes_per_axis: usize) -> Result<f64> {
    let d = match points.first() {
        Some(p) => p.len(),
        None => return Err(Error::Invalid("covering radius needs at least one point".into())),
    };
    if d == 0 || points.iter().any(|p| p.len() != d) {
        return Err(Error::Shape("points must share a positive dimension".into()));
    }
    if probes_per_axis < 2 {
        return Err(Error::Invalid("need at least 2 probes per axis".into()));
    }
    let coord = |i: usize| a + (b - a) * i as f64 / (probes_per_axis - 1) as f64;
    let total = probes_per_axis.pow(d as u32);
    let mut probe = vec![0.0; d];
    let mut radius: f64 = 0.0;
    for idx in 0..total {
        let mut rest = idx;
        for v in probe.iter_mut() {
            *v = coord(rest % probes_per_axis);
            rest /= probes_per_axis;
        }
        let nearest = points
            .iter()
            .map(|p| p.iter().zip(&probe).map(|(x, y)| (x - y).abs()).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        radius = radius.max(nearest);
    }
    Ok(radius)
}
