//! Digital signals, uniform quantization and bit-plane decomposition.
//!
//! Samples are unsigned integers of a declared bit depth `n`. A signal can be
//! split into `n / k` planes of `k` bits each, least significant plane first,
//! and reassembled exactly. IEEE-754 binary32 data is handled separately by
//! slicing the raw bit pattern into 32 binary planes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_BIT_DEPTH: u32 = 32;

fn check_bits(bits: u32) -> Result<()> {
    if bits == 0 || bits > MAX_BIT_DEPTH {
        return Err(Error::BitDepth(bits));
    }
    Ok(())
}

/// Largest level representable with `bits` bits, `2^bits - 1`.
pub fn max_level(bits: u32) -> u32 {
    if bits >= 32 {
        u32::MAX
    } else {
        (1u32 << bits) - 1
    }
}

/// Integer samples of fixed bit depth over a regular grid.
///
/// `shape` lists the grid extents (e.g. `[H, W]` for an image, `[L]` for
/// audio). Channels are interleaved innermost, so the sample of channel `c`
/// at flat grid index `p` lives at `p * channels + c`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitalSignal {
    shape: Vec<usize>,
    channels: usize,
    bit_depth: u32,
    samples: Vec<u32>,
}

impl DigitalSignal {
    pub fn new(shape: Vec<usize>, channels: usize, bit_depth: u32, samples: Vec<u32>) -> Result<Self> {
        check_bits(bit_depth)?;
        if shape.is_empty() || shape.contains(&0) {
            return Err(Error::Shape(format!("grid extents must be positive, got {shape:?}")));
        }
        if channels == 0 {
            return Err(Error::Shape("channel count must be positive".into()));
        }
        let expected = shape.iter().product::<usize>() * channels;
        if samples.len() != expected {
            return Err(Error::Shape(format!(
                "{} samples for shape {shape:?} x {channels} channels (expected {expected})",
                samples.len()
            )));
        }
        let max = max_level(bit_depth);
        if let Some((index, &value)) = samples.iter().enumerate().find(|(_, &s)| s > max) {
            return Err(Error::SampleRange {
                index,
                value,
                bits: bit_depth,
            });
        }
        Ok(Self {
            shape,
            channels,
            bit_depth,
            samples,
        })
    }

    /// Single-channel convenience constructor.
    pub fn mono(shape: Vec<usize>, bit_depth: u32, samples: Vec<u32>) -> Result<Self> {
        Self::new(shape, 1, bit_depth, samples)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn bit_depth(&self) -> u32 {
        self.bit_depth
    }

    pub fn samples(&self) -> &[u32] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<u32> {
        self.samples
    }

    /// Number of grid points (samples per channel).
    pub fn grid_len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn same_layout(&self, other: &Self) -> bool {
        self.shape == other.shape && self.channels == other.channels && self.bit_depth == other.bit_depth
    }

    pub(crate) fn check_same_layout(&self, other: &Self) -> Result<()> {
        if !self.same_layout(other) {
            return Err(Error::Shape(format!(
                "signals differ: {:?}x{}@{}bit vs {:?}x{}@{}bit",
                self.shape, self.channels, self.bit_depth, other.shape, other.channels, other.bit_depth
            )));
        }
        Ok(())
    }
}

/// A signal split into `n / k` planes of `k` bits each, least significant first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedStack {
    plane_bits: u32,
    source_bit_depth: u32,
    shape: Vec<usize>,
    channels: usize,
    planes: Vec<Vec<u32>>,
}

impl QuantizedStack {
    pub fn from_planes(
        shape: Vec<usize>,
        channels: usize,
        source_bit_depth: u32,
        plane_bits: u32,
        planes: Vec<Vec<u32>>,
    ) -> Result<Self> {
        check_bits(source_bit_depth)?;
        check_plane_bits(plane_bits, source_bit_depth)?;
        let count = (source_bit_depth / plane_bits) as usize;
        if planes.len() != count {
            return Err(Error::Shape(format!("expected {count} planes, got {}", planes.len())));
        }
        let len = shape.iter().product::<usize>() * channels;
        if let Some(bad) = planes.iter().position(|p| p.len() != len) {
            return Err(Error::Shape(format!("plane {bad} does not have {len} samples")));
        }
        Ok(Self {
            plane_bits,
            source_bit_depth,
            shape,
            channels,
            planes,
        })
    }

    pub fn plane_bits(&self) -> u32 {
        self.plane_bits
    }

    pub fn source_bit_depth(&self) -> u32 {
        self.source_bit_depth
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn planes(&self) -> &[Vec<u32>] {
        &self.planes
    }

    pub fn plane_count(&self) -> usize {
        self.planes.len()
    }
}

/// The 32 bit-planes of a sequence of IEEE-754 binary32 values.
///
/// Plane `j` holds bit `j` of every sample: 0..=22 mantissa, 23..=30 exponent,
/// 31 sign.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fp32PlaneStack {
    len: usize,
    planes: Vec<Vec<u8>>,
}

impl Fp32PlaneStack {
    pub const PLANES: usize = 32;
    pub const MANTISSA: std::ops::Range<usize> = 0..23;
    pub const EXPONENT: std::ops::Range<usize> = 23..31;
    pub const SIGN: usize = 31;

    pub fn from_planes(planes: Vec<Vec<u8>>) -> Result<Self> {
        if planes.len() != Self::PLANES {
            return Err(Error::Shape(format!("expected 32 planes, got {}", planes.len())));
        }
        let len = planes[0].len();
        for (i, p) in planes.iter().enumerate() {
            if p.len() != len {
                return Err(Error::Shape(format!("plane {i} has {} entries, expected {len}", p.len())));
            }
            if let Some(&v) = p.iter().find(|&&v| v > 1) {
                return Err(Error::PlaneRange {
                    plane: i,
                    value: v as u32,
                    bits: 1,
                });
            }
        }
        Ok(Self { len, planes })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn planes(&self) -> &[Vec<u8>] {
        &self.planes
    }
}

fn check_plane_bits(k: u32, n: u32) -> Result<()> {
    if k == 0 || !n.is_multiple_of(k) {
        return Err(Error::PlaneBits { k, n });
    }
    Ok(())
}

/// Nearest level of the uniform `bits`-bit grid on `[0, 1]`.
///
/// Inputs outside `[0, 1]` are clamped first; exact midpoints round half away
/// from zero.
pub fn quantize(value: f64, bits: u32) -> Result<u32> {
    check_bits(bits)?;
    if !value.is_finite() {
        return Err(Error::NonFinite(value));
    }
    Ok(quantize_unchecked(value, bits))
}

#[inline]
pub(crate) fn quantize_unchecked(value: f64, bits: u32) -> u32 {
    let max = max_level(bits) as f64;
    // NaN compares false and falls through to 0 via the clamp below
    let scaled = (value.clamp(0.0, 1.0) * max).round();
    if scaled.is_nan() {
        0
    } else {
        scaled as u32
    }
}

/// Level `level` of the `bits`-bit grid as a real in `[0, 1]`.
pub fn dequantize(level: u32, bits: u32) -> f64 {
    level as f64 / max_level(bits) as f64
}

/// Largest absolute error that still quantizes back to the right level,
/// `1 / (2 (2^n - 1))`.
pub fn epsilon(bits: u32) -> Result<f64> {
    check_bits(bits)?;
    Ok(0.5 / max_level(bits) as f64)
}

pub fn normalize(signal: &DigitalSignal) -> Vec<f64> {
    let max = max_level(signal.bit_depth) as f64;
    signal.samples.iter().map(|&s| s as f64 / max).collect()
}

/// Split a signal into `n / k` planes; plane `i` holds `(s >> k*i) mod 2^k`.
pub fn decompose(signal: &DigitalSignal, plane_bits: u32) -> Result<QuantizedStack> {
    let n = signal.bit_depth;
    check_plane_bits(plane_bits, n)?;
    let mask = max_level(plane_bits);
    let planes = (0..n / plane_bits)
        .map(|i| {
            let shift = plane_bits * i;
            signal
                .samples
                .iter()
                .map(|&s| s.checked_shr(shift).unwrap_or(0) & mask)
                .collect()
        })
        .collect();
    Ok(QuantizedStack {
        plane_bits,
        source_bit_depth: n,
        shape: signal.shape.clone(),
        channels: signal.channels,
        planes,
    })
}

/// Exact inverse of [`decompose`]: `s = sum_i (2^k)^i * plane_i`.
pub fn recompose(stack: &QuantizedStack) -> Result<DigitalSignal> {
    let k = stack.plane_bits;
    let mask = max_level(k);
    let len = stack.planes.first().map_or(0, Vec::len);
    let mut samples = vec![0u32; len];
    for (i, plane) in stack.planes.iter().enumerate() {
        if let Some(&value) = plane.iter().find(|&&v| v > mask) {
            return Err(Error::PlaneRange { plane: i, value, bits: k });
        }
        let shift = k * i as u32;
        for (s, &v) in samples.iter_mut().zip(plane) {
            *s |= v << shift;
        }
    }
    DigitalSignal::new(stack.shape.clone(), stack.channels, stack.source_bit_depth, samples)
}

pub fn fp32_decompose(samples: &[f32]) -> Fp32PlaneStack {
    let planes = (0..Fp32PlaneStack::PLANES)
        .map(|j| samples.iter().map(|v| ((v.to_bits() >> j) & 1) as u8).collect())
        .collect();
    Fp32PlaneStack {
        len: samples.len(),
        planes,
    }
}

/// Raw bit patterns as a 32-bit signal over `[len]`; its `k = 1` planes are
/// exactly the planes of [`fp32_decompose`].
pub fn fp32_bits_signal(samples: &[f32]) -> Result<DigitalSignal> {
    DigitalSignal::mono(vec![samples.len()], 32, samples.iter().map(|v| v.to_bits()).collect())
}

pub fn fp32_recompose(stack: &Fp32PlaneStack) -> Vec<f32> {
    let mut bits = vec![0u32; stack.len];
    for (j, plane) in stack.planes.iter().enumerate() {
        for (b, &v) in bits.iter_mut().zip(plane) {
            *b |= (v as u32 & 1) << j;
        }
    }
    bits.into_iter().map(f32::from_bits).collect()
}
