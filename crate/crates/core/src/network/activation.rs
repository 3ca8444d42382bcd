use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::{lit, Real};

/// Nonlinearity applied after every layer but the last.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ActivationKind {
    /// `sin(omega0 * z)`.
    Sine { omega0: f64 },
    /// ReLU with a sinusoidal positional encoding of the input coordinates.
    ReluPosEnc { num_frequencies: usize },
    /// `exp(-(scale * z)^2)`.
    Gauss { scale: f64 },
    /// `z * Phi(z)` with the exact normal CDF.
    Gelu,
    Tanh,
    Relu,
}

impl ActivationKind {
    pub const DEFAULT_OMEGA0: f64 = 30.0;
    pub const DEFAULT_GAUSS_SCALE: f64 = 10.0;
    pub const DEFAULT_FREQUENCIES: usize = 10;

    pub fn sine() -> Self {
        ActivationKind::Sine {
            omega0: Self::DEFAULT_OMEGA0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ActivationKind::Sine { omega0 } if !(omega0 > 0.0 && omega0.is_finite()) => {
                Err(Error::Invalid(format!("omega0 must be positive, got {omega0}")))
            }
            ActivationKind::Gauss { scale } if !(scale > 0.0 && scale.is_finite()) => {
                Err(Error::Invalid(format!("gauss scale must be positive, got {scale}")))
            }
            ActivationKind::ReluPosEnc { num_frequencies: 0 } => {
                Err(Error::Invalid("positional encoding needs at least one frequency".into()))
            }
            _ => Ok(()),
        }
    }

    /// Positional-encoding octaves applied to the input, if any.
    pub fn encoding_frequencies(&self) -> Option<usize> {
        match *self {
            ActivationKind::ReluPosEnc { num_frequencies } => Some(num_frequencies),
            _ => None,
        }
    }

    /// Width of the first layer's input for `input_dim` raw coordinates.
    pub fn encoded_dim(&self, input_dim: usize) -> usize {
        match self.encoding_frequencies() {
            Some(f) => input_dim * 2 * f,
            None => input_dim,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ActivationKind::Sine { .. } => "sine",
            ActivationKind::ReluPosEnc { .. } => "relu-pe",
            ActivationKind::Gauss { .. } => "gauss",
            ActivationKind::Gelu => "gelu",
            ActivationKind::Tanh => "tanh",
            ActivationKind::Relu => "relu",
        }
    }

    /// Applies the activation in place, writing the derivative into `deriv`.
    pub(crate) fn apply<T: Real>(&self, z: &mut [T], deriv: &mut [T]) {
        debug_assert_eq!(z.len(), deriv.len());
        match *self {
            ActivationKind::Sine { omega0 } => {
                let w: T = lit(omega0);
                for (v, d) in z.iter_mut().zip(deriv.iter_mut()) {
                    let (s, c) = (w * *v).sin_cos();
                    *v = s;
                    *d = w * c;
                }
            }
            ActivationKind::ReluPosEnc { .. } | ActivationKind::Relu => {
                for (v, d) in z.iter_mut().zip(deriv.iter_mut()) {
                    if *v > T::zero() {
                        *d = T::one();
                    } else {
                        *v = T::zero();
                        *d = T::zero();
                    }
                }
            }
            ActivationKind::Gauss { scale } => {
                let s: T = lit(scale);
                let two_s2 = lit::<T>(2.0) * s * s;
                for (v, d) in z.iter_mut().zip(deriv.iter_mut()) {
                    let sz = s * *v;
                    let a = (-(sz * sz)).exp();
                    *d = -two_s2 * *v * a;
                    *v = a;
                }
            }
            ActivationKind::Gelu => {
                for (v, d) in z.iter_mut().zip(deriv.iter_mut()) {
                    let (a, g) = gelu(*v);
                    *v = a;
                    *d = g;
                }
            }
            ActivationKind::Tanh => {
                for (v, d) in z.iter_mut().zip(deriv.iter_mut()) {
                    let a = v.tanh();
                    *v = a;
                    *d = T::one() - a * a;
                }
            }
        }
    }

    /// Scalar evaluation, used by reference implementations and tests.
    pub fn eval(&self, z: f64) -> f64 {
        let mut v = [z];
        let mut d = [0.0];
        self.apply(&mut v, &mut d);
        v[0]
    }
}

/// GELU value and derivative.
#[inline]
pub(crate) fn gelu<T: Real>(z: T) -> (T, T) {
    let half: T = lit(0.5);
    let cdf = half * (T::one() + (z * lit(std::f64::consts::FRAC_1_SQRT_2)).erf());
    let pdf = (-(z * z) * half).exp() * lit(0.398_942_280_401_432_7);
    (z * cdf, cdf + z * pdf)
}

/// Expands each coordinate `x` into `sin(2^j pi x), cos(2^j pi x)` for
/// `j = 0..frequencies`, coordinate-major.
pub fn positional_encoding<T: Real>(coords: &[T], frequencies: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(coords.len() * 2 * frequencies);
    for &x in coords {
        let mut scale: T = lit(std::f64::consts::PI);
        for _ in 0..frequencies {
            let (s, c) = (scale * x).sin_cos();
            out.push(s);
            out.push(c);
            scale = scale + scale;
        }
    }
    out
}
