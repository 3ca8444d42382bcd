//! Lossless implicit neural representations via bit-plane decomposition.
//!
//! A digital signal of bit depth `n` is split into bit-planes (or `k`-bit
//! planes), a coordinate network is fitted with one extra input for the plane
//! index, and the quantized predictions are reassembled and compared to the
//! source bit for bit.
//!
//! * [`signal`]: quantization, decomposition and exact recomposition
//! * [`network`]: coordinate MLPs, gradients and ternary layers
//! * [`training`]: grids, losses, Adam and the fit loop
//! * [`metrics`]: BER, PSNR, RMSE and SSIM
//! * [`bounds`]: explicit parameter bounds and constructive ReLU networks
//! * [`applications`]: experiment drivers
//! * [`io`]: Netpbm, WAV, model and table files

pub mod applications;
pub mod bounds;
pub mod error;
pub mod io;
pub mod metrics;
pub mod network;
mod real;
pub mod signal;
pub mod training;

pub use error::{Error, Result};
pub use metrics::MetricReport;
pub use network::{ActivationKind, Mlp, NetSpec, Precision, Real};
pub use signal::{decompose, recompose, DigitalSignal, Fp32PlaneStack, QuantizedStack};
pub use training::{fit, verify_lossless, LossKind, TrainConfig, TrainReport};
