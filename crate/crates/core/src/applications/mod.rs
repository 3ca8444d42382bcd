//! Experiment drivers built on the fit loop.

mod audio;
mod bias;
mod bitfreq;
mod expansion;
mod sweep;
mod ternary;

pub use audio::{fit_audio_fp32, AudioFit};
pub use bias::{bias_profile, spearman, BiasProfile};
pub use bitfreq::{make_bitfreq_image, BitFrequency};
pub use expansion::{bit_replication, expand_bit_depth, truncate_to_msbs, zero_padding, ExpansionResult};
pub use sweep::{hypothesis_sweep, median_iterations, ordering_holds, SweepRecord, SweepResult};
pub use ternary::{dense_equivalent, fit_ternary, ModelSize, TernaryFit, TernarySpec};
