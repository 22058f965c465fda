//! Sub-Nyquist acquisition of multipulse signals with Gabor-frame modulation
//! waveforms, and their recovery by simultaneous sparse approximation.

pub mod baselines;
pub mod error;
pub mod gabor_frames;
pub mod gabor_transform;
pub mod io;
pub mod recovery;
pub mod sampler;
pub mod signal_model;
mod spectral;
pub mod spline;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use gabor_frames::{FrameBounds, FrameConstants, GaborFrame, Window};
pub use gabor_transform::{CoefficientGrid, LatticeExtent};
pub use recovery::{RecoveryResult, SupportSet};
pub use sampler::{MeasurementEnsemble, SampleMatrix};
pub use signal_model::{GridSpec, ModelParams, PulseShape, SampledSignal};
