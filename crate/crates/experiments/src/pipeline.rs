//! One end-to-end trial: signal, optional noise, Gabor sampling with a random
//! ±1 mixing matrix, optional quantization, sparse recovery and synthesis.

use nalgebra::DMatrix;
use serde::Serialize;
use xsampler_core::gabor_frames::GaborFrame;
use xsampler_core::gabor_transform::{analyze, frame_extent, synthesize, CoefficientGrid, LatticeExtent};
use xsampler_core::recovery::{recover_noisy, row_norms, sparsity_budget, RecoveryResult};
use xsampler_core::sampler::{acquire, MeasurementEnsemble};
use xsampler_core::signal_model::{
    generate_multipulse, noise_realization, quantize_matrix, relative_error, GridSpec, ModelParams, Multipulse,
    Placement, PulseShape, SampledSignal,
};
use xsampler_core::Complex64;

use crate::config::{Config, FrameChoice};

/// Relative residual below which a noiseless pursuit stops early.
pub const NOISELESS_TOL: f64 = 1e-9;

const STREAM_SIGNAL: u64 = 1;
const STREAM_ENSEMBLE: u64 = 2;
const STREAM_NOISE: u64 = 3;

/// Independent seed for one random stream of a trial (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(stream.wrapping_mul(0xD1B5_4A32_D192_ED03))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sensing {
    /// `M × K` matrix of independent ±1 entries.
    Bernoulli,
    /// `C = I_K`: every Gabor coefficient is measured.
    Identity,
}

/// Fixed part of an experiment cell: model, frame, lattice and sampler size.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub choice: FrameChoice,
    pub frame: GaborFrame,
    pub extent: LatticeExtent,
    pub m: usize,
    pub sparsity: usize,
    pub sensing: Sensing,
    pub grid: GridSpec,
    pub params: ModelParams,
    pub shapes: Vec<PulseShape>,
    pub placement: Placement,
}

impl Scenario {
    pub fn new(cfg: &Config, choice: FrameChoice, m: usize, l0: Option<usize>) -> Result<Self, crate::RunError> {
        let model = &cfg.model;
        let frame = choice
            .build(model.width, model.band_tolerance)
            .map_err(|e| crate::RunError::numerical(format!("building the {} frame", choice.label()), e))?;
        let extent = frame_extent(&frame, model.beta, model.omega, l0)
            .map_err(|e| crate::RunError::numerical("lattice extent", e))?;
        let sparsity = sparsity_budget(frame.mu(), model.pulses);
        Ok(Self {
            choice,
            frame,
            extent,
            m,
            sparsity,
            sensing: Sensing::Bernoulli,
            grid: cfg.grid_spec()?,
            params: model.params(),
            shapes: model.pulse_shapes().map_err(crate::RunError::Config)?,
            placement: model.placement(),
        })
    }

    /// Same scenario measured with `C = I`, `M = K` and no sparsity budget.
    pub fn with_identity(mut self) -> Self {
        self.sensing = Sensing::Identity;
        self.m = self.extent.k();
        self.sparsity = self.extent.k();
        self
    }

    pub fn signal(&self, seed: u64) -> xsampler_core::Result<Multipulse> {
        generate_multipulse(
            &self.params,
            &self.shapes,
            &self.grid,
            derive_seed(seed, STREAM_SIGNAL),
            self.placement,
        )
    }

    pub fn ensemble(&self, seed: u64) -> xsampler_core::Result<MeasurementEnsemble> {
        match self.sensing {
            Sensing::Bernoulli => {
                MeasurementEnsemble::bernoulli(self.m, &self.frame, self.extent, derive_seed(seed, STREAM_ENSEMBLE))
            }
            Sensing::Identity => Ok(MeasurementEnsemble::identity(&self.frame, self.extent)),
        }
    }

    /// Samples per unit of time bandwidth without sparsity, `K · L`.
    pub fn full_count(&self) -> usize {
        self.extent.k() * self.extent.l()
    }

    /// Samples actually taken, `M · L`.
    pub fn sparse_count(&self) -> usize {
        self.m * self.extent.l()
    }
}

/// Disturbances applied on the way from signal to samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Perturbation {
    /// Noise added to the signal before sampling; infinite means none.
    pub snr_db: f64,
    /// Uniform quantization of the samples.
    pub bits: Option<u32>,
}

impl Default for Perturbation {
    fn default() -> Self {
        Self {
            snr_db: f64::INFINITY,
            bits: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub seed: u64,
    /// `‖f - f̃‖₂ / ‖f‖₂` for the recovered signal.
    pub relative_error: f64,
    /// Same ratio for synthesis from the exact truncated coefficients.
    pub truncation_error: f64,
    /// `‖Z - Z̃‖_F / ‖Z‖_F`.
    pub coefficient_error: f64,
    /// Nonzero rows of the exact coefficients.
    pub true_rows: usize,
    /// Selected rows.
    pub recovered_rows: usize,
    /// Every nonzero row of `Z` was selected.
    pub exact_support: bool,
    /// Every row holding at least the configured share of the peak row norm was selected.
    pub significant_support: bool,
    /// Share of pulses whose nearest lattice row was selected.
    pub location_rate: f64,
    /// `‖X̃ - X‖_F` introduced by noise and quantization.
    pub perturbation_norm: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Everything a trial produced, for callers that need the signals themselves.
#[derive(Debug, Clone)]
pub struct TrialArtifacts {
    pub multipulse: Multipulse,
    pub coefficients: CoefficientGrid,
    pub ensemble: MeasurementEnsemble,
    pub samples: DMatrix<Complex64>,
    pub recovery: RecoveryResult,
    pub reconstruction: SampledSignal,
    pub outcome: TrialOutcome,
}

pub fn run_trial(
    sc: &Scenario,
    seed: u64,
    perturbation: Perturbation,
    significant_row: f64,
) -> xsampler_core::Result<TrialOutcome> {
    run_trial_full(sc, seed, perturbation, significant_row).map(|a| a.outcome)
}

pub fn run_trial_full(
    sc: &Scenario,
    seed: u64,
    perturbation: Perturbation,
    significant_row: f64,
) -> xsampler_core::Result<TrialArtifacts> {
    let multipulse = sc.signal(seed)?;
    let f = &multipulse.signal;
    let z = analyze(f, &sc.frame, sc.extent)?;
    let ensemble = sc.ensemble(seed)?;

    let clean = acquire(f, &ensemble)?;
    let mut x = clean.x().clone();
    if perturbation.snr_db < f64::INFINITY {
        let noise = noise_realization(f, perturbation.snr_db, derive_seed(seed, STREAM_NOISE))?;
        x += acquire(&noise, &ensemble)?.x();
    }
    if let Some(bits) = perturbation.bits {
        x = quantize_matrix(&x, bits)?;
    }
    let perturbation_norm = (&x - clean.x()).norm();
    let tol = perturbation_norm.max(NOISELESS_TOL * clean.x().norm());

    let recovery = recover_noisy(&x, ensemble.c(), sc.sparsity, tol)?;
    let z_hat = recovery.to_grid(sc.extent)?;
    let reconstruction = synthesize(&z_hat, &sc.frame, &sc.grid)?;
    let error = relative_error(f, &reconstruction)?;
    let truncation_error = relative_error(f, &synthesize(&z, &sc.frame, &sc.grid)?)?;
    let coefficient_error = (z.z() - &recovery.z_hat).norm() / z.z().norm();

    let true_rows: Vec<usize> = z.nonzero_rows().iter().map(|&k| sc.extent.row(k)).collect();
    let exact_support = true_rows.iter().all(|&r| recovery.support.contains(r));
    let norms = row_norms(z.z());
    let peak = norms.iter().copied().fold(0.0, f64::max);
    let significant_support = norms
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > 0.0 && n >= significant_row * peak)
        .all(|(r, _)| recovery.support.contains(r));
    let hits = multipulse
        .pulses
        .iter()
        .filter(|p| {
            let k = (p.center / sc.frame.a()).round() as i64;
            k.unsigned_abs() as usize <= sc.extent.k0 && recovery.support.contains(sc.extent.row(k))
        })
        .count();
    let location_rate = hits as f64 / multipulse.pulses.len().max(1) as f64;

    let outcome = TrialOutcome {
        seed,
        relative_error: error,
        truncation_error,
        coefficient_error,
        true_rows: true_rows.len(),
        recovered_rows: recovery.support.len(),
        exact_support,
        significant_support,
        location_rate,
        perturbation_norm,
        residual: recovery.residual,
        iterations: recovery.iterations,
    };
    Ok(TrialArtifacts {
        multipulse,
        coefficients: z,
        ensemble,
        samples: x,
        recovery,
        reconstruction,
        outcome,
    })
}

/// Median and quartiles by linear interpolation between order statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Spread {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

pub fn spread(values: &[f64]) -> Spread {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    Spread {
        median: quantile(&v, 0.5),
        q1: quantile(&v, 0.25),
        q3: quantile(&v, 0.75),
    }
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let pos = p * (n - 1) as f64;
            let i = pos.floor() as usize;
            let frac = pos - i as f64;
            if i + 1 < n {
                sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
            } else {
                sorted[i]
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartiles_of_small_samples() {
        let s = spread(&[4.0, 1.0, 3.0, 2.0, 5.0]);
        assert_eq!((s.q1, s.median, s.q3), (2.0, 3.0, 4.0));
        let s = spread(&[1.0, 2.0]);
        assert_eq!(s.median, 1.5);
        assert!(spread(&[]).median.is_nan());
    }

    #[test]
    fn derived_seeds_separate_streams() {
        let a = derive_seed(7, STREAM_SIGNAL);
        assert_ne!(a, derive_seed(7, STREAM_ENSEMBLE));
        assert_ne!(a, derive_seed(8, STREAM_SIGNAL));
        assert_eq!(a, derive_seed(7, STREAM_SIGNAL));
    }

    #[test]
    fn noiseless_cosine_trial_recovers_its_support() {
        let cfg = Config::default();
        let sc = Scenario::new(&cfg, FrameChoice::Cosine, 25, Some(4)).unwrap();
        assert_eq!((sc.extent.k(), sc.extent.l(), sc.sparsity), (125, 9, 12));
        let out = run_trial(&sc, 3, Perturbation::default(), 0.05).unwrap();
        assert!(out.exact_support);
        assert!((out.relative_error - out.truncation_error).abs() < 1e-6);
        assert!(out.recovered_rows <= sc.sparsity);
    }

    #[test]
    fn identity_sensing_reduces_to_truncated_synthesis() {
        let cfg = Config::default();
        let sc = Scenario::new(&cfg, FrameChoice::Trapezoid, 22, Some(5))
            .unwrap()
            .with_identity();
        let out = run_trial(&sc, 5, Perturbation::default(), 0.05).unwrap();
        assert!((out.relative_error - out.truncation_error).abs() < 1e-9);
    }
}
