//! Reference reconstructions: truncated Fourier series and Shannon interpolation.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::signal_model::{relative_error, SampledSignal};
use crate::spectral;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineMethod {
    Fourier,
    Shannon,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineReport {
    pub method: BaselineMethod,
    pub sample_count: usize,
    pub reconstruction: SampledSignal,
    /// Relative error bound (divided by `‖f‖₂`).
    pub error_bound: f64,
    /// `‖f - f̃‖₂ / ‖f‖₂`.
    pub measured_error: f64,
}

/// `sin(x)/x`, equal to `1 - x²/6` near zero.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Fourier coefficients `c_l = (1/β) ∫_{-β/2}^{β/2} f(t) e^{-2πilt/β} dt`, `l = -l_max..=l_max`.
pub fn fourier_coefficients(f: &SampledSignal, l_max: usize) -> Vec<Complex64> {
    let beta = f.support_beta();
    let grid = f.grid();
    let weighted = f.quadrature_weighted();
    let terms: Vec<(f64, f64)> = f
        .support_range()
        .filter(|&i| weighted[i] != 0.0)
        .map(|i| (grid.time(i), weighted[i]))
        .collect();
    let l_max = l_max as i64;
    (-l_max..=l_max)
        .map(|l| {
            let omega = -2.0 * PI * l as f64 / beta;
            let acc: Complex64 = terms.iter().map(|&(t, w)| Complex64::from_polar(w, omega * t)).sum();
            acc / beta
        })
        .collect()
}

fn nonzero_norm(f: &SampledSignal) -> Result<f64> {
    let norm = f.norm();
    if !(norm > 0.0) {
        return Err(Error::UndefinedRatio("reference signal has zero norm"));
    }
    Ok(norm)
}

/// Partial Fourier sum `Σ_{|l|<=L0} c_l e^{2πilt/β}` on `[-β/2, β/2]`.
///
/// The bound is `√β Σ_{L0<|l|<=4L0} |c_l| / ‖f‖₂`, a finite proxy for the full
/// coefficient tail.
pub fn fourier_truncated(f: &SampledSignal, l0: usize) -> Result<BaselineReport> {
    let norm = nonzero_norm(f)?;
    let beta = f.support_beta();
    let wide = (4 * l0).max(l0 + 1);
    let coeffs = fourier_coefficients(f, wide);
    let centre = wide as i64;
    let kept = &coeffs[(centre - l0 as i64) as usize..=(centre + l0 as i64) as usize];
    let grid = *f.grid();
    let reconstruction = SampledSignal::from_fn(grid, beta, |t| {
        let l0 = l0 as i64;
        (-l0..=l0)
            .zip(kept)
            .map(|(l, c)| (c * Complex64::from_polar(1.0, 2.0 * PI * l as f64 * t / beta)).re)
            .sum()
    })?;
    let tail: f64 = coeffs
        .iter()
        .enumerate()
        .filter(|(i, _)| (*i as i64 - centre).unsigned_abs() as usize > l0)
        .map(|(_, c)| c.norm())
        .sum();
    Ok(BaselineReport {
        method: BaselineMethod::Fourier,
        sample_count: 2 * l0 + 1,
        measured_error: relative_error(f, &reconstruction)?,
        error_bound: beta.sqrt() * tail / norm,
        reconstruction,
    })
}

/// `√T ∫_{|ω|>Ω''/2} |f̂(ω)| dω / ‖f‖₂` with `T` the grid span, from the DFT of the samples.
fn shannon_bound(f: &SampledSignal, omega2: f64, norm: f64) -> f64 {
    let grid = f.grid();
    let (freqs, spectrum) = spectral::fourier_samples(f.values(), grid.dt(), f.values().len());
    let df = 1.0 / (spectrum.len() as f64 * grid.dt());
    let tail: f64 = freqs
        .iter()
        .zip(&spectrum)
        .filter(|(fr, _)| fr.abs() > 0.5 * omega2)
        .map(|(_, v)| v.norm())
        .sum();
    (grid.t_end() - grid.t_start()).sqrt() * tail * df / norm
}

/// Sample indices `k` with `|k| <= K0`, `K0` the largest integer below `Ω''β/2`.
fn sample_indices(f: &SampledSignal, omega2: f64) -> std::ops::RangeInclusive<i64> {
    let half = 0.5 * omega2 * f.support_beta();
    let k0 = (half.ceil() - 1.0).max(0.0) as i64;
    -k0..=k0
}

fn sinc_series(f: &SampledSignal, omega2: f64, samples: &[(f64, f64)]) -> Result<SampledSignal> {
    let grid = *f.grid();
    let values = grid
        .times()
        .map(|t| samples.iter().map(|&(tk, v)| v * sinc(PI * omega2 * (t - tk))).sum())
        .collect();
    SampledSignal::new(grid, values, grid.symmetric_span())
}

fn shannon_report(f: &SampledSignal, omega2: f64, samples: Vec<(f64, f64)>) -> Result<BaselineReport> {
    let norm = nonzero_norm(f)?;
    let reconstruction = sinc_series(f, omega2, &samples)?;
    Ok(BaselineReport {
        method: BaselineMethod::Shannon,
        sample_count: samples.len(),
        measured_error: relative_error(f, &reconstruction)?,
        error_bound: shannon_bound(f, omega2, norm),
        reconstruction,
    })
}

fn check_rate(omega2: f64) -> Result<()> {
    if !(omega2 > 0.0) || !omega2.is_finite() {
        return Err(invalid("omega2", format!("must be positive, got {omega2}")));
    }
    Ok(())
}

/// Sinc series from the point samples `f(k/Ω'')`, `|k| <= K0`.
///
/// Samples between grid points are linearly interpolated.
pub fn shannon_interp(f: &SampledSignal, omega2: f64) -> Result<BaselineReport> {
    check_rate(omega2)?;
    let samples = sample_indices(f, omega2)
        .map(|k| {
            let t = k as f64 / omega2;
            (t, f.interpolate(t))
        })
        .collect();
    shannon_report(f, omega2, samples)
}

/// Like [`shannon_interp`], but takes only the samples that fall strictly
/// inside the given pulse intervals.
pub fn shannon_known_locations(f: &SampledSignal, omega2: f64, intervals: &[(f64, f64)]) -> Result<BaselineReport> {
    check_rate(omega2)?;
    let samples = sample_indices(f, omega2)
        .map(|k| k as f64 / omega2)
        .filter(|&t| intervals.iter().any(|&(lo, hi)| t > lo && t < hi))
        .map(|t| (t, f.interpolate(t)))
        .collect();
    shannon_report(f, omega2, samples)
}
