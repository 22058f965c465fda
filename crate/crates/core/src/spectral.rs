//! DFT helpers shared by the band and tail computations.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Samples of the continuous Fourier transform `∫ x(t) e^{-2πiωt} dt` of a real
/// sequence on a uniform grid, zero padded to `len` points.
///
/// Returns `(frequencies, values)` with frequencies in natural DFT order
/// (non-negative first, then negative). Only magnitudes are meaningful: the
/// phase is referenced to the first sample rather than to `t = 0`.
pub(crate) fn fourier_samples(samples: &[f64], dt: f64, len: usize) -> (Vec<f64>, Vec<Complex64>) {
    let len = len.max(samples.len());
    let mut buf: Vec<Complex64> = samples
        .iter()
        .map(|&v| Complex64::new(v * dt, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(len)
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(len).process(&mut buf);
    let df = 1.0 / (len as f64 * dt);
    let freqs = (0..len)
        .map(|j| {
            if j <= len / 2 {
                j as f64 * df
            } else {
                (j as f64 - len as f64) * df
            }
        })
        .collect();
    (freqs, buf)
}

/// Energy per non-negative frequency bin: entry `j` holds `|F(j df)|² + |F(-j df)|²`
/// (the zero and, for even lengths, the Nyquist bin are counted once).
pub(crate) fn folded_energy(values: &[Complex64]) -> Vec<f64> {
    let len = values.len();
    let half = len / 2;
    let mut out = vec![0.0; half + 1];
    for (j, v) in values.iter().enumerate() {
        let bin = if j <= half { j } else { len - j };
        out[bin] += v.norm_sqr();
    }
    out
}
