//! Multipulse test signals on a uniform time grid.
//!
//! A multipulse signal is a sum of `N` pulses, each of width at most `W`,
//! supported inside `[-β/2, β/2]`. This module generates such signals,
//! perturbs them (additive noise, sample quantization) and measures them
//! (spectral tail energy, relative error).

use std::ops::Range;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::spectral;
use crate::spline::cardinal_bspline;

/// Tolerance, in units of grid steps, used when snapping interval ends to grid points.
const INDEX_SLACK: f64 = 1e-9;

/// Uniform time grid `t_i = t_start + i·dt`, `i = 0..n_points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    t_start: f64,
    dt: f64,
    n_points: usize,
}

impl GridSpec {
    /// Grid from `t_start` to `t_end` with step `dt`; `n_points = round((t_end-t_start)/dt) + 1`.
    pub fn new(t_start: f64, t_end: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(invalid("dt", format!("must be positive and finite, got {dt}")));
        }
        if !(t_end > t_start) {
            return Err(invalid(
                "t_end",
                format!("must exceed t_start ({t_start}), got {t_end}"),
            ));
        }
        let n_points = ((t_end - t_start) / dt).round() as usize + 1;
        Self::from_parts(t_start, dt, n_points)
    }

    /// Grid on `[-half_width, half_width]`.
    pub fn symmetric(half_width: f64, dt: f64) -> Result<Self> {
        Self::new(-half_width, half_width, dt)
    }

    pub fn from_parts(t_start: f64, dt: f64, n_points: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() || !t_start.is_finite() {
            return Err(invalid("dt", format!("must be positive and finite, got {dt}")));
        }
        if n_points < 2 {
            return Err(invalid("n_points", format!("need at least 2 points, got {n_points}")));
        }
        Ok(Self { t_start, dt, n_points })
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.n_points - 1)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn nyquist(&self) -> f64 {
        0.5 / self.dt
    }

    #[inline]
    pub fn time(&self, i: usize) -> f64 {
        self.t_start + i as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.time(i))
    }

    /// Width of the smallest interval symmetric about zero containing the grid.
    pub fn symmetric_span(&self) -> f64 {
        2.0 * self.t_start.abs().max(self.t_end().abs())
    }

    /// Indices `i` with `lo <= t_i <= hi`, clamped to the grid.
    pub fn index_span(&self, lo: f64, hi: f64) -> Range<usize> {
        let first = ((lo - self.t_start) / self.dt - INDEX_SLACK).ceil().max(0.0);
        let last = ((hi - self.t_start) / self.dt + INDEX_SLACK).floor();
        if last < 0.0 || first > last {
            return 0..0;
        }
        let first = (first as usize).min(self.n_points);
        let end = ((last as usize) + 1).min(self.n_points);
        first..end.max(first)
    }

    /// Whether the grid contains `[lo, hi]`, up to a fraction of a step.
    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        let slack = 1e-6 * self.dt;
        self.t_start <= lo + slack && self.t_end() >= hi - slack
    }

    /// Composite trapezoid integral of grid samples.
    pub fn trapezoid(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n_points);
        let inner: f64 = values.iter().sum();
        self.dt * (inner - 0.5 * (values[0] + values[values.len() - 1]))
    }

    pub(crate) fn same_as(&self, other: &GridSpec) -> bool {
        self.n_points == other.n_points
            && (self.dt - other.dt).abs() <= 1e-12 * self.dt
            && (self.t_start - other.t_start).abs() <= 1e-9 * self.dt
    }
}

/// Pulse profile on the normalized interval `[-1/2, 1/2]`.
#[derive(Debug, Clone, PartialEq)]
pub enum PulseShape {
    /// Cardinal B-spline of the given order, dilated to fill the width.
    BSpline(u32),
    /// `cos(πx)` on `|x| <= 1/2`.
    Cosine,
    /// Uniform samples across `[-1/2, 1/2]`, linearly interpolated.
    Table(Arc<[f64]>),
}

impl PulseShape {
    /// Profile value at normalized time `x` (zero outside `[-1/2, 1/2]`).
    pub fn profile(&self, x: f64) -> f64 {
        if !(-0.5..=0.5).contains(&x) {
            return 0.0;
        }
        match self {
            PulseShape::BSpline(order) => {
                let n = *order as f64;
                cardinal_bspline(*order, x * n)
            }
            PulseShape::Cosine => (std::f64::consts::PI * x).cos(),
            PulseShape::Table(values) => {
                let segments = values.len() - 1;
                let pos = (x + 0.5) * segments as f64;
                let i = (pos.floor() as usize).min(segments - 1);
                let frac = pos - i as f64;
                values[i] * (1.0 - frac) + values[i + 1] * frac
            }
        }
    }

    pub fn table(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 || values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("table", "need at least two finite samples"));
        }
        Ok(PulseShape::Table(values.into()))
    }

    pub fn label(&self) -> String {
        match self {
            PulseShape::BSpline(order) => format!("bspline{order}"),
            PulseShape::Cosine => "cosine".to_owned(),
            PulseShape::Table(v) => format!("table{}", v.len()),
        }
    }
}

/// One pulse `amplitude · shape((t - center)/width)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSpec {
    pub shape: PulseShape,
    pub width: f64,
    pub center: f64,
    pub amplitude: f64,
}

impl PulseSpec {
    pub fn eval(&self, t: f64) -> f64 {
        self.amplitude * self.shape.profile((t - self.center) / self.width)
    }

    /// Closed support interval of the pulse.
    pub fn interval(&self) -> (f64, f64) {
        (self.center - 0.5 * self.width, self.center + 0.5 * self.width)
    }
}

/// Parameters of the multipulse class: `N` pulses of width at most `W` in
/// `[-β/2, β/2]`, essentially bandlimited to `[-Ω/2, Ω/2]` with tail `ε_Ω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub pulses: usize,
    pub width: f64,
    pub beta: f64,
    pub omega: f64,
    pub eps_omega: f64,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.width > 0.0) {
            return Err(invalid("width", "must be positive"));
        }
        if !(self.beta > 0.0) {
            return Err(invalid("beta", "must be positive"));
        }
        if !(self.omega > 0.0) {
            return Err(invalid("omega", "must be positive"));
        }
        if !(0.0..1.0).contains(&self.eps_omega) {
            return Err(invalid("eps_omega", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Real signal on a grid, declared to vanish outside `[-β/2, β/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    grid: GridSpec,
    values: Vec<f64>,
    support_beta: f64,
}

impl SampledSignal {
    pub fn new(grid: GridSpec, values: Vec<f64>, support_beta: f64) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.n_points()
            )));
        }
        if !(support_beta > 0.0) {
            return Err(invalid("support_beta", "must be positive"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("values", "contain NaN or infinity"));
        }
        let inside = grid.index_span(-0.5 * support_beta, 0.5 * support_beta);
        let leak = values
            .iter()
            .enumerate()
            .filter(|(i, _)| !inside.contains(i))
            .map(|(_, v)| v.abs())
            .fold(0.0, f64::max);
        if leak > 1e-12 {
            return Err(invalid(
                "values",
                format!("nonzero ({leak:e}) outside [-{0}, {0}]", 0.5 * support_beta),
            ));
        }
        Ok(Self {
            grid,
            values,
            support_beta,
        })
    }

    pub fn zeros(grid: GridSpec, support_beta: f64) -> Result<Self> {
        Self::new(grid, vec![0.0; grid.n_points()], support_beta)
    }

    /// Samples an arbitrary function on the grid, zeroing it outside the support.
    pub fn from_fn(grid: GridSpec, support_beta: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let inside = grid.index_span(-0.5 * support_beta, 0.5 * support_beta);
        let values = (0..grid.n_points())
            .map(|i| if inside.contains(&i) { f(grid.time(i)) } else { 0.0 })
            .collect();
        Self::new(grid, values, support_beta)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn support_beta(&self) -> f64 {
        self.support_beta
    }

    /// Grid indices inside `[-β/2, β/2]`.
    pub fn support_range(&self) -> Range<usize> {
        self.grid.index_span(-0.5 * self.support_beta, 0.5 * self.support_beta)
    }

    /// `w_i · f(t_i)` where `w_i` are the trapezoid weights on `[-β/2, β/2]`.
    ///
    /// Every functional `∫_{-β/2}^{β/2} f(t) h(t) dt` in the crate is the dot
    /// product of this vector with samples of `h`, so analysis and acquisition
    /// share one quadrature rule.
    pub fn quadrature_weighted(&self) -> Vec<f64> {
        let range = self.support_range();
        let dt = self.grid.dt();
        let mut out = vec![0.0; self.values.len()];
        if range.is_empty() {
            return out;
        }
        for i in range.clone() {
            out[i] = dt * self.values[i];
        }
        out[range.start] *= 0.5;
        out[range.end - 1] *= 0.5;
        out
    }

    /// L2 norm by the composite trapezoid rule over the whole grid.
    pub fn norm(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        self.grid.trapezoid(&sq).max(0.0).sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * factor).collect(),
            support_beta: self.support_beta,
        }
    }

    /// Pointwise sum; the support of the result is the wider of the two.
    pub fn add(&self, other: &SampledSignal) -> Result<Self> {
        self.check_grid(other)?;
        Ok(Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            support_beta: self.support_beta.max(other.support_beta),
        })
    }

    /// Linear interpolation between grid samples; zero off the grid.
    pub fn interpolate(&self, t: f64) -> f64 {
        let pos = (t - self.grid.t_start()) / self.grid.dt();
        if pos < -INDEX_SLACK || pos > (self.values.len() - 1) as f64 + INDEX_SLACK {
            return 0.0;
        }
        let pos = pos.clamp(0.0, (self.values.len() - 1) as f64);
        let i = (pos.floor() as usize).min(self.values.len() - 2);
        let frac = pos - i as f64;
        if frac <= INDEX_SLACK {
            return self.values[i];
        }
        if frac >= 1.0 - INDEX_SLACK {
            return self.values[i + 1];
        }
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    pub(crate) fn check_grid(&self, other: &SampledSignal) -> Result<()> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::ShapeMismatch(format!(
                "grids differ: {:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }
}

/// How pulse centers are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub allow_overlap: bool,
    pub amplitude: f64,
}

impl Default for Placement {
    fn default() -> Self {
        Self {
            allow_overlap: false,
            amplitude: 1.0,
        }
    }
}

/// A generated multipulse signal together with the pulses that make it up.
#[derive(Debug, Clone)]
pub struct Multipulse {
    pub signal: SampledSignal,
    pub pulses: Vec<PulseSpec>,
}

/// Draws `params.pulses` pulses of width `params.width` at random positions in
/// `[-β/2, β/2]` and samples their sum on `grid`.
///
/// Pulse `n` uses `shapes[n % shapes.len()]`. Without overlap the centers are
/// uniform over all non-overlapping configurations (sorted gaps drawn from the
/// free length `β - N·W`), so placement never needs rejection.
pub fn generate_multipulse(
    params: &ModelParams,
    shapes: &[PulseShape],
    grid: &GridSpec,
    seed: u64,
    placement: Placement,
) -> Result<Multipulse> {
    params.validate()?;
    let n = params.pulses;
    let (w, beta) = (params.width, params.beta);
    if !grid.covers(-0.5 * beta, 0.5 * beta) {
        return Err(Error::GridCoverage {
            t_start: grid.t_start(),
            t_end: grid.t_end(),
            lo: -0.5 * beta,
            hi: 0.5 * beta,
        });
    }
    if n > 0 && shapes.is_empty() {
        return Err(invalid("shapes", "at least one pulse shape is required"));
    }
    if w > beta {
        return Err(Error::Placement {
            pulses: n,
            width: w,
            beta,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers: Vec<f64> = if placement.allow_overlap {
        (0..n)
            .map(|_| rng.random_range(-0.5 * beta + 0.5 * w..=0.5 * beta - 0.5 * w))
            .collect()
    } else {
        let free = beta - n as f64 * w;
        if free < 0.0 {
            return Err(Error::Placement {
                pulses: n,
                width: w,
                beta,
            });
        }
        let mut gaps: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * free).collect();
        gaps.sort_by(f64::total_cmp);
        gaps.iter()
            .enumerate()
            .map(|(i, g)| -0.5 * beta + g + (i as f64 + 0.5) * w)
            .collect()
    };
    centers.shuffle(&mut rng);

    let pulses: Vec<PulseSpec> = centers
        .into_iter()
        .enumerate()
        .map(|(i, center)| PulseSpec {
            shape: shapes[i % shapes.len()].clone(),
            width: w,
            center,
            amplitude: placement.amplitude,
        })
        .collect();

    let mut values = vec![0.0; grid.n_points()];
    for p in &pulses {
        let (lo, hi) = p.interval();
        for i in grid.index_span(lo, hi) {
            values[i] += p.eval(grid.time(i));
        }
    }
    let signal = SampledSignal::new(*grid, values, beta)?;
    Ok(Multipulse { signal, pulses })
}

/// `(∫_{|ω|>Ω/2} |f̂(ω)|² dω)^{1/2} / ‖f‖₂`, from the DFT of the grid samples.
pub fn tail_energy_fraction(f: &SampledSignal, omega: f64) -> Result<f64> {
    if !(omega >= 0.0) {
        return Err(invalid("omega", "must be non-negative"));
    }
    let (freqs, spectrum) = spectral::fourier_samples(f.values(), f.grid().dt(), f.values().len());
    let total: f64 = spectrum.iter().map(|v| v.norm_sqr()).sum();
    if !(total > 0.0) {
        return Err(Error::UndefinedRatio("signal has zero energy"));
    }
    let tail: f64 = freqs
        .iter()
        .zip(&spectrum)
        .filter(|(fr, _)| fr.abs() > 0.5 * omega)
        .map(|(_, v)| v.norm_sqr())
        .sum();
    Ok((tail / total).sqrt().min(1.0))
}

/// Signal-to-noise ratio in dB; `f64::INFINITY` means noiseless.
pub type SnrDb = f64;

/// The white Gaussian perturbation `add_noise` would add, scaled to `snr_db`.
pub fn noise_realization(f: &SampledSignal, snr_db: SnrDb, seed: u64) -> Result<SampledSignal> {
    if snr_db.is_nan() {
        return Err(invalid("snr_db", "is NaN"));
    }
    let signal_norm = f.norm();
    if !(signal_norm > 0.0) {
        return Err(Error::UndefinedRatio("cannot set an SNR for a zero signal"));
    }
    if snr_db == f64::INFINITY {
        return SampledSignal::zeros(*f.grid(), f.support_beta());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let range = f.support_range();
    let mut values = vec![0.0; f.values().len()];
    for v in &mut values[range] {
        *v = rng.sample(StandardNormal);
    }
    let raw = SampledSignal::new(*f.grid(), values, f.support_beta())?;
    let target = signal_norm * 10f64.powf(-snr_db / 20.0);
    Ok(raw.scaled(target / raw.norm()))
}

/// Adds white Gaussian noise inside `[-β/2, β/2]` so that
/// `10 log10(‖f‖²/‖n‖²) = snr_db` exactly.
pub fn add_noise(f: &SampledSignal, snr_db: SnrDb, seed: u64) -> Result<SampledSignal> {
    if snr_db == f64::INFINITY {
        return Ok(f.clone());
    }
    f.add(&noise_realization(f, snr_db, seed)?)
}

/// Uniform quantizer with `2^bits` levels spanning `[-m, m]`, `m = max|v|`.
fn quantize_part(values: impl Iterator<Item = f64> + Clone, bits: u32) -> impl Fn(f64) -> f64 {
    let peak = values.map(f64::abs).fold(0.0, f64::max);
    let levels = if bits >= 53 { 0.0 } else { (1u64 << bits) as f64 - 1.0 };
    let step = if levels > 0.0 { 2.0 * peak / levels } else { 0.0 };
    move |v: f64| {
        if step == 0.0 {
            return v;
        }
        let idx = ((v + peak) / step).round().clamp(0.0, levels);
        -peak + idx * step
    }
}

/// Quantizes real and imaginary parts independently to `2^bits` uniform levels
/// covering the dynamic range of each part.
pub fn quantize_matrix(x: &DMatrix<Complex64>, bits: u32) -> Result<DMatrix<Complex64>> {
    if bits == 0 {
        return Err(invalid("bits", "must be at least 1"));
    }
    let q_re = quantize_part(x.iter().map(|v| v.re), bits);
    let q_im = quantize_part(x.iter().map(|v| v.im), bits);
    Ok(x.map(|v| Complex64::new(q_re(v.re), q_im(v.im))))
}

/// Quantization step `2·max|·|/(2^bits - 1)` for one component.
pub fn quantization_step(peak: f64, bits: u32) -> f64 {
    if bits >= 53 {
        return 0.0;
    }
    2.0 * peak / ((1u64 << bits) as f64 - 1.0)
}

/// `‖f - f̂‖₂ / ‖f‖₂` by trapezoid quadrature on the shared grid.
pub fn relative_error(f: &SampledSignal, f_hat: &SampledSignal) -> Result<f64> {
    f.check_grid(f_hat)?;
    let reference = f.norm();
    if !(reference > 0.0) {
        return Err(Error::UndefinedRatio("reference signal has zero norm"));
    }
    let diff: Vec<f64> = f
        .values()
        .iter()
        .zip(f_hat.values())
        .map(|(a, b)| (a - b) * (a - b))
        .collect();
    Ok(f.grid().trapezoid(&diff).max(0.0).sqrt() / reference)
}
