//! Modulate-and-integrate acquisition with Gabor mixing waveforms.
//!
//! Channel `(m, l)` integrates `f(t) p_{m,l}(t)` over `[-β/2, β/2]` with
//! `p_{m,l}(t) = e^{-2πiblt} s_m(t)` and `s_m(t) = Σ_k c_{mk} g(t - ak)`,
//! so the samples are `X = C Z` for the Gabor coefficients `Z` of `f`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gabor_frames::GaborFrame;
use crate::gabor_transform::{CoefficientGrid, LatticeExtent};
use crate::signal_model::{GridSpec, SampledSignal};

/// `rows × cols` matrix of independent equiprobable `±1` entries.
pub fn bernoulli_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = DMatrix::zeros(rows, cols);
    for r in 0..rows {
        for k in 0..cols {
            c[(r, k)] = if rng.random::<bool>() { 1.0 } else { -1.0 };
        }
    }
    c
}

/// Mixing matrix `C` together with the frame and lattice it mixes.
#[derive(Debug, Clone)]
pub struct MeasurementEnsemble {
    c: DMatrix<f64>,
    seed: u64,
    frame: GaborFrame,
    extent: LatticeExtent,
}

/// Serializable summary of an ensemble; the matrix is regenerated from the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMetadata {
    pub seed: u64,
    pub m: usize,
    pub k: usize,
    pub l0: usize,
    pub frame: String,
}

impl MeasurementEnsemble {
    /// Bernoulli ensemble with `1 <= m <= K`.
    pub fn bernoulli(m: usize, frame: &GaborFrame, extent: LatticeExtent, seed: u64) -> Result<Self> {
        Self::bernoulli_with(m, frame, extent, seed, false)
    }

    /// Bernoulli ensemble; `m > K` is accepted only with `allow_oversampled`.
    pub fn bernoulli_with(
        m: usize,
        frame: &GaborFrame,
        extent: LatticeExtent,
        seed: u64,
        allow_oversampled: bool,
    ) -> Result<Self> {
        if m == 0 {
            return Err(invalid("m", "need at least one channel"));
        }
        if m > extent.k() && !allow_oversampled {
            return Err(invalid(
                "m",
                format!("{m} channels exceed K = {} without the oversampling flag", extent.k()),
            ));
        }
        Ok(Self {
            c: bernoulli_matrix(m, extent.k(), seed),
            seed,
            frame: frame.clone(),
            extent,
        })
    }

    /// `C = I_K`: every channel measures one time shift.
    pub fn identity(frame: &GaborFrame, extent: LatticeExtent) -> Self {
        Self {
            c: DMatrix::identity(extent.k(), extent.k()),
            seed: 0,
            frame: frame.clone(),
            extent,
        }
    }

    pub fn from_matrix(c: DMatrix<f64>, frame: &GaborFrame, extent: LatticeExtent) -> Result<Self> {
        if c.ncols() != extent.k() || c.nrows() == 0 {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} mixing matrix for K = {}",
                c.nrows(),
                c.ncols(),
                extent.k()
            )));
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(invalid("c", "contains NaN or infinity"));
        }
        Ok(Self {
            c,
            seed: 0,
            frame: frame.clone(),
            extent,
        })
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn m(&self) -> usize {
        self.c.nrows()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn frame(&self) -> &GaborFrame {
        &self.frame
    }

    pub fn extent(&self) -> LatticeExtent {
        self.extent
    }

    pub fn metadata(&self) -> EnsembleMetadata {
        EnsembleMetadata {
            seed: self.seed,
            m: self.m(),
            k: self.extent.k(),
            l0: self.extent.l0,
            frame: self.frame.kind().to_owned(),
        }
    }

    /// Half-width of the support of every `s_m`: `aK0 + α/2`.
    pub fn reach(&self) -> f64 {
        self.frame.a() * self.extent.k0 as f64 + self.frame.window().half_support()
    }

    /// `s_m(t) = Σ_{|k|<=K0} c_{mk} g(t - ak)`.
    pub fn mixing_window(&self, m: usize, t: f64) -> f64 {
        let a = self.frame.a();
        let g = self.frame.window();
        let k0 = self.extent.k0 as i64;
        let first = (((t - g.half_support()) / a).ceil() as i64).max(-k0);
        let last = (((t + g.half_support()) / a).floor() as i64).min(k0);
        (first..=last)
            .map(|k| self.c[(m, self.extent.row(k))] * g.eval(t - a * k as f64))
            .sum()
    }

    fn check_channel(&self, m: usize, l: i64) -> Result<()> {
        if m >= self.m() || l.unsigned_abs() as usize > self.extent.l0 {
            return Err(Error::IndexOutOfRange(format!(
                "channel (m={m}, l={l}) outside M = {}, L0 = {}",
                self.m(),
                self.extent.l0
            )));
        }
        Ok(())
    }

    /// Grid samples of `p_{m,l}(t) = e^{-2πiblt} s_m(t)`.
    pub fn waveform(&self, m: usize, l: i64, grid: &GridSpec) -> Result<Vec<Complex64>> {
        self.check_channel(m, l)?;
        let omega = -2.0 * PI * self.frame.b() * l as f64;
        Ok(grid
            .times()
            .map(|t| {
                let s = self.mixing_window(m, t);
                if s == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::from_polar(s, omega * t)
                }
            })
            .collect())
    }
}

/// Samples `X` (row `m`, column `l + L0`), optionally with the additive noise that entered them.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    x: DMatrix<Complex64>,
    noise: Option<DMatrix<Complex64>>,
    l0: usize,
}

impl SampleMatrix {
    pub fn new(x: DMatrix<Complex64>, l0: usize) -> Result<Self> {
        if x.ncols() != 2 * l0 + 1 {
            return Err(Error::ShapeMismatch(format!("{} columns for L0 = {l0}", x.ncols())));
        }
        if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(invalid("x", "contains NaN or infinity"));
        }
        Ok(Self { x, noise: None, l0 })
    }

    /// `X + N`, remembering `N`.
    pub fn with_noise(&self, noise: DMatrix<Complex64>) -> Result<Self> {
        if noise.shape() != self.x.shape() {
            return Err(Error::ShapeMismatch("noise matrix shape differs from X".into()));
        }
        Ok(Self {
            x: &self.x + &noise,
            noise: Some(noise),
            l0: self.l0,
        })
    }

    /// Replaces the sample values, recording the change as noise.
    pub fn perturbed(&self, x: DMatrix<Complex64>) -> Result<Self> {
        let noise = &x - &self.x;
        self.with_noise(noise)
    }

    pub fn x(&self) -> &DMatrix<Complex64> {
        &self.x
    }

    pub fn noise(&self) -> Option<&DMatrix<Complex64>> {
        self.noise.as_ref()
    }

    pub fn l0(&self) -> usize {
        self.l0
    }

    /// Sample at channel `m`, signed frequency index `l`.
    pub fn get(&self, m: usize, l: i64) -> Complex64 {
        self.x[(m, (l + self.l0 as i64) as usize)]
    }
}

/// `e^{-2πiblt_i}` for every `l` (outer) and every index in `range` (inner).
fn phase_table(grid: &GridSpec, range: std::ops::Range<usize>, b: f64, l0: usize) -> Vec<Vec<Complex64>> {
    let l0 = l0 as i64;
    (-l0..=l0)
        .map(|l| {
            let omega = -2.0 * PI * b * l as f64;
            range
                .clone()
                .map(|i| {
                    let (s, c) = (omega * grid.time(i)).sin_cos();
                    Complex64::new(c, s)
                })
                .collect()
        })
        .collect()
}

fn integrate_channels(
    f: &SampledSignal,
    ens: &MeasurementEnsemble,
    window: impl Fn(usize, f64) -> f64,
) -> Result<SampleMatrix> {
    let grid = f.grid();
    let range = f.support_range();
    let weighted = f.quadrature_weighted();
    let extent = ens.extent();
    let phases = phase_table(grid, range.clone(), ens.frame().b(), extent.l0);
    let mut x = DMatrix::<Complex64>::zeros(ens.m(), extent.l());
    for m in 0..ens.m() {
        let h: Vec<f64> = range
            .clone()
            .map(|i| {
                let w = weighted[i];
                if w == 0.0 {
                    0.0
                } else {
                    w * window(m, grid.time(i))
                }
            })
            .collect();
        for (col, row) in phases.iter().enumerate() {
            x[(m, col)] = h.iter().zip(row).map(|(&h, &p)| p * h).sum();
        }
    }
    SampleMatrix::new(x, extent.l0)
}

/// `x_{m,l} = ∫_{-β/2}^{β/2} f(t) p_{m,l}(t) dt` by trapezoid quadrature.
pub fn acquire(f: &SampledSignal, ens: &MeasurementEnsemble) -> Result<SampleMatrix> {
    integrate_channels(f, ens, |m, t| ens.mixing_window(m, t))
}

/// `X = C Z`.
pub fn acquire_fast(zg: &CoefficientGrid, ens: &MeasurementEnsemble) -> Result<SampleMatrix> {
    if zg.extent() != ens.extent() {
        return Err(Error::ShapeMismatch(format!(
            "coefficient lattice {:?} differs from ensemble lattice {:?}",
            zg.extent(),
            ens.extent()
        )));
    }
    let c = ens.c().map(|v| Complex64::new(v, 0.0));
    SampleMatrix::new(c * zg.z(), zg.extent().l0)
}

/// Single-filter form of the sampler: the blocks `s_m` are laid end to end in
/// one impulse response `s(t) = Σ_m s_m(t + τm)` with `τ = WK`, and channel
/// `m` reads the modulated, filtered signal at the time offset `τm`.
#[derive(Debug, Clone)]
pub struct FilterBank {
    ens: MeasurementEnsemble,
    tau: f64,
}

pub fn filter_representation(ens: &MeasurementEnsemble) -> FilterBank {
    FilterBank {
        tau: ens.frame().alpha() * ens.extent().k() as f64,
        ens: ens.clone(),
    }
}

impl FilterBank {
    /// Block spacing `τ = WK`.
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Frequency spacing of the modulators, `θ = b`.
    pub fn theta(&self) -> f64 {
        self.ens.frame().b()
    }

    pub fn channels(&self) -> usize {
        self.ens.m()
    }

    /// Block `m` of the response: `s_m(t + τm)`.
    pub fn block(&self, m: usize, t: f64) -> f64 {
        self.ens.mixing_window(m, t + self.tau * m as f64)
    }

    /// Closed interval outside which block `m` vanishes.
    pub fn block_support(&self, m: usize) -> (f64, f64) {
        let shift = self.tau * m as f64;
        (-shift - self.ens.reach(), -shift + self.ens.reach())
    }

    /// Composite impulse response `s(t)`.
    pub fn response(&self, t: f64) -> f64 {
        (0..self.channels())
            .filter(|&m| {
                let (lo, hi) = self.block_support(m);
                (lo..=hi).contains(&t)
            })
            .map(|m| self.block(m, t))
            .sum()
    }

    /// `x_m[l] = ∫ f(t) e^{-2πiblt} s(t - τm) dt`, reading channel `m` off the composite filter.
    pub fn sample(&self, f: &SampledSignal) -> Result<SampleMatrix> {
        integrate_channels(f, &self.ens, |m, t| self.response(t - self.tau * m as f64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gabor_transform::analyze;
    use crate::signal_model::{generate_multipulse, ModelParams, Placement, PulseShape};

    const W: f64 = 0.13;

    fn grid() -> GridSpec {
        GridSpec::symmetric(4.5, 1.0 / 2048.0).unwrap()
    }

    fn signal(seed: u64) -> SampledSignal {
        let params = ModelParams {
            pulses: 3,
            width: W,
            beta: 8.0,
            omega: 20.0,
            eps_omega: 0.1,
        };
        let shapes = [PulseShape::BSpline(2), PulseShape::BSpline(4), PulseShape::Cosine];
        generate_multipulse(&params, &shapes, &grid(), seed, Placement::default())
            .unwrap()
            .signal
    }

    fn rel(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn bernoulli_entries_and_determinism() {
        let a = bernoulli_matrix(25, 125, 9);
        assert!(a.iter().all(|&v| v == 1.0 || v == -1.0));
        assert_eq!(a, bernoulli_matrix(25, 125, 9));
        assert_ne!(a, bernoulli_matrix(25, 125, 10));
        let frame = GaborFrame::cosine(W).unwrap();
        let e = LatticeExtent::new(2, 1);
        assert!(MeasurementEnsemble::bernoulli(6, &frame, e, 1).is_err());
        assert!(MeasurementEnsemble::bernoulli_with(6, &frame, e, 1, true).is_ok());
        assert!(MeasurementEnsemble::bernoulli(0, &frame, e, 1).is_err());
    }

    #[test]
    fn waveform_cases() {
        let frame = GaborFrame::cosine(W).unwrap();
        let extent = LatticeExtent::new(62, 4);
        let mut c = DMatrix::zeros(1, extent.k());
        c[(0, extent.row(0))] = 1.0;
        let ens = MeasurementEnsemble::from_matrix(c, &frame, extent).unwrap();
        let grid = grid();
        let p = ens.waveform(0, 0, &grid).unwrap();
        for (i, t) in grid.times().enumerate() {
            assert!((p[i].re - frame.window().eval(t)).abs() < 1e-15);
            assert_eq!(p[i].im, 0.0);
        }
        let ens = MeasurementEnsemble::bernoulli(5, &frame, extent, 2).unwrap();
        let p0 = ens.waveform(3, 0, &grid).unwrap();
        let p3 = ens.waveform(3, -3, &grid).unwrap();
        for (u, v) in p0.iter().zip(&p3) {
            assert!((u.norm() - v.norm()).abs() < 1e-12);
        }
        let reach = ens.reach();
        assert!(2.0 * reach <= W * (1.0 + 2.0 * 0.5 * 62.0) + 1e-12);
        assert!(2.0 * reach < W * extent.k() as f64);
        for (i, t) in grid.times().enumerate() {
            if t.abs() > reach {
                assert_eq!(p0[i], Complex64::new(0.0, 0.0));
            }
        }
        assert!(ens.waveform(5, 0, &grid).is_err());
        assert!(ens.waveform(0, 5, &grid).is_err());
    }

    #[test]
    fn acquire_matches_matrix_product() {
        let frame = GaborFrame::trapezoid(W).unwrap();
        let extent = LatticeExtent::new(41, 5);
        let f = signal(4);
        let z = analyze(&f, &frame, extent).unwrap();
        let ens = MeasurementEnsemble::bernoulli(22, &frame, extent, 8).unwrap();
        let direct = acquire(&f, &ens).unwrap();
        let fast = acquire_fast(&z, &ens).unwrap();
        assert!(rel(direct.x(), fast.x()) < 1e-10);

        let id = MeasurementEnsemble::identity(&frame, extent);
        assert!(rel(acquire(&f, &id).unwrap().x(), z.z()) < 1e-10);
        assert_eq!(acquire_fast(&z, &id).unwrap().x(), z.z());
    }

    #[test]
    fn acquire_zero_signal_and_one_hot() {
        let frame = GaborFrame::cosine(W).unwrap();
        let extent = LatticeExtent::new(62, 4);
        let ens = MeasurementEnsemble::bernoulli(25, &frame, extent, 1).unwrap();
        let zero = SampledSignal::zeros(grid(), 8.0).unwrap();
        assert!(acquire(&zero, &ens).unwrap().x().iter().all(|v| v.norm() == 0.0));
        let mut z = CoefficientGrid::zeros(extent);
        z.set(7, -2, Complex64::new(1.0, 0.0));
        let x = acquire_fast(&z, &ens).unwrap();
        for m in 0..25 {
            assert_eq!(x.get(m, -2).re, ens.c()[(m, extent.row(7))]);
            assert_eq!(x.get(m, 1), Complex64::new(0.0, 0.0));
        }
        let other = LatticeExtent::new(61, 4);
        assert!(acquire_fast(&CoefficientGrid::zeros(other), &ens).is_err());
    }

    #[test]
    fn conjugate_symmetry_and_linearity() {
        let frame = GaborFrame::cosine(W).unwrap();
        let extent = LatticeExtent::new(62, 4);
        let ens = MeasurementEnsemble::bernoulli(25, &frame, extent, 5).unwrap();
        let (f, g) = (signal(1), signal(2));
        let xf = acquire(&f, &ens).unwrap();
        for m in 0..25 {
            for l in 1..=4 {
                assert!((xf.get(m, -l) - xf.get(m, l).conj()).norm() < 1e-12);
            }
        }
        let combo = f.scaled(-1.7).add(&g).unwrap();
        let lhs = acquire(&combo, &ens).unwrap();
        let rhs = xf.x() * Complex64::new(-1.7, 0.0) + acquire(&g, &ens).unwrap().x();
        assert!(rel(lhs.x(), &rhs) < 1e-10);
    }

    #[test]
    fn filter_blocks_and_equivalence() {
        let frame = GaborFrame::cosine(W).unwrap();
        let extent = LatticeExtent::new(62, 4);
        let ens = MeasurementEnsemble::bernoulli(6, &frame, extent, 3).unwrap();
        let bank = filter_representation(&ens);
        assert!((bank.tau() - W * 125.0).abs() < 1e-12);
        for m in 1..6 {
            let (_, hi) = bank.block_support(m);
            let (lo_prev, _) = bank.block_support(m - 1);
            assert!(hi < lo_prev);
        }
        let f = signal(6);
        let via_filter = bank.sample(&f).unwrap();
        let direct = acquire(&f, &ens).unwrap();
        assert!(rel(via_filter.x(), direct.x()) < 1e-12);

        let single = MeasurementEnsemble::bernoulli(1, &frame, extent, 3).unwrap();
        let bank = filter_representation(&single);
        for i in 0..100 {
            let t = -4.2 + 0.084 * i as f64;
            assert_eq!(bank.response(t), single.mixing_window(0, t));
        }
    }

    #[test]
    fn noise_bookkeeping() {
        let x = SampleMatrix::new(DMatrix::from_element(2, 3, Complex64::new(1.0, 0.0)), 1).unwrap();
        let n = DMatrix::from_element(2, 3, Complex64::new(0.0, 0.5));
        let noisy = x.with_noise(n.clone()).unwrap();
        assert_eq!(noisy.noise(), Some(&n));
        assert_eq!(noisy.get(1, 1), Complex64::new(1.0, 0.5));
        assert!(SampleMatrix::new(DMatrix::zeros(2, 2), 1).is_err());
    }
}
