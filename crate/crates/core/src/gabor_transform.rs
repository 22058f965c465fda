//! Truncated Gabor analysis and synthesis on a finite lattice.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gabor_frames::{FrameConstants, GaborFrame};
use crate::signal_model::{GridSpec, SampledSignal};

/// Entries below this fraction of `max |z|` count as zero.
pub const ZERO_ROW_THRESHOLD: f64 = 1e-10;

/// `ceil(x)` that ignores rounding noise just above an integer.
pub(crate) fn stable_ceil(x: f64) -> f64 {
    (x - 1e-9 * x.abs().max(1.0)).ceil()
}

/// Index ranges `k ∈ [-K0, K0]` (time shifts) and `l ∈ [-L0, L0]` (frequency shifts).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeExtent {
    pub k0: usize,
    pub l0: usize,
}

impl LatticeExtent {
    pub fn new(k0: usize, l0: usize) -> Self {
        Self { k0, l0 }
    }

    /// `K = 2K0 + 1`.
    pub fn k(&self) -> usize {
        2 * self.k0 + 1
    }

    /// `L = 2L0 + 1`.
    pub fn l(&self) -> usize {
        2 * self.l0 + 1
    }

    /// Matrix row holding time shift `k`.
    pub fn row(&self, k: i64) -> usize {
        (k + self.k0 as i64) as usize
    }

    /// Matrix column holding frequency shift `l`.
    pub fn col(&self, l: i64) -> usize {
        (l + self.l0 as i64) as usize
    }

    /// Time shift stored in matrix row `row`.
    pub fn shift_k(&self, row: usize) -> i64 {
        row as i64 - self.k0 as i64
    }

    /// Frequency shift stored in matrix column `col`.
    pub fn shift_l(&self, col: usize) -> i64 {
        col as i64 - self.l0 as i64
    }

    pub fn ks(&self) -> impl Iterator<Item = i64> {
        let k0 = self.k0 as i64;
        -k0..=k0
    }

    pub fn ls(&self) -> impl Iterator<Item = i64> {
        let l0 = self.l0 as i64;
        -l0..=l0
    }
}

/// Lattice extents for signals in `[-β/2, β/2]` essentially bandlimited to
/// `[-Ω/2, Ω/2]`, with a window of support `W` and essential band `B`:
///
/// `K0 = ⌈(β + W)/(2Wμ)⌉ - 1`, `L0 = ⌈(Ω + B)W/2⌉ - 1`.
///
/// `l0_override` replaces the computed `L0`.
pub fn lattice_extent(
    beta: f64,
    omega: f64,
    width: f64,
    mu: f64,
    band: f64,
    l0_override: Option<usize>,
) -> Result<LatticeExtent> {
    for (name, v) in [("beta", beta), ("omega", omega), ("width", width), ("band", band)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(invalid(name, format!("must be positive, got {v}")));
        }
    }
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(invalid("mu", format!("must lie in (0, 1], got {mu}")));
    }
    let k0 = stable_ceil((beta + width) / (2.0 * width * mu)) - 1.0;
    let l0 = stable_ceil((omega + band) * width / 2.0) - 1.0;
    Ok(LatticeExtent {
        k0: k0.max(0.0) as usize,
        l0: l0_override.unwrap_or(l0.max(0.0) as usize),
    })
}

/// Extents for a concrete frame, using its support and essential band.
pub fn frame_extent(frame: &GaborFrame, beta: f64, omega: f64, l0_override: Option<usize>) -> Result<LatticeExtent> {
    lattice_extent(
        beta,
        omega,
        frame.alpha(),
        frame.mu(),
        frame.band().width_hz,
        l0_override,
    )
}

/// Coefficients `z_{k,l}`, row `k + K0`, column `l + L0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientGrid {
    z: DMatrix<Complex64>,
    extent: LatticeExtent,
}

impl CoefficientGrid {
    pub fn new(z: DMatrix<Complex64>, extent: LatticeExtent) -> Result<Self> {
        if z.nrows() != extent.k() || z.ncols() != extent.l() {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} matrix for a {}x{} lattice",
                z.nrows(),
                z.ncols(),
                extent.k(),
                extent.l()
            )));
        }
        if z.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(invalid("z", "contains NaN or infinity"));
        }
        Ok(Self { z, extent })
    }

    pub fn zeros(extent: LatticeExtent) -> Self {
        Self {
            z: DMatrix::zeros(extent.k(), extent.l()),
            extent,
        }
    }

    pub fn z(&self) -> &DMatrix<Complex64> {
        &self.z
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.z
    }

    pub fn extent(&self) -> LatticeExtent {
        self.extent
    }

    /// `z_{k,l}` for signed indices.
    pub fn get(&self, k: i64, l: i64) -> Complex64 {
        self.z[(self.extent.row(k), self.extent.col(l))]
    }

    pub fn set(&mut self, k: i64, l: i64, value: Complex64) {
        let (r, c) = (self.extent.row(k), self.extent.col(l));
        self.z[(r, c)] = value;
    }

    /// Signed time shifts `k` whose row has an entry above
    /// `ZERO_ROW_THRESHOLD · max |z|`.
    pub fn nonzero_rows(&self) -> Vec<i64> {
        let peak = self.z.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return Vec::new();
        }
        let cut = ZERO_ROW_THRESHOLD * peak;
        (0..self.z.nrows())
            .filter(|&r| self.z.row(r).iter().any(|v| v.norm() > cut))
            .map(|r| self.extent.shift_k(r))
            .collect()
    }

    /// `Σ |z_{k,l}|²`.
    pub fn energy(&self) -> f64 {
        self.z.iter().map(|v| v.norm_sqr()).sum()
    }
}

fn check_lattice_coverage(grid: &GridSpec, frame: &GaborFrame, extent: &LatticeExtent) -> Result<()> {
    let reach = frame.a() * extent.k0 as f64 + frame.window().half_support();
    if !grid.covers(-reach, reach) {
        return Err(Error::GridCoverage {
            t_start: grid.t_start(),
            t_end: grid.t_end(),
            lo: -reach,
            hi: reach,
        });
    }
    let b_dt = frame.b() * grid.dt();
    if b_dt > 0.125 {
        return Err(Error::Resolution(b_dt));
    }
    Ok(())
}

/// `z_{k,l} = ∫_{-β/2}^{β/2} f(t) g(t - ak) e^{-2πiblt} dt` by trapezoid quadrature.
pub fn analyze(f: &SampledSignal, frame: &GaborFrame, extent: LatticeExtent) -> Result<CoefficientGrid> {
    let grid = f.grid();
    check_lattice_coverage(grid, frame, &extent)?;
    let weighted = f.quadrature_weighted();
    let g = frame.window();
    let (a, b) = (frame.a(), frame.b());
    let mut z = DMatrix::<Complex64>::zeros(extent.k(), extent.l());
    for k in extent.ks() {
        let center = a * k as f64;
        let span = grid.index_span(center - g.half_support(), center + g.half_support());
        let terms: Vec<(f64, f64)> = span
            .filter(|&i| weighted[i] != 0.0)
            .map(|i| {
                let t = grid.time(i);
                (t, weighted[i] * g.eval(t - center))
            })
            .collect();
        if terms.is_empty() {
            continue;
        }
        let row = extent.row(k);
        for l in extent.ls() {
            let omega = -2.0 * PI * b * l as f64;
            let mut acc = Complex64::new(0.0, 0.0);
            for &(t, h) in &terms {
                let (s, c) = (omega * t).sin_cos();
                acc += Complex64::new(h * c, h * s);
            }
            z[(row, extent.col(l))] = acc;
        }
    }
    CoefficientGrid::new(z, extent)
}

/// Complex synthesis `Σ_{k,l} z_{k,l} e^{2πiblt} γ(t - ak)` on the grid.
pub fn synthesize_complex(zg: &CoefficientGrid, frame: &GaborFrame, grid: &GridSpec) -> Vec<Complex64> {
    let extent = zg.extent();
    let gamma = frame.dual();
    let (a, b) = (frame.a(), frame.b());
    let mut out = vec![Complex64::new(0.0, 0.0); grid.n_points()];
    for k in extent.ks() {
        let row = zg.z().row(extent.row(k));
        if row.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
            continue;
        }
        let center = a * k as f64;
        for i in grid.index_span(center - gamma.half_support(), center + gamma.half_support()) {
            let t = grid.time(i);
            let w = gamma.eval(t - center);
            if w == 0.0 {
                continue;
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for l in extent.ls() {
                let (s, c) = (2.0 * PI * b * l as f64 * t).sin_cos();
                acc += row[extent.col(l)] * Complex64::new(c, s);
            }
            out[i] += acc * w;
        }
    }
    out
}

/// `f̃(t) = Re Σ_{k,l} z_{k,l} e^{2πiblt} γ(t - ak)` on `grid`.
///
/// The result is declared supported on the whole grid.
pub fn synthesize(zg: &CoefficientGrid, frame: &GaborFrame, grid: &GridSpec) -> Result<SampledSignal> {
    let values = synthesize_complex(zg, frame, grid).iter().map(|v| v.re).collect();
    SampledSignal::new(*grid, values, grid.symmetric_span())
}

/// `C̃0 (ε_Ω + ε_B) ‖f‖₂`.
pub fn truncation_bound(constants: &FrameConstants, eps_omega: f64, eps_b: f64, f_norm: f64) -> f64 {
    constants.c0_tilde * (eps_omega + eps_b) * f_norm
}
