//! Compactly supported Gabor windows, their duals, and frame constants.
//!
//! All frames here live in the painless regime: the window `g` is supported on
//! `[-α/2, α/2]` and the lattice is `a = μα`, `b = 1/α`. The frame operator is
//! then multiplication by `S(t)/b` with `S(t) = Σ_k |g(t - ak)|²`.
//!
//! Frame bounds are reported as `ess inf S` and `ess sup S`, i.e. for the
//! system normalized by `√b`. The coefficient energy of the unnormalized
//! system therefore satisfies `A1‖f‖² <= b Σ|z_{k,l}|² <= A2‖f‖²`, and the
//! synthesis dual `γ` carries the factor `b` (canonical dual `γ = b g / S`).

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::signal_model::GridSpec;
use crate::spectral;
use crate::spline::cardinal_bspline;

/// Points per period used to locate the extrema of `S(t)`.
pub const FRAME_BOUND_POINTS: usize = 4096;

/// Default L2 tail tolerance for the essential band of a window.
///
/// With this tolerance the cosine window of width 0.13 s has an essential band
/// of about 16 Hz.
pub const DEFAULT_BAND_TOLERANCE: f64 = 0.15;

/// Lower bounds at or below this value are treated as "not a frame".
const MIN_LOWER_BOUND: f64 = 1e-9;

type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Real window supported on `[-α/2, α/2]`, given by a closed-form evaluator.
#[derive(Clone)]
pub struct Window {
    name: String,
    support: f64,
    profile: Profile,
}

impl fmt::Debug for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Window")
            .field("name", &self.name)
            .field("support", &self.support)
            .finish()
    }
}

impl Window {
    /// Wraps `profile` as a window of support width `support`; values outside
    /// `[-support/2, support/2]` are forced to zero.
    pub fn new(
        name: impl Into<String>,
        support: f64,
        profile: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(support > 0.0) || !support.is_finite() {
            return Err(invalid("support", format!("must be positive, got {support}")));
        }
        Ok(Self {
            name: name.into(),
            support,
            profile: Arc::new(profile),
        })
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        if t.abs() > 0.5 * self.support {
            0.0
        } else {
            (self.profile)(t)
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Support width α.
    pub fn support(&self) -> f64 {
        self.support
    }

    pub fn half_support(&self) -> f64 {
        0.5 * self.support
    }

    pub fn sample(&self, grid: &GridSpec) -> Vec<f64> {
        grid.times().map(|t| self.eval(t)).collect()
    }

    /// `factor · g(t)`.
    pub fn scaled(&self, factor: f64) -> Self {
        let inner = self.profile.clone();
        Self {
            name: self.name.clone(),
            support: self.support,
            profile: Arc::new(move |t| factor * inner(t)),
        }
    }

    /// `g(t / factor)`: the window stretched to support `factor · α`.
    pub fn dilated(&self, factor: f64) -> Self {
        let inner = self.profile.clone();
        Self {
            name: self.name.clone(),
            support: self.support * factor,
            profile: Arc::new(move |t| inner(t / factor)),
        }
    }

    /// `S(t) = Σ_k |g(t - ak)|²`.
    pub fn overlap_energy(&self, a: f64, t: f64) -> f64 {
        let half = self.half_support();
        let first = ((t - half) / a).ceil() as i64;
        let last = ((t + half) / a).floor() as i64;
        (first..=last)
            .map(|k| {
                let v = self.eval(t - a * k as f64);
                v * v
            })
            .sum()
    }
}

/// `cos(πt/W)` on `|t| <= W/2`.
pub fn cosine_window(width: f64) -> Result<Window> {
    Window::new("cosine", width, move |t| (PI * t / width).cos())
}

/// Indicator of `[-W/2, W/2)`.
pub fn box_window(width: f64) -> Result<Window> {
    Window::new("box", width, move |t| if t < 0.5 * width { 1.0 } else { 0.0 })
}

/// Trapezoid prototype on `[-2/3, 2/3]`; its unit-shift translates sum to one.
pub fn trapezoid_prototype(x: f64) -> f64 {
    let x = x.abs();
    if x <= 1.0 / 3.0 {
        1.0
    } else if x <= 2.0 / 3.0 {
        2.0 - 3.0 * x
    } else {
        0.0
    }
}

/// Piecewise quadratic dual of [`trapezoid_prototype`] for unit shifts.
pub fn trapezoid_dual_prototype(x: f64) -> f64 {
    let x = x.abs();
    if x <= 1.0 / 3.0 {
        1.0
    } else if x <= 2.0 / 3.0 {
        -18.0 * x * x + 15.0 * x - 2.0
    } else {
        0.0
    }
}

/// `B_N(tN/W)`, supported on `[-W/2, W/2]`.
pub fn bspline_profile_window(order: u32, width: f64) -> Result<Window> {
    if order == 0 {
        return Err(invalid("order", "B-spline order must be at least 1"));
    }
    let n = order as f64;
    Window::new(format!("bspline{order}"), width, move |t| {
        cardinal_bspline(order, t * n / width)
    })
}

/// Tight window built from a monotone transition profile `h` (`h = 0` on
/// `(-∞, 0]`, `h = 1` on `[1, ∞)`), for redundancy `μ ∈ [1/2, 1)`:
/// rising as `√h(·)` on `[-W/2, -Wλ/2]`, flat on `|t| <= Wλ/2`, and falling as
/// `√(1 - h(·))` on `[Wλ/2, W/2]`, where `λ = 2μ - 1`.
pub fn window_from_h<H>(h: H, mu: f64, width: f64) -> Result<Window>
where
    H: Fn(f64) -> f64 + Send + Sync + 'static,
{
    if !(0.5..1.0).contains(&mu) {
        return Err(invalid("mu", format!("must lie in [1/2, 1), got {mu}")));
    }
    if !(width > 0.0) {
        return Err(invalid("width", "must be positive"));
    }
    const CHECKS: usize = 1024;
    let mut prev = h(0.0);
    if prev.abs() > 1e-12 || (h(1.0) - 1.0).abs() > 1e-12 {
        return Err(invalid("h", "must satisfy h(0) = 0 and h(1) = 1"));
    }
    for i in 1..=CHECKS {
        let v = h(i as f64 / CHECKS as f64);
        if !v.is_finite() || v < prev - 1e-12 {
            return Err(invalid("h", "must be nondecreasing on [0, 1]"));
        }
        prev = v;
    }
    let lambda = 2.0 * mu - 1.0;
    let ramp = 1.0 - mu;
    let clamp = move |x: f64| -> f64 {
        if x <= 0.0 {
            0.0
        } else if x >= 1.0 {
            1.0
        } else {
            h(x).clamp(0.0, 1.0)
        }
    };
    Window::new("from_h", width, move |t| {
        let x = t / width;
        if x.abs() <= 0.5 * lambda {
            1.0
        } else if x < 0.0 {
            clamp((x + 0.5) / ramp).sqrt()
        } else {
            (1.0 - clamp((x - 0.5 * lambda) / ramp)).sqrt()
        }
    })
}

/// `ess inf` and `ess sup` of `S(t) = Σ_k |g(t - ak)|²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Frame bounds in the painless case, from `S(t)` on one period `[0, a]`.
pub fn frame_bounds(g: &Window, a: f64) -> Result<FrameBounds> {
    if !(a > 0.0) {
        return Err(invalid("a", "time shift must be positive"));
    }
    if a > g.support() * (1.0 + 1e-12) {
        return Err(invalid(
            "a",
            format!("shift {a} exceeds the window support {}", g.support()),
        ));
    }
    let (lower, upper) = (0..=FRAME_BOUND_POINTS)
        .map(|j| g.overlap_energy(a, a * j as f64 / FRAME_BOUND_POINTS as f64))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s), hi.max(s)));
    if lower <= MIN_LOWER_BOUND {
        return Err(Error::NotAFrame { lower });
    }
    Ok(FrameBounds { lower, upper })
}

/// Canonical dual `γ(t) = b g(t) / S(t)`.
pub fn canonical_dual(g: &Window, a: f64, b: f64) -> Result<Window> {
    frame_bounds(g, a)?;
    let window = g.clone();
    Window::new(format!("{}-dual", g.name()), g.support(), move |t| {
        let s = window.overlap_energy(a, t);
        if s > 0.0 {
            b * window.eval(t) / s
        } else {
            0.0
        }
    })
}

/// Symmetric band `[-B/2, B/2]` and the L2 tail fraction of the window outside it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EssentialBand {
    pub width_hz: f64,
    pub eps: f64,
}

/// Smallest band whose L2 spectral tail fraction is at most `eps_target`.
///
/// This is an L2 stand-in for the S0 approximation criterion; the spectrum is
/// the zero-padded DFT of the window sampled at `α/2048`.
pub fn essential_band(g: &Window, eps_target: f64) -> Result<EssentialBand> {
    if !(eps_target > 0.0) {
        return Err(invalid("eps_target", "must be positive"));
    }
    const PER_SUPPORT: usize = 2048;
    const PAD: usize = 64;
    let dt = g.support() / PER_SUPPORT as f64;
    let samples: Vec<f64> = (0..=PER_SUPPORT)
        .map(|i| g.eval(-g.half_support() + i as f64 * dt))
        .collect();
    let (_, spectrum) = spectral::fourier_samples(&samples, dt, PER_SUPPORT * PAD);
    let energy = spectral::folded_energy(&spectrum);
    let total: f64 = energy.iter().sum();
    if !(total > 0.0) {
        return Err(Error::UndefinedRatio("window has zero energy"));
    }
    let df = 1.0 / (spectrum.len() as f64 * dt);
    let mut inside = 0.0;
    for (j, e) in energy.iter().enumerate() {
        inside += e;
        let eps = ((total - inside).max(0.0) / total).sqrt();
        if eps <= eps_target {
            return Ok(EssentialBand {
                width_hz: 2.0 * j as f64 * df,
                eps,
            });
        }
    }
    Ok(EssentialBand {
        width_hz: 2.0 * (energy.len() - 1) as f64 * df,
        eps: 0.0,
    })
}

/// Estimate of `‖g‖_{S0} = ∫∫ |V_φ g(x, ω)| dx dω` with `φ(t) = e^{-πt²}`.
///
/// Riemann sum over a time-frequency box: `x` spans the window support plus
/// six standard deviations of `φ` on each side, `ω` spans the Nyquist band of
/// the window sampled at `α/512`. The frequency truncation drops the slowly
/// decaying tail of non-smooth windows, so the value is an approximation.
pub fn s0_norm_estimate(g: &Window) -> f64 {
    const PER_SUPPORT: usize = 512;
    const NFFT: usize = 4096;
    let sigma = 1.0 / (2.0 * PI).sqrt();
    let ds = g.support() / PER_SUPPORT as f64;
    let times: Vec<f64> = (0..=PER_SUPPORT).map(|i| -g.half_support() + i as f64 * ds).collect();
    let values: Vec<f64> = times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let w = if i == 0 || i == PER_SUPPORT { 0.5 } else { 1.0 };
            w * g.eval(t)
        })
        .collect();
    let reach = g.half_support() + 6.0 * sigma;
    let dx = (8.0 * ds).min(sigma / 16.0);
    let nx = (2.0 * reach / dx).ceil() as usize;
    let df = 1.0 / (NFFT as f64 * ds);

    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(NFFT);
    let mut buf = vec![num_complex::Complex64::new(0.0, 0.0); NFFT];
    let mut total = 0.0;
    for ix in 0..=nx {
        let x = -reach + ix as f64 * dx;
        buf.iter_mut().for_each(|v| *v = num_complex::Complex64::new(0.0, 0.0));
        for (slot, (&t, &v)) in buf.iter_mut().zip(times.iter().zip(&values)) {
            let d = t - x;
            slot.re = ds * v * (-PI * d * d).exp();
        }
        fft.process(&mut buf);
        total += buf.iter().map(|v| v.norm()).sum::<f64>();
    }
    total * dx * df
}

/// Constants of the truncation bound: `C_ab = (1+1/a)^{1/2}(1+1/b)^{1/2}` and
/// `C̃0 = C_ab² ‖γ‖_{S0} ‖g‖_{S0}` with estimated S0 norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameConstants {
    pub c_ab: f64,
    pub s0_g: f64,
    pub s0_gamma: f64,
    pub c0_tilde: f64,
}

pub fn lattice_constant(a: f64, b: f64) -> f64 {
    (1.0 + 1.0 / a).sqrt() * (1.0 + 1.0 / b).sqrt()
}

pub fn frame_constants(frame: &GaborFrame) -> FrameConstants {
    let c_ab = lattice_constant(frame.a(), frame.b());
    let s0_g = s0_norm_estimate(frame.window());
    let s0_gamma = s0_norm_estimate(frame.dual());
    FrameConstants {
        c_ab,
        s0_g,
        s0_gamma,
        c0_tilde: c_ab * c_ab * s0_gamma * s0_g,
    }
}

/// A Gabor frame `G(g, a, b)` in the painless regime with a synthesis dual.
#[derive(Debug, Clone)]
pub struct GaborFrame {
    kind: String,
    g: Window,
    gamma: Window,
    a: f64,
    b: f64,
    mu: f64,
    bounds: FrameBounds,
    band: EssentialBand,
}

/// Serializable frame summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameMetadata {
    pub kind: String,
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
    pub mu: f64,
    #[serde(rename = "A1")]
    pub a1: f64,
    #[serde(rename = "A2")]
    pub a2: f64,
    #[serde(rename = "B")]
    pub band_hz: f64,
    #[serde(rename = "eps_B")]
    pub eps_b: f64,
}

impl GaborFrame {
    /// Frame with `a = μα`, `b = 1/α` and the canonical dual.
    pub fn painless(g: Window, mu: f64) -> Result<Self> {
        let (a, b) = Self::lattice(&g, mu)?;
        let gamma = canonical_dual(&g, a, b)?;
        Self::with_dual(g, gamma, mu)
    }

    /// Frame with a caller-supplied synthesis dual (which must include the
    /// factor `b`, so that `Σ_k g(t - ak) γ(t - ak) = b`).
    pub fn with_dual(g: Window, gamma: Window, mu: f64) -> Result<Self> {
        let (a, b) = Self::lattice(&g, mu)?;
        let bounds = frame_bounds(&g, a)?;
        let band = essential_band(&g, DEFAULT_BAND_TOLERANCE)?;
        Ok(Self {
            kind: g.name().to_owned(),
            g,
            gamma,
            a,
            b,
            mu,
            bounds,
            band,
        })
    }

    fn lattice(g: &Window, mu: f64) -> Result<(f64, f64)> {
        // μ = 1 is admitted for the box window, which tiles without overlap.
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(invalid("mu", format!("redundancy must lie in (0, 1], got {mu}")));
        }
        Ok((mu * g.support(), 1.0 / g.support()))
    }

    /// Tight cosine frame, `μ = 1/2`, `A1 = A2 = 1`.
    pub fn cosine(width: f64) -> Result<Self> {
        let g = cosine_window(width)?;
        let gamma = g.scaled(1.0 / width);
        Self::with_dual(g, gamma, 0.5).map(|f| f.named("cosine"))
    }

    /// Trapezoid window with its piecewise-quadratic dual, both dilated by
    /// `μW` with `μ = 3/4`, so they are supported on `[-W/2, W/2]`.
    pub fn trapezoid(width: f64) -> Result<Self> {
        let mu = 0.75;
        let scale = mu * width;
        let b = 1.0 / width;
        let g = Window::new("trapezoid", width, move |t| trapezoid_prototype(t / scale))?;
        let gamma = Window::new("trapezoid-dual", width, move |t| {
            b * trapezoid_dual_prototype(t / scale)
        })?;
        Self::with_dual(g, gamma, mu)
    }

    /// `g(t) = B_N(tN/W)` with `μ = 1/N` and the canonical dual.
    pub fn bspline(order: u32, width: f64) -> Result<Self> {
        let g = bspline_profile_window(order, width)?;
        Self::painless(g, 1.0 / order as f64).map(|f| f.named(&format!("bspline{order}")))
    }

    /// Tight frame from a transition profile; the dual is `g/W`.
    pub fn from_h<H>(h: H, mu: f64, width: f64) -> Result<Self>
    where
        H: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let g = window_from_h(h, mu, width)?;
        let gamma = g.scaled(1.0 / width);
        Self::with_dual(g, gamma, mu)
    }

    /// Recomputes the essential band at a different tail tolerance.
    pub fn with_band_tolerance(mut self, eps: f64) -> Result<Self> {
        self.band = essential_band(&self.g, eps)?;
        Ok(self)
    }

    fn named(mut self, kind: &str) -> Self {
        self.kind = kind.to_owned();
        self
    }

    pub fn kind(&self) -> &str {
        &self.kind
    }

    pub fn window(&self) -> &Window {
        &self.g
    }

    pub fn dual(&self) -> &Window {
        &self.gamma
    }

    /// Time shift `a = μα`.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Frequency shift `b = 1/α`.
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn alpha(&self) -> f64 {
        self.g.support()
    }

    pub fn bounds(&self) -> FrameBounds {
        self.bounds
    }

    pub fn band(&self) -> EssentialBand {
        self.band
    }

    pub fn metadata(&self) -> FrameMetadata {
        FrameMetadata {
            kind: self.kind.clone(),
            alpha: self.alpha(),
            a: self.a,
            b: self.b,
            mu: self.mu,
            a1: self.bounds.lower,
            a2: self.bounds.upper,
            band_hz: self.band.width_hz,
            eps_b: self.band.eps,
        }
    }
}

/// See [`GaborFrame::trapezoid`].
pub fn trapezoid_pair(width: f64) -> Result<GaborFrame> {
    GaborFrame::trapezoid(width)
}

/// See [`GaborFrame::bspline`].
pub fn bspline_window(order: u32, width: f64) -> Result<GaborFrame> {
    GaborFrame::bspline(order, width)
}

#[cfg(test)]
mod tests {
    use super::*;

    const W: f64 = 0.13;

    fn sin2(t: f64) -> f64 {
        (0.5 * PI * t).sin().powi(2)
    }

    #[test]
    fn cosine_endpoints_and_energy() {
        let g = cosine_window(W).unwrap();
        assert_eq!(g.eval(0.0), 1.0);
        assert!(g.eval(0.5 * W).abs() < 1e-15);
        assert!(g.eval(-0.5 * W).abs() < 1e-15);
        assert_eq!(g.eval(0.51 * W), 0.0);
        let grid = GridSpec::symmetric(0.1, W / 4096.0).unwrap();
        let sq: Vec<f64> = g.sample(&grid).iter().map(|v| v * v).collect();
        assert!((grid.trapezoid(&sq) - W / 2.0).abs() < 1e-9);
    }

    #[test]
    fn cosine_translates_square_sum_to_one() {
        let g = cosine_window(W).unwrap();
        for i in 0..1000 {
            let t = -0.3 + 0.6 * i as f64 / 1000.0;
            assert!((g.overlap_energy(W / 2.0, t) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn trapezoid_prototype_values() {
        assert_eq!(trapezoid_prototype(0.0), 1.0);
        assert!((trapezoid_prototype(-0.5) - 0.5).abs() < 1e-15);
        assert!((trapezoid_dual_prototype(-0.5) - 1.0).abs() < 1e-15);
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            let s: f64 = (-2..=2).map(|k| trapezoid_prototype(x - k as f64)).sum();
            assert!((s - 1.0).abs() < 1e-14, "x={x}");
            let d: f64 = (-2..=2)
                .map(|k| trapezoid_prototype(x - k as f64) * trapezoid_dual_prototype(x - k as f64))
                .sum();
            assert!((d - 1.0).abs() < 1e-13, "x={x}");
        }
    }

    #[test]
    fn trapezoid_frame_bounds() {
        let frame = trapezoid_pair(W).unwrap();
        let FrameBounds { lower, upper } = frame.bounds();
        assert!((lower - 0.5).abs() < 1e-6, "{lower}");
        assert!((upper - 1.0).abs() < 1e-9);
        assert!((frame.a() - 0.0975).abs() < 1e-15);
        // Dilated partition of unity with shift μW.
        for i in 0..500 {
            let t = -0.2 + 0.4 * i as f64 / 500.0;
            let s: f64 = (-5..=5).map(|k| frame.window().eval(t - frame.a() * k as f64)).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bspline_windows() {
        let box_frame = bspline_window(1, W).unwrap();
        assert_eq!(box_frame.window().eval(0.0), 1.0);
        assert_eq!(box_frame.window().eval(0.064), 1.0);
        let b = box_frame.bounds();
        assert!((b.lower - 1.0).abs() < 1e-12 && (b.upper - 1.0).abs() < 1e-12);

        let tri = bspline_window(2, W).unwrap();
        for i in 0..300 {
            let t = i as f64 * 0.0005;
            let s: f64 = (-6..=6).map(|k| tri.window().eval(t - tri.a() * k as f64)).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        let b5 = bspline_window(5, W).unwrap();
        assert!((b5.a() - 0.026).abs() < 1e-15);
        let bounds = b5.bounds();
        // Σ_k B5(x - k)² ranges over [61/144, 0.43711]; the computed bounds are authoritative.
        assert!((bounds.lower - 61.0 / 144.0).abs() < 1e-6, "{bounds:?}");
        assert!((bounds.upper - 0.437_106_662).abs() < 1e-6, "{bounds:?}");
    }

    #[test]
    fn from_h_reproduces_cosine() {
        let g = window_from_h(sin2, 0.5, W).unwrap();
        let c = cosine_window(W).unwrap();
        for i in 0..=2000 {
            let t = -0.07 + 0.14 * i as f64 / 2000.0;
            assert!((g.eval(t) - c.eval(t)).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn from_h_is_tight() {
        for mu in [0.5, 0.6, 0.75] {
            let g = window_from_h(sin2, mu, W).unwrap();
            for i in 0..1000 {
                let t = -0.2 + 0.4 * i as f64 / 1000.0;
                let s = g.overlap_energy(mu * W, t);
                assert!((s - 1.0).abs() < 1e-10, "mu={mu} t={t} s={s}");
            }
        }
        // λ = 0: no plateau beyond t = 0.
        let smooth = |t: f64| t * t * (3.0 - 2.0 * t);
        let g = window_from_h(smooth, 0.5, W).unwrap();
        assert_eq!(g.eval(0.0), 1.0);
        assert!(g.eval(0.01) < 1.0);
    }

    #[test]
    fn from_h_rejects_bad_input() {
        let wiggly = |t: f64| t + 0.3 * (6.0 * PI * t).sin();
        assert!(window_from_h(wiggly, 0.5, W).is_err());
        assert!(window_from_h(sin2, 0.4, W).is_err());
        assert!(window_from_h(sin2, 1.0, W).is_err());
    }

    #[test]
    fn not_a_frame() {
        let g = cosine_window(W).unwrap();
        assert!(matches!(frame_bounds(&g, W), Err(Error::NotAFrame { .. })));
        let b = box_window(W).unwrap();
        assert!(frame_bounds(&b, 1.5 * W).is_err());
    }

    #[test]
    fn canonical_duals() {
        let g = cosine_window(W).unwrap();
        let gamma = canonical_dual(&g, W / 2.0, 1.0 / W).unwrap();
        for i in 0..200 {
            let t = -0.07 + 0.14 * i as f64 / 200.0;
            assert!((gamma.eval(t) - g.eval(t) / W).abs() < 1e-10);
        }
        let bx = box_window(W).unwrap();
        let gamma = canonical_dual(&bx, W, 1.0 / W).unwrap();
        assert!((gamma.eval(0.01) - 1.0 / W).abs() < 1e-12);
    }

    #[test]
    fn cosine_band_near_sixteen_hz() {
        let band = essential_band(&cosine_window(W).unwrap(), DEFAULT_BAND_TOLERANCE).unwrap();
        assert!((band.width_hz - 16.0).abs() < 1.0, "{band:?}");
        assert!(band.eps <= DEFAULT_BAND_TOLERANCE);
        let wide = essential_band(&cosine_window(W).unwrap(), 0.999).unwrap();
        assert_eq!(wide.width_hz, 0.0);
    }

    #[test]
    fn box_band_exceeds_cosine_band() {
        for eps in [0.05, 0.1, 0.2] {
            let bx = essential_band(&box_window(W).unwrap(), eps).unwrap();
            let cs = essential_band(&cosine_window(W).unwrap(), eps).unwrap();
            assert!(bx.width_hz > cs.width_hz, "eps={eps}");
        }
    }

    #[test]
    fn lattice_constant_values() {
        assert!((lattice_constant(1.0, 1.0) - 2.0).abs() < 1e-15);
        let a: f64 = 0.065;
        let b: f64 = 1.0 / 0.13;
        let expected = ((1.0 + 1.0 / a) * (1.0 + 1.0 / b)).sqrt();
        assert!((lattice_constant(a, b) - expected).abs() < 1e-12);
    }

    #[test]
    fn gaussian_s0_norm() {
        // |V_φ φ(x, ω)| = 2^{-1/2} e^{-π(x² + ω²)/2}, whose integral is √2.
        let phi = Window::new("gauss", 14.0, |t| (-PI * t * t).exp()).unwrap();
        let est = s0_norm_estimate(&phi);
        assert!((est - 2f64.sqrt()).abs() < 1e-3 * 2f64.sqrt(), "{est}");
    }

    #[test]
    fn dilation_consistency() {
        for frame in [
            GaborFrame::cosine(W).unwrap(),
            GaborFrame::trapezoid(W).unwrap(),
            GaborFrame::bspline(5, W).unwrap(),
        ] {
            let name = frame.kind().to_owned();
            let wide = match name.as_str() {
                "cosine" => GaborFrame::cosine(2.0 * W),
                "trapezoid" => GaborFrame::trapezoid(2.0 * W),
                _ => GaborFrame::bspline(5, 2.0 * W),
            }
            .unwrap();
            for i in 0..=400 {
                let t = -0.07 + 0.14 * i as f64 / 400.0;
                assert!(
                    (frame.window().eval(t) - wide.window().eval(2.0 * t)).abs() < 1e-12,
                    "{name} t={t}"
                );
            }
        }
    }
}
