mod common;

use std::f64::consts::PI;

use common::{grid, multipulse, BETA, W};
use num_complex::Complex64;
use xsampler_core::gabor_frames::{frame_constants, GaborFrame};
use xsampler_core::gabor_transform::{
    analyze, frame_extent, synthesize, synthesize_complex, truncation_bound, LatticeExtent,
};
use xsampler_core::signal_model::{relative_error, tail_energy_fraction, SampledSignal};

fn sin2(t: f64) -> f64 {
    (0.5 * PI * t).sin().powi(2)
}

fn frames() -> Vec<GaborFrame> {
    vec![
        GaborFrame::cosine(W).unwrap(),
        GaborFrame::trapezoid(W).unwrap(),
        GaborFrame::bspline(5, W).unwrap(),
        GaborFrame::bspline(1, W).unwrap(),
        GaborFrame::from_h(sin2, 0.6, W).unwrap(),
    ]
}

/// Cosine window against itself and its first shift, in closed form:
/// `z_{0,l} = W/2 [l=0] + W/4 [|l|=1]` and
/// `z_{1,l} = W/(4π) ((1 + (-1)^l)/(1 - l²) - i π/2 sgn(l) [|l|=1])`.
#[test]
fn cosine_coefficients_match_closed_form() {
    let frame = GaborFrame::cosine(W).unwrap();
    let f = SampledSignal::from_fn(grid(), BETA, |t| frame.window().eval(t)).unwrap();
    let extent = LatticeExtent::new(62, 6);
    let z = analyze(&f, &frame, extent).unwrap();
    for l in -6i64..=6 {
        let z0 = match l.abs() {
            0 => W / 2.0,
            1 => W / 4.0,
            _ => 0.0,
        };
        assert!((z.get(0, l) - Complex64::new(z0, 0.0)).norm() < 1e-8, "l={l}");

        let lf = l as f64;
        let re = if l.abs() == 1 {
            0.0
        } else {
            (1.0 + (-1f64).powi(l as i32)) / (1.0 - lf * lf)
        };
        let im = if l.abs() == 1 { -0.5 * PI * lf.signum() } else { 0.0 };
        let z1 = Complex64::new(re, im) * (W / (4.0 * PI));
        assert!((z.get(1, l) - z1).norm() < 1e-5 * W, "l={l}: {} vs {z1}", z.get(1, l));
        assert!((z.get(-1, l) - z1.conj()).norm() < 1e-5 * W);
        assert_eq!(z.get(2, l), Complex64::new(0.0, 0.0));
    }
}

#[test]
fn frame_inequality_on_random_signals() {
    for frame in frames() {
        let extent = frame_extent(&frame, BETA, 20.0, Some(60)).unwrap();
        let bounds = frame.bounds();
        for seed in 0..20 {
            let f = multipulse(seed).signal;
            let z = analyze(&f, &frame, extent).unwrap();
            let ratio = frame.b() * z.energy() / f.norm().powi(2);
            assert!(
                ratio >= 0.98 * bounds.lower && ratio <= 1.02 * bounds.upper,
                "{} seed {seed}: {ratio} outside [{}, {}]",
                frame.kind(),
                bounds.lower,
                bounds.upper
            );
        }
    }
}

#[test]
fn wide_lattice_round_trip() {
    // The box window cuts pulses with jumps, whose slow spectral decay needs far more frequencies.
    for frame in frames().into_iter().filter(|f| f.kind() != "bspline1") {
        let extent = frame_extent(&frame, BETA, 20.0, Some(60)).unwrap();
        let f = multipulse(11).signal;
        let z = analyze(&f, &frame, extent).unwrap();
        let f_hat = synthesize(&z, &frame, &grid()).unwrap();
        let err = relative_error(&f, &f_hat).unwrap();
        assert!(err < 5e-3, "{}: {err}", frame.kind());
    }
}

#[test]
fn imaginary_residue_is_negligible() {
    let frame = GaborFrame::trapezoid(W).unwrap();
    let extent = frame_extent(&frame, BETA, 20.0, Some(5)).unwrap();
    let f = multipulse(2).signal;
    let z = analyze(&f, &frame, extent).unwrap();
    let full = synthesize_complex(&z, &frame, &grid());
    let re: f64 = full.iter().map(|v| v.re * v.re).sum();
    let im: f64 = full.iter().map(|v| v.im * v.im).sum();
    assert!((im / re).sqrt() < 1e-8);
}

#[test]
fn truncated_synthesis_respects_truncation_bound() {
    for frame in frames().into_iter().take(3) {
        let constants = frame_constants(&frame);
        let l0 = if frame.kind() == "trapezoid" { 5 } else { 4 };
        let extent = frame_extent(&frame, BETA, 20.0, Some(l0)).unwrap();
        for seed in 0..5 {
            let f = multipulse(seed).signal;
            let eps_omega = tail_energy_fraction(&f, 20.0).unwrap();
            let z = analyze(&f, &frame, extent).unwrap();
            let f_hat = synthesize(&z, &frame, &grid()).unwrap();
            let err = relative_error(&f, &f_hat).unwrap() * f.norm();
            let bound = truncation_bound(&constants, eps_omega, frame.band().eps, f.norm());
            assert!(err <= bound, "{}: {err} > {bound}", frame.kind());
            assert!(err / f.norm() < 0.02, "{}", frame.kind());
        }
    }
}

#[test]
fn rows_follow_pulse_locations() {
    for frame in [GaborFrame::cosine(W).unwrap(), GaborFrame::trapezoid(W).unwrap()] {
        let extent = frame_extent(&frame, BETA, 20.0, Some(4)).unwrap();
        let per_pulse = (2.0 / frame.mu()).ceil() as usize;
        for seed in 0..10 {
            let mp = multipulse(seed);
            let z = analyze(&mp.signal, &frame, extent).unwrap();
            let rows = z.nonzero_rows();
            assert!(rows.len() <= per_pulse * mp.pulses.len());
            for pulse in &mp.pulses {
                let touching: Vec<i64> = rows
                    .iter()
                    .copied()
                    .filter(|&k| (frame.a() * k as f64 - pulse.center).abs() < W)
                    .collect();
                assert!(!touching.is_empty() && touching.len() <= per_pulse);
            }
            let peak = z.z().iter().map(|v| v.norm()).fold(0.0, f64::max);
            for r in 0..extent.k() {
                let k = extent.shift_k(r);
                let overlaps = mp.pulses.iter().any(|p| (frame.a() * k as f64 - p.center).abs() < W);
                if !overlaps {
                    assert!(z.z().row(r).iter().all(|v| v.norm() <= 1e-10 * peak));
                }
            }
        }
    }
}
