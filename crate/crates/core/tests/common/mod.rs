#![allow(dead_code)]

use xsampler_core::signal_model::{generate_multipulse, GridSpec, ModelParams, Multipulse, Placement, PulseShape};

pub const W: f64 = 0.13;
pub const BETA: f64 = 8.0;

pub fn grid() -> GridSpec {
    GridSpec::symmetric(4.5, 1.0 / 2048.0).unwrap()
}

pub fn params(pulses: usize) -> ModelParams {
    ModelParams {
        pulses,
        width: W,
        beta: BETA,
        omega: 20.0,
        eps_omega: 0.15,
    }
}

pub fn shapes() -> Vec<PulseShape> {
    vec![PulseShape::BSpline(2), PulseShape::BSpline(4), PulseShape::Cosine]
}

pub fn multipulse(seed: u64) -> Multipulse {
    generate_multipulse(&params(3), &shapes(), &grid(), seed, Placement::default()).unwrap()
}
