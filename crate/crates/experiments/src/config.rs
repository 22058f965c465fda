//! TOML experiment configuration.
//!
//! Every table and key is optional; missing values fall back to the
//! frame-comparison scenario (three pulses of width 0.13 s in an 8 s interval,
//! band 20 Hz, sampled on a 1/2048 s grid).

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use xsampler_core::gabor_frames::{GaborFrame, DEFAULT_BAND_TOLERANCE};
use xsampler_core::signal_model::{GridSpec, ModelParams, Placement, PulseShape};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot parse {path}: {source}")]
    Parse { path: String, source: Box<toml::de::Error> },
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_owned(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameChoice {
    Trapezoid,
    Cosine,
    Bspline5,
}

impl FrameChoice {
    pub fn build(self, width: f64, band_tolerance: f64) -> xsampler_core::Result<GaborFrame> {
        let frame = match self {
            FrameChoice::Trapezoid => GaborFrame::trapezoid(width)?,
            FrameChoice::Cosine => GaborFrame::cosine(width)?,
            FrameChoice::Bspline5 => GaborFrame::bspline(5, width)?,
        };
        frame.with_band_tolerance(band_tolerance)
    }

    pub fn label(self) -> &'static str {
        match self {
            FrameChoice::Trapezoid => "trapezoid",
            FrameChoice::Cosine => "cosine",
            FrameChoice::Bspline5 => "bspline5",
        }
    }

    /// Frequency extent used for this window in the frame-comparison runs.
    pub fn default_l0(self) -> usize {
        match self {
            FrameChoice::Trapezoid => 5,
            FrameChoice::Cosine | FrameChoice::Bspline5 => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub pulses: usize,
    pub width: f64,
    pub beta: f64,
    pub omega: f64,
    /// Declared spectral tail of the class; informational only.
    pub eps_omega: f64,
    pub amplitude: f64,
    pub allow_overlap: bool,
    /// `bspline<N>` or `cosine`, cycled over the pulses.
    pub shapes: Vec<String>,
    /// Tail tolerance defining the essential band of each window.
    pub band_tolerance: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            pulses: 3,
            width: 0.13,
            beta: 8.0,
            omega: 20.0,
            eps_omega: 0.15,
            amplitude: 1.0,
            allow_overlap: false,
            shapes: vec!["bspline2".into(), "bspline4".into(), "cosine".into()],
            band_tolerance: DEFAULT_BAND_TOLERANCE,
        }
    }
}

impl ModelConfig {
    pub fn params(&self) -> ModelParams {
        ModelParams {
            pulses: self.pulses,
            width: self.width,
            beta: self.beta,
            omega: self.omega,
            eps_omega: self.eps_omega,
        }
    }

    pub fn placement(&self) -> Placement {
        Placement {
            allow_overlap: self.allow_overlap,
            amplitude: self.amplitude,
        }
    }

    pub fn pulse_shapes(&self) -> Result<Vec<PulseShape>, ConfigError> {
        self.shapes.iter().map(|s| parse_shape(s)).collect()
    }
}

fn parse_shape(name: &str) -> Result<PulseShape, ConfigError> {
    let name = name.trim();
    if name == "cosine" {
        return Ok(PulseShape::Cosine);
    }
    match name.strip_prefix("bspline").map(str::parse::<u32>) {
        Some(Ok(order)) if (1..=12).contains(&order) => Ok(PulseShape::BSpline(order)),
        _ => Err(invalid(
            "model.shapes",
            format!("unknown shape {name:?} (expected cosine or bspline1..bspline12)"),
        )),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub dt: f64,
    pub half_width: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            dt: 1.0 / 2048.0,
            half_width: 4.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioRow {
    pub frame: FrameChoice,
    pub m: usize,
    pub l0: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Table2Config {
    pub rows: Vec<ScenarioRow>,
}

impl Default for Table2Config {
    fn default() -> Self {
        let row = |frame: FrameChoice, m| ScenarioRow {
            frame,
            m,
            l0: Some(frame.default_l0()),
        };
        Self {
            rows: vec![
                row(FrameChoice::Trapezoid, 22),
                row(FrameChoice::Cosine, 25),
                row(FrameChoice::Bspline5, 65),
            ],
        }
    }
}

/// An SNR in dB, written as a number or as `"inf"` for the noiseless case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Snr {
    Db(f64),
    Label(SnrLabel),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnrLabel {
    Inf,
}

impl Snr {
    pub fn db(self) -> f64 {
        match self {
            Snr::Db(v) => v,
            Snr::Label(SnrLabel::Inf) => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub frame: FrameChoice,
    pub l0: Option<usize>,
    pub m_values: Vec<usize>,
    pub snr_db: Vec<Snr>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            frame: FrameChoice::Cosine,
            l0: Some(4),
            m_values: (10..=45).step_by(5).collect(),
            snr_db: [5.0, 10.0, 15.0, 20.0, 25.0]
                .into_iter()
                .map(Snr::Db)
                .chain([Snr::Label(SnrLabel::Inf)])
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuantConfig {
    pub frame: FrameChoice,
    pub l0: Option<usize>,
    pub m: usize,
    /// Quantizer resolutions; the unquantized case is always added.
    pub bits: Vec<u32>,
    /// Rows whose norm is at least this fraction of the largest row count
    /// as the support a recovery has to find.
    pub significant_row: f64,
}

impl Default for QuantConfig {
    fn default() -> Self {
        Self {
            frame: FrameChoice::Cosine,
            l0: Some(4),
            m: 25,
            bits: (1..=12).collect(),
            significant_row: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemoConfig {
    pub frame: FrameChoice,
    pub l0: Option<usize>,
    pub m: usize,
    pub snr_db: Option<Snr>,
    pub bits: Option<u32>,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            frame: FrameChoice::Cosine,
            l0: Some(4),
            m: 25,
            snr_db: None,
            bits: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Base seed; trial `i` uses `seed + i` unless `seeds` is given.
    pub seed: u64,
    pub trials: usize,
    /// Explicit trial seeds, overriding `seed` and `trials`.
    pub seeds: Option<Vec<u64>>,
    pub model: ModelConfig,
    pub grid: GridConfig,
    pub table2: Table2Config,
    pub noise: NoiseConfig,
    pub quant: QuantConfig,
    pub demo: DemoConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 1,
            trials: 25,
            seeds: None,
            model: ModelConfig::default(),
            grid: GridConfig::default(),
            table2: Table2Config::default(),
            noise: NoiseConfig::default(),
            quant: QuantConfig::default(),
            demo: DemoConfig::default(),
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text).map_err(|e| match e {
            ConfigError::Parse { source, .. } => ConfigError::Parse {
                path: path.display().to_string(),
                source,
            },
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Config = toml::from_str(text).map_err(|source| ConfigError::Parse {
            path: "<string>".into(),
            source: Box::new(source),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Trial seeds in run order.
    pub fn trial_seeds(&self) -> Vec<u64> {
        match &self.seeds {
            Some(list) => list.clone(),
            None => (0..self.trials as u64).map(|i| self.seed.wrapping_add(i)).collect(),
        }
    }

    pub fn grid_spec(&self) -> Result<GridSpec, ConfigError> {
        GridSpec::symmetric(self.grid.half_width, self.grid.dt).map_err(|e| invalid("grid", e.to_string()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match &self.seeds {
            Some(list) if list.is_empty() => return Err(invalid("seeds", "must not be empty")),
            None if self.trials == 0 => return Err(invalid("trials", "must be at least 1")),
            _ => {}
        }
        let m = &self.model;
        m.params().validate().map_err(|e| invalid("model", e.to_string()))?;
        if m.pulses == 0 {
            return Err(invalid("model.pulses", "must be at least 1"));
        }
        if !m.allow_overlap && m.pulses as f64 * m.width > m.beta {
            return Err(invalid(
                "model.pulses",
                "pulses do not fit into the interval without overlap",
            ));
        }
        if !(m.amplitude.is_finite() && m.amplitude != 0.0) {
            return Err(invalid("model.amplitude", "must be finite and non-zero"));
        }
        if !(m.band_tolerance > 0.0 && m.band_tolerance < 1.0) {
            return Err(invalid("model.band_tolerance", "must lie in (0, 1)"));
        }
        if m.shapes.is_empty() {
            return Err(invalid("model.shapes", "must name at least one shape"));
        }
        m.pulse_shapes()?;

        let grid = self.grid_spec()?;
        if !grid.covers(-0.5 * m.beta, 0.5 * m.beta) {
            return Err(invalid("grid.half_width", "grid must cover [-beta/2, beta/2]"));
        }

        if self.table2.rows.is_empty() {
            return Err(invalid("table2.rows", "must not be empty"));
        }
        for row in &self.table2.rows {
            if row.m == 0 {
                return Err(invalid("table2.rows.m", "must be at least 1"));
            }
        }
        if self.noise.m_values.is_empty() || self.noise.m_values.contains(&0) {
            return Err(invalid(
                "noise.m_values",
                "must be a non-empty list of positive integers",
            ));
        }
        if self.noise.snr_db.is_empty() || self.noise.snr_db.iter().any(|s| s.db().is_nan()) {
            return Err(invalid(
                "noise.snr_db",
                "must be a non-empty list of numbers or \"inf\"",
            ));
        }
        if self.quant.m == 0 {
            return Err(invalid("quant.m", "must be at least 1"));
        }
        if self.quant.bits.iter().any(|&b| !(1..=52).contains(&b)) {
            return Err(invalid("quant.bits", "entries must lie in 1..=52"));
        }
        if !(0.0..1.0).contains(&self.quant.significant_row) {
            return Err(invalid("quant.significant_row", "must lie in [0, 1)"));
        }
        if self.demo.m == 0 {
            return Err(invalid("demo.m", "must be at least 1"));
        }
        if let Some(s) = self.demo.snr_db {
            if s.db().is_nan() {
                return Err(invalid("demo.snr_db", "is NaN"));
            }
        }
        if let Some(b) = self.demo.bits {
            if !(1..=52).contains(&b) {
                return Err(invalid("demo.bits", "must lie in 1..=52"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_the_default_scenario() {
        let cfg = Config::parse("").unwrap();
        assert_eq!(cfg, Config::default());
        assert_eq!(cfg.trial_seeds().len(), 25);
        assert_eq!(cfg.table2.rows[1].m, 25);
    }

    #[test]
    fn snr_accepts_numbers_and_inf() {
        let cfg = Config::parse("[noise]\nsnr_db = [5, 12.5, \"inf\"]\n").unwrap();
        let db: Vec<f64> = cfg.noise.snr_db.iter().map(|s| s.db()).collect();
        assert_eq!(db, vec![5.0, 12.5, f64::INFINITY]);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(matches!(Config::parse("sed = 3"), Err(ConfigError::Parse { .. })));
        assert!(matches!(
            Config::parse("[model]\nshapes = [\"gauss\"]"),
            Err(ConfigError::Invalid { .. })
        ));
        assert!(Config::parse("trials = 0").is_err());
        assert!(Config::parse("[model]\npulses = 100").is_err());
        assert!(Config::parse("[quant]\nbits = [0]").is_err());
        assert!(Config::parse("[grid]\nhalf_width = 2.0").is_err());
    }

    #[test]
    fn explicit_seeds_take_precedence() {
        let cfg = Config::parse("seed = 9\ntrials = 4\nseeds = [3, 1]").unwrap();
        assert_eq!(cfg.trial_seeds(), vec![3, 1]);
        let cfg = Config::parse("seed = 9\ntrials = 3").unwrap();
        assert_eq!(cfg.trial_seeds(), vec![9, 10, 11]);
    }
}
