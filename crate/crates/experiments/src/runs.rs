//! The four experiment drivers and their CSV / SVG / JSON outputs.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use xsampler_core::io::{fmt_f64, write_json, write_table};
use xsampler_core::signal_model::tail_energy_fraction;

use crate::config::{Config, FrameChoice};
use crate::pipeline::{run_trial, run_trial_full, spread, Perturbation, Scenario, Spread, TrialOutcome};
use crate::svg::LineChart;
use crate::RunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Table2,
    Noise,
    Quant,
    Demo,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Table2 => "table2",
            Experiment::Noise => "noise",
            Experiment::Quant => "quant",
            Experiment::Demo => "demo",
        }
    }
}

/// Runs `scenario` on every seed in parallel; results keep the seed order.
fn run_seeds(
    sc: &Scenario,
    seeds: &[u64],
    perturbation: Perturbation,
    significant_row: f64,
) -> Result<Vec<TrialOutcome>, RunError> {
    seeds
        .par_iter()
        .map(|&seed| {
            run_trial(sc, seed, perturbation, significant_row)
                .map_err(|e| RunError::numerical(format!("{} frame, M = {}, seed {seed}", sc.choice.label(), sc.m), e))
        })
        .collect()
}

fn rate(outcomes: &[TrialOutcome], hit: impl Fn(&TrialOutcome) -> bool) -> f64 {
    outcomes.iter().filter(|o| hit(o)).count() as f64 / outcomes.len().max(1) as f64
}

// ---------------------------------------------------------------------------
// Frame comparison

/// Lattice sizes and error listed for each window in the reference comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceRow {
    pub k: usize,
    pub l: usize,
    pub samples_full: usize,
    pub samples_sparse: usize,
    pub error: f64,
}

pub fn reference_row(choice: FrameChoice) -> ReferenceRow {
    match choice {
        FrameChoice::Trapezoid => ReferenceRow {
            k: 83,
            l: 11,
            samples_full: 913,
            samples_sparse: 242,
            error: 0.0127,
        },
        FrameChoice::Cosine => ReferenceRow {
            k: 125,
            l: 9,
            samples_full: 1125,
            samples_sparse: 225,
            error: 0.0126,
        },
        FrameChoice::Bspline5 => ReferenceRow {
            k: 303,
            l: 9,
            samples_full: 2727,
            samples_sparse: 585,
            error: 0.0120,
        },
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Table2Row {
    pub window: String,
    pub mu: f64,
    pub a: f64,
    pub b: f64,
    pub band_hz: f64,
    pub k: usize,
    pub l: usize,
    pub m: usize,
    pub sparsity: usize,
    pub samples_full: usize,
    pub samples_sparse: usize,
    pub error: Spread,
    pub truncation_error: Spread,
    pub support_rate: f64,
    pub reference: ReferenceRow,
    pub note: Option<String>,
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Table2Report {
    pub rows: Vec<Table2Row>,
}

pub fn run_table2(cfg: &Config) -> Result<Table2Report, RunError> {
    let seeds = cfg.trial_seeds();
    let mut rows = Vec::new();
    for row in &cfg.table2.rows {
        let sc = Scenario::new(cfg, row.frame, row.m, row.l0)?;
        let outcomes = run_seeds(&sc, &seeds, Perturbation::default(), cfg.quant.significant_row)?;
        let errors: Vec<f64> = outcomes.iter().map(|o| o.relative_error).collect();
        let truncation: Vec<f64> = outcomes.iter().map(|o| o.truncation_error).collect();
        let reference = reference_row(row.frame);
        let note = (sc.extent.k() != reference.k).then(|| {
            format!(
                "K = 2K0 + 1 = {} from K0 = ceil((beta + W)/(2 W mu)) - 1; the reference table lists K = {}",
                sc.extent.k(),
                reference.k
            )
        });
        rows.push(Table2Row {
            window: row.frame.label().to_owned(),
            mu: sc.frame.mu(),
            a: sc.frame.a(),
            b: sc.frame.b(),
            band_hz: sc.frame.band().width_hz,
            k: sc.extent.k(),
            l: sc.extent.l(),
            m: sc.m,
            sparsity: sc.sparsity,
            samples_full: sc.full_count(),
            samples_sparse: sc.sparse_count(),
            error: spread(&errors),
            truncation_error: spread(&truncation),
            support_rate: rate(&outcomes, |o| o.exact_support),
            reference,
            note,
            errors,
        });
    }
    Ok(Table2Report { rows })
}

impl Table2Report {
    pub fn console_table(&self) -> String {
        let mut s = format!(
            "{:<10} {:>28} {:>26} {:>28}\n",
            "window", "samples without sparsity", "samples with sparsity", "recovery error (IQR)"
        );
        for r in &self.rows {
            s.push_str(&format!(
                "{:<10} {:>28} {:>26} {:>28}\n",
                r.window,
                format!("{} * {} = {}", r.k, r.l, r.samples_full),
                format!("{} * {} = {}", r.m, r.l, r.samples_sparse),
                format!("{:.4} ({:.4}-{:.4})", r.error.median, r.error.q1, r.error.q3),
            ));
        }
        for r in &self.rows {
            if let Some(note) = &r.note {
                s.push_str(&format!("note ({}): {note}\n", r.window));
            }
        }
        s
    }

    fn write(&self, dir: &Path) -> Result<(), RunError> {
        let header = [
            "window",
            "mu",
            "k",
            "l",
            "samples_full",
            "m",
            "samples_sparse",
            "sparsity",
            "band_hz",
            "median_error",
            "q1_error",
            "q3_error",
            "median_truncation_error",
            "support_rate",
            "reference_k",
            "reference_samples_full",
            "reference_samples_sparse",
            "reference_error",
        ];
        let rows = self.rows.iter().map(|r| {
            vec![
                r.window.clone(),
                fmt_f64(r.mu),
                r.k.to_string(),
                r.l.to_string(),
                r.samples_full.to_string(),
                r.m.to_string(),
                r.samples_sparse.to_string(),
                r.sparsity.to_string(),
                fmt_f64(r.band_hz),
                fmt_f64(r.error.median),
                fmt_f64(r.error.q1),
                fmt_f64(r.error.q3),
                fmt_f64(r.truncation_error.median),
                fmt_f64(r.support_rate),
                r.reference.k.to_string(),
                r.reference.samples_full.to_string(),
                r.reference.samples_sparse.to_string(),
                fmt_f64(r.reference.error),
            ]
        });
        write_csv(dir, "table2", &header, rows)?;

        let mut chart = LineChart::new(
            "Recovery error per trial, sorted",
            "trial rank",
            "relative L2 error",
            true,
        );
        for r in &self.rows {
            let mut sorted = r.errors.clone();
            sorted.sort_by(f64::total_cmp);
            chart.push(
                r.window.clone(),
                sorted.iter().enumerate().map(|(i, &e)| ((i + 1) as f64, e)).collect(),
            );
        }
        write_svg(dir, "table2", &chart)
    }
}

// ---------------------------------------------------------------------------
// Noise sweep

#[derive(Debug, Clone, Serialize)]
pub struct NoiseCell {
    pub m: usize,
    pub snr_db: f64,
    pub error: Spread,
    pub support_rate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NoiseReport {
    pub window: String,
    pub k: usize,
    pub l: usize,
    pub sparsity: usize,
    pub trials: usize,
    pub cells: Vec<NoiseCell>,
}

impl NoiseReport {
    pub fn cell(&self, m: usize, snr_db: f64) -> Option<&NoiseCell> {
        self.cells.iter().find(|c| c.m == m && c.snr_db == snr_db)
    }
}

pub fn run_noise_sweep(cfg: &Config) -> Result<NoiseReport, RunError> {
    let seeds = cfg.trial_seeds();
    let nc = &cfg.noise;
    let scenarios = nc
        .m_values
        .iter()
        .map(|&m| Scenario::new(cfg, nc.frame, m, nc.l0))
        .collect::<Result<Vec<_>, _>>()?;
    let mut cells = Vec::new();
    for sc in &scenarios {
        for snr in &nc.snr_db {
            let perturbation = Perturbation {
                snr_db: snr.db(),
                bits: None,
            };
            let outcomes = run_seeds(sc, &seeds, perturbation, cfg.quant.significant_row)?;
            let errors: Vec<f64> = outcomes.iter().map(|o| o.relative_error).collect();
            cells.push(NoiseCell {
                m: sc.m,
                snr_db: snr.db(),
                error: spread(&errors),
                support_rate: rate(&outcomes, |o| o.exact_support),
            });
        }
    }
    let first = &scenarios[0];
    Ok(NoiseReport {
        window: nc.frame.label().to_owned(),
        k: first.extent.k(),
        l: first.extent.l(),
        sparsity: first.sparsity,
        trials: seeds.len(),
        cells,
    })
}

impl NoiseReport {
    fn write(&self, dir: &Path, snr_order: &[f64]) -> Result<(), RunError> {
        let header = [
            "m",
            "snr_db",
            "median_error",
            "q1_error",
            "q3_error",
            "support_rate",
            "trials",
        ];
        let rows = self.cells.iter().map(|c| {
            vec![
                c.m.to_string(),
                fmt_f64(c.snr_db),
                fmt_f64(c.error.median),
                fmt_f64(c.error.q1),
                fmt_f64(c.error.q3),
                fmt_f64(c.support_rate),
                self.trials.to_string(),
            ]
        });
        write_csv(dir, "noise", &header, rows)?;

        let mut chart = LineChart::new(
            &format!("Median recovery error, {} window", self.window),
            "number of channels M",
            "relative L2 error",
            true,
        );
        for &snr in snr_order {
            let points = self
                .cells
                .iter()
                .filter(|c| c.snr_db == snr)
                .map(|c| (c.m as f64, c.error.median))
                .collect();
            let name = if snr.is_infinite() {
                "noiseless".to_owned()
            } else {
                format!("SNR {snr} dB")
            };
            chart.push(name, points);
        }
        write_svg(dir, "noise", &chart)
    }
}

// ---------------------------------------------------------------------------
// Quantization sweep

#[derive(Debug, Clone, Serialize)]
pub struct QuantRow {
    /// `None` is the unquantized reference.
    pub bits: Option<u32>,
    pub coefficient_error: Spread,
    pub reconstruction_error: Spread,
    /// Trials in which every row above the significance threshold was found.
    pub support_rate: f64,
    /// Trials in which every nonzero row was found.
    pub exact_support_rate: f64,
    /// Pulses whose nearest lattice row was found.
    pub location_rate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct QuantReport {
    pub window: String,
    pub m: usize,
    pub k: usize,
    pub l: usize,
    pub sparsity: usize,
    pub significant_row: f64,
    pub trials: usize,
    pub rows: Vec<QuantRow>,
}

impl QuantReport {
    pub fn row(&self, bits: Option<u32>) -> Option<&QuantRow> {
        self.rows.iter().find(|r| r.bits == bits)
    }
}

pub fn run_quantization(cfg: &Config) -> Result<QuantReport, RunError> {
    let seeds = cfg.trial_seeds();
    let qc = &cfg.quant;
    let sc = Scenario::new(cfg, qc.frame, qc.m, qc.l0)?;
    let mut levels: Vec<Option<u32>> = qc.bits.iter().copied().map(Some).collect();
    levels.push(None);
    let mut rows = Vec::new();
    for bits in levels {
        let perturbation = Perturbation {
            snr_db: f64::INFINITY,
            bits,
        };
        let outcomes = run_seeds(&sc, &seeds, perturbation, qc.significant_row)?;
        let coef: Vec<f64> = outcomes.iter().map(|o| o.coefficient_error).collect();
        let recon: Vec<f64> = outcomes.iter().map(|o| o.relative_error).collect();
        rows.push(QuantRow {
            bits,
            coefficient_error: spread(&coef),
            reconstruction_error: spread(&recon),
            support_rate: rate(&outcomes, |o| o.significant_support),
            exact_support_rate: rate(&outcomes, |o| o.exact_support),
            location_rate: outcomes.iter().map(|o| o.location_rate).sum::<f64>() / outcomes.len() as f64,
        });
    }
    Ok(QuantReport {
        window: qc.frame.label().to_owned(),
        m: sc.m,
        k: sc.extent.k(),
        l: sc.extent.l(),
        sparsity: sc.sparsity,
        significant_row: qc.significant_row,
        trials: seeds.len(),
        rows,
    })
}

impl QuantReport {
    fn write(&self, dir: &Path) -> Result<(), RunError> {
        let header = [
            "bits",
            "median_coefficient_error",
            "q1_coefficient_error",
            "q3_coefficient_error",
            "median_reconstruction_error",
            "support_rate",
            "exact_support_rate",
            "location_rate",
            "trials",
        ];
        let rows = self.rows.iter().map(|r| {
            vec![
                r.bits.map_or_else(|| "none".to_owned(), |b| b.to_string()),
                fmt_f64(r.coefficient_error.median),
                fmt_f64(r.coefficient_error.q1),
                fmt_f64(r.coefficient_error.q3),
                fmt_f64(r.reconstruction_error.median),
                fmt_f64(r.support_rate),
                fmt_f64(r.exact_support_rate),
                fmt_f64(r.location_rate),
                self.trials.to_string(),
            ]
        });
        write_csv(dir, "quant", &header, rows)?;

        let quantized: Vec<&QuantRow> = self.rows.iter().filter(|r| r.bits.is_some()).collect();
        let series = |f: &dyn Fn(&QuantRow) -> f64| -> Vec<(f64, f64)> {
            quantized.iter().map(|r| (r.bits.unwrap_or(0) as f64, f(r))).collect()
        };
        let mut chart = LineChart::new(
            &format!("Quantized samples, {} window, M = {}", self.window, self.m),
            "bits per real sample",
            "relative error",
            true,
        );
        chart.push("coefficients", series(&|r| r.coefficient_error.median));
        chart.push("signal", series(&|r| r.reconstruction_error.median));
        chart.push("1 - support rate", series(&|r| 1.0 - r.support_rate));
        write_svg(dir, "quant", &chart)
    }
}

// ---------------------------------------------------------------------------
// Demo

#[derive(Debug, Clone, Serialize)]
pub struct DemoReport {
    pub window: String,
    pub seed: u64,
    pub k: usize,
    pub l: usize,
    pub m: usize,
    pub sparsity: usize,
    pub samples_full: usize,
    pub samples_sparse: usize,
    pub pulse_centers: Vec<f64>,
    pub band_tail: f64,
    pub support: Vec<i64>,
    pub true_support: Vec<i64>,
    pub outcome: TrialOutcome,
    #[serde(skip)]
    trace: Vec<(f64, f64, f64)>,
}

pub fn run_demo(cfg: &Config) -> Result<DemoReport, RunError> {
    let dc = &cfg.demo;
    let seed = cfg.trial_seeds()[0];
    let sc = Scenario::new(cfg, dc.frame, dc.m, dc.l0)?;
    let perturbation = Perturbation {
        snr_db: dc.snr_db.map_or(f64::INFINITY, |s| s.db()),
        bits: dc.bits,
    };
    let ctx = |e| RunError::numerical(format!("demo, seed {seed}"), e);
    let art = run_trial_full(&sc, seed, perturbation, cfg.quant.significant_row).map_err(ctx)?;
    let f = &art.multipulse.signal;
    let trace = f
        .grid()
        .times()
        .zip(f.values().iter().zip(art.reconstruction.values()))
        .map(|(t, (&a, &b))| (t, a, b))
        .filter(|(t, _, _)| t.abs() <= 0.5 * sc.params.beta)
        .collect();
    Ok(DemoReport {
        window: dc.frame.label().to_owned(),
        seed,
        k: sc.extent.k(),
        l: sc.extent.l(),
        m: sc.m,
        sparsity: sc.sparsity,
        samples_full: sc.full_count(),
        samples_sparse: sc.sparse_count(),
        pulse_centers: art.multipulse.pulses.iter().map(|p| p.center).collect(),
        band_tail: tail_energy_fraction(f, sc.params.omega).map_err(ctx)?,
        support: art.recovery.support.signed(&sc.extent),
        true_support: art.coefficients.nonzero_rows(),
        outcome: art.outcome,
        trace,
    })
}

impl DemoReport {
    fn write(&self, dir: &Path) -> Result<(), RunError> {
        let rows = self
            .trace
            .iter()
            .map(|&(t, f, g)| vec![fmt_f64(t), fmt_f64(f), fmt_f64(g)]);
        write_csv(dir, "demo", &["t", "f", "f_hat"], rows)?;
        let mut chart = LineChart::new(
            &format!(
                "Signal and reconstruction, {} window, error {:.4}",
                self.window, self.outcome.relative_error
            ),
            "time (s)",
            "amplitude",
            false,
        );
        chart.markers = false;
        let stride = (self.trace.len() / 2000).max(1);
        let thin = |pick: &dyn Fn(&(f64, f64, f64)) -> f64| -> Vec<(f64, f64)> {
            self.trace.iter().step_by(stride).map(|p| (p.0, pick(p))).collect()
        };
        chart.push("signal", thin(&|p| p.1));
        chart.push("reconstruction", thin(&|p| p.2));
        write_svg(dir, "demo", &chart)
    }
}

// ---------------------------------------------------------------------------
// Output

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Results {
    Table2(Table2Report),
    Noise(NoiseReport),
    Quant(QuantReport),
    Demo(DemoReport),
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub experiment: Experiment,
    pub version: &'static str,
    pub seeds: Vec<u64>,
    pub config: Config,
    pub results: Results,
}

impl Report {
    /// Short human-readable summary for the terminal.
    pub fn summary(&self) -> String {
        match &self.results {
            Results::Table2(r) => r.console_table(),
            Results::Noise(r) => {
                let mut s = format!("{} window, K = {}, L = {}, S = {}\n", r.window, r.k, r.l, r.sparsity);
                for c in &r.cells {
                    s.push_str(&format!(
                        "M = {:>3}  SNR = {:>5} dB  median error {:.4}\n",
                        c.m, c.snr_db, c.error.median
                    ));
                }
                s
            }
            Results::Quant(r) => {
                let mut s = format!("{} window, M = {}, K = {}, L = {}\n", r.window, r.m, r.k, r.l);
                for row in &r.rows {
                    s.push_str(&format!(
                        "bits {:>4}  coefficient error {:.4}  support {:.2}  locations {:.2}\n",
                        row.bits.map_or_else(|| "none".to_owned(), |b| b.to_string()),
                        row.coefficient_error.median,
                        row.support_rate,
                        row.location_rate
                    ));
                }
                s
            }
            Results::Demo(r) => format!(
                "{} window, seed {}: {} of {} samples, error {:.4}, support {:?}\n",
                r.window, r.seed, r.samples_sparse, r.samples_full, r.outcome.relative_error, r.support
            ),
        }
    }
}

pub fn run(experiment: Experiment, cfg: &Config) -> Result<Report, RunError> {
    let results = match experiment {
        Experiment::Table2 => Results::Table2(run_table2(cfg)?),
        Experiment::Noise => Results::Noise(run_noise_sweep(cfg)?),
        Experiment::Quant => Results::Quant(run_quantization(cfg)?),
        Experiment::Demo => Results::Demo(run_demo(cfg)?),
    };
    Ok(Report {
        experiment,
        version: env!("CARGO_PKG_VERSION"),
        seeds: cfg.trial_seeds(),
        config: cfg.clone(),
        results,
    })
}

/// Writes `<experiment>.csv`, `<experiment>.svg` and `report.json` into `dir`.
pub fn write_outputs(report: &Report, dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    fs::create_dir_all(dir).map_err(|e| RunError::output(dir, e.into()))?;
    match &report.results {
        Results::Table2(r) => r.write(dir)?,
        Results::Noise(r) => {
            let order: Vec<f64> = report.config.noise.snr_db.iter().map(|s| s.db()).collect();
            r.write(dir, &order)?
        }
        Results::Quant(r) => r.write(dir)?,
        Results::Demo(r) => r.write(dir)?,
    }
    let json = dir.join("report.json");
    write_json(&json, report).map_err(|e| RunError::output(&json, e))?;
    let name = report.experiment.name();
    Ok(vec![
        dir.join(format!("{name}.csv")),
        dir.join(format!("{name}.svg")),
        json,
    ])
}

fn write_csv<I>(dir: &Path, name: &str, header: &[&str], rows: I) -> Result<(), RunError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let path = dir.join(format!("{name}.csv"));
    write_table(&path, header, rows).map_err(|e| RunError::output(&path, e))
}

fn write_svg(dir: &Path, name: &str, chart: &LineChart) -> Result<(), RunError> {
    let path = dir.join(format!("{name}.svg"));
    fs::write(&path, chart.render()).map_err(|e| RunError::output(&path, e.into()))
}
