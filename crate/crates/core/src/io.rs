//! CSV and JSON exchange formats.
//!
//! Floating-point values are written with 17 significant digits, which
//! round-trips every `f64` exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::baselines::{BaselineMethod, BaselineReport};
use crate::error::{Error, Result};
use crate::gabor_frames::GaborFrame;
use crate::gabor_transform::{CoefficientGrid, LatticeExtent};
use crate::recovery::RecoveryResult;
use crate::sampler::{MeasurementEnsemble, SampleMatrix};
use crate::signal_model::{GridSpec, SampledSignal};

/// Decimal form with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64(field: &str) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Format(format!("not a number: {field:?}")))
}

fn parse_i64(field: &str) -> Result<i64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Format(format!("not an integer: {field:?}")))
}

/// Writes a header and string rows as CSV.
pub fn write_table<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn read_rows(path: &Path, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    let found: Vec<String> = r.headers()?.iter().map(|h| h.trim().to_owned()).collect();
    if found != header {
        return Err(Error::Format(format!(
            "{}: expected columns {header:?}, found {found:?}",
            path.display()
        )));
    }
    let rows = r.records().collect::<std::result::Result<Vec<_>, _>>()?;
    if let Some(bad) = rows.iter().find(|row| row.len() != header.len()) {
        return Err(Error::Format(format!("row with {} fields: {bad:?}", bad.len())));
    }
    Ok(rows)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(std::io::BufReader::new(File::open(path)?))?)
}

/// `path` with its extension replaced by `json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Header stored next to a signal CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalHeader {
    pub beta: f64,
    pub dt: f64,
    pub n_points: usize,
}

/// Writes `t,value` rows to `path` and the header to the `.json` sidecar.
pub fn write_signal(path: &Path, f: &SampledSignal) -> Result<()> {
    let grid = f.grid();
    write_table(
        path,
        &["t", "value"],
        grid.times().zip(f.values()).map(|(t, v)| vec![fmt_f64(t), fmt_f64(*v)]),
    )?;
    write_json(
        &sidecar_path(path),
        &SignalHeader {
            beta: f.support_beta(),
            dt: grid.dt(),
            n_points: grid.n_points(),
        },
    )
}

pub fn read_signal(path: &Path) -> Result<SampledSignal> {
    let header: SignalHeader = read_json(&sidecar_path(path))?;
    let rows = read_rows(path, &["t", "value"])?;
    if rows.len() != header.n_points {
        return Err(Error::Format(format!(
            "{} rows but the header declares {} points",
            rows.len(),
            header.n_points
        )));
    }
    let t_start = parse_f64(&rows[0][0])?;
    let values = rows.iter().map(|r| parse_f64(&r[1])).collect::<Result<Vec<_>>>()?;
    let grid = GridSpec::from_parts(t_start, header.dt, header.n_points)?;
    SampledSignal::new(grid, values, header.beta)
}

fn complex_rows<'a>(
    z: &'a DMatrix<Complex64>,
    row_label: impl Fn(usize) -> i64 + 'a,
    col_label: impl Fn(usize) -> i64 + 'a,
) -> impl Iterator<Item = Vec<String>> + 'a {
    (0..z.nrows()).flat_map(move |r| {
        let rl = row_label(r);
        (0..z.ncols())
            .map({
                let col_label = &col_label;
                move |c| {
                    let v = z[(r, c)];
                    vec![rl.to_string(), col_label(c).to_string(), fmt_f64(v.re), fmt_f64(v.im)]
                }
            })
            .collect::<Vec<_>>()
    })
}

fn read_complex(path: &Path, header: &[&str]) -> Result<Vec<(i64, i64, Complex64)>> {
    read_rows(path, header)?
        .iter()
        .map(|r| {
            Ok((
                parse_i64(&r[0])?,
                parse_i64(&r[1])?,
                Complex64::new(parse_f64(&r[2])?, parse_f64(&r[3])?),
            ))
        })
        .collect()
}

fn write_lattice_matrix(path: &Path, z: &DMatrix<Complex64>, extent: LatticeExtent) -> Result<()> {
    write_table(
        path,
        &["k", "l", "re", "im"],
        complex_rows(z, |r| extent.shift_k(r), |c| extent.shift_l(c)),
    )
}

/// `k,l,re,im` for every lattice point.
pub fn write_coefficients(path: &Path, zg: &CoefficientGrid) -> Result<()> {
    write_lattice_matrix(path, zg.z(), zg.extent())
}

/// Reads a coefficient grid; the extents are the largest `|k|` and `|l|` present.
pub fn read_coefficients(path: &Path) -> Result<CoefficientGrid> {
    let entries = read_complex(path, &["k", "l", "re", "im"])?;
    if entries.is_empty() {
        return Err(Error::Format("empty coefficient file".into()));
    }
    let k0 = entries.iter().map(|e| e.0.unsigned_abs()).max().unwrap_or(0) as usize;
    let l0 = entries.iter().map(|e| e.1.unsigned_abs()).max().unwrap_or(0) as usize;
    let extent = LatticeExtent::new(k0, l0);
    let mut zg = CoefficientGrid::zeros(extent);
    for (k, l, v) in entries {
        zg.set(k, l, v);
    }
    Ok(zg)
}

/// `m,l,re,im` for every channel.
pub fn write_samples(path: &Path, x: &SampleMatrix) -> Result<()> {
    let l0 = x.l0() as i64;
    write_table(
        path,
        &["m", "l", "re", "im"],
        complex_rows(x.x(), |r| r as i64, move |c| c as i64 - l0),
    )
}

pub fn read_samples(path: &Path) -> Result<SampleMatrix> {
    let entries = read_complex(path, &["m", "l", "re", "im"])?;
    if entries.iter().any(|e| e.0 < 0) {
        return Err(Error::Format("negative channel index".into()));
    }
    let m = entries.iter().map(|e| e.0 + 1).max().unwrap_or(0) as usize;
    let l0 = entries.iter().map(|e| e.1.unsigned_abs()).max().unwrap_or(0) as usize;
    let mut x = DMatrix::zeros(m, 2 * l0 + 1);
    for (mi, l, v) in entries {
        x[(mi as usize, (l + l0 as i64) as usize)] = v;
    }
    SampleMatrix::new(x, l0)
}

/// `t,g,gamma` on `grid`.
pub fn write_window(path: &Path, frame: &GaborFrame, grid: &GridSpec) -> Result<()> {
    write_table(
        path,
        &["t", "g", "gamma"],
        grid.times().map(|t| {
            vec![
                fmt_f64(t),
                fmt_f64(frame.window().eval(t)),
                fmt_f64(frame.dual().eval(t)),
            ]
        }),
    )
}

pub fn write_frame_metadata(path: &Path, frame: &GaborFrame) -> Result<()> {
    write_json(path, &frame.metadata())
}

/// Writes the ensemble summary to `path` and, if given, the full matrix as `m,k,c` rows.
pub fn write_ensemble(path: &Path, ens: &MeasurementEnsemble, matrix_csv: Option<&Path>) -> Result<()> {
    write_json(path, &ens.metadata())?;
    if let Some(csv_path) = matrix_csv {
        let extent = ens.extent();
        let c = ens.c();
        write_table(
            csv_path,
            &["m", "k", "c"],
            (0..c.nrows()).flat_map(|m| {
                (0..c.ncols()).map(move |r| vec![m.to_string(), extent.shift_k(r).to_string(), fmt_f64(c[(m, r)])])
            }),
        )?;
    }
    Ok(())
}

/// Reads an `m,k,c` matrix file into an `M × K` matrix (row `k + K0`).
pub fn read_ensemble_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let rows = read_rows(path, &["m", "k", "c"])?;
    let parsed = rows
        .iter()
        .map(|r| Ok((parse_i64(&r[0])?, parse_i64(&r[1])?, parse_f64(&r[2])?)))
        .collect::<Result<Vec<_>>>()?;
    let m = parsed.iter().map(|e| e.0 + 1).max().unwrap_or(0).max(0) as usize;
    let k0 = parsed.iter().map(|e| e.1.unsigned_abs()).max().unwrap_or(0) as i64;
    let mut c = DMatrix::zeros(m, 2 * k0 as usize + 1);
    for (mi, k, v) in parsed {
        if mi < 0 {
            return Err(Error::Format("negative channel index".into()));
        }
        c[(mi as usize, (k + k0) as usize)] = v;
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoverySummary {
    /// Signed time shifts `k`.
    pub support: Vec<i64>,
    pub residual: f64,
    pub iterations: usize,
    pub rip_estimate: Option<f64>,
}

/// Writes the summary JSON to `path` and `Z̃` as `k,l,re,im` to `z_csv`.
pub fn write_recovery(path: &Path, z_csv: &Path, result: &RecoveryResult, extent: LatticeExtent) -> Result<()> {
    let summary = RecoverySummary {
        support: result.support.signed(&extent),
        residual: result.residual,
        iterations: result.iterations,
        rip_estimate: result.rip_estimate,
    };
    write_json(path, &summary)?;
    write_lattice_matrix(z_csv, &result.z_hat, extent)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineSummary {
    pub method: BaselineMethod,
    pub sample_count: usize,
    pub error_bound: f64,
    pub measured_error: f64,
}

/// Writes the report JSON to `path` and the reconstruction as a signal CSV.
pub fn write_baseline(path: &Path, reconstruction_csv: &Path, report: &BaselineReport) -> Result<()> {
    write_json(
        path,
        &BaselineSummary {
            method: report.method,
            sample_count: report.sample_count,
            error_bound: report.error_bound,
            measured_error: report.measured_error,
        },
    )?;
    write_signal(reconstruction_csv, &report.reconstruction)
}
