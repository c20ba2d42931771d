//! Persistence: CSV heatmaps, the JSON manifest, and per-point bundles.
//!
//! Files are UTF-8 with LF line endings. CSV floats carry 17 significant
//! digits so parsing them back reproduces the in-memory values bit-exactly.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sweep::runner::SweepResult;

/// 17-significant-digit scientific form; round-trips f64 exactly.
pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{x:.16e}")
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|e| Error::InvalidConfig(format!("bad float {s:?}: {e}")))
}

/// Write a `[t x h]` matrix as CSV: header row carries the h grid, first
/// column the t grid.
pub fn write_heatmap_csv(
    path: &Path,
    t_grid: &[f64],
    h_grid: &[f64],
    matrix: &Array2<f64>,
) -> Result<()> {
    if matrix.nrows() != t_grid.len() || matrix.ncols() != h_grid.len() {
        return Err(Error::DimensionMismatch(matrix.nrows(), t_grid.len()));
    }
    let mut out = String::new();
    out.push('t');
    for h in h_grid {
        out.push(',');
        out.push_str(&format_f64(*h));
    }
    out.push('\n');
    for (ti, t) in t_grid.iter().enumerate() {
        out.push_str(&format_f64(*t));
        for hi in 0..h_grid.len() {
            out.push(',');
            out.push_str(&format_f64(matrix[[ti, hi]]));
        }
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

/// Parse a heatmap CSV back into `(t_grid, h_grid, matrix)`.
pub fn parse_heatmap_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>, Array2<f64>)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidConfig("empty CSV".into()))?;
    let h_grid: Vec<f64> = header
        .split(',')
        .skip(1)
        .map(parse_f64)
        .collect::<Result<_>>()?;
    let mut t_grid = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let t = parse_f64(
            fields
                .next()
                .ok_or_else(|| Error::InvalidConfig("empty CSV row".into()))?,
        )?;
        t_grid.push(t);
        let row: Vec<f64> = fields.map(parse_f64).collect::<Result<_>>()?;
        if row.len() != h_grid.len() {
            return Err(Error::DimensionMismatch(row.len(), h_grid.len()));
        }
        rows.push(row);
    }
    let mut matrix = Array2::zeros((t_grid.len(), h_grid.len()));
    for (ti, row) in rows.iter().enumerate() {
        for (hi, v) in row.iter().enumerate() {
            matrix[[ti, hi]] = *v;
        }
    }
    Ok((t_grid, h_grid, matrix))
}

/// Manifest payload: configuration echo, provenance, and the violation
/// summary.
#[derive(Debug, Serialize)]
struct Manifest<'a> {
    config: &'a crate::sweep::config::CanonicalConfig,
    config_hash: &'a str,
    code_version: &'a str,
    seed: u64,
    violation_count: usize,
    violations: &'a [crate::sweep::runner::Violation],
    degenerate_fields: Vec<f64>,
    failures: &'a [crate::sweep::runner::PointFailure],
    files: Vec<String>,
}

/// Write every output file for a sweep into `output_dir`; returns the paths
/// written. Output is byte-deterministic for a given result.
pub fn emit(result: &SweepResult, output_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(output_dir)?;
    fs::create_dir_all(output_dir.join("points"))?;
    let mut written = Vec::new();

    let qfi_path = output_dir.join("qfi_heatmap.csv");
    write_heatmap_csv(&qfi_path, &result.t_grid, &result.h_grid, &result.qfi_heatmap)?;
    written.push(qfi_path);

    let bound_path = output_dir.join("bound_heatmap.csv");
    write_heatmap_csv(
        &bound_path,
        &result.t_grid,
        &result.h_grid,
        &result.bound_heatmap,
    )?;
    written.push(bound_path);

    let avg_path = output_dir.join("avg_otoc_heatmap.csv");
    write_heatmap_csv(
        &avg_path,
        &result.t_grid,
        &result.h_grid,
        &result.avg_otoc_heatmap,
    )?;
    written.push(avg_path);

    let lambda_path = output_dir.join("lambda_curve.csv");
    write_lambda_curve(&lambda_path, result)?;
    written.push(lambda_path);

    for (i, point) in result.points.iter().enumerate() {
        let Some(bundle) = point else { continue };
        let path = output_dir.join("points").join(format!("point_{i:03}.json"));
        let json = serde_json::to_string_pretty(bundle)
            .map_err(|e| Error::InvalidConfig(format!("bundle serialization: {e}")))?;
        write_atomic(&path, format!("{json}\n").as_bytes())?;
        written.push(path);
    }

    let manifest = Manifest {
        config: &result.config,
        config_hash: &result.config_hash,
        code_version: &result.code_version,
        seed: result.config.seed,
        violation_count: result.violations.len(),
        violations: &result.violations,
        degenerate_fields: result.degenerate_fields(),
        failures: &result.failures,
        files: written
            .iter()
            .map(|p| {
                p.strip_prefix(output_dir)
                    .unwrap_or(p)
                    .to_string_lossy()
                    .replace('\\', "/")
            })
            .collect(),
    };
    let manifest_path = output_dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::InvalidConfig(format!("manifest serialization: {e}")))?;
    write_atomic(&manifest_path, format!("{json}\n").as_bytes())?;
    written.push(manifest_path);
    Ok(written)
}

fn write_lambda_curve(path: &Path, result: &SweepResult) -> Result<()> {
    let mut out = String::from(
        "h,lambda_otoc,r2_otoc,n_otoc,window_lo_otoc,window_hi_otoc,valid_otoc,\
         lambda_avg,r2_avg,n_avg,window_lo_avg,window_hi_avg,valid_avg,degenerate\n",
    );
    for (i, point) in result.points.iter().enumerate() {
        match point {
            Some(b) => {
                let f1 = &b.fit_otoc;
                let f2 = &b.fit_avg_otoc;
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                    format_f64(b.h),
                    format_f64(f1.lambda_q),
                    format_f64(f1.r_squared),
                    f1.n_points,
                    format_f64(f1.window.0),
                    format_f64(f1.window.1),
                    u8::from(f1.valid),
                    format_f64(f2.lambda_q),
                    format_f64(f2.r_squared),
                    f2.n_points,
                    format_f64(f2.window.0),
                    format_f64(f2.window.1),
                    u8::from(f2.valid),
                    u8::from(b.degenerate_ground_state),
                ));
            }
            None => {
                out.push_str(&format!(
                    "{},NaN,NaN,0,NaN,NaN,0,NaN,NaN,0,NaN,NaN,0,0\n",
                    format_f64(result.h_grid[i])
                ));
            }
        }
    }
    write_atomic(path, out.as_bytes())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(bytes)?;
    Ok(())
}
