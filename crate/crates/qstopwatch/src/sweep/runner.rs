//! Parallel execution of a field sweep and assembly of the heatmaps.

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sweep::config::{hash_canonical, CanonicalConfig, SweepConfig};
use crate::sweep::point::{run_point, PointBundle};

/// Which inequality a violation record refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Gqcrb,
    Envelope,
    SandwichLower,
    SandwichUpper,
    BoundVsLambda,
}

/// One inequality failure somewhere on the sweep grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub h: f64,
    pub time: f64,
    pub magnitude: f64,
}

/// A sweep point that failed outright (the sweep continues past it).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub h_index: usize,
    pub h: f64,
    pub message: String,
}

/// Assembled sweep output. Heatmaps are indexed `[t_index, h_index]`; cells
/// of failed points are NaN and listed in `failures`.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub config: CanonicalConfig,
    pub config_hash: String,
    pub code_version: String,
    pub h_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub points: Vec<Option<PointBundle>>,
    pub qfi_heatmap: Array2<f64>,
    pub bound_heatmap: Array2<f64>,
    pub avg_otoc_heatmap: Array2<f64>,
    pub violations: Vec<Violation>,
    pub failures: Vec<PointFailure>,
}

impl SweepResult {
    /// Transverse-field values whose ground state was flagged degenerate.
    pub fn degenerate_fields(&self) -> Vec<f64> {
        self.points
            .iter()
            .flatten()
            .filter(|p| p.degenerate_ground_state)
            .map(|p| p.h)
            .collect()
    }
}

/// Run every field point (in parallel when `worker_count != 1`), assemble
/// heatmaps and the aggregated violation list.
///
/// Results are keyed by grid index, so the output is identical for any
/// worker count; OpenBLAS threading is pinned to one thread per worker.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let canonical = config.canonical()?;
    let h_grid = canonical.h_grid.clone();
    let t_grid = canonical.t_grid.clone();

    crate::linalg::set_blas_threads(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.worker_count)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;

    let outcomes: Vec<(usize, std::result::Result<PointBundle, String>)> = pool.install(|| {
        h_grid
            .par_iter()
            .enumerate()
            .map(|(i, &h)| (i, run_point(config, h).map_err(|e| e.to_string())))
            .collect()
    });

    let n_h = h_grid.len();
    let n_t = t_grid.len();
    let mut points: Vec<Option<PointBundle>> = vec![None; n_h];
    let mut failures = Vec::new();
    for (i, outcome) in outcomes {
        match outcome {
            Ok(bundle) => points[i] = Some(bundle),
            Err(message) => failures.push(PointFailure {
                h_index: i,
                h: h_grid[i],
                message,
            }),
        }
    }
    failures.sort_by_key(|f| f.h_index);

    let mut qfi_heatmap = Array2::from_elem((n_t, n_h), f64::NAN);
    let mut bound_heatmap = Array2::from_elem((n_t, n_h), f64::NAN);
    let mut avg_otoc_heatmap = Array2::from_elem((n_t, n_h), f64::NAN);
    let mut violations = Vec::new();
    for (hi, point) in points.iter().enumerate() {
        let Some(bundle) = point else { continue };
        for ti in 0..n_t {
            qfi_heatmap[[ti, hi]] = bundle.qfi[ti];
            bound_heatmap[[ti, hi]] = bundle.lyapunov_bound[ti];
            avg_otoc_heatmap[[ti, hi]] = bundle.avg_otoc[ti];
        }
        let h = bundle.h;
        for v in &bundle.checks.gqcrb.violations {
            violations.push(Violation {
                kind: ViolationKind::Gqcrb,
                h,
                time: v.time,
                magnitude: -v.slack,
            });
        }
        for v in &bundle.checks.envelope.violations {
            violations.push(Violation {
                kind: ViolationKind::Envelope,
                h,
                time: v.time,
                magnitude: v.excess,
            });
        }
        for v in &bundle.checks.sandwich_violations {
            violations.push(Violation {
                kind: if v.side == "lower" {
                    ViolationKind::SandwichLower
                } else {
                    ViolationKind::SandwichUpper
                },
                h,
                time: v.time,
                magnitude: v.excess,
            });
        }
        if let Some(b) = &bundle.checks.bound_vs_lambda {
            if !b.satisfied {
                violations.push(Violation {
                    kind: ViolationKind::BoundVsLambda,
                    h,
                    time: b.t_mid,
                    magnitude: b.lambda - b.rate_cap,
                });
            }
        }
    }

    Ok(SweepResult {
        config_hash: hash_canonical(&canonical),
        config: canonical,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        h_grid,
        t_grid,
        points,
        qfi_heatmap,
        bound_heatmap,
        avg_otoc_heatmap,
        violations,
        failures,
    })
}
