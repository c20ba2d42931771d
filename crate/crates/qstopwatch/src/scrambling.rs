//! Four-point OTOCs, the purity-based averaged OTOC, a Haar Monte-Carlo
//! oracle, Lyapunov extraction, and the chaos bounds tying the OTOC to the
//! subsystem QFI.

use ndarray::Array2;
use ndarray_linalg::QRSquare;
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dynamics::{partial_trace, Bipartition, PureState, SpectralDecomposition};
use crate::error::{Error, Result};
use crate::metrology::{purity, qsl_action, TimeSeries};
use crate::operators::LocalOperator;
use crate::C64;

/// Result of a log-linear Lyapunov fit. `lambda_q` is NaN when `valid` is
/// false (empty window, too few points, poor fit, or negative rate).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovFit {
    pub lambda_q: f64,
    pub window: (f64, f64),
    pub r_squared: f64,
    pub n_points: usize,
    pub valid: bool,
}

impl LyapunovFit {
    fn invalid() -> Self {
        Self {
            lambda_q: f64::NAN,
            window: (f64::NAN, f64::NAN),
            r_squared: 0.0,
            n_points: 0,
            valid: false,
        }
    }
}

/// Amplitude band and quality thresholds for [`fit_lyapunov`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitWindowPolicy {
    /// Lower edge of the amplitude band; the window ends at the first sample
    /// below it.
    pub fit_lo: f64,
    /// Upper edge; the window starts at the first sample at or below it.
    pub fit_hi: f64,
    pub min_points: usize,
    pub min_r_squared: f64,
}

impl Default for FitWindowPolicy {
    fn default() -> Self {
        Self {
            fit_lo: 0.35,
            fit_hi: 0.9,
            min_points: 5,
            min_r_squared: 0.97,
        }
    }
}

/// Monte-Carlo estimate of the Haar-averaged OTOC.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HaarEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Four-point OTOC `<psi| B^dag(t) A^dag B(t) A |psi>` evaluated through
/// state vectors (no 2^N x 2^N matrices are formed).
///
/// Overlapping supports of `a` and `b` are permitted; the correlator is
/// still computed as written.
pub fn otoc_4pt(
    spec: &SpectralDecomposition,
    psi: &PureState,
    a: &LocalOperator,
    b: &LocalOperator,
    t: f64,
) -> Result<C64> {
    Ok(otoc_series(spec, psi, a, b, &[t])?[0])
}

/// The four-point OTOC sampled on a time grid; the eigenbasis projections of
/// `psi` and `A psi` are computed once and reused across times.
pub fn otoc_series(
    spec: &SpectralDecomposition,
    psi: &PureState,
    a: &LocalOperator,
    b: &LocalOperator,
    times: &[f64],
) -> Result<Vec<C64>> {
    let n_sites = psi.n_sites();
    if spec.dim() != psi.dim() {
        return Err(Error::DimensionMismatch(spec.dim(), psi.dim()));
    }
    let a_dag = a.adjoint();
    let a_psi = a.apply(&psi.amplitudes().view(), n_sites)?;
    let c_psi = spec.to_eigenbasis(psi.amplitudes());
    let c_apsi = spec.to_eigenbasis(&a_psi);
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let fwd = spec.phases(t); // e^{-iEt}
        let bwd = fwd.mapv(|z| z.conj()); // e^{+iEt}
        // chi = A^dag B(t) A psi with B(t) = e^{iHt} B e^{-iHt}
        let x = spec.from_eigenbasis(&(&c_apsi * &fwd));
        let x = b.apply(&x.view(), n_sites)?;
        let x = spec.from_eigenbasis(&(&spec.to_eigenbasis(&x) * &bwd));
        let chi = a_dag.apply(&x.view(), n_sites)?;
        // w = B(t) psi
        let y = spec.from_eigenbasis(&(&c_psi * &fwd));
        let y = b.apply(&y.view(), n_sites)?;
        let w = spec.from_eigenbasis(&(&spec.to_eigenbasis(&y) * &bwd));
        let value: C64 = w
            .iter()
            .zip(chi.iter())
            .map(|(wi, ci)| wi.conj() * ci)
            .sum();
        out.push(value);
    }
    Ok(out)
}

/// The averaged OTOC `O_t`, equal to the purity of the reduced state of A.
pub fn averaged_otoc(psi_t: &PureState, part: &Bipartition) -> Result<f64> {
    Ok(purity(&partial_trace(psi_t, part)?))
}

/// Haar-random unitary of the given dimension: QR of a complex Gaussian
/// matrix with the diagonal phase correction.
pub fn haar_unitary(dim: usize, rng: &mut impl Rng) -> Result<Array2<C64>> {
    let mut gauss = Array2::<C64>::zeros((dim, dim));
    for z in gauss.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *z = C64::new(re / f64::sqrt(2.0), im / f64::sqrt(2.0));
    }
    let (q, r) = gauss.qr_square()?;
    let mut u = q;
    for (k, mut col) in u.columns_mut().into_iter().enumerate() {
        let d = r[[k, k]];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        col.mapv_inplace(|z| z * phase);
    }
    Ok(u)
}

/// Monte-Carlo estimate of the Haar average of the four-point correlator at
/// time `t`, over unitaries drawn on subsystem B of `part`.
///
/// Each sample uses an independent ChaCha stream keyed by `(seed, sample)`,
/// so the estimate is deterministic for a given seed and identical whether
/// samples are evaluated serially or in parallel batches; the same sample
/// index draws the same unitary at every `t`. The real part of each sample
/// correlator enters the average.
pub fn haar_otoc_estimate(
    spec: &SpectralDecomposition,
    psi: &PureState,
    a: &LocalOperator,
    part: &Bipartition,
    t: f64,
    n_samples: usize,
    seed: u64,
) -> Result<HaarEstimate> {
    if n_samples == 0 {
        return Err(Error::InvalidParams("n_samples must be at least 1".into()));
    }
    if a.support().iter().any(|s| !part.sites_a().contains(s)) {
        return Err(Error::InvalidBipartition(
            "operator A must be supported on subsystem A".into(),
        ));
    }
    let d_b = part.dim_b();
    let mut values = Vec::with_capacity(n_samples);
    for k in 0..n_samples {
        let mut rng = sample_rng(seed, k as u64);
        let u = haar_unitary(d_b, &mut rng)?;
        let b = LocalOperator::new(part.sites_b().to_vec(), u)?;
        let v = otoc_4pt(spec, psi, a, &b, t)?;
        values.push(v.re);
    }
    let n = n_samples as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std_error = if n_samples > 1 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(HaarEstimate {
        mean,
        std_error,
        samples: n_samples,
    })
}

/// Counter-based per-sample stream: seed and sample index fill the ChaCha key.
fn sample_rng(seed: u64, sample: u64) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&sample.to_le_bytes());
    ChaCha12Rng::from_seed(key)
}

/// Least-squares fit of `ln O_t` against `t` over the amplitude band of the
/// policy; `lambda_q = -slope`.
///
/// The window is the contiguous run starting at the first sample at or below
/// `fit_hi` and ending before the first subsequent sample below `fit_lo`.
pub fn fit_lyapunov(otoc: &TimeSeries, policy: &FitWindowPolicy) -> LyapunovFit {
    let values = otoc.values();
    let times = otoc.times();
    let Some(start) = values.iter().position(|&v| v <= policy.fit_hi) else {
        return LyapunovFit::invalid();
    };
    let end = values[start..]
        .iter()
        .position(|&v| v < policy.fit_lo)
        .map(|off| start + off)
        .unwrap_or(values.len());
    if end <= start {
        return LyapunovFit::invalid();
    }
    let n = end - start;
    let ts = &times[start..end];
    let lnv: Vec<f64> = values[start..end].iter().map(|v| v.ln()).collect();
    if lnv.iter().any(|v| !v.is_finite()) {
        return LyapunovFit::invalid();
    }
    let nf = n as f64;
    let t_mean = ts.iter().sum::<f64>() / nf;
    let y_mean = lnv.iter().sum::<f64>() / nf;
    let sxx: f64 = ts.iter().map(|t| (t - t_mean).powi(2)).sum();
    let sxy: f64 = ts
        .iter()
        .zip(lnv.iter())
        .map(|(t, y)| (t - t_mean) * (y - y_mean))
        .sum();
    if sxx == 0.0 {
        return LyapunovFit::invalid();
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * t_mean;
    let ss_tot: f64 = lnv.iter().map(|y| (y - y_mean).powi(2)).sum();
    let ss_res: f64 = ts
        .iter()
        .zip(lnv.iter())
        .map(|(t, y)| (y - (intercept + slope * t)).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let lambda = -slope;
    let valid = n >= policy.min_points && r_squared >= policy.min_r_squared && lambda >= 0.0;
    LyapunovFit {
        lambda_q: if valid { lambda } else { f64::NAN },
        window: (ts[0], ts[n - 1]),
        r_squared,
        n_points: n,
        valid,
    }
}

/// The cosine envelope `cos(2 integral sqrt(I_F))/4 + 3/4` tied to the
/// averaged OTOC of a single-qubit subsystem; the flag is false once the
/// cosine argument leaves the first quadrant.
pub fn cosine_envelope(qfi: &TimeSeries, t: f64) -> Result<(f64, bool)> {
    let action = qsl_action(qfi, t)?;
    let arg = 2.0 * action;
    let in_quadrant = arg <= std::f64::consts::FRAC_PI_2;
    Ok((0.25 * arg.cos() + 0.75, in_quadrant))
}

/// The QSL rate expression `(integral_0^t sqrt(I_F))^2 / (2 t)` that bounds
/// the coherence decay rate; this is the quantity mapped over `(t, h)` in
/// the bound heatmap.
pub fn lyapunov_bound(qfi: &TimeSeries, t: f64) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::InvalidParams(
            "lyapunov bound requires t > 0".into(),
        ));
    }
    let action = qsl_action(qfi, t)?;
    Ok(action * action / (2.0 * t))
}

/// A grid point where the purity fell below its integrated-QFI floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeViolation {
    pub index: usize,
    pub time: f64,
    /// How far (in angle) the purity angle overshot the action budget.
    pub excess: f64,
}

/// Outcome of the integrated purity-decay check.
///
/// The generalized Cramér-Rao bound caps the decay rate of the purity of a
/// single-qubit subsystem: `|dO/dt| <= 2 Δρ sqrt(I_F)`, whose integral form
/// is `arccos(4 O_t - 3) <= arccos(4 O_0 - 3) + 2 integral_0^t sqrt(I_F)`.
/// Within the window where the right-hand side stays below pi this is the
/// envelope `O_t >= cos(2S + phi_0)/4 + 3/4`; equality holds for pure
/// dephasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    /// `arccos(4 O_0 - 3)`, the initial angle of the purity.
    pub initial_phase: f64,
    /// Per-point slack `phi_0 + 2S(t) - arccos(4 O_t - 3)`; non-negative
    /// when the bound holds.
    pub slack_angle: Vec<f64>,
    pub violations: Vec<EnvelopeViolation>,
}

/// Angle slack below this is reported as an envelope violation.
pub const ENVELOPE_TOL: f64 = 1e-9;

/// Check the integrated purity-decay envelope on aligned grids. `otoc` is
/// the averaged OTOC (subsystem purity) of a single-qubit subsystem.
pub fn check_envelope(otoc: &TimeSeries, qfi: &TimeSeries) -> Result<EnvelopeReport> {
    if otoc.times() != qfi.times() {
        return Err(Error::InvalidTimeSeries(
            "OTOC and QFI series must share one grid".into(),
        ));
    }
    let purity_angle = |o: f64| (4.0 * o - 3.0).clamp(-1.0, 1.0).acos();
    let initial_phase = purity_angle(otoc.values()[0]);
    let mut slack_angle = Vec::with_capacity(otoc.len());
    let mut violations = Vec::new();
    for (i, (&t, &o)) in otoc.times().iter().zip(otoc.values()).enumerate() {
        let action = qsl_action(qfi, t)?;
        let slack = initial_phase + 2.0 * action - purity_angle(o);
        slack_angle.push(slack);
        if slack < -ENVELOPE_TOL {
            violations.push(EnvelopeViolation {
                index: i,
                time: t,
                excess: -slack,
            });
        }
    }
    Ok(EnvelopeReport {
        initial_phase,
        slack_angle,
        violations,
    })
}

/// One point failing the generalized Cramér-Rao inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GqcrbViolation {
    pub index: usize,
    pub time: f64,
    pub slack: f64,
}

/// Per-point slack of the generalized Cramér-Rao bound,
/// `var - (dO/dt)^2 / (4 I_F)`, with the time derivative from central
/// differences (one-sided at the endpoints).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GqcrbReport {
    /// Slack per grid point; NaN where the 0/0 case was skipped.
    pub slack: Vec<f64>,
    /// Indices where both the derivative and the QFI vanish (0/0 skipped).
    pub skipped: Vec<usize>,
    /// Points with slack below `-1e-9`.
    pub violations: Vec<GqcrbViolation>,
}

/// Slack below this is reported as a violation.
pub const GQCRB_SLACK_TOL: f64 = 1e-9;
const DEGENERATE_FLOOR: f64 = 1e-12;

/// Check the generalized Cramér-Rao bound point-by-point on aligned grids,
/// estimating the OTOC derivative by central differences (one-sided at the
/// endpoints).
///
/// The finite-difference error is O(dt^2) and can exceed the violation
/// tolerance where the bound is nearly tight; prefer
/// [`check_gqcrb_with_rate`] when the exact rate `2 tr(rho M)` is available.
pub fn check_gqcrb(
    variance: &TimeSeries,
    otoc: &TimeSeries,
    qfi: &TimeSeries,
) -> Result<GqcrbReport> {
    if otoc.times() != qfi.times() {
        return Err(Error::InvalidTimeSeries(
            "OTOC and QFI series must share one grid".into(),
        ));
    }
    let times = otoc.times();
    let o = otoc.values();
    let n = times.len();
    let dot: Vec<f64> = (0..n)
        .map(|i| {
            if i == 0 {
                if n < 2 {
                    0.0
                } else {
                    (o[1] - o[0]) / (times[1] - times[0])
                }
            } else if i == n - 1 {
                (o[n - 1] - o[n - 2]) / (times[n - 1] - times[n - 2])
            } else {
                (o[i + 1] - o[i - 1]) / (times[i + 1] - times[i - 1])
            }
        })
        .collect();
    let rate = TimeSeries::new(times.to_vec(), dot)?;
    check_gqcrb_with_rate(variance, &rate, qfi)
}

/// Check the generalized Cramér-Rao bound with an explicitly supplied OTOC
/// rate series (e.g. the exact `d/dt tr(rho^2) = 2 tr(rho M)`).
pub fn check_gqcrb_with_rate(
    variance: &TimeSeries,
    otoc_rate: &TimeSeries,
    qfi: &TimeSeries,
) -> Result<GqcrbReport> {
    if variance.times() != otoc_rate.times() || otoc_rate.times() != qfi.times() {
        return Err(Error::InvalidTimeSeries(
            "variance, rate, and QFI series must share one grid".into(),
        ));
    }
    let times = otoc_rate.times();
    let n = times.len();
    let mut slack = vec![f64::NAN; n];
    let mut skipped = Vec::new();
    let mut violations = Vec::new();
    for i in 0..n {
        let dot = otoc_rate.values()[i];
        let f = qfi.values()[i];
        if f <= DEGENERATE_FLOOR && dot * dot <= DEGENERATE_FLOOR {
            skipped.push(i);
            continue;
        }
        let s = variance.values()[i] - dot * dot / (4.0 * f);
        slack[i] = s;
        if s < -GQCRB_SLACK_TOL {
            violations.push(GqcrbViolation {
                index: i,
                time: times[i],
                slack: s,
            });
        }
    }
    Ok(GqcrbReport {
        slack,
        skipped,
        violations,
    })
}
