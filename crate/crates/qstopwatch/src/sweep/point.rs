//! Single sweep point: build, quench, evolve, and run every diagnostic and
//! inequality check along the trajectory.

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    eigendecompose, ground_state, partial_trace, quench, reduced_generator, Bipartition, PureState,
};
use crate::error::Result;
use crate::metrology::{
    intensive_ma2, purity, purity_rate, qfi_spectral, qsl_action, sandwich_bounds, variance_rho,
    TimeSeries, TruncationPolicy,
};
use crate::operators::build_hamiltonian;
use crate::scrambling::{
    check_envelope, check_gqcrb_with_rate, cosine_envelope, fit_lyapunov, lyapunov_bound,
    otoc_series, EnvelopeReport, GqcrbReport, LyapunovFit,
};
use crate::sweep::config::{point_seed, SweepConfig};

/// Slack tolerance shared by the inequality checks.
pub const CHECK_TOL: f64 = 1e-9;
/// Sandwich checks only run where the smallest eigenvalue of `rho_A`
/// exceeds this.
pub const SANDWICH_P_MIN: f64 = 1e-6;

/// A point where the QFI escaped the sandwich bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichViolation {
    pub index: usize,
    pub time: f64,
    pub side: String,
    pub excess: f64,
}

/// Comparison of the fitted purity-decay rate against the integrated-QFI
/// rate cap at the midpoint of the fit window.
///
/// The integral form of the generalized Cramér-Rao bound caps the decay
/// rate: with `phi_0 = arccos(4 O_0 - 3)` and `S` the QSL action,
/// `lambda <= (phi_0 + 2S)^2 / (8 t)` for an exponential decay; `bound`
/// carries the plain `S^2/(2t)` expression mapped in the bound heatmap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundVsLambda {
    pub t_mid: f64,
    /// `S(t_mid)^2 / (2 t_mid)`.
    pub bound: f64,
    /// `(phi_0 + 2 S(t_mid))^2 / (8 t_mid)`, the rate cap with the true
    /// initial purity folded in.
    pub rate_cap: f64,
    pub lambda: f64,
    pub satisfied: bool,
}

/// All inequality-check outcomes for one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointChecks {
    pub gqcrb: GqcrbReport,
    pub envelope: EnvelopeReport,
    pub sandwich_violations: Vec<SandwichViolation>,
    /// None when the averaged-OTOC fit is invalid (e.g. no decay window).
    pub bound_vs_lambda: Option<BoundVsLambda>,
}

/// Everything computed at one transverse-field value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointBundle {
    pub h: f64,
    pub point_seed: u64,
    pub degenerate_ground_state: bool,
    pub energy_gap: f64,
    pub times: Vec<f64>,
    /// Subsystem QFI trajectory.
    pub qfi: Vec<f64>,
    pub qfi_all_truncated: Vec<bool>,
    /// Averaged OTOC = purity of the reduced state.
    pub avg_otoc: Vec<f64>,
    /// Exact purity rate `2 tr(rho M)`.
    pub avg_otoc_rate: Vec<f64>,
    /// Variance of the density operator.
    pub variance: Vec<f64>,
    pub sandwich_lower: Vec<f64>,
    /// None encodes the +inf sentinel for singular reduced states.
    pub sandwich_upper: Vec<Option<f64>>,
    pub p_min: Vec<f64>,
    /// Four-point OTOC with the configured probe operators.
    pub otoc_re: Vec<f64>,
    pub otoc_im: Vec<f64>,
    /// Cosine envelope and its first-quadrant validity.
    pub envelope: Vec<f64>,
    pub envelope_in_quadrant: Vec<bool>,
    /// Integrated-QFI lower bound on the Lyapunov exponent; 0 at t = 0.
    pub lyapunov_bound: Vec<f64>,
    /// Intensive criticality proxy `|M_A|_2^2 / N`.
    pub intensive_ma2: Vec<f64>,
    /// Log-linear fit of the four-point OTOC (the figure-facing rate).
    pub fit_otoc: LyapunovFit,
    /// Log-linear fit of the averaged OTOC (the rate entering the
    /// bound-vs-lambda check, whose derivation lives on the averaged OTOC).
    pub fit_avg_otoc: LyapunovFit,
    pub checks: PointChecks,
}

/// Run the full trajectory at one transverse-field value.
pub fn run_point(config: &SweepConfig, h: f64) -> Result<PointBundle> {
    config.validate()?;
    let times = config.t_grid.materialize()?;
    let params = config.chain.at_field(h)?;
    let n = params.n_sites;

    let ham = build_hamiltonian(&params)?;
    let spec = eigendecompose(&ham)?;
    let (gs, degenerate) = ground_state(&spec);
    let energy_gap = if spec.dim() > 1 {
        spec.eigenvalues()[1] - spec.eigenvalues()[0]
    } else {
        f64::INFINITY
    };
    let psi0 = quench(&gs, &config.quench_op.to_operator())?;
    let part = Bipartition::new(config.subsystem.clone(), n)?;
    let pol = TruncationPolicy::default();

    // eigenbasis coefficients of the quenched state, reused across the grid
    let coeffs0 = spec.to_eigenbasis(psi0.amplitudes());

    let n_t = times.len();
    let mut qfi = Vec::with_capacity(n_t);
    let mut qfi_all_truncated = Vec::with_capacity(n_t);
    let mut avg_otoc = Vec::with_capacity(n_t);
    let mut variance = Vec::with_capacity(n_t);
    let mut sandwich_lower = Vec::with_capacity(n_t);
    let mut sandwich_upper = Vec::with_capacity(n_t);
    let mut p_min = Vec::with_capacity(n_t);
    let mut ma2 = Vec::with_capacity(n_t);
    let mut avg_otoc_rate = Vec::with_capacity(n_t);

    for &t in &times {
        let phased = &coeffs0 * &spec.phases(t);
        let psi_t = PureState::from_unnormalized(spec.from_eigenbasis(&phased))
            .expect("unitary evolution preserves the norm");
        let rho = partial_trace(&psi_t, &part)?;
        let m = reduced_generator(&ham, &psi_t, &part)?;

        let q = qfi_spectral(&rho, &m, &pol)?;
        qfi.push(q.value);
        qfi_all_truncated.push(q.all_truncated);
        avg_otoc.push(purity(&rho));
        avg_otoc_rate.push(purity_rate(&rho, &m)?);
        variance.push(variance_rho(&rho)?);
        let (lo, hi) = sandwich_bounds(&rho, &m)?;
        sandwich_lower.push(lo);
        sandwich_upper.push(hi.is_finite().then_some(hi));
        let eigs = rho.eigenvalues()?;
        p_min.push(eigs[0]);
        ma2.push(intensive_ma2(&m, n));
    }

    // The four-point correlator is taken in the ground state; with a
    // Hermitian unitary probe A this matches the quenched-state value up to
    // conjugation.
    let otoc = otoc_series(
        &spec,
        &gs,
        &config.otoc_ops.a.to_operator(),
        &config.otoc_ops.b.to_operator(),
        &times,
    )?;
    let otoc_re: Vec<f64> = otoc.iter().map(|z| z.re).collect();
    let otoc_im: Vec<f64> = otoc.iter().map(|z| z.im).collect();

    let qfi_series = TimeSeries::new(times.clone(), qfi.clone())?;
    let avg_series = TimeSeries::new(times.clone(), avg_otoc.clone())?;
    let var_series = TimeSeries::new(times.clone(), variance.clone())?;
    // the fit consumes the modulus, which stays in (0, 1] where the real
    // part oscillates through zero after scrambling
    let otoc_abs: Vec<f64> = otoc
        .iter()
        .map(|z| z.norm().clamp(f64::MIN_POSITIVE, 1.0))
        .collect();
    let otoc_abs_series = TimeSeries::new(times.clone(), otoc_abs)?;

    let mut envelope = Vec::with_capacity(n_t);
    let mut envelope_in_quadrant = Vec::with_capacity(n_t);
    let mut lyapunov_bound = Vec::with_capacity(n_t);
    for (i, &t) in times.iter().enumerate() {
        let (env, in_quadrant) = cosine_envelope(&qfi_series, t)?;
        envelope.push(env);
        envelope_in_quadrant.push(in_quadrant);
        if i == 0 || t <= times[0] {
            // t -> 0+ limit of the bound for bounded QFI
            lyapunov_bound.push(0.0);
        } else {
            lyapunov_bound.push(bound_from(&qfi_series, times[0], t)?);
        }
    }

    let fit_otoc = fit_lyapunov(&otoc_abs_series, &config.fit);
    let fit_avg_otoc = fit_lyapunov(&avg_series, &config.fit);

    // the generalized Cramér-Rao check uses the exact purity rate
    // 2 tr(rho M); finite differences on the sampled grid carry O(dt^2)
    // errors that dwarf the violation tolerance where the bound is tight
    let rate_series = TimeSeries::new(times.clone(), avg_otoc_rate.clone())?;
    let gqcrb = check_gqcrb_with_rate(&var_series, &rate_series, &qfi_series)?;
    let envelope_report = check_envelope(&avg_series, &qfi_series)?;

    let mut sandwich_violations = Vec::new();
    for i in 0..n_t {
        if p_min[i] <= SANDWICH_P_MIN {
            continue;
        }
        let tol = CHECK_TOL * qfi[i].abs().max(1.0);
        if sandwich_lower[i] - qfi[i] > tol {
            sandwich_violations.push(SandwichViolation {
                index: i,
                time: times[i],
                side: "lower".into(),
                excess: sandwich_lower[i] - qfi[i],
            });
        }
        if let Some(hi) = sandwich_upper[i] {
            if qfi[i] - hi > tol {
                sandwich_violations.push(SandwichViolation {
                    index: i,
                    time: times[i],
                    side: "upper".into(),
                    excess: qfi[i] - hi,
                });
            }
        }
    }

    let bound_vs_lambda = if fit_avg_otoc.valid {
        let t_mid = 0.5 * (fit_avg_otoc.window.0 + fit_avg_otoc.window.1);
        let (bound, rate_cap) = if t_mid > times[0] {
            let action = qsl_action(&qfi_series, t_mid)?;
            let dt = t_mid - times[0];
            let arg = envelope_report.initial_phase + 2.0 * action;
            (action * action / (2.0 * dt), arg * arg / (8.0 * dt))
        } else {
            (0.0, 0.0)
        };
        Some(BoundVsLambda {
            t_mid,
            bound,
            rate_cap,
            lambda: fit_avg_otoc.lambda_q,
            satisfied: fit_avg_otoc.lambda_q <= rate_cap + CHECK_TOL,
        })
    } else {
        None
    };

    Ok(PointBundle {
        h,
        point_seed: point_seed(config.seed, h),
        degenerate_ground_state: degenerate,
        energy_gap,
        times,
        qfi,
        qfi_all_truncated,
        avg_otoc,
        avg_otoc_rate,
        variance,
        sandwich_lower,
        sandwich_upper,
        p_min,
        otoc_re,
        otoc_im,
        envelope,
        envelope_in_quadrant,
        lyapunov_bound,
        intensive_ma2: ma2,
        fit_otoc,
        fit_avg_otoc,
        checks: PointChecks {
            gqcrb,
            envelope: envelope_report,
            sandwich_violations,
            bound_vs_lambda,
        },
    })
}

/// `(action)^2 / (2 (t - t0))` with the action integrated from the grid
/// start; identical to `lyapunov_bound` when the grid starts at 0.
fn bound_from(qfi: &TimeSeries, t0: f64, t: f64) -> Result<f64> {
    if t0 == 0.0 {
        lyapunov_bound(qfi, t)
    } else {
        let action = qsl_action(qfi, t)?;
        Ok(action * action / (2.0 * (t - t0)))
    }
}
