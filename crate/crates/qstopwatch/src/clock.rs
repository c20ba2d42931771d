//! Ancilla interferometric clock: controlled forward/backward evolution,
//! branch states, ancilla coherence (an OTOC of the chain), and the QFI
//! identities that make the Lyapunov bound an equality.
//!
//! The full ancilla x chain system is never materialized; the branch states
//! have a closed form in terms of the chain propagator alone.

use ndarray::array;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve, DensityMatrix, PureState, SpectralDecomposition};
use crate::error::{Error, Result};
use crate::metrology::{qfi_spectral, qsl_action, TimeSeries, TruncationPolicy};
use crate::operators::{ChainParams, HermitianOperator, LocalOperator};
use crate::C64;

/// Imaginary parts of the coherence above this abort the identity checks,
/// which presume a real `O_t`.
pub const COHERENCE_IM_TOL: f64 = 1e-9;

/// Protocol data: the chain, the two probe unitaries, and the initial chain
/// state.
#[derive(Debug, Clone)]
pub struct ClockProtocol {
    pub chain: ChainParams,
    pub o1: LocalOperator,
    pub o2: LocalOperator,
    pub initial: PureState,
}

impl ClockProtocol {
    pub fn new(
        chain: ChainParams,
        o1: LocalOperator,
        o2: LocalOperator,
        initial: PureState,
    ) -> Result<Self> {
        for op in [&o1, &o2] {
            let dev = op.unitarity_deviation();
            if dev > 1e-10 {
                return Err(Error::NotUnitary(dev));
            }
            if let Some(&site) = op.support().iter().find(|&&s| s >= chain.n_sites) {
                return Err(Error::SiteOutOfRange {
                    site,
                    n_sites: chain.n_sites,
                });
            }
        }
        if !o1.disjoint_support(&o2) {
            return Err(Error::InvalidParams(
                "clock operators must have disjoint supports".into(),
            ));
        }
        if initial.dim() != chain.dim() {
            return Err(Error::DimensionMismatch(initial.dim(), chain.dim()));
        }
        Ok(Self {
            chain,
            o1,
            o2,
            initial,
        })
    }
}

/// The two interferometer branch states.
#[derive(Debug, Clone)]
pub struct BranchPair {
    pub left: PureState,
    pub right: PureState,
}

impl BranchPair {
    /// Ancilla coherence `<L|R>`.
    pub fn coherence(&self) -> C64 {
        self.left.overlap(&self.right)
    }
}

/// Branch states
/// `|R(t)> = e^{+iHt} O2 e^{-iHt} O1 |psi>` and
/// `|L(t)> = O1 e^{+iHt} O2 e^{-iHt} |psi>`.
pub fn branches(
    spec: &SpectralDecomposition,
    proto: &ClockProtocol,
    t: f64,
) -> Result<BranchPair> {
    let n = proto.chain.n_sites;
    // right: O1, forward, O2, backward
    let x = proto.o1.apply(&proto.initial.amplitudes().view(), n)?;
    let x = evolve(spec, &PureState::from_unnormalized(x)?, t);
    let x = proto.o2.apply(&x.amplitudes().view(), n)?;
    let right = evolve(spec, &PureState::from_unnormalized(x)?, -t);
    // left: forward, O2, backward, O1
    let y = evolve(spec, &proto.initial, t);
    let y = proto.o2.apply(&y.amplitudes().view(), n)?;
    let y = evolve(spec, &PureState::from_unnormalized(y)?, -t);
    let y = proto.o1.apply(&y.amplitudes().view(), n)?;
    let left = PureState::from_unnormalized(y)?;
    Ok(BranchPair { left, right })
}

/// Reduced ancilla state `[[1, c], [c*, 1]]/2` with `c = <L|R>`.
pub fn ancilla_state(pair: &BranchPair) -> Result<DensityMatrix> {
    let c = pair.coherence();
    ancilla_from_coherence(c)
}

/// Ancilla state for a given coherence value.
pub fn ancilla_from_coherence(c: C64) -> Result<DensityMatrix> {
    let half = C64::new(0.5, 0.0);
    DensityMatrix::new(array![
        [half, 0.5 * c],
        [0.5 * c.conj(), half]
    ])
}

/// The coherence trajectory `<L(t)|R(t)>` on a time grid, asserted real.
///
/// Fails if any imaginary part exceeds [`COHERENCE_IM_TOL`]; the identity
/// checks below presume a real coherence (real Hamiltonian, real initial
/// state, Pauli-string probes).
pub fn coherence_series(
    spec: &SpectralDecomposition,
    proto: &ClockProtocol,
    times: &[f64],
) -> Result<TimeSeries> {
    let mut values = Vec::with_capacity(times.len());
    for &t in times {
        let pair = branches(spec, proto, t)?;
        let c = pair.coherence();
        if c.im.abs() > COHERENCE_IM_TOL {
            return Err(Error::InvalidParams(format!(
                "coherence has imaginary part {:.3e} at t={t}; identity checks need real O_t",
                c.im
            )));
        }
        values.push(c.re);
    }
    TimeSeries::new(times.to_vec(), values)
}

/// Report of the ancilla QFI identity `I_F = (dO/dt)^2 / (1 - O^2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClockQfiReport {
    /// Interior grid times at which the identity was evaluated.
    pub times: Vec<f64>,
    /// QFI from the spectral formula with the finite-difference generator.
    pub qfi_spectral: Vec<f64>,
    /// QFI from the coherence identity.
    pub qfi_formula: Vec<f64>,
    /// Max relative deviation between the two columns.
    pub max_rel_dev: f64,
    /// Interior indices skipped because `|O_t| = 1` there.
    pub skipped: Vec<usize>,
}

/// Compare the spectral QFI of the ancilla state (with its central-difference
/// generator) against the coherence identity at every interior grid point.
pub fn clock_qfi_identity(coherence: &TimeSeries) -> Result<ClockQfiReport> {
    let times = coherence.times();
    let o = coherence.values();
    let n = times.len();
    if n < 3 {
        return Err(Error::InvalidTimeSeries(
            "need at least 3 points for interior derivatives".into(),
        ));
    }
    let pol = TruncationPolicy::default();
    let mut out_times = Vec::new();
    let mut spectral = Vec::new();
    let mut formula = Vec::new();
    let mut skipped = Vec::new();
    let mut max_rel_dev: f64 = 0.0;
    for i in 1..n - 1 {
        let denom = 1.0 - o[i] * o[i];
        if denom <= pol.eigen_floor {
            skipped.push(i);
            continue;
        }
        let dot = (o[i + 1] - o[i - 1]) / (times[i + 1] - times[i - 1]);
        let rho = ancilla_from_coherence(C64::new(o[i], 0.0))?;
        let half_dot = C64::new(0.5 * dot, 0.0);
        let zero = C64::new(0.0, 0.0);
        let gen = HermitianOperator::new(array![[zero, half_dot], [half_dot, zero]])?;
        let qfi = qfi_spectral(&rho, &gen, &pol)?.value;
        let ident = dot * dot / denom;
        out_times.push(times[i]);
        spectral.push(qfi);
        formula.push(ident);
        let scale = ident.abs().max(qfi.abs());
        if scale > 1e-12 {
            max_rel_dev = max_rel_dev.max((qfi - ident).abs() / scale);
        }
    }
    Ok(ClockQfiReport {
        times: out_times,
        qfi_spectral: spectral,
        qfi_formula: formula,
        max_rel_dev,
        skipped,
    })
}

impl ClockQfiReport {
    /// Ancilla QFI as a time series usable for the action integral. The
    /// first grid point (where `O = 1` makes the identity 0/0) is backfilled
    /// with the first interior value.
    pub fn qfi_series(&self, t0: f64) -> Result<TimeSeries> {
        if self.times.is_empty() {
            return Err(Error::InvalidTimeSeries("no interior QFI points".into()));
        }
        let mut times = Vec::with_capacity(self.times.len() + 1);
        let mut values = Vec::with_capacity(self.times.len() + 1);
        if t0 < self.times[0] {
            times.push(t0);
            values.push(self.qfi_formula[0]);
        }
        times.extend_from_slice(&self.times);
        values.extend_from_slice(&self.qfi_formula);
        TimeSeries::new(times, values)
    }
}

/// Report of the cosine equality `O_t = cos(integral sqrt(I_F))` within the
/// first-quadrant window, plus the early-time Lyapunov comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClockCosineReport {
    pub max_abs_dev: f64,
    /// Last time inside the first-quadrant window.
    pub window_end: f64,
    pub n_window_points: usize,
    /// `-ln O(T) / T` at the window end.
    pub lambda_estimate: f64,
    /// `(integral sqrt(I_F))^2 / (2T)` at the window end.
    pub lambda_bound: f64,
}

/// Check the cosine equality pointwise over the first-quadrant window of the
/// action, and compare the two early-time Lyapunov expressions at the window
/// end.
pub fn clock_cosine_identity(
    qfi: &TimeSeries,
    coherence: &TimeSeries,
) -> Result<ClockCosineReport> {
    let t_max_qfi = *qfi.times().last().expect("non-empty series");
    let mut max_abs_dev: f64 = 0.0;
    let mut window_end = coherence.times()[0];
    let mut last_o = coherence.values()[0];
    let mut n_window = 0usize;
    for (&t, &o) in coherence.times().iter().zip(coherence.values()) {
        if t > t_max_qfi {
            break;
        }
        let action = qsl_action(qfi, t)?;
        if action > std::f64::consts::FRAC_PI_2 {
            break;
        }
        max_abs_dev = max_abs_dev.max((o - action.cos()).abs());
        window_end = t;
        last_o = o;
        n_window += 1;
    }
    if n_window < 2 {
        return Err(Error::InvalidTimeSeries(
            "first-quadrant window is empty".into(),
        ));
    }
    let action_end = qsl_action(qfi, window_end)?;
    let lambda_estimate = if last_o > 0.0 && window_end > 0.0 {
        -last_o.ln() / window_end
    } else {
        f64::NAN
    };
    let lambda_bound = if window_end > 0.0 {
        action_end * action_end / (2.0 * window_end)
    } else {
        0.0
    };
    Ok(ClockCosineReport {
        max_abs_dev,
        window_end,
        n_window_points: n_window,
        lambda_estimate,
        lambda_bound,
    })
}
