//! Purity, Renyi-2 entropy, spectral subsystem QFI, variance identities,
//! sandwich bounds, the QSL action integral, and the intensive criticality
//! proxy `m_A^2`.

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::dynamics::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::HermitianOperator;

/// A sampled real-valued trajectory on a strictly increasing time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidTimeSeries(format!(
                "{} times vs {} values",
                times.len(),
                values.len()
            )));
        }
        if times.is_empty() {
            return Err(Error::InvalidTimeSeries("empty series".into()));
        }
        if !times.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidTimeSeries(
                "times must be strictly increasing".into(),
            ));
        }
        Ok(Self { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Eigenvalue-sum floor below which QFI denominators are dropped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub eigen_floor: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self { eigen_floor: 1e-12 }
    }
}

impl TruncationPolicy {
    pub fn new(eigen_floor: f64) -> Result<Self> {
        if !(eigen_floor > 0.0) {
            return Err(Error::InvalidParams("eigen_floor must be positive".into()));
        }
        Ok(Self { eigen_floor })
    }
}

/// Spectral QFI value together with a flag raised when every eigenvalue pair
/// fell below the truncation floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QfiValue {
    pub value: f64,
    pub all_truncated: bool,
}

/// Purity `tr(rho^2)`, in (0, 1].
pub fn purity(rho: &DensityMatrix) -> f64 {
    // tr(rho^2) = sum_ij |rho_ij|^2 for Hermitian rho
    rho.matrix().iter().map(|z| z.norm_sqr()).sum()
}

/// Renyi-2 entropy `-ln tr(rho^2)`.
pub fn renyi2(rho: &DensityMatrix) -> f64 {
    -purity(rho).ln()
}

/// Subsystem QFI with time as the estimation parameter,
/// `I_F = 2 sum_{jk} |<j| M |k>|^2 / (p_j + p_k)`,
/// evaluated in the eigenbasis of `rho_a`; pairs with `p_j + p_k` at or below
/// the truncation floor are dropped.
///
/// `m_a` is the reduced generator (`d rho_A/dt`) for the same state and time.
pub fn qfi_spectral(
    rho_a: &DensityMatrix,
    m_a: &HermitianOperator,
    pol: &TruncationPolicy,
) -> Result<QfiValue> {
    let d = rho_a.dim();
    if m_a.dim() != d {
        return Err(Error::DimensionMismatch(m_a.dim(), d));
    }
    let (p, u) = linalg::eigh_complex(&rho_a.matrix().view())?;
    // M in the eigenbasis of rho
    let m_tilde = linalg::adjoint(&u.view()).dot(m_a.matrix()).dot(&u);
    let mut total = 0.0;
    let mut all_truncated = true;
    for j in 0..d {
        for k in 0..d {
            let denom = p[j] + p[k];
            if denom <= pol.eigen_floor {
                continue;
            }
            all_truncated = false;
            total += 2.0 * m_tilde[[j, k]].norm_sqr() / denom;
        }
    }
    Ok(QfiValue {
        value: total,
        all_truncated,
    })
}

/// Uhlmann fidelity `F = tr sqrt(sqrt(rho) sigma sqrt(rho))`.
pub fn uhlmann_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    let (p, u) = linalg::eigh_complex(&rho.matrix().view())?;
    let sqrt_p: Array1<f64> = p.mapv(|x| x.max(0.0).sqrt());
    // sqrt(rho) = U diag(sqrt(p)) U^dag
    let mut us = u.clone();
    for (k, mut col) in us.columns_mut().into_iter().enumerate() {
        let s = sqrt_p[k];
        col.mapv_inplace(|z| z * s);
    }
    let sqrt_rho = us.dot(&linalg::adjoint(&u.view()));
    let inner = sqrt_rho.dot(sigma.matrix()).dot(&sqrt_rho);
    let (w, _) = linalg::eigh_complex(&inner.view())?;
    Ok(w.iter().map(|x| x.max(0.0).sqrt()).sum())
}

/// Finite-difference QFI estimate `8 (1 - F(rho(t), rho(t+dt))) / dt^2` from
/// the Bures metric; an independent check of [`qfi_spectral`].
pub fn qfi_bures_oracle(rho_t: &DensityMatrix, rho_tdt: &DensityMatrix, dt: f64) -> Result<f64> {
    if dt == 0.0 {
        return Err(Error::InvalidParams("dt must be non-zero".into()));
    }
    let f = uhlmann_fidelity(rho_t, rho_tdt)?;
    if f > 1.0 + 1e-10 {
        return Err(Error::FidelityOverflow(f - 1.0));
    }
    Ok(8.0 * (1.0 - f.min(1.0)) / (dt * dt))
}

/// Variance of the density operator viewed as an observable,
/// `tr(rho^3) - tr(rho^2)^2`; for a qubit this equals `(3p - 1)/2 - p^2`
/// with `p` the purity.
pub fn variance_rho(rho: &DensityMatrix) -> Result<f64> {
    let p = rho.eigenvalues()?;
    let t2: f64 = p.iter().map(|x| x * x).sum();
    let t3: f64 = p.iter().map(|x| x * x * x).sum();
    Ok(t3 - t2 * t2)
}

/// The sandwich bounds `|M_A|_2^2 / p_max <= I_F <= |M_A|_2^2 / p_min`.
///
/// These follow from `2 p_min <= p_j + p_k <= 2 p_max` in the spectral sum
/// of the QFI; both sides are attained when the state is maximally mixed.
/// When `p_min` is at or below the default truncation floor the upper bound
/// is reported as `+inf`.
pub fn sandwich_bounds(rho_a: &DensityMatrix, m_a: &HermitianOperator) -> Result<(f64, f64)> {
    if m_a.dim() != rho_a.dim() {
        return Err(Error::DimensionMismatch(m_a.dim(), rho_a.dim()));
    }
    let p = rho_a.eigenvalues()?;
    let p_min = p[0];
    let p_max = p[p.len() - 1];
    let norm_sq = m_a.fro_norm_sq();
    let lower = norm_sq / p_max;
    let floor = TruncationPolicy::default().eigen_floor;
    let upper = if p_min > floor {
        norm_sq / p_min
    } else {
        f64::INFINITY
    };
    Ok((lower, upper))
}

/// QSL action `integral_0^t sqrt(I_F(s)) ds` by the trapezoidal rule on the
/// sampled grid, with linear interpolation for a `t_end` between grid points.
/// The integral starts at the first grid time.
pub fn qsl_action(qfi: &TimeSeries, t_end: f64) -> Result<f64> {
    let times = qfi.times();
    let values = qfi.values();
    let (t0, t_last) = (times[0], times[times.len() - 1]);
    if t_end < t0 || t_end > t_last {
        return Err(Error::TimeOutsideGrid(t_end, t0, t_last));
    }
    if let Some(bad) = values.iter().find(|v| **v < 0.0) {
        return Err(Error::InvalidTimeSeries(format!(
            "negative QFI value {bad} in action integrand"
        )));
    }
    let mut action = 0.0;
    for i in 1..times.len() {
        let (ta, tb) = (times[i - 1], times[i]);
        let (fa, fb) = (values[i - 1].sqrt(), values[i].sqrt());
        if t_end >= tb {
            action += 0.5 * (tb - ta) * (fa + fb);
        } else {
            if t_end > ta {
                let frac = (t_end - ta) / (tb - ta);
                let f_end = fa + frac * (fb - fa);
                action += 0.5 * (t_end - ta) * (fa + f_end);
            }
            break;
        }
    }
    Ok(action)
}

/// Intensive Hilbert-Schmidt norm `|M_A|_2^2 / N`.
pub fn intensive_ma2(m_a: &HermitianOperator, n_sites: usize) -> f64 {
    m_a.fro_norm_sq() / n_sites as f64
}

/// Exact rate of change of the purity, `d/dt tr(rho^2) = 2 tr(rho M)` with
/// `M` the reduced generator at the same instant.
pub fn purity_rate(rho: &DensityMatrix, m: &HermitianOperator) -> Result<f64> {
    if m.dim() != rho.dim() {
        return Err(Error::DimensionMismatch(m.dim(), rho.dim()));
    }
    let d = rho.dim();
    let mut trace = 0.0;
    for i in 0..d {
        for j in 0..d {
            trace += (rho.matrix()[[i, j]] * m.matrix()[[j, i]]).re;
        }
    }
    Ok(2.0 * trace)
}
