//! Shared oracle helpers for the integration suites: independent propagators
//! built from Taylor series only.

use ndarray::{Array1, Array2};

use qstopwatch::dynamics::PureState;
use qstopwatch::operators::HermitianOperator;
use qstopwatch::C64;

/// One 6th-order Taylor step of `exp(-i H dt)` applied to a state vector.
pub fn taylor6_step(h: &HermitianOperator, psi: &Array1<C64>, dt: f64) -> Array1<C64> {
    let mut out = psi.clone();
    let mut term = psi.clone();
    for k in 1..=6 {
        let applied = h.apply(&term.view()).unwrap();
        let factor = C64::new(0.0, -dt) / C64::new(k as f64, 0.0);
        term = applied.mapv(|z| z * factor);
        out = &out + &term;
    }
    out
}

/// Sub-stepped 6th-order Taylor propagation; the local error per step is
/// O((|H| dt)^7) so enough steps push it below any comparison tolerance.
pub fn taylor6_propagate(
    h: &HermitianOperator,
    psi: &PureState,
    t: f64,
    steps: usize,
) -> Array1<C64> {
    let dt = t / steps as f64;
    let mut state = psi.amplitudes().clone();
    for _ in 0..steps {
        state = taylor6_step(h, &state, dt);
    }
    state
}

/// Dense propagator `exp(-i H t)` by scaling-and-squaring a 12th-order
/// Taylor series; independent of any eigendecomposition.
pub fn dense_propagator(h: &Array2<C64>, t: f64) -> Array2<C64> {
    let dim = h.nrows();
    let mut norm_est: f64 = 0.0;
    for row in h.rows() {
        norm_est = norm_est.max(row.iter().map(|z| z.norm()).sum());
    }
    let squarings = (norm_est * t.abs()).log2().ceil().max(0.0) as u32 + 4;
    let small_t = t / 2f64.powi(squarings as i32);
    let mut u = Array2::<C64>::eye(dim);
    let mut term = Array2::<C64>::eye(dim);
    for k in 1..=12 {
        term = term.dot(h);
        let factor = C64::new(0.0, -small_t) / C64::new(k as f64, 0.0);
        term.mapv_inplace(|z| z * factor);
        u = &u + &term;
    }
    for _ in 0..squarings {
        u = u.dot(&u);
    }
    u
}
