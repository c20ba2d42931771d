//! Eigendecomposition, ground-state preparation, quench, exact time
//! evolution, Heisenberg-picture operators, partial trace, and the reduced
//! generator `M_A(t) = tr_B(d rho/dt)`.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::{HermitianOperator, LocalOperator};
use crate::C64;

/// Relative gap below which the ground state is flagged degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// Spectral decomposition of a Hermitian operator: ascending eigenvalues and
/// a unitary whose columns are the eigenvectors.
///
/// When the operator is real in the computational basis (the Ising chain
/// always is), a real copy of the eigenvector matrix is kept and all
/// basis changes run through a packed-real `dgemm`, which is substantially
/// faster than complex matrix-vector products.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Array1<f64>,
    eigenvectors: Array2<C64>,
    real_eigenvectors: Option<Array2<f64>>,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &Array1<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &Array2<C64> {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Coefficients of `psi` in the eigenbasis, `V^dag psi`.
    pub fn to_eigenbasis(&self, psi: &Array1<C64>) -> Array1<C64> {
        match &self.real_eigenvectors {
            Some(v) => linalg::apply_real_to_complex(&v.view(), &psi.view(), true),
            None => {
                let conj = psi.mapv(|z| z.conj());
                self.eigenvectors.t().dot(&conj).mapv(|z| z.conj())
            }
        }
    }

    /// Map eigenbasis coefficients back, `V c`.
    pub fn from_eigenbasis(&self, coeffs: &Array1<C64>) -> Array1<C64> {
        match &self.real_eigenvectors {
            Some(v) => linalg::apply_real_to_complex(&v.view(), &coeffs.view(), false),
            None => self.eigenvectors.dot(coeffs),
        }
    }

    /// Phase factors `exp(-i E_n t)`.
    pub fn phases(&self, t: f64) -> Array1<C64> {
        self.eigenvalues.mapv(|e| C64::from_polar(1.0, -e * t))
    }

    /// Dense propagator `U(t) = exp(-i H t)`.
    pub fn propagator(&self, t: f64) -> Array2<C64> {
        let phases = self.phases(t);
        let mut vp = self.eigenvectors.clone();
        for (k, mut col) in vp.columns_mut().into_iter().enumerate() {
            let p = phases[k];
            col.mapv_inplace(|z| z * p);
        }
        vp.dot(&linalg::adjoint(&self.eigenvectors.view()))
    }
}

/// Normalized global state vector of the chain.
#[derive(Debug, Clone)]
pub struct PureState {
    amplitudes: Array1<C64>,
}

impl PureState {
    pub const NORM_TOL: f64 = 1e-10;

    /// Wrap an already normalized amplitude vector.
    pub fn new(amplitudes: Array1<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > Self::NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes })
    }

    /// Normalize and wrap.
    pub fn from_unnormalized(amplitudes: Array1<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::NotNormalized(0.0));
        }
        Ok(Self {
            amplitudes: amplitudes.mapv(|z| z / norm),
        })
    }

    /// Computational basis state `|index>` on `n_sites` qubits.
    pub fn basis_state(n_sites: usize, index: usize) -> Self {
        let mut amplitudes = Array1::<C64>::zeros(1 << n_sites);
        amplitudes[index] = C64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Number of sites, `log2(dim)`.
    pub fn n_sites(&self) -> usize {
        self.amplitudes.len().trailing_zeros() as usize
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Inner product `<self|other>`.
    pub fn overlap(&self, other: &Self) -> C64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// A bipartition of the chain into subsystem A and environment B.
/// B may be empty, in which case A is the whole system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    sites_a: Vec<usize>,
    sites_b: Vec<usize>,
    n_sites: usize,
}

impl Bipartition {
    pub fn new(mut sites_a: Vec<usize>, n_sites: usize) -> Result<Self> {
        sites_a.sort_unstable();
        if sites_a.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidBipartition("duplicate sites in A".into()));
        }
        if let Some(&s) = sites_a.iter().find(|&&s| s >= n_sites) {
            return Err(Error::InvalidBipartition(format!(
                "site {s} out of range for {n_sites} sites"
            )));
        }
        if sites_a.is_empty() {
            return Err(Error::InvalidBipartition("subsystem A is empty".into()));
        }
        let sites_b: Vec<usize> = (0..n_sites).filter(|s| !sites_a.contains(s)).collect();
        Ok(Self {
            sites_a,
            sites_b,
            n_sites,
        })
    }

    pub fn sites_a(&self) -> &[usize] {
        &self.sites_a
    }

    pub fn sites_b(&self) -> &[usize] {
        &self.sites_b
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim_a(&self) -> usize {
        1 << self.sites_a.len()
    }

    pub fn dim_b(&self) -> usize {
        1 << self.sites_b.len()
    }

    /// Reshape a state vector into the d_A x d_B coefficient matrix with the
    /// global site-ordering convention.
    pub fn reshape(&self, psi: &PureState) -> Result<Array2<C64>> {
        self.reshape_amplitudes(&psi.amplitudes().view())
    }

    /// Same as [`Bipartition::reshape`] for a raw (not necessarily
    /// normalized) amplitude vector.
    pub fn reshape_amplitudes(&self, amps: &ndarray::ArrayView1<C64>) -> Result<Array2<C64>> {
        let dim = 1usize << self.n_sites;
        if amps.len() != dim {
            return Err(Error::DimensionMismatch(amps.len(), dim));
        }
        let ka = self.sites_a.len();
        let kb = self.sites_b.len();
        let mut c = Array2::<C64>::zeros((1 << ka, 1 << kb));
        for idx in 0..dim {
            let mut a = 0usize;
            for (j, &s) in self.sites_a.iter().enumerate() {
                a |= ((idx >> (self.n_sites - 1 - s)) & 1) << (ka - 1 - j);
            }
            let mut b = 0usize;
            for (j, &s) in self.sites_b.iter().enumerate() {
                b |= ((idx >> (self.n_sites - 1 - s)) & 1) << (kb - 1 - j);
            }
            c[[a, b]] = amps[idx];
        }
        Ok(c)
    }
}

/// A density matrix, Hermitian with unit trace.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: Array2<C64>,
}

impl DensityMatrix {
    pub const TOL: f64 = 1e-10;

    pub fn new(matrix: Array2<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch(matrix.nrows(), matrix.ncols()));
        }
        let dev = linalg::hermiticity_deviation(&matrix.view());
        if dev > Self::TOL {
            return Err(Error::NotHermitian(dev));
        }
        let trace: C64 = matrix.diag().iter().sum();
        if (trace.re - 1.0).abs() > Self::TOL || trace.im.abs() > Self::TOL {
            return Err(Error::InvalidParams(format!(
                "density matrix trace is {trace}, expected 1"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Result<Array1<f64>> {
        let (w, _) = linalg::eigh_complex(&self.matrix.view())?;
        Ok(w)
    }
}

/// Eigendecompose a Hermitian operator; eigenvalues ascend and the
/// reconstruction `V diag(E) V^dag` reproduces the input.
pub fn eigendecompose(op: &HermitianOperator) -> Result<SpectralDecomposition> {
    if let Some(r) = op.real_matrix() {
        let (w, v) = linalg::eigh_real(&r.view())?;
        let complex = v.mapv(|x| C64::new(x, 0.0));
        Ok(SpectralDecomposition {
            eigenvalues: w,
            eigenvectors: complex,
            real_eigenvectors: Some(v),
        })
    } else {
        let (w, v) = linalg::eigh_complex(&op.matrix().view())?;
        Ok(SpectralDecomposition {
            eigenvalues: w,
            eigenvectors: v,
            real_eigenvectors: None,
        })
    }
}

/// Ground state (lowest-eigenvalue column) and a degeneracy flag raised when
/// the gap `E_1 - E_0` falls below `1e-8 * max(1, |E_0|)`.
pub fn ground_state(spec: &SpectralDecomposition) -> (PureState, bool) {
    let e0 = spec.eigenvalues[0];
    let degenerate = if spec.dim() > 1 {
        (spec.eigenvalues[1] - e0) < DEGENERACY_TOL * e0.abs().max(1.0)
    } else {
        false
    };
    let amplitudes = spec.eigenvectors.column(0).to_owned();
    let state = PureState::from_unnormalized(amplitudes)
        .expect("eigenvector column cannot have zero norm");
    (state, degenerate)
}

/// Apply a local unitary to the state (the sudden quench). The operator must
/// be unitary on its support so the norm is preserved.
pub fn quench(psi: &PureState, op: &LocalOperator) -> Result<PureState> {
    let dev = op.unitarity_deviation();
    if dev > 1e-10 {
        return Err(Error::NotUnitary(dev));
    }
    let n = psi.n_sites();
    let amplitudes = op.apply(&psi.amplitudes().view(), n)?;
    PureState::from_unnormalized(amplitudes)
}

/// Exact time evolution `exp(-i H t) psi0` through the eigenbasis.
pub fn evolve(spec: &SpectralDecomposition, psi0: &PureState, t: f64) -> PureState {
    let mut coeffs = spec.to_eigenbasis(psi0.amplitudes());
    let phases = spec.phases(t);
    coeffs
        .iter_mut()
        .zip(phases.iter())
        .for_each(|(c, p)| *c *= p);
    let amplitudes = spec.from_eigenbasis(&coeffs);
    PureState::from_unnormalized(amplitudes).expect("unitary evolution preserves the norm")
}

/// Heisenberg-picture operator `B(t) = exp(iHt) B exp(-iHt)` as a dense
/// matrix. Intended for small chains; the OTOC routines use state-vector
/// paths instead.
pub fn heisenberg(spec: &SpectralDecomposition, b: &LocalOperator, t: f64) -> Result<Array2<C64>> {
    let n_sites = spec.dim().trailing_zeros() as usize;
    let b_full = crate::operators::embed(b, n_sites)?;
    let u_fwd = spec.propagator(t); // exp(-iHt)
    let u_bwd = spec.propagator(-t); // exp(+iHt)
    Ok(u_bwd.dot(&b_full).dot(&u_fwd))
}

/// Reduced density matrix of subsystem A, `tr_B |psi><psi|`, computed as
/// `C C^dag` from the reshaped coefficient matrix.
pub fn partial_trace(psi: &PureState, part: &Bipartition) -> Result<DensityMatrix> {
    let c = part.reshape(psi)?;
    let rho = c.dot(&linalg::adjoint(&c.view()));
    DensityMatrix::new(rho)
}

/// Reduced generator `M_A(t) = tr_B(d rho/dt) = tr_B(-i [H, rho(t)])`.
///
/// With `phi = -i H psi_t` this is `tr_B(|phi><psi| + |psi><phi|)`, i.e.
/// `C_phi C_psi^dag + C_psi C_phi^dag`; Hermitian and traceless.
pub fn reduced_generator(
    h_full: &HermitianOperator,
    psi_t: &PureState,
    part: &Bipartition,
) -> Result<HermitianOperator> {
    let minus_i = C64::new(0.0, -1.0);
    let phi = h_full.apply(&psi_t.amplitudes().view())?.mapv(|z| minus_i * z);
    let c_psi = part.reshape(psi_t)?;
    let c_phi = part.reshape_amplitudes(&phi.view())?;
    let term = c_phi.dot(&linalg::adjoint(&c_psi.view()));
    let m = &term + &linalg::adjoint(&term.view());
    HermitianOperator::new(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{build_hamiltonian, ChainParams, PauliAxis};
    use ndarray::array;
    use rand::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_state(n_sites: usize, seed: u64) -> PureState {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        let amps = Array1::from_shape_fn(1 << n_sites, |_| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        PureState::from_unnormalized(amps).unwrap()
    }

    #[test]
    fn eigendecompose_pauli_z() {
        let z = HermitianOperator::new(crate::operators::pauli_matrix(PauliAxis::Z)).unwrap();
        let spec = eigendecompose(&z).unwrap();
        assert!((spec.eigenvalues()[0] + 1.0).abs() < 1e-14);
        assert!((spec.eigenvalues()[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigendecompose_two_site_ising() {
        let p = ChainParams::new(2, 1.0, 0.0, 0.0).unwrap();
        let spec = eigendecompose(&build_hamiltonian(&p).unwrap()).unwrap();
        let expected = [-1.0, -1.0, 1.0, 1.0];
        for (got, want) in spec.eigenvalues().iter().zip(expected) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn reconstruction_of_random_hermitian() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        let n = 8;
        let raw = Array2::from_shape_fn((n, n), |_| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let herm = &raw + &linalg::adjoint(&raw.view());
        let op = HermitianOperator::new(herm.clone()).unwrap();
        let spec = eigendecompose(&op).unwrap();
        // V diag(E) V^dag reconstructs the input to 1e-9 relative
        let mut vd = spec.eigenvectors().clone();
        for (k, mut col) in vd.columns_mut().into_iter().enumerate() {
            let e = spec.eigenvalues()[k];
            col.mapv_inplace(|z| z * e);
        }
        let rec = vd.dot(&linalg::adjoint(&spec.eigenvectors().view()));
        let scale = linalg::max_abs(&herm.view());
        let err = linalg::max_abs(&(&rec - op.matrix()).view());
        assert!(err < 1e-9 * scale, "reconstruction error {err:.3e}");
        // V^dag V = I to 1e-10
        let vtv = linalg::adjoint(&spec.eigenvectors().view()).dot(spec.eigenvectors());
        for i in 0..n {
            for j in 0..n {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((vtv[[i, j]] - c(expected, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn ground_state_of_minus_z_is_up() {
        let m = crate::operators::pauli_matrix(PauliAxis::Z).mapv(|z| -z);
        let op = HermitianOperator::new(m).unwrap();
        let spec = eigendecompose(&op).unwrap();
        let (gs, degenerate) = ground_state(&spec);
        assert!(!degenerate);
        assert!((gs.amplitudes()[0].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ferromagnetic_ground_state_is_degenerate() {
        let p = ChainParams::new(2, 1.0, 0.0, 0.0).unwrap();
        let spec = eigendecompose(&build_hamiltonian(&p).unwrap()).unwrap();
        let (_, degenerate) = ground_state(&spec);
        assert!(degenerate);
    }

    #[test]
    fn quench_flips_first_spin() {
        let psi = PureState::basis_state(3, 0); // |000>
        let op = LocalOperator::pauli(PauliAxis::X, 0);
        let out = quench(&psi, &op).unwrap();
        // |100> has index 4
        assert!((out.amplitudes()[4].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quench_twice_restores_state() {
        let psi = random_state(3, 3);
        let op = LocalOperator::pauli(PauliAxis::X, 1);
        let once = quench(&psi, &op).unwrap();
        let twice = quench(&once, &op).unwrap();
        for (a, b) in twice.amplitudes().iter().zip(psi.amplitudes().iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn quench_rejects_non_unitary() {
        let psi = PureState::basis_state(2, 0);
        let m = array![[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.5, 0.0)]];
        let op = LocalOperator::new(vec![0], m).unwrap();
        assert!(matches!(quench(&psi, &op), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn evolve_at_zero_is_identity() {
        let p = ChainParams::new(4, 1.0, 1.05, 0.4).unwrap();
        let spec = eigendecompose(&build_hamiltonian(&p).unwrap()).unwrap();
        let psi = random_state(4, 5);
        let out = evolve(&spec, &psi, 0.0);
        for (a, b) in out.amplitudes().iter().zip(psi.amplitudes().iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn evolve_single_qubit_analytic() {
        // H = sz, psi0 = |+>, t = pi/4 -> (e^{-i pi/4}|0> + e^{i pi/4}|1>)/sqrt(2)
        let op = HermitianOperator::new(crate::operators::pauli_matrix(PauliAxis::Z)).unwrap();
        let spec = eigendecompose(&op).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = PureState::new(ndarray::arr1(&[c(s, 0.0), c(s, 0.0)])).unwrap();
        let t = std::f64::consts::FRAC_PI_4;
        let out = evolve(&spec, &psi, t);
        let expected0 = C64::from_polar(s, -t);
        let expected1 = C64::from_polar(s, t);
        assert!((out.amplitudes()[0] - expected0).norm() < 1e-12);
        assert!((out.amplitudes()[1] - expected1).norm() < 1e-12);
    }

    #[test]
    fn evolve_preserves_norm_over_long_times() {
        let p = ChainParams::new(5, 1.0, 0.9, 0.4).unwrap();
        let spec = eigendecompose(&build_hamiltonian(&p).unwrap()).unwrap();
        let psi = random_state(5, 17);
        for &t in &[0.0, 1.0, 7.5, 23.0, 50.0] {
            let out = evolve(&spec, &psi, t);
            assert!((out.norm() - 1.0).abs() < 1e-10, "norm drift at t={t}");
        }
    }

    #[test]
    fn heisenberg_at_zero_is_embedding() {
        let p = ChainParams::new(3, 1.0, 0.8, 0.4).unwrap();
        let spec = eigendecompose(&build_hamiltonian(&p).unwrap()).unwrap();
        let b = LocalOperator::pauli(PauliAxis::Z, 1);
        let bt = heisenberg(&spec, &b, 0.0).unwrap();
        let b_full = crate::operators::embed(&b, 3).unwrap();
        let err = linalg::max_abs(&(&bt - &b_full).view());
        assert!(err < 1e-10);
    }

    #[test]
    fn heisenberg_spectrum_and_norm_invariant() {
        let p = ChainParams::new(4, 1.0, 1.05, 0.4).unwrap();
        let spec = eigendecompose(&build_hamiltonian(&p).unwrap()).unwrap();
        let b = LocalOperator::pauli(PauliAxis::Z, 2);
        let norm0 = linalg::fro_norm_sq(&heisenberg(&spec, &b, 0.0).unwrap().view());
        for &t in &[0.3, 1.7, 4.2] {
            let bt = heisenberg(&spec, &b, t).unwrap();
            let herm = HermitianOperator::new(bt.clone()).unwrap();
            let s = eigendecompose(&herm).unwrap();
            // spectrum of a single-site Pauli embedded in 2^4: +-1 each 8 times
            for (k, e) in s.eigenvalues().iter().enumerate() {
                let want = if k < 8 { -1.0 } else { 1.0 };
                assert!((e - want).abs() < 1e-9);
            }
            let norm_t = linalg::fro_norm_sq(&bt.view());
            assert!((norm_t - norm0).abs() < 1e-10 * norm0.max(1.0));
        }
    }

    #[test]
    fn heisenberg_group_law() {
        let p = ChainParams::new(3, 1.0, 1.05, 0.4).unwrap();
        let spec = eigendecompose(&build_hamiltonian(&p).unwrap()).unwrap();
        let b = LocalOperator::pauli(PauliAxis::Z, 1);
        let (t, s) = (0.4, 0.9);
        let b_ts = heisenberg(&spec, &b, t + s).unwrap();
        // B(t+s) = U(-s) B(t) U(s)
        let bt = heisenberg(&spec, &b, t).unwrap();
        let composed = spec.propagator(-s).dot(&bt).dot(&spec.propagator(s));
        let err = linalg::max_abs(&(&b_ts - &composed).view());
        assert!(err < 1e-9, "group law violated by {err:.3e}");
    }

    #[test]
    fn partial_trace_of_bell_state() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = Array1::<C64>::zeros(4);
        amps[0] = c(s, 0.0); // |00>
        amps[3] = c(s, 0.0); // |11>
        let psi = PureState::new(amps).unwrap();
        let part = Bipartition::new(vec![0], 2).unwrap();
        let rho = partial_trace(&psi, &part).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expected = if i == j { 0.5 } else { 0.0 };
                assert!((rho.matrix()[[i, j]] - c(expected, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn partial_trace_of_product_state_is_pure() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(23);
        let a = Array1::from_shape_fn(2, |_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let b = Array1::from_shape_fn(4, |_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let mut amps = Array1::<C64>::zeros(8);
        for i in 0..2 {
            for j in 0..4 {
                amps[i * 4 + j] = a[i] * b[j];
            }
        }
        let psi = PureState::from_unnormalized(amps).unwrap();
        let part = Bipartition::new(vec![0], 3).unwrap();
        let rho = partial_trace(&psi, &part).unwrap();
        let purity: f64 = rho.matrix().iter().map(|z| z.norm_sqr()).sum();
        assert!((purity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_has_unit_trace() {
        let psi = random_state(5, 31);
        let part = Bipartition::new(vec![1, 3], 5).unwrap();
        let rho = partial_trace(&psi, &part).unwrap();
        let trace: C64 = rho.matrix().diag().iter().sum();
        assert!((trace.re - 1.0).abs() < 1e-12 && trace.im.abs() < 1e-12);
    }

    #[test]
    fn schmidt_duality_of_partial_traces() {
        // non-zero eigenvalues of rho_A and rho_B coincide
        for seed in [1u64, 2, 3] {
            let psi = random_state(6, seed);
            let part_a = Bipartition::new(vec![0, 2], 6).unwrap();
            let part_b = Bipartition::new(vec![1, 3, 4, 5], 6).unwrap();
            let wa = partial_trace(&psi, &part_a).unwrap().eigenvalues().unwrap();
            let wb = partial_trace(&psi, &part_b).unwrap().eigenvalues().unwrap();
            let mut la: Vec<f64> = wa.into_iter().filter(|x| *x > 1e-12).collect();
            let mut lb: Vec<f64> = wb.into_iter().filter(|x| *x > 1e-12).collect();
            la.sort_by(|a, b| a.partial_cmp(b).unwrap());
            lb.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_eq!(la.len(), lb.len());
            for (x, y) in la.iter().zip(lb.iter()) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn reduced_generator_is_traceless_hermitian() {
        let p = ChainParams::new(4, 1.0, 1.05, 0.4).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let spec = eigendecompose(&h).unwrap();
        let psi0 = random_state(4, 41);
        let part = Bipartition::new(vec![0], 4).unwrap();
        for &t in &[0.0, 0.7, 2.3] {
            let psi_t = evolve(&spec, &psi0, t);
            let m = reduced_generator(&h, &psi_t, &part).unwrap();
            let trace: C64 = m.matrix().diag().iter().sum();
            assert!(trace.norm() < 1e-10, "trace {trace} at t={t}");
        }
    }

    #[test]
    fn reduced_generator_decoupled_case() {
        // H = H_A (x) I + I (x) H_B, product state: M_A = -i [H_A, rho_A]
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(53);
        let ha_raw = Array2::from_shape_fn((2, 2), |_| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let ha = &ha_raw + &linalg::adjoint(&ha_raw.view());
        let hb_raw = Array2::from_shape_fn((4, 4), |_| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let hb = &hb_raw + &linalg::adjoint(&hb_raw.view());

        let op_a = LocalOperator::new(vec![0], ha.clone()).unwrap();
        let op_b = LocalOperator::new(vec![1, 2], hb).unwrap();
        let h_full = &crate::operators::embed(&op_a, 3).unwrap()
            + &crate::operators::embed(&op_b, 3).unwrap();
        let h = HermitianOperator::new(h_full).unwrap();

        let a = Array1::from_shape_fn(2, |_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let b = Array1::from_shape_fn(4, |_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let mut amps = Array1::<C64>::zeros(8);
        for i in 0..2 {
            for j in 0..4 {
                amps[i * 4 + j] = a[i] * b[j];
            }
        }
        let psi = PureState::from_unnormalized(amps).unwrap();
        let part = Bipartition::new(vec![0], 3).unwrap();
        let m = reduced_generator(&h, &psi, &part).unwrap();

        let rho_a = partial_trace(&psi, &part).unwrap();
        let comm = crate::operators::commutator(&ha.view(), &rho_a.matrix().view()).unwrap();
        let expected = comm.mapv(|z| C64::new(0.0, -1.0) * z);
        let err = linalg::max_abs(&(m.matrix() - &expected).view());
        assert!(err < 1e-10, "decoupled generator deviates by {err:.3e}");
    }

    #[test]
    fn whole_system_bipartition_allowed() {
        let psi = random_state(3, 61);
        let part = Bipartition::new(vec![0, 1, 2], 3).unwrap();
        assert_eq!(part.dim_b(), 1);
        let rho = partial_trace(&psi, &part).unwrap();
        let purity: f64 = rho.matrix().iter().map(|z| z.norm_sqr()).sum();
        assert!((purity - 1.0).abs() < 1e-12);
    }
}
