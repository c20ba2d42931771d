//! Pauli operators, local-operator embeddings, and the chaotic Ising
//! Hamiltonian as dense Hermitian matrices.
//!
//! Site ordering convention, fixed globally: site 0 is the leftmost tensor
//! factor, i.e. the most significant bit of a computational-basis index.
//! Basis state `|q_0 q_1 ... q_{N-1}>` has index `sum_i q_i 2^(N-1-i)`, with
//! bit 0 the sigma^z = +1 eigenstate.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::C64;

/// Largest chain accepted by [`build_hamiltonian`]; 2^14 = 16384 keeps the
/// dense matrices within desk-machine memory.
pub const DEFAULT_MAX_SITES: usize = 14;

/// Boundary condition of the chain. Only open boundaries are supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Open,
}

/// Pauli axis label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

/// Parameters of the Ising chain
/// `H = -J sum_i sz_i sz_{i+1} - h sum_i sx_i - g sum_i sz_i`
/// with open boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    /// Number of spin-1/2 sites, at least 1.
    pub n_sites: usize,
    /// Nearest-neighbour ZZ coupling J.
    pub coupling: f64,
    /// Transverse field h.
    pub transverse: f64,
    /// Longitudinal field g.
    pub longitudinal: f64,
    /// Boundary condition (open only).
    #[serde(default)]
    pub boundary: Boundary,
}

impl ChainParams {
    pub fn new(n_sites: usize, coupling: f64, transverse: f64, longitudinal: f64) -> Result<Self> {
        let p = Self {
            n_sites,
            coupling,
            transverse,
            longitudinal,
            boundary: Boundary::Open,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 1 {
            return Err(Error::InvalidParams("n_sites must be at least 1".into()));
        }
        for (name, v) in [
            ("coupling", self.coupling),
            ("transverse", self.transverse),
            ("longitudinal", self.longitudinal),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    /// Hilbert-space dimension 2^N.
    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }
}

/// An operator supported on a subset of sites, stored as a dense complex
/// matrix of dimension 2^{|support|} over the support sites in increasing
/// order (first support site = most significant local bit).
#[derive(Debug, Clone)]
pub struct LocalOperator {
    support: Vec<usize>,
    matrix: Array2<C64>,
}

impl LocalOperator {
    pub fn new(support: Vec<usize>, matrix: Array2<C64>) -> Result<Self> {
        if !support.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParams(
                "support sites must be strictly increasing".into(),
            ));
        }
        let dim = 1usize << support.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch(matrix.nrows(), dim));
        }
        Ok(Self { support, matrix })
    }

    /// Single-site Pauli operator at `site`.
    pub fn pauli(axis: PauliAxis, site: usize) -> Self {
        Self {
            support: vec![site],
            matrix: pauli_matrix(axis),
        }
    }

    /// Identity on `site`.
    pub fn identity(site: usize) -> Self {
        Self {
            support: vec![site],
            matrix: Array2::eye(2).mapv(|x: f64| C64::new(x, 0.0)),
        }
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Conjugate transpose of the same operator.
    pub fn adjoint(&self) -> Self {
        Self {
            support: self.support.clone(),
            matrix: linalg::adjoint(&self.matrix.view()),
        }
    }

    /// Deviation of `U U^dag` from the identity, as a max-norm.
    pub fn unitarity_deviation(&self) -> f64 {
        let u = &self.matrix;
        let prod = u.dot(&linalg::adjoint(&u.view()));
        let n = prod.nrows();
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let expected = if i == j {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                };
                dev = dev.max((prod[[i, j]] - expected).norm());
            }
        }
        dev
    }

    /// True when the two operators act on disjoint site sets.
    pub fn disjoint_support(&self, other: &Self) -> bool {
        self.support.iter().all(|s| !other.support.contains(s))
    }

    /// Apply the embedded operator to a 2^N state vector without forming the
    /// 2^N x 2^N matrix. Cost is O(2^N 2^k) for support size k.
    pub fn apply(&self, psi: &ArrayView1<C64>, n_sites: usize) -> Result<Array1<C64>> {
        self.check_support(n_sites)?;
        let dim = 1usize << n_sites;
        if psi.len() != dim {
            return Err(Error::DimensionMismatch(psi.len(), dim));
        }
        let k = self.support.len();
        let dl = 1usize << k;
        // Global bit position of the j-th support site (and its local weight).
        let shifts: Vec<usize> = self.support.iter().map(|&s| n_sites - 1 - s).collect();
        let env_shifts: Vec<usize> = (0..n_sites)
            .filter(|s| !self.support.contains(s))
            .map(|s| n_sites - 1 - s)
            .collect();
        let mut out = Array1::<C64>::zeros(dim);
        let n_env = 1usize << env_shifts.len();
        let mut local_idx = vec![0usize; dl];
        for env in 0..n_env {
            let mut base = 0usize;
            for (j, &sh) in env_shifts.iter().enumerate() {
                base |= ((env >> (env_shifts.len() - 1 - j)) & 1) << sh;
            }
            for (l, idx) in local_idx.iter_mut().enumerate() {
                let mut g = base;
                for (j, &sh) in shifts.iter().enumerate() {
                    g |= ((l >> (k - 1 - j)) & 1) << sh;
                }
                *idx = g;
            }
            for (lr, &row) in local_idx.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (lc, &col) in local_idx.iter().enumerate() {
                    acc += self.matrix[[lr, lc]] * psi[col];
                }
                out[row] = acc;
            }
        }
        Ok(out)
    }

    fn check_support(&self, n_sites: usize) -> Result<()> {
        if let Some(&site) = self.support.iter().find(|&&s| s >= n_sites) {
            return Err(Error::SiteOutOfRange { site, n_sites });
        }
        Ok(())
    }
}

/// A dense Hermitian operator on the full chain. Construction symmetrizes
/// the input, `(M + M^dag)/2`, and keeps a real copy when the matrix is real
/// in the computational basis (true for the Ising Hamiltonian), which the
/// dynamics layer uses for fast application.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    matrix: Array2<C64>,
    real: Option<Array2<f64>>,
}

impl HermitianOperator {
    /// Relative Hermiticity tolerance, `max|M - M^dag| <= tol * max|M|`.
    pub const HERMITICITY_TOL: f64 = 1e-12;

    pub fn new(matrix: Array2<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch(matrix.nrows(), matrix.ncols()));
        }
        let scale = linalg::max_abs(&matrix.view()).max(1e-300);
        let dev = linalg::hermiticity_deviation(&matrix.view());
        if dev > Self::HERMITICITY_TOL * scale {
            return Err(Error::NotHermitian(dev));
        }
        let sym = symmetrize(&matrix);
        let real = real_part_if_real(&sym);
        Ok(Self { matrix: sym, real })
    }

    /// Build from a real symmetric matrix.
    pub fn from_real(matrix: Array2<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch(matrix.nrows(), matrix.ncols()));
        }
        let sym = 0.5 * (&matrix + &matrix.t());
        let complex = sym.mapv(|x| C64::new(x, 0.0));
        Ok(Self {
            matrix: complex,
            real: Some(sym),
        })
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    /// Real representation, present when the operator is real in the
    /// computational basis.
    pub fn real_matrix(&self) -> Option<&Array2<f64>> {
        self.real.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Matrix-vector product, using the real fast path when available.
    pub fn apply(&self, psi: &ArrayView1<C64>) -> Result<Array1<C64>> {
        if psi.len() != self.dim() {
            return Err(Error::DimensionMismatch(psi.len(), self.dim()));
        }
        Ok(match &self.real {
            Some(r) => linalg::apply_real_to_complex(&r.view(), psi, false),
            None => self.matrix.dot(psi),
        })
    }

    /// Hilbert-Schmidt (Frobenius) norm squared.
    pub fn fro_norm_sq(&self) -> f64 {
        linalg::fro_norm_sq(&self.matrix.view())
    }
}

fn symmetrize(m: &Array2<C64>) -> Array2<C64> {
    let adj = linalg::adjoint(&m.view());
    (m + &adj).mapv(|z| 0.5 * z)
}

fn real_part_if_real(m: &Array2<C64>) -> Option<Array2<f64>> {
    let scale = linalg::max_abs(&m.view()).max(1.0);
    let max_im = m.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if max_im <= 1e-14 * scale {
        Some(m.mapv(|z| z.re))
    } else {
        None
    }
}

/// The standard 2x2 Pauli matrix for the given axis.
pub fn pauli_matrix(axis: PauliAxis) -> Array2<C64> {
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match axis {
        PauliAxis::X => ndarray::array![[o, one], [one, o]],
        PauliAxis::Y => ndarray::array![[o, -i], [i, o]],
        PauliAxis::Z => ndarray::array![[one, o], [o, -one]],
    }
}

/// Kronecker embedding of a local operator into the full 2^N space, with
/// identity on all non-support sites.
pub fn embed(op: &LocalOperator, n_sites: usize) -> Result<Array2<C64>> {
    if let Some(&site) = op.support().iter().find(|&&s| s >= n_sites) {
        return Err(Error::SiteOutOfRange { site, n_sites });
    }
    let dim = 1usize << n_sites;
    let k = op.support().len();
    let dl = 1usize << k;
    let shifts: Vec<usize> = op.support().iter().map(|&s| n_sites - 1 - s).collect();
    let env_shifts: Vec<usize> = (0..n_sites)
        .filter(|s| !op.support().contains(s))
        .map(|s| n_sites - 1 - s)
        .collect();
    let mut out = Array2::<C64>::zeros((dim, dim));
    let n_env = 1usize << env_shifts.len();
    for env in 0..n_env {
        let mut base = 0usize;
        for (j, &sh) in env_shifts.iter().enumerate() {
            base |= ((env >> (env_shifts.len() - 1 - j)) & 1) << sh;
        }
        for lr in 0..dl {
            let mut row = base;
            for (j, &sh) in shifts.iter().enumerate() {
                row |= ((lr >> (k - 1 - j)) & 1) << sh;
            }
            for lc in 0..dl {
                let mut col = base;
                for (j, &sh) in shifts.iter().enumerate() {
                    col |= ((lc >> (k - 1 - j)) & 1) << sh;
                }
                out[[row, col]] = op.matrix()[[lr, lc]];
            }
        }
    }
    Ok(out)
}

/// Dense Hamiltonian of the chain, real-symmetric in the computational basis
/// (only x and z Paulis appear).
pub fn build_hamiltonian(params: &ChainParams) -> Result<HermitianOperator> {
    build_hamiltonian_with_limit(params, DEFAULT_MAX_SITES)
}

/// Same as [`build_hamiltonian`] with an explicit site limit.
pub fn build_hamiltonian_with_limit(
    params: &ChainParams,
    max_sites: usize,
) -> Result<HermitianOperator> {
    params.validate()?;
    let n = params.n_sites;
    if n > max_sites {
        return Err(Error::DimensionOverflow {
            requested: n,
            max: max_sites,
        });
    }
    let dim = 1usize << n;
    let mut m = Array2::<f64>::zeros((dim, dim));
    let (j, h, g) = (params.coupling, params.transverse, params.longitudinal);
    for idx in 0..dim {
        // sigma^z eigenvalue at site i: bit 0 -> +1, bit 1 -> -1.
        let z = |site: usize| 1.0 - 2.0 * ((idx >> (n - 1 - site)) & 1) as f64;
        let mut diag = 0.0;
        for site in 0..n.saturating_sub(1) {
            diag -= j * z(site) * z(site + 1);
        }
        for site in 0..n {
            diag -= g * z(site);
        }
        m[[idx, idx]] = diag;
        for site in 0..n {
            let flipped = idx ^ (1 << (n - 1 - site));
            m[[flipped, idx]] -= h;
        }
    }
    HermitianOperator::from_real(m)
}

/// Commutator `ab - ba`.
pub fn commutator(a: &ArrayView2<C64>, b: &ArrayView2<C64>) -> Result<Array2<C64>> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() || a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(a.nrows(), b.nrows()));
    }
    Ok(a.dot(b) - b.dot(a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn pauli_x_is_standard() {
        let x = pauli_matrix(PauliAxis::X);
        assert_eq!(x[[0, 0]], c(0.0, 0.0));
        assert_eq!(x[[0, 1]], c(1.0, 0.0));
        assert_eq!(x[[1, 0]], c(1.0, 0.0));
        assert_eq!(x[[1, 1]], c(0.0, 0.0));
    }

    #[test]
    fn pauli_z_squares_to_identity() {
        let z = pauli_matrix(PauliAxis::Z);
        let zz = z.dot(&z);
        for i in 0..2 {
            for j in 0..2 {
                let expected = if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) };
                assert!((zz[[i, j]] - expected).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn pauli_commutators() {
        let x = pauli_matrix(PauliAxis::X);
        let y = pauli_matrix(PauliAxis::Y);
        let z = pauli_matrix(PauliAxis::Z);
        // [x, y] = 2i z
        let xy = commutator(&x.view(), &y.view()).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((xy[[i, j]] - c(0.0, 2.0) * z[[i, j]]).norm() < 1e-15);
            }
        }
        // [x, z] = -2i y
        let xz = commutator(&x.view(), &z.view()).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((xz[[i, j]] - c(0.0, -2.0) * y[[i, j]]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn embed_site0_is_leading_factor() {
        // embed(sz at 0, N=2) = sz (x) I
        let op = LocalOperator::pauli(PauliAxis::Z, 0);
        let m = embed(&op, 2).unwrap();
        let expected = array![1.0, 1.0, -1.0, -1.0];
        for i in 0..4 {
            assert!((m[[i, i]] - c(expected[i], 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn embed_identity_is_identity() {
        let op = LocalOperator::identity(2);
        let m = embed(&op, 4).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let expected = if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) };
                assert_eq!(m[[i, j]], expected);
            }
        }
    }

    #[test]
    fn embed_bit_flip_on_site1() {
        // embed(sx at 1, N=2) |00> = |01>
        let op = LocalOperator::pauli(PauliAxis::X, 1);
        let mut psi = Array1::<C64>::zeros(4);
        psi[0] = c(1.0, 0.0);
        let m = embed(&op, 2).unwrap();
        let out = m.dot(&psi);
        assert!((out[1] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(out[0].norm() < 1e-15 && out[2].norm() < 1e-15 && out[3].norm() < 1e-15);
        // the state-vector kernel agrees
        let fast = op.apply(&psi.view(), 2).unwrap();
        for i in 0..4 {
            assert!((fast[i] - out[i]).norm() < 1e-15);
        }
    }

    #[test]
    fn embed_out_of_range_rejected() {
        let op = LocalOperator::pauli(PauliAxis::X, 3);
        assert!(matches!(
            embed(&op, 2),
            Err(Error::SiteOutOfRange { site: 3, .. })
        ));
    }

    #[test]
    fn apply_matches_embed_on_random_two_site_op() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        let n = 4;
        let dim = 1 << n;
        let mat = Array2::from_shape_fn((4, 4), |_| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let op = LocalOperator::new(vec![1, 3], mat).unwrap();
        let psi = Array1::from_shape_fn(dim, |_| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let dense = embed(&op, n).unwrap().dot(&psi);
        let fast = op.apply(&psi.view(), n).unwrap();
        for i in 0..dim {
            assert!((dense[i] - fast[i]).norm() < 1e-13);
        }
    }

    #[test]
    fn single_spin_hamiltonian() {
        // N=1, h=1, g=0 -> -sx with eigenvalues {-1, +1}
        let p = ChainParams::new(1, 1.0, 1.0, 0.0).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let x = pauli_matrix(PauliAxis::X);
        for i in 0..2 {
            for j in 0..2 {
                assert!((h.matrix()[[i, j]] + x[[i, j]]).norm() < 1e-15);
            }
        }
        let (w, _) = crate::linalg::eigh_complex(&h.matrix().view()).unwrap();
        assert!((w[0] + 1.0).abs() < 1e-12 && (w[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_site_classical_ising_spectrum() {
        // N=2, J=1, h=g=0 -> eigenvalues {-1,-1,+1,+1}
        let p = ChainParams::new(2, 1.0, 0.0, 0.0).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let (w, _) = crate::linalg::eigh_complex(&h.matrix().view()).unwrap();
        let expected = [-1.0, -1.0, 1.0, 1.0];
        for (got, want) in w.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn paper_configuration_builds() {
        let p = ChainParams::new(11, 1.0, 0.5, 0.4).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        assert_eq!(h.dim(), 2048);
        assert!(h.real_matrix().is_some());
        let dev = linalg::hermiticity_deviation(&h.matrix().view());
        let scale = linalg::max_abs(&h.matrix().view());
        assert!(dev <= 1e-12 * scale);
    }

    #[test]
    fn oversized_chain_rejected() {
        let p = ChainParams::new(15, 1.0, 1.0, 0.0).unwrap();
        assert!(matches!(
            build_hamiltonian(&p),
            Err(Error::DimensionOverflow { .. })
        ));
    }

    #[test]
    fn commutator_of_disjoint_embeddings_vanishes() {
        let a = embed(&LocalOperator::pauli(PauliAxis::Z, 0), 2).unwrap();
        let b = embed(&LocalOperator::pauli(PauliAxis::X, 1), 2).unwrap();
        let comm = commutator(&a.view(), &b.view()).unwrap();
        assert!(linalg::max_abs(&comm.view()) < 1e-15);
    }

    #[test]
    fn commutator_dimension_mismatch() {
        let a = Array2::<C64>::zeros((2, 2));
        let b = Array2::<C64>::zeros((4, 4));
        assert!(commutator(&a.view(), &b.view()).is_err());
    }

    #[test]
    fn hamiltonian_with_self_commutes() {
        let p = ChainParams::new(3, 1.0, 0.7, 0.4).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let comm = commutator(&h.matrix().view(), &h.matrix().view()).unwrap();
        assert!(linalg::max_abs(&comm.view()) < 1e-12);
    }
}
