//! Dense complex linear algebra and canonical quantum objects.
//!
//! Every composite space is a tensor product of factors ordered left to
//! right, with the first factor carrying the most significant digit of a
//! basis index. All values are immutable after construction.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

/// Tolerance on the Euclidean norm of pure states.
pub const NORM_TOL: f64 = 1e-12;
/// Tolerance on Hermiticity and trace of density matrices.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Tolerance on eigenvalue-based predicates.
pub const EIGEN_TOL: f64 = 1e-9;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

pub fn hadamard() -> ComplexMatrix {
    let h = FRAC_1_SQRT_2;
    ComplexMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)])
}

/// `exp(-i θ/2 σx)`.
pub fn rotation_x(theta: f64) -> ComplexMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    ComplexMatrix::from_row_slice(2, 2, &[c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)])
}

/// `exp(-i θ/2 σz)`.
pub fn rotation_z(theta: f64) -> ComplexMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    ComplexMatrix::from_row_slice(2, 2, &[c(co, -s), c(0.0, 0.0), c(0.0, 0.0), c(co, s)])
}

/// Kronecker product of a sequence of matrices; the empty product is `[1]`.
pub fn kron_all<'a, I>(factors: I) -> ComplexMatrix
where
    I: IntoIterator<Item = &'a ComplexMatrix>,
{
    factors
        .into_iter()
        .fold(identity(1), |acc, m| acc.kronecker(m))
}

/// Embeds `op` acting on factor `index` of a space with factor dimensions `dims`.
pub fn embed(op: &ComplexMatrix, index: usize, dims: &[usize]) -> ComplexMatrix {
    let parts: Vec<ComplexMatrix> = dims
        .iter()
        .enumerate()
        .map(|(i, &d)| if i == index { op.clone() } else { identity(d) })
        .collect();
    kron_all(parts.iter())
}

/// Predicates used by downstream invariants.
pub trait MatrixChecks {
    fn is_square(&self) -> bool;
    fn is_hermitian(&self, tol: f64) -> bool;
    fn is_unitary(&self, tol: f64) -> bool;
    fn is_psd(&self, tol: f64) -> bool;
    /// Maximum absolute entry.
    fn max_abs(&self) -> f64;
    fn is_real(&self) -> bool;
}

impl MatrixChecks for ComplexMatrix {
    fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    fn is_hermitian(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let n = self.nrows();
        (0..n).all(|i| (i..n).all(|j| (self[(i, j)] - self[(j, i)].conj()).norm() <= tol))
    }

    fn is_unitary(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let prod = self.adjoint() * self;
        (prod - identity(self.nrows())).max_abs() <= tol
    }

    fn is_psd(&self, tol: f64) -> bool {
        self.is_hermitian(tol.max(HERMITIAN_TOL)) && eigenvalues(self).iter().all(|&l| l >= -tol)
    }

    fn max_abs(&self) -> f64 {
        self.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn is_real(&self) -> bool {
        self.iter().all(|z| z.im == 0.0)
    }
}

fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Ascending eigenvalues of a Hermitian matrix. Input is symmetrised first.
pub fn eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let h = hermitian_part(m);
    let mut vals: Vec<f64> = if h.is_real() {
        let real = h.map(|z| z.re);
        SymmetricEigen::new(real)
            .eigenvalues
            .iter()
            .copied()
            .collect()
    } else {
        SymmetricEigen::new(h).eigenvalues.iter().copied().collect()
    };
    vals.sort_by(|a, b| a.total_cmp(b));
    vals
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending with
/// eigenvectors as the matching columns.
pub fn eigh(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let h = hermitian_part(m);
    let (vals, vecs): (Vec<f64>, ComplexMatrix) = if h.is_real() {
        let e = SymmetricEigen::new(h.map(|z| z.re));
        (
            e.eigenvalues.iter().copied().collect(),
            e.eigenvectors.map(|x| c(x, 0.0)),
        )
    } else {
        let e = SymmetricEigen::new(h);
        (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
    };
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let sorted_vals = order.iter().map(|&i| vals[i]).collect();
    let mut sorted_vecs = ComplexMatrix::zeros(vecs.nrows(), vecs.ncols());
    for (dst, &src) in order.iter().enumerate() {
        sorted_vecs.set_column(dst, &vecs.column(src));
    }
    (sorted_vals, sorted_vecs)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(invalid(format!(
            "matrix is not square: {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if !m.is_hermitian(HERMITIAN_TOL) {
        return Err(invalid("matrix is not Hermitian"));
    }
    Ok(eigenvalues(m)[0])
}

/// Spectral norm of a Hermitian matrix.
pub fn hermitian_norm(m: &ComplexMatrix) -> f64 {
    let vals = eigenvalues(m);
    vals.first()
        .map(|l| l.abs())
        .unwrap_or(0.0)
        .max(vals.last().map(|l| l.abs()).unwrap_or(0.0))
}

/// Spectral norm of an arbitrary matrix.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    let gram = m.adjoint() * m;
    eigenvalues(&gram)
        .last()
        .copied()
        .unwrap_or(0.0)
        .max(0.0)
        .sqrt()
}

/// Principal square root of a PSD matrix. Eigenvalues below `1e-14` times
/// the largest one are treated as round-off and set to 0.
pub fn psd_sqrt(m: &ComplexMatrix) -> ComplexMatrix {
    let (vals, vecs) = eigh(m);
    let cutoff = 1e-14 * vals.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let root = DVector::from_iterator(
        vals.len(),
        vals.iter()
            .map(|&l| c(if l > cutoff { l.sqrt() } else { 0.0 }, 0.0)),
    );
    &vecs * ComplexMatrix::from_diagonal(&root) * vecs.adjoint()
}

/// A normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: ComplexVector,
}

impl PureState {
    pub fn new(amplitudes: ComplexVector) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(invalid("state vector is empty"));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(invalid(format!("state norm is {norm}, expected 1")));
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes `amplitudes`; fails on the zero vector.
    pub fn from_unnormalized(amplitudes: ComplexVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if amplitudes.is_empty() || norm < 1e-300 {
            return Err(Error::DegenerateInput("zero state vector".into()));
        }
        Ok(Self {
            amplitudes: amplitudes.unscale(norm),
        })
    }

    /// Computational basis state `|index⟩` of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(invalid(format!(
                "basis index {index} out of range for dim {dim}"
            )));
        }
        let mut v = ComplexVector::zeros(dim);
        v[index] = c(1.0, 0.0);
        Ok(Self { amplitudes: v })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> ComplexVector {
        self.amplitudes
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(invalid("dimension mismatch in inner product"));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState {
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        }
    }

    pub fn apply(&self, op: &ComplexMatrix) -> Result<PureState> {
        if op.ncols() != self.dim() {
            return Err(invalid("operator dimension does not match state"));
        }
        PureState::from_unnormalized(op * &self.amplitudes)
    }

    pub fn expectation(&self, op: &ComplexMatrix) -> C64 {
        self.amplitudes.dotc(&(op * &self.amplitudes))
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }

    /// Reduced state of the leading factor of dimension `leading_dim`.
    pub fn reduce_to_leading(&self, leading_dim: usize) -> Result<DensityMatrix> {
        if leading_dim == 0 || !self.dim().is_multiple_of(leading_dim) {
            return Err(invalid("leading dimension does not divide state dimension"));
        }
        let rest = self.dim() / leading_dim;
        // Row-major reshape: row = leading digit, column = rest.
        let psi = ComplexMatrix::from_fn(leading_dim, rest, |i, j| self.amplitudes[i * rest + j]);
        Ok(DensityMatrix {
            matrix: &psi * psi.adjoint(),
        })
    }
}

/// A validated density operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(invalid("density matrix must be square and non-empty"));
        }
        if !matrix.is_hermitian(HERMITIAN_TOL) {
            return Err(invalid("density matrix is not Hermitian"));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > HERMITIAN_TOL || tr.im.abs() > HERMITIAN_TOL {
            return Err(invalid(format!("density matrix trace is {tr}, expected 1")));
        }
        let min = eigenvalues(&matrix)[0];
        if min < -HERMITIAN_TOL {
            return Err(invalid(format!(
                "density matrix has negative eigenvalue {min}"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: identity(dim).unscale(dim as f64),
        }
    }

    /// `weight·self + (1 − weight)·other`.
    pub fn mix(&self, other: &DensityMatrix, weight: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(invalid("dimension mismatch in mixture"));
        }
        if !(0.0..=1.0).contains(&weight) {
            return Err(invalid(format!("mixture weight {weight} outside [0, 1]")));
        }
        Ok(Self {
            matrix: self.matrix.scale(weight) + other.matrix.scale(1.0 - weight),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `Tr[ρ·op]`.
    pub fn expectation(&self, op: &ComplexMatrix) -> C64 {
        // Tr[ρ A] = Σ_ij ρ_ij A_ji
        let n = self.dim();
        let mut acc = c(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.matrix[(i, j)] * op[(j, i)];
            }
        }
        acc
    }

    pub fn conjugate(&self, unitary: &ComplexMatrix) -> Result<Self> {
        if unitary.nrows() != self.dim() || !unitary.is_square() {
            return Err(invalid("conjugating unitary has wrong dimension"));
        }
        Ok(Self {
            matrix: unitary * &self.matrix * unitary.adjoint(),
        })
    }

    /// Returns the pure state if the matrix has rank one within tolerance.
    pub fn as_pure(&self) -> Option<PureState> {
        let (vals, vecs) = eigh(&self.matrix);
        let n = vals.len();
        if (vals[n - 1] - 1.0).abs() > 1e-9 {
            return None;
        }
        PureState::from_unnormalized(vecs.column(n - 1).into_owned()).ok()
    }

    /// Purification `Σ √λ_i |e_i⟩ ⊗ |i⟩` with the purifying register as the
    /// last factor. Returns the state and the register dimension.
    pub fn purify(&self) -> (PureState, usize) {
        let (vals, vecs) = eigh(&self.matrix);
        let support: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > 1e-14).collect();
        let r = support.len().max(1);
        let d = self.dim();
        let mut amps = ComplexVector::zeros(d * r);
        for (slot, &i) in support.iter().enumerate() {
            let w = vals[i].sqrt();
            for row in 0..d {
                amps[row * r + slot] += vecs[(row, i)] * w;
            }
        }
        (
            PureState::from_unnormalized(amps).expect("density matrix has unit trace"),
            r,
        )
    }
}

impl From<&PureState> for DensityMatrix {
    fn from(psi: &PureState) -> Self {
        psi.to_density()
    }
}

pub fn ghz_state(k: usize) -> Result<PureState> {
    if k == 0 {
        return Err(invalid("GHZ state needs k >= 1"));
    }
    let dim = 1usize << k;
    let mut v = ComplexVector::zeros(dim);
    v[0] = c(FRAC_1_SQRT_2, 0.0);
    v[dim - 1] = c(FRAC_1_SQRT_2, 0.0);
    Ok(PureState { amplitudes: v })
}

/// Number of complete-graph edges among the 1-qubits of basis ket `index`.
pub fn complete_graph_edges(index: usize) -> u32 {
    let w = index.count_ones();
    w * w.saturating_sub(1) / 2
}

/// Fully connected graph state `2^{-k/2} Σ_τ (−1)^{n(τ)} |τ⟩` with
/// `n(τ) = C(weight(τ), 2)`.
pub fn graph_state_complete(k: usize) -> Result<PureState> {
    if k == 0 {
        return Err(invalid("graph state needs k >= 1"));
    }
    let dim = 1usize << k;
    let amp = (dim as f64).sqrt().recip();
    let v = ComplexVector::from_fn(dim, |i, _| {
        if complete_graph_edges(i).is_multiple_of(2) {
            c(amp, 0.0)
        } else {
            c(-amp, 0.0)
        }
    });
    Ok(PureState { amplitudes: v })
}

/// Local unitary `(I ⊗ H^{⊗k−1})·(Rx(π/2) ⊗ Rz(−π/2)^{⊗k−1})` mapping the
/// complete-graph state to the GHZ state up to a global phase.
///
/// The first layer is the local complementation at qubit 1, which turns the
/// complete graph into a star centred on qubit 1; Hadamards on the leaves
/// turn the star graph state into GHZ.
pub fn graph_to_ghz_unitary(k: usize) -> Result<ComplexMatrix> {
    if k == 0 {
        return Err(invalid("need k >= 1"));
    }
    let factors: Vec<ComplexMatrix> = (0..k).map(graph_to_ghz_local).collect();
    Ok(kron_all(factors.iter()))
}

/// Factor `i` of [`graph_to_ghz_unitary`].
pub fn graph_to_ghz_local(i: usize) -> ComplexMatrix {
    if i == 0 {
        rotation_x(std::f64::consts::FRAC_PI_2)
    } else {
        hadamard() * rotation_z(-std::f64::consts::FRAC_PI_2)
    }
}

/// Uhlmann fidelity `(Tr|√ρ √σ|)²`.
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(invalid(format!(
            "fidelity dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    let prod = psd_sqrt(a.matrix()) * psd_sqrt(b.matrix());
    let trace_norm: f64 = prod.singular_values().iter().sum();
    Ok((trace_norm * trace_norm).clamp(0.0, 1.0))
}

/// Mixed-radix digits of `index` for factor dimensions `dims`, most
/// significant first.
pub(crate) fn digits(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for (slot, &d) in out.iter_mut().rev().zip(dims.iter().rev()) {
        *slot = index % d;
        index /= d;
    }
}

pub(crate) fn from_digits(ds: &[usize], dims: &[usize]) -> usize {
    ds.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

/// Traces out every factor not listed in `keep`. Kept factors appear in
/// ascending order.
pub fn partial_trace(
    state: &DensityMatrix,
    keep: &[usize],
    dims: &[usize],
) -> Result<DensityMatrix> {
    if dims.contains(&0) {
        return Err(invalid("factor dimensions must be positive"));
    }
    let total: usize = dims.iter().product();
    if total != state.dim() {
        return Err(invalid(format!(
            "factor dimensions multiply to {total}, state has dimension {}",
            state.dim()
        )));
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.len() != keep.len() || keep_sorted.iter().any(|&i| i >= dims.len()) {
        return Err(invalid("keep set has duplicates or out-of-range factors"));
    }
    let kept_dims: Vec<usize> = keep_sorted.iter().map(|&i| dims[i]).collect();
    let traced: Vec<usize> = (0..dims.len())
        .filter(|i| !keep_sorted.contains(i))
        .collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&i| dims[i]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let env_dim: usize = traced_dims.iter().product();

    let mut out = ComplexMatrix::zeros(out_dim, out_dim);
    let mut full = vec![0usize; dims.len()];
    let mut kd = vec![0usize; kept_dims.len()];
    let mut td = vec![0usize; traced_dims.len()];
    let mut index_of = |kept: usize, env: usize, full: &mut Vec<usize>| {
        digits(kept, &kept_dims, &mut kd);
        digits(env, &traced_dims, &mut td);
        for (slot, &f) in keep_sorted.iter().enumerate() {
            full[f] = kd[slot];
        }
        for (slot, &f) in traced.iter().enumerate() {
            full[f] = td[slot];
        }
        from_digits(full, dims)
    };
    let m = state.matrix();
    for i in 0..out_dim {
        for j in 0..out_dim {
            let mut acc = c(0.0, 0.0);
            for e in 0..env_dim {
                let row = index_of(i, e, &mut full);
                let col = index_of(j, e, &mut full);
                acc += m[(row, col)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(DensityMatrix { matrix: out })
}

/// Basis permutation matrix that reorders tensor factors: output factor `p`
/// is input factor `order[p]`.
pub fn factor_permutation(dims: &[usize], order: &[usize]) -> Result<ComplexMatrix> {
    let mut check = order.to_vec();
    check.sort_unstable();
    if check != (0..dims.len()).collect::<Vec<_>>() {
        return Err(invalid("factor order is not a permutation"));
    }
    let total: usize = dims.iter().product();
    let new_dims: Vec<usize> = order.iter().map(|&i| dims[i]).collect();
    let mut p = ComplexMatrix::zeros(total, total);
    let mut old = vec![0usize; dims.len()];
    let mut new = vec![0usize; dims.len()];
    for idx in 0..total {
        digits(idx, dims, &mut old);
        for (slot, &src) in order.iter().enumerate() {
            new[slot] = old[src];
        }
        p[(from_digits(&new, &new_dims), idx)] = c(1.0, 0.0);
    }
    Ok(p)
}

/// Haar-random unitary via QR of a complex Ginibre matrix.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DVector::from_fn(dim, |i, _| {
        let d = r[(i, i)];
        if d.norm() > 0.0 {
            d / d.norm()
        } else {
            c(1.0, 0.0)
        }
    });
    q * ComplexMatrix::from_diagonal(&phases)
}

pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> PureState {
    let v = ComplexVector::from_fn(dim, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    PureState::from_unnormalized(v).expect("gaussian vector is nonzero")
}
