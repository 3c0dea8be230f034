//! Numerical checks of the self-testing argument: the sum-of-squares
//! certificate of `S_N^+`, the substituted Pauli operators, stabilizer and
//! qubit conditions, and the SWAP isometry.
//!
//! Strategies are viewed in a virtual party order obtained by concatenating
//! the parties of each unit. `S_N` only depends on input weights, so this
//! reordering leaves the Bell operator unchanged.

use rayon::prelude::*;
use serde::Serialize;

use crate::bell::{BitString, NetworkStrategy, Partition, Variant};
use crate::error::{invalid, Error, Result};
use crate::quantum::{
    embed, fidelity, ghz_state, graph_state_complete, graph_to_ghz_unitary, hermitian_norm,
    identity, kron_all, pauli_x, pauli_z, ComplexMatrix, ComplexVector, DensityMatrix,
    MatrixChecks, PureState, EIGEN_TOL,
};

/// Isometry outputs below this norm are reported as degenerate.
pub const DEGENERATE_NORM: f64 = 1e-6;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Observables grouped into `k` effective parties: `k−1` single parties and
/// a final (possibly multi-party) coalition block.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorAssignment {
    order: Vec<usize>,
    sizes: Vec<usize>,
    dims: Vec<usize>,
    ops: Vec<Vec<ComplexMatrix>>,
}

impl OperatorAssignment {
    /// `ops[u][i]` is the observable of unit `u` for the unit input with
    /// index `i`. All units but the last must hold a single party.
    pub fn new(order: Vec<usize>, sizes: Vec<usize>, ops: Vec<Vec<ComplexMatrix>>) -> Result<Self> {
        if sizes.len() < 2 || sizes.len() != ops.len() {
            return Err(invalid("an assignment needs at least two units"));
        }
        if sizes[..sizes.len() - 1].iter().any(|&s| s != 1) {
            return Err(Error::Unsupported(
                "only the last unit may hold several parties".into(),
            ));
        }
        let n: usize = sizes.iter().sum();
        let mut sorted = order.clone();
        sorted.sort_unstable();
        if sorted != (0..n).collect::<Vec<_>>() {
            return Err(invalid("order must be a permutation of the parties"));
        }
        let mut dims = Vec::with_capacity(ops.len());
        for (u, (&size, unit)) in sizes.iter().zip(&ops).enumerate() {
            if unit.len() != 1usize << size {
                return Err(invalid(format!(
                    "unit {u} needs {} observables",
                    1usize << size
                )));
            }
            let d = unit[0].nrows();
            if unit.iter().any(|m| m.nrows() != d || m.ncols() != d) {
                return Err(invalid(format!(
                    "unit {u} observables have mismatched shapes"
                )));
            }
            dims.push(d);
        }
        Ok(Self {
            order,
            sizes,
            dims,
            ops,
        })
    }

    /// Reads the units of `s`; every unit except the last must be a single
    /// party.
    pub fn from_strategy(s: &NetworkStrategy) -> Result<Self> {
        let order: Vec<usize> = s
            .units()
            .iter()
            .flat_map(|u| u.parties().iter().copied())
            .collect();
        let sizes = s.units().iter().map(|u| u.parties().len()).collect();
        let ops = s
            .units()
            .iter()
            .map(|u| {
                BitString::all(u.parties().len())
                    .map(|x| u.observable(&x).matrix().clone())
                    .collect()
            })
            .collect();
        Self::new(order, sizes, ops)
    }

    /// Tensors `I_r` onto the last block, for a purifying register appended
    /// as the final factor.
    pub fn with_register(&self, r: usize) -> Self {
        let mut out = self.clone();
        if r > 1 {
            let last = out.ops.len() - 1;
            let id = identity(r);
            for m in &mut out.ops[last] {
                *m = m.kronecker(&id);
            }
            out.dims[last] *= r;
        }
        out
    }

    pub fn n_parties(&self) -> usize {
        self.order.len()
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// `ops()[u][i]`: unit `u`, unit input index `i`.
    pub fn ops(&self) -> &[Vec<ComplexMatrix>] {
        &self.ops
    }

    /// Virtual position `i` holds original party `order()[i]`.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Original parties of the last block.
    pub fn coalition(&self) -> Vec<usize> {
        let start = self.n_parties() - self.sizes[self.k() - 1];
        self.order[start..].to_vec()
    }

    pub fn check_binary(&self) -> Result<()> {
        for (u, unit) in self.ops.iter().enumerate() {
            for (i, m) in unit.iter().enumerate() {
                let sq = m * m;
                if !m.is_hermitian(EIGEN_TOL) || (sq - identity(m.nrows())).max_abs() > EIGEN_TOL {
                    return Err(invalid(format!(
                        "observable {i} of unit {u} is not a binary observable"
                    )));
                }
            }
        }
        Ok(())
    }

    fn unit_input(&self, x: &BitString, u: usize) -> usize {
        let start: usize = self.sizes[..u].iter().sum();
        (start..start + self.sizes[u]).fold(0, |acc, i| (acc << 1) | x.bit(i) as usize)
    }

    /// `⊗_{u ≥ from} O_u(x_u)` for a virtual-order input `x`.
    fn product_from(&self, x: &BitString, from: usize) -> ComplexMatrix {
        kron_all((from..self.k()).map(|u| &self.ops[u][self.unit_input(x, u)]))
    }

    /// `⊗_u O_u(x_u)` for an input given in original party order.
    pub fn correlation_operator(&self, x: &BitString) -> ComplexMatrix {
        self.product_from(&x.select(&self.order), 0)
    }

    /// `Ŝ_N = Σ_x c(x) ⊗_u O_u(x_u)`.
    pub fn bell_operator(&self, variant: Variant) -> ComplexMatrix {
        let n = self.n_parties();
        let d = self.dim();
        BitString::all(n).fold(ComplexMatrix::zeros(d, d), |acc, x| {
            let c = variant.sign_for_weight(x.weight()) as f64;
            acc + self.product_from(&x, 0).scale(c)
        })
    }

    /// Square terms of the certificate, one pair per label of the virtual
    /// parties `3..N`.
    fn sos_squares(&self) -> ComplexMatrix {
        let n = self.n_parties();
        let d = self.dim();
        let a0 = &self.ops[0][0];
        let a1 = &self.ops[0][1];
        let x1 = (a0 - a1).scale(FRAC_1_SQRT_2);
        let y1 = (a0 + a1).scale(FRAC_1_SQRT_2);
        let id = identity(d);
        BitString::all(n - 2)
            .map(|label| {
                let w = label.weight();
                let s = Variant::Plus.sign_for_weight(w) as f64;
                let rest = |b: u8| {
                    let mut bits = vec![0u8, b];
                    bits.extend_from_slice(label.bits());
                    self.product_from(&BitString::new(bits).expect("binary"), 1)
                };
                let (r0, r1) = (rest(0), rest(1));
                let (t0, t1) = if w % 2 == 0 {
                    (
                        &id - x1.kronecker(&r0).scale(s),
                        &id + y1.kronecker(&r1).scale(s),
                    )
                } else {
                    (
                        &id - y1.kronecker(&r0).scale(s),
                        &id - x1.kronecker(&r1).scale(s),
                    )
                };
                &t0 * &t0 + &t1 * &t1
            })
            .fold(ComplexMatrix::zeros(d, d), |acc, m| acc + m)
    }
}

/// `‖(2^{N−1}√2·I − Ŝ_N^+) − (1/√2)·Σ squares‖`. Fails on non-binary
/// observables; see [`sos_residual_unchecked`] for the diagnostic form.
pub fn sos_residual(assign: &OperatorAssignment) -> Result<f64> {
    assign.check_binary()?;
    Ok(sos_residual_unchecked(assign))
}

pub fn sos_residual_unchecked(assign: &OperatorAssignment) -> f64 {
    let n = assign.n_parties();
    let d = assign.dim();
    let bound = (1u64 << (n - 1)) as f64 * std::f64::consts::SQRT_2;
    let shifted = identity(d).scale(bound) - assign.bell_operator(Variant::Plus);
    hermitian_norm(&(shifted - assign.sos_squares().scale(FRAC_1_SQRT_2)))
}

/// Operators `X̂_j, Ẑ_j` of the `k` effective parties.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectivePaulis {
    pub x: Vec<ComplexMatrix>,
    pub z: Vec<ComplexMatrix>,
    pub dims: Vec<usize>,
    /// Fixed input of the non-leading coalition members.
    pub fixed: BitString,
}

impl EffectivePaulis {
    /// True Pauli operators on `k` qubits.
    pub fn exact(k: usize) -> Self {
        Self {
            x: vec![pauli_x(); k],
            z: vec![pauli_z(); k],
            dims: vec![2; k],
            fixed: BitString::default(),
        }
    }

    pub fn k(&self) -> usize {
        self.x.len()
    }

    fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// `X̂^τ Ẑ^{(τ)}` with `Ẑ^{(τ)} = (I + (−1)^τ Ẑ)/2`.
    pub fn local_branch(&self, j: usize, tau: u8) -> ComplexMatrix {
        let id = identity(self.dims[j]);
        let zt = if tau == 0 {
            (&id + &self.z[j]).scale(0.5)
        } else {
            (&id - &self.z[j]).scale(0.5)
        };
        if tau == 0 {
            zt
        } else {
            &self.x[j] * zt
        }
    }

    fn branch(&self, tau: usize) -> ComplexMatrix {
        let k = self.k();
        let locals: Vec<ComplexMatrix> = (0..k)
            .map(|j| self.local_branch(j, ((tau >> (k - 1 - j)) & 1) as u8))
            .collect();
        kron_all(locals.iter())
    }
}

/// Signs `(s, t) = ((−1)^{w(w+1)/2}, (−1)^{(w+1)(w+2)/2})` used by the
/// coalition substitution.
fn coalition_signs(w: usize) -> (f64, f64) {
    let sign = |e: usize| if e.is_multiple_of(2) { 1.0 } else { -1.0 };
    (sign(w * (w + 1) / 2), sign((w + 1) * (w + 2) / 2))
}

/// Effective Paulis for the coalition input `fixed` (length `N−k`).
pub fn substituted_paulis(
    assign: &OperatorAssignment,
    fixed: &BitString,
) -> Result<EffectivePaulis> {
    let k = assign.k();
    let m = assign.sizes[k - 1];
    if fixed.len() != m - 1 {
        return Err(invalid(format!(
            "coalition input string must have length {}, got {}",
            m - 1,
            fixed.len()
        )));
    }
    let mut x = Vec::with_capacity(k);
    let mut z = Vec::with_capacity(k);
    let (a0, a1) = (&assign.ops[0][0], &assign.ops[0][1]);
    x.push((a0 - a1).scale(FRAC_1_SQRT_2));
    z.push(-(a0 + a1).scale(FRAC_1_SQRT_2));
    for u in 1..k - 1 {
        z.push(assign.ops[u][0].clone());
        x.push(assign.ops[u][1].clone());
    }
    let half = 1usize << (m - 1);
    let m0 = &assign.ops[k - 1][fixed.index()];
    let m1 = &assign.ops[k - 1][half + fixed.index()];
    let w = fixed.weight();
    let (s, t) = coalition_signs(w);
    if w.is_multiple_of(2) {
        z.push(m0.scale(s));
        x.push(m1.scale(-t));
    } else {
        x.push(m0.scale(-s));
        z.push(m1.scale(t));
    }
    Ok(EffectivePaulis {
        x,
        z,
        dims: assign.dims.clone(),
        fixed: fixed.clone(),
    })
}

fn check_dims(paulis: &EffectivePaulis, psi: &PureState) -> Result<()> {
    if paulis.dim() != psi.dim() {
        return Err(invalid(format!(
            "operators act on dimension {}, state has {}",
            paulis.dim(),
            psi.dim()
        )));
    }
    Ok(())
}

/// `‖Ŝ_i ψ − ψ‖` for the generators `Ŝ_i = X̂_i ⊗_{j≠i} Ẑ_j`.
pub fn stabilizer_residuals(paulis: &EffectivePaulis, psi: &PureState) -> Result<Vec<f64>> {
    check_dims(paulis, psi)?;
    let k = paulis.k();
    Ok((0..k)
        .map(|i| {
            let g = kron_all((0..k).map(|j| if j == i { &paulis.x[j] } else { &paulis.z[j] }));
            (g * psi.amplitudes() - psi.amplitudes()).norm()
        })
        .collect())
}

/// `(max_i ‖{X̂_i, Ẑ_i}ψ‖, max_i max(‖(X̂_i²−I)ψ‖, ‖(Ẑ_i²−I)ψ‖))`.
pub fn qubit_property_residuals(paulis: &EffectivePaulis, psi: &PureState) -> Result<(f64, f64)> {
    check_dims(paulis, psi)?;
    let v = psi.amplitudes();
    let mut anti: f64 = 0.0;
    let mut idem: f64 = 0.0;
    for j in 0..paulis.k() {
        let (x, z) = (&paulis.x[j], &paulis.z[j]);
        let id = identity(paulis.dims[j]);
        let ac = x * z + z * x;
        anti = anti.max((embed(&ac, j, &paulis.dims) * v).norm());
        let x2 = x * x - &id;
        let z2 = z * z - &id;
        idem = idem
            .max((embed(&x2, j, &paulis.dims) * v).norm())
            .max((embed(&z2, j, &paulis.dims) * v).norm());
    }
    Ok((anti, idem))
}

/// The linear map `v ↦ Σ_τ |τ⟩ ⊗ (⊗_j X̂_j^{τ_j} Ẑ_j^{(τ_j)}) v` with the
/// `2^k`-dimensional ancilla register as the leading factor.
#[derive(Debug, Clone)]
pub struct SwapIsometry {
    k: usize,
    branches: Vec<ComplexMatrix>,
}

impl SwapIsometry {
    pub fn new(paulis: &EffectivePaulis) -> Self {
        let k = paulis.k();
        let branches = (0..1usize << k)
            .into_par_iter()
            .map(|t| paulis.branch(t))
            .collect();
        Self { k, branches }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn branch(&self, tau: usize) -> &ComplexMatrix {
        &self.branches[tau]
    }

    pub fn apply(&self, v: &ComplexVector) -> ComplexVector {
        let d = v.len();
        let mut out = ComplexVector::zeros(d << self.k);
        for (t, b) in self.branches.iter().enumerate() {
            out.rows_mut(t * d, d).copy_from(&(b * v));
        }
        out
    }

    /// Junk vector `ζ = ⊗_j Ẑ_j^{(0)} v`, unnormalized.
    pub fn junk(&self, v: &ComplexVector) -> ComplexVector {
        &self.branches[0] * v
    }
}

#[derive(Debug, Clone)]
pub struct IsometryOutput {
    pub state: PureState,
    pub raw_norm: f64,
}

pub fn swap_isometry(psi: &PureState, paulis: &EffectivePaulis) -> Result<IsometryOutput> {
    check_dims(paulis, psi)?;
    let out = SwapIsometry::new(paulis).apply(psi.amplitudes());
    let raw_norm = out.norm();
    if raw_norm < DEGENERATE_NORM {
        return Err(Error::DegenerateInput(format!(
            "isometry output norm {raw_norm:.3e} is below {DEGENERATE_NORM:e}"
        )));
    }
    Ok(IsometryOutput {
        state: PureState::from_unnormalized(out)?,
        raw_norm,
    })
}

/// Fidelity of the ancilla register with the complete-graph state.
pub fn ancilla_graph_fidelity(out: &IsometryOutput, k: usize) -> Result<f64> {
    let rho = out.state.reduce_to_leading(1 << k)?;
    fidelity(&rho, &graph_state_complete(k)?.to_density())
}

/// Target qubit observables for virtual-order input `x`.
fn target_observables(assign: &OperatorAssignment, x: &BitString) -> Vec<ComplexMatrix> {
    let k = assign.k();
    let (sx, sz) = (pauli_x(), pauli_z());
    let mut out = Vec::with_capacity(k);
    out.push(if x.bit(0) == 0 {
        (&sx - &sz).scale(FRAC_1_SQRT_2)
    } else {
        -(&sx + &sz).scale(FRAC_1_SQRT_2)
    });
    for i in 1..k - 1 {
        out.push(if x.bit(i) == 0 {
            sz.clone()
        } else {
            sx.clone()
        });
    }
    let lead = x.bit(k - 1);
    let label = BitString::new(x.bits()[k..].to_vec()).expect("binary");
    let w = label.weight();
    let (s, t) = coalition_signs(w);
    out.push(match (w.is_multiple_of(2), lead) {
        (true, 0) => sz.scale(s),
        (true, _) => sx.scale(-t),
        (false, 0) => sx.scale(-s),
        (false, _) => sz.scale(t),
    });
    out
}

/// Target qubit operators `Ā_{x}` for an input in original party order.
pub fn target_measurements(assign: &OperatorAssignment, x: &BitString) -> Vec<ComplexMatrix> {
    target_observables(assign, &x.select(assign.order()))
}

/// `‖Λ(O(x)ψ) − (Ā(x) ψ_G) ⊗ ζ‖` with unnormalized `ψ_G = Σ_τ (−1)^{n(τ)}|τ⟩`.
pub fn measurement_residual(
    assign: &OperatorAssignment,
    iso: &SwapIsometry,
    psi: &PureState,
    x: &BitString,
) -> Result<f64> {
    if x.len() != assign.n_parties() {
        return Err(invalid("input length does not match the assignment"));
    }
    let k = assign.k();
    let v = psi.amplitudes();
    let lhs = iso.apply(&(assign.correlation_operator(x) * v));
    let graph = graph_state_complete(k)?
        .into_amplitudes()
        .scale(((1usize << k) as f64).sqrt());
    let target = kron_all(target_measurements(assign, x).iter()) * graph;
    let rhs = target.kronecker(&iso.junk(v));
    Ok((lhs - rhs).norm())
}

/// Builds the assignment and measurement residual for input `x` of `s`.
pub fn measurement_selftest_residual(
    s: &NetworkStrategy,
    paulis: &EffectivePaulis,
    x: &BitString,
) -> Result<f64> {
    let (assign, psi) = assignment_and_state(s)?;
    measurement_residual(&assign, &SwapIsometry::new(paulis), &psi, x)
}

/// Assignment plus pure state, purifying mixed states with a register
/// appended to the coalition block.
pub fn assignment_and_state(s: &NetworkStrategy) -> Result<(OperatorAssignment, PureState)> {
    if let Partition::Clusters(_) = s.partition() {
        return Err(Error::Unsupported(
            "self-testing is implemented for a single coalition, not for clusters".into(),
        ));
    }
    let assign = OperatorAssignment::from_strategy(s)?;
    Ok(match s.state().as_pure() {
        Some(psi) => (assign, psi),
        None => {
            let (psi, r) = s.state().purify();
            (assign.with_register(r), psi)
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasurementResidual {
    pub input: String,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfTestReport {
    pub n_parties: usize,
    pub k: usize,
    /// Original (1-based) parties of the last block.
    pub coalition: Vec<usize>,
    pub svetlichny_value: f64,
    pub quantum_bound: f64,
    pub sos_residual: f64,
    pub stabilizer_residuals: Vec<f64>,
    pub anticommutator_residual: f64,
    pub idempotency_residual: f64,
    pub isometry_raw_norm: f64,
    pub degenerate: bool,
    pub state_fidelity_to_graph: f64,
    pub state_fidelity_to_ghz: f64,
    pub measurement_residuals: Vec<MeasurementResidual>,
    pub max_measurement_residual: f64,
    pub purification_dim: usize,
}

/// Runs every check on `s` with the coalition input fixed to all zeros.
pub fn run_selftest(s: &NetworkStrategy) -> Result<SelfTestReport> {
    let (assign, psi) = assignment_and_state(s)?;
    assign.check_binary()?;
    let n = assign.n_parties();
    let k = assign.k();
    let purification_dim = psi.dim() / s.state().dim();
    let sos = sos_residual_unchecked(&assign);
    let value = psi.expectation(&assign.bell_operator(Variant::Plus)).re;
    let paulis = substituted_paulis(&assign, &BitString::zeros(n - k))?;
    let stabilizers = stabilizer_residuals(&paulis, &psi)?;
    let (anti, idem) = qubit_property_residuals(&paulis, &psi)?;
    let iso = SwapIsometry::new(&paulis);
    let out = iso.apply(psi.amplitudes());
    let raw_norm = out.norm();
    let degenerate = raw_norm < DEGENERATE_NORM;
    let (f_graph, f_ghz) = if degenerate {
        (0.0, 0.0)
    } else {
        let state = PureState::from_unnormalized(out)?;
        let rho = state.reduce_to_leading(1 << k)?;
        let f_graph = fidelity(&rho, &graph_state_complete(k)?.to_density())?;
        let f_ghz = fidelity(
            &rho.conjugate(&graph_to_ghz_unitary(k)?)?,
            &ghz_state(k)?.to_density(),
        )?;
        (f_graph, f_ghz)
    };
    let residuals: Vec<MeasurementResidual> = BitString::all(n)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|x| {
            let residual =
                measurement_residual(&assign, &iso, &psi, &x).expect("dimensions checked");
            MeasurementResidual {
                input: x.to_string(),
                residual,
            }
        })
        .collect();
    let max_res = residuals.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(SelfTestReport {
        n_parties: n,
        k,
        coalition: assign.coalition().iter().map(|p| p + 1).collect(),
        svetlichny_value: value,
        quantum_bound: (1u64 << (n - 1)) as f64 * std::f64::consts::SQRT_2,
        sos_residual: sos,
        stabilizer_residuals: stabilizers,
        anticommutator_residual: anti,
        idempotency_residual: idem,
        isometry_raw_norm: raw_norm,
        degenerate,
        state_fidelity_to_graph: f_graph,
        state_fidelity_to_ghz: f_ghz,
        measurement_residuals: residuals,
        max_measurement_residual: max_res,
        purification_dim,
    })
}

/// Applies CNOTs from qubit `k−1` onto qubits `k..n` of an `n`-qubit state,
/// mapping `Φ^k ⊗ |0⟩^{n−k}` to `Φ^n`.
pub fn cnot_expand(state: &PureState, k: usize, n: usize) -> Result<PureState> {
    if k == 0 || k > n || state.dim() != 1usize << n {
        return Err(invalid(
            "cnot_expand needs 1 <= k <= n and an n-qubit state",
        ));
    }
    let control = 1usize << (n - k);
    let targets: usize = (0..n - k).fold(0, |m, i| m | 1 << i);
    let v = state.amplitudes();
    let mut out = ComplexVector::zeros(v.len());
    for i in 0..v.len() {
        let j = if i & control != 0 { i ^ targets } else { i };
        out[j] = v[i];
    }
    PureState::new(out)
}

/// Mixed state `v·ψψ† + (1−v)·I/d`.
pub fn with_white_noise(psi: &PureState, v: f64) -> Result<DensityMatrix> {
    psi.to_density()
        .mix(&DensityMatrix::maximally_mixed(psi.dim()), v)
}
