//! Svetlichny expressions, correlators, behaviors and network strategies.
//!
//! Parties are indexed from 0 internally; party 0 is the verifier.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coalition::{CoalitionObservables, Grouping};
use crate::error::{invalid, Error, Result};
use crate::quantum::{
    factor_permutation, graph_state_complete, identity, kron_all, pauli_x, pauli_z, ComplexMatrix,
    DensityMatrix, MatrixChecks, EIGEN_TOL,
};

/// Probability tolerance for behavior validation.
pub const PROB_TOL: f64 = 1e-10;

/// Ordered bit string, e.g. an input vector `x⃗` or output vector `a⃗`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitString {
    bits: Vec<u8>,
}

impl BitString {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(invalid("bit strings hold only 0 and 1"));
        }
        Ok(Self { bits })
    }

    pub fn zeros(len: usize) -> Self {
        Self { bits: vec![0; len] }
    }

    /// Bits of `index` with the first bit most significant.
    pub fn from_index(index: usize, len: usize) -> Self {
        let bits = (0..len)
            .map(|i| ((index >> (len - 1 - i)) & 1) as u8)
            .collect();
        Self { bits }
    }

    /// Every string of length `len` in lexicographic order.
    pub fn all(len: usize) -> impl Iterator<Item = BitString> {
        (0..1usize << len).map(move |i| BitString::from_index(i, len))
    }

    pub fn index(&self) -> usize {
        self.bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, i: usize) -> u8 {
        self.bits[i]
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn parity(&self) -> u8 {
        (self.weight() % 2) as u8
    }

    /// Bits at `positions`, in that order.
    pub fn select(&self, positions: &[usize]) -> BitString {
        BitString {
            bits: positions.iter().map(|&p| self.bits[p]).collect(),
        }
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&other.bits);
        BitString { bits }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|ch| match ch {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(invalid(format!("'{other}' is not a bit"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(BitString { bits })
    }
}

/// Sign convention of the Svetlichny family: `(−1)^{w(w±1)/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[default]
    Plus,
    Minus,
}

impl Variant {
    pub fn flipped(self) -> Variant {
        match self {
            Variant::Plus => Variant::Minus,
            Variant::Minus => Variant::Plus,
        }
    }

    /// `(−1)^{w(w+1)/2}` for plus and `(−1)^{w(w−1)/2}` for minus.
    pub fn sign_for_weight(self, w: usize) -> i8 {
        let exponent = match self {
            Variant::Plus => w * (w + 1) / 2,
            Variant::Minus => w * w.saturating_sub(1) / 2,
        };
        if exponent % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Plus => "plus",
            Variant::Minus => "minus",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(Variant::Plus),
            "minus" | "-" => Ok(Variant::Minus),
            other => Err(invalid(format!("unknown variant '{other}'"))),
        }
    }
}

/// The expression `S_N^±`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SvetlichnyExpr {
    n_parties: usize,
    variant: Variant,
}

impl SvetlichnyExpr {
    pub fn new(n_parties: usize, variant: Variant) -> Result<Self> {
        if n_parties < 2 {
            return Err(invalid("Svetlichny expressions need at least two parties"));
        }
        Ok(Self { n_parties, variant })
    }

    pub fn plus(n_parties: usize) -> Result<Self> {
        Self::new(n_parties, Variant::Plus)
    }

    pub fn n_parties(&self) -> usize {
        self.n_parties
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn coefficient(&self, x: &BitString) -> Result<i8> {
        if x.len() != self.n_parties {
            return Err(invalid(format!(
                "input string has length {}, expression has {} parties",
                x.len(),
                self.n_parties
            )));
        }
        Ok(self.variant.sign_for_weight(x.weight()))
    }

    /// Hybrid-local bound `2^{N−1}`.
    pub fn classical_bound(&self) -> f64 {
        (1u64 << (self.n_parties - 1)) as f64
    }

    /// Quantum bound `2^{N−1}√2`.
    pub fn quantum_bound(&self) -> f64 {
        self.classical_bound() * std::f64::consts::SQRT_2
    }

    /// `Σ_x coefficient(x)·corr(x)`.
    pub fn evaluate<F: FnMut(&BitString) -> f64>(&self, mut corr: F) -> f64 {
        BitString::all(self.n_parties)
            .map(|x| self.variant.sign_for_weight(x.weight()) as f64 * corr(&x))
            .sum()
    }
}

/// Conditional distribution `p(a⃗|x⃗)` with `n_inputs` input bits and
/// `n_outputs` output bits (one per effective unit).
#[derive(Debug, Clone, PartialEq)]
pub struct Behavior {
    n_inputs: usize,
    n_outputs: usize,
    probs: Vec<f64>,
}

impl Behavior {
    /// `probs` is row-major over `(x, a)`.
    pub fn new(n_inputs: usize, n_outputs: usize, probs: Vec<f64>) -> Result<Self> {
        let rows = 1usize << n_inputs;
        let cols = 1usize << n_outputs;
        if probs.len() != rows * cols {
            return Err(invalid(format!(
                "behavior table has {} entries, expected {}",
                probs.len(),
                rows * cols
            )));
        }
        for x in 0..rows {
            let row = &probs[x * cols..(x + 1) * cols];
            if let Some(p) = row.iter().find(|&&p| p < -1e-12 || !p.is_finite()) {
                return Err(invalid(format!(
                    "negative or non-finite probability {p} at input {x}"
                )));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > PROB_TOL {
                return Err(invalid(format!(
                    "probabilities for input {x} sum to {total}"
                )));
            }
        }
        Ok(Self {
            n_inputs,
            n_outputs,
            probs,
        })
    }

    pub fn uniform(n_inputs: usize, n_outputs: usize) -> Self {
        let cols = 1usize << n_outputs;
        Self {
            n_inputs,
            n_outputs,
            probs: vec![1.0 / cols as f64; (1usize << n_inputs) * cols],
        }
    }

    /// Deterministic behavior with output `response(x)` for every input.
    pub fn deterministic<F: Fn(&BitString) -> BitString>(
        n_inputs: usize,
        n_outputs: usize,
        response: F,
    ) -> Result<Self> {
        let cols = 1usize << n_outputs;
        let mut probs = vec![0.0; (1usize << n_inputs) * cols];
        for x in BitString::all(n_inputs) {
            let a = response(&x);
            if a.len() != n_outputs {
                return Err(invalid("response has the wrong number of output bits"));
            }
            probs[x.index() * cols + a.index()] = 1.0;
        }
        Ok(Self {
            n_inputs,
            n_outputs,
            probs,
        })
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    pub fn prob(&self, x: usize, a: usize) -> f64 {
        self.probs[x * (1usize << self.n_outputs) + a]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        let cols = 1usize << self.n_outputs;
        &self.probs[x * cols..(x + 1) * cols]
    }

    pub fn table(&self) -> &[f64] {
        &self.probs
    }

    /// `Σ_{J(a)=0} p(a|x) − Σ_{J(a)=1} p(a|x)`.
    pub fn correlator(&self, x: &BitString) -> Result<f64> {
        if x.len() != self.n_inputs {
            return Err(invalid("input string length does not match behavior"));
        }
        Ok(self.correlator_at(x.index()))
    }

    pub fn correlator_at(&self, x: usize) -> f64 {
        self.row(x)
            .iter()
            .enumerate()
            .map(|(a, &p)| if a.count_ones() % 2 == 0 { p } else { -p })
            .sum()
    }

    /// Behavior with both input and output bits reordered: new party `i` is
    /// old party `perm[i]`. Requires one output bit per input bit.
    pub fn permute_parties(&self, perm: &[usize]) -> Result<Behavior> {
        let n = self.n_inputs;
        if self.n_outputs != n {
            return Err(invalid("permutation needs one output per party"));
        }
        let mut sorted = perm.to_vec();
        sorted.sort_unstable();
        if sorted != (0..n).collect::<Vec<_>>() {
            return Err(invalid("not a permutation"));
        }
        let cols = 1usize << n;
        let mut probs = vec![0.0; cols * cols];
        for x in BitString::all(n) {
            let new_x = x.select(perm);
            for a in BitString::all(n) {
                let new_a = a.select(perm);
                probs[new_x.index() * cols + new_a.index()] = self.prob(x.index(), a.index());
            }
        }
        Ok(Behavior {
            n_inputs: n,
            n_outputs: n,
            probs,
        })
    }
}

pub fn correlator(b: &Behavior, x: &BitString) -> Result<f64> {
    b.correlator(x)
}

pub fn svetlichny_value(expr: &SvetlichnyExpr, b: &Behavior) -> Result<f64> {
    if b.n_inputs() != expr.n_parties() {
        return Err(invalid(format!(
            "behavior has {} parties, expression has {}",
            b.n_inputs(),
            expr.n_parties()
        )));
    }
    Ok(expr.evaluate(|x| b.correlator_at(x.index())))
}

/// Hermitian operator with spectrum in {+1, −1}.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable(ComplexMatrix);

impl Observable {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_hermitian(EIGEN_TOL) {
            return Err(invalid("observable is not Hermitian"));
        }
        let sq = &m * &m;
        if (sq - identity(m.nrows())).max_abs() > EIGEN_TOL {
            return Err(invalid("observable does not square to the identity"));
        }
        Ok(Self(m))
    }

    pub(crate) fn new_unchecked(m: ComplexMatrix) -> Self {
        Self(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn negated(&self) -> Observable {
        Observable(-&self.0)
    }

    pub fn scaled_sign(&self, sign: i8) -> Observable {
        if sign < 0 {
            self.negated()
        } else {
            self.clone()
        }
    }

    /// `(I ± O)/2` for outcome 0 / 1.
    pub fn projector(&self, outcome: u8) -> ComplexMatrix {
        let id = identity(self.dim());
        if outcome == 0 {
            (id + &self.0).scale(0.5)
        } else {
            (id - &self.0).scale(0.5)
        }
    }

    pub fn conjugated(&self, u: &ComplexMatrix) -> Observable {
        Observable(u * &self.0 * u.adjoint())
    }

    pub fn pauli_x() -> Self {
        Self(pauli_x())
    }

    pub fn pauli_z() -> Self {
        Self(pauli_z())
    }

    pub fn identity(dim: usize) -> Self {
        Self(identity(dim))
    }
}

/// Observables `A_0, A_1` of a single party.
#[derive(Debug, Clone, PartialEq)]
pub struct PartyObservables {
    pub a0: Observable,
    pub a1: Observable,
}

impl PartyObservables {
    pub fn new(a0: Observable, a1: Observable) -> Result<Self> {
        if a0.dim() != a1.dim() {
            return Err(invalid("party observables act on different dimensions"));
        }
        Ok(Self { a0, a1 })
    }

    pub fn get(&self, x: u8) -> &Observable {
        if x == 0 {
            &self.a0
        } else {
            &self.a1
        }
    }

    pub fn dim(&self) -> usize {
        self.a0.dim()
    }
}

/// How a tensor factor of the shared state is measured.
#[derive(Debug, Clone, PartialEq)]
pub enum UnitMeasurement {
    Party(PartyObservables),
    Coalition(CoalitionObservables),
}

/// One tensor factor of the shared state together with the parties that
/// hold it.
#[derive(Debug, Clone, PartialEq)]
pub struct Unit {
    parties: Vec<usize>,
    measurement: UnitMeasurement,
}

impl Unit {
    pub fn party(party: usize, observables: PartyObservables) -> Self {
        Self {
            parties: vec![party],
            measurement: UnitMeasurement::Party(observables),
        }
    }

    pub fn coalition(observables: CoalitionObservables) -> Self {
        Self {
            parties: observables.members().to_vec(),
            measurement: UnitMeasurement::Coalition(observables),
        }
    }

    pub fn parties(&self) -> &[usize] {
        &self.parties
    }

    pub fn measurement(&self) -> &UnitMeasurement {
        &self.measurement
    }

    pub fn dim(&self) -> usize {
        match &self.measurement {
            UnitMeasurement::Party(p) => p.dim(),
            UnitMeasurement::Coalition(c) => c.dim(),
        }
    }

    /// Observable for the unit's own input bits, ordered as `parties()`.
    pub fn observable(&self, x_unit: &BitString) -> &Observable {
        match &self.measurement {
            UnitMeasurement::Party(p) => p.get(x_unit.bit(0)),
            UnitMeasurement::Coalition(c) => c.observable_at(x_unit.index()),
        }
    }

    pub(crate) fn map_observables<F: Fn(&BitString, &Observable) -> Observable>(
        &self,
        f: F,
    ) -> Unit {
        let measurement = match &self.measurement {
            UnitMeasurement::Party(p) => UnitMeasurement::Party(PartyObservables {
                a0: f(&BitString::zeros(1), &p.a0),
                a1: f(&BitString::from_index(1, 1), &p.a1),
            }),
            UnitMeasurement::Coalition(c) => UnitMeasurement::Coalition(c.map(&f)),
        };
        Unit {
            parties: self.parties.clone(),
            measurement,
        }
    }
}

/// Trust structure attached to a strategy.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Partition {
    #[default]
    Honest,
    Dishonest(Vec<usize>),
    Clusters(Vec<Vec<usize>>),
}

/// Shared state plus the measurement of every unit.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkStrategy {
    n_parties: usize,
    state: DensityMatrix,
    units: Vec<Unit>,
    partition: Partition,
}

impl NetworkStrategy {
    pub fn new(state: DensityMatrix, units: Vec<Unit>, partition: Partition) -> Result<Self> {
        let mut seen: Vec<usize> = units
            .iter()
            .flat_map(|u| u.parties().iter().copied())
            .collect();
        let n = seen.len();
        seen.sort_unstable();
        if n == 0 || seen != (0..n).collect::<Vec<_>>() {
            return Err(invalid("units must be disjoint and cover parties 0..N"));
        }
        let dim: usize = units.iter().map(Unit::dim).product();
        if dim != state.dim() {
            return Err(invalid(format!(
                "unit dimensions multiply to {dim}, state has dimension {}",
                state.dim()
            )));
        }
        let check_parties = |ps: &[usize]| ps.iter().all(|&p| p < n);
        match &partition {
            Partition::Honest => {}
            Partition::Dishonest(d) => {
                if !check_parties(d) || d.len() >= n {
                    return Err(invalid(
                        "dishonest set must be a proper subset of the parties",
                    ));
                }
            }
            Partition::Clusters(cs) => {
                let mut all: Vec<usize> = cs.iter().flatten().copied().collect();
                all.sort_unstable();
                if all != (0..n).collect::<Vec<_>>() {
                    return Err(invalid("clusters must be disjoint and cover every party"));
                }
            }
        }
        Ok(Self {
            n_parties: n,
            state,
            units,
            partition,
        })
    }

    pub fn n_parties(&self) -> usize {
        self.n_parties
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn unit_dims(&self) -> Vec<usize> {
        self.units.iter().map(Unit::dim).collect()
    }

    pub fn with_state(&self, state: DensityMatrix) -> Result<Self> {
        Self::new(state, self.units.clone(), self.partition.clone())
    }

    pub fn with_partition(&self, partition: Partition) -> Result<Self> {
        Self::new(self.state.clone(), self.units.clone(), partition)
    }

    /// `⊗_u M_u(x_u)` over units in factor order.
    pub fn correlation_operator(&self, x: &BitString) -> ComplexMatrix {
        let factors: Vec<&ComplexMatrix> = self
            .units
            .iter()
            .map(|u| u.observable(&x.select(u.parties())).matrix())
            .collect();
        kron_all(factors)
    }

    /// `⟨⊗_u M_u(x_u)⟩_ρ`, the parity correlator for input `x`.
    pub fn correlator(&self, x: &BitString) -> Result<f64> {
        if x.len() != self.n_parties {
            return Err(invalid("input string length does not match strategy"));
        }
        Ok(self.state.expectation(&self.correlation_operator(x)).re)
    }

    /// All `2^N` correlators indexed by input.
    pub fn correlators(&self) -> Vec<f64> {
        (0..1usize << self.n_parties)
            .into_par_iter()
            .map(|i| {
                let x = BitString::from_index(i, self.n_parties);
                self.state.expectation(&self.correlation_operator(&x)).re
            })
            .collect()
    }

    pub fn svetlichny_value(&self, variant: Variant) -> Result<f64> {
        let expr = SvetlichnyExpr::new(self.n_parties, variant)?;
        let corr = self.correlators();
        Ok(expr.evaluate(|x| corr[x.index()]))
    }

    /// Merges units according to `grouping`; each group must be a union of
    /// existing units. Joint observables of merged units are tensor
    /// products, so a merged unit outputs the parity of its members.
    pub fn regroup(&self, grouping: &Grouping) -> Result<NetworkStrategy> {
        if grouping.n_parties() != self.n_parties {
            return Err(invalid(
                "grouping and strategy cover different party counts",
            ));
        }
        let unit_of_party: Vec<usize> = {
            let mut v = vec![0; self.n_parties];
            for (ui, u) in self.units.iter().enumerate() {
                for &p in u.parties() {
                    v[p] = ui;
                }
            }
            v
        };
        let mut order = Vec::new();
        let mut new_units = Vec::new();
        for group in grouping.units() {
            let mut members: Vec<usize> = Vec::new();
            for &p in group {
                let ui = unit_of_party[p];
                if !members.contains(&ui) {
                    members.push(ui);
                }
            }
            for &ui in &members {
                if self.units[ui].parties().iter().any(|p| !group.contains(p)) {
                    return Err(invalid(format!(
                        "group {:?} splits an existing joint unit",
                        group
                    )));
                }
            }
            order.extend_from_slice(&members);
            if group.len() == 1 {
                new_units.push(self.units[members[0]].clone());
                continue;
            }
            let positions: Vec<Vec<usize>> = members
                .iter()
                .map(|&ui| {
                    self.units[ui]
                        .parties()
                        .iter()
                        .map(|p| group.iter().position(|q| q == p).expect("checked above"))
                        .collect()
                })
                .collect();
            let joint = BitString::all(group.len())
                .map(|xs| {
                    let parts: Vec<&ComplexMatrix> = members
                        .iter()
                        .zip(&positions)
                        .map(|(&ui, pos)| self.units[ui].observable(&xs.select(pos)).matrix())
                        .collect();
                    Observable::new_unchecked(kron_all(parts))
                })
                .collect();
            new_units.push(Unit::coalition(CoalitionObservables::from_parts(
                group.clone(),
                joint,
            )?));
        }
        let dims = self.unit_dims();
        let perm = factor_permutation(&dims, &order)?;
        let state = self.state.conjugate(&perm)?;
        let joint: Vec<&Vec<usize>> = grouping.units().iter().filter(|u| u.len() > 1).collect();
        let partition = match joint.as_slice() {
            [] => self.partition.clone(),
            [d] => Partition::Dishonest((*d).clone()),
            _ => Partition::Clusters(grouping.units().to_vec()),
        };
        NetworkStrategy::new(state, new_units, partition)
    }
}

/// Born-rule behavior over the strategy's units: unit `u` outputs the
/// parity bit of its members.
pub fn behavior_from_strategy(s: &NetworkStrategy) -> Result<Behavior> {
    for u in s.units() {
        for xs in BitString::all(u.parties().len()) {
            Observable::new(u.observable(&xs).matrix().clone())?;
        }
    }
    let n = s.n_parties();
    let n_out = s.units().len();
    let cols = 1usize << n_out;
    let rows: Vec<Vec<f64>> = (0..1usize << n)
        .into_par_iter()
        .map(|xi| {
            let x = BitString::from_index(xi, n);
            let projectors: Vec<[ComplexMatrix; 2]> = s
                .units()
                .iter()
                .map(|u| {
                    let o = u.observable(&x.select(u.parties()));
                    [o.projector(0), o.projector(1)]
                })
                .collect();
            (0..cols)
                .map(|ai| {
                    let a = BitString::from_index(ai, n_out);
                    let factors = projectors
                        .iter()
                        .enumerate()
                        .map(|(u, p)| &p[a.bit(u) as usize]);
                    s.state().expectation(&kron_all(factors)).re.max(0.0)
                })
                .collect()
        })
        .collect();
    let probs = rows
        .into_iter()
        .flat_map(|row| {
            let total: f64 = row.iter().sum();
            row.into_iter().map(move |p| p / total)
        })
        .collect();
    Behavior::new(n, n_out, probs)
}

/// Optimal hybrid-local assignment: parties in `block` answer with
/// `f_block[x_block]`, the rest with `f_rest[x_rest]` (both ±1 parities).
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalAssignment {
    pub block: Vec<usize>,
    pub rest: Vec<usize>,
    pub f_block: Vec<i8>,
    pub f_rest: Vec<i8>,
    pub value: f64,
}

/// Maximises `Σ_x c(x) f_P(x_P) f_{P^c}(x_{P^c})` over proper bipartitions and
/// parity-valued response functions.
///
/// A λ-mixture of hybrid strategies cannot beat its best deterministic
/// component because the objective is linear, so deterministic parity
/// functions per block suffice. For each function on the smaller block the
/// other block's optimum is chosen pointwise, which is exact.
pub fn classical_optimum(n: usize, variant: Variant) -> Result<ClassicalAssignment> {
    if !(2..=5).contains(&n) {
        return Err(Error::Unsupported(format!(
            "brute-force classical bound supports 2 <= N <= 5, got {n}"
        )));
    }
    let full = (1usize << n) - 1;
    // Subsets containing party 0 enumerate each bipartition once.
    let subsets: Vec<usize> = (1..full).filter(|m| m & (1 << (n - 1)) != 0).collect();
    let best = subsets
        .par_iter()
        .map(|&mask| best_for_bipartition(n, variant, mask))
        .reduce_with(|a, b| if b.value > a.value { b } else { a })
        .expect("at least one bipartition");
    Ok(best)
}

fn best_for_bipartition(n: usize, variant: Variant, mask: usize) -> ClassicalAssignment {
    let in_block = |p: usize| mask & (1 << (n - 1 - p)) != 0;
    let block: Vec<usize> = (0..n).filter(|&p| in_block(p)).collect();
    let rest: Vec<usize> = (0..n).filter(|&p| !in_block(p)).collect();
    let (small, large, small_is_block) = if block.len() <= rest.len() {
        (&block, &rest, true)
    } else {
        (&rest, &block, false)
    };
    let coeffs: Vec<f64> = BitString::all(n)
        .map(|x| variant.sign_for_weight(x.weight()) as f64)
        .collect();
    let input_of = |xs: usize, xl: usize| {
        let mut idx = 0usize;
        for (i, &p) in small.iter().enumerate() {
            if (xs >> (small.len() - 1 - i)) & 1 == 1 {
                idx |= 1 << (n - 1 - p);
            }
        }
        for (i, &p) in large.iter().enumerate() {
            if (xl >> (large.len() - 1 - i)) & 1 == 1 {
                idx |= 1 << (n - 1 - p);
            }
        }
        idx
    };
    let n_small = 1usize << small.len();
    let n_large = 1usize << large.len();
    let mut best = (f64::NEG_INFINITY, vec![], vec![]);
    for fmask in 0..(1usize << n_small) {
        let f_small: Vec<i8> = (0..n_small)
            .map(|i| if fmask & (1 << i) != 0 { -1 } else { 1 })
            .collect();
        let mut value = 0.0;
        let mut f_large = Vec::with_capacity(n_large);
        for xl in 0..n_large {
            let inner: f64 = (0..n_small)
                .map(|xs| coeffs[input_of(xs, xl)] * f_small[xs] as f64)
                .sum();
            value += inner.abs();
            f_large.push(if inner >= 0.0 { 1 } else { -1 });
        }
        if value > best.0 {
            best = (value, f_small, f_large);
        }
    }
    let (value, f_small, f_large) = best;
    let (f_block, f_rest) = if small_is_block {
        (f_small, f_large)
    } else {
        (f_large, f_small)
    };
    ClassicalAssignment {
        block,
        rest,
        f_block,
        f_rest,
        value,
    }
}

pub fn classical_bound_bruteforce(n: usize, variant: Variant) -> Result<f64> {
    Ok(classical_optimum(n, variant)?.value)
}

/// Canonical observables: party 1 measures `(σx − σz)/√2` and `−(σx + σz)/√2`,
/// every other party `σz` and `σx`.
pub fn canonical_observables(k: usize) -> Vec<PartyObservables> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (x, z) = (pauli_x(), pauli_z());
    let mut out = vec![PartyObservables {
        a0: Observable::new_unchecked((&x - &z).scale(s)),
        a1: Observable::new_unchecked(-(&x + &z).scale(s)),
    }];
    for _ in 1..k {
        out.push(PartyObservables {
            a0: Observable::pauli_z(),
            a1: Observable::pauli_x(),
        });
    }
    out
}

/// Complete-graph state with the canonical observables; reaches
/// `S_k^+ = 2^{k−1}√2`.
pub fn canonical_strategy(k: usize) -> Result<NetworkStrategy> {
    if k < 2 {
        return Err(invalid("canonical strategy needs k >= 2"));
    }
    let state = graph_state_complete(k)?.to_density();
    let units = canonical_observables(k)
        .into_iter()
        .enumerate()
        .map(|(p, obs)| Unit::party(p, obs))
        .collect();
    NetworkStrategy::new(state, units, Partition::Honest)
}

/// Negates every input-1 observable. Joint units pick up `(−1)^{w(x_u)}`.
pub fn relabel_minus_to_plus(s: &NetworkStrategy) -> NetworkStrategy {
    let units = s
        .units()
        .iter()
        .map(|u| u.map_observables(|x, o| o.scaled_sign(if x.weight() % 2 == 0 { 1 } else { -1 })))
        .collect();
    NetworkStrategy {
        n_parties: s.n_parties,
        state: s.state.clone(),
        units,
        partition: s.partition.clone(),
    }
}
