//! Parity coarse-graining of colluding groups and the decomposition of
//! `S_N` into labeled `k`-partite Svetlichny expressions.

use rayon::prelude::*;
use serde::Serialize;

use crate::bell::{
    Behavior, BitString, NetworkStrategy, Observable, PartyObservables, SvetlichnyExpr, Variant,
};
use crate::error::{invalid, Result};
use crate::quantum::{identity, kron_all, ComplexMatrix, MatrixChecks};

/// Joint observables `M_{x_D}` of a coalition, indexed by the members'
/// input string in member order.
#[derive(Debug, Clone, PartialEq)]
pub struct CoalitionObservables {
    members: Vec<usize>,
    joint: Vec<Observable>,
}

impl CoalitionObservables {
    pub fn from_parts(members: Vec<usize>, joint: Vec<Observable>) -> Result<Self> {
        if members.is_empty() {
            return Err(invalid("a coalition needs at least one member"));
        }
        if joint.len() != 1usize << members.len() {
            return Err(invalid(format!(
                "coalition of {} members needs {} joint observables, got {}",
                members.len(),
                1usize << members.len(),
                joint.len()
            )));
        }
        let dim = joint[0].dim();
        if joint.iter().any(|o| o.dim() != dim) {
            return Err(invalid("joint observables act on different dimensions"));
        }
        Ok(Self { members, joint })
    }

    /// Members measuring independently; the coalition outputs the parity of
    /// their outcomes, i.e. the joint observable is the tensor product.
    pub fn from_product(members: Vec<usize>, parties: &[PartyObservables]) -> Result<Self> {
        if parties.len() != members.len() {
            return Err(invalid("one observable pair per member is required"));
        }
        let joint = BitString::all(members.len())
            .map(|x| {
                Observable::new_unchecked(kron_all(
                    parties
                        .iter()
                        .enumerate()
                        .map(|(i, p)| p.get(x.bit(i)).matrix()),
                ))
            })
            .collect();
        Self::from_parts(members, joint)
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn dim(&self) -> usize {
        self.joint[0].dim()
    }

    pub fn observable_at(&self, x_index: usize) -> &Observable {
        &self.joint[x_index]
    }

    pub fn observables(&self) -> &[Observable] {
        &self.joint
    }

    pub(crate) fn map<F: Fn(&BitString, &Observable) -> Observable>(&self, f: &F) -> Self {
        let n = self.members.len();
        Self {
            members: self.members.clone(),
            joint: self
                .joint
                .iter()
                .enumerate()
                .map(|(i, o)| f(&BitString::from_index(i, n), o))
                .collect(),
        }
    }
}

/// `Σ_{J(a)=0} Π_a − Σ_{J(a)=1} Π_a` for one coalition input. `povm[a]` is
/// the element for outcome string `a` (index order, first member most
/// significant).
pub fn coalition_observable_from_povm(povm: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    if povm.is_empty() || !povm.len().is_power_of_two() {
        return Err(invalid("POVM needs 2^|D| elements"));
    }
    let dim = povm[0].nrows();
    let mut total = ComplexMatrix::zeros(dim, dim);
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (a, el) in povm.iter().enumerate() {
        if el.nrows() != dim || !el.is_psd(1e-9) {
            return Err(invalid(format!(
                "POVM element {a} is not a PSD matrix of dimension {dim}"
            )));
        }
        total += el;
        if a.count_ones() % 2 == 0 {
            m += el;
        } else {
            m -= el;
        }
    }
    if (total - identity(dim)).max_abs() > 1e-9 {
        return Err(invalid("POVM elements do not sum to the identity"));
    }
    Ok(m)
}

/// Ordered disjoint units `S_1..S_k` covering parties `0..N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grouping {
    n_parties: usize,
    units: Vec<Vec<usize>>,
}

impl Grouping {
    pub fn new(n_parties: usize, units: Vec<Vec<usize>>) -> Result<Self> {
        let mut all: Vec<usize> = units.iter().flatten().copied().collect();
        all.sort_unstable();
        if units.iter().any(Vec::is_empty) || all != (0..n_parties).collect::<Vec<_>>() {
            return Err(invalid(
                "grouping units must be non-empty, disjoint and cover every party",
            ));
        }
        Ok(Self { n_parties, units })
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            n_parties: n,
            units: (0..n).map(|p| vec![p]).collect(),
        }
    }

    /// Honest parties as singletons in index order, followed by the
    /// coalition as the last unit.
    pub fn coalition(n: usize, coalition: &[usize]) -> Result<Self> {
        if coalition.is_empty() {
            return Ok(Self::singletons(n));
        }
        let mut units: Vec<Vec<usize>> = (0..n)
            .filter(|p| !coalition.contains(p))
            .map(|p| vec![p])
            .collect();
        units.push(coalition.to_vec());
        Self::new(n, units)
    }

    pub fn n_parties(&self) -> usize {
        self.n_parties
    }

    pub fn k(&self) -> usize {
        self.units.len()
    }

    pub fn units(&self) -> &[Vec<usize>] {
        &self.units
    }

    /// First member of each unit; these carry the free `k`-partite input.
    pub fn free_parties(&self) -> Vec<usize> {
        self.units.iter().map(|u| u[0]).collect()
    }

    /// Remaining members, unit by unit; their inputs form the fixed label.
    pub fn label_parties(&self) -> Vec<usize> {
        self.units
            .iter()
            .flat_map(|u| u[1..].iter().copied())
            .collect()
    }

    /// Full input string from the free bits `y` and the label bits.
    pub fn assemble(&self, y: &BitString, label: &BitString) -> BitString {
        let mut bits = vec![0u8; self.n_parties];
        for (i, p) in self.free_parties().into_iter().enumerate() {
            bits[p] = y.bit(i);
        }
        for (i, p) in self.label_parties().into_iter().enumerate() {
            bits[p] = label.bit(i);
        }
        BitString::new(bits).expect("bits are binary")
    }
}

/// One term `sign · S^{variant}_{k, fixed}` of the decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubInequalityLabel {
    #[serde(serialize_with = "serialize_bits")]
    pub fixed: BitString,
    pub variant: Variant,
    pub sign: i8,
}

fn serialize_bits<S: serde::Serializer>(
    b: &BitString,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&b.to_string())
}

/// Sub-variant and sign for a fixed string of weight `w`.
///
/// `S^+`: weight odd → minus, sign `(−1)^{w(w+1)/2}`.
/// `S^-`: weight odd → plus, sign `(−1)^{w(w−1)/2}`.
pub fn label_for(variant: Variant, fixed: BitString) -> SubInequalityLabel {
    let w = fixed.weight();
    let sub = if w % 2 == 1 {
        variant.flipped()
    } else {
        variant
    };
    SubInequalityLabel {
        sign: variant.sign_for_weight(w),
        variant: sub,
        fixed,
    }
}

/// The `2^{N−k}` labels of the decomposition of `expr` along `g`.
pub fn decompose(expr: &SvetlichnyExpr, g: &Grouping) -> Result<Vec<SubInequalityLabel>> {
    if g.n_parties() != expr.n_parties() {
        return Err(invalid(
            "grouping and expression cover different party counts",
        ));
    }
    if g.k() < 2 {
        return Err(invalid(format!(
            "decomposition needs 2 <= k <= N, got k = {}",
            g.k()
        )));
    }
    let n_fixed = expr.n_parties() - g.k();
    Ok(BitString::all(n_fixed)
        .map(|x| label_for(expr.variant(), x))
        .collect())
}

/// `S^{label.variant}_{k, label.fixed}` evaluated on full-input correlators.
pub fn sub_value<F: Fn(&BitString) -> f64>(
    g: &Grouping,
    label: &SubInequalityLabel,
    corr: F,
) -> f64 {
    let sub = SvetlichnyExpr::new(g.k().max(2), label.variant).expect("k >= 2");
    BitString::all(g.k())
        .map(|y| {
            sub.variant().sign_for_weight(y.weight()) as f64 * corr(&g.assemble(&y, &label.fixed))
        })
        .sum()
}

/// Parity coarse-graining: unit `S_j` outputs `⊕_{i∈S_j} a_i`. Inputs are
/// kept for every original party.
pub fn coarse_grain(b: &Behavior, g: &Grouping) -> Result<Behavior> {
    let n = b.n_inputs();
    if b.n_outputs() != n || g.n_parties() != n {
        return Err(invalid(
            "coarse-graining needs one output per party and a matching grouping",
        ));
    }
    let k = g.k();
    let cols = 1usize << k;
    let unit_masks: Vec<usize> = g
        .units()
        .iter()
        .map(|u| u.iter().fold(0, |m, &p| m | 1 << (n - 1 - p)))
        .collect();
    let mut probs = vec![0.0; (1usize << n) * cols];
    for x in 0..1usize << n {
        for a in 0..1usize << n {
            let mut out = 0usize;
            for (j, &mask) in unit_masks.iter().enumerate() {
                if (a & mask).count_ones() % 2 == 1 {
                    out |= 1 << (k - 1 - j);
                }
            }
            probs[x * cols + out] += b.prob(x, a);
        }
    }
    Behavior::new(n, k, probs)
}

/// Label maximising `|S_sub|` and that absolute value, for strategy `s`
/// viewed through grouping `g` and the plus expression.
pub fn best_subvalue(s: &NetworkStrategy, g: &Grouping) -> Result<(SubInequalityLabel, f64)> {
    best_subvalue_for(s, g, Variant::Plus)
}

pub fn best_subvalue_for(
    s: &NetworkStrategy,
    g: &Grouping,
    variant: Variant,
) -> Result<(SubInequalityLabel, f64)> {
    // Regrouping validates that g is compatible with the strategy's joint
    // units; it leaves every correlator unchanged.
    let grouped = s.regroup(g)?;
    let corr = grouped.correlators();
    best_subvalue_from_correlators(&corr, g, variant)
}

pub fn best_subvalue_from_correlators(
    corr: &[f64],
    g: &Grouping,
    variant: Variant,
) -> Result<(SubInequalityLabel, f64)> {
    let expr = SvetlichnyExpr::new(g.n_parties(), variant)?;
    if g.k() == 1 {
        return Err(invalid(
            "a single effective party has no Svetlichny expression",
        ));
    }
    let labels = decompose(&expr, g)?;
    labels
        .into_par_iter()
        .map(|label| {
            let v = sub_value(g, &label, |x| corr[x.index()]).abs();
            (label, v)
        })
        .reduce_with(|a, b| {
            // Ties resolve to the lexicographically smaller label so the
            // result does not depend on scheduling.
            if b.1 > a.1 || (b.1 == a.1 && b.0.fixed < a.0.fixed) {
                b
            } else {
                a
            }
        })
        .ok_or_else(|| invalid("no labels"))
}

/// `max_label |S_sub| ≥ |s_N| / 2^{N−k} − 1e-9`.
pub fn cluster_bound_check(s: &NetworkStrategy, g: &Grouping) -> Result<bool> {
    let corr = s.regroup(g)?.correlators();
    let expr = SvetlichnyExpr::plus(g.n_parties())?;
    let s_n = expr.evaluate(|x| corr[x.index()]);
    if g.k() == g.n_parties() {
        return Ok(true);
    }
    let (_, best) = best_subvalue_from_correlators(&corr, g, Variant::Plus)?;
    Ok(best >= s_n.abs() / (1u64 << (g.n_parties() - g.k())) as f64 - 1e-9)
}
