//! Random observables, strategies and behaviors for property tests and
//! benchmarks.

use rand::Rng;

use crate::bell::{Behavior, NetworkStrategy, Observable, Partition, PartyObservables, Unit};
use crate::quantum::{haar_unitary, pauli_z, random_pure_state, ComplexMatrix, DensityMatrix, C64};

/// `U·diag(±1)·U†` with Haar `U`. Qubits always get one sign of each kind so
/// the observable is never `±I`.
pub fn random_binary_observable<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Observable {
    let u = haar_unitary(dim, rng);
    let diag = if dim == 2 {
        pauli_z()
    } else {
        let signs: Vec<C64> = (0..dim)
            .map(|_| C64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0))
            .collect();
        ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(signs))
    };
    Observable::new_unchecked(&u * diag * u.adjoint())
}

pub fn random_party_observables<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> PartyObservables {
    PartyObservables {
        a0: random_binary_observable(dim, rng),
        a1: random_binary_observable(dim, rng),
    }
}

/// Random pure `n`-qubit state with random binary observables per party.
pub fn random_qubit_strategy<R: Rng + ?Sized>(n: usize, rng: &mut R) -> NetworkStrategy {
    let state = random_pure_state(1 << n, rng).to_density();
    let units = (0..n)
        .map(|p| Unit::party(p, random_party_observables(2, rng)))
        .collect();
    NetworkStrategy::new(state, units, Partition::Honest).expect("dimensions agree by construction")
}

/// Applies an independent Haar unitary to every unit, on both the state and
/// the observables. Correlators are unchanged.
pub fn haar_rotated<R: Rng + ?Sized>(s: &NetworkStrategy, rng: &mut R) -> NetworkStrategy {
    let us: Vec<ComplexMatrix> = s
        .units()
        .iter()
        .map(|u| haar_unitary(u.dim(), rng))
        .collect();
    let total = crate::quantum::kron_all(us.iter());
    let state = DensityMatrix::new(&total * s.state().matrix() * total.adjoint())
        .expect("unitary conjugation preserves states");
    let units = s
        .units()
        .iter()
        .zip(&us)
        .map(|(unit, u)| unit.map_observables(|_, o| o.conjugated(u)))
        .collect();
    NetworkStrategy::new(state, units, s.partition().clone()).expect("same dimensions")
}

/// Behavior with every row drawn uniformly from the probability simplex.
pub fn random_behavior<R: Rng + ?Sized>(
    n_inputs: usize,
    n_outputs: usize,
    rng: &mut R,
) -> Behavior {
    let cols = 1usize << n_outputs;
    let mut probs = Vec::with_capacity((1usize << n_inputs) * cols);
    for _ in 0..1usize << n_inputs {
        let row: Vec<f64> = (0..cols)
            .map(|_| -rng.random::<f64>().max(1e-300).ln())
            .collect();
        let total: f64 = row.iter().sum();
        probs.extend(row.into_iter().map(|p| p / total));
    }
    Behavior::new(n_inputs, n_outputs, probs).expect("rows are normalized")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{identity, MatrixChecks};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn observables_are_binary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for dim in [2, 3, 4, 8] {
            let o = random_binary_observable(dim, &mut rng);
            assert!(o.matrix().is_hermitian(1e-10));
            assert!((o.matrix() * o.matrix() - identity(dim)).max_abs() < 1e-10);
        }
    }

    #[test]
    fn haar_rotation_keeps_correlators() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = random_qubit_strategy(3, &mut rng);
        let r = haar_rotated(&s, &mut rng);
        for (a, b) in s.correlators().iter().zip(r.correlators()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn behaviors_are_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let b = random_behavior(3, 2, &mut rng);
        for x in 0..8 {
            assert!((b.row(x).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
