//! Certification and self-testing of multipartite quantum correlations with
//! the N-partite Svetlichny inequalities when some network nodes may collude.
//!
//! The crate is organised bottom-up:
//!
//! - [`quantum`]: dense complex linear algebra, canonical states, fidelity.
//! - [`bell`]: Svetlichny expressions, behaviors, strategies, classical and
//!   quantum bounds.
//! - [`coalition`]: parity coarse-graining of colluding groups and the
//!   decomposition of `S_N` into labeled `k`-partite Svetlichny expressions.
//! - [`selftest`]: numerical checks of the sum-of-squares certificate,
//!   stabilizer conditions and the SWAP isometry.
//! - [`fidelity`]: operator-inequality fidelity lines and network bounds.
//! - [`netprotocol`]: an IID simulator of the verifier-driven certification
//!   protocol.
//! - [`strategy_file`]: JSON strategy descriptions and CSV curve rows shared with
//!   the command-line front end.
//!
//! Conventions shared by every module: qubit factors are ordered so that
//! party 1 is the most significant bit of a computational-basis index, and
//! bit strings of inputs/outputs use the same ordering.

#![forbid(unsafe_code)]

pub mod bell;
pub mod coalition;
pub mod error;
pub mod fidelity;
pub mod netprotocol;
pub mod quantum;
pub mod random;
pub mod selftest;
pub mod strategy_file;

pub use bell::{
    behavior_from_strategy, canonical_strategy, classical_bound_bruteforce, relabel_minus_to_plus,
    svetlichny_value, Behavior, BitString, NetworkStrategy, Observable, Partition,
    PartyObservables, SvetlichnyExpr, Unit, UnitMeasurement, Variant,
};
pub use coalition::{
    best_subvalue, cluster_bound_check, coarse_grain, decompose, CoalitionObservables, Grouping,
    SubInequalityLabel,
};
pub use error::{Error, Result};
pub use fidelity::{network_bound, worst_case_bound, AngleGrid, FidelityLine};
pub use netprotocol::{run_protocol, Preset, ProtocolConfig, ProtocolReport, SamplingMode};
pub use quantum::{ComplexMatrix, ComplexVector, DensityMatrix, PureState, C64};
pub use selftest::{OperatorAssignment, SelfTestReport};
