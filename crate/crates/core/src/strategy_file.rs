//! JSON strategy files and CSV curve output.
//!
//! Parties are numbered from 1 in files. Complex numbers are `[re, im]`
//! pairs. A file either names a preset:
//!
//! ```json
//! { "n_parties": 3, "preset": "canonical" }
//! ```
//!
//! or spells out a state, units and a partition:
//!
//! ```json
//! {
//!   "n_parties": 2,
//!   "state": "graph",
//!   "units": [
//!     { "parties": [1], "observables": "canonical-1" },
//!     { "parties": [2], "observables": ["pauli-z", "pauli-x"] }
//!   ],
//!   "partition": "honest"
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bell::{
    canonical_observables, BitString, NetworkStrategy, Observable, Partition, PartyObservables,
    Unit, UnitMeasurement,
};
use crate::coalition::CoalitionObservables;
use crate::error::{invalid, Error, Result};
use crate::fidelity::CurveRow;
use crate::netprotocol::{adversary_preset, Preset};
use crate::quantum::{
    c, ghz_state, graph_state_complete, graph_to_ghz_local, identity, kron_all, pauli_x, pauli_y,
    pauli_z, ComplexMatrix, ComplexVector, DensityMatrix, PureState,
};

type Pair = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySpec {
    pub n_parties: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub units: Vec<UnitSpec>,
    #[serde(default)]
    pub partition: PartitionSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    /// `ghz`, `graph`, `noisy-ghz:V` or `noisy-graph:V`.
    Named(String),
    Amplitudes {
        amplitudes: Vec<Pair>,
    },
    Density {
        density: Vec<Vec<Pair>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitSpec {
    pub parties: Vec<usize>,
    pub observables: ObservablesSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObservablesSpec {
    /// `canonical-1` for the rotated pair of party 1, `canonical` for
    /// `(σz, σx)`.
    Pair(String),
    /// One entry per unit input, first member most significant.
    List(Vec<ObservableSpec>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObservableSpec {
    /// A name (`pauli-z`, `pauli-x`, `pauli-y`, `identity`) or a signed
    /// Pauli string such as `ZX` or `-XZ`.
    Named(String),
    Matrix(Vec<Vec<Pair>>),
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionSpec {
    #[default]
    Honest,
    Dishonest(Vec<usize>),
    Clusters(Vec<Vec<usize>>),
}

fn at(path: &str, e: Error) -> Error {
    match e {
        Error::InvalidArgument(m) => Error::InvalidArgument(format!("{path}: {m}")),
        other => other,
    }
}

fn zero_based(path: &str, parties: &[usize], n: usize) -> Result<Vec<usize>> {
    parties
        .iter()
        .map(|&p| {
            if p == 0 || p > n {
                Err(invalid(format!("{path}: party {p} outside 1..={n}")))
            } else {
                Ok(p - 1)
            }
        })
        .collect()
}

fn matrix_from_pairs(path: &str, rows: &[Vec<Pair>]) -> Result<ComplexMatrix> {
    let d = rows.len();
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(invalid(format!(
            "{path}: matrix must be square and non-empty"
        )));
    }
    Ok(ComplexMatrix::from_fn(d, d, |i, j| {
        c(rows[i][j][0], rows[i][j][1])
    }))
}

fn matrix_to_pairs(m: &ComplexMatrix) -> Vec<Vec<Pair>> {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

fn named_observable(path: &str, name: &str, qubits: usize) -> Result<ComplexMatrix> {
    let single = match name {
        "pauli-z" => Some(pauli_z()),
        "pauli-x" => Some(pauli_x()),
        "pauli-y" => Some(pauli_y()),
        _ => None,
    };
    if let Some(m) = single {
        if qubits != 1 {
            return Err(invalid(format!(
                "{path}: '{name}' acts on one qubit, unit has {qubits}"
            )));
        }
        return Ok(m);
    }
    if name == "identity" {
        return Ok(identity(1 << qubits));
    }
    let (sign, letters) = match name.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, name.strip_prefix('+').unwrap_or(name)),
    };
    if letters.len() != qubits || letters.is_empty() {
        return Err(invalid(format!(
            "{path}: '{name}' is neither a known observable nor a Pauli string on {qubits} qubits"
        )));
    }
    let factors = letters
        .chars()
        .map(|ch| match ch {
            'I' => Ok(identity(2)),
            'X' => Ok(pauli_x()),
            'Y' => Ok(pauli_y()),
            'Z' => Ok(pauli_z()),
            other => Err(invalid(format!("{path}: '{other}' is not a Pauli letter"))),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(kron_all(factors.iter()).scale(sign))
}

fn binary(path: &str, m: ComplexMatrix) -> Result<Observable> {
    Observable::new(m).map_err(|e| at(path, e))
}

impl StrategySpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| invalid(format!("line {}, column {}: {e}", e.line(), e.column())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("strategy files always serialize")
    }

    /// Display name: `name`, else the preset, else `custom`.
    pub fn display_name(&self) -> String {
        self.name
            .clone()
            .or_else(|| self.preset.clone())
            .unwrap_or_else(|| "custom".into())
    }

    pub fn to_strategy(&self) -> Result<NetworkStrategy> {
        let n = self.n_parties;
        if n < 2 {
            return Err(invalid("n_parties: need at least 2 parties"));
        }
        if let Some(p) = &self.preset {
            if self.state.is_some() || !self.units.is_empty() {
                return Err(invalid("preset: cannot be combined with state or units"));
            }
            let preset: Preset = p.parse().map_err(|e| at("preset", e))?;
            return adversary_preset(&preset, n);
        }
        let state_spec = self
            .state
            .as_ref()
            .ok_or_else(|| invalid("state: missing (give a preset or a state)"))?;
        let state = self.build_state(state_spec)?;
        let units = if self.units.is_empty() {
            default_units(state_spec, n)?
        } else {
            self.units
                .iter()
                .enumerate()
                .map(|(i, u)| build_unit(&format!("units[{i}]"), u, n))
                .collect::<Result<Vec<_>>>()?
        };
        let partition = match &self.partition {
            PartitionSpec::Honest => Partition::Honest,
            PartitionSpec::Dishonest(d) => {
                Partition::Dishonest(zero_based("partition.dishonest", d, n)?)
            }
            PartitionSpec::Clusters(cs) => Partition::Clusters(
                cs.iter()
                    .map(|cl| zero_based("partition.clusters", cl, n))
                    .collect::<Result<_>>()?,
            ),
        };
        NetworkStrategy::new(state, units, partition).map_err(|e| at("units", e))
    }

    fn build_state(&self, spec: &StateSpec) -> Result<DensityMatrix> {
        let n = self.n_parties;
        match spec {
            StateSpec::Named(name) => {
                let (base, v) = match name.split_once(':') {
                    Some((b, v)) => {
                        let v: f64 = v
                            .parse()
                            .map_err(|_| invalid(format!("state: '{v}' is not a visibility")))?;
                        if !(0.0..=1.0).contains(&v) {
                            return Err(invalid("state: visibility must lie in [0, 1]"));
                        }
                        (b, v)
                    }
                    None => (name.as_str(), 1.0),
                };
                let psi = match base {
                    "ghz" | "noisy-ghz" => ghz_state(n)?,
                    "graph" | "noisy-graph" => graph_state_complete(n)?,
                    other => return Err(invalid(format!("state: unknown named state '{other}'"))),
                };
                psi.to_density()
                    .mix(&DensityMatrix::maximally_mixed(1 << n), v)
            }
            StateSpec::Amplitudes { amplitudes } => {
                let v = ComplexVector::from_iterator(
                    amplitudes.len(),
                    amplitudes.iter().map(|p| c(p[0], p[1])),
                );
                Ok(PureState::new(v)
                    .map_err(|e| at("state.amplitudes", e))?
                    .to_density())
            }
            StateSpec::Density { density } => {
                let m = matrix_from_pairs("state.density", density)?;
                DensityMatrix::new(m).map_err(|e| at("state.density", e))
            }
        }
    }

    /// Explicit description of `s`: density matrix plus one matrix per unit
    /// input.
    pub fn from_strategy(s: &NetworkStrategy, name: Option<String>) -> Self {
        let units = s
            .units()
            .iter()
            .map(|u| UnitSpec {
                parties: u.parties().iter().map(|p| p + 1).collect(),
                observables: ObservablesSpec::List(
                    BitString::all(u.parties().len())
                        .map(|x| ObservableSpec::Matrix(matrix_to_pairs(u.observable(&x).matrix())))
                        .collect(),
                ),
            })
            .collect();
        let one_based = |v: &[usize]| v.iter().map(|p| p + 1).collect::<Vec<_>>();
        let partition = match s.partition() {
            Partition::Honest => PartitionSpec::Honest,
            Partition::Dishonest(d) => PartitionSpec::Dishonest(one_based(d)),
            Partition::Clusters(cs) => {
                PartitionSpec::Clusters(cs.iter().map(|c| one_based(c)).collect())
            }
        };
        Self {
            n_parties: s.n_parties(),
            name,
            preset: None,
            state: Some(StateSpec::Density {
                density: matrix_to_pairs(s.state().matrix()),
            }),
            units,
            partition,
        }
    }
}

fn default_units(spec: &StateSpec, n: usize) -> Result<Vec<Unit>> {
    let ghz = matches!(spec, StateSpec::Named(name) if name.starts_with("ghz") || name.starts_with("noisy-ghz"));
    if !matches!(spec, StateSpec::Named(_)) {
        return Err(invalid("units: required for explicit states"));
    }
    Ok(canonical_observables(n)
        .into_iter()
        .enumerate()
        .map(|(i, o)| {
            let o = if ghz {
                let u = graph_to_ghz_local(i);
                PartyObservables {
                    a0: o.a0.conjugated(&u),
                    a1: o.a1.conjugated(&u),
                }
            } else {
                o
            };
            Unit::party(i, o)
        })
        .collect())
}

fn build_unit(path: &str, spec: &UnitSpec, n: usize) -> Result<Unit> {
    let parties = zero_based(&format!("{path}.parties"), &spec.parties, n)?;
    if parties.is_empty() {
        return Err(invalid(format!("{path}.parties: empty")));
    }
    let m = parties.len();
    let obs_path = format!("{path}.observables");
    let matrices: Vec<ComplexMatrix> = match &spec.observables {
        ObservablesSpec::Pair(name) => {
            if m != 1 {
                return Err(invalid(format!(
                    "{obs_path}: '{name}' names a single-party pair"
                )));
            }
            let pair = match name.as_str() {
                "canonical-1" => canonical_observables(1).remove(0),
                "canonical" => PartyObservables {
                    a0: Observable::pauli_z(),
                    a1: Observable::pauli_x(),
                },
                other => {
                    return Err(invalid(format!(
                        "{obs_path}: unknown observable pair '{other}'"
                    )))
                }
            };
            vec![pair.a0.matrix().clone(), pair.a1.matrix().clone()]
        }
        ObservablesSpec::List(list) => {
            if list.len() != 1 << m {
                return Err(invalid(format!(
                    "{obs_path}: {} parties need {} observables, got {}",
                    m,
                    1 << m,
                    list.len()
                )));
            }
            list.iter()
                .enumerate()
                .map(|(i, o)| {
                    let p = format!("{obs_path}[{i}]");
                    match o {
                        ObservableSpec::Named(name) => named_observable(&p, name, m),
                        ObservableSpec::Matrix(rows) => matrix_from_pairs(&p, rows),
                    }
                })
                .collect::<Result<_>>()?
        }
    };
    let observables = matrices
        .into_iter()
        .enumerate()
        .map(|(i, mat)| binary(&format!("{obs_path}[{i}]"), mat))
        .collect::<Result<Vec<_>>>()?;
    if observables.iter().any(|o| o.dim() != observables[0].dim()) {
        return Err(invalid(format!(
            "{obs_path}: observables act on different dimensions"
        )));
    }
    if m == 1 {
        let mut it = observables.into_iter();
        let (a0, a1) = (it.next().expect("two"), it.next().expect("two"));
        Ok(Unit::party(parties[0], PartyObservables::new(a0, a1)?))
    } else {
        Ok(Unit::coalition(
            CoalitionObservables::from_parts(parties, observables).map_err(|e| at(&obs_path, e))?,
        ))
    }
}

/// Reads and parses a strategy file; errors carry the path and position.
pub fn load_strategy(path: &Path) -> Result<(NetworkStrategy, String)> {
    let text =
        std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    let spec = StrategySpec::from_json(&text).map_err(|e| at(&path.display().to_string(), e))?;
    let s = spec
        .to_strategy()
        .map_err(|e| at(&path.display().to_string(), e))?;
    Ok((s, spec.display_name()))
}

pub const CURVE_HEADER: &str = "s_value,k,assumed_dishonest,bound,bound_clamped,worst_case";

/// CSV with shortest round-trip float formatting, so every bound can be
/// recomputed exactly from its row.
pub fn curve_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.s_value, r.k, r.assumed_dishonest, r.bound, r.bound_clamped, r.worst_case
        ));
    }
    out
}

/// True when a joint unit is present; used to report coalitions.
pub fn has_joint_unit(s: &NetworkStrategy) -> bool {
    s.units()
        .iter()
        .any(|u| matches!(u.measurement(), UnitMeasurement::Coalition(_)))
}
