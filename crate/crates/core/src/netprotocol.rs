//! IID simulation of the verifier-driven certification protocol.
//!
//! Each round the verifier draws a uniformly random input string, delivers
//! one bit to every party and collects the outputs. Private channels are
//! in-process function calls. The same strategy is reused in every round.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bell::{
    behavior_from_strategy, canonical_observables, canonical_strategy, classical_optimum,
    BitString, NetworkStrategy, Observable, Partition, PartyObservables, SvetlichnyExpr, Unit,
    Variant,
};
use crate::coalition::{CoalitionObservables, Grouping};
use crate::error::{invalid, Error, Result};
use crate::fidelity::{network_bound, network_bound_unclamped, FidelityLine};
use crate::quantum::{
    ghz_state, graph_state_complete, graph_to_ghz_local, identity, kron_all, DensityMatrix,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum SamplingMode {
    Exact,
    Sampled { rounds: u64 },
}

#[derive(Debug, Clone)]
pub struct ProtocolConfig {
    pub strategy: NetworkStrategy,
    pub strategy_name: String,
    pub mode: SamplingMode,
    pub seed: u64,
    /// Coalition sizes `|D|` to report fidelity bounds for.
    pub assumed_dishonest: Vec<usize>,
    pub variant: Variant,
}

impl ProtocolConfig {
    /// Exact mode, seed 0, bounds for every `|D|` in `1..N`.
    pub fn new(strategy: NetworkStrategy, strategy_name: impl Into<String>) -> Self {
        let n = strategy.n_parties();
        Self {
            strategy,
            strategy_name: strategy_name.into(),
            mode: SamplingMode::Exact,
            seed: 0,
            assumed_dishonest: (1..n.max(2)).collect(),
            variant: Variant::Plus,
        }
    }

    pub fn sampled(mut self, rounds: u64, seed: u64) -> Self {
        self.mode = SamplingMode::Sampled { rounds };
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        let n = self.strategy.n_parties();
        if n < 2 {
            return Err(invalid("the protocol needs at least two parties"));
        }
        if let SamplingMode::Sampled { rounds } = self.mode {
            if rounds == 0 {
                return Err(invalid("sampled mode needs at least one round"));
            }
        }
        if let Some(&d) = self.assumed_dishonest.iter().find(|&&d| d == 0 || d >= n) {
            return Err(invalid(format!(
                "assumed coalition size {d} outside 1..{}",
                n - 1
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputEstimate {
    pub input: String,
    /// Rounds in which this input was drawn; absent in exact mode.
    pub rounds: Option<u64>,
    pub correlator: f64,
    pub stderr: Option<f64>,
    pub sampled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityEntry {
    pub assumed_dishonest: usize,
    pub k: usize,
    pub f: Option<f64>,
    pub mu: Option<f64>,
    /// Clamped at 0; absent when no line is stored for `k`.
    pub bound: Option<f64>,
    pub unclamped: Option<f64>,
    pub certifying: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstCase {
    pub bound: f64,
    pub k: usize,
    pub assumed_dishonest: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolReport {
    pub strategy: String,
    pub n_parties: usize,
    pub variant: Variant,
    #[serde(flatten)]
    pub mode: SamplingMode,
    pub seed: u64,
    pub inputs: Vec<InputEstimate>,
    pub unsampled_inputs: Vec<String>,
    pub s_hat: f64,
    pub s_stderr: Option<f64>,
    pub classical_bound: f64,
    pub quantum_bound: f64,
    pub gme_certified: bool,
    pub fidelity_bounds: Vec<FidelityEntry>,
    pub worst_case: Option<WorstCase>,
    pub statistics: &'static str,
}

/// Runs the protocol. Exact mode uses Born-rule correlators; sampled mode
/// draws `(x, a)` pairs with one `ChaCha8` stream per round index, so the
/// result does not depend on thread scheduling.
pub fn run_protocol(cfg: &ProtocolConfig) -> Result<ProtocolReport> {
    cfg.validate()?;
    let s = &cfg.strategy;
    let n = s.n_parties();
    let expr = SvetlichnyExpr::new(n, cfg.variant)?;
    let behavior = behavior_from_strategy(s)?;
    let n_inputs = 1usize << n;

    let inputs: Vec<InputEstimate> = match cfg.mode {
        SamplingMode::Exact => (0..n_inputs)
            .map(|x| InputEstimate {
                input: BitString::from_index(x, n).to_string(),
                rounds: None,
                correlator: behavior.correlator_at(x),
                stderr: Some(0.0),
                sampled: true,
            })
            .collect(),
        SamplingMode::Sampled { rounds } => {
            let cumulative: Vec<Vec<f64>> = (0..n_inputs)
                .map(|x| {
                    let mut acc = 0.0;
                    behavior
                        .row(x)
                        .iter()
                        .map(|p| {
                            acc += p;
                            acc
                        })
                        .collect()
                })
                .collect();
            let zero = || (vec![0u64; n_inputs], vec![0i64; n_inputs]);
            let (counts, sums) = (0..rounds)
                .into_par_iter()
                .fold(zero, |(mut counts, mut sums), r| {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    rng.set_stream(r);
                    let x = rng.random_range(0..n_inputs);
                    let u: f64 = rng.random();
                    let row = &cumulative[x];
                    let a = row.iter().position(|&cum| u < cum).unwrap_or(row.len() - 1);
                    counts[x] += 1;
                    sums[x] += if a.count_ones() % 2 == 0 { 1 } else { -1 };
                    (counts, sums)
                })
                .reduce(zero, |(mut c1, mut s1), (c2, s2)| {
                    for i in 0..n_inputs {
                        c1[i] += c2[i];
                        s1[i] += s2[i];
                    }
                    (c1, s1)
                });
            (0..n_inputs)
                .map(|x| {
                    let m = counts[x];
                    let input = BitString::from_index(x, n).to_string();
                    if m == 0 {
                        return InputEstimate {
                            input,
                            rounds: Some(0),
                            correlator: 0.0,
                            stderr: None,
                            sampled: false,
                        };
                    }
                    let e = sums[x] as f64 / m as f64;
                    InputEstimate {
                        input,
                        rounds: Some(m),
                        correlator: e,
                        stderr: Some(((1.0 - e * e).max(0.0) / m as f64).sqrt()),
                        sampled: true,
                    }
                })
                .collect()
        }
    };

    let s_hat = expr.evaluate(|x| inputs[x.index()].correlator);
    let unsampled: Vec<String> = inputs
        .iter()
        .filter(|i| !i.sampled)
        .map(|i| i.input.clone())
        .collect();
    let s_stderr = if unsampled.is_empty() {
        Some(
            inputs
                .iter()
                .map(|i| i.stderr.unwrap_or(0.0).powi(2))
                .sum::<f64>()
                .sqrt(),
        )
    } else {
        None
    };
    let classical = expr.classical_bound();
    let gme_certified = unsampled.is_empty() && s_hat > classical;

    let mut fidelity_bounds = Vec::new();
    for &d in &cfg.assumed_dishonest {
        let k = n - d + 1;
        let entry = match FidelityLine::analytic(k) {
            Ok(line) => FidelityEntry {
                assumed_dishonest: d,
                k,
                f: Some(line.f),
                mu: Some(line.mu),
                bound: Some(network_bound(s_hat, n, k)?),
                unclamped: Some(network_bound_unclamped(s_hat, n, k)?),
                certifying: gme_certified,
            },
            Err(Error::Unsupported(_)) => FidelityEntry {
                assumed_dishonest: d,
                k,
                f: None,
                mu: None,
                bound: None,
                unclamped: None,
                certifying: false,
            },
            Err(e) => return Err(e),
        };
        fidelity_bounds.push(entry);
    }
    let worst_case = fidelity_bounds
        .iter()
        .filter_map(|e| e.bound.map(|b| (b, e.k, e.assumed_dishonest)))
        .reduce(|a, b| {
            if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
                b
            } else {
                a
            }
        })
        .map(|(bound, k, assumed_dishonest)| WorstCase {
            bound,
            k,
            assumed_dishonest,
        });

    Ok(ProtocolReport {
        strategy: cfg.strategy_name.clone(),
        n_parties: n,
        variant: cfg.variant,
        mode: cfg.mode,
        seed: cfg.seed,
        inputs,
        unsampled_inputs: unsampled,
        s_hat,
        s_stderr,
        classical_bound: classical,
        quantum_bound: expr.quantum_bound(),
        gme_certified,
        fidelity_bounds,
        worst_case,
        statistics: "iid-asymptotic plug-in estimate with binomial standard errors",
    })
}

/// Human-readable verdict, one line per assumed coalition size.
pub fn verdict_explain(report: &ProtocolReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "s = {} (classical {}, quantum {})",
        fmt12(report.s_hat),
        fmt12(report.classical_bound),
        fmt12(report.quantum_bound)
    );
    if !report.unsampled_inputs.is_empty() {
        let _ = writeln!(
            out,
            "unsampled inputs: {}",
            report.unsampled_inputs.join(" ")
        );
    }
    let _ = writeln!(
        out,
        "genuine multipartite entanglement: {}",
        if report.gme_certified {
            "certified"
        } else {
            "not certified"
        }
    );
    for e in &report.fidelity_bounds {
        match (e.f, e.mu, e.bound) {
            (Some(f), Some(mu), Some(b)) => {
                let _ = writeln!(
                    out,
                    "|D| = {}: k = {}, f = {}, mu = {}, bound = {}{}",
                    e.assumed_dishonest,
                    e.k,
                    fmt12(f),
                    fmt12(mu),
                    fmt12(b),
                    if e.certifying {
                        ""
                    } else {
                        " (non-certifying)"
                    }
                );
            }
            _ => {
                let _ = writeln!(
                    out,
                    "|D| = {}: k = {}, no fidelity line available",
                    e.assumed_dishonest, e.k
                );
            }
        }
    }
    if let Some(w) = &report.worst_case {
        let _ = writeln!(
            out,
            "worst case: {} (k = {}, |D| = {})",
            fmt12(w.bound),
            w.k,
            w.assumed_dishonest
        );
    }
    out
}

/// 12 significant digits, trailing zeros removed.
pub fn fmt12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{:.*e}", 11, x);
    let (mant, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let fixed = format!("{:.*}", decimals, x);
        if fixed.contains('.') {
            fixed
                .trim_end_matches('0')
                .trim_end_matches('.')
                .to_string()
        } else {
            fixed
        }
    } else {
        let mant = mant.trim_end_matches('0').trim_end_matches('.');
        format!("{mant}e{exp}")
    }
}

/// Named strategies used by tests and the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum Preset {
    Canonical,
    ClassicalOptimal,
    /// True GHZ state with white noise, measured with the canonical
    /// observables rotated by the graph-to-GHZ local unitary.
    NoisyGhz(f64),
    /// Complete-graph state with white noise and canonical observables.
    NoisyGraph(f64),
    /// Parties (0-based) forming a classical coalition.
    CoalitionClassical(Vec<usize>),
    /// Canonical strategy grouped into clusters (0-based parties).
    ClusterCanonical(Vec<Vec<usize>>),
    /// Cluster sizes, consecutive parties per cluster.
    ClusterSizes(Vec<usize>),
}

fn parse_party_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| {
            let p: usize = t
                .trim()
                .parse()
                .map_err(|_| invalid(format!("'{t}' is not a party index")))?;
            if p == 0 {
                return Err(invalid("parties are numbered from 1"));
            }
            Ok(p - 1)
        })
        .collect()
}

impl FromStr for Preset {
    type Err = Error;

    /// `canonical`, `classical-optimal`, `noisy-ghz:V`, `noisy-graph:V`,
    /// `coalition-classical:3,4`, `cluster-canonical:1,2|3,4` or
    /// `cluster-canonical:2,2` (sizes). Parties are 1-based.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        let need = |what: &str| arg.ok_or_else(|| invalid(format!("preset '{name}' needs {what}")));
        let visibility = |v: &str| -> Result<f64> {
            let v: f64 = v
                .parse()
                .map_err(|_| invalid(format!("'{v}' is not a number")))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid("visibility must lie in [0, 1]"));
            }
            Ok(v)
        };
        match name {
            "canonical" => Ok(Preset::Canonical),
            "classical-optimal" => Ok(Preset::ClassicalOptimal),
            "noisy-ghz" => Ok(Preset::NoisyGhz(visibility(need("a visibility")?)?)),
            "noisy-graph" => Ok(Preset::NoisyGraph(visibility(need("a visibility")?)?)),
            "coalition-classical" => Ok(Preset::CoalitionClassical(parse_party_list(need(
                "a party list",
            )?)?)),
            "cluster-canonical" => {
                let arg = need("a partition")?;
                if arg.contains('|') {
                    Ok(Preset::ClusterCanonical(
                        arg.split('|')
                            .map(parse_party_list)
                            .collect::<Result<_>>()?,
                    ))
                } else {
                    let sizes = arg
                        .split(',')
                        .map(|t| {
                            t.trim()
                                .parse::<usize>()
                                .map_err(|_| invalid(format!("'{t}' is not a size")))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    Ok(Preset::ClusterSizes(sizes))
                }
            }
            other => Err(invalid(format!("unknown preset '{other}'"))),
        }
    }
}

/// Builds the strategy named by `preset` for `n` parties.
pub fn adversary_preset(preset: &Preset, n: usize) -> Result<NetworkStrategy> {
    if n < 2 {
        return Err(invalid("presets need at least two parties"));
    }
    match preset {
        Preset::Canonical => canonical_strategy(n),
        Preset::ClassicalOptimal => classical_optimal_strategy(n),
        Preset::NoisyGraph(v) => {
            let s = canonical_strategy(n)?;
            let noisy = s
                .state()
                .mix(&DensityMatrix::maximally_mixed(s.state().dim()), *v)?;
            s.with_state(noisy)
        }
        Preset::NoisyGhz(v) => noisy_ghz_strategy(n, *v),
        Preset::CoalitionClassical(d) => coalition_classical_strategy(n, d),
        Preset::ClusterCanonical(clusters) => {
            canonical_strategy(n)?.regroup(&Grouping::new(n, clusters.clone())?)
        }
        Preset::ClusterSizes(sizes) => {
            let mut clusters = Vec::new();
            let mut next = 0;
            for &size in sizes {
                if size == 0 {
                    return Err(invalid("cluster sizes must be positive"));
                }
                clusters.push((next..next + size).collect());
                next += size;
            }
            if next != n {
                return Err(invalid(format!(
                    "cluster sizes add up to {next}, expected {n}"
                )));
            }
            canonical_strategy(n)?.regroup(&Grouping::new(n, clusters)?)
        }
    }
}

fn scalar_observable(sign: i8) -> Observable {
    Observable::new_unchecked(identity(1).scale(sign as f64))
}

/// The optimal hybrid-local assignment as two signalling blocks with
/// trivial (one-dimensional) systems.
fn classical_optimal_strategy(n: usize) -> Result<NetworkStrategy> {
    let a = classical_optimum(n, Variant::Plus)?;
    let block = CoalitionObservables::from_parts(
        a.block.clone(),
        a.f_block.iter().map(|&s| scalar_observable(s)).collect(),
    )?;
    let rest = CoalitionObservables::from_parts(
        a.rest.clone(),
        a.f_rest.iter().map(|&s| scalar_observable(s)).collect(),
    )?;
    let state = DensityMatrix::new(identity(1))?;
    NetworkStrategy::new(
        state,
        vec![Unit::coalition(block), Unit::coalition(rest)],
        Partition::Clusters(vec![a.block, a.rest]),
    )
}

fn noisy_ghz_strategy(n: usize, v: f64) -> Result<NetworkStrategy> {
    let ghz = ghz_state(n)?.to_density();
    let state = ghz.mix(&DensityMatrix::maximally_mixed(ghz.dim()), v)?;
    let units = canonical_observables(n)
        .into_iter()
        .enumerate()
        .map(|(i, obs)| {
            let u = graph_to_ghz_local(i);
            Unit::party(
                i,
                PartyObservables {
                    a0: obs.a0.conjugated(&u),
                    a1: obs.a1.conjugated(&u),
                },
            )
        })
        .collect();
    NetworkStrategy::new(state, units, Partition::Honest)
}

/// Honest parties share the complete-graph state and measure canonically;
/// the coalition holds no quantum system and answers with the best
/// deterministic function of its inputs.
fn coalition_classical_strategy(n: usize, coalition: &[usize]) -> Result<NetworkStrategy> {
    let mut d = coalition.to_vec();
    d.sort_unstable();
    d.dedup();
    if d.is_empty() || d.len() >= n || d.iter().any(|&p| p >= n) {
        return Err(invalid(
            "the coalition must be a non-empty proper subset of the parties",
        ));
    }
    let honest: Vec<usize> = (0..n).filter(|p| !d.contains(p)).collect();
    let h = honest.len();
    let psi = graph_state_complete(h)?;
    let obs = canonical_observables(h);
    let e_h: Vec<f64> = BitString::all(h)
        .map(|x| {
            let ops = (0..h).map(|i| obs[i].get(x.bit(i)).matrix());
            psi.expectation(&kron_all(ops)).re
        })
        .collect();
    let f: Vec<i8> = BitString::all(d.len())
        .map(|xd| {
            let inner: f64 = BitString::all(h)
                .map(|xh| {
                    let mut bits = vec![0u8; n];
                    for (i, &p) in honest.iter().enumerate() {
                        bits[p] = xh.bit(i);
                    }
                    for (i, &p) in d.iter().enumerate() {
                        bits[p] = xd.bit(i);
                    }
                    let w = bits.iter().filter(|&&b| b == 1).count();
                    Variant::Plus.sign_for_weight(w) as f64 * e_h[xh.index()]
                })
                .sum();
            if inner >= 0.0 {
                1
            } else {
                -1
            }
        })
        .collect();
    let mut units: Vec<Unit> = honest
        .iter()
        .zip(obs)
        .map(|(&p, o)| Unit::party(p, o))
        .collect();
    units.push(Unit::coalition(CoalitionObservables::from_parts(
        d.clone(),
        f.into_iter().map(scalar_observable).collect(),
    )?));
    let state = DensityMatrix::new(psi.to_density().matrix().clone())?;
    NetworkStrategy::new(state, units, Partition::Dishonest(d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coalition::best_subvalue;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    fn exact(preset: &str, n: usize) -> ProtocolReport {
        let p: Preset = preset.parse().unwrap();
        run_protocol(&ProtocolConfig::new(
            adversary_preset(&p, n).unwrap(),
            preset,
        ))
        .unwrap()
    }

    #[test]
    fn exact_mode_examples() {
        let r = exact("canonical", 3);
        assert!((r.s_hat - 4.0 * SQRT2).abs() < 1e-12);
        assert!(r.gme_certified);
        assert_eq!(r.inputs.len(), 8);
        let w = r.worst_case.unwrap();
        assert!((w.bound - 1.0).abs() < 1e-12);

        let r = exact("classical-optimal", 3);
        assert_eq!(r.s_hat, 4.0);
        assert!(!r.gme_certified);
        assert!(r.fidelity_bounds.iter().all(|e| !e.certifying));
    }

    #[test]
    fn exact_mode_matches_bell_value() {
        let mut rng = <ChaCha8Rng as SeedableRng>::seed_from_u64(3);
        for n in 2..=4 {
            let s = crate::random::random_qubit_strategy(n, &mut rng);
            let v = s.svetlichny_value(Variant::Plus).unwrap();
            let r = run_protocol(&ProtocolConfig::new(s, "random")).unwrap();
            assert!((r.s_hat - v).abs() < 1e-12);
        }
    }

    #[test]
    fn noisy_presets_scale_linearly() {
        for v in [1.0, 0.8, 0.5] {
            for name in ["noisy-ghz", "noisy-graph"] {
                let r = exact(&format!("{name}:{v}"), 3);
                assert!(
                    (r.s_hat - v * 4.0 * SQRT2).abs() < 1e-9,
                    "{name}:{v} -> {}",
                    r.s_hat
                );
            }
        }
    }

    #[test]
    fn coalition_classical_is_not_certified() {
        for n in 3..=4 {
            for size in 1..n - 1 {
                let d: Vec<String> = (n - size + 1..=n).map(|p| p.to_string()).collect();
                let r = exact(&format!("coalition-classical:{}", d.join(",")), n);
                assert!(
                    r.s_hat <= r.classical_bound + 1e-9,
                    "n={n} size={size}: {}",
                    r.s_hat
                );
                assert!(!r.gme_certified);
            }
        }
    }

    #[test]
    fn cluster_canonical_preset() {
        let s = adversary_preset(&"cluster-canonical:2,2".parse().unwrap(), 4).unwrap();
        assert_eq!(s.units().len(), 2);
        let g = Grouping::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let (_, best) = best_subvalue(&s, &g).unwrap();
        assert!((best - 2.0 * SQRT2).abs() < 1e-9);
        let same = adversary_preset(&"cluster-canonical:1,2|3,4".parse().unwrap(), 4).unwrap();
        assert_eq!(s, same);
        assert!(adversary_preset(&"cluster-canonical:2,1".parse().unwrap(), 4).is_err());
    }

    #[test]
    fn unknown_preset() {
        assert!("quantum-magic".parse::<Preset>().is_err());
        assert!("noisy-ghz".parse::<Preset>().is_err());
        assert!("noisy-ghz:1.5".parse::<Preset>().is_err());
    }

    #[test]
    fn sampled_mode_is_reproducible_and_close() {
        let s = canonical_strategy(3).unwrap();
        let cfg = ProtocolConfig::new(s, "canonical").sampled(20_000, 42);
        let a = run_protocol(&cfg).unwrap();
        let b = run_protocol(&cfg).unwrap();
        assert_eq!(a, b);
        let se = a.s_stderr.unwrap();
        assert!((a.s_hat - 4.0 * SQRT2).abs() < 4.0 * se);
        for i in &a.inputs {
            assert!(i.correlator.abs() <= 1.0);
        }
        let total: u64 = a.inputs.iter().map(|i| i.rounds.unwrap()).sum();
        assert_eq!(total, 20_000);
    }

    #[test]
    fn too_few_rounds_flag_cells() {
        let cfg = ProtocolConfig::new(canonical_strategy(4).unwrap(), "canonical").sampled(3, 1);
        let r = run_protocol(&cfg).unwrap();
        assert!(!r.unsampled_inputs.is_empty());
        assert!(r.s_stderr.is_none());
        assert!(!r.gme_certified);
        let bad = ProtocolConfig::new(canonical_strategy(3).unwrap(), "canonical").sampled(0, 1);
        assert!(run_protocol(&bad).is_err());
    }

    #[test]
    fn verdict_text() {
        let r = exact("canonical", 4);
        let t = verdict_explain(&r);
        assert!(t.contains("certified"));
        assert!(t.contains("|D| = 3: k = 2"));
        assert!(t.contains("worst case: 1"));

        let mut r = exact("canonical", 4);
        r.s_hat = 11.0;
        let recomputed: Vec<f64> = (2..=4)
            .map(|k| network_bound(11.0, 4, k).unwrap())
            .collect();
        assert!(recomputed.iter().all(|b| *b > 0.0 && *b < 1.0));
    }

    #[test]
    fn twelve_digit_formatting() {
        assert_eq!(fmt12(4.0), "4");
        assert_eq!(fmt12(4.0 * SQRT2), "5.65685424949");
        assert_eq!(fmt12(2.0 * SQRT2), "2.82842712475");
        assert_eq!(fmt12(-0.5), "-0.5");
        assert_eq!(fmt12(1.5e-9), "1.5e-9");
    }
}
