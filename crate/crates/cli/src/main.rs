use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use svetnet_core::bell::{classical_bound_bruteforce, NetworkStrategy, SvetlichnyExpr, Variant};
use svetnet_core::coalition::{best_subvalue_for, decompose, sub_value, Grouping};
use svetnet_core::fidelity::{
    curve_rows, find_f_threshold, AngleGrid, FidelityLine, DEFAULT_F_TOL,
};
use svetnet_core::netprotocol::{
    adversary_preset, fmt12, run_protocol, verdict_explain, Preset, ProtocolConfig,
};
use svetnet_core::selftest::run_selftest;
use svetnet_core::strategy_file::{curve_csv, load_strategy};
use svetnet_core::Error;

const THREADS_ENV: &str = "SVETNET_THREADS";

#[derive(Parser)]
#[command(
    name = "svetnet",
    version,
    about = "Svetlichny-inequality certification toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classical (brute-force confirmed) and quantum bounds of S_N.
    Bounds {
        #[arg(long, short)]
        n: usize,
        #[arg(long, default_value = "plus")]
        variant: Variant,
    },
    /// Exact Svetlichny value of a strategy.
    Value {
        #[command(flatten)]
        strategy: StrategyArgs,
        #[arg(long, default_value = "plus")]
        variant: Variant,
    },
    /// Simulate the certification protocol. Exit 0 certified, 1 not.
    Certify {
        #[command(flatten)]
        strategy: StrategyArgs,
        /// Number of sampled rounds.
        #[arg(long, conflicts_with = "exact")]
        rounds: Option<u64>,
        /// Use exact correlators (default when --rounds is absent).
        #[arg(long)]
        exact: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value = "plus")]
        variant: Variant,
        /// Coalition sizes to report fidelity bounds for (default 1..N-1).
        #[arg(long, value_delimiter = ',')]
        dishonest: Vec<usize>,
    },
    /// Self-testing diagnostics: SOS, stabilizers, isometry, measurements.
    Selftest {
        #[command(flatten)]
        strategy: StrategyArgs,
        /// Write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Numerical fidelity line for k extracted qubits.
    Stopi {
        #[arg(long)]
        k: usize,
        /// Coarse grid points per angle.
        #[arg(long, default_value_t = 25)]
        grid: usize,
        /// Number of local refinements.
        #[arg(long, default_value_t = 2)]
        refinements: usize,
        /// Bisection tolerance on f.
        #[arg(long, default_value_t = DEFAULT_F_TOL)]
        tol: f64,
    },
    /// Sub-inequality labels for a coalition, with values on a strategy.
    Decompose {
        #[arg(long, short)]
        n: Option<usize>,
        /// 1-based coalition members, e.g. 2,3.
        #[arg(long, value_delimiter = ',', required = true)]
        coalition: Vec<usize>,
        #[arg(long, default_value = "plus")]
        variant: Variant,
        #[command(flatten)]
        strategy: OptionalStrategyArgs,
    },
    /// CSV of fidelity lower bounds against the Svetlichny value.
    Curve {
        #[arg(long, short)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Output file (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct StrategyArgs {
    /// Strategy JSON file.
    #[arg(required_unless_present = "preset", conflicts_with = "preset")]
    file: Option<PathBuf>,
    /// Built-in strategy instead of a file, e.g. canonical or noisy-ghz:0.9.
    #[arg(long)]
    preset: Option<String>,
    /// Party count for --preset.
    #[arg(long = "parties", default_value_t = 3)]
    parties: usize,
}

#[derive(Args)]
struct OptionalStrategyArgs {
    /// Strategy JSON file to evaluate the labels on.
    #[arg(long = "strategy", conflicts_with = "preset")]
    file: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
}

impl StrategyArgs {
    fn load(&self) -> Result<(NetworkStrategy, String), Error> {
        load_either(self.file.as_ref(), self.preset.as_deref(), self.parties)
    }
}

fn load_either(
    file: Option<&PathBuf>,
    preset: Option<&str>,
    n: usize,
) -> Result<(NetworkStrategy, String), Error> {
    match (file, preset) {
        (Some(path), _) => load_strategy(path),
        (None, Some(p)) => {
            let preset: Preset = p.parse()?;
            Ok((adversary_preset(&preset, n)?, p.to_string()))
        }
        (None, None) => Err(Error::InvalidArgument("no strategy given".into())),
    }
}

/// Failure of a command: input errors exit 2.
enum Failure {
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn write_json<T: serde::Serialize>(path: &PathBuf, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Input(e.to_string()))?;
    std::fs::write(path, text + "\n")
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| Failure::Input(format!("{THREADS_ENV}: '{raw}' is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Input(format!("{THREADS_ENV}: {e}")))
}

fn run(cli: Cli) -> Result<u8, Failure> {
    configure_threads()?;
    match cli.command {
        Command::Bounds { n, variant } => {
            if !(2..=5).contains(&n) {
                return Err(Failure::Input(format!(
                    "unsupported party count {n}: bounds cover 2 <= N <= 5"
                )));
            }
            let expr = SvetlichnyExpr::new(n, variant)?;
            let classical = classical_bound_bruteforce(n, variant)?;
            println!(
                "classical {}, quantum {}",
                fmt12(classical),
                fmt12(expr.quantum_bound())
            );
            Ok(0)
        }
        Command::Value { strategy, variant } => {
            let (s, name) = strategy.load()?;
            let expr = SvetlichnyExpr::new(s.n_parties(), variant)?;
            let v = s.svetlichny_value(variant)?;
            println!("strategy {name}");
            println!("S_{}{} = {}", s.n_parties(), variant, fmt12(v));
            println!(
                "classical {}, quantum {}",
                fmt12(expr.classical_bound()),
                fmt12(expr.quantum_bound())
            );
            Ok(0)
        }
        Command::Certify {
            strategy,
            rounds,
            exact: _,
            seed,
            report,
            variant,
            dishonest,
        } => {
            let (s, name) = strategy.load()?;
            let mut cfg = ProtocolConfig::new(s, name);
            cfg.variant = variant;
            cfg.seed = seed;
            if let Some(r) = rounds {
                cfg = cfg.sampled(r, seed);
            }
            if !dishonest.is_empty() {
                cfg.assumed_dishonest = dishonest;
            }
            let rep = run_protocol(&cfg)?;
            if let Some(path) = &report {
                write_json(path, &rep)?;
            }
            print!("{}", verdict_explain(&rep));
            Ok(if rep.gme_certified { 0 } else { 1 })
        }
        Command::Selftest { strategy, report } => {
            let (s, name) = strategy.load()?;
            let rep = run_selftest(&s)?;
            if let Some(path) = &report {
                write_json(path, &rep)?;
            }
            println!("strategy {name}");
            println!(
                "n = {}, k = {}, coalition {:?}",
                rep.n_parties, rep.k, rep.coalition
            );
            println!(
                "value {} (quantum {})",
                fmt12(rep.svetlichny_value),
                fmt12(rep.quantum_bound)
            );
            println!("sos residual {}", fmt12(rep.sos_residual));
            let stab: Vec<String> = rep.stabilizer_residuals.iter().map(|&r| fmt12(r)).collect();
            println!("stabilizer residuals {}", stab.join(" "));
            println!(
                "anticommutator residual {}",
                fmt12(rep.anticommutator_residual)
            );
            println!("idempotency residual {}", fmt12(rep.idempotency_residual));
            println!(
                "isometry output norm {}{}",
                fmt12(rep.isometry_raw_norm),
                if rep.degenerate { " (degenerate)" } else { "" }
            );
            println!(
                "ancilla fidelity with graph state {}",
                fmt12(rep.state_fidelity_to_graph)
            );
            println!(
                "ancilla fidelity with GHZ state {}",
                fmt12(rep.state_fidelity_to_ghz)
            );
            println!(
                "max measurement residual {}",
                fmt12(rep.max_measurement_residual)
            );
            if rep.purification_dim > 1 {
                println!(
                    "mixed state purified with a register of dimension {}",
                    rep.purification_dim
                );
            }
            Ok(0)
        }
        Command::Stopi {
            k,
            grid,
            refinements,
            tol,
        } => {
            let analytic = FidelityLine::analytic(k)?;
            let grid = AngleGrid::new(grid, refinements, AngleGrid::default().factor)?;
            let res = find_f_threshold(k, &grid, tol)?;
            let dev = (res.line.f - analytic.f).abs() / analytic.f;
            println!("k = {k}");
            println!("f = {}, mu = {}", fmt12(res.line.f), fmt12(res.line.mu));
            println!(
                "analytic f = {}, mu = {}, relative deviation {}",
                fmt12(analytic.f),
                fmt12(analytic.mu),
                fmt12(dev)
            );
            let angles: Vec<String> = res.minimizer.iter().map(|&a| fmt12(a)).collect();
            println!(
                "grid minimum {} at angles {}",
                fmt12(res.grid_minimum),
                angles.join(" ")
            );
            Ok(0)
        }
        Command::Decompose {
            n,
            coalition,
            variant,
            strategy,
        } => {
            let loaded = match (&strategy.file, &strategy.preset) {
                (None, None) => None,
                (file, preset) => Some(load_either(
                    file.as_ref(),
                    preset.as_deref(),
                    n.unwrap_or(3),
                )?),
            };
            let n = match (&loaded, n) {
                (Some((s, _)), Some(n)) if s.n_parties() != n => {
                    return Err(Failure::Input(format!(
                        "--n {n} disagrees with the strategy's {} parties",
                        s.n_parties()
                    )))
                }
                (Some((s, _)), _) => s.n_parties(),
                (None, Some(n)) => n,
                (None, None) => return Err(Failure::Input("give --n or a strategy".into())),
            };
            let members = coalition
                .iter()
                .map(|&p| {
                    if p == 0 || p > n {
                        Err(Failure::Input(format!(
                            "coalition member {p} outside 1..={n}"
                        )))
                    } else {
                        Ok(p - 1)
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            let g = Grouping::coalition(n, &members)?;
            let expr = SvetlichnyExpr::new(n, variant)?;
            let labels = decompose(&expr, &g)?;
            println!("N = {n}, k = {}, coalition {:?}", g.k(), coalition);
            let corr = loaded.as_ref().map(|(s, _)| s.correlators());
            for l in &labels {
                let sign = if l.sign > 0 { "+" } else { "-" };
                match &corr {
                    Some(c) => println!(
                        "{sign} S_{}{} fixed {}  value {}",
                        g.k(),
                        l.variant,
                        l.fixed,
                        fmt12(sub_value(&g, l, |x| c[x.index()]))
                    ),
                    None => println!("{sign} S_{}{} fixed {}", g.k(), l.variant, l.fixed),
                }
            }
            if let Some((s, name)) = &loaded {
                let (best, v) = best_subvalue_for(s, &g, variant)?;
                let total = s.svetlichny_value(variant)?;
                println!("strategy {name}: s = {}", fmt12(total));
                println!(
                    "best |sub-value| {} (fixed {}), lower limit s/2^(N-k) = {}",
                    fmt12(v),
                    best.fixed,
                    fmt12(total / labels.len() as f64)
                );
            }
            Ok(0)
        }
        Command::Curve { n, samples, out } => {
            let rows = curve_rows(n, samples)?;
            let csv = curve_csv(&rows);
            match out {
                Some(path) => std::fs::write(&path, csv)
                    .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?,
                None => print!("{csv}"),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
