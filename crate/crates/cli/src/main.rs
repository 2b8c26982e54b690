use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use heisrep::abgroup::AbGroup;
use heisrep::canonrep::CanonicalRep;
use heisrep::harness::{run_verify, Level, VerifyConfig};
use heisrep::heisenberg::HeisGrp;
use heisrep::intertwine::{module_hash, CanonicalSystem};
use heisrep::reduction::ReductionData;
use heisrep::symplectic::{gauss_sum, standard_module, SympMod};
use heisrep::Error;
use serde_json::{json, Value};

const THREADS_VAR: &str = "HEISREP_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "heisrep",
    version,
    about = "Canonical representations of finite odd Heisenberg groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for sampled inputs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Override the enumeration budget.
    #[arg(long, global = true)]
    budget: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the standard module for a spec such as "3^1:1+3^2:1".
    Standard { spec: String },
    /// Order, exponent and primary split of a module.
    Info { input: String },
    /// Enumerate the lagrangians.
    Lagrangians { input: String },
    /// Canonical isotropic subgroup S and M_c = S^⊥/S.
    Reduce { input: String },
    /// The canonical intertwining system on M_c.
    System {
        input: String,
        /// Basepoint: enhanced index 2i is (L_i,+), 2i+1 is (L_i,−).
        #[arg(long, default_value_t = 0)]
        base: usize,
    },
    /// The representation π with matrices for the transvection generators.
    Pi {
        input: String,
        #[arg(long, default_value_t = 0)]
        base: usize,
    },
    /// Gauss sum of a symmetric form given as {"orders": [...], "form": [[...]]}.
    Gauss { input: String },
    /// Run the full property matrix.
    Verify {
        input: String,
        #[arg(long, value_enum, default_value_t = LevelArg::Quick)]
        level: LevelArg,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

enum Failure {
    Usage(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::Budget { .. } => Failure::Usage(format!("{e} (use --budget)")),
            Error::Defect(_) | Error::Inconsistent(_) | Error::Underdetermined(_) => {
                Failure::Verification(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type CmdResult = Result<(Value, bool), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match run(&cli) {
        Ok((value, passed)) => {
            let mut text = serde_json::to_string_pretty(&value).expect("JSON value serializes");
            text.push('\n');
            let written = match &cli.out {
                Some(path) => {
                    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
                }
                None => {
                    use std::io::Write;
                    match std::io::stdout().lock().write_all(text.as_bytes()) {
                        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                            Err(format!("stdout: {e}"))
                        }
                        _ => Ok(()),
                    }
                }
            };
            if let Err(msg) = written {
                eprintln!("error: {msg}");
                return ExitCode::from(2);
            }
            if passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("verification failed");
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("{THREADS_VAR} must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(cli: &Cli) -> CmdResult {
    let budget = cli.budget;
    match &cli.command {
        Command::Standard { spec } => Ok((to_value(&parse_spec(spec)?), true)),
        Command::Info { input } => info(&load_module(input)?),
        Command::Lagrangians { input } => {
            let lags = load_module(input)?.enumerate_lagrangians(budget)?;
            Ok((json!({ "count": lags.len(), "lagrangians": lags }), true))
        }
        Command::Reduce { input } => {
            let red = reduction(&load_module(input)?)?;
            Ok((to_value(&red.export()), true))
        }
        Command::System { input, base } => {
            let m = load_module(input)?;
            let grp = if m.elementary_prime().is_some() {
                HeisGrp::new(m)
            } else {
                reduction(&m)?.hc().clone()
            };
            let mc = grp.base();
            let lags = mc.enumerate_lagrangians(budget)?;
            let lag = lags.get(base / 2).ok_or_else(|| {
                Failure::Usage(format!(
                    "--base {base} is out of range: there are {} enhanced lagrangians",
                    2 * lags.len()
                ))
            })?;
            let (plus, minus) = mc.enhanced_points(lag)?;
            let b0 = if base % 2 == 0 { plus } else { minus };
            let sys = CanonicalSystem::solve(&grp, &b0, budget)?;
            Ok((to_value(&sys.export()), true))
        }
        Command::Pi { input, base } => {
            let m = load_module(input)?;
            let grp = HeisGrp::new(m.clone());
            let pi = CanonicalRep::build(&grp, *base, budget)?;
            Ok((to_value(&pi.export(&m.transvection_generators())), true))
        }
        Command::Gauss { input } => gauss(input),
        Command::Verify { input, level } => {
            let m = load_module(input)?;
            let level = match level {
                LevelArg::Quick => Level::Quick,
                LevelArg::Full => Level::Full,
            };
            let report = run_verify(
                &m,
                &VerifyConfig {
                    level,
                    seed: cli.seed,
                    budget,
                },
            )?;
            let passed = report.passed;
            Ok((to_value(&report), passed))
        }
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("export serializes")
}

fn reduction(m: &SympMod) -> Result<ReductionData, Failure> {
    if m.primes().len() != 1 {
        return Err(Failure::Usage(format!(
            "reduction needs a nonzero p-primary module, but n = {}",
            m.n()
        )));
    }
    Ok(ReductionData::new(&HeisGrp::new(m.clone()))?)
}

/// "p^k:d" or "q:d" blocks joined by '+'; each is d hyperbolic copies of (Z/q)².
fn parse_spec(spec: &str) -> Result<SympMod, Failure> {
    let bad = |part: &str| {
        Failure::Usage(format!(
            "cannot parse block {part:?}; expected p^k:d, e.g. 3^2:1"
        ))
    };
    let mut blocks = Vec::new();
    for part in spec.split('+').map(str::trim) {
        let (q, d) = part.split_once(':').ok_or_else(|| bad(part))?;
        let q = match q.split_once('^') {
            Some((p, k)) => {
                let p: u64 = p.trim().parse().map_err(|_| bad(part))?;
                let k: u32 = k.trim().parse().map_err(|_| bad(part))?;
                p.checked_pow(k).ok_or_else(|| bad(part))?
            }
            None => q.trim().parse().map_err(|_| bad(part))?,
        };
        let d: u64 = d.trim().parse().map_err(|_| bad(part))?;
        blocks.push((q, d));
    }
    Ok(standard_module(&blocks)?)
}

fn read_input(input: &str) -> Result<Option<String>, Failure> {
    let path = Path::new(input);
    if path.is_file() {
        return std::fs::read_to_string(path)
            .map(Some)
            .map_err(|e| Failure::Usage(format!("{input}: {e}")));
    }
    Ok(None)
}

/// A module file, or an inline standard-module spec.
fn load_module(input: &str) -> Result<SympMod, Failure> {
    match read_input(input)? {
        Some(text) => {
            serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{input}: {e}")))
        }
        None if input.contains(':') => parse_spec(input),
        None => Err(Failure::Usage(format!("{input}: no such file"))),
    }
}

fn info(m: &SympMod) -> CmdResult {
    let primary: Vec<Value> = m
        .primes()
        .into_iter()
        .map(|p| {
            let orders: Vec<u64> = m
                .group()
                .orders()
                .iter()
                .map(|&d| {
                    let mut q = 1;
                    let mut d = d;
                    while d % p == 0 {
                        d /= p;
                        q *= p;
                    }
                    q
                })
                .filter(|&q| q > 1)
                .collect();
            json!({ "prime": p, "order": orders.iter().product::<u64>(), "orders": orders })
        })
        .collect();
    Ok((
        json!({
            "order": m.order(),
            "n": m.n(),
            "rank": m.rank(),
            "orders": m.group().orders(),
            "half_order": m.half_order(),
            "primary": primary,
            "elementary_prime": m.elementary_prime(),
            "module_hash": module_hash(m),
            "valid": true,
        }),
        true,
    ))
}

fn gauss(input: &str) -> CmdResult {
    let text = match read_input(input)? {
        Some(t) => t,
        None => input.to_string(),
    };
    let v: Value =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("gauss input: {e}")))?;
    let orders: Vec<u64> = serde_json::from_value(v["orders"].clone())
        .map_err(|e| Failure::Usage(format!("gauss input \"orders\": {e}")))?;
    let form: Vec<Vec<i64>> = serde_json::from_value(v["form"].clone())
        .map_err(|e| Failure::Usage(format!("gauss input \"form\": {e}")))?;
    let l = AbGroup::new(orders)?;
    let g = gauss_sum(&l, &form)?;
    let sq = &g * &g;
    let fourth = &sq * &sq;
    let order_squared = l.order() * l.order();
    let holds = fourth == heisrep::cyclo::CycNum::from_integer(1, order_squared as i64);
    Ok((
        json!({
            "orders": l.orders(),
            "form": form,
            "value": g,
            "fourth_power": fourth,
            "order_squared": order_squared,
            "holds": holds,
        }),
        holds,
    ))
}
