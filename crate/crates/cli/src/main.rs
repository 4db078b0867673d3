mod cache;
mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use mldlab_core::screen::FCase;
use mldlab_core::{Error, HyperquotientType, MonomialSupport, QuotientType, Rational};
use serde_json::{json, Value};

use cache::{Cache, Entry};
use report::{render, Format, Report};

const EXIT_ANOMALIES: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "mld-gap-lab", version, about = "Exact mld computations, lemma checks and exclusion replays for quotient and hyperquotient singularities")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Worker threads (defaults to the available parallelism)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Result cache directory for scans
    #[arg(long, global = true, env = "MLDLAB_CACHE")]
    cache: Option<PathBuf>,
    #[arg(long, global = true)]
    no_cache: bool,
}

/// Inclusive range `a..b`, `a..=b` or a single value.
#[derive(Clone, Copy, Debug)]
struct RRange(u64, u64);

impl FromStr for RRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("invalid range `{s}`, expected a..b");
        let num = |t: &str| t.trim().parse::<u64>().map_err(|_| bad());
        match s.split_once("..") {
            Some((a, b)) => Ok(RRange(num(a)?, num(b.strip_prefix('=').unwrap_or(b))?)),
            None => {
                let n = num(s)?;
                Ok(RRange(n, n))
            }
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// mld of a cyclic quotient singularity, e.g. `1/13(3,4,5)`
    Mld { r#type: QuotientType },
    /// Isolated 3-fold quotients with threshold < mld < 1
    Scan3 {
        #[arg(long)]
        r_max: u64,
        #[arg(long)]
        threshold: Rational,
    },
    /// Small 5-dim quotients with threshold < mld < 2
    Scan5 {
        #[arg(long)]
        r_max: u64,
        #[arg(long)]
        threshold: Rational,
    },
    /// Non-canonical lemma at one instance, e.g. `(13;3,4,7,0;0) --k0 10`
    NcCheck {
        r#type: HyperquotientType,
        #[arg(long)]
        k0: u64,
        /// Do not require one of the star conditions
        #[arg(long)]
        no_star: bool,
    },
    /// All non-canonical lemma instances up to r_max
    NcScan {
        #[arg(long)]
        r_max: u64,
        #[arg(long)]
        no_star: bool,
    },
    /// Terminal lemma hypothesis and pairing for one tuple
    TerminalCheck { r#type: HyperquotientType },
    /// Exhaustive terminal lemma check for r_min <= r <= r_max
    TerminalVerify {
        #[arg(long, default_value_t = 2)]
        r_min: u64,
        #[arg(long)]
        r_max: u64,
    },
    /// Normal form of a support such as `xy+z^3+t^2`
    Classify {
        support: MonomialSupport,
        /// Also apply the weight conditions of this type
        #[arg(long = "type")]
        r#type: Option<HyperquotientType>,
    },
    /// Finite screen of the extremely non-canonical condition
    Screen {
        r#type: HyperquotientType,
        support: MonomialSupport,
        #[arg(long, default_value = "1/19")]
        delta: Rational,
        #[arg(long, default_value_t = 2)]
        bound: u64,
    },
    /// Case exclusion for one candidate type
    Exclude {
        r#type: HyperquotientType,
        #[arg(long)]
        case: FCase,
        #[arg(long, default_value = "1/19")]
        delta: Rational,
        #[arg(long, default_value_t = 12)]
        degree_bound: u32,
    },
    /// Case exclusion for every candidate family over a range of r
    Replay {
        #[arg(long)]
        r: RRange,
        #[arg(long, default_value = "1/19")]
        delta: Rational,
        #[arg(long, default_value_t = 12)]
        degree_bound: u32,
    },
    /// Closed-form mld against lattice enumeration on every class
    OracleDiff {
        #[arg(long)]
        r_max: u64,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        depth: u64,
    },
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Mld { .. } => "mld",
            Cmd::Scan3 { .. } => "scan3",
            Cmd::Scan5 { .. } => "scan5",
            Cmd::NcCheck { .. } => "nc-check",
            Cmd::NcScan { .. } => "nc-scan",
            Cmd::TerminalCheck { .. } => "terminal-check",
            Cmd::TerminalVerify { .. } => "terminal-verify",
            Cmd::Classify { .. } => "classify",
            Cmd::Screen { .. } => "screen",
            Cmd::Exclude { .. } => "exclude",
            Cmd::Replay { .. } => "replay",
            Cmd::OracleDiff { .. } => "oracle-diff",
        }
    }

    fn cacheable(&self) -> bool {
        matches!(
            self,
            Cmd::Scan3 { .. }
                | Cmd::Scan5 { .. }
                | Cmd::NcScan { .. }
                | Cmd::TerminalVerify { .. }
                | Cmd::Replay { .. }
                | Cmd::OracleDiff { .. }
        )
    }

    fn params(&self) -> Value {
        match self {
            Cmd::Mld { r#type } => json!({"type": r#type}),
            Cmd::Scan3 { r_max, threshold } | Cmd::Scan5 { r_max, threshold } => {
                json!({"r_max": r_max, "threshold": threshold})
            }
            Cmd::NcCheck { r#type, k0, no_star } => {
                json!({"type": r#type, "k0": k0, "require_star": !no_star})
            }
            Cmd::NcScan { r_max, no_star } => json!({"r_max": r_max, "require_star": !no_star}),
            Cmd::TerminalCheck { r#type } => json!({"type": r#type}),
            Cmd::TerminalVerify { r_min, r_max } => json!({"r_min": r_min, "r_max": r_max}),
            Cmd::Classify { support, r#type } => json!({"support": support, "type": r#type}),
            Cmd::Screen { r#type, support, delta, bound } => {
                json!({"type": r#type, "support": support, "delta": delta, "bound": bound})
            }
            Cmd::Exclude { r#type, case, delta, degree_bound } => {
                json!({"type": r#type, "case": case, "delta": delta, "degree_bound": degree_bound})
            }
            Cmd::Replay { r, delta, degree_bound } => {
                json!({"r_min": r.0, "r_max": r.1, "delta": delta, "degree_bound": degree_bound})
            }
            Cmd::OracleDiff { r_max, dim, depth } => {
                json!({"r_max": r_max, "dim": dim, "depth": depth})
            }
        }
    }

    fn run(&self, jobs: usize) -> Result<Report, Error> {
        match self {
            Cmd::Mld { r#type } => Ok(commands::mld(r#type)),
            Cmd::Scan3 { r_max, threshold } => commands::scan3(*r_max, threshold, jobs),
            Cmd::Scan5 { r_max, threshold } => commands::scan5(*r_max, threshold, jobs),
            Cmd::NcCheck { r#type, k0, no_star } => commands::nc_check(r#type, *k0, !no_star),
            Cmd::NcScan { r_max, no_star } => commands::nc_scan(*r_max, !no_star, jobs),
            Cmd::TerminalCheck { r#type } => Ok(commands::terminal_check(r#type)),
            Cmd::TerminalVerify { r_min, r_max } => commands::terminal_verify(*r_min, *r_max, jobs),
            Cmd::Classify { support, r#type } => commands::classify(support, r#type.as_ref()),
            Cmd::Screen { r#type, support, delta, bound } => {
                commands::screen(r#type, support, delta, *bound)
            }
            Cmd::Exclude { r#type, case, delta, degree_bound } => {
                commands::exclude(r#type, *case, delta, *degree_bound)
            }
            Cmd::Replay { r, delta, degree_bound } => {
                commands::replay(r.0, r.1, delta, *degree_bound, jobs)
            }
            Cmd::OracleDiff { r_max, dim, depth } => commands::oracle(*r_max, *dim, *depth, jobs),
        }
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), std::io::Error> {
    match out {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let jobs = cli
        .common
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let name = cli.cmd.name();
    let mut config = json!({"subcommand": name});
    let obj = config.as_object_mut().unwrap();
    if let Value::Object(params) = cli.cmd.params() {
        obj.extend(params);
    }
    obj.insert("format".into(), json!(cli.common.format));

    let cache = match (&cli.common.cache, cli.common.no_cache, cli.cmd.cacheable()) {
        (Some(dir), false, true) => Some(Cache::new(dir)),
        _ => None,
    };
    let key = cache::key(name, &config);

    let entry = match cache.as_ref().and_then(|c| c.get(&key)) {
        Some(hit) => {
            eprintln!("cache hit {}", cache.as_ref().unwrap().dir().join(&key).display());
            hit
        }
        None => {
            let report = match cli.cmd.run(jobs) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_INPUT);
                }
            };
            let exit = if report.anomalies > 0 { EXIT_ANOMALIES } else { 0 };
            let entry = Entry {
                output: render(&report, &config, cli.common.format),
                exit: exit as i32,
            };
            if let Some(c) = &cache {
                if let Err(e) = c.put(&key, &entry) {
                    eprintln!("error: cannot write cache in {}: {e}", c.dir().display());
                    return ExitCode::from(EXIT_IO);
                }
            }
            entry
        }
    };
    if let Err(e) = emit(cli.common.out.as_ref(), &entry.output) {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(EXIT_IO);
    }
    eprintln!("wall time {:.3}s", start.elapsed().as_secs_f64());
    ExitCode::from(entry.exit as u8)
}
