//! Thin command-line front end: describe a configuration, run verification
//! suites, or dump a named element.

use clap::Parser;
use std::process::ExitCode;
use std::sync::Arc;
use walgebra::combin::{Pyramid, ShiftMatrix};
use walgebra::suite::{describe, dump, verify, Status, SuiteConfig, SUITES};

#[derive(Parser, Debug)]
#[command(
    name = "walgebra",
    about = "Exact checks for centralizer and W-algebra identities over prime fields",
    after_help = "Exactly one pyramid source is required: --q, or all of \
                  --sigma-upper/--sigma-lower/--level.\nWith --suite the exit \
                  code is 0 when every check passes, 1 otherwise; configuration \
                  errors exit with 2."
)]
struct Args {
    /// Column heights, e.g. "1,3,3,2,1"
    #[arg(long)]
    q: Option<String>,
    /// Superdiagonal shift entries s[i,i+1], e.g. "1,2"
    #[arg(long, requires = "sigma_lower", requires = "level", conflicts_with = "q")]
    sigma_upper: Option<String>,
    /// Subdiagonal shift entries s[i+1,i], e.g. "0,1"
    #[arg(long, requires = "sigma_upper")]
    sigma_lower: Option<String>,
    /// Level (bottom row length); required with the shift-matrix source
    #[arg(long)]
    level: Option<usize>,
    /// Prime characteristic
    #[arg(long, default_value_t = 3)]
    prime: u64,
    /// Series truncation order (defaults to N + 2p)
    #[arg(long)]
    trunc: Option<i64>,
    /// Seed for all randomized checks
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sample count for tableau-based suites
    #[arg(long, default_value_t = 50)]
    samples: usize,
    /// Suite to run (repeatable); omit to print the configuration instead
    #[arg(long = "suite")]
    suites: Vec<String>,
    /// Write the JSON report here
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// Dump one element: D[i;r], Zr[r], xiD[i;r], zs[s] or capelli[r]
    #[arg(long)]
    dump: Option<String>,
    /// List the available suites and exit
    #[arg(long)]
    list_suites: bool,
}

fn parse_usize_list(text: &str) -> Result<Vec<usize>, String> {
    text.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}")))
        .collect()
}

fn build_config(args: &Args) -> Result<SuiteConfig, String> {
    let pyramid: Arc<Pyramid> = match (&args.q, &args.sigma_upper) {
        (Some(q), None) => Pyramid::parse(q).map_err(|e| e.to_string())?,
        (None, Some(upper)) => {
            let lower = args.sigma_lower.as_ref().ok_or("missing --sigma-lower")?;
            let level = args.level.ok_or("missing --level")?;
            let sigma = ShiftMatrix::from_diagonals(
                &parse_usize_list(upper)?,
                &parse_usize_list(lower)?,
            )
            .map_err(|e| e.to_string())?;
            Pyramid::from_shift(&sigma, level).map_err(|e| e.to_string())?
        }
        (None, None) => return Err("a pyramid source is required: --q or --sigma-upper/--sigma-lower/--level".into()),
        (Some(_), Some(_)) => return Err("choose one pyramid source, not both".into()),
    };
    Ok(SuiteConfig {
        pyramid,
        prime: args.prime,
        trunc: args.trunc,
        seed: args.seed,
        samples: args.samples,
    })
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.list_suites {
        println!("{}", SUITES.join("\n"));
        return ExitCode::SUCCESS;
    }
    let cfg = match build_config(&args) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("configuration error: {msg}");
            return ExitCode::from(2);
        }
    };

    if let Some(spec) = &args.dump {
        return match dump(&cfg, spec) {
            Ok(text) => {
                println!("{spec}={text}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("configuration error: {e}");
                ExitCode::from(2)
            }
        };
    }

    if args.suites.is_empty() {
        return match describe(&cfg) {
            Ok(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("configuration error: {e}");
                ExitCode::from(2)
            }
        };
    }

    for name in &args.suites {
        if !SUITES.contains(&name.as_str()) {
            eprintln!("configuration error: unknown suite {name:?}");
            return ExitCode::from(2);
        }
    }
    let started = std::time::Instant::now();
    let report = match verify(&cfg, &args.suites) {
        Ok(report) => report,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(2);
        }
    };
    for check in &report.checks {
        let mark = match check.status {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Skip => "skip",
        };
        println!("[{mark}] {}/{} - {}", check.suite, check.case, check.details);
    }
    println!(
        "{} passed, {} failed, {} skipped in {:.2?}",
        report.summary.pass,
        report.summary.fail,
        report.summary.skip,
        started.elapsed()
    );
    if let Some(path) = &args.out {
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        if let Err(e) = std::fs::write(path, json + "\n") {
            eprintln!("configuration error: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
