use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use galimage::app::{self, verdict_str};
use galimage::checks::{classify, CheckReport, ClassifyOptions, Verdict, DEFAULT_BUDGET};
use galimage::model::{good_prime, validate_spec};

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_UNDECIDED: u8 = 2;
const EXIT_MISMATCH: u8 = 3;

#[derive(Parser)]
#[command(name = "galimage", version, about = "Big-image checks for f ⊗ g at a prime p")]
struct Cli {
    /// Brute-force budget in (S, N) pairs.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Write the JSON report here.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// Write a CSV rollup here (scan, verify-paper).
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// Seed for randomized suites; the checks themselves are deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify one spec at one prime.
    Check { spec: String, p: u64 },
    /// Classify every good prime in [p_min, p_max] and roll up by p mod m.
    Scan {
        spec: String,
        p_min: u64,
        p_max: u64,
        #[arg(default_value_t = 1)]
        modulus: u64,
    },
    /// Re-run a shipped case (or all of them) at its committed primes.
    VerifyPaper {
        /// a, b, c, d, e, pos or all
        #[arg(default_value = "all")]
        case: String,
    },
    /// Compare the symbolic and brute-force deciders prime by prime.
    OracleCompare {
        spec: String,
        #[arg(required = true, num_args = 1.., value_delimiter = ',')]
        primes: Vec<u64>,
    },
    /// Lint a spec file.
    Validate { spec: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global().expect("thread pool starts once");
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn emit_json<T: serde::Serialize>(cli: &Cli, value: &T, timings: BTreeMap<String, u128>) -> Result<(), String> {
    if let Some(path) = &cli.json {
        app::write_file(path, &app::to_json(value, app::run_meta(timings))).map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn emit_csv(cli: &Cli, text: Result<String, csv::Error>) -> Result<(), String> {
    if let Some(path) = &cli.csv {
        std::fs::write(path, text.map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<u8, String> {
    let opts = ClassifyOptions { budget: cli.budget, ..Default::default() };
    match &cli.cmd {
        Cmd::Check { spec, p } => {
            let s = app::load_spec(spec).map_err(|e| e.to_string())?;
            let gp = good_prime(&s, *p);
            if !gp.good {
                return Err(format!("p = {p} is not good: {}", gp.reasons.join(", ")));
            }
            let r = classify(&s, *p, opts).map_err(|e| e.to_string())?;
            print_report(&r);
            emit_json(cli, &r, r.timings_ms.clone())?;
            Ok(match r.euler_adapted {
                Verdict::NotDecided => EXIT_UNDECIDED,
                _ => EXIT_OK,
            })
        }
        Cmd::Scan { spec, p_min, p_max, modulus } => {
            let s = app::load_spec(spec).map_err(|e| e.to_string())?;
            let clock = Instant::now();
            let r = app::scan(&s, *p_min, *p_max, *modulus, opts);
            println!("{}  primes {}..={}  mod {}", r.label, p_min, p_max, modulus);
            println!("{:>6} {:>6}  {:<12} {:<12}", "p", "class", "sE", "adapted");
            for row in &r.rows {
                println!("{:>6} {:>6}  {:<12} {:<12}", row.p, row.class, verdict_str(row.s_e), verdict_str(row.euler_adapted));
            }
            for (class, c) in &r.rollup {
                let flag = if c.constant { "" } else { "  NOT CONSTANT" };
                println!("class {class}: {} hold, {} fail, {} undecided{flag}", c.holds, c.fails, c.not_decided);
            }
            for (p, e) in &r.errors {
                println!("p = {p}: error: {e}");
            }
            emit_json(cli, &r, BTreeMap::from([("scan".to_string(), clock.elapsed().as_millis())]))?;
            emit_csv(cli, app::scan_csv(&r))?;
            Ok(if !r.errors.is_empty() {
                EXIT_ERROR
            } else if r.rows.iter().any(|x| x.s_e == Verdict::NotDecided) {
                EXIT_UNDECIDED
            } else {
                EXIT_OK
            })
        }
        Cmd::VerifyPaper { case } => {
            let selected: Vec<_> = if case == "all" {
                app::cases()
            } else {
                vec![app::case(case).ok_or_else(|| format!("no case {case:?}"))?]
            };
            let clock = Instant::now();
            let results: Vec<_> = selected.iter().map(|c| app::verify_case(c, cli.budget)).collect();
            for r in &results {
                println!("case {} ({}): {}", r.case, r.label, if r.pass { "pass" } else { "FAIL" });
                for row in r.rows.iter().filter(|x| !x.ok) {
                    let got = row.got.map_or("error", verdict_str);
                    println!(
                        "  p = {} (class {}): expected sE {}, got {}{}",
                        row.p,
                        row.class,
                        verdict_str(row.expected),
                        got,
                        row.error.as_deref().map(|e| format!(" ({e})")).unwrap_or_default()
                    );
                }
            }
            emit_json(cli, &results, BTreeMap::from([("verify".to_string(), clock.elapsed().as_millis())]))?;
            emit_csv(cli, app::verify_csv(&results))?;
            Ok(if results.iter().all(|r| r.pass) { EXIT_OK } else { EXIT_MISMATCH })
        }
        Cmd::OracleCompare { spec, primes } => {
            let s = app::load_spec(spec).map_err(|e| e.to_string())?;
            let v = validate_spec(&s);
            if !v.is_empty() {
                return Err(v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; "));
            }
            let clock = Instant::now();
            let r = app::oracle_compare(&s, primes, cli.budget);
            for row in &r.rows {
                match (&row.error, row.brute) {
                    (Some(e), _) => println!("p = {}: error: {e}", row.p),
                    (None, Some(b)) => println!(
                        "p = {}: symbolic {}, brute {}{}",
                        row.p,
                        row.symbolic,
                        b,
                        if row.agree { "" } else { "  DISAGREE" }
                    ),
                    _ => unreachable!(),
                }
            }
            emit_json(cli, &r, BTreeMap::from([("oracle".to_string(), clock.elapsed().as_millis())]))?;
            if r.rows.iter().any(|x| x.error.is_some()) {
                return Ok(EXIT_ERROR);
            }
            Ok(if r.pass { EXIT_OK } else { EXIT_MISMATCH })
        }
        Cmd::Validate { spec } => {
            let s = app::load_spec(spec).map_err(|e| e.to_string())?;
            let v = validate_spec(&s);
            if v.is_empty() {
                println!("ok");
                Ok(EXIT_OK)
            } else {
                for x in &v {
                    println!("{x}");
                }
                Ok(EXIT_ERROR)
            }
        }
    }
}

fn print_report(r: &CheckReport) {
    println!("{}  p = {}  {}", r.label, r.p, r.field);
    println!(
        "|G| = {}  |G_H| = {}  projective {}",
        r.group_order,
        r.gh_order,
        r.projective_type.map_or("?".to_string(), |t| t.to_string())
    );
    let c = &r.conditions;
    for (name, cond) in [("N", &c.n), ("gI", &c.g_i), ("rI", &c.r_i), ("wE", &c.w_e), ("sE", &c.s_e)] {
        let methods: Vec<String> =
            cond.methods.iter().map(|m| format!("{:?}={}", m.method, verdict_str(m.verdict))).collect();
        println!("{name:>3}: {:<12} [{}]", verdict_str(cond.verdict), methods.join(", "));
    }
    println!("Euler type: {}   Euler-adapted: {}", verdict_str(r.euler_type), verdict_str(r.euler_adapted));
    if let Some(w) = &r.witness {
        println!("witness at sigma {}:", w.sigma);
        println!("  S = {:?}", w.s_part);
        println!("  g = {:?}", w.g_part_elem);
    }
    for b in &r.skipped_blocks {
        println!("skipped block {b} (d·det N = 1 throughout)");
    }
    for a in &r.assumptions {
        println!("assumes: {a}");
    }
}
