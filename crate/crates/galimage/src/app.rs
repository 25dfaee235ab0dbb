//! Shipped fixtures, prime scans, case verification and report output.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checks::{classify, BruteMode, CheckReport, ClassifyOptions, Verdict};
use crate::ff::is_odd_prime;
use crate::model::{good_prime, ModelError, PairSpec};

pub const FIXTURES: &[(&str, &str)] = &[
    ("case_a.json", include_str!("../data/case_a.json")),
    ("case_b.json", include_str!("../data/case_b.json")),
    ("case_c.json", include_str!("../data/case_c.json")),
    ("case_d.json", include_str!("../data/case_d.json")),
    ("case_e.json", include_str!("../data/case_e.json")),
    ("case_pos.json", include_str!("../data/case_pos.json")),
    ("pair_675cb.json", include_str!("../data/pair_675cb.json")),
    ("f_289.2.a.f.json", include_str!("../data/f_289.2.a.f.json")),
    ("f_24.3.h.c.json", include_str!("../data/f_24.3.h.c.json")),
];

const CASES_JSON: &str = include_str!("../data/cases.json");

pub fn fixture(name: &str) -> Option<PairSpec> {
    let text = FIXTURES.iter().find(|(n, _)| *n == name)?.1;
    Some(PairSpec::from_json(text).expect("shipped fixtures parse"))
}

/// A spec from disk, or a shipped fixture when `path` names one.
pub fn load_spec(path: &str) -> Result<PairSpec, ModelError> {
    if let Some(s) = fixture(path) {
        return Ok(s);
    }
    let text = std::fs::read_to_string(path).map_err(|e| ModelError::Parse(format!("{path}: {e}")))?;
    PairSpec::from_json(&text)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureCase {
    pub id: String,
    pub spec: String,
    pub modulus: u64,
    /// Verdict of (sE) on `classes`.
    pub expect: Verdict,
    /// Residue class → committed primes.
    pub classes: BTreeMap<String, Vec<u64>>,
    /// Classes where the opposite verdict is expected.
    #[serde(default)]
    pub holding_classes: BTreeMap<String, Vec<u64>>,
    /// Primes where the brute decider also runs.
    pub brute: Vec<u64>,
}

#[derive(Deserialize)]
struct CaseTable {
    cases: Vec<FixtureCase>,
}

pub fn cases() -> Vec<FixtureCase> {
    serde_json::from_str::<CaseTable>(CASES_JSON).expect("case table parses").cases
}

pub fn case(id: &str) -> Option<FixtureCase> {
    cases().into_iter().find(|c| c.id == id)
}

impl FixtureCase {
    pub fn spec(&self) -> PairSpec {
        fixture(&self.spec).expect("case names a shipped fixture")
    }
    /// (prime, class, expected (sE) verdict), in increasing prime order.
    pub fn schedule(&self) -> Vec<(u64, u64, Verdict)> {
        let flip = match self.expect {
            Verdict::Holds => Verdict::Fails,
            _ => Verdict::Holds,
        };
        let mut out = Vec::new();
        for (table, v) in [(&self.classes, self.expect), (&self.holding_classes, flip)] {
            for (class, ps) in table {
                let class: u64 = class.parse().expect("numeric residue class");
                out.extend(ps.iter().map(|&p| (p, class, v)));
            }
        }
        out.sort();
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub p: u64,
    pub class: u64,
    pub s_e: Verdict,
    pub euler_adapted: Verdict,
    pub euler_type: Verdict,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ClassRollup {
    pub holds: usize,
    pub fails: usize,
    pub not_decided: usize,
    pub constant: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanResult {
    pub label: String,
    pub modulus: u64,
    pub primes: Vec<u64>,
    pub rows: Vec<ScanRow>,
    pub rollup: BTreeMap<u64, ClassRollup>,
    pub errors: Vec<(u64, String)>,
    pub reports: Vec<CheckReport>,
}

pub fn scan(s: &PairSpec, p_min: u64, p_max: u64, modulus: u64, opts: ClassifyOptions) -> ScanResult {
    let primes: Vec<u64> = (p_min..=p_max).filter(|&p| is_odd_prime(p) && good_prime(s, p).good).collect();
    let results: Vec<(u64, Result<CheckReport, String>)> =
        primes.par_iter().map(|&p| (p, classify(s, p, opts).map_err(|e| e.to_string()))).collect();
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    let mut errors = Vec::new();
    let mut rollup: BTreeMap<u64, ClassRollup> = BTreeMap::new();
    let mut seen: BTreeMap<u64, Verdict> = BTreeMap::new();
    for (p, r) in results {
        match r {
            Ok(rep) => {
                let class = p % modulus.max(1);
                let v = rep.conditions.s_e.verdict;
                let e = rollup.entry(class).or_insert(ClassRollup { constant: true, ..Default::default() });
                match v {
                    Verdict::Holds => e.holds += 1,
                    Verdict::Fails => e.fails += 1,
                    Verdict::NotDecided => e.not_decided += 1,
                }
                if *seen.entry(class).or_insert(v) != v {
                    e.constant = false;
                }
                rows.push(ScanRow { p, class, s_e: v, euler_adapted: rep.euler_adapted, euler_type: rep.euler_type });
                reports.push(rep);
            }
            Err(e) => errors.push((p, e)),
        }
    }
    ScanResult { label: label(s), modulus, primes, rows, rollup, errors, reports }
}

fn label(s: &PairSpec) -> String {
    format!("{} x {}", s.label_f, s.label_g.as_deref().unwrap_or("?"))
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyRow {
    pub p: u64,
    pub class: u64,
    pub expected: Verdict,
    pub got: Option<Verdict>,
    pub brute_ran: bool,
    pub ok: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyResult {
    pub case: String,
    pub label: String,
    pub pass: bool,
    pub rows: Vec<VerifyRow>,
    pub reports: Vec<CheckReport>,
}

/// Run a case's committed primes (brute force only where the case asks for
/// it) and compare the (sE) verdict with the expected one.
pub fn verify_case(c: &FixtureCase, budget: u64) -> VerifyResult {
    let s = c.spec();
    let sched = c.schedule();
    let results: Vec<_> = sched
        .par_iter()
        .map(|&(p, class, expected)| {
            let brute = c.brute.contains(&p);
            let opts = ClassifyOptions {
                budget,
                brute: if brute { BruteMode::Always } else { BruteMode::Never },
                parallel: true,
            };
            (p, class, expected, brute, classify(&s, p, opts))
        })
        .collect();
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for (p, class, expected, brute_ran, r) in results {
        match r {
            Ok(rep) => {
                let got = rep.conditions.s_e.verdict;
                rows.push(VerifyRow { p, class, expected, got: Some(got), brute_ran, ok: got == expected, error: None });
                reports.push(rep);
            }
            Err(e) => rows.push(VerifyRow {
                p,
                class,
                expected,
                got: None,
                brute_ran,
                ok: false,
                error: Some(e.to_string()),
            }),
        }
    }
    VerifyResult { case: c.id.clone(), label: label(&s), pass: rows.iter().all(|r| r.ok), rows, reports }
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleRow {
    pub p: u64,
    pub symbolic: bool,
    pub brute: Option<bool>,
    pub agree: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleResult {
    pub label: String,
    pub pass: bool,
    pub rows: Vec<OracleRow>,
}

pub fn oracle_compare(s: &PairSpec, primes: &[u64], budget: u64) -> OracleResult {
    use crate::checks::{check_se_brute, check_we_symbolic, BruteOptions};
    use crate::model::build_image;
    let rows: Vec<OracleRow> = primes
        .par_iter()
        .map(|&p| {
            let run = || -> Result<(bool, bool), String> {
                let m = build_image(s, p).map_err(|e| e.to_string())?;
                let sym = check_we_symbolic(&m).map_err(|e| e.to_string())?.is_some();
                let opts = BruteOptions { budget, ..Default::default() };
                let brute = check_se_brute(&m, opts).map_err(|e| e.to_string())?.witness.is_some();
                Ok((sym, brute))
            };
            match run() {
                Ok((sym, brute)) => OracleRow { p, symbolic: sym, brute: Some(brute), agree: sym == brute, error: None },
                Err(e) => OracleRow { p, symbolic: false, brute: None, agree: false, error: Some(e) },
            }
        })
        .collect();
    OracleResult { label: label(s), pass: rows.iter().all(|r| r.agree), rows }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    report: &'a T,
    run_meta: RunMeta,
}

#[derive(Serialize)]
pub struct RunMeta {
    pub timestamp_unix: u64,
    pub threads: usize,
    pub timings_ms: BTreeMap<String, u128>,
}

/// Deterministic JSON of `value`; everything run-dependent sits under
/// `run_meta`, which comparisons strip.
pub fn to_json<T: Serialize>(value: &T, meta: RunMeta) -> String {
    serde_json::to_string_pretty(&Envelope { report: value, run_meta: meta }).expect("reports serialize")
}

pub fn strip_run_meta(json: &str) -> String {
    let mut v: serde_json::Value = serde_json::from_str(json).expect("valid JSON");
    if let Some(o) = v.as_object_mut() {
        o.remove("run_meta");
    }
    serde_json::to_string_pretty(&v).unwrap()
}

pub fn run_meta(timings: BTreeMap<String, u128>) -> RunMeta {
    let ts = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    RunMeta { timestamp_unix: ts, threads: rayon::current_num_threads(), timings_ms: timings }
}

pub fn write_file(path: &Path, text: &str) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    f.write_all(b"\n")
}

pub fn scan_csv(r: &ScanResult) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["p", "class", "s_e", "euler_adapted", "euler_type"])?;
    for row in &r.rows {
        w.write_record([
            row.p.to_string(),
            row.class.to_string(),
            verdict_str(row.s_e).into(),
            verdict_str(row.euler_adapted).into(),
            verdict_str(row.euler_type).into(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner().expect("in-memory writer")).unwrap())
}

pub fn verify_csv(results: &[VerifyResult]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["case", "p", "class", "expected", "got", "brute", "ok"])?;
    for r in results {
        for row in &r.rows {
            w.write_record([
                r.case.clone(),
                row.p.to_string(),
                row.class.to_string(),
                verdict_str(row.expected).into(),
                row.got.map_or("error", verdict_str).into(),
                row.brute_ran.to_string(),
                row.ok.to_string(),
            ])?;
        }
    }
    Ok(String::from_utf8(w.into_inner().expect("in-memory writer")).unwrap())
}

pub fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "holds",
        Verdict::Fails => "fails",
        Verdict::NotDecided => "not-decided",
    }
}
