//! Acceptance run: one PASS/FAIL line per criterion, at the stated
//! tolerances and resolutions. Run with `--nocapture` to see the lines.

use std::process::Command;
use std::time::Instant;

use serde_json::Value;
use varpolar_core::suite::{FunctionResult, SuiteResult};
use varpolar_core::{run_suite, Report, RunConfig, SuiteKind};

struct Ledger {
    failures: Vec<String>,
}

impl Ledger {
    fn check(&mut self, name: &str, ok: bool, detail: String) {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failures.push(name.to_string());
        }
    }
}

fn suite(r: &Report, k: SuiteKind) -> &SuiteResult {
    r.suite(k).expect("suite ran")
}

fn func<'a>(s: &'a SuiteResult, id: &str) -> &'a FunctionResult {
    s.functions.iter().find(|f| f.function_id == id).expect("function ran")
}

fn strip_timing(bytes: &[u8]) -> Value {
    let mut v: Value = serde_json::from_slice(bytes).expect("json report");
    v.as_object_mut().expect("object").remove("timing");
    v
}

#[test]
fn acceptance() {
    let mut l = Ledger { failures: Vec::new() };
    let config = RunConfig::default();
    assert_eq!((config.resolution_1d, config.resolution_2d), (65, 17));

    let t = Instant::now();
    let eq = run_suite(&RunConfig { suites: vec![SuiteKind::Prop1, SuiteKind::Thm2], ..RunConfig::default() }).unwrap();
    let eq_secs = t.elapsed().as_secs_f64();

    let p1 = suite(&eq, SuiteKind::Prop1);
    let worst_frac = p1
        .functions
        .iter()
        .map(|f| f.counts.indeterminate as f64 / f.counts.total() as f64)
        .fold(0.0, f64::max);
    l.check(
        "prop1 equivalence",
        p1.counts.disagree == 0 && worst_frac <= 0.02 && eq_secs <= 30.0,
        format!(
            "{} grid points, {} hard, {} indeterminate (worst fraction {:.4}), {:.1} s for prop1+thm2",
            p1.counts.total(),
            p1.counts.disagree,
            p1.counts.indeterminate,
            worst_frac,
            eq_secs
        ),
    );

    let t2 = suite(&eq, SuiteKind::Thm2);
    let sources_ok = t2.functions.iter().all(|f| {
        let want = if matches!(f.function_id.as_str(), "neg_abs" | "twowell") { "clarke-numeric" } else { "exact" };
        f.metrics["graph_source"] == want
    });
    let worst_frac = t2
        .functions
        .iter()
        .map(|f| f.counts.indeterminate as f64 / f.counts.total() as f64)
        .fold(0.0, f64::max);
    l.check(
        "thm2 equivalence",
        t2.counts.disagree == 0 && worst_frac <= 0.02 && sources_ok,
        format!(
            "{} interior points, {} hard, {} indeterminate, graph sources as required: {sources_ok}",
            t2.counts.total(),
            t2.counts.disagree,
            t2.counts.indeterminate
        ),
    );

    let all = run_suite(&RunConfig {
        suites: vec![SuiteKind::Thm3, SuiteKind::Cdd, SuiteKind::Predicates, SuiteKind::Mvi, SuiteKind::Sanity],
        ..RunConfig::default()
    })
    .unwrap();

    let t3 = suite(&all, SuiteKind::Thm3);
    let min_cands = t3.functions.iter().map(|f| f.counts.total()).min().unwrap();
    let dense_ok = t3.functions.iter().all(|f| {
        let c = f.metrics["candidate_resolution"].as_u64().unwrap();
        f.metrics["dense_resolution"].as_u64().unwrap() > 4 * (c - 1)
    });
    l.check(
        "thm3 dual route",
        t3.counts.disagree == 0 && min_cands >= 200 && dense_ok && t3.functions.len() == 9,
        format!(
            "{} functions, at least {min_cands} candidates each, {} hard, {} indeterminate",
            t3.functions.len(),
            t3.counts.disagree,
            t3.counts.indeterminate
        ),
    );

    let cdd = suite(&all, SuiteKind::Cdd);
    let flagged = ["ind_halfline", "ind_origin"].iter().all(|id| func(cdd, id).truncated);
    l.check(
        "subderivative vs enlargement support (cdd)",
        cdd.counts.disagree == 0 && flagged && config.tol == 1e-3,
        format!(
            "{} (f, xbar, d) cases, {} failures, unbounded cases truncated: {flagged}",
            cdd.counts.total(),
            cdd.counts.disagree
        ),
    );

    let pr = suite(&all, SuiteKind::Predicates);
    let neg = func(pr, "neg_abs");
    let pair = neg.metrics.get("violating_pair").cloned();
    l.check(
        "predicates",
        pr.counts.disagree == 0 && pair.is_some() && pr.functions.len() == 9,
        format!(
            "{} checks passed; Clarke graph of -|x| violated by {}",
            pr.counts.agree,
            pair.map_or("nothing".to_string(), |p| p.to_string())
        ),
    );

    let mvi = suite(&all, SuiteKind::Mvi);
    l.check(
        "mean value inequality",
        mvi.counts.disagree == 0 && mvi.counts.agree >= 100,
        format!("{} witnesses, {} failures", mvi.counts.agree, mvi.counts.disagree),
    );

    let san = suite(&all, SuiteKind::Sanity);
    let exact_cases = san.metrics["exact_cases"].as_u64().unwrap();
    l.check(
        "numerical sanity",
        san.counts.disagree == 0 && exact_cases >= 500,
        format!("{exact_cases} exact comparisons, {} checks, {} failures", san.counts.total(), san.counts.disagree),
    );

    let bin = env!("CARGO_BIN_EXE_varpolar");
    let run = || Command::new(bin).args(["suite", "--suite", "all"]).output().expect("binary runs");
    let (a, b) = (run(), run());
    let same = a.status.success() && b.status.success() && strip_timing(&a.stdout) == strip_timing(&b.stdout);
    // timing is the last field, so the bytes before it must match exactly
    let before_timing = |s: &[u8]| {
        let text = String::from_utf8_lossy(s).into_owned();
        let cut = text.find("\"timing\"").unwrap_or(text.len());
        text[..cut].to_string()
    };
    let raw_same_modulo_timing = before_timing(&a.stdout) == before_timing(&b.stdout);
    l.check(
        "determinism",
        same && raw_same_modulo_timing,
        format!("two `suite --suite all` runs, {} bytes each, identical without timing: {same}", a.stdout.len()),
    );

    assert!(l.failures.is_empty(), "failed criteria: {:?}", l.failures);
}
