//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
//!
//! Criteria 1-5 run the library checks at 10^6 trials and seed 42; 6 and 7
//! drive the built binary.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use secrelay_cli::verify::{self, Criterion, VerifyOptions};

const BIN: &str = env!("CARGO_BIN_EXE_secrelay");

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn secrelay(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(workspace_root())
        .env_remove(secrelay_cli::SEED_ENV)
        .output()
        .expect("binary runs")
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn from_criterion(c: &Criterion) -> Outcome {
    let mut detail = c.summary();
    for check in c.checks.iter().filter(|k| !k.passed()) {
        detail += &format!(
            "\n      {} {}: value {:e}, reference {:e}, deviation {:e} > {:e}",
            if check.statistical { "mc" } else { "exact" },
            check.label,
            check.value,
            check.reference,
            check.deviation,
            check.tolerance
        );
    }
    Outcome {
        passed: c.passed(),
        detail,
    }
}

/// Parsed sweep CSV keyed by column name.
struct Table {
    rows: Vec<BTreeMap<String, String>>,
}

impl Table {
    fn parse(text: &str) -> Table {
        let mut lines = text.lines();
        let header: Vec<String> = lines.next().unwrap_or_default().split(',').map(String::from).collect();
        let rows = lines
            .map(|l| header.iter().cloned().zip(l.split(',').map(String::from)).collect())
            .collect();
        Table { rows }
    }

    fn num(row: &BTreeMap<String, String>, key: &str) -> Option<f64> {
        row.get(key).and_then(|v| v.parse().ok())
    }
}

/// Analytic column non-increasing in λ_m and in N within every curve.
fn monotone_violations(t: &Table) -> Vec<String> {
    const SLACK: f64 = 1e-12;
    let mut by_key: BTreeMap<(String, u64), f64> = BTreeMap::new();
    let mut problems = Vec::new();
    let mut prev: Option<(String, u64, f64, f64)> = None;
    for row in &t.rows {
        let topo = row["topology"].clone();
        let n: u64 = row["n"].parse().unwrap();
        let lm = Table::num(row, "lambda_m_db").unwrap();
        let p = Table::num(row, "p_analytic").unwrap();
        if let Some((pt, pn, plm, pp)) = &prev {
            if *pt == topo && *pn == n && lm > *plm && p > pp + SLACK {
                problems.push(format!("{topo} N={n}: rises from {pp} to {p} at {lm} dB"));
            }
        }
        prev = Some((topo.clone(), n, lm, p));
        by_key.insert((format!("{topo}@{lm}"), n), p);
    }
    let mut last: Option<(String, u64, f64)> = None;
    for ((key, n), p) in &by_key {
        if let Some((k, pn, pp)) = &last {
            if k == key && p > &(pp + SLACK) {
                problems.push(format!("{key}: N={n} above N={pn}"));
            }
        }
        last = Some((key.clone(), *n, *p));
    }
    problems
}

fn criterion_6() -> Outcome {
    let run = |shards: &str| {
        secrelay(&[
            "sweep",
            "--config",
            "configs/fig2.json",
            "--trials",
            "200000",
            "--seed",
            "42",
            "--shards",
            shards,
        ])
    };
    let (a, b, c) = (run("1"), run("8"), run("8"));
    let ok = a.status.success() && b.status.success() && c.status.success();
    let identical = a.stdout == b.stdout && b.stdout == c.stdout;
    let has_mc = Table::parse(&String::from_utf8_lossy(&a.stdout))
        .rows
        .iter()
        .all(|r| !r["p_mc"].is_empty());
    Outcome {
        passed: ok && identical && has_mc && !a.stdout.is_empty(),
        detail: format!(
            "fig2 sweep at seed 42, 2*10^5 trials: shards 1 vs 8 identical={identical}, repeat identical={}, {} bytes",
            b.stdout == c.stdout,
            a.stdout.len()
        ),
    }
}

fn criterion_7() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut notes = Vec::new();
    let mut passed = true;
    let mut fail = |why: String| {
        passed = false;
        why
    };

    let mut tables = BTreeMap::new();
    for fig in ["fig2", "fig3"] {
        let out = dir.path().join(format!("{fig}.csv"));
        let o = secrelay(&[
            "sweep",
            "--config",
            &format!("configs/{fig}.json"),
            "--out",
            out.to_str().unwrap(),
        ]);
        if !o.status.success() {
            notes.push(fail(format!(
                "{fig} exited {:?}: {}",
                o.status.code(),
                String::from_utf8_lossy(&o.stderr)
            )));
            continue;
        }
        let table = Table::parse(&std::fs::read_to_string(&out).unwrap_or_default());
        let expected = if fig == "fig2" { 16 * 3 * 2 } else { 15 * 3 * 3 };
        if table.rows.len() != expected {
            notes.push(fail(format!("{fig}: {} rows, expected {expected}", table.rows.len())));
        }
        for v in monotone_violations(&table) {
            notes.push(fail(format!("{fig}: {v}")));
        }
        tables.insert(fig, table);
    }

    if let Some(fig2) = tables.get("fig2") {
        for row in &fig2.rows {
            let (p, lo, hi) = (
                Table::num(row, "p_mc"),
                Table::num(row, "mc_ci_low"),
                Table::num(row, "mc_ci_high"),
            );
            match (p, lo, hi) {
                (Some(p), Some(lo), Some(hi)) if lo <= p && p <= hi => {}
                _ => notes.push(fail(format!("fig2: MC interval missing or inverted in {row:?}"))),
            }
        }
    }
    if let Some(fig3) = tables.get("fig3") {
        let mut checked = 0;
        for row in &fig3.rows {
            let lm = Table::num(row, "lambda_m_db").unwrap();
            let at = match row["topology"].as_str() {
                "with-direct:5/5" => 70.0,
                _ => 60.0,
            };
            if lm == at {
                checked += 1;
                let gap = (Table::num(row, "p_asymptotic").unwrap() - Table::num(row, "p_analytic").unwrap()).abs();
                if gap > 1e-3 {
                    notes.push(fail(format!(
                        "fig3 {} N={} at {at} dB: gap {gap:e}",
                        row["topology"], row["n"]
                    )));
                }
            }
        }
        if checked != 9 {
            notes.push(fail(format!("fig3: {checked} high-SNR rows found, expected 9")));
        }
    }

    let v = secrelay(&["verify", "--preset", "acceptance"]);
    if v.status.code() != Some(0) {
        notes.push(fail(format!("verify exited {:?}", v.status.code())));
    }

    let detail = if notes.is_empty() {
        "fig2/fig3 recipes ran; curves monotone; fig3 limits within 1e-3; verify exited 0".to_string()
    } else {
        notes.join("\n      ")
    };
    Outcome { passed, detail }
}

fn main() {
    let opts = VerifyOptions {
        trials: 1_000_000,
        seed: 42,
        max_rel_err: None,
        ..VerifyOptions::default()
    };
    type Runner = Box<dyn Fn(&VerifyOptions) -> Outcome>;
    let lib = |f: fn(&VerifyOptions) -> Result<Criterion, secrelay_cli::CliError>| -> Runner {
        Box::new(move |o: &VerifyOptions| match f(o) {
            Ok(c) => from_criterion(&c),
            Err(e) => Outcome {
                passed: false,
                detail: format!("error: {e}"),
            },
        })
    };
    let criteria: Vec<(u8, &str, Runner)> = vec![
        (1, "triple agreement with direct links", lib(verify::criterion_1)),
        (2, "relay-only exactness", lib(verify::criterion_2)),
        (3, "asymptotic convergence", lib(verify::criterion_3)),
        (4, "negligible direct links", lib(verify::criterion_4)),
        (5, "monotonicity", lib(verify::criterion_5)),
        (6, "simulator determinism", Box::new(|_: &VerifyOptions| criterion_6())),
        (7, "figure recipes", Box::new(|_: &VerifyOptions| criterion_7())),
    ];

    let mut failed = 0;
    for (id, title, run) in &criteria {
        let start = Instant::now();
        let outcome = run(&opts);
        if !outcome.passed {
            failed += 1;
        }
        println!(
            "criterion {id} {title}: {} ({:.1}s) {}",
            if outcome.passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            outcome.detail
        );
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
