//! Runs every acceptance scenario and prints one PASS/FAIL line per criterion.
//!
//! `cargo test --test acceptance -- [NAME...] [--strict] [--json DIR]`
//!
//! Without `--strict` (or `SEMICLAB_ACCEPTANCE_STRICT=1`) the process exits
//! zero after reporting, so that known failures do not mask other test
//! targets; with it, any failing gating criterion exits with status 1.

use std::path::PathBuf;
use std::process::ExitCode;

use semiclab::experiments::{run_scenario, Check, SCENARIOS};

fn fmt_check(c: &Check) -> String {
    let mark = if c.passed { "ok  " } else { "FAIL" };
    format!("      [{mark}] {} = {:.6} (expected {})", c.name, c.value, c.expected)
}

fn main() -> ExitCode {
    let mut names = Vec::new();
    let mut strict = std::env::var("SEMICLAB_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let mut json_dir: Option<PathBuf> = None;
    let mut args = std::env::args().skip(1);
    while let Some(a) = args.next() {
        match a.as_str() {
            "--strict" => strict = true,
            "--json" => json_dir = args.next().map(PathBuf::from),
            s if s.starts_with('-') => {}
            s => names.push(s.to_string()),
        }
    }
    let selected: Vec<&str> = if names.is_empty() {
        SCENARIOS.to_vec()
    } else {
        SCENARIOS.iter().copied().filter(|s| names.iter().any(|n| n == s)).collect()
    };
    let mut failed = 0;
    let mut gating = 0;
    for name in &selected {
        let number = SCENARIOS.iter().position(|s| s == name).map_or(0, |i| i + 1);
        match run_scenario(name) {
            Ok(rep) => {
                let verdict = match (rep.gating, rep.passed) {
                    (false, _) => "INFO",
                    (true, true) => "PASS",
                    (true, false) => "FAIL",
                };
                if rep.gating {
                    gating += 1;
                    failed += usize::from(!rep.passed);
                }
                println!("criterion {number} {name}: {verdict} ({:.1} s)", rep.elapsed_seconds);
                for c in &rep.checks {
                    println!("{}", fmt_check(c));
                }
                for c in &rep.diagnostics {
                    println!("      [info] {} = {:.6} ({})", c.name, c.value, c.expected);
                }
                if let Some(dir) = &json_dir {
                    let _ = std::fs::create_dir_all(dir);
                    let path = dir.join(format!("{name}.json"));
                    if let Err(e) = std::fs::write(&path, serde_json::to_string_pretty(&rep).unwrap_or_default()) {
                        eprintln!("could not write {}: {e}", path.display());
                    }
                }
            }
            Err(e) => {
                gating += 1;
                failed += 1;
                println!("criterion {number} {name}: FAIL (error: {e})");
            }
        }
    }
    println!("acceptance: {}/{gating} gating criteria passed", gating - failed);
    if strict && failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
