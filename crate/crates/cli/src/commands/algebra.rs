//! `qvlab algebra-check`: the identity suite as a pass/fail table.

use std::path::Path;

use serde::Serialize;

use qvlab_core::algebra::{identity_suite, Fault, IdentityCheck, IDENTITY_NAMES};

use crate::error::CliError;
use crate::output::{ensure_dir, write_json};

#[derive(Serialize)]
struct Row<'a> {
    name: &'a str,
    max_error: f64,
    tolerance: f64,
    passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    dump: Option<&'a str>,
}

pub fn list() {
    for name in IDENTITY_NAMES {
        println!("{name}");
    }
}

fn table(checks: &[IdentityCheck]) -> String {
    let mut s = format!("{:<26} {:>12} {:>10}  result\n", "identity", "max error", "tolerance");
    for c in checks {
        s.push_str(&format!(
            "{:<26} {:>12.3e} {:>10.0e}  {}\n",
            c.name,
            c.max_error,
            c.tolerance,
            if c.passed() { "PASS" } else { "FAIL" }
        ));
        if let Some(d) = &c.dump {
            for line in d.lines() {
                s.push_str(&format!("    {line}\n"));
            }
        }
    }
    s
}

/// Runs the suite; a failed identity is a runtime failure.
pub fn run(out: Option<&Path>, fault: Option<Fault>) -> Result<(), CliError> {
    let checks = identity_suite(fault);
    print!("{}", table(&checks));
    if let Some(dir) = out {
        ensure_dir(dir)?;
        let rows: Vec<Row> = checks
            .iter()
            .map(|c| Row {
                name: c.name,
                max_error: c.max_error,
                tolerance: c.tolerance,
                passed: c.passed(),
                dump: c.dump.as_deref(),
            })
            .collect();
        write_json(&dir.join("algebra_check.json"), &rows)?;
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed()).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Runtime(format!("identities failed: {}", failed.join(", "))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_lists_every_identity() {
        let checks = identity_suite(None);
        let t = table(&checks);
        for name in IDENTITY_NAMES {
            assert!(t.contains(name));
        }
        assert!(!t.contains("FAIL"));
        let bad = table(&identity_suite(Some(Fault::GammaEntry)));
        assert!(bad.contains("FAIL"));
    }
}
