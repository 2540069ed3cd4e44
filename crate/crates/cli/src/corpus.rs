//! Corpus runner: every `.kbx` file carries a `; expect:` header listing one
//! verdict per query (`sat`/`yes`/`entailed`, `unsat`/`no`/`not-entailed`,
//! `limit`, or `error` for files that must be rejected).

use std::path::{Path, PathBuf};

use sroiqc::batch::map_items;
use sroiqc::kb_model::Query;
use sroiqc::kb_text::parse_document;
use sroiqc::query::{answer, Answer};
use sroiqc::tableau::ResourceLimits;

use super::resolve_system;

#[derive(Debug, PartialEq, Eq)]
pub struct FileReport {
    pub name: String,
    pub expected: Vec<String>,
    pub actual: Vec<String>,
}

impl FileReport {
    pub fn passed(&self) -> bool {
        !self.expected.is_empty() && self.expected == self.actual
    }
}

fn normalize(token: &str) -> String {
    match token {
        "sat" | "yes" | "entailed" | "satisfiable" => "yes".into(),
        "unsat" | "no" | "not-entailed" | "unsatisfiable" => "no".into(),
        other => other.to_string(),
    }
}

/// Verdict tokens from the `; expect:` comment lines at the top of a file.
pub fn expectations(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some(comment) = line.strip_prefix(';') else { break };
        if let Some(rest) = comment.trim_start_matches(';').trim().strip_prefix("expect:") {
            out.extend(rest.split_whitespace().map(normalize));
        }
    }
    out
}

fn check_file(path: &Path, system: Option<&str>, limits: ResourceLimits) -> FileReport {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return FileReport { name, expected: Vec::new(), actual: vec![format!("unreadable: {e}")] },
    };
    let expected = expectations(&text);
    let actual = match parse_document(&text) {
        Err(_) => vec!["error".to_string()],
        Ok(parsed) => {
            let doc = parsed.document;
            match resolve_system(system, &doc) {
                Err(_) => vec!["error".to_string()],
                Ok(sys) => {
                    let queries = if doc.queries.is_empty() { vec![Query::KbSat] } else { doc.queries.clone() };
                    queries
                        .iter()
                        .map(|q| match answer(&doc.kb, q, &sys, limits) {
                            Ok(r) => match r.answer {
                                Answer::Yes => "yes".to_string(),
                                Answer::No => "no".to_string(),
                                Answer::ResourceLimitExceeded(_) => "limit".to_string(),
                            },
                            Err(_) => "error".to_string(),
                        })
                        .collect()
                }
            }
        }
    };
    FileReport { name, expected, actual }
}

pub fn run_corpus(dir: &Path, system: Option<&str>, limits: ResourceLimits) -> Result<u8, String> {
    let entries = std::fs::read_dir(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "kbx"))
        .collect();
    files.sort();
    let reports = map_items(&files, |p| check_file(p, system, limits));
    let mut failed = 0;
    for r in &reports {
        if r.passed() {
            println!("PASS  {}", r.name);
        } else {
            failed += 1;
            if r.expected.is_empty() {
                println!("FAIL  {}  missing `; expect:` header (got {})", r.name, r.actual.join(" "));
            } else {
                println!("FAIL  {}  expected {} got {}", r.name, r.expected.join(" "), r.actual.join(" "));
            }
        }
    }
    println!("{} passed, {failed} failed", reports.len() - failed);
    Ok(if failed == 0 { 0 } else { 1 })
}
