//! Summary tables, JSON reports and the corpus manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::prover::{QueryReport, Verdict};

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub file: String,
    pub goals: usize,
    pub proved: usize,
    pub time: f64,
}

/// One row per file in first-appearance order, then the total.
pub fn stats(reports: &[QueryReport]) -> (Vec<SummaryRow>, SummaryRow) {
    let mut rows: Vec<SummaryRow> = Vec::new();
    for r in reports {
        let row = match rows.iter_mut().find(|x| x.file == r.file) {
            Some(x) => x,
            None => {
                rows.push(SummaryRow { file: r.file.clone(), goals: 0, proved: 0, time: 0.0 });
                rows.last_mut().unwrap()
            }
        };
        row.goals += 1;
        row.proved += usize::from(r.verdict == Verdict::Proved);
        row.time += r.time;
    }
    let total = SummaryRow {
        file: "total".into(),
        goals: rows.iter().map(|r| r.goals).sum(),
        proved: rows.iter().map(|r| r.proved).sum(),
        time: rows.iter().map(|r| r.time).sum(),
    };
    (rows, total)
}

pub fn render_table(reports: &[QueryReport]) -> String {
    let mut s = String::new();
    let w = reports.iter().map(|r| r.query.len()).max().unwrap_or(5).max(5);
    let _ = writeln!(s, "{:<w$}  {:<10}  {:>8}  {:>6}  instances", "query", "verdict", "time(s)", "rounds");
    for r in reports {
        let _ = writeln!(
            s,
            "{:<w$}  {:<10}  {:>8.2}  {:>6}  {:?}",
            r.query,
            r.verdict.as_str(),
            r.time,
            r.rounds,
            r.instances_per_round
        );
    }
    let (rows, total) = stats(reports);
    let fw = rows.iter().map(|r| r.file.len()).max().unwrap_or(5).max(5);
    let _ = writeln!(s, "\n{:<fw$}  {:>6}  {:>6}  {:>13}", "file", "#goals", "proved", "total time(s)");
    for r in rows.iter().chain([&total]) {
        let _ = writeln!(s, "{:<fw$}  {:>6}  {:>6}  {:>13.1}", r.file, r.goals, r.proved, r.time);
    }
    s
}

pub fn to_json(reports: &[QueryReport]) -> String {
    serde_json::to_string_pretty(reports).expect("serializable")
}

/// The JSON report without wall-clock fields, for comparing runs.
pub fn without_timing(json: &str) -> serde_json::Value {
    fn strip(v: &mut serde_json::Value) {
        match v {
            serde_json::Value::Object(m) => {
                m.remove("time");
                m.remove("stage_times");
                m.values_mut().for_each(strip);
            }
            serde_json::Value::Array(a) => a.iter_mut().for_each(strip),
            _ => {}
        }
    }
    let mut v: serde_json::Value = serde_json::from_str(json).expect("report json");
    strip(&mut v);
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expect {
    Proved,
    NotProved,
}

#[derive(Clone, Debug, Deserialize)]
pub struct ManifestEntry {
    pub file: PathBuf,
    pub query: String,
    pub expect: Expect,
}

#[derive(Clone, Debug, Deserialize)]
pub struct Manifest {
    #[serde(rename = "entry")]
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    /// Reads a manifest; entry paths are taken relative to its directory.
    pub fn load(path: &Path) -> Result<Manifest, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut m: Manifest = toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        for e in &mut m.entries {
            e.file = dir.join(&e.file);
        }
        Ok(m)
    }

    pub fn files(&self) -> Vec<PathBuf> {
        let mut out: Vec<PathBuf> = Vec::new();
        for e in &self.entries {
            if !out.contains(&e.file) {
                out.push(e.file.clone());
            }
        }
        out
    }

    pub fn expectations(&self) -> BTreeMap<String, Expect> {
        self.entries.iter().map(|e| (e.query.clone(), e.expect)).collect()
    }
}

/// Whether a report meets its expectation. Anything but `Proved` satisfies
/// `NotProved`.
pub fn meets(r: &QueryReport, e: Expect) -> bool {
    match e {
        Expect::Proved => r.verdict == Verdict::Proved,
        Expect::NotProved => r.verdict != Verdict::Proved,
    }
}
