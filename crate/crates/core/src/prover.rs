//! Runs one query through normalization, instantiation and the solver.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::check::{Goal, Program};
use crate::error::{Error, Result};
use crate::instantiate::{instantiate_all, Config as InstConfig, Outcome};
use crate::normalize::{check_normal_form, normalize_with, NormalGoal};
use crate::smt::{encode_goal, run_solver, SolverOracle, SolverVerdict};

#[derive(Clone, Debug)]
pub struct ProverConfig {
    pub solver: PathBuf,
    pub query_timeout: Duration,
    pub smt_timeout: Duration,
    pub inst: InstConfig,
}

impl ProverConfig {
    pub fn new(solver: PathBuf) -> ProverConfig {
        ProverConfig {
            solver,
            query_timeout: Duration::from_secs(60),
            smt_timeout: Duration::from_secs(2),
            inst: InstConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Proved,
    Refuted,
    Unknown,
    Timeout,
    Divergence,
    Error,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Proved => "proved",
            Verdict::Refuted => "refuted",
            Verdict::Unknown => "unknown",
            Verdict::Timeout => "timeout",
            Verdict::Divergence => "divergence",
            Verdict::Error => "error",
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct StageTimes {
    pub normalize: f64,
    pub instantiate: f64,
    pub solve: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct QueryReport {
    pub query: String,
    pub file: String,
    pub verdict: Verdict,
    /// Wall time in seconds.
    pub time: f64,
    pub stage_times: StageTimes,
    pub rounds: usize,
    pub instances_per_round: Vec<usize>,
    pub instantiations: usize,
    pub consistency_checks: usize,
    pub pruned: usize,
    pub normal_facts: usize,
    pub normal_size: usize,
    pub final_facts: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub countermodel: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

/// Intermediate results, kept for the dump flags.
#[derive(Default)]
pub struct Artifacts {
    pub normal: Option<NormalGoal>,
    pub outcome: Option<Outcome>,
    pub script: Option<String>,
}

pub fn prove(prog: &Program, goal: &Goal, cfg: &ProverConfig) -> (QueryReport, Artifacts) {
    let start = Instant::now();
    let mut report = QueryReport {
        query: goal.name.clone(),
        file: goal.file.clone(),
        verdict: Verdict::Error,
        time: 0.0,
        stage_times: StageTimes::default(),
        rounds: 0,
        instances_per_round: Vec::new(),
        instantiations: 0,
        consistency_checks: 0,
        pruned: 0,
        normal_facts: 0,
        normal_size: 0,
        final_facts: 0,
        countermodel: None,
        message: None,
    };
    let mut art = Artifacts::default();
    if let Err(e) = run(prog, goal, cfg, start, &mut report, &mut art) {
        report.verdict = Verdict::Error;
        report.message = Some(e.to_string());
    }
    report.time = start.elapsed().as_secs_f64();
    (report, art)
}

fn run(
    prog: &Program,
    goal: &Goal,
    cfg: &ProverConfig,
    start: Instant,
    report: &mut QueryReport,
    art: &mut Artifacts,
) -> Result<()> {
    let t = Instant::now();
    let normal = normalize_with(goal, prog, cfg.inst.budget)?;
    if let Err(v) = check_normal_form(&normal, prog) {
        return Err(Error::Normalize(format!("result not in normal form: {}", v.join("; "))));
    }
    report.stage_times.normalize = t.elapsed().as_secs_f64();
    report.normal_facts = normal.facts.len();
    report.normal_size = normal.size();
    art.normal = Some(normal.clone());

    let t = Instant::now();
    let mut oracle = SolverOracle::new(cfg.solver.clone(), cfg.smt_timeout);
    let outcome = instantiate_all(&normal, prog, &mut oracle, &cfg.inst)?;
    report.stage_times.instantiate = t.elapsed().as_secs_f64();
    report.rounds = outcome.rounds;
    report.instances_per_round = outcome.per_round.clone();
    report.instantiations = outcome.insts.len();
    report.consistency_checks = oracle.checks;
    report.pruned = oracle.pruned;
    report.final_facts = outcome.goal.facts.len();
    drop(oracle);

    let script = encode_goal(&outcome.goal)?;
    art.script = Some(script.text.clone());
    let divergence = outcome.divergence.clone();
    art.outcome = Some(outcome);

    let remaining = cfg.query_timeout.saturating_sub(start.elapsed());
    if remaining.is_zero() {
        report.verdict = Verdict::Timeout;
        return Ok(());
    }
    let t = Instant::now();
    let run = run_solver(&cfg.solver, &script.text, remaining)?;
    report.stage_times.solve = t.elapsed().as_secs_f64();
    report.verdict = match run.verdict {
        SolverVerdict::Unsat => Verdict::Proved,
        // Dropped facts make a model meaningless as a counterexample.
        _ if divergence.is_some() => Verdict::Divergence,
        SolverVerdict::Sat { model } => {
            report.countermodel = Some(model);
            Verdict::Refuted
        }
        SolverVerdict::Unknown { reason } => {
            report.message = Some(reason);
            Verdict::Unknown
        }
        SolverVerdict::Timeout => Verdict::Timeout,
    };
    if let Some(d) = divergence {
        report.message.get_or_insert(d);
    }
    Ok(())
}

/// Parses and checks a set of specification files together.
pub fn load(paths: &[PathBuf]) -> std::result::Result<Program, String> {
    let mut files = Vec::new();
    for p in paths {
        let name = p.display().to_string();
        let text = std::fs::read_to_string(p).map_err(|e| format!("{name}: {e}"))?;
        files.push(crate::parser::parse_file(&name, &text).map_err(|e| e.with_file(&name))?);
    }
    Program::from_sources(&files)
}

/// Proves `goals` on `jobs` worker threads; results keep the input order.
pub fn prove_all(prog: &Program, goals: &[&Goal], cfg: &ProverConfig, jobs: usize) -> Vec<(QueryReport, Artifacts)> {
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Mutex;
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<(QueryReport, Artifacts)>>> = goals.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..jobs.max(1).min(goals.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(g) = goals.get(i) else { break };
                log::info!("proving {}", g.name);
                let r = prove(prog, g, cfg);
                *slots[i].lock().unwrap() = Some(r);
            });
        }
    });
    slots.into_iter().map(|m| m.into_inner().unwrap().expect("every goal ran")).collect()
}
