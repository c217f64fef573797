use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};

use osv::prover::{load, prove_all, ProverConfig};
use osv::report::{meets, render_table, to_json, Expect, Manifest};
use osv::smt::locate_solver;

#[derive(Parser)]
#[command(name = "osv", version, about = "Prove queries over kernel data-structure specifications")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Prove the queries in the given files.
    Prove(ProveArgs),
}

#[derive(clap::Args)]
struct ProveArgs {
    /// Specification files, checked together.
    files: Vec<PathBuf>,
    /// Corpus manifest listing files, queries and expected verdicts.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Only run these queries.
    #[arg(long = "query")]
    queries: Vec<String>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Per-query timeout in seconds.
    #[arg(long, default_value_t = 60.0)]
    timeout: f64,
    /// Per-check solver timeout in milliseconds.
    #[arg(long, default_value_t = 2000)]
    smt_timeout_ms: u64,
    #[arg(long, default_value_t = 2)]
    gen_cutoff: u32,
    /// Instantiations allowed per graph node.
    #[arg(long, default_value_t = 200)]
    inst_cap: usize,
    /// Print each normalized goal.
    #[arg(long)]
    dump_normal: bool,
    /// Print the instantiation trace as JSON lines.
    #[arg(long)]
    dump_insts: bool,
    /// Write each SMT script to this directory.
    #[arg(long)]
    dump_smt: Option<PathBuf>,
    /// Write the reports as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Solver executable (default: $OSV_SOLVER, then `z3`).
    #[arg(long)]
    solver: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match cli.cmd {
        Cmd::Prove(a) => prove_cmd(a),
    }
}

fn prove_cmd(a: ProveArgs) -> ExitCode {
    let manifest = match a.manifest.as_deref().map(Manifest::load).transpose() {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let mut files = a.files.clone();
    if let Some(m) = &manifest {
        for f in m.files() {
            if !files.contains(&f) {
                files.push(f);
            }
        }
    }
    if files.is_empty() {
        eprintln!("error: no input files");
        return ExitCode::from(2);
    }
    let prog = match load(&files) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    let expect = manifest.as_ref().map(|m| m.expectations()).unwrap_or_default();
    let mut goals = Vec::new();
    match &manifest {
        Some(m) if a.files.is_empty() => {
            for e in &m.entries {
                match prog.goal(&e.query) {
                    Some(g) => goals.push(g),
                    None => {
                        eprintln!("error: manifest query `{}` not found", e.query);
                        return ExitCode::from(2);
                    }
                }
            }
        }
        _ => goals.extend(prog.goals.iter()),
    }
    if !a.queries.is_empty() {
        for q in &a.queries {
            if prog.goal(q).is_none() {
                eprintln!("error: no query named `{q}`");
                return ExitCode::from(2);
            }
        }
        goals.retain(|g| a.queries.contains(&g.name));
    }

    let mut cfg = ProverConfig::new(locate_solver(a.solver.as_deref()));
    cfg.query_timeout = Duration::from_secs_f64(a.timeout.max(0.001));
    cfg.smt_timeout = Duration::from_millis(a.smt_timeout_ms.max(1));
    cfg.inst.gen_cutoff = a.gen_cutoff;
    cfg.inst.node_cap = a.inst_cap;

    let results = prove_all(&prog, &goals, &cfg, a.jobs);
    if let Some(dir) = &a.dump_smt {
        if let Err(e) = std::fs::create_dir_all(dir) {
            eprintln!("error: {}: {e}", dir.display());
            return ExitCode::from(3);
        }
    }
    let mut internal = false;
    for (r, art) in &results {
        if a.dump_normal {
            if let Some(n) = &art.normal {
                println!("{}", n.to_text());
            }
        }
        if a.dump_insts {
            if let Some(o) = &art.outcome {
                print!("{}", o.trace_jsonl());
            }
        }
        if let (Some(dir), Some(s)) = (&a.dump_smt, &art.script) {
            if let Err(e) = std::fs::write(dir.join(format!("{}.smt2", r.query)), s) {
                eprintln!("error: {e}");
                internal = true;
            }
        }
    }
    let reports: Vec<_> = results.into_iter().map(|(r, _)| r).collect();
    print!("{}", render_table(&reports));
    if let Some(p) = &a.json {
        if let Err(e) = std::fs::write(p, to_json(&reports)) {
            eprintln!("error: {}: {e}", p.display());
            return ExitCode::from(3);
        }
    }
    let mut failed = false;
    for r in &reports {
        if r.verdict == osv::prover::Verdict::Error {
            eprintln!("{}: {}", r.query, r.message.as_deref().unwrap_or("internal error"));
            internal = true;
        }
        let e = expect.get(&r.query).copied().unwrap_or(Expect::Proved);
        if !meets(r, e) {
            failed = true;
        }
    }
    if internal {
        ExitCode::from(3)
    } else if failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
