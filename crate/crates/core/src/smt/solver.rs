//! Driving the external solver: one-shot checks and the persistent process
//! used as a consistency oracle.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::time::{Duration, Instant};

use wait_timeout::ChildExt;

use super::encode::{encode_term, EncodingTable};
use crate::error::{Error, Result};
use crate::instantiate::Consistency;
use crate::normalize::NormalGoal;
use crate::term::Term;

pub const SOLVER_ENV: &str = "OSV_SOLVER";

/// Solver path from the flag, then `OSV_SOLVER`, then `z3` on the path.
pub fn locate_solver(flag: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    match std::env::var_os(SOLVER_ENV) {
        Some(p) if !p.is_empty() => PathBuf::from(p),
        _ => PathBuf::from("z3"),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolverVerdict {
    Unsat,
    Sat { model: String },
    Unknown { reason: String },
    Timeout,
}

#[derive(Clone, Debug)]
pub struct SolverRun {
    pub verdict: SolverVerdict,
    pub elapsed: Duration,
}

fn spawn(solver: &Path) -> Result<Child> {
    Command::new(solver)
        .arg("-in")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| Error::Solver(format!("cannot run `{}`: {e}", solver.display())))
}

/// Runs a script ending in `(check-sat)` in a fresh process, killing it at
/// `timeout`. A model is requested when the answer is `sat`.
pub fn run_solver(solver: &Path, script: &str, timeout: Duration) -> Result<SolverRun> {
    let start = Instant::now();
    let mut child = spawn(solver)?;
    let mut stdin = child.stdin.take().expect("piped");
    let stdout = child.stdout.take().expect("piped");
    let ms = timeout.as_millis().max(1);
    let input = format!("(set-option :timeout {ms})\n{script}(get-model)\n(exit)\n");
    // The solver may stop reading early (e.g. when killed); write errors then
    // surface as a missing verdict.
    let writer = std::thread::spawn(move || {
        let _ = stdin.write_all(input.as_bytes());
    });
    let reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = BufReader::new(stdout).read_to_string(&mut s);
        s
    });
    let status = child.wait_timeout(timeout + Duration::from_millis(200))?;
    if status.is_none() {
        let _ = child.kill();
        let _ = child.wait();
        let _ = writer.join();
        let _ = reader.join();
        return Ok(SolverRun { verdict: SolverVerdict::Timeout, elapsed: start.elapsed() });
    }
    let _ = writer.join();
    let out = reader.join().unwrap_or_default();
    let elapsed = start.elapsed();
    let mut lines = out.lines().filter(|l| !l.trim().is_empty());
    let verdict = match lines.next().map(str::trim) {
        Some("unsat") => SolverVerdict::Unsat,
        Some("sat") => SolverVerdict::Sat { model: lines.collect::<Vec<_>>().join("\n") },
        Some("unknown") if elapsed >= timeout => SolverVerdict::Timeout,
        Some("unknown") => SolverVerdict::Unknown { reason: "solver returned unknown".into() },
        Some(other) => return Err(Error::Solver(format!("unexpected reply: {other}"))),
        None => return Err(Error::Solver("no reply".into())),
    };
    Ok(SolverRun { verdict, elapsed })
}

const DONE: &str = "osv-done";

/// A long-running solver process. The current facts are asserted at the
/// base level; each check runs in its own push/pop scope.
pub struct SolverOracle {
    path: PathBuf,
    timeout: Duration,
    proc: Option<(Child, ChildStdin, BufReader<ChildStdout>)>,
    base: EncodingTable,
    /// Commands that rebuild the base level after a restart.
    base_script: String,
    pub checks: usize,
    pub pruned: usize,
}

impl SolverOracle {
    pub fn new(path: PathBuf, timeout: Duration) -> SolverOracle {
        SolverOracle {
            path,
            timeout,
            proc: None,
            base: EncodingTable::default(),
            base_script: String::new(),
            checks: 0,
            pruned: 0,
        }
    }

    fn send(&mut self, cmds: &str) -> Result<Vec<String>> {
        if self.proc.is_none() {
            let mut child = spawn(&self.path)?;
            let mut stdin = child.stdin.take().expect("piped");
            let stdout = BufReader::new(child.stdout.take().expect("piped"));
            let ms = self.timeout.as_millis().max(1);
            writeln!(stdin, "(set-option :timeout {ms})\n{}", self.base_script)?;
            self.proc = Some((child, stdin, stdout));
        }
        let (_, stdin, stdout) = self.proc.as_mut().unwrap();
        writeln!(stdin, "{cmds}\n(echo \"{DONE}\")")?;
        stdin.flush()?;
        let mut out = Vec::new();
        loop {
            let mut line = String::new();
            if stdout.read_line(&mut line)? == 0 {
                return Err(Error::Solver("solver exited".into()));
            }
            let line = line.trim();
            if line == DONE {
                return Ok(out);
            }
            if !line.is_empty() {
                out.push(line.to_string());
            }
        }
    }

    fn restart(&mut self) {
        if let Some((mut c, ..)) = self.proc.take() {
            let _ = c.kill();
            let _ = c.wait();
        }
    }

    fn check(&mut self, conds: &[Term]) -> Result<bool> {
        let mut table = self.base.clone();
        let enc = conds.iter().map(|c| encode_term(c, &mut table)).collect::<Result<Vec<_>>>()?;
        let extra = table.difference(&self.base);
        let mut cmds = String::from("(push 1)\n");
        cmds.push_str(&extra.declarations());
        for l in extra.length_facts() {
            cmds.push_str(&format!("(assert {l})\n"));
        }
        for e in enc {
            cmds.push_str(&format!("(assert {e})\n"));
        }
        cmds.push_str("(check-sat)\n(pop 1)");
        let reply = self.send(&cmds)?;
        match reply.iter().find(|l| matches!(l.as_str(), "sat" | "unsat" | "unknown")) {
            Some(v) => Ok(v != "unsat"),
            None => Err(Error::Solver(format!("unexpected reply: {}", reply.join(" ")))),
        }
    }
}

impl Drop for SolverOracle {
    fn drop(&mut self) {
        if let Some((mut c, mut stdin, _)) = self.proc.take() {
            let _ = writeln!(stdin, "(exit)");
            drop(stdin);
            if c.wait_timeout(Duration::from_millis(200)).ok().flatten().is_none() {
                let _ = c.kill();
                let _ = c.wait();
            }
        }
    }
}

impl Consistency for SolverOracle {
    fn set_facts(&mut self, _goal: &NormalGoal, facts: &[Term]) {
        let mut table = EncodingTable::default();
        let mut asserts = Vec::new();
        for f in facts {
            match encode_term(f, &mut table) {
                Ok(e) => asserts.push(e),
                Err(e) => log::warn!("fact left out of consistency checks: {e}"),
            }
        }
        let mut s = table.declarations();
        for l in table.length_facts() {
            s.push_str(&format!("(assert {l})\n"));
        }
        for a in asserts {
            s.push_str(&format!("(assert {a})\n"));
        }
        self.base = table;
        self.base_script = s;
        // Start over: the new base level replaces everything.
        if self.proc.is_some() {
            let cmds = format!("(reset)\n(set-option :timeout {})\n{}", self.timeout.as_millis().max(1), self.base_script);
            if let Err(e) = self.send(&cmds) {
                log::warn!("solver reset failed: {e}");
                self.restart();
            }
        }
    }

    fn consistent(&mut self, conds: &[Term]) -> bool {
        if conds.is_empty() {
            return true;
        }
        self.checks += 1;
        match self.check(conds) {
            Ok(true) => true,
            Ok(false) => {
                self.pruned += 1;
                false
            }
            Err(e) => {
                log::warn!("consistency check failed, keeping instantiation: {e}");
                self.restart();
                true
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Type;

    fn z3() -> Option<PathBuf> {
        let p = locate_solver(None);
        Command::new(&p).arg("-version").output().ok().map(|_| p)
    }

    #[test]
    fn one_shot_verdicts() {
        let Some(z3) = z3() else { return };
        let r = run_solver(&z3, "(assert false)\n(check-sat)\n", Duration::from_secs(5)).unwrap();
        assert_eq!(r.verdict, SolverVerdict::Unsat);
        let s = "(declare-fun x () Int)\n(assert (> x 3))\n(check-sat)\n";
        match run_solver(&z3, s, Duration::from_secs(5)).unwrap().verdict {
            SolverVerdict::Sat { model } => assert!(model.contains("x"), "{model}"),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn missing_solver_is_an_error() {
        assert!(run_solver(Path::new("/nonexistent/z3"), "(check-sat)\n", Duration::from_secs(1)).is_err());
    }

    #[test]
    fn oracle_prunes_contradictory_offsets() {
        let Some(z3) = z3() else { return };
        let g0 = Term::var("g", Type::map(Type::Int, Type::seq(Type::Int)));
        let len = Term::length(Term::get(g0, Term::int(0)));
        let k = Term::var("k", Type::Int);
        let kl = Term::add(k.clone(), len.clone());
        let mut o = SolverOracle::new(z3, Duration::from_secs(2));
        let goal = NormalGoal {
            name: "Q".into(),
            type_params: Vec::new(),
            vars: Vec::new(),
            facts: Vec::new(),
            conclusion: Term::bool(false),
            defs: Vec::new(),
        };
        o.set_facts(&goal, &[Term::le(Term::int(0), k.clone())]);
        assert!(!o.consistent(&[Term::le(Term::int(0), kl.clone()), Term::lt(kl, len)]));
        assert!(o.consistent(&[]));
        let x = Term::var("x", Type::Int);
        assert!(o.consistent(&[Term::lt(Term::int(0), x.clone()), Term::lt(x, Term::int(10))]));
        o.set_facts(&goal, &[Term::bool(false)]);
        assert!(!o.consistent(&[Term::bool(true)]));
    }
}
