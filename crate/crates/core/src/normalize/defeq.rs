//! Defining equations: facts `lhs == rhs` whose left side is an atomic term
//! without indices are used as left-to-right rewrites and dropped.

use super::NormalGoal;
use crate::atoms::decompose_atomic;
use crate::check::Program;
use crate::printer::term_to_string;
use crate::term::{BinOp, Term, TermKind};

/// Head variable of an index-free atom.
fn head_var(t: &Term) -> Option<&str> {
    match &t.kind {
        TermKind::Var(v) => Some(v),
        TermKind::Field(s, _) | TermKind::Length(s) => head_var(s),
        _ => None,
    }
}

fn is_defining_lhs(t: &Term) -> bool {
    decompose_atomic(t).is_some_and(|d| d.idx.is_empty())
}

/// Orients an equation as a rewrite, if either side qualifies.
fn orient(f: &Term) -> Option<(Term, Term)> {
    let TermKind::Binary(BinOp::Eq, a, b) = &f.kind else { return None };
    let ok = |l: &Term, r: &Term| {
        is_defining_lhs(l) && !r.has_free_var(head_var(l).unwrap())
    };
    let mut best: Option<(Term, Term)> = None;
    for (l, r) in [(a, b), (b, a)] {
        if ok(l, r) {
            let better = match &best {
                None => true,
                Some((bl, _)) => term_to_string(l) < term_to_string(bl),
            };
            if better {
                best = Some(((**l).clone(), (**r).clone()));
            }
        }
    }
    best
}

fn rewrite_all(g: &mut NormalGoal, lhs: &Term, rhs: &Term) -> usize {
    let mut n = 0;
    let mut go = |t: &mut Term| {
        let u = t.replace(lhs, rhs);
        if u != *t {
            n += 1;
            *t = u;
        }
    };
    g.facts.iter_mut().for_each(&mut go);
    go(&mut g.conclusion);
    for (_, r) in g.defs.iter_mut() {
        go(r);
    }
    n
}

/// Fact that keeps the range information of a dropped atom. Enumeration tags
/// get none: the default value's tag is `default(int)`, which may lie outside
/// the branch range.
fn wf_fact(lhs: &Term, rhs: &Term) -> Option<Term> {
    match &lhs.kind {
        TermKind::Length(_) => Some(Term::le(Term::int(0), rhs.clone())),
        _ => None,
    }
}

pub fn apply_defining_equations(g: &mut NormalGoal, _prog: &Program) -> usize {
    let mut n = 0;
    let defs = g.defs.clone();
    for (l, r) in &defs {
        n += rewrite_all(g, l, r);
    }
    let old = std::mem::take(&mut g.facts);
    for f in old {
        let parts: Vec<Term> = f.conjuncts().into_iter().cloned().collect();
        if parts.len() > 1 {
            n += 1;
        }
        g.facts.extend(parts);
    }
    loop {
        let before = g.facts.len();
        g.facts.retain(|f| match &f.kind {
            TermKind::Binary(BinOp::Eq, a, b) => a != b,
            _ => true,
        });
        n += before - g.facts.len();
        let pick = g
            .facts
            .iter()
            .enumerate()
            .filter_map(|(i, f)| orient(f).map(|(l, r)| (term_to_string(&l), i, l, r)))
            .min_by(|x, y| (&x.0, x.1).cmp(&(&y.0, y.1)));
        let Some((_, i, lhs, rhs)) = pick else { break };
        g.facts.remove(i);
        n += 1 + rewrite_all(g, &lhs, &rhs);
        if let Some(w) = wf_fact(&lhs, &rhs) {
            g.facts.push(w);
        }
        g.defs.push((lhs, rhs));
    }
    n
}
