//! Conditions of subterms and the indexed occurrences inside a fact.

use std::collections::BTreeSet;

use crate::atoms::decompose_atomic;
use crate::term::{BinOp, Term, TermKind};
use crate::types::Type;

/// Conditions of every subterm satisfying `pred`, relative to `t`. Most
/// recent condition first.
pub fn subterm_conditions(t: &Term, pred: &mut dyn FnMut(&Term) -> bool) -> Vec<(Term, Vec<Term>)> {
    let mut out = Vec::new();
    walk(t, &mut Vec::new(), &mut BTreeSet::new(), &mut |s, cs, _| {
        if pred(s) {
            out.push((s.clone(), cs.iter().rev().cloned().collect()));
        }
    });
    out
}

/// Pre-order walk passing the conditions (innermost last) and the names bound
/// by quantifiers inside `t` above the current subterm.
pub fn walk(
    t: &Term,
    cs: &mut Vec<Term>,
    bound: &mut BTreeSet<String>,
    f: &mut dyn FnMut(&Term, &[Term], &BTreeSet<String>),
) {
    f(t, cs, bound);
    match &t.kind {
        TermKind::Ite(c, a, b) => {
            walk(c, cs, bound, f);
            cs.push((**c).clone());
            walk(a, cs, bound, f);
            cs.pop();
            cs.push(Term::not((**c).clone()));
            walk(b, cs, bound, f);
            cs.pop();
        }
        TermKind::Binary(BinOp::Implies, c, b) => {
            walk(c, cs, bound, f);
            cs.push((**c).clone());
            walk(b, cs, bound, f);
            cs.pop();
        }
        TermKind::Quant(_, v, _, _, _) | TermKind::Let(v, ..) => {
            let fresh = bound.insert(v.clone());
            for c in t.children() {
                walk(c, cs, bound, f);
            }
            if fresh {
                bound.remove(v);
            }
        }
        _ => {
            for c in t.children() {
                walk(c, cs, bound, f);
            }
        }
    }
}

/// Splits conjunctions and keeps only conditions that mention none of
/// `banned`.
pub fn usable_conditions(cs: &[Term], banned: &BTreeSet<String>) -> Vec<Term> {
    let mut out = Vec::new();
    for c in cs {
        for p in c.conjuncts() {
            if !p.free_vars().iter().any(|v| banned.contains(v)) && !out.contains(p) {
                out.push(p.clone());
            }
        }
    }
    out
}

/// An `a[e]`, `m[e]` or `indom(e, m)` whose collection `base` is a
/// generalized atomic term.
#[derive(Clone, Debug)]
pub struct Occurrence {
    pub base: Term,
    pub index: Term,
    /// Conditions relative to the whole fact, innermost first.
    pub conds: Vec<Term>,
    /// Quantified names in scope at the occurrence (excluding the fact's
    /// outermost variable, which the caller handles).
    pub bound: BTreeSet<String>,
    pub term: Term,
}

pub fn occurrences(t: &Term) -> Vec<Occurrence> {
    let mut out = Vec::new();
    walk(t, &mut Vec::new(), &mut BTreeSet::new(), &mut |s, cs, bound| {
        let (base, index) = match &s.kind {
            TermKind::Index(a, i) => (a, i),
            TermKind::Get(m, k) => (m, k),
            TermKind::Indom(k, m) => (m, k),
            _ => return,
        };
        if decompose_atomic(base).is_some() {
            out.push(Occurrence {
                base: (**base).clone(),
                index: (**index).clone(),
                conds: cs.iter().rev().cloned().collect(),
                bound: bound.clone(),
                term: s.clone(),
            });
        }
    });
    out
}

/// Every generalized atomic subterm of sequence or map type.
pub fn collection_atoms(t: &Term) -> Vec<(Term, BTreeSet<String>)> {
    let mut out = Vec::new();
    walk(t, &mut Vec::new(), &mut BTreeSet::new(), &mut |s, _, bound| {
        if matches!(s.ty, Type::Seq(_) | Type::Map(..)) && decompose_atomic(s).is_some() {
            out.push((s.clone(), bound.clone()));
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::printer::term_to_string;

    #[test]
    fn implication_and_ite_conditions() {
        let a = Term::var("a", Type::seq(Type::Int));
        let i = Term::var("i", Type::Int);
        let k = Term::var("k", Type::Int);
        let guard = Term::lt(i.clone(), k.clone());
        let body = Term::implies(guard.clone(), Term::ne(Term::index(a.clone(), i.clone()), Term::index(a.clone(), k)));
        let found = subterm_conditions(&body, &mut |s| *s == Term::index(a.clone(), i.clone()));
        assert_eq!(found[0].1, vec![guard]);
        let c = Term::var("c", Type::Bool);
        let t = Term::ite(c.clone(), Term::var("x", Type::Int), Term::var("y", Type::Int));
        let found = subterm_conditions(&t, &mut |s| s.as_var() == Some("y"));
        assert_eq!(term_to_string(&found[0].1[0]), "!c");
        let found = subterm_conditions(&t, &mut |s| *s == t);
        assert!(found[0].1.is_empty());
    }
}
