//! Rule 7: refutation, negation normal form for quantified facts, prenexing
//! and skolemization of leading existentials.

use std::collections::BTreeSet;

use super::NormalGoal;
use crate::check::Program;
use crate::term::{fresh_name, BinOp, Quantifier, Term, TermKind, UnOp};
use crate::types::Type;

pub fn has_quantifier(t: &Term) -> bool {
    t.any(&mut |s| matches!(s.kind, TermKind::Quant(..)))
}

pub fn prenex_skolemize(g: &mut NormalGoal, _prog: &Program) -> usize {
    let mut n = 0;
    if g.conclusion.as_bool().is_none() {
        let c = std::mem::replace(&mut g.conclusion, Term::bool(false));
        g.facts.push(Term::not(c));
        n += 1;
    }
    let mut names = g.used_names();
    let old = std::mem::take(&mut g.facts);
    let mut facts = Vec::new();
    for f in old {
        let out = prenex_fact(&f, &mut g.vars, &mut names);
        if out.len() != 1 || out[0] != f {
            n += 1;
        }
        facts.extend(out);
    }
    g.facts = facts;
    n
}

/// Normalizes one fact; may split it and add skolem constants to `vars`.
pub fn prenex_fact(f: &Term, vars: &mut Vec<(String, Type)>, names: &mut BTreeSet<String>) -> Vec<Term> {
    if !has_quantifier(f) {
        return split_qf(f);
    }
    let f = lift_quantified_conditions(f);
    let mut out = Vec::new();
    for part in split(nnf(&f, true)) {
        let mut avoid: BTreeSet<String> = vars.iter().map(|(v, _)| v.clone()).collect();
        avoid.extend(part.free_vars());
        let part = uniquify(&part, &mut avoid);
        let (prefix, mut matrix) = pull(&part);
        let mut rest = prefix.as_slice();
        while let Some(((Quantifier::Exists, v, ty), tail)) = rest.split_first() {
            let sk = fresh_name(v, names);
            names.insert(sk.clone());
            vars.push((sk.clone(), ty.clone()));
            matrix = matrix.subst1(v, &Term::var(sk, ty.clone()));
            rest = tail;
        }
        if rest.is_empty() {
            // Skolemizing may expose conjunctions or further quantifiers.
            if has_quantifier(&matrix) && !prefix.is_empty() {
                out.extend(prenex_fact(&matrix, vars, names));
            } else {
                out.extend(split_qf(&matrix));
            }
        } else {
            out.push(rebuild(rest, matrix));
        }
    }
    out
}

/// Moves if-then-else terms whose condition is quantified up to formula
/// level: an atom `A[if c then x else y]` becomes `(c -> A[x]) && (!c -> A[y])`.
fn lift_quantified_conditions(t: &Term) -> Term {
    use TermKind as K;
    match &t.kind {
        K::Unary(UnOp::Not, a) => Term::not(lift_quantified_conditions(a)),
        K::Binary(op @ (BinOp::And | BinOp::Or | BinOp::Implies | BinOp::Iff), a, b) => {
            Term::binary(*op, lift_quantified_conditions(a), lift_quantified_conditions(b))
        }
        K::Binary(op @ (BinOp::Eq | BinOp::Ne), a, b) if a.ty == Type::Bool => {
            Term::binary(*op, lift_quantified_conditions(a), lift_quantified_conditions(b))
        }
        K::Ite(c, a, b) if t.ty == Type::Bool => Term::ite(
            lift_quantified_conditions(c),
            lift_quantified_conditions(a),
            lift_quantified_conditions(b),
        ),
        K::Quant(q, v, ty, bound, body) => Term::new(
            Type::Bool,
            K::Quant(*q, v.clone(), ty.clone(), bound.clone(), Box::new(lift_quantified_conditions(body))),
        ),
        _ => {
            let mut found = None;
            t.visit(&mut |s| {
                if found.is_none() {
                    if let K::Ite(c, ..) = &s.kind {
                        if has_quantifier(c) {
                            found = Some(s.clone());
                        }
                    }
                }
            });
            let Some(ite) = found else { return t.clone() };
            let K::Ite(c, x, y) = &ite.kind else { unreachable!() };
            let c = lift_quantified_conditions(c);
            Term::and(
                Term::implies(c.clone(), lift_quantified_conditions(&t.replace(&ite, x))),
                Term::implies(Term::not(c), lift_quantified_conditions(&t.replace(&ite, y))),
            )
        }
    }
}

/// Splits a quantifier-free fact into the conjuncts it implies.
fn split_qf(t: &Term) -> Vec<Term> {
    use TermKind as K;
    match &t.kind {
        K::Binary(BinOp::And, a, b) => {
            let mut v = split_qf(a);
            v.extend(split_qf(b));
            v
        }
        K::Unary(UnOp::Not, a) => match &a.kind {
            K::Unary(UnOp::Not, b) => split_qf(b),
            K::Binary(BinOp::Or, b, c) => {
                let mut v = split_qf(&Term::not((**b).clone()));
                v.extend(split_qf(&Term::not((**c).clone())));
                v
            }
            K::Binary(BinOp::Implies, b, c) => {
                let mut v = split_qf(b);
                v.extend(split_qf(&Term::not((**c).clone())));
                v
            }
            _ => vec![t.clone()],
        },
        _ => vec![t.clone()],
    }
}

fn rebuild(prefix: &[(Quantifier, String, Type)], matrix: Term) -> Term {
    prefix.iter().rev().fold(matrix, |body, (q, v, ty)| {
        Term::new(Type::Bool, TermKind::Quant(*q, v.clone(), ty.clone(), None, Box::new(body)))
    })
}

fn negate(t: &Term, pos: bool) -> Term {
    if pos {
        t.clone()
    } else {
        Term::not(t.clone())
    }
}

/// Negation normal form, applied only where quantifiers occur.
pub fn nnf(t: &Term, pos: bool) -> Term {
    if !has_quantifier(t) {
        return negate(t, pos);
    }
    use TermKind as K;
    match &t.kind {
        K::Unary(UnOp::Not, a) => nnf(a, !pos),
        K::Binary(op, a, b) => match (op, pos) {
            (BinOp::And, true) | (BinOp::Or, false) => Term::and(nnf(a, pos), nnf(b, pos)),
            (BinOp::Or, true) | (BinOp::And, false) => Term::or(nnf(a, pos), nnf(b, pos)),
            (BinOp::Implies, true) => {
                if has_quantifier(a) {
                    Term::or(nnf(a, false), nnf(b, true))
                } else {
                    Term::implies((**a).clone(), nnf(b, true))
                }
            }
            (BinOp::Implies, false) => Term::and(nnf(a, true), nnf(b, false)),
            (BinOp::Iff, _) | (BinOp::Eq, _) if a.ty == Type::Bool => nnf(
                &Term::and(
                    Term::implies((**a).clone(), (**b).clone()),
                    Term::implies((**b).clone(), (**a).clone()),
                ),
                pos,
            ),
            (BinOp::Ne, _) if a.ty == Type::Bool => nnf(&Term::iff((**a).clone(), (**b).clone()), !pos),
            _ => negate(t, pos),
        },
        K::Ite(c, a, b) if t.ty == Type::Bool => nnf(
            &Term::and(
                Term::implies((**c).clone(), (**a).clone()),
                Term::implies(Term::not((**c).clone()), (**b).clone()),
            ),
            pos,
        ),
        K::Quant(q, v, ty, None, body) => {
            let q = match (q, pos) {
                (q, true) => *q,
                (Quantifier::Forall, false) => Quantifier::Exists,
                (Quantifier::Exists, false) => Quantifier::Forall,
            };
            Term::new(Type::Bool, K::Quant(q, v.clone(), ty.clone(), None, Box::new(nnf(body, pos))))
        }
        _ => negate(t, pos),
    }
}

/// Splits top-level conjunctions, distributing quantified implications over
/// conjunctive conclusions.
fn split(t: Term) -> Vec<Term> {
    match t.kind {
        TermKind::Binary(BinOp::And, a, b) => {
            let mut v = split(*a);
            v.extend(split(*b));
            v
        }
        TermKind::Binary(BinOp::Implies, a, b) if has_quantifier(&b) => {
            let parts = split(*b);
            if parts.len() == 1 {
                vec![Term::implies(*a, parts.into_iter().next().unwrap())]
            } else {
                parts.into_iter().flat_map(|p| split(Term::implies((*a).clone(), p))).collect()
            }
        }
        kind => vec![Term::new(t.ty, kind)],
    }
}

/// Renames pullable binders so they are pairwise distinct and distinct from
/// every name in `avoid`.
fn uniquify(t: &Term, avoid: &mut BTreeSet<String>) -> Term {
    use TermKind as K;
    match &t.kind {
        K::Quant(q, v, ty, None, body) => {
            let (v2, body) = if avoid.contains(v) {
                let mut all = avoid.clone();
                body.all_names(&mut all);
                let v2 = fresh_name(v, &all);
                let b = body.subst1(v, &Term::var(v2.clone(), ty.clone()));
                (v2, b)
            } else {
                (v.clone(), (**body).clone())
            };
            avoid.insert(v2.clone());
            let body = uniquify(&body, avoid);
            Term::new(Type::Bool, K::Quant(*q, v2, ty.clone(), None, Box::new(body)))
        }
        K::Binary(op @ (BinOp::And | BinOp::Or), a, b) => {
            let a = uniquify(a, avoid);
            let b = uniquify(b, avoid);
            Term::binary(*op, a, b)
        }
        K::Binary(BinOp::Implies, a, b) if !has_quantifier(a) => {
            let b = uniquify(b, avoid);
            Term::implies((**a).clone(), b)
        }
        _ => t.clone(),
    }
}

type Prefix = Vec<(Quantifier, String, Type)>;

/// Pulls quantifiers out through conjunction, disjunction and the
/// conclusion of quantifier-free implications. Binders must be unique.
fn pull(t: &Term) -> (Prefix, Term) {
    use TermKind as K;
    match &t.kind {
        K::Quant(q, v, ty, None, body) => {
            let (mut p, m) = pull(body);
            p.insert(0, (*q, v.clone(), ty.clone()));
            (p, m)
        }
        K::Binary(op @ (BinOp::And | BinOp::Or), a, b) => {
            let (mut pa, ma) = pull(a);
            let (pb, mb) = pull(b);
            pa.extend(pb);
            (pa, Term::binary(*op, ma, mb))
        }
        K::Binary(BinOp::Implies, a, b) if !has_quantifier(a) => {
            let (p, m) = pull(b);
            (p, Term::implies((**a).clone(), m))
        }
        _ => (Vec::new(), t.clone()),
    }
}
