//! Rewriting rules over whole goals. Every function returns the number of
//! rewrites it performed.

use std::collections::{BTreeMap, BTreeSet};

use super::NormalGoal;
use crate::check::Program;
use crate::term::{fresh_name, BinOp, Bound, PathStep, Pattern, Quantifier, Term, TermKind};
use crate::types::{Symbols, Type};

fn each_term(g: &mut NormalGoal, f: &mut dyn FnMut(&Term) -> Term) {
    for t in g.facts.iter_mut() {
        *t = f(t);
    }
    g.conclusion = f(&g.conclusion);
}

/// Rule 1: inline every defined function and predicate.
pub fn expand_definitions(g: &mut NormalGoal, prog: &Program) -> usize {
    let mut n = 0;
    each_term(g, &mut |t| expand_calls(t, prog, &mut n));
    n
}

fn expand_calls(t: &Term, prog: &Program, n: &mut usize) -> Term {
    t.rewrite_bottom_up(&mut |t| {
        if let TermKind::App(f, args) = &t.kind {
            if let Some(def) = prog.functions.get(f) {
                if let Some(body) = &def.body {
                    *n += 1;
                    let map: BTreeMap<String, Term> = def
                        .params
                        .iter()
                        .map(|(p, _)| p.clone())
                        .zip(args.iter().cloned())
                        .collect();
                    return expand_calls(&body.subst(&map), prog, &mut *n);
                }
            }
        }
        t
    })
}

/// Rule 2: deep updates become structure literals and single-level
/// sequence/map updates.
pub fn expand_struct_updates(g: &mut NormalGoal, prog: &Program) -> usize {
    let mut n = 0;
    each_term(g, &mut |t| {
        t.rewrite_bottom_up(&mut |t| match t.kind {
            TermKind::Update(base, path, v) => {
                n += 1;
                expand_update(*base, &path, *v, &prog.sym)
            }
            _ => t,
        })
    });
    n
}

pub fn expand_update(base: Term, path: &[PathStep], v: Term, sym: &Symbols) -> Term {
    let Some((step, rest)) = path.split_first() else {
        return v;
    };
    let ty = base.ty.clone();
    match (step, &ty.clone()) {
        (PathStep::Field(f), Type::Struct(s)) => {
            let decl = &sym.structs[s];
            let fields = decl
                .fields
                .iter()
                .map(|(g, gt)| {
                    let old = Term::field(base.clone(), g.clone(), gt.clone());
                    let new = if g == f { expand_update(old, rest, v.clone(), sym) } else { old };
                    (g.clone(), new)
                })
                .collect();
            Term::new(ty, TermKind::StructLit(s.clone(), fields))
        }
        (PathStep::Index(i), Type::Seq(_)) => {
            let inner = expand_update(Term::index(base.clone(), i.clone()), rest, v, sym);
            Term::new(ty, TermKind::SeqUpdate(Box::new(i.clone()), Box::new(inner), Box::new(base)))
        }
        (PathStep::Index(k), Type::Map(..)) => {
            let inner = expand_update(Term::get(base.clone(), k.clone()), rest, v, sym);
            Term::new(ty, TermKind::MapUpdate(Box::new(k.clone()), Box::new(inner), Box::new(base)))
        }
        _ => panic!("ill-typed update path on `{ty}`"),
    }
}

/// Rule 3: switch becomes an if-then-else chain.
pub fn expand_switch(g: &mut NormalGoal, prog: &Program) -> usize {
    let mut n = 0;
    each_term(g, &mut |t| {
        t.rewrite_bottom_up(&mut |t| match t.kind {
            TermKind::Switch(s, cases, default) => {
                n += 1;
                switch_to_ite(&s, &cases, default.map(|d| *d), &prog.sym)
            }
            _ => t,
        })
    });
    n
}

pub fn switch_to_ite(s: &Term, cases: &[(Pattern, Term)], default: Option<Term>, sym: &Symbols) -> Term {
    let mut arms = Vec::new();
    let mut last = None;
    for (p, body) in cases {
        let mut binds = BTreeMap::new();
        let c = pattern_cond(p, s, sym, &mut binds);
        let body = body.subst(&binds);
        if p.is_irrefutable() {
            last = Some(body);
            break;
        }
        arms.push((c, body));
    }
    // Without a default the cases are exhaustive, so the last one needs no test.
    let last = match (last, default) {
        (Some(b), _) => b,
        (None, Some(d)) => d,
        (None, None) => arms.pop().expect("switch without cases").1,
    };
    arms.into_iter().rev().fold(last, |acc, (c, b)| Term::ite(c, b, acc))
}

/// Condition under which `p` matches `s`; binds pattern variables to accessors.
pub fn pattern_cond(p: &Pattern, s: &Term, sym: &Symbols, binds: &mut BTreeMap<String, Term>) -> Term {
    let mut conds = Vec::new();
    pattern_conds(p, s, sym, binds, &mut conds);
    Term::and_all(conds)
}

fn pattern_conds(p: &Pattern, s: &Term, sym: &Symbols, binds: &mut BTreeMap<String, Term>, out: &mut Vec<Term>) {
    match p {
        Pattern::Wild => {}
        Pattern::Var(v, _) => {
            binds.insert(v.clone(), s.clone());
        }
        Pattern::Lit(t) => out.push(Term::eq(s.clone(), t.clone())),
        Pattern::Ctor { branch, args, .. } => {
            let Type::Enum(e) = &s.ty else { panic!("constructor pattern on `{}`", s.ty) };
            out.push(Term::eq(
                Term::field(s.clone(), "id", Type::Int),
                Term::int(*branch as i128),
            ));
            let params = &sym.enums[e].branches[*branch].params;
            for (a, (f, ft)) in args.iter().zip(params) {
                pattern_conds(a, &Term::field(s.clone(), f.clone(), ft.clone()), sym, binds, out);
            }
        }
        Pattern::Struct(_, fs) => {
            for (f, a) in fs {
                let ft = sym.field_type(&s.ty, f).expect("checked field");
                pattern_conds(a, &Term::field(s.clone(), f.clone(), ft), sym, binds, out);
            }
        }
    }
}

/// Rule 4: top-level lets become a fresh variable plus an equation; other
/// lets are substituted.
pub fn lift_lets(g: &mut NormalGoal, _prog: &Program) -> usize {
    let mut n = 0;
    let mut avoid = g.used_names();
    let mut facts = Vec::new();
    let old = std::mem::take(&mut g.facts);
    let mut lift = |mut t: Term, facts: &mut Vec<Term>, vars: &mut Vec<(String, Type)>, n: &mut usize| {
        while let TermKind::Let(v, rhs, body) = t.kind {
            *n += 1;
            let v2 = fresh_name(&v, &avoid);
            avoid.insert(v2.clone());
            let x = Term::var(v2.clone(), rhs.ty.clone());
            vars.push((v2, rhs.ty.clone()));
            facts.push(Term::eq(x.clone(), *rhs));
            t = body.subst1(&v, &x);
        }
        t
    };
    for f in old {
        let t = lift(f, &mut facts, &mut g.vars, &mut n);
        facts.push(t);
    }
    let c = std::mem::replace(&mut g.conclusion, Term::bool(true));
    g.conclusion = lift(c, &mut facts, &mut g.vars, &mut n);
    g.facts = facts;
    each_term(g, &mut |t| {
        t.rewrite_bottom_up(&mut |t| match t.kind {
            TermKind::Let(v, rhs, body) => {
                n += 1;
                body.subst1(&v, &rhs)
            }
            _ => t,
        })
    });
    n
}

/// Rule 5: equalities at compound types are expanded until only primitive
/// equalities remain.
pub fn expand_equalities(g: &mut NormalGoal, prog: &Program) -> usize {
    let mut n = 0;
    each_term(g, &mut |t| {
        t.rewrite_bottom_up(&mut |t| match &t.kind {
            TermKind::Binary(op @ (BinOp::Eq | BinOp::Ne), a, b) if !a.ty.is_primitive() => {
                n += 1;
                let e = expand_eq(a, b, &prog.sym);
                if *op == BinOp::Ne {
                    Term::not(e)
                } else {
                    e
                }
            }
            _ => t,
        })
    });
    n
}

pub fn expand_eq(a: &Term, b: &Term, sym: &Symbols) -> Term {
    match &a.ty {
        Type::Struct(s) => Term::and_all(sym.structs[s].fields.iter().map(|(f, ft)| {
            expand_eq(
                &Term::field(a.clone(), f.clone(), ft.clone()),
                &Term::field(b.clone(), f.clone(), ft.clone()),
                sym,
            )
        })),
        Type::Enum(e) => {
            let ida = Term::field(a.clone(), "id", Type::Int);
            let idb = Term::field(b.clone(), "id", Type::Int);
            let mut parts = vec![Term::eq(ida.clone(), idb)];
            for (i, br) in sym.enums[e].branches.iter().enumerate() {
                if br.params.is_empty() {
                    continue;
                }
                let fields = br.params.iter().map(|(f, ft)| {
                    expand_eq(
                        &Term::field(a.clone(), f.clone(), ft.clone()),
                        &Term::field(b.clone(), f.clone(), ft.clone()),
                        sym,
                    )
                });
                parts.push(Term::implies(
                    Term::eq(ida.clone(), Term::int(i as i128)),
                    Term::and_all(fields),
                ));
            }
            Term::and_all(parts)
        }
        Type::Seq(_) => {
            let i = Term::var(fresh_name("i", &names_of(&[a, b])), Type::Int);
            let body = Term::implies(
                Term::in_range(Term::int(0), i.clone(), Term::length(a.clone())),
                expand_eq(&Term::index(a.clone(), i.clone()), &Term::index(b.clone(), i.clone()), sym),
            );
            Term::and(
                Term::eq(Term::length(a.clone()), Term::length(b.clone())),
                Term::forall(i.as_var().unwrap(), Type::Int, body),
            )
        }
        Type::Map(kt, _) => {
            let k = Term::var(fresh_name("k", &names_of(&[a, b])), (**kt).clone());
            let kn = k.as_var().unwrap().to_string();
            let dom = Term::forall(
                kn.clone(),
                (**kt).clone(),
                Term::iff(Term::indom(k.clone(), a.clone()), Term::indom(k.clone(), b.clone())),
            );
            let vals = Term::forall(
                kn,
                (**kt).clone(),
                Term::implies(
                    Term::indom(k.clone(), a.clone()),
                    expand_eq(&Term::get(a.clone(), k.clone()), &Term::get(b.clone(), k), sym),
                ),
            );
            Term::and(dom, vals)
        }
        _ => Term::eq(a.clone(), b.clone()),
    }
}

fn names_of(ts: &[&Term]) -> BTreeSet<String> {
    let mut s = BTreeSet::new();
    for t in ts {
        t.all_names(&mut s);
    }
    s
}

/// Rule 6: bounded quantifiers become guarded unbounded ones.
pub fn unbound_quantifiers(g: &mut NormalGoal, _prog: &Program) -> usize {
    let mut n = 0;
    each_term(g, &mut |t| {
        t.rewrite_bottom_up(&mut |t| match t.kind {
            TermKind::Quant(q, v, ty, Some(bound), body) => {
                n += 1;
                let x = Term::var(v.clone(), ty.clone());
                let guard = match bound {
                    Bound::Range(lo, hi) => Term::in_range(*lo, x, *hi),
                    Bound::Keys(m) => Term::indom(x, *m),
                };
                let body = match q {
                    Quantifier::Forall => Term::implies(guard, *body),
                    Quantifier::Exists => Term::and(guard, *body),
                };
                Term::new(Type::Bool, TermKind::Quant(q, v, ty, None, Box::new(body)))
            }
            _ => t,
        })
    });
    n
}

/// Rule 8: basic observations over non-basic constructs are reduced using
/// if-then-else, and pushed through if-then-else, literals, constructors and
/// defaults.
pub fn reduce_nonbasic(g: &mut NormalGoal, prog: &Program) -> usize {
    let mut n = 0;
    each_term(g, &mut |t| reduce_term(t, &prog.sym, &mut n));
    n
}

pub fn reduce_term(t: &Term, sym: &Symbols, n: &mut usize) -> Term {
    t.rewrite_bottom_up(&mut |t| reduce_top(t, sym, &mut *n))
}

fn zero() -> Term {
    Term::int(0)
}

/// Reduces an observation whose arguments are already reduced.
fn reduce_top(t: Term, sym: &Symbols, n: &mut usize) -> Term {
    use TermKind as K;
    let ty = t.ty.clone();
    let out = match &t.kind {
        K::Field(x, f) => match &x.kind {
            K::Ite(c, p, q) => Term::ite(
                (**c).clone(),
                reduce_top(Term::field((**p).clone(), f.clone(), ty.clone()), sym, n),
                reduce_top(Term::field((**q).clone(), f.clone(), ty.clone()), sym, n),
            ),
            K::StructLit(_, fs) => fs.iter().find(|(g, _)| g == f).expect("field").1.clone(),
            K::Construct { branch, args, .. } => {
                if f == "id" {
                    Term::int(*branch as i128)
                } else {
                    let Type::Enum(e) = &x.ty else { unreachable!() };
                    let params = &sym.enums[e].branches[*branch].params;
                    match params.iter().position(|(g, _)| g == f) {
                        Some(i) => args[i].clone(),
                        None => Term::default_of(ty),
                    }
                }
            }
            K::Default => Term::default_of(ty),
            _ => return t,
        },
        K::Length(x) => {
            let len = |a: &Term, n: &mut usize| reduce_top(Term::length(a.clone()), sym, n);
            match &x.kind {
                K::Ite(c, p, q) => Term::ite((**c).clone(), len(p, n), len(q, n)),
                K::Default => zero(),
                K::Append(p, q) => Term::add(len(p, n), len(q, n)),
                K::Cons(_, a) => Term::add(len(a, n), Term::int(1)),
                K::SeqUpdate(_, _, a) => len(a, n),
                K::Slice(l, r, a) => slice_len(l, r, &len(a, n)),
                K::Repeat(_, k) => Term::max(zero(), (**k).clone()),
                K::Remove(_, a) => Term::max(zero(), Term::sub(len(a, n), Term::int(1))),
                _ => return t,
            }
        }
        K::Index(x, j) => {
            let j = (**j).clone();
            let idx = |a: &Term, i: Term, n: &mut usize| reduce_top(Term::index(a.clone(), i), sym, n);
            let len = |a: &Term, n: &mut usize| reduce_top(Term::length(a.clone()), sym, n);
            let dflt = Term::default_of(ty.clone());
            match &x.kind {
                K::Ite(c, p, q) => Term::ite((**c).clone(), idx(p, j.clone(), n), idx(q, j, n)),
                K::Default => dflt,
                K::Append(p, q) => {
                    let lp = len(p, n);
                    let lq = len(q, n);
                    Term::ite(
                        Term::in_range(zero(), j.clone(), lp.clone()),
                        idx(p, j.clone(), n),
                        Term::ite(
                            Term::in_range(lp.clone(), j.clone(), Term::add(lp.clone(), lq)),
                            idx(q, Term::sub(j, lp), n),
                            dflt,
                        ),
                    )
                }
                K::Cons(v, a) => Term::ite(
                    Term::eq(j.clone(), zero()),
                    (**v).clone(),
                    idx(a, Term::sub(j, Term::int(1)), n),
                ),
                K::SeqUpdate(i, v, a) => {
                    let la = len(a, n);
                    Term::ite(
                        Term::and(Term::eq(j.clone(), (**i).clone()), Term::in_range(zero(), (**i).clone(), la)),
                        (**v).clone(),
                        idx(a, j, n),
                    )
                }
                K::Slice(l, r, a) => {
                    let sl = slice_len(l, r, &len(a, n));
                    Term::ite(
                        Term::in_range(zero(), j.clone(), sl),
                        idx(a, Term::add(Term::max((**l).clone(), zero()), j), n),
                        dflt,
                    )
                }
                K::Repeat(v, k) => Term::ite(
                    Term::in_range(zero(), j, Term::max(zero(), (**k).clone())),
                    (**v).clone(),
                    dflt,
                ),
                K::Remove(k, a) => {
                    let la = len(a, n);
                    Term::ite(
                        Term::in_range(zero(), j.clone(), Term::max(zero(), Term::sub(la, Term::int(1)))),
                        Term::ite(
                            Term::lt(j.clone(), (**k).clone()),
                            idx(a, j.clone(), n),
                            idx(a, Term::add(j, Term::int(1)), n),
                        ),
                        dflt,
                    )
                }
                _ => return t,
            }
        }
        K::Get(x, k) => {
            let get = |m: &Term, n: &mut usize| reduce_top(Term::get(m.clone(), (**k).clone()), sym, n);
            match &x.kind {
                K::Ite(c, p, q) => Term::ite((**c).clone(), get(p, n), get(q, n)),
                K::Default | K::MapEmpty => Term::default_of(ty),
                K::MapUpdate(k2, v, m) => {
                    Term::ite(Term::eq((**k).clone(), (**k2).clone()), (**v).clone(), get(m, n))
                }
                _ => return t,
            }
        }
        K::Indom(k, x) => {
            let dom = |m: &Term, n: &mut usize| reduce_top(Term::indom((**k).clone(), m.clone()), sym, n);
            match &x.kind {
                K::Ite(c, p, q) => Term::ite((**c).clone(), dom(p, n), dom(q, n)),
                K::Default | K::MapEmpty => Term::bool(false),
                K::MapUpdate(k2, _, m) => Term::or(Term::eq((**k).clone(), (**k2).clone()), dom(m, n)),
                _ => return t,
            }
        }
        _ => return t,
    };
    *n += 1;
    out
}

/// `max(0, min(r, len) - max(l, 0))`
fn slice_len(l: &Term, r: &Term, len: &Term) -> Term {
    Term::max(
        zero(),
        Term::sub(Term::min(r.clone(), len.clone()), Term::max(l.clone(), zero())),
    )
}
