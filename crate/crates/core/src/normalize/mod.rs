//! Reduction of typed goals to the normal form: only generalized atomic
//! terms, constants, logical and arithmetic operators, if-then-else and
//! quantifiers, with equalities at primitive types only.

mod defeq;
mod prenex;
mod rules;

use std::collections::BTreeSet;

pub use defeq::apply_defining_equations;
pub use prenex::{has_quantifier, nnf, prenex_fact, prenex_skolemize};
pub use rules::{
    expand_definitions, expand_eq, expand_equalities, expand_struct_updates, expand_switch,
    expand_update, lift_lets, pattern_cond, reduce_nonbasic, reduce_term, switch_to_ite,
    unbound_quantifiers,
};

use crate::atoms::decompose_atomic;
use crate::check::{Goal, Program};
use crate::error::{Error, Result};
use crate::printer::{decl_to_string, term_to_expr, term_to_string};
use crate::syntax::{Decl, QueryDecl};
use crate::term::{BinOp, Term, TermKind};
use crate::types::Type;

pub const DEFAULT_BUDGET: usize = 200_000;

pub type Rule = fn(&mut NormalGoal, &Program) -> usize;

/// The eight rules, in numbering order.
pub const RULES: [(&str, Rule); 8] = [
    ("expand_definitions", expand_definitions),
    ("expand_struct_updates", expand_struct_updates),
    ("expand_switch", expand_switch),
    ("lift_lets", lift_lets),
    ("expand_equalities", expand_equalities),
    ("unbound_quantifiers", unbound_quantifiers),
    ("prenex_skolemize", prenex_skolemize),
    ("reduce_nonbasic", reduce_nonbasic),
];

#[derive(Clone, Debug, PartialEq)]
pub struct NormalGoal {
    pub name: String,
    pub type_params: Vec<String>,
    /// Declared variables followed by introduced ones (lets, skolem constants).
    pub vars: Vec<(String, Type)>,
    pub facts: Vec<Term>,
    /// `false` once the negated conclusion has been moved into the facts.
    pub conclusion: Term,
    /// Defining equations removed from the facts, in the order they were used.
    pub defs: Vec<(Term, Term)>,
}

impl NormalGoal {
    pub fn from_goal(g: &Goal) -> NormalGoal {
        NormalGoal {
            name: g.name.clone(),
            type_params: g.type_params.clone(),
            vars: g.vars.clone(),
            facts: g.assumes.iter().map(|(_, t)| t.clone()).collect(),
            conclusion: g.shows.clone(),
            defs: Vec::new(),
        }
    }

    pub fn var_type(&self, v: &str) -> Option<Type> {
        self.vars.iter().rev().find(|(n, _)| n == v).map(|(_, t)| t.clone())
    }

    pub fn all_names(&self) -> BTreeSet<String> {
        let mut s: BTreeSet<String> = self.vars.iter().map(|(v, _)| v.clone()).collect();
        for f in &self.facts {
            f.all_names(&mut s);
        }
        self.conclusion.all_names(&mut s);
        for (l, r) in &self.defs {
            l.all_names(&mut s);
            r.all_names(&mut s);
        }
        s
    }

    /// Declared and free names; fresh variables must avoid these.
    pub fn used_names(&self) -> BTreeSet<String> {
        let mut s: BTreeSet<String> = self.vars.iter().map(|(v, _)| v.clone()).collect();
        for f in self.facts.iter().chain([&self.conclusion]) {
            s.extend(f.free_vars());
        }
        s
    }

    pub fn quantified(&self) -> impl Iterator<Item = &Term> {
        self.facts.iter().filter(|f| has_quantifier(f))
    }

    pub fn quantifier_free(&self) -> impl Iterator<Item = &Term> {
        self.facts.iter().filter(|f| !has_quantifier(f))
    }

    pub fn size(&self) -> usize {
        self.facts.iter().map(Term::size).sum::<usize>() + self.conclusion.size()
    }

    /// Query block in the surface syntax, preceded by the dropped defining
    /// equations as comments.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (l, r) in &self.defs {
            out.push_str(&format!("// def {} := {}\n", term_to_string(l), term_to_string(r)));
        }
        let q = QueryDecl {
            name: self.name.clone(),
            type_params: self.type_params.clone(),
            vars: self.vars.iter().map(|(n, t)| (t.clone(), n.clone())).collect(),
            assumes: self.facts.iter().map(|f| (None, term_to_expr(f))).collect(),
            shows: term_to_expr(&self.conclusion),
        };
        out.push_str(&decl_to_string(&Decl::Query(q)));
        out.push('\n');
        out
    }
}

pub fn normalize(goal: &Goal, prog: &Program) -> Result<NormalGoal> {
    normalize_with(goal, prog, DEFAULT_BUDGET)
}

pub fn normalize_with(goal: &Goal, prog: &Program, budget: usize) -> Result<NormalGoal> {
    let mut g = NormalGoal::from_goal(goal);
    run(&mut g, prog, budget)?;
    Ok(g)
}

/// Runs the full pipeline on a goal in any intermediate state.
pub fn run(g: &mut NormalGoal, prog: &Program, budget: usize) -> Result<()> {
    let mut used = 0;
    for r in [expand_definitions, lift_lets, expand_struct_updates, expand_switch] {
        used += r(g, prog);
    }
    fixpoint(g, prog, budget, used, true)
}

const LOOP: [Rule; 4] = [expand_equalities, reduce_nonbasic, unbound_quantifiers, prenex_skolemize];

fn fixpoint(g: &mut NormalGoal, prog: &Program, budget: usize, mut used: usize, defs: bool) -> Result<()> {
    loop {
        let mut n = if defs { apply_defining_equations(g, prog) } else { 0 };
        for r in LOOP {
            n += r(g, prog);
        }
        used += n;
        if n == 0 {
            return Ok(());
        }
        if used > budget {
            log::debug!("normalization budget exhausted:\n{}", g.to_text());
            return Err(Error::Normalize(format!(
                "goal `{}` did not reach a normal form within {budget} rewrites",
                g.name
            )));
        }
    }
}

/// Normalizes new facts (instances of quantified facts). Skolem constants are
/// appended to `vars`.
pub fn normalize_terms(
    terms: Vec<Term>,
    vars: &mut Vec<(String, Type)>,
    prog: &Program,
    budget: usize,
) -> Result<Vec<Term>> {
    let mut g = NormalGoal {
        name: String::new(),
        type_params: Vec::new(),
        vars: std::mem::take(vars),
        facts: terms,
        conclusion: Term::bool(false),
        defs: Vec::new(),
    };
    let r = fixpoint(&mut g, prog, budget, 0, false);
    *vars = g.vars;
    r.map(|_| g.facts)
}

/// Checks the normal-form property, listing every offending subterm.
pub fn check_normal_form(g: &NormalGoal, prog: &Program) -> std::result::Result<(), Vec<String>> {
    let mut v = Vec::new();
    for f in g.facts.iter().chain([&g.conclusion]) {
        violations(f, prog, &mut v);
    }
    if v.is_empty() {
        Ok(())
    } else {
        Err(v)
    }
}

fn violations(t: &Term, prog: &Program, out: &mut Vec<String>) {
    use TermKind as K;
    if let Some(d) = decompose_atomic(t) {
        for i in &d.idx {
            violations(i, prog, out);
        }
        return;
    }
    let mut bad = |what: &str| out.push(format!("{what}: {}", term_to_string(t)));
    let ok = match &t.kind {
        K::Bool(_) | K::Int(_) => true,
        K::Default => t.ty.is_primitive(),
        K::Binary(BinOp::Eq | BinOp::Ne, a, _) if !a.ty.is_primitive() => {
            bad("equality at compound type");
            false
        }
        K::Unary(..) | K::Binary(..) | K::Convert(_) | K::Quant(_, _, _, None, _) => true,
        K::Ite(..) => t.ty.is_primitive(),
        K::App(f, _) => {
            let abstract_fn = prog.functions.get(f).is_some_and(|d| d.body.is_none());
            if !abstract_fn {
                bad("defined function");
            }
            abstract_fn
        }
        _ => false,
    };
    if !ok && !matches!(&t.kind, K::Binary(..) | K::App(..)) {
        bad(kind_name(t));
    }
    for c in t.children() {
        violations(c, prog, out);
    }
}

fn kind_name(t: &Term) -> &'static str {
    use TermKind as K;
    match &t.kind {
        K::Default => "default of compound type",
        K::Ite(..) => "if-then-else of compound type",
        K::StructLit(..) => "structure literal",
        K::Construct { .. } => "constructor",
        K::Update(..) => "update",
        K::Switch(..) => "switch",
        K::Let(..) => "let",
        K::Quant(..) => "bounded quantifier",
        K::Append(..) => "append",
        K::Cons(..) => "cons",
        K::SeqUpdate(..) => "sequence update",
        K::Slice(..) => "slice",
        K::Repeat(..) => "repeat",
        K::Remove(..) => "remove",
        K::MapEmpty => "empty map",
        K::MapUpdate(..) => "map update",
        K::Field(..) | K::Index(..) | K::Length(_) | K::Get(..) | K::Indom(..) => {
            "observation of non-atomic term"
        }
        _ => "unexpected term",
    }
}

#[cfg(test)]
mod tests;
