//! Typed terms.

use std::collections::{BTreeMap, BTreeSet};

use crate::types::Type;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnOp {
    Not,
    Neg,
    BitNot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    And,
    Or,
    Implies,
    Iff,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    BitAnd,
    BitOr,
    BitXor,
    Shl,
    Shr,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        use BinOp::*;
        match self {
            And => "&&",
            Or => "||",
            Implies => "->",
            Iff => "<->",
            Eq => "==",
            Ne => "!=",
            Lt => "<",
            Le => "<=",
            Gt => ">",
            Ge => ">=",
            Add => "+",
            Sub => "-",
            Mul => "*",
            Div => "/",
            Mod => "%",
            BitAnd => "&",
            BitOr => "|",
            BitXor => "^",
            Shl => "<<",
            Shr => ">>",
        }
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or | BinOp::Implies | BinOp::Iff)
    }

    pub fn is_comparison(self) -> bool {
        use BinOp::*;
        matches!(self, Eq | Ne | Lt | Le | Gt | Ge)
    }

    pub fn is_bitwise(self) -> bool {
        use BinOp::*;
        matches!(self, BitAnd | BitOr | BitXor | Shl | Shr)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantifier {
    Forall,
    Exists,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bound {
    /// `lo .. hi`, half-open.
    Range(Box<Term>, Box<Term>),
    /// Keys of a map.
    Keys(Box<Term>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PathStep {
    Field(String),
    Index(Term),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pattern {
    Wild,
    Var(String, Type),
    Lit(Term),
    Ctor {
        ctor: String,
        branch: usize,
        args: Vec<Pattern>,
    },
    /// Partial structure literal.
    Struct(String, Vec<(String, Pattern)>),
}

impl Pattern {
    pub fn bound_vars(&self, out: &mut Vec<String>) {
        match self {
            Pattern::Var(v, _) => out.push(v.clone()),
            Pattern::Ctor { args, .. } => args.iter().for_each(|p| p.bound_vars(out)),
            Pattern::Struct(_, fs) => fs.iter().for_each(|(_, p)| p.bound_vars(out)),
            Pattern::Wild | Pattern::Lit(_) => {}
        }
    }

    /// Matches every value of its type.
    pub fn is_irrefutable(&self) -> bool {
        match self {
            Pattern::Wild | Pattern::Var(..) => true,
            Pattern::Struct(_, fs) => fs.iter().all(|(_, p)| p.is_irrefutable()),
            Pattern::Lit(_) | Pattern::Ctor { .. } => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermKind {
    Var(String),
    Bool(bool),
    /// Integer literal; bit-vector literals hold their unsigned bit pattern.
    Int(i128),
    /// Designated default value of the term's type.
    Default,
    Unary(UnOp, Box<Term>),
    Binary(BinOp, Box<Term>, Box<Term>),
    Ite(Box<Term>, Box<Term>, Box<Term>),
    /// Call of a user function or predicate (defined or abstract).
    App(String, Vec<Term>),
    /// Integer/bit-vector conversion to the term's type.
    Convert(Box<Term>),
    /// Field access, including `.id` on enumerations.
    Field(Box<Term>, String),
    /// Full structure literal, fields in declaration order.
    StructLit(String, Vec<(String, Term)>),
    Construct {
        ctor: String,
        branch: usize,
        args: Vec<Term>,
    },
    /// Deep update `t{|path := v|}`.
    Update(Box<Term>, Vec<PathStep>, Box<Term>),
    Switch(Box<Term>, Vec<(Pattern, Term)>, Option<Box<Term>>),
    Let(String, Box<Term>, Box<Term>),
    Quant(Quantifier, String, Type, Option<Bound>, Box<Term>),
    Index(Box<Term>, Box<Term>),
    Length(Box<Term>),
    /// `get(k, m)`, written `m[k]`. Fields are (map, key).
    Get(Box<Term>, Box<Term>),
    /// `indom(k, m)`. Fields are (key, map).
    Indom(Box<Term>, Box<Term>),
    Append(Box<Term>, Box<Term>),
    /// `cons(x, a)`.
    Cons(Box<Term>, Box<Term>),
    /// `update(i, v, a)` on sequences.
    SeqUpdate(Box<Term>, Box<Term>, Box<Term>),
    /// `slice(l, r, a)`.
    Slice(Box<Term>, Box<Term>, Box<Term>),
    /// `repeat(x, n)`.
    Repeat(Box<Term>, Box<Term>),
    /// `remove(k, a)`.
    Remove(Box<Term>, Box<Term>),
    MapEmpty,
    /// `update(k, v, m)` on maps.
    MapUpdate(Box<Term>, Box<Term>, Box<Term>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    pub ty: Type,
    pub kind: TermKind,
}

fn bx(t: Term) -> Box<Term> {
    Box::new(t)
}

// Constructors. These never simplify; shapes are kept exactly as built.
impl Term {
    pub fn new(ty: Type, kind: TermKind) -> Term {
        Term { ty, kind }
    }

    pub fn var(name: impl Into<String>, ty: Type) -> Term {
        Term::new(ty, TermKind::Var(name.into()))
    }

    pub fn bool(b: bool) -> Term {
        Term::new(Type::Bool, TermKind::Bool(b))
    }

    pub fn int(v: i128) -> Term {
        Term::new(Type::Int, TermKind::Int(v))
    }

    /// Literal of numeric type `ty`; bit-vector values are wrapped to the width.
    pub fn lit(v: i128, ty: Type) -> Term {
        let v = match ty {
            Type::BitVec { width, .. } => wrap_bits(v, width),
            _ => v,
        };
        Term::new(ty, TermKind::Int(v))
    }

    pub fn default_of(ty: Type) -> Term {
        Term::new(ty, TermKind::Default)
    }

    pub fn not(t: Term) -> Term {
        Term::new(Type::Bool, TermKind::Unary(UnOp::Not, bx(t)))
    }

    pub fn neg(t: Term) -> Term {
        Term::new(t.ty.clone(), TermKind::Unary(UnOp::Neg, bx(t)))
    }

    pub fn binary(op: BinOp, a: Term, b: Term) -> Term {
        let ty = if op.is_logical() || op.is_comparison() {
            Type::Bool
        } else {
            a.ty.clone()
        };
        Term::new(ty, TermKind::Binary(op, bx(a), bx(b)))
    }

    pub fn and(a: Term, b: Term) -> Term {
        Term::binary(BinOp::And, a, b)
    }

    pub fn or(a: Term, b: Term) -> Term {
        Term::binary(BinOp::Or, a, b)
    }

    pub fn implies(a: Term, b: Term) -> Term {
        Term::binary(BinOp::Implies, a, b)
    }

    pub fn iff(a: Term, b: Term) -> Term {
        Term::binary(BinOp::Iff, a, b)
    }

    pub fn eq(a: Term, b: Term) -> Term {
        Term::binary(BinOp::Eq, a, b)
    }

    pub fn ne(a: Term, b: Term) -> Term {
        Term::binary(BinOp::Ne, a, b)
    }

    pub fn lt(a: Term, b: Term) -> Term {
        Term::binary(BinOp::Lt, a, b)
    }

    pub fn le(a: Term, b: Term) -> Term {
        Term::binary(BinOp::Le, a, b)
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::binary(BinOp::Add, a, b)
    }

    pub fn sub(a: Term, b: Term) -> Term {
        Term::binary(BinOp::Sub, a, b)
    }

    /// Left-nested conjunction; `true` when empty.
    pub fn and_all(ts: impl IntoIterator<Item = Term>) -> Term {
        ts.into_iter().reduce(Term::and).unwrap_or_else(|| Term::bool(true))
    }

    pub fn or_all(ts: impl IntoIterator<Item = Term>) -> Term {
        ts.into_iter().reduce(Term::or).unwrap_or_else(|| Term::bool(false))
    }

    /// `lo <= x && x < hi`
    pub fn in_range(lo: Term, x: Term, hi: Term) -> Term {
        Term::and(Term::le(lo, x.clone()), Term::lt(x, hi))
    }

    pub fn ite(c: Term, t: Term, e: Term) -> Term {
        Term::new(t.ty.clone(), TermKind::Ite(bx(c), bx(t), bx(e)))
    }

    /// `max(a, b)` as an if-then-else.
    pub fn max(a: Term, b: Term) -> Term {
        Term::ite(Term::le(b.clone(), a.clone()), a, b)
    }

    pub fn min(a: Term, b: Term) -> Term {
        Term::ite(Term::le(a.clone(), b.clone()), a, b)
    }

    pub fn field(t: Term, name: impl Into<String>, ty: Type) -> Term {
        Term::new(ty, TermKind::Field(bx(t), name.into()))
    }

    pub fn index(a: Term, i: Term) -> Term {
        let ty = a.ty.elem().cloned().expect("index of non-sequence");
        Term::new(ty, TermKind::Index(bx(a), bx(i)))
    }

    pub fn length(a: Term) -> Term {
        Term::new(Type::Int, TermKind::Length(bx(a)))
    }

    pub fn get(m: Term, k: Term) -> Term {
        let ty = match &m.ty {
            Type::Map(_, v) => (**v).clone(),
            _ => panic!("get on non-map"),
        };
        Term::new(ty, TermKind::Get(bx(m), bx(k)))
    }

    pub fn indom(k: Term, m: Term) -> Term {
        Term::new(Type::Bool, TermKind::Indom(bx(k), bx(m)))
    }

    pub fn forall(v: impl Into<String>, ty: Type, body: Term) -> Term {
        Term::new(Type::Bool, TermKind::Quant(Quantifier::Forall, v.into(), ty, None, bx(body)))
    }

    pub fn exists(v: impl Into<String>, ty: Type, body: Term) -> Term {
        Term::new(Type::Bool, TermKind::Quant(Quantifier::Exists, v.into(), ty, None, bx(body)))
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self.kind {
            TermKind::Bool(b) => Some(b),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i128> {
        match self.kind {
            TermKind::Int(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_var(&self) -> Option<&str> {
        match &self.kind {
            TermKind::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_quantified(&self) -> bool {
        matches!(self.kind, TermKind::Quant(..))
    }
}

/// Wraps `v` into `[0, 2^width)`.
pub fn wrap_bits(v: i128, width: u32) -> i128 {
    let m = 1i128 << width;
    v.rem_euclid(m)
}

// Traversal.
impl Term {
    /// Immediate subterms, in a fixed order. Quantifier bounds come before the body.
    pub fn children(&self) -> Vec<&Term> {
        use TermKind::*;
        match &self.kind {
            Var(_) | Bool(_) | Int(_) | Default | MapEmpty => vec![],
            Unary(_, a) | Convert(a) | Field(a, _) | Length(a) => vec![a],
            Binary(_, a, b)
            | Index(a, b)
            | Get(a, b)
            | Indom(a, b)
            | Append(a, b)
            | Cons(a, b)
            | Repeat(a, b)
            | Remove(a, b)
            | Let(_, a, b) => vec![a, b],
            Ite(a, b, c) | SeqUpdate(a, b, c) | Slice(a, b, c) | MapUpdate(a, b, c) => {
                vec![a, b, c]
            }
            App(_, args) | Construct { args, .. } => args.iter().collect(),
            StructLit(_, fs) => fs.iter().map(|(_, t)| t).collect(),
            Update(t, path, v) => {
                let mut out = vec![&**t];
                for s in path {
                    if let PathStep::Index(i) = s {
                        out.push(i);
                    }
                }
                out.push(v);
                out
            }
            Switch(s, cases, def) => {
                let mut out = vec![&**s];
                for (p, b) in cases {
                    pattern_terms(p, &mut out);
                    out.push(b);
                }
                if let Some(d) = def {
                    out.push(d);
                }
                out
            }
            Quant(_, _, _, bound, body) => {
                let mut out = vec![];
                match bound {
                    Some(Bound::Range(lo, hi)) => {
                        out.push(&**lo);
                        out.push(&**hi);
                    }
                    Some(Bound::Keys(m)) => out.push(&**m),
                    None => {}
                }
                out.push(body);
                out
            }
        }
    }

    /// Rebuilds the term with `f` applied to each immediate subterm (same
    /// order as [`Term::children`]). Binders are not renamed.
    pub fn map_children(&self, f: &mut dyn FnMut(&Term) -> Term) -> Term {
        use TermKind::*;
        let b = |t: &Term, f: &mut dyn FnMut(&Term) -> Term| Box::new(f(t));
        let kind = match &self.kind {
            Var(_) | Bool(_) | Int(_) | Default | MapEmpty => self.kind.clone(),
            Unary(op, a) => Unary(*op, b(a, f)),
            Convert(a) => Convert(b(a, f)),
            Field(a, n) => Field(b(a, f), n.clone()),
            Length(a) => Length(b(a, f)),
            Binary(op, x, y) => {
                let x = b(x, f);
                Binary(*op, x, b(y, f))
            }
            Index(x, y) => {
                let x = b(x, f);
                Index(x, b(y, f))
            }
            Get(x, y) => {
                let x = b(x, f);
                Get(x, b(y, f))
            }
            Indom(x, y) => {
                let x = b(x, f);
                Indom(x, b(y, f))
            }
            Append(x, y) => {
                let x = b(x, f);
                Append(x, b(y, f))
            }
            Cons(x, y) => {
                let x = b(x, f);
                Cons(x, b(y, f))
            }
            Repeat(x, y) => {
                let x = b(x, f);
                Repeat(x, b(y, f))
            }
            Remove(x, y) => {
                let x = b(x, f);
                Remove(x, b(y, f))
            }
            Let(v, x, y) => {
                let x = b(x, f);
                Let(v.clone(), x, b(y, f))
            }
            Ite(x, y, z) => {
                let x = b(x, f);
                let y = b(y, f);
                Ite(x, y, b(z, f))
            }
            SeqUpdate(x, y, z) => {
                let x = b(x, f);
                let y = b(y, f);
                SeqUpdate(x, y, b(z, f))
            }
            Slice(x, y, z) => {
                let x = b(x, f);
                let y = b(y, f);
                Slice(x, y, b(z, f))
            }
            MapUpdate(x, y, z) => {
                let x = b(x, f);
                let y = b(y, f);
                MapUpdate(x, y, b(z, f))
            }
            App(n, args) => App(n.clone(), args.iter().map(|a| f(a)).collect()),
            Construct { ctor, branch, args } => Construct {
                ctor: ctor.clone(),
                branch: *branch,
                args: args.iter().map(|a| f(a)).collect(),
            },
            StructLit(n, fs) => {
                StructLit(n.clone(), fs.iter().map(|(k, t)| (k.clone(), f(t))).collect())
            }
            Update(t, path, v) => {
                let t = b(t, f);
                let path = path
                    .iter()
                    .map(|s| match s {
                        PathStep::Index(i) => PathStep::Index(f(i)),
                        other => other.clone(),
                    })
                    .collect();
                Update(t, path, b(v, f))
            }
            Switch(s, cases, def) => {
                let s = b(s, f);
                let cases = cases
                    .iter()
                    .map(|(p, body)| {
                        let p = map_pattern_terms(p, f);
                        (p, f(body))
                    })
                    .collect();
                Switch(s, cases, def.as_ref().map(|d| b(d, f)))
            }
            Quant(q, v, ty, bound, body) => {
                let bound = bound.as_ref().map(|bd| match bd {
                    Bound::Range(lo, hi) => {
                        let lo = b(lo, f);
                        Bound::Range(lo, b(hi, f))
                    }
                    Bound::Keys(m) => Bound::Keys(b(m, f)),
                });
                Quant(*q, v.clone(), ty.clone(), bound, b(body, f))
            }
        };
        Term::new(self.ty.clone(), kind)
    }

    /// Pre-order visit of every subterm (including `self`).
    pub fn visit(&self, f: &mut dyn FnMut(&Term)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    /// Bottom-up rewrite: children first, then `f` on the rebuilt node.
    pub fn rewrite_bottom_up(&self, f: &mut dyn FnMut(Term) -> Term) -> Term {
        let t = self.map_children(&mut |c| c.rewrite_bottom_up(f));
        f(t)
    }

    pub fn any(&self, pred: &mut dyn FnMut(&Term) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        self.children().into_iter().any(|c| c.any(pred))
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        free_vars_into(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn has_free_var(&self, v: &str) -> bool {
        self.free_vars().contains(v)
    }

    /// Every variable name occurring in the term, free or bound.
    pub fn all_names(&self, out: &mut BTreeSet<String>) {
        self.visit(&mut |t| match &t.kind {
            TermKind::Var(v) | TermKind::Let(v, ..) | TermKind::Quant(_, v, ..) => {
                out.insert(v.clone());
            }
            TermKind::Switch(_, cases, _) => {
                for (p, _) in cases {
                    let mut vs = Vec::new();
                    p.bound_vars(&mut vs);
                    out.extend(vs);
                }
            }
            _ => {}
        });
    }

    /// Capture-avoiding substitution of free variables.
    pub fn subst(&self, map: &BTreeMap<String, Term>) -> Term {
        if map.is_empty() {
            return self.clone();
        }
        let mut avoid = BTreeSet::new();
        for t in map.values() {
            avoid.extend(t.free_vars());
        }
        subst_rec(self, map, &avoid)
    }

    pub fn subst1(&self, v: &str, by: &Term) -> Term {
        let mut m = BTreeMap::new();
        m.insert(v.to_string(), by.clone());
        self.subst(&m)
    }

    /// Replaces every occurrence of `from` (as a whole subterm, outside binders
    /// that capture its free variables) with `to`.
    pub fn replace(&self, from: &Term, to: &Term) -> Term {
        let fv = from.free_vars();
        replace_rec(self, from, to, &fv)
    }

    /// Top-level conjuncts.
    pub fn conjuncts(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        fn go<'a>(t: &'a Term, out: &mut Vec<&'a Term>) {
            match &t.kind {
                TermKind::Binary(BinOp::And, a, b) => {
                    go(a, out);
                    go(b, out);
                }
                _ => out.push(t),
            }
        }
        go(self, &mut out);
        out
    }
}

fn pattern_terms<'a>(p: &'a Pattern, out: &mut Vec<&'a Term>) {
    match p {
        Pattern::Lit(t) => out.push(t),
        Pattern::Ctor { args, .. } => args.iter().for_each(|a| pattern_terms(a, out)),
        Pattern::Struct(_, fs) => fs.iter().for_each(|(_, a)| pattern_terms(a, out)),
        Pattern::Wild | Pattern::Var(..) => {}
    }
}

fn map_pattern_terms(p: &Pattern, f: &mut dyn FnMut(&Term) -> Term) -> Pattern {
    match p {
        Pattern::Lit(t) => Pattern::Lit(f(t)),
        Pattern::Ctor { ctor, branch, args } => Pattern::Ctor {
            ctor: ctor.clone(),
            branch: *branch,
            args: args.iter().map(|a| map_pattern_terms(a, f)).collect(),
        },
        Pattern::Struct(n, fs) => Pattern::Struct(
            n.clone(),
            fs.iter().map(|(k, a)| (k.clone(), map_pattern_terms(a, f))).collect(),
        ),
        other => other.clone(),
    }
}

fn free_vars_into(t: &Term, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match &t.kind {
        TermKind::Var(v) => {
            if !bound.contains(v) {
                out.insert(v.clone());
            }
        }
        TermKind::Let(v, rhs, body) => {
            free_vars_into(rhs, bound, out);
            bound.push(v.clone());
            free_vars_into(body, bound, out);
            bound.pop();
        }
        TermKind::Quant(_, v, _, bd, body) => {
            match bd {
                Some(Bound::Range(lo, hi)) => {
                    free_vars_into(lo, bound, out);
                    free_vars_into(hi, bound, out);
                }
                Some(Bound::Keys(m)) => free_vars_into(m, bound, out),
                None => {}
            }
            bound.push(v.clone());
            free_vars_into(body, bound, out);
            bound.pop();
        }
        TermKind::Switch(s, cases, def) => {
            free_vars_into(s, bound, out);
            for (p, body) in cases {
                let mut lits = Vec::new();
                pattern_terms(p, &mut lits);
                for l in lits {
                    free_vars_into(l, bound, out);
                }
                let mut vs = Vec::new();
                p.bound_vars(&mut vs);
                let n = vs.len();
                bound.extend(vs);
                free_vars_into(body, bound, out);
                bound.truncate(bound.len() - n);
            }
            if let Some(d) = def {
                free_vars_into(d, bound, out);
            }
        }
        _ => {
            for c in t.children() {
                free_vars_into(c, bound, out);
            }
        }
    }
}

/// Picks `base` or `base_N` (smallest N ≥ 1) not in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    if !avoid.contains(base) {
        return base.to_string();
    }
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = stem.strip_suffix('_').unwrap_or(base);
    (1..)
        .map(|n| format!("{stem}_{n}"))
        .find(|c| !avoid.contains(c))
        .unwrap()
}

fn rename_binder(
    v: &str,
    body_fv: &BTreeSet<String>,
    avoid: &BTreeSet<String>,
) -> Option<String> {
    if avoid.contains(v) {
        let mut all = avoid.clone();
        all.extend(body_fv.iter().cloned());
        Some(fresh_name(v, &all))
    } else {
        None
    }
}

fn subst_rec(t: &Term, map: &BTreeMap<String, Term>, avoid: &BTreeSet<String>) -> Term {
    match &t.kind {
        TermKind::Var(v) => map.get(v).cloned().unwrap_or_else(|| t.clone()),
        TermKind::Let(v, rhs, body) => {
            let rhs = subst_rec(rhs, map, avoid);
            let (v2, body) = under_binder(v, body, map, avoid);
            Term::new(t.ty.clone(), TermKind::Let(v2, Box::new(rhs), Box::new(body)))
        }
        TermKind::Quant(q, v, ty, bd, body) => {
            let bd = bd.as_ref().map(|b| match b {
                Bound::Range(lo, hi) => Bound::Range(
                    Box::new(subst_rec(lo, map, avoid)),
                    Box::new(subst_rec(hi, map, avoid)),
                ),
                Bound::Keys(m) => Bound::Keys(Box::new(subst_rec(m, map, avoid))),
            });
            let (v2, body) = under_binder(v, body, map, avoid);
            Term::new(
                t.ty.clone(),
                TermKind::Quant(*q, v2, ty.clone(), bd, Box::new(body)),
            )
        }
        TermKind::Switch(s, cases, def) => {
            let s = subst_rec(s, map, avoid);
            let cases = cases
                .iter()
                .map(|(p, body)| {
                    let p = map_pattern_terms(p, &mut |l| subst_rec(l, map, avoid));
                    let mut vs = Vec::new();
                    p.bound_vars(&mut vs);
                    let mut inner = map.clone();
                    for v in &vs {
                        inner.remove(v);
                    }
                    let body_fv = body.free_vars();
                    let mut renames = BTreeMap::new();
                    for v in &vs {
                        if let Some(nv) = rename_binder(v, &body_fv, avoid) {
                            renames.insert(v.clone(), nv);
                        }
                    }
                    let p = rename_pattern(&p, &renames);
                    let mut body = body.clone();
                    if !renames.is_empty() {
                        let rm: BTreeMap<String, Term> = renames
                            .iter()
                            .map(|(o, n)| {
                                let ty = pattern_var_type(&p, n).unwrap();
                                (o.clone(), Term::var(n.clone(), ty))
                            })
                            .collect();
                        body = body.subst(&rm);
                    }
                    (p, subst_rec(&body, &inner, avoid))
                })
                .collect();
            let def = def.as_ref().map(|d| Box::new(subst_rec(d, map, avoid)));
            Term::new(t.ty.clone(), TermKind::Switch(Box::new(s), cases, def))
        }
        _ => t.map_children(&mut |c| subst_rec(c, map, avoid)),
    }
}

fn under_binder(
    v: &str,
    body: &Term,
    map: &BTreeMap<String, Term>,
    avoid: &BTreeSet<String>,
) -> (String, Term) {
    let mut inner = map.clone();
    inner.remove(v);
    if inner.is_empty() {
        return (v.to_string(), body.clone());
    }
    let body_fv = body.free_vars();
    let touches = inner.keys().any(|k| body_fv.contains(k));
    if !touches {
        return (v.to_string(), body.clone());
    }
    match rename_binder(v, &body_fv, avoid) {
        Some(nv) => {
            let ty = binder_type(body, v);
            let renamed = match ty {
                Some(ty) => body.subst1(v, &Term::var(nv.clone(), ty)),
                None => body.clone(),
            };
            (nv, subst_rec(&renamed, &inner, avoid))
        }
        None => (v.to_string(), subst_rec(body, &inner, avoid)),
    }
}

/// Type of free occurrences of `v` inside `t`.
fn binder_type(t: &Term, v: &str) -> Option<Type> {
    let mut found = None;
    t.visit(&mut |s| {
        if found.is_none() {
            if let TermKind::Var(n) = &s.kind {
                if n == v {
                    found = Some(s.ty.clone());
                }
            }
        }
    });
    found
}

fn rename_pattern(p: &Pattern, renames: &BTreeMap<String, String>) -> Pattern {
    match p {
        Pattern::Var(v, ty) => Pattern::Var(
            renames.get(v).cloned().unwrap_or_else(|| v.clone()),
            ty.clone(),
        ),
        Pattern::Ctor { ctor, branch, args } => Pattern::Ctor {
            ctor: ctor.clone(),
            branch: *branch,
            args: args.iter().map(|a| rename_pattern(a, renames)).collect(),
        },
        Pattern::Struct(n, fs) => Pattern::Struct(
            n.clone(),
            fs.iter().map(|(k, a)| (k.clone(), rename_pattern(a, renames))).collect(),
        ),
        other => other.clone(),
    }
}

fn pattern_var_type(p: &Pattern, v: &str) -> Option<Type> {
    match p {
        Pattern::Var(n, ty) if n == v => Some(ty.clone()),
        Pattern::Ctor { args, .. } => args.iter().find_map(|a| pattern_var_type(a, v)),
        Pattern::Struct(_, fs) => fs.iter().find_map(|(_, a)| pattern_var_type(a, v)),
        _ => None,
    }
}

fn replace_rec(t: &Term, from: &Term, to: &Term, fv: &BTreeSet<String>) -> Term {
    if t == from {
        return to.clone();
    }
    match &t.kind {
        TermKind::Let(v, rhs, body) if fv.contains(v) => {
            let rhs = replace_rec(rhs, from, to, fv);
            Term::new(t.ty.clone(), TermKind::Let(v.clone(), Box::new(rhs), body.clone()))
        }
        TermKind::Quant(_, v, ..) if fv.contains(v) => t.clone(),
        _ => t.map_children(&mut |c| replace_rec(c, from, to, fv)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subst_avoids_capture() {
        // forall j. x < j   [x := j]  ==> forall j_1. j < j_1
        let j = Term::var("j", Type::Int);
        let x = Term::var("x", Type::Int);
        let t = Term::forall("j", Type::Int, Term::lt(x, j.clone()));
        let r = t.subst1("x", &j);
        match &r.kind {
            TermKind::Quant(_, v, _, _, body) => {
                assert_eq!(v, "j_1");
                assert_eq!(**body, Term::lt(j, Term::var("j_1", Type::Int)));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn subst_respects_shadowing() {
        let x = Term::var("x", Type::Int);
        let t = Term::new(
            Type::Int,
            TermKind::Let("x".into(), Box::new(Term::int(1)), Box::new(x.clone())),
        );
        assert_eq!(t.subst1("x", &Term::int(7)), t);
    }

    #[test]
    fn fresh_names() {
        let avoid: BTreeSet<String> = ["k".to_string(), "k_1".to_string()].into();
        assert_eq!(fresh_name("k", &avoid), "k_2");
        assert_eq!(fresh_name("m", &avoid), "m");
    }

    #[test]
    fn wrap() {
        assert_eq!(wrap_bits(-1, 8), 255);
        assert_eq!(wrap_bits(256, 8), 0);
    }
}
