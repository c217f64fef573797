//! SMT-LIB encoding of quantifier-free normal-form terms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::atoms::{decompose_atomic, default_symbol};
use crate::error::{Error, Result};
use crate::normalize::NormalGoal;
use crate::printer::term_to_string;
use crate::term::{BinOp, Term, TermKind, UnOp};
use crate::types::Type;

/// Names the SMT side already uses. User names are plain identifiers, so
/// only clashes with these need renaming.
const RESERVED: &[&str] = &[
    "abs", "and", "as", "assert", "bv2int", "bv2nat", "concat", "declare", "distinct", "div",
    "exists", "extract", "false", "forall", "int2bv", "ite", "let", "mod", "not", "or", "par",
    "rem", "select", "store", "true", "xor", "Array", "Bool", "Int", "Real", "BitVec", "String",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    /// Name of a generalized atomic term.
    Atom(String),
    Function(String),
    Default(Type),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolDecl {
    pub symbol: String,
    pub origin: Origin,
    pub args: Vec<Type>,
    pub result: Type,
}

/// One declared symbol per atom name, function and default constant.
#[derive(Clone, Debug, Default)]
pub struct EncodingTable {
    decls: BTreeMap<String, SymbolDecl>,
    by_origin: BTreeMap<String, String>,
    sorts: BTreeMap<String, String>,
    /// Encoded length atoms, which are asserted non-negative.
    lengths: BTreeSet<String>,
}

fn origin_key(o: &Origin) -> String {
    match o {
        Origin::Atom(n) => format!("atom {n}"),
        Origin::Function(n) => format!("fn {n}"),
        Origin::Default(t) => format!("default {t}"),
    }
}

fn sanitize(s: &str) -> String {
    let mut out = s.replace('.', "!");
    if RESERVED.contains(&out.as_str()) || out.starts_with("bv") {
        out.push('!');
    }
    out
}

impl EncodingTable {
    pub fn decls(&self) -> impl Iterator<Item = &SymbolDecl> {
        self.decls.values()
    }

    pub fn lookup(&self, symbol: &str) -> Option<&SymbolDecl> {
        self.decls.get(symbol)
    }

    /// Symbol for an origin; declares it on first use.
    fn symbol(&mut self, origin: Origin, args: Vec<Type>, result: Type) -> Result<String> {
        let key = origin_key(&origin);
        if let Some(s) = self.by_origin.get(&key) {
            let d = &self.decls[s];
            if d.args != args || d.result != result {
                return Err(Error::Smt(format!("inconsistent signature for {key}")));
            }
            return Ok(s.clone());
        }
        for t in args.iter().chain([&result]) {
            self.sort(t)?;
        }
        let base = match &origin {
            Origin::Atom(n) => sanitize(n),
            Origin::Function(n) => format!("{}!fn", sanitize(n)),
            Origin::Default(t) => default_symbol(t),
        };
        let mut symbol = base.clone();
        let mut n = 1;
        while self.decls.contains_key(&symbol) || self.sorts.values().any(|s| *s == symbol) {
            symbol = format!("{base}!{n}");
            n += 1;
        }
        self.by_origin.insert(key, symbol.clone());
        self.decls.insert(symbol.clone(), SymbolDecl { symbol: symbol.clone(), origin, args, result });
        Ok(symbol)
    }

    pub fn sort(&mut self, t: &Type) -> Result<String> {
        Ok(match t {
            Type::Bool => "Bool".into(),
            Type::Int => "Int".into(),
            Type::BitVec { width, .. } => format!("(_ BitVec {width})"),
            Type::Param(p) => {
                let s = sanitize(p);
                let s = if s == *p { s } else { format!("{p}!sort") };
                self.sorts.insert(p.clone(), s.clone());
                s
            }
            other => return Err(Error::Smt(format!("no sort for compound type `{other}`"))),
        })
    }

    fn sort_of(&self, t: &Type) -> String {
        match t {
            Type::Param(p) => self.sorts[p].clone(),
            Type::Bool => "Bool".into(),
            Type::Int => "Int".into(),
            Type::BitVec { width, .. } => format!("(_ BitVec {width})"),
            other => unreachable!("sort of {other}"),
        }
    }

    /// `declare-sort` and `declare-fun` commands, in symbol order.
    pub fn declarations(&self) -> String {
        let mut s = String::new();
        let sorts: BTreeSet<&String> = self.sorts.values().collect();
        for name in sorts {
            let _ = writeln!(s, "(declare-sort {name} 0)");
        }
        for d in self.decls.values() {
            let args: Vec<String> = d.args.iter().map(|t| self.sort_of(t)).collect();
            let _ = writeln!(s, "(declare-fun {} ({}) {})", d.symbol, args.join(" "), self.sort_of(&d.result));
        }
        s
    }

    /// Non-negativity of every encoded length atom.
    pub fn length_facts(&self) -> Vec<String> {
        self.lengths.iter().map(|l| format!("(>= {l} 0)")).collect()
    }

    /// Everything in `self` that `base` does not have.
    pub fn difference(&self, base: &EncodingTable) -> EncodingTable {
        EncodingTable {
            decls: self
                .decls
                .iter()
                .filter(|(k, _)| !base.decls.contains_key(*k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
            by_origin: BTreeMap::new(),
            sorts: self
                .sorts
                .iter()
                .filter(|(k, _)| !base.sorts.contains_key(*k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
            lengths: self.lengths.difference(&base.lengths).cloned().collect(),
        }
    }
}

fn bv_lit(v: i128, width: u32) -> String {
    let mask = if width >= 128 { u128::MAX } else { (1u128 << width) - 1 };
    format!("(_ bv{} {width})", (v as u128) & mask)
}

fn int_lit(v: i128) -> String {
    if v < 0 {
        format!("(- {})", v.unsigned_abs())
    } else {
        v.to_string()
    }
}

fn app(f: &str, args: &[String]) -> String {
    if args.is_empty() {
        f.to_string()
    } else {
        format!("({f} {})", args.join(" "))
    }
}

fn convert(x: String, from: &Type, to: &Type) -> String {
    match (from, to) {
        (Type::Int, Type::Int) => x,
        (Type::Int, Type::BitVec { width, .. }) => format!("((_ int2bv {width}) {x})"),
        (Type::BitVec { signed: false, .. }, Type::Int) => format!("(bv2int {x})"),
        (Type::BitVec { width, signed: true }, Type::Int) => format!(
            "(ite (bvslt {x} {}) (- (bv2int {x}) {}) (bv2int {x}))",
            bv_lit(0, *width),
            1u128 << width
        ),
        (Type::BitVec { width: w1, signed }, Type::BitVec { width: w2, .. }) => {
            if w2 > w1 {
                let ext = if *signed { "sign_extend" } else { "zero_extend" };
                format!("((_ {ext} {}) {x})", w2 - w1)
            } else if w2 < w1 {
                format!("((_ extract {} 0) {x})", w2 - 1)
            } else {
                x
            }
        }
        _ => unreachable!("conversion {from} -> {to}"),
    }
}

/// Encodes a quantifier-free normal-form term.
pub fn encode_term(t: &Term, table: &mut EncodingTable) -> Result<String> {
    use TermKind as K;
    if let Some(d) = decompose_atomic(t) {
        if !t.ty.is_primitive() {
            return Err(Error::Smt(format!("atom of compound type: {}", term_to_string(t))));
        }
        let args = d.idx.iter().map(|i| encode_term(i, table)).collect::<Result<Vec<_>>>()?;
        let arg_tys = d.idx.iter().map(|i| i.ty.clone()).collect();
        let f = table.symbol(Origin::Atom(d.name.clone()), arg_tys, t.ty.clone())?;
        let out = app(&f, &args);
        if matches!(t.kind, K::Length(_)) {
            table.lengths.insert(out.clone());
        }
        return Ok(out);
    }
    let bv = match &t.ty {
        Type::BitVec { width, signed } => Some((*width, *signed)),
        _ => None,
    };
    Ok(match &t.kind {
        K::Bool(b) => b.to_string(),
        K::Int(v) => match bv {
            Some((w, _)) => bv_lit(*v, w),
            None => int_lit(*v),
        },
        K::Default => {
            if !t.ty.is_primitive() {
                return Err(Error::Smt(format!("default of compound type `{}`", t.ty)));
            }
            table.symbol(Origin::Default(t.ty.clone()), Vec::new(), t.ty.clone())?
        }
        K::Unary(op, x) => {
            let e = encode_term(x, table)?;
            match (op, bv) {
                (UnOp::Not, _) => format!("(not {e})"),
                (UnOp::Neg, None) => format!("(- {e})"),
                (UnOp::Neg, Some(_)) => format!("(bvneg {e})"),
                (UnOp::BitNot, _) => format!("(bvnot {e})"),
            }
        }
        K::Binary(op, a, b) => {
            let (x, y) = (encode_term(a, table)?, encode_term(b, table)?);
            let operand_bv = match &a.ty {
                Type::BitVec { signed, .. } => Some(*signed),
                _ => None,
            };
            binary(*op, x, y, operand_bv)
        }
        K::Ite(c, a, b) => format!(
            "(ite {} {} {})",
            encode_term(c, table)?,
            encode_term(a, table)?,
            encode_term(b, table)?
        ),
        K::App(f, args) => {
            let enc = args.iter().map(|a| encode_term(a, table)).collect::<Result<Vec<_>>>()?;
            let tys = args.iter().map(|a| a.ty.clone()).collect();
            let s = table.symbol(Origin::Function(f.clone()), tys, t.ty.clone())?;
            app(&s, &enc)
        }
        K::Convert(x) => convert(encode_term(x, table)?, &x.ty, &t.ty),
        _ => return Err(Error::Smt(format!("not in normal form: {}", term_to_string(t)))),
    })
}

fn binary(op: BinOp, x: String, y: String, bv: Option<bool>) -> String {
    use BinOp::*;
    let f = match (op, bv) {
        (And, _) => "and",
        (Or, _) => "or",
        (Implies, _) => "=>",
        (Iff | Eq, _) => "=",
        (Ne, _) => "distinct",
        (Lt, None) => "<",
        (Le, None) => "<=",
        (Gt, None) => ">",
        (Ge, None) => ">=",
        (Lt, Some(true)) => "bvslt",
        (Le, Some(true)) => "bvsle",
        (Gt, Some(true)) => "bvsgt",
        (Ge, Some(true)) => "bvsge",
        (Lt, Some(false)) => "bvult",
        (Le, Some(false)) => "bvule",
        (Gt, Some(false)) => "bvugt",
        (Ge, Some(false)) => "bvuge",
        (Add, None) => "+",
        (Sub, None) => "-",
        (Mul, None) => "*",
        (Div, None) => return format!("(ite (= {y} 0) 0 (div {x} {y}))"),
        (Mod, None) => return format!("(ite (= {y} 0) {x} (mod {x} {y}))"),
        (Add, Some(_)) => "bvadd",
        (Sub, Some(_)) => "bvsub",
        (Mul, Some(_)) => "bvmul",
        (Div, Some(true)) => "bvsdiv",
        (Div, Some(false)) => "bvudiv",
        (Mod, Some(true)) => "bvsrem",
        (Mod, Some(false)) => "bvurem",
        (BitAnd, _) => "bvand",
        (BitOr, _) => "bvor",
        (BitXor, _) => "bvxor",
        (Shl, _) => "bvshl",
        (Shr, Some(true)) => "bvashr",
        (Shr, _) => "bvlshr",
    };
    format!("({f} {x} {y})")
}

/// A complete satisfiability script for `facts ∧ ¬conclusion`.
#[derive(Clone, Debug)]
pub struct Script {
    pub text: String,
    pub table: EncodingTable,
}

pub fn encode_goal(g: &NormalGoal) -> Result<Script> {
    let mut table = EncodingTable::default();
    let mut asserts = Vec::new();
    for f in &g.facts {
        asserts.push(encode_term(f, &mut table)?);
    }
    let c = encode_term(&g.conclusion, &mut table)?;
    asserts.push(format!("(not {c})"));
    let mut text = String::new();
    let _ = writeln!(text, "; {}", g.name);
    text.push_str("(set-option :produce-models true)\n");
    text.push_str(&table.declarations());
    for l in table.length_facts() {
        let _ = writeln!(text, "(assert {l})");
    }
    for a in asserts {
        let _ = writeln!(text, "(assert {a})");
    }
    text.push_str("(check-sat)\n");
    Ok(Script { text, table })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atoms_become_functions_of_their_indices() {
        let a = Term::var("a", Type::seq(Type::Int));
        let i = Term::var("i", Type::Int);
        let mut t = EncodingTable::default();
        let e = encode_term(&Term::lt(Term::index(a.clone(), i), Term::length(a)), &mut t).unwrap();
        assert_eq!(e, "(< (a!index i) a!length)");
        assert_eq!(t.length_facts(), vec!["(>= a!length 0)"]);
        assert!(t.declarations().contains("(declare-fun a!index (Int) Int)"));
    }

    #[test]
    fn reserved_and_colliding_names() {
        let mut t = EncodingTable::default();
        let d = Term::var("div", Type::Int);
        assert_eq!(encode_term(&d, &mut t).unwrap(), "div!");
        let x = Term::var("default_int", Type::Int);
        encode_term(&x, &mut t).unwrap();
        let e = encode_term(&Term::default_of(Type::Int), &mut t).unwrap();
        assert_eq!(e, "default_int!1");
    }

    #[test]
    fn bit_vector_operators_follow_signedness() {
        let mut t = EncodingTable::default();
        let x = Term::var("x", Type::bv(8, true));
        let y = Term::var("y", Type::bv(8, false));
        let e = encode_term(&Term::lt(x.clone(), Term::lit(-1, Type::bv(8, true))), &mut t).unwrap();
        assert_eq!(e, "(bvslt x (_ bv255 8))");
        let e = encode_term(&Term::binary(BinOp::Shr, y.clone(), y), &mut t).unwrap();
        assert_eq!(e, "(bvlshr y y)");
        let c = Term::new(Type::Int, TermKind::Convert(Box::new(x)));
        assert!(encode_term(&c, &mut t).unwrap().starts_with("(ite (bvslt x (_ bv0 8))"));
    }
}
