//! Pretty-printing in the surface syntax. Terms are printed by converting
//! them back to surface expressions.

use std::fmt::Write;

use crate::parser::{binop_level, is_right_assoc};
use crate::syntax::*;
use crate::term::{Bound, Pattern, PathStep, Quantifier, Term, TermKind, UnOp};
use crate::types::Type;

fn prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Quant(..) => 0,
        ExprKind::Binary(op, ..) => binop_level(*op),
        ExprKind::Unary(..) => 11,
        _ => 12,
    }
}

pub fn expr_to_string(e: &Expr) -> String {
    let mut s = String::new();
    expr(e, 0, &mut s);
    s
}

fn expr(e: &Expr, min: u8, out: &mut String) {
    if prec(e) < min {
        out.push('(');
        expr(e, 0, out);
        out.push(')');
        return;
    }
    match &e.kind {
        ExprKind::Ident(n) => out.push_str(n),
        ExprKind::Int(v) => write!(out, "{v}").unwrap(),
        ExprKind::Bool(b) => write!(out, "{b}").unwrap(),
        ExprKind::Unary(op, x) => {
            out.push_str(match op {
                UnOp::Not => "!",
                UnOp::Neg => "-",
                UnOp::BitNot => "~",
            });
            // keep `-(3)` distinct from the literal `-3`
            let wrap = matches!(x.kind, ExprKind::Int(_)) || matches!(x.kind, ExprKind::Unary(..));
            expr(x, if wrap { 13 } else { 11 }, out);
        }
        ExprKind::Binary(op, a, b) => {
            let l = binop_level(*op);
            let (la, lb) = if is_right_assoc(*op) { (l + 1, l) } else { (l, l + 1) };
            expr(a, la, out);
            write!(out, " {} ", op.symbol()).unwrap();
            expr(b, lb, out);
        }
        ExprKind::Call(f, args) => {
            out.push_str(f);
            out.push('(');
            list(args, out);
            out.push(')');
        }
        ExprKind::Field(x, f) => {
            expr(x, 12, out);
            write!(out, ".{f}").unwrap();
        }
        ExprKind::Index(a, i) => {
            expr(a, 12, out);
            out.push('[');
            expr(i, 0, out);
            out.push(']');
        }
        ExprKind::StructLit(n, fs) => {
            write!(out, "{n}{{").unwrap();
            for (k, (f, v)) in fs.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                write!(out, "{f}: ").unwrap();
                expr(v, 0, out);
            }
            out.push('}');
        }
        ExprKind::Update { base, assigns, deep } => {
            expr(base, 12, out);
            out.push_str(if *deep { "{|" } else { "{" });
            for (k, (path, v)) in assigns.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                for (n, step) in path.iter().enumerate() {
                    match step {
                        PathSyn::Field(f) if n == 0 => out.push_str(f),
                        PathSyn::Field(f) => write!(out, ".{f}").unwrap(),
                        PathSyn::Index(i) => {
                            out.push('[');
                            expr(i, 0, out);
                            out.push(']');
                        }
                    }
                }
                out.push_str(" := ");
                expr(v, 0, out);
            }
            out.push_str(if *deep { "|}" } else { "}" });
        }
        ExprKind::If(c, t, f) => {
            out.push_str("if (");
            expr(c, 0, out);
            out.push_str(") { ");
            expr(t, 0, out);
            out.push_str(" } else { ");
            expr(f, 0, out);
            out.push_str(" }");
        }
        ExprKind::Switch(s, cases, default) => {
            out.push_str("switch (");
            expr(s, 0, out);
            out.push_str(") {");
            for (p, b) in cases {
                out.push_str(" case ");
                pattern(p, out);
                out.push_str(": ");
                expr(b, 0, out);
                out.push(';');
            }
            if let Some(d) = default {
                out.push_str(" default: ");
                expr(d, 0, out);
                out.push(';');
            }
            out.push_str(" }");
        }
        ExprKind::Let(v, r, b) => {
            write!(out, "let {v} = ").unwrap();
            expr(r, 0, out);
            out.push_str(" in ");
            expr(b, 0, out);
            out.push_str(" end");
        }
        ExprKind::Quant(q, t, v, bound, body) => {
            let kw = match q {
                Quantifier::Forall => "forall",
                Quantifier::Exists => "exists",
            };
            write!(out, "{kw} ({t} {v}").unwrap();
            match bound.as_deref() {
                None => {}
                Some(BoundSyn::Range(lo, hi)) => {
                    out.push_str(" in ");
                    expr(lo, 0, out);
                    out.push_str(" .. ");
                    expr(hi, 0, out);
                }
                Some(BoundSyn::Keys(m)) => {
                    out.push_str(" in keys(");
                    expr(m, 0, out);
                    out.push(')');
                }
            }
            out.push_str(") ");
            expr(body, 0, out);
        }
        ExprKind::Default(t) => write!(out, "default({t})").unwrap(),
    }
}

fn list(args: &[Expr], out: &mut String) {
    for (k, a) in args.iter().enumerate() {
        if k > 0 {
            out.push_str(", ");
        }
        expr(a, 0, out);
    }
}

fn pattern(p: &PatSyn, out: &mut String) {
    match p {
        PatSyn::Wild => out.push('_'),
        PatSyn::Ident(n) => out.push_str(n),
        PatSyn::Int(v) => write!(out, "{v}").unwrap(),
        PatSyn::Bool(b) => write!(out, "{b}").unwrap(),
        PatSyn::Ctor(c, args) => {
            write!(out, "{c}(").unwrap();
            for (k, a) in args.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                pattern(a, out);
            }
            out.push(')');
        }
        PatSyn::Struct(n, fs) => {
            write!(out, "{n}{{").unwrap();
            for (k, (f, a)) in fs.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                write!(out, "{f}: ").unwrap();
                pattern(a, out);
            }
            out.push('}');
        }
    }
}

fn params(ps: &[(Type, String)]) -> String {
    ps.iter().map(|(t, n)| format!("{t} {n}")).collect::<Vec<_>>().join(", ")
}

pub fn decl_to_string(d: &Decl) -> String {
    let mut out = String::new();
    match d {
        Decl::Typedef(n, t) => write!(out, "typedef {n} = {t};").unwrap(),
        Decl::Struct(s) => {
            writeln!(out, "struct {} {{", s.name).unwrap();
            for (f, t) in &s.fields {
                writeln!(out, "  {t} {f};").unwrap();
            }
            out.push('}');
        }
        Decl::Enum(e) => {
            write!(out, "enum {} =", e.name).unwrap();
            for (k, b) in e.branches.iter().enumerate() {
                out.push_str(if k == 0 { " " } else { " | " });
                out.push_str(&b.ctor);
                if !b.params.is_empty() {
                    let ps: Vec<_> = b.params.iter().map(|(n, t)| (t.clone(), n.clone())).collect();
                    write!(out, "({})", params(&ps)).unwrap();
                }
            }
            out.push(';');
        }
        Decl::Function(f) => {
            if f.predicate {
                write!(out, "predicate {}({})", f.name, params(&f.params)).unwrap();
            } else {
                write!(out, "function {}({}) -> {}", f.name, params(&f.params), f.ret).unwrap();
            }
            match &f.body {
                None => out.push(';'),
                Some(b) => write!(out, " {{\n  {}\n}}", expr_to_string(b)).unwrap(),
            }
        }
        Decl::Const(t, n, e) => write!(out, "const {t} {n} = {};", expr_to_string(e)).unwrap(),
        Decl::Query(q) => {
            writeln!(out, "query {} {{", q.name).unwrap();
            if !q.type_params.is_empty() {
                writeln!(out, "  type {};", q.type_params.join(", ")).unwrap();
            }
            for (t, n) in &q.vars {
                writeln!(out, "  {t} {n};").unwrap();
            }
            for (l, e) in &q.assumes {
                match l {
                    Some(l) => writeln!(out, "  assumes {l}: {};", expr_to_string(e)).unwrap(),
                    None => writeln!(out, "  assumes {};", expr_to_string(e)).unwrap(),
                }
            }
            writeln!(out, "  shows {};", expr_to_string(&q.shows)).unwrap();
            out.push('}');
        }
    }
    out
}

pub fn decls_to_string(ds: &[Decl]) -> String {
    ds.iter().map(|d| decl_to_string(d) + "\n").collect::<Vec<_>>().join("\n")
}

fn ex(kind: ExprKind) -> Expr {
    Expr::new(kind, Default::default())
}

fn bx(t: &Term) -> Box<Expr> {
    Box::new(term_to_expr(t))
}

fn call(f: &str, args: &[&Term]) -> ExprKind {
    ExprKind::Call(f.to_string(), args.iter().map(|t| term_to_expr(t)).collect())
}

fn pattern_to_syn(p: &Pattern) -> PatSyn {
    match p {
        Pattern::Wild => PatSyn::Wild,
        Pattern::Var(v, _) => PatSyn::Ident(v.clone()),
        Pattern::Lit(t) => match &t.kind {
            TermKind::Bool(b) => PatSyn::Bool(*b),
            TermKind::Int(v) => PatSyn::Int(*v),
            _ => PatSyn::Ident(term_to_string(t)),
        },
        Pattern::Ctor { ctor, args, .. } => {
            PatSyn::Ctor(ctor.clone(), args.iter().map(pattern_to_syn).collect())
        }
        Pattern::Struct(n, fs) => PatSyn::Struct(
            n.clone(),
            fs.iter().map(|(f, p)| (f.clone(), pattern_to_syn(p))).collect(),
        ),
    }
}

/// Surface rendering of a typed term. Lossy only in literal types.
pub fn term_to_expr(t: &Term) -> Expr {
    use TermKind::*;
    ex(match &t.kind {
        Var(v) => ExprKind::Ident(v.clone()),
        Bool(b) => ExprKind::Bool(*b),
        Int(v) => ExprKind::Int(*v),
        Default => ExprKind::Default(t.ty.clone()),
        Unary(op, x) => ExprKind::Unary(*op, bx(x)),
        Binary(op, a, b) => ExprKind::Binary(*op, bx(a), bx(b)),
        Ite(c, a, b) => ExprKind::If(bx(c), bx(a), bx(b)),
        App(f, args) => ExprKind::Call(f.clone(), args.iter().map(term_to_expr).collect()),
        Convert(x) => call(&format!("to_{}", t.ty), &[x]),
        Field(x, f) => ExprKind::Field(bx(x), f.clone()),
        StructLit(n, fs) => ExprKind::StructLit(
            n.clone(),
            fs.iter().map(|(f, v)| (f.clone(), term_to_expr(v))).collect(),
        ),
        Construct { ctor, args, .. } => {
            ExprKind::Call(ctor.clone(), args.iter().map(term_to_expr).collect())
        }
        Update(b, path, v) => ExprKind::Update {
            base: bx(b),
            assigns: vec![(
                path.iter()
                    .map(|s| match s {
                        PathStep::Field(f) => PathSyn::Field(f.clone()),
                        PathStep::Index(i) => PathSyn::Index(term_to_expr(i)),
                    })
                    .collect(),
                term_to_expr(v),
            )],
            deep: true,
        },
        Switch(s, cases, d) => ExprKind::Switch(
            bx(s),
            cases.iter().map(|(p, b)| (pattern_to_syn(p), term_to_expr(b))).collect(),
            d.as_ref().map(|d| bx(d)),
        ),
        Let(v, r, b) => ExprKind::Let(v.clone(), bx(r), bx(b)),
        Quant(q, v, ty, bound, body) => ExprKind::Quant(
            *q,
            ty.clone(),
            v.clone(),
            bound.as_ref().map(|b| {
                Box::new(match b {
                    Bound::Range(lo, hi) => BoundSyn::Range(term_to_expr(lo), term_to_expr(hi)),
                    Bound::Keys(m) => BoundSyn::Keys(term_to_expr(m)),
                })
            }),
            bx(body),
        ),
        Index(a, i) => ExprKind::Index(bx(a), bx(i)),
        Length(a) => call("len", &[a]),
        Get(m, k) => ExprKind::Index(bx(m), bx(k)),
        Indom(k, m) => call("indom", &[k, m]),
        Append(a, b) => call("append", &[a, b]),
        Cons(x, a) => call("cons", &[x, a]),
        SeqUpdate(i, v, a) => call("update", &[i, v, a]),
        Slice(l, r, a) => call("slice", &[l, r, a]),
        Repeat(x, n) => call("repeat", &[x, n]),
        Remove(k, a) => call("remove", &[k, a]),
        MapEmpty => ExprKind::Call("empty".into(), vec![]),
        MapUpdate(k, v, m) => call("update", &[k, v, m]),
    })
}

pub fn term_to_string(t: &Term) -> String {
    expr_to_string(&term_to_expr(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse, parse_expr};

    fn roundtrip(s: &str) {
        let e = parse_expr(s).unwrap();
        let printed = expr_to_string(&e);
        let again = parse_expr(&printed).unwrap_or_else(|err| panic!("{printed}: {err}"));
        assert_eq!(e, again, "{printed}");
    }

    #[test]
    fn expressions_roundtrip() {
        for s in [
            "a - (b - c)",
            "(a -> b) -> c",
            "a -> b -> c",
            "-(3) + -3",
            "!(forall (int i) p(i)) && q",
            "x == A | B & C",
            "if (c) { a } else { if (d) { b } else { c } }",
            "switch (a) { case Vnull: 0; case Vptr(n): n + 1; default: 2; }",
            "g{|tcbMap[prio].sus := true|}.tcbMap",
            "let v = 1 in v + v end",
            "forall (int i in 0 .. len(a)) exists (int k in keys(m)) a[i] == m[k]",
            "S{x: 1, y: -2}",
            "default(Seq<int8u>)",
        ] {
            roundtrip(s);
        }
    }

    #[test]
    fn declarations_roundtrip() {
        let src = "typedef address = int32u;\n\
                   enum addrval = Vnull | Vptr(address addr)\n\
                   struct P { int x; bool y }\n\
                   function f(int x) -> int { x + 1 }\n\
                   predicate g(int x);\n\
                   const int8u K = 0x10;\n\
                   query Q { type T; Seq<T> a; int k; assumes H: 0 <= k; shows f(k) > k }";
        let ds = parse(src).unwrap();
        let printed = decls_to_string(&ds.iter().map(|d| d.decl.clone()).collect::<Vec<_>>());
        let again = parse(&printed).unwrap();
        assert_eq!(ds, again);
    }
}
