//! Name resolution and type checking: turns parsed declarations into typed
//! terms, function definitions and goals.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Pos, Result};
use crate::syntax::*;
use crate::term::{BinOp, Bound, PathStep, Pattern, Term, TermKind, UnOp};
use crate::types::{resolve_types, Symbols, Type, TypeDecl};

#[derive(Clone, Debug, PartialEq)]
pub struct FunctionDef {
    pub name: String,
    pub params: Vec<(String, Type)>,
    pub ret: Type,
    /// `None` for abstract functions, which stay uninterpreted.
    pub body: Option<Term>,
}

/// A typed proof obligation.
#[derive(Clone, Debug, PartialEq)]
pub struct Goal {
    pub name: String,
    pub file: String,
    pub type_params: Vec<String>,
    pub vars: Vec<(String, Type)>,
    pub assumes: Vec<(Option<String>, Term)>,
    pub shows: Term,
}

impl Goal {
    pub fn var_type(&self, v: &str) -> Option<&Type> {
        self.vars.iter().find(|(n, _)| n == v).map(|(_, t)| t)
    }
}

/// Everything the later stages need from the checked sources.
#[derive(Clone, Debug, Default)]
pub struct Program {
    pub sym: Symbols,
    pub functions: BTreeMap<String, FunctionDef>,
    pub consts: BTreeMap<String, Term>,
    pub goals: Vec<Goal>,
}

impl Program {
    /// Checks the declarations of all files together. Errors are rendered as
    /// `file:line:col: message`.
    pub fn from_sources(files: &[SourceFile]) -> std::result::Result<Program, String> {
        let items: Vec<(&str, &DeclItem)> = files
            .iter()
            .flat_map(|f| f.decls.iter().map(move |d| (f.path.as_str(), d)))
            .collect();
        build(&items)
    }

    /// Parses and checks a single in-memory source.
    pub fn from_text(text: &str) -> std::result::Result<Program, String> {
        let sf = crate::parser::parse_file("<input>", text).map_err(|e| e.with_file("<input>"))?;
        Program::from_sources(&[sf])
    }

    pub fn goal(&self, name: &str) -> Option<&Goal> {
        self.goals.iter().find(|g| g.name == name)
    }

    /// Elaborates a standalone expression against the given variables.
    pub fn check_expr(
        &self,
        e: &Expr,
        vars: &[(String, Type)],
        expected: Option<&Type>,
    ) -> Result<Term> {
        let params = BTreeSet::new();
        let mut cx = Checker { prog: self, params: &params, locals: vars.to_vec() };
        cx.elab(e, expected)
    }
}

fn build(items: &[(&str, &DeclItem)]) -> std::result::Result<Program, String> {
    let mut seen = BTreeMap::new();
    for (file, it) in items {
        if let Some(prev) = seen.insert(it.decl.name().to_string(), *file) {
            return Err(format!(
                "{file}:{}: duplicate declaration `{}` (also in {prev})",
                it.pos,
                it.decl.name()
            ));
        }
    }
    let tdecls: Vec<TypeDecl> = items
        .iter()
        .filter_map(|(_, it)| match &it.decl {
            Decl::Typedef(n, t) => Some(TypeDecl::Alias(n.clone(), t.clone())),
            Decl::Struct(s) => Some(TypeDecl::Struct(s.clone())),
            Decl::Enum(e) => Some(TypeDecl::Enum(e.clone())),
            _ => None,
        })
        .collect();
    let sym = resolve_types(&tdecls).map_err(|e| e.to_string())?;
    let mut prog = Program { sym, ..Default::default() };
    let none = BTreeSet::new();
    let at = |file: &str, e: Error| e.with_file(file);

    // Signatures first so bodies may call functions declared later.
    for (file, it) in items {
        if let Decl::Function(f) = &it.decl {
            let mut params = Vec::new();
            let mut names = BTreeSet::new();
            for (t, n) in &f.params {
                if !names.insert(n.clone()) {
                    return Err(at(file, Error::ty(it.pos, format!("duplicate parameter `{n}`"))));
                }
                let t = prog.sym.resolve(t, &none).map_err(|e| at(file, relocate(e, it.pos)))?;
                params.push((n.clone(), t));
            }
            let ret = prog.sym.resolve(&f.ret, &none).map_err(|e| at(file, relocate(e, it.pos)))?;
            if f.body.is_none() && !(ret.is_primitive() && params.iter().all(|(_, t)| t.is_primitive())) {
                return Err(at(
                    file,
                    Error::ty(it.pos, format!("abstract function `{}` must have a primitive signature", f.name)),
                ));
            }
            prog.functions.insert(
                f.name.clone(),
                FunctionDef { name: f.name.clone(), params, ret, body: None },
            );
        }
    }
    for (file, it) in items {
        if let Decl::Const(t, n, e) = &it.decl {
            let t = prog.sym.resolve(t, &none).map_err(|e| at(file, relocate(e, it.pos)))?;
            let v = prog.check_expr(e, &[], Some(&t)).map_err(|e| at(file, e))?;
            prog.consts.insert(n.clone(), v);
        }
    }
    let mut bodies = BTreeMap::new();
    for (file, it) in items {
        if let Decl::Function(f) = &it.decl {
            if let Some(b) = &f.body {
                let def = &prog.functions[&f.name];
                let t = prog
                    .check_expr(b, &def.params, Some(&def.ret))
                    .map_err(|e| at(file, e))?;
                bodies.insert(f.name.clone(), (t, file.to_string(), it.pos));
            }
        }
    }
    for (name, (body, _, _)) in &bodies {
        prog.functions.get_mut(name).unwrap().body = Some(body.clone());
    }
    if let Some(cyc) = call_cycle(&prog.functions) {
        let (_, file, pos) = &bodies[&cyc];
        return Err(at(file, Error::ty(*pos, format!("recursive function `{cyc}`"))));
    }
    for (file, it) in items {
        if let Decl::Query(q) = &it.decl {
            let g = check_query(&prog, q, file).map_err(|e| at(file, relocate(e, it.pos)))?;
            prog.goals.push(g);
        }
    }
    Ok(prog)
}

/// Attaches a position to position-less errors.
fn relocate(e: Error, pos: Pos) -> Error {
    match e {
        Error::Resolve(m) => Error::ty(pos, m),
        other => other,
    }
}

fn call_cycle(funcs: &BTreeMap<String, FunctionDef>) -> Option<String> {
    fn calls(t: &Term, out: &mut BTreeSet<String>) {
        t.visit(&mut |s| {
            if let TermKind::App(f, _) = &s.kind {
                out.insert(f.clone());
            }
        });
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    fn dfs(
        f: &str,
        funcs: &BTreeMap<String, FunctionDef>,
        state: &mut BTreeMap<String, u8>,
    ) -> Option<String> {
        match state.get(f) {
            Some(1) => return Some(f.to_string()),
            Some(2) => return None,
            _ => {}
        }
        state.insert(f.to_string(), 1);
        let mut out = BTreeSet::new();
        if let Some(b) = funcs.get(f).and_then(|d| d.body.as_ref()) {
            calls(b, &mut out);
        }
        for g in out {
            if let Some(c) = dfs(&g, funcs, state) {
                return Some(c);
            }
        }
        state.insert(f.to_string(), 2);
        None
    }
    let mut state = BTreeMap::new();
    funcs.keys().find_map(|f| dfs(f, funcs, &mut state))
}

fn check_query(prog: &Program, q: &QueryDecl, file: &str) -> Result<Goal> {
    let mut params = BTreeSet::new();
    for t in &q.type_params {
        if !params.insert(t.clone()) {
            return Err(Error::Resolve(format!("duplicate type parameter `{t}`")));
        }
    }
    let mut vars: Vec<(String, Type)> = Vec::new();
    for (t, n) in &q.vars {
        if vars.iter().any(|(m, _)| m == n) {
            return Err(Error::Resolve(format!("duplicate variable `{n}`")));
        }
        vars.push((n.clone(), prog.sym.resolve(t, &params)?));
    }
    let mut cx = Checker { prog, params: &params, locals: vars.clone() };
    let mut assumes = Vec::new();
    for (l, e) in &q.assumes {
        assumes.push((l.clone(), cx.elab(e, Some(&Type::Bool))?));
    }
    let shows = cx.elab(&q.shows, Some(&Type::Bool))?;
    Ok(Goal {
        name: q.name.clone(),
        file: file.to_string(),
        type_params: q.type_params.clone(),
        vars,
        assumes,
        shows,
    })
}

/// Expressions whose type is taken from context (integer literals and the like).
fn is_poly(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Int(_) => true,
        ExprKind::Unary(UnOp::Neg | UnOp::BitNot, x) => is_poly(x),
        ExprKind::Binary(op, a, b) if !op.is_logical() && !op.is_comparison() => {
            is_poly(a) && is_poly(b)
        }
        ExprKind::Call(f, args) if f == "empty" => args.is_empty(),
        ExprKind::Call(f, args) if (f == "max" || f == "min") && args.len() == 2 => {
            is_poly(&args[0]) && is_poly(&args[1])
        }
        ExprKind::If(_, a, b) => is_poly(a) && is_poly(b),
        _ => false,
    }
}

struct Checker<'a> {
    prog: &'a Program,
    params: &'a BTreeSet<String>,
    locals: Vec<(String, Type)>,
}

fn mismatch(pos: Pos, expected: &Type, found: &Type) -> Error {
    Error::ty(pos, format!("type mismatch: expected `{expected}`, found `{found}`"))
}

impl Checker<'_> {
    fn sym(&self) -> &Symbols {
        &self.prog.sym
    }

    fn local(&self, n: &str) -> Option<&Type> {
        self.locals.iter().rev().find(|(m, _)| m == n).map(|(_, t)| t)
    }

    fn resolve(&self, t: &Type, pos: Pos) -> Result<Type> {
        self.prog.sym.resolve(t, self.params).map_err(|e| relocate(e, pos))
    }

    fn elab(&mut self, e: &Expr, exp: Option<&Type>) -> Result<Term> {
        let t = self.elab_inner(e, exp)?;
        if let Some(x) = exp {
            if &t.ty != x {
                return Err(mismatch(e.pos, x, &t.ty));
            }
        }
        Ok(t)
    }

    fn expect_ty(&self, t: &Term, pos: Pos, pred: fn(&Type) -> bool, what: &str) -> Result<()> {
        if pred(&t.ty) {
            Ok(())
        } else {
            Err(Error::ty(pos, format!("expected {what}, found `{}`", t.ty)))
        }
    }

    /// Elaborates two operands that must share a type; the context-free one goes first.
    fn pair(&mut self, a: &Expr, b: &Expr, exp: Option<&Type>) -> Result<(Term, Term)> {
        if is_poly(a) && !is_poly(b) {
            let tb = self.elab(b, exp)?;
            let ta = self.elab(a, Some(&tb.ty))?;
            Ok((ta, tb))
        } else {
            let ta = self.elab(a, exp)?;
            let tb = self.elab(b, Some(&ta.ty))?;
            Ok((ta, tb))
        }
    }

    fn elab_inner(&mut self, e: &Expr, exp: Option<&Type>) -> Result<Term> {
        let pos = e.pos;
        match &e.kind {
            ExprKind::Ident(n) => {
                if let Some(t) = self.local(n) {
                    return Ok(Term::var(n.clone(), t.clone()));
                }
                if let Some((en, b)) = self.sym().ctors.get(n) {
                    let decl = &self.sym().enums[en];
                    if !decl.branches[*b].params.is_empty() {
                        return Err(Error::ty(pos, format!("constructor `{n}` expects arguments")));
                    }
                    return Ok(Term::new(
                        Type::Enum(en.clone()),
                        TermKind::Construct { ctor: n.clone(), branch: *b, args: vec![] },
                    ));
                }
                if let Some(c) = self.prog.consts.get(n) {
                    return Ok(c.clone());
                }
                Err(Error::ty(pos, format!("unknown identifier `{n}`")))
            }
            ExprKind::Int(v) => {
                let ty = match exp {
                    Some(t) if t.is_numeric() => t.clone(),
                    _ => Type::Int,
                };
                if let Type::BitVec { width, .. } = ty {
                    let lo = -(1i128 << (width - 1));
                    let hi = 1i128 << width;
                    if *v < lo || *v >= hi {
                        return Err(Error::ty(pos, format!("literal {v} out of range for `{ty}`")));
                    }
                }
                Ok(Term::lit(*v, ty))
            }
            ExprKind::Bool(b) => Ok(Term::bool(*b)),
            ExprKind::Unary(op, x) => match op {
                UnOp::Not => Ok(Term::not(self.elab(x, Some(&Type::Bool))?)),
                UnOp::Neg => {
                    let t = self.elab(x, exp.filter(|t| t.is_numeric()))?;
                    self.expect_ty(&t, x.pos, Type::is_numeric, "a number")?;
                    Ok(Term::neg(t))
                }
                UnOp::BitNot => {
                    let t = self.elab(x, exp)?;
                    self.expect_ty(&t, x.pos, |t| matches!(t, Type::BitVec { .. }), "a bit-vector")?;
                    Ok(Term::new(t.ty.clone(), TermKind::Unary(UnOp::BitNot, Box::new(t))))
                }
            },
            ExprKind::Binary(op, a, b) => self.binary(*op, a, b, exp, pos),
            ExprKind::Call(f, args) => self.call(f, args, exp, pos),
            ExprKind::Field(x, f) => {
                let t = self.elab(x, None)?;
                let ft = self.sym().field_type(&t.ty, f).ok_or_else(|| {
                    Error::ty(pos, format!("type `{}` has no field `{f}`", t.ty))
                })?;
                Ok(Term::field(t, f.clone(), ft))
            }
            ExprKind::Index(a, i) => {
                let ta = self.elab(a, None)?;
                match ta.ty.clone() {
                    Type::Seq(_) => {
                        let ti = self.elab(i, Some(&Type::Int))?;
                        Ok(Term::index(ta, ti))
                    }
                    Type::Map(k, _) => {
                        let tk = self.elab(i, Some(&k))?;
                        Ok(Term::get(ta, tk))
                    }
                    t => Err(Error::ty(pos, format!("cannot index a value of type `{t}`"))),
                }
            }
            ExprKind::StructLit(n, fs) => {
                let decl = self
                    .sym()
                    .structure(n)
                    .ok_or_else(|| Error::ty(pos, format!("unknown structure `{n}`")))?
                    .clone();
                let mut given: BTreeMap<&str, &Expr> = BTreeMap::new();
                for (f, v) in fs {
                    if decl.field(f).is_none() {
                        return Err(Error::ty(v.pos, format!("structure `{n}` has no field `{f}`")));
                    }
                    if given.insert(f, v).is_some() {
                        return Err(Error::ty(v.pos, format!("field `{f}` given twice")));
                    }
                }
                let mut out = Vec::new();
                for (f, t) in &decl.fields {
                    let v = given
                        .get(f.as_str())
                        .ok_or_else(|| Error::ty(pos, format!("missing field `{f}` in `{n}` literal")))?;
                    out.push((f.clone(), self.elab(v, Some(t))?));
                }
                Ok(Term::new(Type::Struct(n.clone()), TermKind::StructLit(n.clone(), out)))
            }
            ExprKind::Update { base, assigns, .. } => {
                let mut t = self.elab(base, exp)?;
                for (path, v) in assigns {
                    let (steps, leaf) = self.path(&t.ty, path, pos)?;
                    let tv = self.elab(v, Some(&leaf))?;
                    let ty = t.ty.clone();
                    t = Term::new(ty, TermKind::Update(Box::new(t), steps, Box::new(tv)));
                }
                Ok(t)
            }
            ExprKind::If(c, a, b) => {
                let tc = self.elab(c, Some(&Type::Bool))?;
                let (ta, tb) = self.pair(a, b, exp)?;
                Ok(Term::ite(tc, ta, tb))
            }
            ExprKind::Switch(s, cases, default) => self.switch(s, cases, default.as_deref(), exp, pos),
            ExprKind::Let(v, r, b) => {
                let tr = self.elab(r, None)?;
                self.locals.push((v.clone(), tr.ty.clone()));
                let tb = self.elab(b, exp);
                self.locals.pop();
                let tb = tb?;
                Ok(Term::new(tb.ty.clone(), TermKind::Let(v.clone(), Box::new(tr), Box::new(tb))))
            }
            ExprKind::Quant(q, ty, v, bound, body) => {
                let ty = self.resolve(ty, pos)?;
                let bound = match bound.as_deref() {
                    None => None,
                    Some(BoundSyn::Range(lo, hi)) => {
                        if !ty.is_numeric() {
                            return Err(Error::ty(pos, "range bound on a non-numeric variable"));
                        }
                        let lo = self.elab(lo, Some(&ty))?;
                        let hi = self.elab(hi, Some(&ty))?;
                        Some(Bound::Range(Box::new(lo), Box::new(hi)))
                    }
                    Some(BoundSyn::Keys(m)) => {
                        let tm = self.elab(m, None)?;
                        match &tm.ty {
                            Type::Map(k, _) if **k == ty => {}
                            t => {
                                return Err(Error::ty(
                                    m.pos,
                                    format!("`keys` bound needs a map with key type `{ty}`, found `{t}`"),
                                ))
                            }
                        }
                        Some(Bound::Keys(Box::new(tm)))
                    }
                };
                self.locals.push((v.clone(), ty.clone()));
                let tb = self.elab(body, Some(&Type::Bool));
                self.locals.pop();
                Ok(Term::new(
                    Type::Bool,
                    TermKind::Quant(*q, v.clone(), ty, bound, Box::new(tb?)),
                ))
            }
            ExprKind::Default(t) => Ok(Term::default_of(self.resolve(t, pos)?)),
        }
    }

    fn binary(&mut self, op: BinOp, a: &Expr, b: &Expr, exp: Option<&Type>, pos: Pos) -> Result<Term> {
        if op.is_logical() {
            let ta = self.elab(a, Some(&Type::Bool))?;
            let tb = self.elab(b, Some(&Type::Bool))?;
            return Ok(Term::binary(op, ta, tb));
        }
        if op.is_comparison() {
            let (ta, tb) = self.pair(a, b, None)?;
            if !matches!(op, BinOp::Eq | BinOp::Ne) && !ta.ty.is_numeric() {
                return Err(Error::ty(pos, format!("ordering comparison on `{}`", ta.ty)));
            }
            return Ok(Term::binary(op, ta, tb));
        }
        let (ta, tb) = self.pair(a, b, exp.filter(|t| t.is_numeric()))?;
        if op.is_bitwise() {
            if !matches!(ta.ty, Type::BitVec { .. }) {
                return Err(Error::ty(pos, format!("bitwise `{}` needs bit-vectors, found `{}`", op.symbol(), ta.ty)));
            }
        } else if !ta.ty.is_numeric() {
            return Err(Error::ty(pos, format!("arithmetic `{}` on `{}`", op.symbol(), ta.ty)));
        }
        Ok(Term::binary(op, ta, tb))
    }

    fn arity(&self, f: &str, args: &[Expr], n: usize, pos: Pos) -> Result<()> {
        if args.len() == n {
            Ok(())
        } else {
            Err(Error::ty(pos, format!("`{f}` takes {n} argument(s), {} given", args.len())))
        }
    }

    fn seq_arg(&mut self, e: &Expr, exp: Option<&Type>) -> Result<Term> {
        let t = self.elab(e, exp.filter(|t| matches!(t, Type::Seq(_))))?;
        self.expect_ty(&t, e.pos, |t| matches!(t, Type::Seq(_)), "a sequence")?;
        Ok(t)
    }

    fn call(&mut self, f: &str, args: &[Expr], exp: Option<&Type>, pos: Pos) -> Result<Term> {
        use TermKind as K;
        let b = Box::new;
        if let Some(def) = self.prog.functions.get(f) {
            self.arity(f, args, def.params.len(), pos)?;
            let mut targs = Vec::new();
            for (a, (_, t)) in args.iter().zip(&def.params) {
                targs.push(self.elab(a, Some(t))?);
            }
            return Ok(Term::new(def.ret.clone(), K::App(f.to_string(), targs)));
        }
        if let Some((en, br)) = self.sym().ctors.get(f).cloned() {
            let params = self.sym().enums[&en].branches[br].params.clone();
            self.arity(f, args, params.len(), pos)?;
            let mut targs = Vec::new();
            for (a, (_, t)) in args.iter().zip(&params) {
                targs.push(self.elab(a, Some(t))?);
            }
            return Ok(Term::new(
                Type::Enum(en),
                K::Construct { ctor: f.to_string(), branch: br, args: targs },
            ));
        }
        match f {
            "len" => {
                self.arity(f, args, 1, pos)?;
                Ok(Term::length(self.seq_arg(&args[0], None)?))
            }
            "append" => {
                self.arity(f, args, 2, pos)?;
                let (x, y) = self.pair(&args[0], &args[1], exp.filter(|t| matches!(t, Type::Seq(_))))?;
                self.expect_ty(&x, args[0].pos, |t| matches!(t, Type::Seq(_)), "a sequence")?;
                Ok(Term::new(x.ty.clone(), K::Append(b(x), b(y))))
            }
            "cons" => {
                self.arity(f, args, 2, pos)?;
                let a = self.seq_arg(&args[1], exp)?;
                let x = self.elab(&args[0], a.ty.elem())?;
                Ok(Term::new(a.ty.clone(), K::Cons(b(x), b(a))))
            }
            "update" => {
                self.arity(f, args, 3, pos)?;
                let c = self.elab(&args[2], exp)?;
                match c.ty.clone() {
                    Type::Seq(e) => {
                        let i = self.elab(&args[0], Some(&Type::Int))?;
                        let v = self.elab(&args[1], Some(&e))?;
                        Ok(Term::new(c.ty.clone(), K::SeqUpdate(b(i), b(v), b(c))))
                    }
                    Type::Map(k, v) => {
                        let tk = self.elab(&args[0], Some(&k))?;
                        let tv = self.elab(&args[1], Some(&v))?;
                        Ok(Term::new(c.ty.clone(), K::MapUpdate(b(tk), b(tv), b(c))))
                    }
                    t => Err(Error::ty(args[2].pos, format!("`update` on `{t}`"))),
                }
            }
            "slice" => {
                self.arity(f, args, 3, pos)?;
                let a = self.seq_arg(&args[2], exp)?;
                let l = self.elab(&args[0], Some(&Type::Int))?;
                let r = self.elab(&args[1], Some(&Type::Int))?;
                Ok(Term::new(a.ty.clone(), K::Slice(b(l), b(r), b(a))))
            }
            "repeat" => {
                self.arity(f, args, 2, pos)?;
                let x = self.elab(&args[0], exp.and_then(|t| t.elem()))?;
                let n = self.elab(&args[1], Some(&Type::Int))?;
                Ok(Term::new(Type::seq(x.ty.clone()), K::Repeat(b(x), b(n))))
            }
            "remove" => {
                self.arity(f, args, 2, pos)?;
                let a = self.seq_arg(&args[1], exp)?;
                let k = self.elab(&args[0], Some(&Type::Int))?;
                Ok(Term::new(a.ty.clone(), K::Remove(b(k), b(a))))
            }
            "indom" => {
                self.arity(f, args, 2, pos)?;
                let m = self.elab(&args[1], None)?;
                let Type::Map(k, _) = m.ty.clone() else {
                    return Err(Error::ty(args[1].pos, format!("`indom` on `{}`", m.ty)));
                };
                let tk = self.elab(&args[0], Some(&k))?;
                Ok(Term::indom(tk, m))
            }
            "empty" => {
                self.arity(f, args, 0, pos)?;
                match exp {
                    Some(t @ Type::Map(..)) => Ok(Term::new(t.clone(), K::MapEmpty)),
                    // The empty sequence is the default sequence.
                    Some(t @ Type::Seq(_)) => Ok(Term::default_of(t.clone())),
                    _ => Err(Error::ty(pos, "cannot infer the type of `empty()`")),
                }
            }
            "max" | "min" => {
                self.arity(f, args, 2, pos)?;
                let (x, y) = self.pair(&args[0], &args[1], exp.filter(|t| t.is_numeric()))?;
                self.expect_ty(&x, args[0].pos, Type::is_numeric, "a number")?;
                Ok(if f == "max" { Term::max(x, y) } else { Term::min(x, y) })
            }
            _ => {
                let target = f.strip_prefix("to_").and_then(Type::primitive_from_name);
                match target {
                    Some(t) if t.is_numeric() => {
                        self.arity(f, args, 1, pos)?;
                        let x = self.elab(&args[0], None)?;
                        self.expect_ty(&x, args[0].pos, Type::is_numeric, "a number")?;
                        Ok(Term::new(t, K::Convert(b(x))))
                    }
                    _ => Err(Error::ty(pos, format!("unknown function `{f}`"))),
                }
            }
        }
    }

    fn path(&mut self, ty: &Type, path: &[PathSyn], pos: Pos) -> Result<(Vec<PathStep>, Type)> {
        let mut ty = ty.clone();
        let mut steps = Vec::new();
        for s in path {
            match s {
                PathSyn::Field(f) => match &ty {
                    Type::Struct(_) => {
                        let ft = self.sym().field_type(&ty, f).ok_or_else(|| {
                            Error::ty(pos, format!("type `{ty}` has no field `{f}`"))
                        })?;
                        steps.push(PathStep::Field(f.clone()));
                        ty = ft;
                    }
                    Type::Enum(_) => {
                        return Err(Error::ty(
                            pos,
                            format!("update path cannot go through enumeration field `{f}` of `{ty}`"),
                        ))
                    }
                    _ => return Err(Error::ty(pos, format!("type `{ty}` has no field `{f}`"))),
                },
                PathSyn::Index(i) => match ty.clone() {
                    Type::Seq(e) => {
                        steps.push(PathStep::Index(self.elab(i, Some(&Type::Int))?));
                        ty = *e;
                    }
                    Type::Map(k, v) => {
                        steps.push(PathStep::Index(self.elab(i, Some(&k))?));
                        ty = *v;
                    }
                    t => return Err(Error::ty(pos, format!("cannot index a value of type `{t}`"))),
                },
            }
        }
        Ok((steps, ty))
    }

    fn pattern(&mut self, p: &PatSyn, ty: &Type, pos: Pos, bound: &mut Vec<(String, Type)>) -> Result<Pattern> {
        Ok(match p {
            PatSyn::Wild => Pattern::Wild,
            PatSyn::Int(v) => {
                if !ty.is_numeric() {
                    return Err(Error::ty(pos, format!("integer pattern against `{ty}`")));
                }
                Pattern::Lit(Term::lit(*v, ty.clone()))
            }
            PatSyn::Bool(b) => {
                if *ty != Type::Bool {
                    return Err(Error::ty(pos, format!("boolean pattern against `{ty}`")));
                }
                Pattern::Lit(Term::bool(*b))
            }
            PatSyn::Ident(n) => {
                if let Some((en, br)) = self.sym().ctors.get(n) {
                    if Type::Enum(en.clone()) != *ty {
                        return Err(Error::ty(pos, format!("constructor `{n}` does not build `{ty}`")));
                    }
                    if !self.sym().enums[en].branches[*br].params.is_empty() {
                        return Err(Error::ty(pos, format!("constructor `{n}` expects arguments")));
                    }
                    Pattern::Ctor { ctor: n.clone(), branch: *br, args: vec![] }
                } else if let Some(c) = self.prog.consts.get(n) {
                    if c.ty != *ty {
                        return Err(mismatch(pos, ty, &c.ty));
                    }
                    Pattern::Lit(c.clone())
                } else {
                    if bound.iter().any(|(m, _)| m == n) {
                        return Err(Error::ty(pos, format!("variable `{n}` bound twice in pattern")));
                    }
                    bound.push((n.clone(), ty.clone()));
                    Pattern::Var(n.clone(), ty.clone())
                }
            }
            PatSyn::Ctor(c, args) => {
                let Some((en, br)) = self.sym().ctors.get(c).cloned() else {
                    return Err(Error::ty(pos, format!("unknown constructor `{c}`")));
                };
                if Type::Enum(en.clone()) != *ty {
                    return Err(Error::ty(pos, format!("constructor `{c}` does not build `{ty}`")));
                }
                let params = self.sym().enums[&en].branches[br].params.clone();
                if params.len() != args.len() {
                    return Err(Error::ty(
                        pos,
                        format!("constructor `{c}` takes {} argument(s), {} given", params.len(), args.len()),
                    ));
                }
                let mut out = Vec::new();
                for (a, (_, t)) in args.iter().zip(&params) {
                    out.push(self.pattern(a, t, pos, bound)?);
                }
                Pattern::Ctor { ctor: c.clone(), branch: br, args: out }
            }
            PatSyn::Struct(n, fs) => {
                if Type::Struct(n.clone()) != *ty {
                    return Err(Error::ty(pos, format!("structure pattern `{n}` against `{ty}`")));
                }
                let decl = self.sym().structs[n].clone();
                let mut out = Vec::new();
                for (f, sub) in fs {
                    let ft = decl
                        .field(f)
                        .ok_or_else(|| Error::ty(pos, format!("structure `{n}` has no field `{f}`")))?
                        .clone();
                    out.push((f.clone(), self.pattern(sub, &ft, pos, bound)?));
                }
                Pattern::Struct(n.clone(), out)
            }
        })
    }

    fn switch(
        &mut self,
        s: &Expr,
        cases: &[(PatSyn, Expr)],
        default: Option<&Expr>,
        exp: Option<&Type>,
        pos: Pos,
    ) -> Result<Term> {
        let ts = self.elab(s, None)?;
        let mut out = Vec::new();
        let mut result_ty = exp.cloned();
        // Bodies with a context-free type fix the result type for the others.
        let order: Vec<usize> = (0..cases.len())
            .filter(|i| !is_poly(&cases[*i].1))
            .chain((0..cases.len()).filter(|i| is_poly(&cases[*i].1)))
            .collect();
        let mut typed: Vec<Option<(Pattern, Term)>> = vec![None; cases.len()];
        for i in order {
            let (p, body) = &cases[i];
            let mut bound = Vec::new();
            let tp = self.pattern(p, &ts.ty, body.pos, &mut bound)?;
            let n = self.locals.len();
            self.locals.extend(bound);
            let tb = self.elab(body, result_ty.as_ref());
            self.locals.truncate(n);
            let tb = tb?;
            result_ty.get_or_insert_with(|| tb.ty.clone());
            typed[i] = Some((tp, tb));
        }
        let td = match default {
            Some(d) => {
                let t = self.elab(d, result_ty.as_ref())?;
                Some(Box::new(t))
            }
            None => None,
        };
        out.extend(typed.into_iter().map(|c| c.unwrap()));
        if td.is_none() {
            if out.is_empty() {
                return Err(Error::ty(pos, "switch without cases"));
            }
            if !exhaustive(&out.iter().map(|(p, _)| p.clone()).collect::<Vec<_>>(), &ts.ty, self.sym()) {
                return Err(Error::ty(pos, "non-exhaustive switch without `default`"));
            }
        }
        let ty = match (&td, out.first()) {
            (Some(d), _) => d.ty.clone(),
            (None, Some((_, b))) => b.ty.clone(),
            _ => unreachable!(),
        };
        Ok(Term::new(ty, TermKind::Switch(Box::new(ts), out, td)))
    }
}

/// Conservative exhaustiveness: an irrefutable case, both booleans, or an
/// irrefutable constructor case for every branch.
pub fn exhaustive(pats: &[Pattern], ty: &Type, sym: &Symbols) -> bool {
    if pats.iter().any(Pattern::is_irrefutable) {
        return true;
    }
    match ty {
        Type::Bool => [true, false].iter().all(|b| {
            pats.iter().any(|p| matches!(p, Pattern::Lit(t) if t.as_bool() == Some(*b)))
        }),
        Type::Enum(e) => {
            let n = sym.enums[e].branches.len();
            (0..n).all(|i| {
                pats.iter().any(|p| {
                    matches!(p, Pattern::Ctor { branch, args, .. }
                        if *branch == i && args.iter().all(Pattern::is_irrefutable))
                })
            })
        }
        _ => false,
    }
}
