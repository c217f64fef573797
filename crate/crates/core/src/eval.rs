//! Brute-force evaluation over small finite domains. Used as an independent
//! oracle for the normalizer and the encoding.

use std::collections::BTreeMap;

use crate::check::Program;
use crate::term::{BinOp, Bound, PathStep, Pattern, Quantifier, Term, TermKind, UnOp};
use crate::types::{Symbols, Type};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Value {
    Bool(bool),
    /// Integers; bit-vectors hold their unsigned bit pattern.
    Int(i128),
    /// Element of a type parameter's carrier.
    Opaque(u32),
    Seq(Vec<Value>),
    Map(BTreeMap<i128, Value>),
    Struct(BTreeMap<String, Value>),
    /// Tag plus every field of every branch.
    Enum(i128, BTreeMap<String, Value>),
}

impl Value {
    pub fn as_bool(&self) -> bool {
        match self {
            Value::Bool(b) => *b,
            v => panic!("not a boolean: {v:?}"),
        }
    }

    pub fn as_int(&self) -> i128 {
        match self {
            Value::Int(i) => *i,
            v => panic!("not a number: {v:?}"),
        }
    }
}

/// Bounds of the finite domains.
#[derive(Clone, Debug)]
pub struct Domains {
    pub ints: Vec<i128>,
    pub max_len: usize,
    pub keys: Vec<i128>,
    /// Range of an unbounded integer quantifier.
    pub window: (i128, i128),
    pub params: u32,
}

impl Default for Domains {
    fn default() -> Domains {
        Domains { ints: vec![-1, 0, 1, 2], max_len: 3, keys: vec![0, 1, 2], window: (-6, 8), params: 2 }
    }
}

/// Values of the variables and of the designated default constants.
#[derive(Clone, Debug, Default)]
pub struct Model {
    pub vars: BTreeMap<String, Value>,
    pub defaults: BTreeMap<Type, Value>,
}

pub type Interp<'a> = &'a dyn Fn(&str, &[Value]) -> Value;

fn signed_of(v: i128, width: u32, signed: bool) -> i128 {
    if signed && v >= 1 << (width - 1) {
        v - (1 << width)
    } else {
        v
    }
}

fn wrap(v: i128, width: u32) -> i128 {
    v.rem_euclid(1 << width)
}

/// Numeric value of a number of type `ty`, honoring signedness.
pub fn numeric(v: &Value, ty: &Type) -> i128 {
    match ty {
        Type::BitVec { width, signed } => signed_of(v.as_int(), *width, *signed),
        _ => v.as_int(),
    }
}

pub struct Evaluator<'a> {
    pub prog: &'a Program,
    pub dom: &'a Domains,
    pub funs: Interp<'a>,
}

impl Evaluator<'_> {
    fn sym(&self) -> &Symbols {
        &self.prog.sym
    }

    pub fn default(&self, ty: &Type, m: &Model) -> Value {
        match ty {
            Type::Seq(_) => Value::Seq(Vec::new()),
            Type::Map(..) => Value::Map(BTreeMap::new()),
            Type::Struct(s) => Value::Struct(
                self.sym().structs[s].fields.iter().map(|(f, t)| (f.clone(), self.default(t, m))).collect(),
            ),
            Type::Enum(e) => Value::Enum(
                self.default(&Type::Int, m).as_int(),
                self.sym().enums[e].all_fields().iter().map(|(f, t)| (f.clone(), self.default(t, m))).collect(),
            ),
            prim => m.defaults.get(prim).cloned().unwrap_or_else(|| panic!("no default for {prim}")),
        }
    }

    pub fn eval_bool(&self, t: &Term, m: &Model) -> bool {
        self.eval(t, &mut m.clone()).as_bool()
    }

    pub fn eval(&self, t: &Term, m: &mut Model) -> Value {
        use TermKind as K;
        let ty = &t.ty;
        match &t.kind {
            K::Var(v) => m.vars.get(v).cloned().unwrap_or_else(|| panic!("unbound `{v}`")),
            K::Bool(b) => Value::Bool(*b),
            K::Int(v) => Value::Int(*v),
            K::Default => self.default(ty, m),
            K::Unary(op, x) => {
                let v = self.eval(x, m);
                match (op, ty) {
                    (UnOp::Not, _) => Value::Bool(!v.as_bool()),
                    (UnOp::Neg, Type::BitVec { width, .. }) => Value::Int(wrap(-v.as_int(), *width)),
                    (UnOp::Neg, _) => Value::Int(-v.as_int()),
                    (UnOp::BitNot, Type::BitVec { width, .. }) => Value::Int(wrap(!v.as_int(), *width)),
                    (UnOp::BitNot, _) => unreachable!(),
                }
            }
            K::Binary(op, a, b) => self.binary(*op, a, b, m),
            K::Ite(c, a, b) => {
                if self.eval(c, m).as_bool() {
                    self.eval(a, m)
                } else {
                    self.eval(b, m)
                }
            }
            K::App(f, args) => {
                let vals: Vec<Value> = args.iter().map(|a| self.eval(a, m)).collect();
                let def = &self.prog.functions[f];
                match &def.body {
                    Some(body) => {
                        let mut inner = Model { vars: BTreeMap::new(), defaults: m.defaults.clone() };
                        for ((p, _), v) in def.params.iter().zip(vals) {
                            inner.vars.insert(p.clone(), v);
                        }
                        self.eval(body, &mut inner)
                    }
                    None => (self.funs)(f, &vals),
                }
            }
            K::Convert(x) => {
                let n = numeric(&self.eval(x, m), &x.ty);
                match ty {
                    Type::BitVec { width, .. } => Value::Int(wrap(n, *width)),
                    _ => Value::Int(n),
                }
            }
            K::Field(x, f) => match self.eval(x, m) {
                Value::Struct(fs) => fs[f].clone(),
                Value::Enum(id, _) if f == "id" => Value::Int(id),
                Value::Enum(_, fs) => fs[f].clone(),
                v => panic!("field `{f}` of {v:?}"),
            },
            K::StructLit(_, fs) => Value::Struct(fs.iter().map(|(f, e)| (f.clone(), self.eval(e, m))).collect()),
            K::Construct { branch, args, .. } => {
                let Type::Enum(e) = ty else { unreachable!() };
                let Value::Enum(_, mut fs) = self.default(ty, m) else { unreachable!() };
                for ((p, _), a) in self.sym().enums[e].branches[*branch].params.iter().zip(args) {
                    fs.insert(p.clone(), self.eval(a, m));
                }
                Value::Enum(*branch as i128, fs)
            }
            K::Update(base, path, v) => {
                let b = self.eval(base, m);
                let v = self.eval(v, m);
                let mut idx = Vec::new();
                for s in path {
                    idx.push(match s {
                        PathStep::Index(i) => Some(self.eval(i, m).as_int()),
                        PathStep::Field(_) => None,
                    });
                }
                self.update(b, &base.ty, path, &idx, v, m)
            }
            K::Switch(s, cases, default) => {
                let v = self.eval(s, m);
                for (p, body) in cases {
                    let mut binds = Vec::new();
                    if self.matches(p, &v, &mut binds) {
                        return self.with_binds(binds, body, m);
                    }
                }
                if let Some(d) = default {
                    return self.eval(d, m);
                }
                // A tag outside the declared branches falls into the last case.
                let (p, body) = cases.last().expect("cases");
                let mut binds = Vec::new();
                self.bind_all(p, &v, &mut binds);
                self.with_binds(binds, body, m)
            }
            K::Let(x, e, body) => {
                let v = self.eval(e, m);
                self.with_binds(vec![(x.clone(), v)], body, m)
            }
            K::Quant(q, x, xty, bound, body) => self.quantifier(*q, x, xty, bound.as_ref(), body, m),
            K::Index(a, i) => {
                let Value::Seq(s) = self.eval(a, m) else { unreachable!() };
                let i = self.eval(i, m).as_int();
                if 0 <= i && (i as usize) < s.len() {
                    s[i as usize].clone()
                } else {
                    self.default(ty, m)
                }
            }
            K::Length(a) => {
                let Value::Seq(s) = self.eval(a, m) else { unreachable!() };
                Value::Int(s.len() as i128)
            }
            K::Get(mp, k) => {
                let Value::Map(mv) = self.eval(mp, m) else { unreachable!() };
                let k = self.eval(k, m).as_int();
                mv.get(&k).cloned().unwrap_or_else(|| self.default(ty, m))
            }
            K::Indom(k, mp) => {
                let k = self.eval(k, m).as_int();
                let Value::Map(mv) = self.eval(mp, m) else { unreachable!() };
                Value::Bool(mv.contains_key(&k))
            }
            K::Append(a, b) => {
                let (Value::Seq(mut x), Value::Seq(y)) = (self.eval(a, m), self.eval(b, m)) else { unreachable!() };
                x.extend(y);
                Value::Seq(x)
            }
            K::Cons(v, a) => {
                let v = self.eval(v, m);
                let Value::Seq(mut s) = self.eval(a, m) else { unreachable!() };
                s.insert(0, v);
                Value::Seq(s)
            }
            K::SeqUpdate(i, v, a) => {
                let i = self.eval(i, m).as_int();
                let v = self.eval(v, m);
                let Value::Seq(mut s) = self.eval(a, m) else { unreachable!() };
                if 0 <= i && (i as usize) < s.len() {
                    s[i as usize] = v;
                }
                Value::Seq(s)
            }
            K::Slice(l, r, a) => {
                let l = self.eval(l, m).as_int();
                let r = self.eval(r, m).as_int();
                let Value::Seq(s) = self.eval(a, m) else { unreachable!() };
                let lo = l.clamp(0, s.len() as i128) as usize;
                let hi = r.clamp(0, s.len() as i128) as usize;
                Value::Seq(if lo < hi { s[lo..hi].to_vec() } else { Vec::new() })
            }
            K::Repeat(v, n) => {
                let v = self.eval(v, m);
                let n = self.eval(n, m).as_int().max(0) as usize;
                Value::Seq(vec![v; n])
            }
            K::Remove(k, a) => {
                // Removes position k, clamped into the sequence.
                let k = self.eval(k, m).as_int();
                let Value::Seq(mut s) = self.eval(a, m) else { unreachable!() };
                if !s.is_empty() {
                    let at = k.clamp(0, s.len() as i128 - 1) as usize;
                    s.remove(at);
                }
                Value::Seq(s)
            }
            K::MapEmpty => Value::Map(BTreeMap::new()),
            K::MapUpdate(k, v, mp) => {
                let k = self.eval(k, m).as_int();
                let v = self.eval(v, m);
                let Value::Map(mut mv) = self.eval(mp, m) else { unreachable!() };
                mv.insert(k, v);
                Value::Map(mv)
            }
        }
    }

    fn with_binds(&self, binds: Vec<(String, Value)>, body: &Term, m: &mut Model) -> Value {
        let saved: Vec<(String, Option<Value>)> =
            binds.iter().map(|(x, _)| (x.clone(), m.vars.get(x).cloned())).collect();
        for (x, v) in binds {
            m.vars.insert(x, v);
        }
        let r = self.eval(body, m);
        for (x, old) in saved.into_iter().rev() {
            match old {
                Some(v) => m.vars.insert(x, v),
                None => m.vars.remove(&x),
            };
        }
        r
    }

    fn quantifier(&self, q: Quantifier, x: &str, ty: &Type, bound: Option<&Bound>, body: &Term, m: &mut Model) -> Value {
        let candidates: Vec<Value> = match bound {
            Some(Bound::Keys(mp)) => {
                let Value::Map(mv) = self.eval(mp, m) else { unreachable!() };
                mv.keys().map(|k| Value::Int(*k)).collect()
            }
            Some(Bound::Range(lo, hi)) => {
                let (lo, hi) = (numeric(&self.eval(lo, m), ty), numeric(&self.eval(hi, m), ty));
                match ty {
                    Type::Int => (lo..hi.min(lo + 10_000)).map(Value::Int).collect(),
                    _ => self.quant_domain(ty).into_iter().filter(|v| (lo..hi).contains(&numeric(v, ty))).collect(),
                }
            }
            None => self.quant_domain(ty),
        };
        let want = q == Quantifier::Exists;
        for v in candidates {
            if self.with_binds(vec![(x.to_string(), v)], body, m).as_bool() == want {
                return Value::Bool(want);
            }
        }
        Value::Bool(!want)
    }

    fn quant_domain(&self, ty: &Type) -> Vec<Value> {
        match ty {
            Type::Int => (self.dom.window.0..=self.dom.window.1).map(Value::Int).collect(),
            _ => values(ty, self.dom, self.sym()),
        }
    }

    fn matches(&self, p: &Pattern, v: &Value, binds: &mut Vec<(String, Value)>) -> bool {
        match p {
            Pattern::Wild => true,
            Pattern::Var(x, _) => {
                binds.push((x.clone(), v.clone()));
                true
            }
            Pattern::Lit(t) => {
                let lit = self.eval(t, &mut Model::default());
                lit == *v
            }
            Pattern::Ctor { ctor, branch, args } => {
                let Value::Enum(id, fs) = v else { return false };
                if *id != *branch as i128 {
                    return false;
                }
                let (e, _) = &self.sym().ctors[ctor];
                let params = &self.sym().enums[e].branches[*branch].params;
                params.iter().zip(args).all(|((f, _), a)| self.matches(a, &fs[f], binds))
            }
            Pattern::Struct(_, fields) => {
                let Value::Struct(fs) = v else { return false };
                fields.iter().all(|(f, a)| self.matches(a, &fs[f], binds))
            }
        }
    }

    /// Bindings of a pattern's variables, ignoring whether it matches.
    fn bind_all(&self, p: &Pattern, v: &Value, binds: &mut Vec<(String, Value)>) {
        match (p, v) {
            (Pattern::Var(x, _), _) => binds.push((x.clone(), v.clone())),
            (Pattern::Ctor { ctor, branch, args }, Value::Enum(_, fs)) => {
                let (e, _) = &self.sym().ctors[ctor];
                let params = &self.sym().enums[e].branches[*branch].params;
                for ((f, _), a) in params.iter().zip(args) {
                    self.bind_all(a, &fs[f], binds);
                }
            }
            (Pattern::Struct(_, fields), Value::Struct(fs)) => {
                for (f, a) in fields {
                    self.bind_all(a, &fs[f], binds);
                }
            }
            _ => {}
        }
    }

    fn update(&self, base: Value, ty: &Type, path: &[PathStep], idx: &[Option<i128>], v: Value, m: &Model) -> Value {
        let Some((step, rest)) = path.split_first() else { return v };
        match (step, base, ty) {
            (PathStep::Field(f), Value::Struct(mut fs), Type::Struct(s)) => {
                let fty = self.sym().structs[s].field(f).expect("field").clone();
                let old = fs.remove(f).expect("field");
                fs.insert(f.clone(), self.update(old, &fty, rest, &idx[1..], v, m));
                Value::Struct(fs)
            }
            (PathStep::Index(_), Value::Seq(mut s), Type::Seq(et)) => {
                let i = idx[0].unwrap();
                if 0 <= i && (i as usize) < s.len() {
                    let old = s[i as usize].clone();
                    s[i as usize] = self.update(old, et, rest, &idx[1..], v, m);
                }
                Value::Seq(s)
            }
            (PathStep::Index(_), Value::Map(mut mv), Type::Map(_, vt)) => {
                let k = idx[0].unwrap();
                let old = mv.get(&k).cloned().unwrap_or_else(|| self.default(vt, m));
                mv.insert(k, self.update(old, vt, rest, &idx[1..], v, m));
                Value::Map(mv)
            }
            (s, b, t) => panic!("bad update step {s:?} on {b:?} : {t}"),
        }
    }

    fn binary(&self, op: BinOp, a: &Term, b: &Term, m: &mut Model) -> Value {
        use BinOp::*;
        match op {
            And => return Value::Bool(self.eval(a, m).as_bool() && self.eval(b, m).as_bool()),
            Or => return Value::Bool(self.eval(a, m).as_bool() || self.eval(b, m).as_bool()),
            Implies => return Value::Bool(!self.eval(a, m).as_bool() || self.eval(b, m).as_bool()),
            _ => {}
        }
        let (x, y) = (self.eval(a, m), self.eval(b, m));
        let ty = &a.ty;
        match op {
            Iff => return Value::Bool(x == y),
            Eq => return Value::Bool(self.equal(&x, &y, ty)),
            Ne => return Value::Bool(!self.equal(&x, &y, ty)),
            _ => {}
        }
        let (p, q) = (numeric(&x, ty), numeric(&y, ty));
        let r = match op {
            Lt => return Value::Bool(p < q),
            Le => return Value::Bool(p <= q),
            Gt => return Value::Bool(p > q),
            Ge => return Value::Bool(p >= q),
            Add => p + q,
            Sub => p - q,
            Mul => p * q,
            Div => match ty {
                Type::BitVec { signed: false, width } if q == 0 => (1 << width) - 1,
                Type::BitVec { signed: true, .. } if q == 0 => {
                    if p >= 0 {
                        -1
                    } else {
                        1
                    }
                }
                Type::BitVec { signed: true, .. } => p / q,
                _ if q == 0 => 0,
                _ => p.div_euclid(q),
            },
            Mod => match ty {
                _ if q == 0 => p,
                Type::BitVec { signed: true, .. } => p % q,
                _ => p.rem_euclid(q),
            },
            BitAnd => x.as_int() & y.as_int(),
            BitOr => x.as_int() | y.as_int(),
            BitXor => x.as_int() ^ y.as_int(),
            Shl | Shr => {
                let Type::BitVec { width, signed } = ty else { unreachable!() };
                let s = y.as_int();
                if s >= *width as i128 {
                    if op == Shr && *signed && p < 0 {
                        -1
                    } else {
                        0
                    }
                } else if op == Shl {
                    x.as_int() << s
                } else if *signed {
                    p >> s
                } else {
                    x.as_int() >> s
                }
            }
            _ => unreachable!(),
        };
        match ty {
            Type::BitVec { width, .. } => Value::Int(wrap(r, *width)),
            _ => Value::Int(r),
        }
    }

    /// Equality of values as observed through the basic operations: only the
    /// fields of an enumeration's current branch count.
    pub fn equal(&self, x: &Value, y: &Value, ty: &Type) -> bool {
        match (x, y, ty) {
            (Value::Struct(a), Value::Struct(b), Type::Struct(s)) => {
                self.sym().structs[s].fields.iter().all(|(f, ft)| self.equal(&a[f], &b[f], ft))
            }
            (Value::Enum(i, a), Value::Enum(j, b), Type::Enum(e)) => {
                if i != j {
                    return false;
                }
                let decl = &self.sym().enums[e];
                match usize::try_from(*i).ok().and_then(|i| decl.branches.get(i)) {
                    Some(br) => br.params.iter().all(|(f, ft)| self.equal(&a[f], &b[f], ft)),
                    None => true,
                }
            }
            (Value::Seq(a), Value::Seq(b), Type::Seq(et)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(p, q)| self.equal(p, q, et))
            }
            (Value::Map(a), Value::Map(b), Type::Map(_, vt)) => {
                a.len() == b.len() && a.iter().all(|(k, v)| b.get(k).is_some_and(|w| self.equal(v, w, vt)))
            }
            _ => x == y,
        }
    }
}

/// Every value of `ty` within the domain bounds.
pub fn values(ty: &Type, dom: &Domains, sym: &Symbols) -> Vec<Value> {
    match ty {
        Type::Bool => vec![Value::Bool(false), Value::Bool(true)],
        Type::Int => dom.ints.iter().map(|i| Value::Int(*i)).collect(),
        Type::BitVec { width, .. } => (0..1i128 << (*width).min(8)).map(Value::Int).collect(),
        Type::Param(_) => (0..dom.params).map(Value::Opaque).collect(),
        Type::Seq(e) => {
            let elems = values(e, dom, sym);
            let mut out = vec![Value::Seq(Vec::new())];
            let mut layer = vec![Vec::new()];
            for _ in 0..dom.max_len {
                layer = layer
                    .iter()
                    .flat_map(|s: &Vec<Value>| {
                        elems.iter().map(move |x| {
                            let mut t = s.clone();
                            t.push(x.clone());
                            t
                        })
                    })
                    .collect();
                out.extend(layer.iter().cloned().map(Value::Seq));
            }
            out
        }
        Type::Map(_, v) => {
            let vals = values(v, dom, sym);
            let mut out = vec![BTreeMap::new()];
            for k in &dom.keys {
                let mut next = Vec::new();
                for mp in &out {
                    next.push(mp.clone());
                    for x in &vals {
                        let mut m2 = mp.clone();
                        m2.insert(*k, x.clone());
                        next.push(m2);
                    }
                }
                out = next;
            }
            out.into_iter().map(Value::Map).collect()
        }
        Type::Struct(s) => product(&sym.structs[s].fields, dom, sym).into_iter().map(Value::Struct).collect(),
        Type::Enum(e) => {
            let decl = &sym.enums[e];
            let fields = product(&decl.all_fields(), dom, sym);
            (0..decl.branches.len() as i128)
                .flat_map(|id| fields.iter().map(move |fs| Value::Enum(id, fs.clone())))
                .collect()
        }
        Type::Named(n) => panic!("unresolved type {n}"),
    }
}

fn product(fields: &[(String, Type)], dom: &Domains, sym: &Symbols) -> Vec<BTreeMap<String, Value>> {
    let mut out = vec![BTreeMap::new()];
    for (f, t) in fields {
        let vs = values(t, dom, sym);
        out = out
            .iter()
            .flat_map(|m| {
                vs.iter().map(move |v| {
                    let mut m = m.clone();
                    m.insert(f.clone(), v.clone());
                    m
                })
            })
            .collect();
    }
    out
}

/// Primitive types whose default constant may be observed by `ts`.
pub fn default_types(ts: &[&Term], sym: &Symbols) -> Vec<Type> {
    let mut out = std::collections::BTreeSet::new();
    fn prims(t: &Type, sym: &Symbols, out: &mut std::collections::BTreeSet<Type>) {
        match t {
            Type::Seq(e) => prims(e, sym, out),
            Type::Map(_, v) => prims(v, sym, out),
            Type::Struct(s) => sym.structs[s].fields.iter().for_each(|(_, f)| prims(f, sym, out)),
            Type::Enum(e) => {
                out.insert(Type::Int);
                sym.enums[e].all_fields().iter().for_each(|(_, f)| prims(f, sym, out));
            }
            p => {
                out.insert(p.clone());
            }
        }
    }
    for t in ts {
        t.visit(&mut |s| prims(&s.ty, sym, &mut out));
    }
    out.into_iter().collect()
}

/// Calls `f` on every model over `vars` and the given default constants
/// until it returns `false`. Returns whether all calls returned `true`.
pub fn for_all_models(
    vars: &[(String, Type)],
    defaults: &[Type],
    dom: &Domains,
    sym: &Symbols,
    f: &mut dyn FnMut(&Model) -> bool,
) -> bool {
    let var_vals: Vec<Vec<Value>> = vars.iter().map(|(_, t)| values(t, dom, sym)).collect();
    let def_vals: Vec<Vec<Value>> = defaults.iter().map(|t| values(t, dom, sym)).collect();
    let all: Vec<&Vec<Value>> = var_vals.iter().chain(&def_vals).collect();
    if all.iter().any(|v| v.is_empty()) {
        return true;
    }
    let mut ix = vec![0usize; all.len()];
    let mut m = Model::default();
    loop {
        m.vars.clear();
        m.defaults.clear();
        for (n, (name, _)) in vars.iter().enumerate() {
            m.vars.insert(name.clone(), all[n][ix[n]].clone());
        }
        for (n, t) in defaults.iter().enumerate() {
            let k = vars.len() + n;
            m.defaults.insert(t.clone(), all[k][ix[k]].clone());
        }
        if !f(&m) {
            return false;
        }
        let mut p = 0;
        loop {
            if p == ix.len() {
                return true;
            }
            ix[p] += 1;
            if ix[p] < all[p].len() {
                break;
            }
            ix[p] = 0;
            p += 1;
        }
    }
}

/// Number of models `for_all_models` would enumerate.
pub fn model_count(vars: &[(String, Type)], defaults: &[Type], dom: &Domains, sym: &Symbols) -> u128 {
    vars.iter()
        .map(|(_, t)| t)
        .chain(defaults)
        .map(|t| values(t, dom, sym).len() as u128)
        .product()
}

/// Whether `facts → conclusion` holds in every model.
pub fn valid(
    ev: &Evaluator,
    vars: &[(String, Type)],
    facts: &[Term],
    conclusion: &Term,
) -> bool {
    let mut ts: Vec<&Term> = facts.iter().collect();
    ts.push(conclusion);
    let defaults = default_types(&ts, ev.sym());
    for_all_models(vars, &defaults, ev.dom, ev.sym(), &mut |m| {
        let mut m = m.clone();
        !facts.iter().all(|f| ev.eval(f, &mut m).as_bool()) || ev.eval(conclusion, &mut m).as_bool()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev_text(src: &str, expr_goal: &str) -> bool {
        let p = Program::from_text(src).unwrap();
        let g = p.goal(expr_goal).unwrap();
        let dom = Domains::default();
        let funs = |_: &str, _: &[Value]| Value::Bool(true);
        let ev = Evaluator { prog: &p, dom: &dom, funs: &funs };
        let facts: Vec<Term> = g.assumes.iter().map(|(_, t)| t.clone()).collect();
        valid(&ev, &g.vars, &facts, &g.shows)
    }

    #[test]
    fn sequence_operations() {
        let src = "query A { Seq<int> a, b; shows len(append(a, b)) == len(a) + len(b) }
                   query B { Seq<int> a; int k; assumes 0 <= k && k < len(a); shows len(remove(k, a)) == len(a) - 1 }
                   query C { Seq<int> a; shows a[len(a)] == a[-1] }
                   query D { Seq<int> a; shows a[0] == 0 }";
        assert!(ev_text(src, "A"));
        assert!(ev_text(src, "B"));
        assert!(ev_text(src, "C"));
        assert!(!ev_text(src, "D"));
    }

    #[test]
    fn bit_vector_wraparound() {
        let src = "query A { int4u x; shows x + to_int4u(1) != to_int4u(0) }
                   query B { int4 x; shows to_int(x) < 8 && to_int(x) >= -8 }";
        assert!(!ev_text(src, "A"));
        assert!(ev_text(src, "B"));
    }

    #[test]
    fn enum_equality_ignores_other_branches() {
        let src = "enum addrval = Vnull | Vptr(int addr);
                   query A { shows Vnull == Vnull }
                   query B { addrval a, b; assumes a.id == 0 && b.id == 0; shows a == b }";
        assert!(ev_text(src, "A"));
        assert!(ev_text(src, "B"));
    }
}
