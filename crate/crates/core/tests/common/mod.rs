#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use osv::atoms::{decompose_atomic, default_value};
use osv::check::Program;
use osv::eval::{model_count, valid, default_types, Domains, Evaluator, Value};
use osv::normalize::NormalGoal;
use osv::term::{Term, TermKind};
use osv::types::{Symbols, Type};

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

pub fn corpus_files() -> Vec<PathBuf> {
    ["sequences.osv", "tcb.osv", "mutants.osv"].iter().map(|f| corpus_dir().join(f)).collect()
}

pub fn solver() -> Option<PathBuf> {
    let p = osv::smt::locate_solver(None);
    std::process::Command::new(&p).arg("-version").output().ok().filter(|o| o.status.success()).map(|_| p)
}

/// Declarations shared by every generated goal.
pub const PRELUDE: &str = "
struct Point { int x; int y; }
struct Pair { Point a; int n; }
enum Shape = Circle(int r) | Rect(int w, int h)
function inc(int x) -> int { x + 1 }
function area(Shape s) -> int { switch (s) { case Circle(r): r * r; case Rect(w, h): w * h; } }
function swap(Point p) -> Point { Point{x: p.y, y: p.x} }
predicate pos(Point p) { p.x > 0 && p.y > 0 }
";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ty {
    Bool,
    Int,
    Bv,
    Seq,
    Map,
    Point,
    Pair,
    Shape,
}

impl Ty {
    fn name(self) -> &'static str {
        match self {
            Ty::Bool => "bool",
            Ty::Int => "int",
            Ty::Bv => "int4u",
            Ty::Seq => "Seq<int>",
            Ty::Map => "Map<int, int>",
            Ty::Point => "Point",
            Ty::Pair => "Pair",
            Ty::Shape => "Shape",
        }
    }
}

const VAR_TYPES: [Ty; 8] = [Ty::Bool, Ty::Int, Ty::Bv, Ty::Seq, Ty::Map, Ty::Point, Ty::Pair, Ty::Shape];

/// Random well-typed goals in the surface syntax.
pub struct GoalGen {
    pub rng: ChaCha8Rng,
    /// Allow quantifiers.
    pub quantifiers: bool,
    /// Allow equalities between sequences and maps (they expand to
    /// quantified formulas).
    pub collection_eq: bool,
    pub depth: u32,
    scope: Vec<(String, Ty)>,
    fresh: usize,
}

impl GoalGen {
    pub fn new(seed: u64) -> GoalGen {
        GoalGen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            quantifiers: true,
            collection_eq: true,
            depth: 3,
            scope: Vec::new(),
            fresh: 0,
        }
    }

    pub fn quantifier_free(seed: u64) -> GoalGen {
        GoalGen { quantifiers: false, collection_eq: false, ..GoalGen::new(seed) }
    }

    fn name(&mut self, base: &str) -> String {
        self.fresh += 1;
        format!("{base}{}", self.fresh)
    }

    fn pick<T: Copy>(&mut self, xs: &[T]) -> T {
        *xs.choose(&mut self.rng).unwrap()
    }

    fn var_of(&mut self, ty: Ty) -> Option<String> {
        let vs: Vec<String> = self.scope.iter().filter(|(_, t)| *t == ty).map(|(v, _)| v.clone()).collect();
        vs.choose(&mut self.rng).cloned()
    }

    fn has(&self, ty: Ty) -> bool {
        self.scope.iter().any(|(_, t)| *t == ty)
    }

    /// A query named `name` over one to three variables.
    pub fn query(&mut self, name: &str) -> String {
        self.scope.clear();
        self.fresh = 0;
        let n = self.rng.gen_range(1..=3);
        let mut decls = String::new();
        for i in 0..n {
            let t = self.pick(&VAR_TYPES);
            let v = format!("v{i}");
            decls.push_str(&format!("  {} {v};\n", t.name()));
            self.scope.push((v, t));
        }
        let mut body = decls;
        for _ in 0..self.rng.gen_range(0..=2) {
            let a = self.expr(Ty::Bool, self.depth);
            body.push_str(&format!("  assumes {a};\n"));
        }
        let s = self.expr(Ty::Bool, self.depth);
        body.push_str(&format!("  shows {s};\n"));
        format!("query {name} {{\n{body}}}\n")
    }

    fn int_lit(&mut self) -> String {
        match self.rng.gen_range(-1..=2) {
            -1 => "(-1)".into(),
            v => v.to_string(),
        }
    }

    fn leaf(&mut self, ty: Ty) -> String {
        if self.rng.gen_bool(0.7) {
            if let Some(v) = self.var_of(ty) {
                return v;
            }
        }
        match ty {
            Ty::Bool => self.pick(&["true", "false"]).into(),
            Ty::Int => self.int_lit(),
            Ty::Bv => format!("to_int4u({})", self.rng.gen_range(0..16)),
            Ty::Seq => {
                let x = self.int_lit();
                format!("repeat({x}, {})", self.rng.gen_range(0..=2))
            }
            // Only generated when a map variable is in scope.
            Ty::Map => self.var_of(Ty::Map).expect("map in scope"),
            Ty::Point => {
                let (x, y) = (self.int_lit(), self.int_lit());
                format!("Point{{x: {x}, y: {y}}}")
            }
            Ty::Pair => {
                let p = self.leaf(Ty::Point);
                let n = self.int_lit();
                format!("Pair{{a: {p}, n: {n}}}")
            }
            Ty::Shape => {
                let x = self.int_lit();
                if self.rng.gen_bool(0.5) {
                    format!("Circle({x})")
                } else {
                    let y = self.int_lit();
                    format!("Rect({x}, {y})")
                }
            }
        }
    }

    fn with_var<T>(&mut self, v: &str, ty: Ty, f: impl FnOnce(&mut GoalGen) -> T) -> T {
        self.scope.push((v.to_string(), ty));
        let r = f(self);
        self.scope.pop();
        r
    }

    pub fn expr(&mut self, ty: Ty, depth: u32) -> String {
        if depth == 0 || self.rng.gen_bool(0.2) {
            return self.leaf(ty);
        }
        let d = depth - 1;
        // Constructs shared by every type.
        match self.rng.gen_range(0..12) {
            0 => {
                let c = self.expr(Ty::Bool, d);
                let (a, b) = (self.expr(ty, d), self.expr(ty, d));
                return format!("(if ({c}) {{ {a} }} else {{ {b} }})");
            }
            1 => {
                let lt = self.pick(&VAR_TYPES);
                if lt != Ty::Map || self.has(Ty::Map) {
                    let rhs = self.expr(lt, d);
                    let v = self.name("l");
                    let body = self.with_var(&v, lt, |g| g.expr(ty, d));
                    return format!("(let {v} = {rhs} in {body} end)");
                }
            }
            2 => {
                let s = self.expr(Ty::Shape, d);
                let (r, w, h) = (self.name("r"), self.name("w"), self.name("h"));
                let a = self.with_var(&r, Ty::Int, |g| g.expr(ty, d));
                if self.rng.gen_bool(0.5) {
                    let b = self.expr(ty, d);
                    return format!("(switch ({s}) {{ case Circle({r}): {a}; default: {b}; }})");
                }
                let b = self.with_var(&w, Ty::Int, |g| g.with_var(&h, Ty::Int, |g| g.expr(ty, d)));
                return format!("(switch ({s}) {{ case Circle({r}): {a}; case Rect({w}, {h}): {b}; }})");
            }
            3 => {
                let s = self.expr(Ty::Int, d);
                let (a, b, c) = (self.expr(ty, d), self.expr(ty, d), self.expr(ty, d));
                return format!("(switch ({s}) {{ case 0: {a}; case 1: {b}; default: {c}; }})");
            }
            _ => {}
        }
        match ty {
            Ty::Bool => self.bool_expr(d),
            Ty::Int => self.int_expr(d),
            Ty::Bv => {
                let op = self.pick(&["+", "-", "&", "|", "^", "<<", ">>", "*"]);
                match self.rng.gen_range(0..4) {
                    0 => format!("to_int4u({})", self.expr(Ty::Int, d)),
                    1 => format!("(~{})", self.expr(Ty::Bv, d)),
                    _ => format!("({} {op} {})", self.expr(Ty::Bv, d), self.expr(Ty::Bv, d)),
                }
            }
            Ty::Seq => {
                let a = self.expr(Ty::Seq, d);
                match self.rng.gen_range(0..6) {
                    0 => format!("append({a}, {})", self.expr(Ty::Seq, d)),
                    1 => format!("cons({}, {a})", self.expr(Ty::Int, d)),
                    2 => format!("update({}, {}, {a})", self.expr(Ty::Int, d), self.expr(Ty::Int, d)),
                    3 => format!("slice({}, {}, {a})", self.expr(Ty::Int, d), self.expr(Ty::Int, d)),
                    4 => format!("remove({}, {a})", self.expr(Ty::Int, d)),
                    _ => format!("repeat({}, {})", self.expr(Ty::Int, d), self.rng.gen_range(0..=2)),
                }
            }
            Ty::Map => {
                let m = self.expr(Ty::Map, d);
                format!("update({}, {}, {m})", self.expr(Ty::Int, d), self.expr(Ty::Int, d))
            }
            Ty::Point => match self.rng.gen_range(0..4) {
                0 => format!("Point{{x: {}, y: {}}}", self.expr(Ty::Int, d), self.expr(Ty::Int, d)),
                1 => format!("{}{{x := {}}}", self.leaf(Ty::Point), self.expr(Ty::Int, d)),
                2 => format!("{}{{|y := {}|}}", self.leaf(Ty::Point), self.expr(Ty::Int, d)),
                _ => format!("swap({})", self.expr(Ty::Point, d)),
            },
            Ty::Pair => match self.rng.gen_range(0..3) {
                0 => format!("Pair{{a: {}, n: {}}}", self.expr(Ty::Point, d), self.expr(Ty::Int, d)),
                1 => format!("{}{{|a.x := {}|}}", self.leaf(Ty::Pair), self.expr(Ty::Int, d)),
                _ => format!("{}{{|a := {}, n := {}|}}", self.leaf(Ty::Pair), self.expr(Ty::Point, d), self.expr(Ty::Int, d)),
            },
            Ty::Shape => match self.rng.gen_range(0..2) {
                0 => format!("Circle({})", self.expr(Ty::Int, d)),
                _ => format!("Rect({}, {})", self.expr(Ty::Int, d), self.expr(Ty::Int, d)),
            },
        }
    }

    fn bool_expr(&mut self, d: u32) -> String {
        loop {
            let s = match self.rng.gen_range(0..16) {
                0 => format!("({} && {})", self.expr(Ty::Bool, d), self.expr(Ty::Bool, d)),
                1 => format!("({} || {})", self.expr(Ty::Bool, d), self.expr(Ty::Bool, d)),
                2 => format!("(!{})", self.expr(Ty::Bool, d)),
                3 => format!("({} -> {})", self.expr(Ty::Bool, d), self.expr(Ty::Bool, d)),
                4 | 5 => {
                    let op = self.pick(&["<", "<=", "==", "!=", ">", ">="]);
                    format!("({} {op} {})", self.expr(Ty::Int, d), self.expr(Ty::Int, d))
                }
                6 => {
                    let op = self.pick(&["<", "==", "!="]);
                    format!("({} {op} {})", self.expr(Ty::Bv, d), self.expr(Ty::Bv, d))
                }
                7 if self.has(Ty::Map) => format!("indom({}, {})", self.expr(Ty::Int, d), self.expr(Ty::Map, d)),
                8 => format!("pos({})", self.expr(Ty::Point, d)),
                9 => {
                    let t = self.pick(&[Ty::Point, Ty::Pair, Ty::Shape, Ty::Bool]);
                    format!("({} == {})", self.expr(t, d), self.expr(t, d))
                }
                10 if self.collection_eq => {
                    let t = if self.has(Ty::Map) && self.rng.gen_bool(0.5) { Ty::Map } else { Ty::Seq };
                    let op = self.pick(&["==", "!="]);
                    format!("({} {op} {})", self.expr(t, d), self.expr(t, d))
                }
                11 | 12 if self.quantifiers => {
                    let q = self.pick(&["forall", "exists"]);
                    let v = self.name("i");
                    let (lo, hi) = (self.range_bound(), self.range_bound());
                    let body = self.with_var(&v, Ty::Int, |g| g.expr(Ty::Bool, d));
                    format!("({q} (int {v} in {lo} .. {hi}) {body})")
                }
                13 if self.quantifiers && self.has(Ty::Map) => {
                    let q = self.pick(&["forall", "exists"]);
                    let v = self.name("k");
                    let m = self.var_of(Ty::Map).unwrap();
                    let body = self.with_var(&v, Ty::Int, |g| g.expr(Ty::Bool, d));
                    format!("({q} (int {v} in keys({m})) {body})")
                }
                14 if self.quantifiers && self.rng.gen_bool(0.3) => {
                    let q = self.pick(&["forall", "exists"]);
                    let v = self.name("u");
                    let body = self.with_var(&v, Ty::Bv, |g| g.expr(Ty::Bool, d));
                    format!("({q} (int4u {v}) {body})")
                }
                15 => self.leaf(Ty::Bool),
                _ => continue,
            };
            return s;
        }
    }

    fn int_expr(&mut self, d: u32) -> String {
        loop {
            let s = match self.rng.gen_range(0..14) {
                0 | 1 => {
                    let op = self.pick(&["+", "-", "*", "/", "%"]);
                    format!("({} {op} {})", self.expr(Ty::Int, d), self.expr(Ty::Int, d))
                }
                2 => format!("len({})", self.expr(Ty::Seq, d)),
                3 | 4 => format!("{}[{}]", self.leaf_or_paren(Ty::Seq, d), self.expr(Ty::Int, d)),
                5 if self.has(Ty::Map) => format!("{}[{}]", self.leaf_or_paren(Ty::Map, d), self.expr(Ty::Int, d)),
                6 => format!("{}.{}", self.leaf_or_paren(Ty::Point, d), self.pick(&["x", "y"])),
                7 => format!("{}.a.{}", self.leaf_or_paren(Ty::Pair, d), self.pick(&["x", "y"])),
                8 => format!("{}.n", self.leaf_or_paren(Ty::Pair, d)),
                9 => format!("area({})", self.expr(Ty::Shape, d)),
                10 => format!("inc({})", self.expr(Ty::Int, d)),
                11 => format!("{}({}, {})", self.pick(&["max", "min"]), self.expr(Ty::Int, d), self.expr(Ty::Int, d)),
                12 => format!("to_int({})", self.expr(Ty::Bv, d)),
                13 => format!("{}.{}", self.leaf_or_paren(Ty::Shape, d), self.pick(&["r", "w", "h"])),
                _ => continue,
            };
            return s;
        }
    }

    /// Range bound that stays within the evaluator's integer window: a small
    /// literal, an integer goal or range variable, or a sequence length.
    fn range_bound(&mut self) -> String {
        let mut opts: Vec<String> = (-1..=2).map(|n: i32| n.to_string()).collect();
        for (v, t) in &self.scope {
            match t {
                Ty::Int if v.starts_with('v') || v.starts_with('i') => opts.push(v.clone()),
                Ty::Seq if v.starts_with('v') => opts.push(format!("len({v})")),
                _ => {}
            }
        }
        opts.choose(&mut self.rng).unwrap().clone()
    }

    fn leaf_or_paren(&mut self, ty: Ty, d: u32) -> String {
        let e = self.expr(ty, d);
        if e.chars().all(|c| c.is_alphanumeric() || c == '_') {
            e
        } else {
            format!("({e})")
        }
    }
}

pub fn program(query: &str) -> Program {
    Program::from_text(&format!("{PRELUDE}\n{query}")).unwrap_or_else(|e| panic!("{e}\n{query}"))
}

pub fn no_functions(_: &str, _: &[Value]) -> Value {
    panic!("no abstract functions in generated goals")
}

/// Brute-force validity of a (possibly partly normalized) goal.
pub fn goal_valid(prog: &Program, g: &NormalGoal, dom: &Domains) -> bool {
    let ev = Evaluator { prog, dom, funs: &no_functions };
    valid(&ev, &g.vars, &g.facts, &g.conclusion)
}

pub fn goal_models(prog: &Program, g: &NormalGoal, dom: &Domains) -> u128 {
    let mut ts: Vec<&Term> = g.facts.iter().collect();
    ts.push(&g.conclusion);
    model_count(&g.vars, &default_types(&ts, &prog.sym), dom, &prog.sym)
}

fn one_of(t: &Term, vals: &[i128]) -> Term {
    Term::or_all(vals.iter().map(|v| Term::eq(t.clone(), Term::int(*v))))
}

/// Facts that hold in every bounded model and confine the solver's models to
/// the evaluator's domains: integer atoms take domain values, lengths are at
/// most `max_len`, map keys come from the key set, enumeration tags are in
/// range, and reads outside a sequence or map give the default.
pub fn bounding_facts(g: &NormalGoal, sym: &Symbols, dom: &Domains) -> Vec<Term> {
    let mut atoms = std::collections::BTreeSet::new();
    for f in g.facts.iter().chain([&g.conclusion]) {
        f.visit(&mut |t| {
            if t.ty.is_primitive() && (decompose_atomic(t).is_some() || matches!(t.kind, TermKind::Default)) {
                atoms.insert(t.clone());
            }
        });
    }
    let mut out = Vec::new();
    for t in &atoms {
        match (&t.kind, &t.ty) {
            (TermKind::Length(_), _) => out.push(Term::le(t.clone(), Term::int(dom.max_len as i128))),
            (TermKind::Field(e, f), Type::Int) if f == "id" && matches!(e.ty, Type::Enum(_)) => {
                let Type::Enum(en) = &e.ty else { unreachable!() };
                let n = sym.enums[en].branches.len() as i128;
                out.push(Term::in_range(Term::int(0), t.clone(), Term::int(n)));
            }
            (TermKind::Indom(k, _), _) => out.push(Term::implies(t.clone(), one_of(k, &dom.keys))),
            (_, Type::Int) => out.push(one_of(t, &dom.ints)),
            _ => {}
        }
        if matches!(t.kind, TermKind::Default) {
            continue;
        }
        let dflt = match &t.kind {
            TermKind::Length(_) => Term::int(0),
            TermKind::Indom(..) => Term::bool(false),
            _ => default_value(&t.ty),
        };
        let mut spine = t;
        loop {
            let next = match &spine.kind {
                TermKind::Index(a, i) => {
                    let inside = Term::in_range(Term::int(0), (**i).clone(), Term::length((**a).clone()));
                    out.push(Term::or(inside, Term::eq(t.clone(), dflt.clone())));
                    a
                }
                TermKind::Get(m, k) => {
                    out.push(Term::or(Term::indom((**k).clone(), (**m).clone()), Term::eq(t.clone(), dflt.clone())));
                    m
                }
                TermKind::Field(s, _) | TermKind::Length(s) | TermKind::Indom(_, s) => s,
                _ => break,
            };
            spine = next;
        }
    }
    out
}

pub fn print_line(n: usize, name: &str, pass: bool, detail: &str) {
    println!("criterion {n:>2} [{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
}
