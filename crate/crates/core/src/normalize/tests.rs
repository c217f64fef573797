use super::*;
use crate::check::Program;
use crate::printer::term_to_string;

const DECLS: &str = "
struct Point { int x; int y }
enum Shape = polygon(Seq<Point> pts) | single(Point pt);
enum addrval = Vnull | Vptr(int addr);
";

fn prog(extra: &str) -> Program {
    Program::from_text(&format!("{DECLS}\n{extra}")).unwrap()
}

fn goal(p: &Program, name: &str) -> NormalGoal {
    NormalGoal::from_goal(p.goal(name).unwrap())
}

#[test]
fn shape_equality_expansion() {
    let p = prog("query Q { Shape s, t; shows s == t }");
    let mut g = goal(&p, "Q");
    assert_eq!(expand_equalities(&mut g, &p), 1);
    assert_eq!(
        term_to_string(&g.conclusion),
        "s.id == t.id && (s.id == 0 -> len(s.pts) == len(t.pts) && (forall (int i) 0 <= i && i < len(s.pts) -> s.pts[i].x == t.pts[i].x && s.pts[i].y == t.pts[i].y)) && (s.id == 1 -> s.pt.x == t.pt.x && s.pt.y == t.pt.y)"
    );
}

#[test]
fn switch_on_addrval() {
    let p = prog("query Q { addrval a; int r; shows r == switch (a) { case Vnull => 0; case Vptr(n) => n + 1; } }");
    let mut g = goal(&p, "Q");
    assert_eq!(expand_switch(&mut g, &p), 1);
    assert_eq!(term_to_string(&g.conclusion), "r == if (a.id == 0) { 0 } else { a.addr + 1 }");
}

#[test]
fn only_default_switch() {
    let p = prog("query Q { addrval a; shows switch (a) { default => true; } }");
    let mut g = goal(&p, "Q");
    expand_switch(&mut g, &p);
    assert_eq!(g.conclusion, Term::bool(true));
}

#[test]
fn point_update_is_literal() {
    let p = prog("query Q { Point p, q; shows q == p{x := 5} }");
    let mut g = goal(&p, "Q");
    assert_eq!(expand_struct_updates(&mut g, &p), 1);
    assert_eq!(term_to_string(&g.conclusion), "q == Point{x: 5, y: p.y}");
}

#[test]
fn top_level_let_is_lifted() {
    let p = prog("query Q { int x; assumes let t = x + 1 in t > 0 end; shows let v = 1 in let v = 2 in v end end == 2 }");
    let mut g = goal(&p, "Q");
    assert_eq!(lift_lets(&mut g, &p), 3);
    assert_eq!(g.vars.last().unwrap().0, "t");
    let facts: Vec<_> = g.facts.iter().map(term_to_string).collect();
    assert_eq!(facts, ["t == x + 1", "t > 0"]);
    assert_eq!(term_to_string(&g.conclusion), "2 == 2");
}

#[test]
fn reflexive_defining_equation_dropped() {
    let p = prog("query Q { int x, y; assumes x == x; assumes y == x + 1; shows y > x }");
    let mut g = goal(&p, "Q");
    apply_defining_equations(&mut g, &p);
    assert!(g.facts.is_empty());
    assert_eq!(term_to_string(&g.conclusion), "x + 1 > x");
}

#[test]
fn indexed_equation_is_not_defining() {
    let p = prog("query Q { Seq<Seq<int>> g; assumes g[2] == append(g[0], g[1]); shows true }");
    let mut g = goal(&p, "Q");
    apply_defining_equations(&mut g, &p);
    assert_eq!(g.facts.len(), 1);
    assert!(g.defs.is_empty());
}

#[test]
fn cyclic_equations_keep_one_fact() {
    let p = prog("query Q { int a, b; assumes a == b + 1; assumes b == a - 1; shows true }");
    let mut g = goal(&p, "Q");
    apply_defining_equations(&mut g, &p);
    assert_eq!(g.defs.len(), 1);
    assert_eq!(g.facts.len(), 1);
}

#[test]
fn append_example_normalizes() {
    let p = prog(
        "predicate P(int v);
         query Q { Seq<int> a, b, c, d;
           assumes c == append(a, b);
           assumes d == append(b, a);
           assumes forall (int i in 0 .. len(c)) P(c[i]);
           shows forall (int k in 0 .. len(d)) P(d[k]) }",
    );
    let n = normalize(p.goal("Q").unwrap(), &p).unwrap();
    check_normal_form(&n, &p).unwrap();
    assert_eq!(n.conclusion, Term::bool(false));
    assert_eq!(n.quantified().count(), 1);
    assert!(n.vars.iter().any(|(v, _)| v == "k"));
}

#[test]
fn normal_form_violations() {
    let p = prog("query Q { Seq<int> a, b; Shape s, t; assumes append(a, b)[0] == 1; shows s == t }");
    let g = goal(&p, "Q");
    let v = check_normal_form(&g, &p).unwrap_err();
    assert!(v.iter().any(|m| m.starts_with("append")), "{v:?}");
    assert!(v.iter().any(|m| m.starts_with("equality at compound type")), "{v:?}");
}

#[test]
fn normalize_is_idempotent() {
    let p = prog(
        "query Q { Map<int, Shape> m; int k; Seq<int> a;
           assumes forall (int j in keys(m)) m[j].id == 0;
           shows update(k, single(Point{x: 1, y: 2}), m)[k].pt.x == 1 && remove(0, a) == a }",
    );
    let n = normalize(p.goal("Q").unwrap(), &p).unwrap();
    check_normal_form(&n, &p).unwrap();
    let mut again = n.clone();
    run(&mut again, &p, DEFAULT_BUDGET).unwrap();
    assert_eq!(again, n);
}

#[test]
fn trivial_query_keeps_true() {
    let p = prog("query Q { shows true }");
    let n = normalize(p.goal("Q").unwrap(), &p).unwrap();
    assert_eq!(n.conclusion, Term::bool(true));
    assert!(n.facts.is_empty());
}

#[test]
fn dump_parses_back() {
    let p = prog("query Q { Seq<int> a; int k; shows forall (int i in 0 .. len(a)) a[i] != k }");
    let n = normalize(p.goal("Q").unwrap(), &p).unwrap();
    let text = n.to_text();
    let again = Program::from_text(&format!("{DECLS}\n{text}")).unwrap();
    assert_eq!(again.goals[0].assumes.len(), n.facts.len());
}

