use super::*;
use crate::normalize::normalize;

fn run(src: &str) -> Outcome {
    let p = Program::from_text(src).unwrap();
    let n = normalize(p.goal("Q").unwrap(), &p).unwrap();
    instantiate_all(&n, &p, &mut NoPruning, &Config::default()).unwrap()
}

fn added(o: &Outcome) -> Vec<(String, String)> {
    o.trace
        .iter()
        .filter_map(|e| match e {
            TraceEvent::Inst { node, value, status: Verdict::Added, .. } => Some((node.clone(), value.clone())),
            _ => None,
        })
        .collect()
}

#[test]
fn append_offset_reaches_bound_variable() {
    let o = run("predicate P(int v);
         query Q { Seq<int> a, b, c, d;
           assumes c == append(a, b);
           assumes d == append(b, a);
           assumes forall (int i in 0 .. len(c)) P(c[i]);
           shows forall (int k in 0 .. len(d)) P(d[k]) }");
    print!("{}", o.trace_jsonl());
    println!("{}", o.goal.to_text());
    let a = added(&o);
    assert!(a.iter().any(|(n, v)| n.starts_with("i#") && v == "k + len(a)"), "{a:?}");
    assert!(o.goal.quantified().next().is_none());
    assert!(o.divergence.is_none());
}
