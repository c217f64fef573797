//! Propagation of instantiations along the graph.

use super::graph::{NodeKind, Payload};
use super::{Inst, State, Status};
use crate::linear::{canonical, LinExpr};
use crate::term::{Term, TermKind};

/// Matches `t` against `p`, where `v` is the only hole in `p`.
pub fn match_pattern(p: &Term, v: &str, t: &Term) -> Option<Term> {
    let mut binding = None;
    if go(&canonical(p), v, &canonical(t), &mut binding) {
        binding
    } else {
        None
    }
}

fn go(p: &Term, v: &str, t: &Term, binding: &mut Option<Term>) -> bool {
    if p.as_var() == Some(v) {
        return match binding {
            Some(b) => b == t,
            None => {
                *binding = Some(t.clone());
                true
            }
        };
    }
    if p.ty != t.ty {
        return false;
    }
    let blank = |x: &Term| x.map_children(&mut |c| Term::new(c.ty.clone(), TermKind::Default));
    if blank(p) != blank(t) {
        return false;
    }
    let (pc, tc) = (p.children(), t.children());
    pc.len() == tc.len() && pc.into_iter().zip(tc).all(|(a, b)| go(a, v, b, binding))
}

fn offset(value: &Term, c: &LinExpr, sign: i128) -> Option<Term> {
    if c.is_zero() {
        return Some(value.clone());
    }
    if value.ty != crate::types::Type::Int {
        return None;
    }
    Some(LinExpr::from_term(value).add(&c.clone().scale(sign)).to_term())
}

fn join(a: &[Term], b: impl IntoIterator<Item = Term>) -> Vec<Term> {
    let mut out = a.to_vec();
    for c in b {
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

/// Runs the four rules from the queued instantiations until nothing new is
/// added or a cap is reached.
pub fn propagate(st: &mut State, queue: &mut std::collections::VecDeque<usize>) {
    while let Some(ix) = queue.pop_front() {
        let inst = st.insts[ix].clone();
        let from = format!("{} := {}", st.graph.nodes[inst.node].label, crate::printer::term_to_string(&inst.value));
        let mut cands: Vec<(&'static str, Inst, String)> = Vec::new();
        match st.graph.nodes[inst.node].kind.clone() {
            NodeKind::BoundVar { var, .. } => {
                for &e in &st.graph.out_edges[inst.node] {
                    let edge = &st.graph.edges[e];
                    let Payload::Weight(c) = &edge.payload else { continue };
                    let Some(value) = offset(&inst.value, c, 1) else { continue };
                    let conds = join(&inst.conds, edge.conds.iter().map(|x| x.subst1(&var, &inst.value)));
                    let gen = st.propagated_gen(&inst, &value, c.is_zero());
                    cands.push(("R1", Inst { node: edge.target, value, conds, gen }, edge.payload.describe()));
                }
            }
            NodeKind::Atom { atom, .. } => {
                for &e in &st.graph.in_edges[inst.node] {
                    let edge = &st.graph.edges[e];
                    let var = st.graph.nodes[edge.source].var().unwrap().to_string();
                    let (rule, value, zero) = match &edge.payload {
                        Payload::Weight(c) => match offset(&inst.value, c, -1) {
                            Some(v) => ("R2", v, c.is_zero()),
                            None => continue,
                        },
                        Payload::Pattern(p) => match match_pattern(p, &var, &inst.value) {
                            Some(v) => ("R3", v, true),
                            None => continue,
                        },
                    };
                    let conds = join(&inst.conds, edge.conds.iter().map(|x| x.subst1(&var, &value)));
                    let gen = st.propagated_gen(&inst, &value, zero);
                    cands.push((rule, Inst { node: edge.source, value, conds, gen }, edge.payload.describe()));
                }
                for other in st.graph.same_name(inst.node) {
                    let oa = st.graph.nodes[other].atom().unwrap();
                    // Only the index equalities: the source's own conditions say
                    // where it was needed, not where the copy is.
                    let conds = join(&[], oa.idx.iter().zip(&atom.idx).map(|(a, b)| Term::eq(a.clone(), b.clone())));
                    let edge = format!("same name {}", atom.name);
                    cands.push(("R4", Inst { node: other, value: inst.value.clone(), conds, gen: inst.gen }, edge));
                }
            }
        }
        for (rule, cand, edge) in cands {
            if let Status::Added(ix) = st.offer(rule, cand, Some(from.clone()), Some(edge)) {
                queue.push_back(ix);
            }
        }
        if st.round_full() {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Type;

    #[test]
    fn pattern_match_binds_hole() {
        let i = Term::var("i", Type::Int);
        let m = Term::var("m", Type::Int);
        let p = Term::binary(crate::term::BinOp::Mul, Term::int(2), i);
        let t = Term::binary(crate::term::BinOp::Mul, Term::int(2), m.clone());
        assert_eq!(match_pattern(&p, "i", &t), Some(m.clone()));
        assert_eq!(match_pattern(&p, "i", &Term::add(m, Term::int(1))), None);
    }
}
