//! The classification graph. Nodes and edges only accumulate.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use super::conditions::{collection_atoms, occurrences, usable_conditions};
use super::Fact;
use crate::atoms::{decompose_atomic, AtomDecomposition};
use crate::linear::LinExpr;
use crate::printer::term_to_string;
use crate::term::{Quantifier, Term, TermKind};
use crate::types::Type;

#[derive(Clone, Debug, PartialEq)]
pub enum NodeKind {
    /// Outermost variable of a universally quantified fact.
    BoundVar { fact: usize, var: String, ty: Type },
    /// Free generalized atomic term of sequence or map type.
    Atom { atom: AtomDecomposition, term: Term },
}

#[derive(Clone, Debug)]
pub struct Node {
    pub kind: NodeKind,
    pub generation: u32,
    pub label: String,
}

impl Node {
    pub fn var(&self) -> Option<&str> {
        match &self.kind {
            NodeKind::BoundVar { var, .. } => Some(var),
            NodeKind::Atom { .. } => None,
        }
    }

    pub fn atom(&self) -> Option<&AtomDecomposition> {
        match &self.kind {
            NodeKind::Atom { atom, .. } => Some(atom),
            NodeKind::BoundVar { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    Weight(LinExpr),
    /// Index shape over the source variable.
    Pattern(Term),
}

impl Payload {
    pub fn describe(&self) -> String {
        match self {
            Payload::Weight(c) => format!("weight {}", term_to_string(&c.to_term())),
            Payload::Pattern(p) => format!("pattern {}", term_to_string(p)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub payload: Payload,
    /// May mention the source variable.
    pub conds: Vec<Term>,
}

#[derive(Clone, Debug, Default)]
pub struct Graph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub out_edges: Vec<Vec<usize>>,
    pub in_edges: Vec<Vec<usize>>,
    atoms: HashMap<Term, usize>,
    bound: HashMap<usize, usize>,
    by_name: BTreeMap<String, Vec<usize>>,
    edge_keys: HashSet<(usize, usize, String, Vec<String>)>,
}

impl Graph {
    fn add_node(&mut self, kind: NodeKind, generation: u32) -> usize {
        let label = match &kind {
            NodeKind::BoundVar { fact, var, .. } => format!("{var}#{fact}"),
            NodeKind::Atom { term, .. } => term_to_string(term),
        };
        self.nodes.push(Node { kind, generation, label });
        self.out_edges.push(Vec::new());
        self.in_edges.push(Vec::new());
        self.nodes.len() - 1
    }

    pub fn atom_node(&self, t: &Term) -> Option<usize> {
        self.atoms.get(t).copied()
    }

    pub fn bound_node(&self, fact: usize) -> Option<usize> {
        self.bound.get(&fact).copied()
    }

    /// Other atom nodes with the same name and as many indices.
    pub fn same_name(&self, n: usize) -> Vec<usize> {
        let Some(a) = self.nodes[n].atom() else { return Vec::new() };
        self.by_name[&a.name]
            .iter()
            .copied()
            .filter(|&m| m != n && self.nodes[m].atom().is_some_and(|b| b.idx.len() == a.idx.len()))
            .collect()
    }

    fn ensure_atom(&mut self, t: &Term, generation: u32) -> usize {
        if let Some(n) = self.atoms.get(t) {
            return *n;
        }
        let atom = decompose_atomic(t).expect("atomic");
        let name = atom.name.clone();
        let n = self.add_node(NodeKind::Atom { atom, term: t.clone() }, generation);
        self.atoms.insert(t.clone(), n);
        self.by_name.entry(name).or_default().push(n);
        n
    }

    fn add_edge(&mut self, e: Edge) {
        let key = (
            e.source,
            e.target,
            e.payload.describe(),
            e.conds.iter().map(term_to_string).collect(),
        );
        if self.edge_keys.insert(key) {
            let id = self.edges.len();
            self.out_edges[e.source].push(id);
            self.in_edges[e.target].push(id);
            self.edges.push(e);
        }
    }

    /// Adds nodes and edges for the current facts. `gen_of` gives the
    /// generation of a term; atoms at or beyond `cutoff` are not added.
    pub fn build(&mut self, facts: &[Fact], gen_of: &dyn Fn(&Term) -> u32, cutoff: u32) {
        for f in facts {
            if let TermKind::Quant(Quantifier::Forall, v, ty, None, _) = &f.term.kind {
                if !self.bound.contains_key(&f.id) {
                    let n = self.add_node(
                        NodeKind::BoundVar { fact: f.id, var: v.clone(), ty: ty.clone() },
                        f.generation,
                    );
                    self.bound.insert(f.id, n);
                }
            }
        }
        for f in facts {
            for (t, bound) in collection_atoms(&f.term) {
                let g = gen_of(&t);
                if g < cutoff && !mentions(&t, &bound) {
                    self.ensure_atom(&t, g);
                }
            }
        }
        for f in facts {
            let TermKind::Quant(Quantifier::Forall, v, _, None, body) = &f.term.kind else { continue };
            let source = self.bound[&f.id];
            for occ in occurrences(body) {
                let mut banned = occ.bound.clone();
                if mentions(&occ.index, &banned) || !occ.index.has_free_var(v) {
                    continue;
                }
                banned.insert(v.clone());
                if mentions(&occ.base, &banned) {
                    continue;
                }
                let Some(target) = self.atom_node(&occ.base) else { continue };
                let payload = if occ.index.ty == Type::Int {
                    let e = LinExpr::from_term(&occ.index);
                    let rest = e.without_var(v);
                    if e.coefficient_of_var(v) == 1 && !rest.has_free_var(v) {
                        Payload::Weight(rest)
                    } else {
                        Payload::Pattern(crate::linear::canonical(&occ.index))
                    }
                } else if occ.index.as_var() == Some(v) {
                    Payload::Weight(LinExpr::constant(0))
                } else {
                    Payload::Pattern(occ.index.clone())
                };
                banned.remove(v);
                let mut conds = usable_conditions(&occ.conds, &banned);
                for c in &f.context {
                    if !conds.contains(c) {
                        conds.push(c.clone());
                    }
                }
                self.add_edge(Edge { source, target, payload, conds });
            }
        }
    }
}

pub fn mentions(t: &Term, names: &BTreeSet<String>) -> bool {
    !names.is_empty() && t.free_vars().iter().any(|v| names.contains(v))
}
