//! Elimination of universal quantifiers by propagating instantiations over
//! the classification graph, with conditions and generation cutoffs.

pub mod conditions;
pub mod graph;
pub mod propagate;

use std::collections::{HashMap, HashSet, VecDeque};

use serde::Serialize;

use crate::check::Program;
use crate::error::Result;
use crate::linear::{canonical, canonical_indices};
use crate::normalize::{has_quantifier, normalize_terms, NormalGoal, DEFAULT_BUDGET};
use crate::printer::term_to_string;
use crate::term::{Quantifier, Term, TermKind};
use conditions::{occurrences, usable_conditions};
use graph::{mentions, Graph};

#[derive(Clone, Debug)]
pub struct Config {
    pub gen_cutoff: u32,
    pub node_cap: usize,
    pub round_cap: usize,
    pub max_rounds: usize,
    pub budget: usize,
}

impl Default for Config {
    fn default() -> Config {
        Config { gen_cutoff: 2, node_cap: 200, round_cap: 2000, max_rounds: 8, budget: DEFAULT_BUDGET }
    }
}

/// Decides whether a list of conditions is consistent with the current
/// quantifier-free facts.
pub trait Consistency {
    fn set_facts(&mut self, goal: &NormalGoal, facts: &[Term]);
    /// `false` only when the conditions are known to be inconsistent.
    fn consistent(&mut self, conds: &[Term]) -> bool;
}

/// Accepts everything; propagation is then limited by generations and caps.
pub struct NoPruning;

impl Consistency for NoPruning {
    fn set_facts(&mut self, _: &NormalGoal, _: &[Term]) {}
    fn consistent(&mut self, _: &[Term]) -> bool {
        true
    }
}

#[derive(Clone, Debug)]
pub struct Fact {
    pub id: usize,
    pub term: Term,
    /// Conditions of the instantiation that produced this fact.
    pub context: Vec<Term>,
    pub generation: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Inst {
    pub node: usize,
    pub value: Term,
    pub conds: Vec<Term>,
    pub gen: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Added,
    Inconsistent,
    Generation,
    Cap,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "event", rename_all = "lowercase")]
pub enum TraceEvent {
    /// A candidate instantiation and what happened to it.
    Inst {
        round: usize,
        rule: String,
        node: String,
        value: String,
        conditions: Vec<String>,
        generation: u32,
        #[serde(skip_serializing_if = "Option::is_none")]
        from: Option<String>,
        #[serde(skip_serializing_if = "Option::is_none")]
        edge: Option<String>,
        status: Verdict,
    },
    /// A quantified fact instantiated with one value.
    Instance {
        round: usize,
        fact: usize,
        node: String,
        quantified: String,
        value: String,
        result: Vec<String>,
    },
    /// A quantified fact removed without any instantiation, or left over.
    Dropped { round: usize, fact: usize, term: String, reason: String },
}

pub enum Status {
    Added(usize),
    Rejected,
}

pub struct State<'a> {
    pub cfg: Config,
    pub graph: Graph,
    pub insts: Vec<Inst>,
    pub trace: Vec<TraceEvent>,
    pub round: usize,
    oracle: &'a mut dyn Consistency,
    seen: HashMap<(usize, Term), usize>,
    per_node: HashMap<usize, usize>,
    rejected: HashSet<(usize, Term, Vec<Term>)>,
    gens: HashMap<Term, u32>,
    added_this_round: usize,
    capped: bool,
}

impl State<'_> {
    fn gen_of(&self, t: &Term) -> u32 {
        self.gens.get(t).copied().unwrap_or(0)
    }

    fn record_terms(&mut self, t: &Term, gen: u32) {
        t.visit(&mut |s| {
            self.gens.entry(s.clone()).or_insert(gen);
        });
    }

    /// Generation of a propagated value: unchanged along zero offsets,
    /// otherwise that of an existing equal term or one more than the source.
    pub fn propagated_gen(&self, src: &Inst, value: &Term, zero: bool) -> u32 {
        if zero {
            return src.gen;
        }
        match self.gens.get(value) {
            Some(g) => (*g).min(src.gen + 1),
            None => src.gen + 1,
        }
    }

    pub fn round_full(&self) -> bool {
        self.added_this_round >= self.cfg.round_cap
    }

    fn event(&mut self, rule: &str, c: &Inst, from: Option<String>, edge: Option<String>, status: Verdict) {
        self.trace.push(TraceEvent::Inst {
            round: self.round,
            rule: rule.to_string(),
            node: self.graph.nodes[c.node].label.clone(),
            value: term_to_string(&c.value),
            conditions: c.conds.iter().map(term_to_string).collect(),
            generation: c.gen,
            from,
            edge,
            status,
        });
    }

    /// Considers a candidate; records it in the trace unless it duplicates an
    /// existing instantiation.
    pub fn offer(&mut self, rule: &str, c: Inst, from: Option<String>, edge: Option<String>) -> Status {
        let key = (c.node, c.value.clone());
        if self.seen.contains_key(&key) {
            return Status::Rejected;
        }
        if c.gen >= self.cfg.gen_cutoff {
            self.event(rule, &c, from, edge, Verdict::Generation);
            return Status::Rejected;
        }
        let rkey = (c.node, c.value.clone(), c.conds.clone());
        if self.rejected.contains(&rkey) {
            return Status::Rejected;
        }
        if self.per_node.get(&c.node).copied().unwrap_or(0) >= self.cfg.node_cap || self.round_full() {
            self.capped = true;
            self.event(rule, &c, from, edge, Verdict::Cap);
            return Status::Rejected;
        }
        if !self.oracle.consistent(&c.conds) {
            self.event(rule, &c, from, edge, Verdict::Inconsistent);
            self.rejected.insert(rkey);
            return Status::Rejected;
        }
        self.event(rule, &c, from, edge, Verdict::Added);
        let ix = self.insts.len();
        *self.per_node.entry(c.node).or_default() += 1;
        self.added_this_round += 1;
        self.seen.insert(key, ix);
        self.insts.push(c);
        Status::Added(ix)
    }

    /// Instantiations currently held by `node`, in the order they were added.
    pub fn insts_on(&self, node: usize) -> Vec<&Inst> {
        self.insts.iter().filter(|i| i.node == node).collect()
    }
}

pub struct Outcome {
    /// Quantifier-free goal.
    pub goal: NormalGoal,
    pub trace: Vec<TraceEvent>,
    pub rounds: usize,
    /// Number of instances produced in each round.
    pub per_round: Vec<usize>,
    /// Set when caps were hit or quantified facts had to be dropped.
    pub divergence: Option<String>,
    pub graph: Graph,
    pub insts: Vec<Inst>,
}

impl Outcome {
    pub fn trace_jsonl(&self) -> String {
        let mut s = String::new();
        for e in &self.trace {
            s.push_str(&serde_json::to_string(e).expect("serializable"));
            s.push('\n');
        }
        s
    }
}

fn is_forall(t: &Term) -> bool {
    matches!(t.kind, TermKind::Quant(Quantifier::Forall, _, _, None, _))
}

pub fn instantiate_all(
    goal: &NormalGoal,
    prog: &Program,
    oracle: &mut dyn Consistency,
    cfg: &Config,
) -> Result<Outcome> {
    let mut vars = goal.vars.clone();
    let mut next_id = 0;
    let mut facts: Vec<Fact> = goal
        .facts
        .iter()
        .map(|t| {
            next_id += 1;
            Fact { id: next_id - 1, term: canonical_indices(t), context: Vec::new(), generation: 0 }
        })
        .collect();
    let mut st = State {
        cfg: cfg.clone(),
        graph: Graph::default(),
        insts: Vec::new(),
        trace: Vec::new(),
        round: 0,
        oracle,
        seen: HashMap::new(),
        per_node: HashMap::new(),
        rejected: HashSet::new(),
        gens: HashMap::new(),
        added_this_round: 0,
        capped: false,
    };
    for f in &facts {
        st.record_terms(&f.term, 0);
    }
    let mut per_round = Vec::new();
    let mut divergence = None;
    let mut quiet = goal.clone();
    loop {
        // Facts with quantifiers that are not universal at the top cannot be
        // instantiated; dropping them is sound.
        let (keep, odd): (Vec<Fact>, Vec<Fact>) =
            facts.into_iter().partition(|f| is_forall(&f.term) || !has_quantifier(&f.term));
        facts = keep;
        for f in odd {
            log::warn!("dropping fact with nested quantifier: {}", term_to_string(&f.term));
            st.trace.push(TraceEvent::Dropped {
                round: st.round,
                fact: f.id,
                term: term_to_string(&f.term),
                reason: "quantifier not in prenex position".into(),
            });
        }
        if !facts.iter().any(|f| is_forall(&f.term)) {
            break;
        }
        if st.round >= cfg.max_rounds {
            divergence = Some(format!("quantified facts remain after {} rounds", cfg.max_rounds));
            break;
        }
        st.round += 1;
        st.added_this_round = 0;
        let qf: Vec<Term> = facts.iter().filter(|f| !is_forall(&f.term)).map(|f| f.term.clone()).collect();
        quiet.vars = vars.clone();
        st.oracle.set_facts(&quiet, &qf);

        let cutoff = cfg.gen_cutoff;
        {
            let gens = &st.gens;
            st.graph.build(&facts, &|t| gens.get(t).copied().unwrap_or(0), cutoff);
        }

        let mut queue: VecDeque<usize> = (0..st.insts.len()).collect();
        for f in &facts {
            for occ in occurrences(&f.term) {
                if mentions(&occ.index, &occ.bound) || mentions(&occ.base, &occ.bound) {
                    continue;
                }
                let gen = st.gen_of(&occ.term);
                if gen >= cutoff {
                    continue;
                }
                let Some(node) = st.graph.atom_node(&occ.base) else { continue };
                let mut conds = usable_conditions(&occ.conds, &occ.bound);
                for c in &f.context {
                    if !conds.contains(c) {
                        conds.push(c.clone());
                    }
                }
                let c = Inst { node, value: canonical(&occ.index), conds, gen };
                if let Status::Added(ix) = st.offer("init", c, None, None) {
                    queue.push_back(ix);
                }
            }
        }
        propagate::propagate(&mut st, &mut queue);

        let mut next = Vec::new();
        let mut produced = 0;
        for f in facts {
            let TermKind::Quant(_, v, _, None, body) = &f.term.kind else {
                next.push(f);
                continue;
            };
            let node = st.graph.bound_node(f.id).expect("bound node");
            let insts: Vec<Inst> = st.insts_on(node).into_iter().cloned().collect();
            if insts.is_empty() {
                log::debug!("no instantiations for {}", term_to_string(&f.term));
                st.trace.push(TraceEvent::Dropped {
                    round: st.round,
                    fact: f.id,
                    term: term_to_string(&f.term),
                    reason: "no instantiations".into(),
                });
            }
            for inst in insts {
                let inst_term = canonical_indices(&body.subst1(v, &inst.value));
                let gen = f.generation.max(inst.gen) + 1;
                let out = normalize_terms(vec![inst_term], &mut vars, prog, cfg.budget)?;
                st.trace.push(TraceEvent::Instance {
                    round: st.round,
                    fact: f.id,
                    node: st.graph.nodes[node].label.clone(),
                    quantified: term_to_string(&f.term),
                    value: term_to_string(&inst.value),
                    result: out.iter().map(term_to_string).collect(),
                });
                produced += 1;
                for t in out {
                    let t = canonical_indices(&t);
                    st.record_terms(&t, gen);
                    next.push(Fact { id: next_id, term: t, context: inst.conds.clone(), generation: gen });
                    next_id += 1;
                }
            }
        }
        per_round.push(produced);
        facts = next;
    }
    if st.capped && divergence.is_none() {
        divergence = Some("instantiation caps reached".into());
    }
    let mut out_goal = goal.clone();
    out_goal.vars = vars;
    out_goal.facts = Vec::new();
    for f in facts {
        if is_forall(&f.term) {
            st.trace.push(TraceEvent::Dropped {
                round: st.round,
                fact: f.id,
                term: term_to_string(&f.term),
                reason: "round limit".into(),
            });
        } else if !out_goal.facts.contains(&f.term) {
            out_goal.facts.push(f.term);
        }
    }
    Ok(Outcome {
        goal: out_goal,
        trace: st.trace,
        rounds: st.round,
        per_round,
        divergence,
        graph: st.graph,
        insts: st.insts,
    })
}

#[cfg(test)]
mod tests;
