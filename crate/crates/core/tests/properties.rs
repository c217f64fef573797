mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use common::*;
use osv::atoms::{atom_type, decompose_atomic, reconstruct};
use osv::check::Program;
use osv::eval::{valid, Domains, Evaluator};
use osv::instantiate::{instantiate_all, Config, NoPruning, TraceEvent};
use osv::normalize::{check_normal_form, has_quantifier, normalize, run, NormalGoal, DEFAULT_BUDGET};
use osv::parser::parse;
use osv::printer::decls_to_string;
use osv::smt::encode_goal;
use osv::term::Term;

fn small() -> Domains {
    Domains { ints: vec![-1, 0, 1, 2], max_len: 2, keys: vec![0, 1], window: (-6, 8), params: 2 }
}

fn normalized(seed: u64) -> (Program, NormalGoal) {
    let q = GoalGen::new(seed).query("P");
    let p = program(&q);
    let g = normalize(&p.goals[0], &p).unwrap_or_else(|e| panic!("{e}\n{q}"));
    (p, g)
}

fn printed(text: &str) -> String {
    let ds: Vec<_> = parse(text).unwrap().into_iter().map(|d| d.decl).collect();
    decls_to_string(&ds)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn printing_is_a_parse_fixpoint(seed in any::<u64>()) {
        let q = GoalGen::new(seed).query("P");
        let once = printed(&q);
        prop_assert_eq!(printed(&once), once.clone());
        prop_assert_eq!(parse(&once).unwrap(), parse(&q).unwrap());
    }

    #[test]
    fn checking_is_deterministic(seed in any::<u64>()) {
        let q = GoalGen::new(seed).query("P");
        let (a, b) = (program(&q), program(&q));
        prop_assert_eq!(format!("{:?}", a.goals), format!("{:?}", b.goals));
    }

    #[test]
    fn normal_form_is_a_fixpoint(seed in any::<u64>()) {
        let (p, g) = normalized(seed);
        prop_assert!(check_normal_form(&g, &p).is_ok());
        let mut again = g.clone();
        run(&mut again, &p, DEFAULT_BUDGET).unwrap();
        prop_assert_eq!(again.to_text(), g.to_text());
    }

    #[test]
    fn atoms_reconstruct(seed in any::<u64>()) {
        let (p, g) = normalized(seed);
        let var_type = |v: &str| g.var_type(v);
        for f in &g.facts {
            let mut atoms = Vec::new();
            f.visit(&mut |t| {
                if let Some(d) = decompose_atomic(t) {
                    atoms.push((t.clone(), d));
                }
            });
            for (t, d) in atoms {
                // Bound variables are not goal variables; skip atoms rooted at them.
                if g.var_type(d.name.split('.').next().unwrap()).is_none() {
                    continue;
                }
                let back = reconstruct(&d, &var_type, &p.sym).unwrap();
                prop_assert_eq!(&back, &t);
                let (ty, slots) = atom_type(&d.name, &var_type, &p.sym).unwrap();
                prop_assert_eq!(ty, t.ty.clone());
                prop_assert_eq!(slots.len(), d.idx.len());
                for (s, i) in slots.iter().zip(&d.idx) {
                    prop_assert_eq!(s, &i.ty);
                }
            }
        }
    }

    #[test]
    fn encoding_is_deterministic_and_injective(seed in any::<u64>()) {
        let q = GoalGen::quantifier_free(seed).query("P");
        let p = program(&q);
        let g = normalize(&p.goals[0], &p).unwrap();
        let (a, b) = (encode_goal(&g).unwrap(), encode_goal(&g).unwrap());
        prop_assert_eq!(&a.text, &b.text);
        let mut symbols = BTreeSet::new();
        let mut origins = BTreeSet::new();
        for d in a.table.decls() {
            prop_assert!(symbols.insert(d.symbol.clone()), "symbol {} declared twice", d.symbol);
            prop_assert!(origins.insert(format!("{:?}", d.origin)), "origin {:?} encoded twice", d.origin);
        }
    }

    #[test]
    fn instantiation_terminates_quantifier_free(seed in any::<u64>()) {
        let (p, g) = normalized(seed);
        let cfg = Config::default();
        let out = instantiate_all(&g, &p, &mut NoPruning, &cfg).unwrap();
        prop_assert!(out.rounds <= cfg.max_rounds);
        prop_assert!(!out.goal.facts.iter().any(has_quantifier));
        prop_assert!(!has_quantifier(&out.goal.conclusion));
        for e in &out.trace {
            if let TraceEvent::Inst { generation, status, .. } = e {
                if serde_json::to_string(status).unwrap() == "\"added\"" {
                    prop_assert!(*generation <= cfg.gen_cutoff);
                }
            }
        }
        let instances = out.trace.iter().filter(|e| matches!(e, TraceEvent::Instance { .. })).count();
        prop_assert_eq!(out.per_round.iter().sum::<usize>(), instances);
    }

    #[test]
    fn instances_follow_from_the_goal(seed in any::<u64>()) {
        let (p, g) = normalized(seed);
        prop_assume!(g.facts.iter().any(has_quantifier));
        let out = instantiate_all(&g, &p, &mut NoPruning, &Config::default()).unwrap();
        // New skolem constants are unconstrained by the original facts.
        prop_assume!(out.goal.vars == g.vars);
        let dom = small();
        prop_assume!(goal_models(&p, &out.goal, &dom) <= 5_000);
        let ev = Evaluator { prog: &p, dom: &dom, funs: &no_functions };
        let implied = Term::and_all(out.goal.facts.iter().cloned());
        prop_assert!(valid(&ev, &g.vars, &g.facts, &implied), "{}\n--\n{}", g.to_text(), out.goal.to_text());
    }

    #[test]
    fn more_facts_never_lose_instances(seed in any::<u64>(), extra in any::<u64>()) {
        // Adding a quantifier-free fact may only add candidate values.
        let (p, g) = normalized(seed);
        let (_, h) = normalized(extra);
        let cfg = Config::default();
        let base = instantiate_all(&g, &p, &mut NoPruning, &cfg).unwrap();
        prop_assume!(base.divergence.is_none());
        let mut bigger = g.clone();
        let added: Vec<Term> = h
            .facts
            .iter()
            .filter(|f| !has_quantifier(f) && f.free_vars().iter().all(|v| g.var_type(v).is_some() && g.var_type(v) == h.var_type(v)))
            .cloned()
            .collect();
        prop_assume!(!added.is_empty());
        bigger.facts.extend(added);
        let more = instantiate_all(&bigger, &p, &mut NoPruning, &cfg).unwrap();
        prop_assume!(more.divergence.is_none());
        // Fact ids shift when facts are added, so instances are keyed by the
        // quantified fact's text and the bound variable instead.
        let values = |o: &osv::instantiate::Outcome| -> BTreeSet<(String, String, String)> {
            o.trace
                .iter()
                .filter_map(|e| match e {
                    TraceEvent::Instance { node, quantified, value, .. } => {
                        let var = node.split('#').next().unwrap().to_string();
                        Some((quantified.clone(), var, value.clone()))
                    }
                    _ => None,
                })
                .collect()
        };
        let (a, b) = (values(&base), values(&more));
        prop_assert!(a.is_subset(&b), "lost {:?}", a.difference(&b).collect::<Vec<_>>());
    }
}
