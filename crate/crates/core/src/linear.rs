//! Linear integer expressions, used to normalize index offsets.

use std::collections::BTreeMap;

use crate::printer::term_to_string;
use crate::term::{BinOp, Term, TermKind, UnOp};
use crate::types::Type;

/// `Σ coeff·summand + constant`. Summands are non-linear subterms keyed by
/// their printed form, which also fixes the canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinExpr {
    pub terms: BTreeMap<String, (Term, i128)>,
    pub constant: i128,
}

impl LinExpr {
    pub fn constant(c: i128) -> LinExpr {
        LinExpr { terms: BTreeMap::new(), constant: c }
    }

    pub fn atom(t: Term) -> LinExpr {
        let mut e = LinExpr::constant(0);
        e.terms.insert(term_to_string(&t), (t, 1));
        e
    }

    /// Reads an `int` term; anything that is not `+`, `-`, negation, a
    /// literal or a product with a literal becomes a summand.
    pub fn from_term(t: &Term) -> LinExpr {
        match &t.kind {
            TermKind::Int(v) => LinExpr::constant(*v),
            TermKind::Binary(BinOp::Add, a, b) => LinExpr::from_term(a).add(&LinExpr::from_term(b)),
            TermKind::Binary(BinOp::Sub, a, b) => LinExpr::from_term(a).sub(&LinExpr::from_term(b)),
            TermKind::Unary(UnOp::Neg, a) => LinExpr::from_term(a).scale(-1),
            TermKind::Binary(BinOp::Mul, a, b) => match (a.as_int(), b.as_int()) {
                (Some(c), _) => LinExpr::from_term(b).scale(c),
                (_, Some(c)) => LinExpr::from_term(a).scale(c),
                _ => LinExpr::atom(t.clone()),
            },
            _ => LinExpr::atom(t.clone()),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.constant == 0
    }

    pub fn scale(mut self, c: i128) -> LinExpr {
        if c == 0 {
            return LinExpr::constant(0);
        }
        for (_, k) in self.terms.values_mut() {
            *k *= c;
        }
        self.constant *= c;
        self
    }

    pub fn add(&self, o: &LinExpr) -> LinExpr {
        let mut r = self.clone();
        for (key, (t, k)) in &o.terms {
            let e = r.terms.entry(key.clone()).or_insert_with(|| (t.clone(), 0));
            e.1 += k;
            if e.1 == 0 {
                r.terms.remove(key);
            }
        }
        r.constant += o.constant;
        r
    }

    pub fn sub(&self, o: &LinExpr) -> LinExpr {
        self.add(&o.clone().scale(-1))
    }

    /// Coefficient of the summand that is exactly variable `v`.
    pub fn coefficient_of_var(&self, v: &str) -> i128 {
        self.terms
            .values()
            .find(|(t, _)| t.as_var() == Some(v))
            .map_or(0, |(_, k)| *k)
    }

    /// The expression without the summand `v`.
    pub fn without_var(&self, v: &str) -> LinExpr {
        let mut r = self.clone();
        r.terms.retain(|_, (t, _)| t.as_var() != Some(v));
        r
    }

    pub fn has_free_var(&self, v: &str) -> bool {
        self.terms.values().any(|(t, _)| t.has_free_var(v))
    }

    pub fn to_term(&self) -> Term {
        let mut acc: Option<Term> = None;
        for (t, k) in self.terms.values() {
            let mag = |m: i128| if m == 1 { t.clone() } else { Term::binary(BinOp::Mul, Term::int(m), t.clone()) };
            acc = Some(match acc {
                None if *k < 0 => Term::neg(mag(-k)),
                None => mag(*k),
                Some(a) if *k < 0 => Term::sub(a, mag(-k)),
                Some(a) => Term::add(a, mag(*k)),
            });
        }
        match acc {
            None => Term::int(self.constant),
            Some(a) if self.constant > 0 => Term::add(a, Term::int(self.constant)),
            Some(a) if self.constant < 0 => Term::sub(a, Term::int(-self.constant)),
            Some(a) => a,
        }
    }
}

/// Canonical form of an integer term; other types are returned unchanged.
pub fn canonical(t: &Term) -> Term {
    if t.ty == Type::Int {
        LinExpr::from_term(t).to_term()
    } else {
        t.clone()
    }
}

/// Canonicalizes every integer index and key inside `t`.
pub fn canonical_indices(t: &Term) -> Term {
    t.rewrite_bottom_up(&mut |t| match t.kind {
        TermKind::Index(a, i) => Term::new(t.ty, TermKind::Index(a, Box::new(canonical(&i)))),
        TermKind::Get(m, k) => Term::new(t.ty, TermKind::Get(m, Box::new(canonical(&k)))),
        TermKind::Indom(k, m) => Term::new(t.ty, TermKind::Indom(Box::new(canonical(&k)), m)),
        kind => Term::new(t.ty, kind),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Term {
        Term::var(n, Type::Int)
    }

    #[test]
    fn offsets_cancel() {
        let a = Term::var("a", Type::seq(Type::Int));
        let t = Term::sub(Term::add(v("k"), Term::length(a.clone())), Term::length(a));
        assert_eq!(canonical(&t), v("k"));
    }

    #[test]
    fn canonical_order_and_constants() {
        let t = Term::add(Term::int(1), Term::sub(v("m"), Term::int(2)));
        assert_eq!(term_to_string(&canonical(&t)), "m - 1");
        let a = Term::var("a", Type::seq(Type::Int));
        let t = Term::add(Term::length(a), v("k"));
        assert_eq!(term_to_string(&canonical(&t)), "k + len(a)");
        assert_eq!(term_to_string(&canonical(&Term::neg(v("x")))), "-x");
    }

    #[test]
    fn weight_extraction() {
        let a = Term::var("a", Type::seq(Type::Int));
        let e = LinExpr::from_term(&Term::sub(v("i"), Term::length(a)));
        assert_eq!(e.coefficient_of_var("i"), 1);
        assert_eq!(term_to_string(&e.without_var("i").to_term()), "-len(a)");
    }
}
