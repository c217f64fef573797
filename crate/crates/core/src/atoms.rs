//! Generalized atomic terms: decomposition into (name, indices), typing of
//! names, and default values.

use std::fmt;

use crate::error::{Error, Result};
use crate::term::{Term, TermKind};
use crate::types::{Symbols, Type};

/// A generalized atomic term split into its dot-separated name and the
/// index/key terms for each `index`, `get` and `indom` step, left to right.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomDecomposition {
    pub name: String,
    pub idx: Vec<Term>,
}

impl fmt::Display for AtomDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, [", self.name)?;
        for (n, i) in self.idx.iter().enumerate() {
            if n > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", crate::printer::term_to_string(i))?;
        }
        write!(f, "])")
    }
}

pub const BASIC_OPS: [&str; 4] = ["index", "length", "get", "indom"];

/// Decomposes `t` if it is a generalized atomic term.
pub fn decompose_atomic(t: &Term) -> Option<AtomDecomposition> {
    let mut parts = Vec::new();
    let mut idx = Vec::new();
    decompose_into(t, &mut parts, &mut idx)?;
    Some(AtomDecomposition { name: parts.join("."), idx })
}

fn decompose_into(t: &Term, parts: &mut Vec<String>, idx: &mut Vec<Term>) -> Option<()> {
    match &t.kind {
        TermKind::Var(v) => parts.push(v.clone()),
        TermKind::Field(s, f) if matches!(s.ty, Type::Struct(_) | Type::Enum(_)) => {
            decompose_into(s, parts, idx)?;
            parts.push(f.clone());
        }
        TermKind::Index(a, i) if matches!(a.ty, Type::Seq(_)) => {
            decompose_into(a, parts, idx)?;
            parts.push("index".into());
            idx.push((**i).clone());
        }
        TermKind::Length(a) if matches!(a.ty, Type::Seq(_)) => {
            decompose_into(a, parts, idx)?;
            parts.push("length".into());
        }
        TermKind::Get(m, k) if matches!(m.ty, Type::Map(..)) => {
            decompose_into(m, parts, idx)?;
            parts.push("get".into());
            idx.push((**k).clone());
        }
        TermKind::Indom(k, m) if matches!(m.ty, Type::Map(..)) => {
            decompose_into(m, parts, idx)?;
            parts.push("indom".into());
            idx.push((**k).clone());
        }
        _ => return None,
    }
    Some(())
}

pub fn is_atomic(t: &Term) -> bool {
    decompose_atomic(t).is_some()
}

/// Result type of an atom name and the expected type of each index slot.
pub fn atom_type(
    name: &str,
    var_type: &dyn Fn(&str) -> Option<Type>,
    sym: &Symbols,
) -> Result<(Type, Vec<Type>)> {
    let mut parts = name.split('.');
    let head = parts.next().unwrap_or_default();
    let mut ty = var_type(head).ok_or_else(|| Error::Atom(format!("unknown variable `{head}`")))?;
    let mut slots = Vec::new();
    for p in parts {
        ty = step_type(&ty, p, sym, &mut slots)
            .ok_or_else(|| Error::Atom(format!("ill-formed atom name `{name}` at `{p}`")))?;
    }
    Ok((ty, slots))
}

fn step_type(ty: &Type, part: &str, sym: &Symbols, slots: &mut Vec<Type>) -> Option<Type> {
    match (ty, part) {
        (Type::Seq(e), "index") => {
            slots.push(Type::Int);
            Some((**e).clone())
        }
        (Type::Seq(_), "length") => Some(Type::Int),
        (Type::Map(k, v), "get") => {
            slots.push((**k).clone());
            Some((**v).clone())
        }
        (Type::Map(k, _), "indom") => {
            slots.push((**k).clone());
            Some(Type::Bool)
        }
        (Type::Struct(_) | Type::Enum(_), f) => sym.field_type(ty, f),
        _ => None,
    }
}

/// Rebuilds the typed term from a decomposition.
pub fn reconstruct(
    d: &AtomDecomposition,
    var_type: &dyn Fn(&str) -> Option<Type>,
    sym: &Symbols,
) -> Result<Term> {
    let mut parts = d.name.split('.');
    let head = parts.next().unwrap_or_default();
    let ty = var_type(head).ok_or_else(|| Error::Atom(format!("unknown variable `{head}`")))?;
    let mut t = Term::var(head, ty);
    let mut idx = d.idx.iter();
    let bad = || Error::Atom(format!("ill-formed atom `{}`", d.name));
    for p in parts {
        t = match (&t.ty, p) {
            (Type::Seq(_), "index") => Term::index(t, idx.next().ok_or_else(bad)?.clone()),
            (Type::Seq(_), "length") => Term::length(t),
            (Type::Map(..), "get") => Term::get(t, idx.next().ok_or_else(bad)?.clone()),
            (Type::Map(..), "indom") => Term::indom(idx.next().ok_or_else(bad)?.clone(), t),
            (Type::Struct(_) | Type::Enum(_), f) => {
                let fty = sym.field_type(&t.ty, f).ok_or_else(bad)?;
                Term::field(t, f, fty)
            }
            _ => return Err(bad()),
        };
    }
    if idx.next().is_some() {
        return Err(bad());
    }
    Ok(t)
}

/// Default value of a type: a designated uninterpreted constant for primitive
/// types; for compound types a value whose observations reduce to defaults.
pub fn default_value(ty: &Type) -> Term {
    Term::default_of(ty.clone())
}

/// Name of the uninterpreted constant standing for the default of a
/// primitive type, e.g. `default_int32u`.
pub fn default_symbol(ty: &Type) -> String {
    format!("default_{}", ty.mangle())
}
