//! Types of the specification language and the resolved symbol table.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Bool,
    Int,
    BitVec { width: u32, signed: bool },
    Seq(Box<Type>),
    Map(Box<Type>, Box<Type>),
    Struct(String),
    Enum(String),
    /// Query-level type variable; encoded as an uninterpreted sort.
    Param(String),
    /// Unresolved name as written in source. Never survives resolution.
    Named(String),
}

impl Type {
    pub fn bv(width: u32, signed: bool) -> Type {
        Type::BitVec { width, signed }
    }

    pub fn seq(elem: Type) -> Type {
        Type::Seq(Box::new(elem))
    }

    pub fn map(key: Type, value: Type) -> Type {
        Type::Map(Box::new(key), Box::new(value))
    }

    /// Bool, Int, bit-vectors and type parameters.
    pub fn is_primitive(&self) -> bool {
        matches!(
            self,
            Type::Bool | Type::Int | Type::BitVec { .. } | Type::Param(_)
        )
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Type::Int | Type::BitVec { .. })
    }

    pub fn is_seq_or_map(&self) -> bool {
        matches!(self, Type::Seq(_) | Type::Map(..))
    }

    pub fn elem(&self) -> Option<&Type> {
        match self {
            Type::Seq(e) => Some(e),
            _ => None,
        }
    }

    /// Parses a primitive type name such as `int`, `bool`, `int8u` or `int4`.
    pub fn primitive_from_name(name: &str) -> Option<Type> {
        match name {
            "bool" => return Some(Type::Bool),
            "int" => return Some(Type::Int),
            _ => {}
        }
        let rest = name.strip_prefix("int")?;
        let (digits, signed) = match rest.strip_suffix('u') {
            Some(d) => (d, false),
            None => (rest, true),
        };
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0')
        {
            return None;
        }
        let width: u32 = digits.parse().ok()?;
        (1..=64).contains(&width).then_some(Type::bv(width, signed))
    }

    /// Name used for the designated default constant of a primitive type.
    pub fn mangle(&self) -> String {
        match self {
            Type::Seq(e) => format!("Seq_{}", e.mangle()),
            Type::Map(k, v) => format!("Map_{}_{}", k.mangle(), v.mangle()),
            other => other.to_string(),
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Bool => write!(f, "bool"),
            Type::Int => write!(f, "int"),
            Type::BitVec { width, signed } => {
                write!(f, "int{}{}", width, if *signed { "" } else { "u" })
            }
            Type::Seq(e) => write!(f, "Seq<{e}>"),
            Type::Map(k, v) => write!(f, "Map<{k}, {v}>"),
            Type::Struct(n) | Type::Enum(n) | Type::Param(n) | Type::Named(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructDecl {
    pub name: String,
    pub fields: Vec<(String, Type)>,
}

impl StructDecl {
    pub fn field(&self, name: &str) -> Option<&Type> {
        self.fields.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Branch {
    pub ctor: String,
    pub params: Vec<(String, Type)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumDecl {
    pub name: String,
    pub branches: Vec<Branch>,
}

impl EnumDecl {
    pub fn branch_index(&self, ctor: &str) -> Option<usize> {
        self.branches.iter().position(|b| b.ctor == ctor)
    }

    /// Type of a field shared by any branch.
    pub fn field(&self, name: &str) -> Option<&Type> {
        self.branches
            .iter()
            .flat_map(|b| b.params.iter())
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
    }

    /// All distinct field names, in first-appearance order.
    pub fn all_fields(&self) -> Vec<(String, Type)> {
        let mut out: Vec<(String, Type)> = Vec::new();
        for (n, t) in self.branches.iter().flat_map(|b| b.params.iter()) {
            if !out.iter().any(|(m, _)| m == n) {
                out.push((n.clone(), t.clone()));
            }
        }
        out
    }
}

/// A type-level declaration before resolution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeDecl {
    Alias(String, Type),
    Struct(StructDecl),
    Enum(EnumDecl),
}

/// Resolved structures and enumerations.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Symbols {
    pub structs: BTreeMap<String, StructDecl>,
    pub enums: BTreeMap<String, EnumDecl>,
    /// Constructor name to (enumeration, branch index).
    pub ctors: BTreeMap<String, (String, usize)>,
    aliases: BTreeMap<String, Type>,
}

impl Symbols {
    pub fn structure(&self, name: &str) -> Option<&StructDecl> {
        self.structs.get(name)
    }

    pub fn enumeration(&self, name: &str) -> Option<&EnumDecl> {
        self.enums.get(name)
    }

    /// Field type of `field` on a structure or enumeration type. `id` on an
    /// enumeration has type Int.
    pub fn field_type(&self, ty: &Type, field: &str) -> Option<Type> {
        match ty {
            Type::Struct(s) => self.structs.get(s)?.field(field).cloned(),
            Type::Enum(e) if field == "id" => {
                self.enums.get(e)?;
                Some(Type::Int)
            }
            Type::Enum(e) => self.enums.get(e)?.field(field).cloned(),
            _ => None,
        }
    }

    /// Resolves a type written in source against the alias table and the
    /// declared structures/enumerations. `params` are in-scope type variables.
    pub fn resolve(&self, ty: &Type, params: &BTreeSet<String>) -> Result<Type> {
        Ok(match ty {
            Type::Named(n) => {
                if params.contains(n) {
                    Type::Param(n.clone())
                } else if let Some(t) = self.aliases.get(n) {
                    t.clone()
                } else if self.structs.contains_key(n) {
                    Type::Struct(n.clone())
                } else if self.enums.contains_key(n) {
                    Type::Enum(n.clone())
                } else {
                    return Err(Error::Resolve(format!("unknown type `{n}`")));
                }
            }
            Type::Seq(e) => Type::seq(self.resolve(e, params)?),
            Type::Map(k, v) => {
                let k = self.resolve(k, params)?;
                if !matches!(k, Type::Int | Type::BitVec { .. }) {
                    return Err(Error::Resolve(format!(
                        "map keys must have integer or bit-vector type, found `{k}`"
                    )));
                }
                Type::map(k, self.resolve(v, params)?)
            }
            other => other.clone(),
        })
    }
}

fn named_in(ty: &Type, out: &mut BTreeSet<String>) {
    match ty {
        Type::Named(n) => {
            out.insert(n.clone());
        }
        Type::Seq(e) => named_in(e, out),
        Type::Map(k, v) => {
            named_in(k, out);
            named_in(v, out);
        }
        _ => {}
    }
}

/// Builds the symbol table: expands aliases, resolves every named type and
/// rejects recursive structures/enumerations.
pub fn resolve_types(decls: &[TypeDecl]) -> Result<Symbols> {
    let mut sym = Symbols::default();
    let mut seen = BTreeSet::new();
    let mut alias_src: BTreeMap<String, Type> = BTreeMap::new();
    for d in decls {
        let name = match d {
            TypeDecl::Alias(n, _) => n,
            TypeDecl::Struct(s) => &s.name,
            TypeDecl::Enum(e) => &e.name,
        };
        if Type::primitive_from_name(name).is_some() || !seen.insert(name.clone()) {
            return Err(Error::Resolve(format!("duplicate type name `{name}`")));
        }
        match d {
            TypeDecl::Alias(n, t) => {
                alias_src.insert(n.clone(), t.clone());
            }
            TypeDecl::Struct(s) => {
                sym.structs.insert(s.name.clone(), s.clone());
            }
            TypeDecl::Enum(e) => {
                sym.enums.insert(e.name.clone(), e.clone());
            }
        }
    }

    // Aliases: substitute transitively, detecting cycles.
    fn expand(
        name: &str,
        src: &BTreeMap<String, Type>,
        done: &mut BTreeMap<String, Type>,
        stack: &mut Vec<String>,
        sym: &Symbols,
    ) -> Result<Type> {
        if let Some(t) = done.get(name) {
            return Ok(t.clone());
        }
        if stack.iter().any(|s| s == name) {
            return Err(Error::Resolve(format!("cyclic type alias `{name}`")));
        }
        stack.push(name.to_string());
        let t = subst_alias(&src[name], src, done, stack, sym)?;
        stack.pop();
        done.insert(name.to_string(), t.clone());
        Ok(t)
    }
    fn subst_alias(
        t: &Type,
        src: &BTreeMap<String, Type>,
        done: &mut BTreeMap<String, Type>,
        stack: &mut Vec<String>,
        sym: &Symbols,
    ) -> Result<Type> {
        Ok(match t {
            Type::Named(n) if src.contains_key(n) => expand(n, src, done, stack, sym)?,
            Type::Named(n) if sym.structs.contains_key(n) => Type::Struct(n.clone()),
            Type::Named(n) if sym.enums.contains_key(n) => Type::Enum(n.clone()),
            Type::Named(n) => return Err(Error::Resolve(format!("unknown type `{n}`"))),
            Type::Seq(e) => Type::seq(subst_alias(e, src, done, stack, sym)?),
            Type::Map(k, v) => Type::map(
                subst_alias(k, src, done, stack, sym)?,
                subst_alias(v, src, done, stack, sym)?,
            ),
            other => other.clone(),
        })
    }
    let mut done = BTreeMap::new();
    for name in alias_src.keys() {
        expand(name, &alias_src, &mut done, &mut Vec::new(), &sym)?;
    }
    sym.aliases = done;

    // Recursion check on the raw dependency graph between structs/enums.
    let mut deps: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let expand_named = |names: BTreeSet<String>, sym: &Symbols| -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for n in names {
            match sym.aliases.get(&n) {
                Some(t) => {
                    let mut inner = BTreeSet::new();
                    collect_decl_names(t, &mut inner);
                    out.extend(inner);
                }
                None => {
                    out.insert(n);
                }
            }
        }
        out
    };
    for s in sym.structs.values() {
        let mut names = BTreeSet::new();
        for (_, t) in &s.fields {
            named_in(t, &mut names);
        }
        deps.insert(s.name.clone(), expand_named(names, &sym));
    }
    for e in sym.enums.values() {
        let mut names = BTreeSet::new();
        for (_, t) in e.branches.iter().flat_map(|b| b.params.iter()) {
            named_in(t, &mut names);
        }
        deps.insert(e.name.clone(), expand_named(names, &sym));
    }
    for start in deps.keys() {
        let mut stack: Vec<&String> = deps[start].iter().collect();
        let mut visited = BTreeSet::new();
        while let Some(n) = stack.pop() {
            if n == start {
                return Err(Error::Resolve(format!(
                    "recursive type definition `{start}`"
                )));
            }
            if visited.insert(n.clone()) {
                if let Some(next) = deps.get(n) {
                    stack.extend(next.iter());
                }
            }
        }
    }

    // Resolve field types.
    let empty = BTreeSet::new();
    let snapshot = sym.clone();
    for s in sym.structs.values_mut() {
        let mut names = BTreeSet::new();
        for (f, t) in s.fields.iter_mut() {
            if !names.insert(f.clone()) {
                return Err(Error::Resolve(format!(
                    "duplicate field `{f}` in structure `{}`",
                    s.name
                )));
            }
            *t = snapshot.resolve(t, &empty)?;
        }
    }
    for e in sym.enums.values_mut() {
        let mut fields: BTreeMap<String, Type> = BTreeMap::new();
        for b in e.branches.iter_mut() {
            let mut local = BTreeSet::new();
            for (f, t) in b.params.iter_mut() {
                if f == "id" {
                    return Err(Error::Resolve(format!(
                        "enumeration `{}` may not declare a field named `id`",
                        e.name
                    )));
                }
                if !local.insert(f.clone()) {
                    return Err(Error::Resolve(format!(
                        "duplicate field `{f}` in constructor `{}`",
                        b.ctor
                    )));
                }
                *t = snapshot.resolve(t, &empty)?;
                if let Some(prev) = fields.get(f) {
                    if prev != t {
                        return Err(Error::Resolve(format!(
                            "field `{f}` of `{}` has different types in different branches",
                            e.name
                        )));
                    }
                } else {
                    fields.insert(f.clone(), t.clone());
                }
            }
        }
    }
    for e in sym.enums.values() {
        for (i, b) in e.branches.iter().enumerate() {
            if sym.ctors.insert(b.ctor.clone(), (e.name.clone(), i)).is_some() {
                return Err(Error::Resolve(format!(
                    "duplicate constructor `{}`",
                    b.ctor
                )));
            }
        }
    }
    Ok(sym)
}

fn collect_decl_names(t: &Type, out: &mut BTreeSet<String>) {
    match t {
        Type::Struct(n) | Type::Enum(n) => {
            out.insert(n.clone());
        }
        Type::Seq(e) => collect_decl_names(e, out),
        Type::Map(k, v) => {
            collect_decl_names(k, out);
            collect_decl_names(v, out);
        }
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn named(n: &str) -> Type {
        Type::Named(n.into())
    }

    #[test]
    fn alias_to_bitvector() {
        let decls = vec![
            TypeDecl::Alias("address".into(), Type::bv(32, false)),
            TypeDecl::Struct(StructDecl {
                name: "P".into(),
                fields: vec![("addr".into(), named("address"))],
            }),
        ];
        let sym = resolve_types(&decls).unwrap();
        assert_eq!(sym.structs["P"].fields[0].1, Type::bv(32, false));
    }

    #[test]
    fn alias_chain_is_transitive() {
        let decls = vec![
            TypeDecl::Alias("A".into(), named("B")),
            TypeDecl::Alias("B".into(), Type::Int),
        ];
        let sym = resolve_types(&decls).unwrap();
        assert_eq!(sym.resolve(&named("A"), &BTreeSet::new()).unwrap(), Type::Int);
    }

    #[test]
    fn cyclic_alias_rejected() {
        let decls = vec![
            TypeDecl::Alias("A".into(), named("B")),
            TypeDecl::Alias("B".into(), named("A")),
        ];
        assert!(resolve_types(&decls).is_err());
    }

    #[test]
    fn recursive_struct_rejected() {
        let decls = vec![TypeDecl::Struct(StructDecl {
            name: "S".into(),
            fields: vec![("next".into(), named("S"))],
        })];
        let err = resolve_types(&decls).unwrap_err().to_string();
        assert!(err.contains("recursive"), "{err}");
    }

    #[test]
    fn transitive_recursion_through_seq_rejected() {
        let decls = vec![
            TypeDecl::Struct(StructDecl {
                name: "A".into(),
                fields: vec![("b".into(), named("B"))],
            }),
            TypeDecl::Enum(EnumDecl {
                name: "B".into(),
                branches: vec![Branch {
                    ctor: "mk".into(),
                    params: vec![("xs".into(), Type::seq(named("A")))],
                }],
            }),
        ];
        assert!(resolve_types(&decls).is_err());
    }

    #[test]
    fn shared_enum_field_must_agree() {
        let decls = vec![TypeDecl::Enum(EnumDecl {
            name: "E".into(),
            branches: vec![
                Branch { ctor: "a".into(), params: vec![("f".into(), Type::Int)] },
                Branch { ctor: "b".into(), params: vec![("f".into(), Type::Bool)] },
            ],
        })];
        assert!(resolve_types(&decls).is_err());
    }

    #[test]
    fn map_key_must_be_integral() {
        let sym = Symbols::default();
        let t = Type::map(Type::Bool, Type::Int);
        assert!(sym.resolve(&t, &BTreeSet::new()).is_err());
    }

    #[test]
    fn primitive_names() {
        assert_eq!(Type::primitive_from_name("int8u"), Some(Type::bv(8, false)));
        assert_eq!(Type::primitive_from_name("int16"), Some(Type::bv(16, true)));
        assert_eq!(Type::primitive_from_name("int4u"), Some(Type::bv(4, false)));
        assert_eq!(Type::primitive_from_name("intx"), None);
        assert_eq!(Type::primitive_from_name("int0"), None);
    }
}
