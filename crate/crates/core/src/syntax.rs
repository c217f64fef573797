//! Surface syntax produced by the parser, before name resolution and typing.

use crate::error::Pos;
use crate::term::{BinOp, Quantifier, UnOp};
use crate::types::{EnumDecl, StructDecl, Type};

#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

/// Positions are ignored: two expressions are equal when their trees are.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Expr {
    pub fn new(kind: ExprKind, pos: Pos) -> Expr {
        Expr { kind, pos }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Ident(String),
    Int(i128),
    Bool(bool),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// Function, predicate, constructor, conversion or builtin call.
    Call(String, Vec<Expr>),
    Field(Box<Expr>, String),
    Index(Box<Expr>, Box<Expr>),
    StructLit(String, Vec<(String, Expr)>),
    /// `t{path := v, ...}`; `deep` records the `{| ... |}` spelling.
    Update {
        base: Box<Expr>,
        assigns: Vec<(Vec<PathSyn>, Expr)>,
        deep: bool,
    },
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Switch(Box<Expr>, Vec<(PatSyn, Expr)>, Option<Box<Expr>>),
    Let(String, Box<Expr>, Box<Expr>),
    Quant(Quantifier, Type, String, Option<Box<BoundSyn>>, Box<Expr>),
    /// `default(T)`
    Default(Type),
}

#[derive(Clone, Debug, PartialEq)]
pub enum PathSyn {
    Field(String),
    Index(Expr),
}

#[derive(Clone, Debug, PartialEq)]
pub enum BoundSyn {
    Range(Expr, Expr),
    Keys(Expr),
}

#[derive(Clone, Debug, PartialEq)]
pub enum PatSyn {
    Wild,
    /// Variable, or nullary constructor (decided during type checking).
    Ident(String),
    Int(i128),
    Bool(bool),
    Ctor(String, Vec<PatSyn>),
    Struct(String, Vec<(String, PatSyn)>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FunctionDecl {
    pub name: String,
    pub params: Vec<(Type, String)>,
    pub ret: Type,
    /// `None` for an abstract (uninterpreted) function.
    pub body: Option<Expr>,
    /// Spelled with the `predicate` keyword.
    pub predicate: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QueryDecl {
    pub name: String,
    pub type_params: Vec<String>,
    pub vars: Vec<(Type, String)>,
    pub assumes: Vec<(Option<String>, Expr)>,
    pub shows: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Decl {
    Typedef(String, Type),
    Struct(StructDecl),
    Enum(EnumDecl),
    Function(FunctionDecl),
    Const(Type, String, Expr),
    Query(QueryDecl),
}

impl Decl {
    pub fn name(&self) -> &str {
        match self {
            Decl::Typedef(n, _) | Decl::Const(_, n, _) => n,
            Decl::Struct(s) => &s.name,
            Decl::Enum(e) => &e.name,
            Decl::Function(f) => &f.name,
            Decl::Query(q) => &q.name,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DeclItem {
    pub decl: Decl,
    pub pos: Pos,
}

impl PartialEq for DeclItem {
    fn eq(&self, other: &Self) -> bool {
        self.decl == other.decl
    }
}

/// A parsed specification file.
#[derive(Clone, Debug)]
pub struct SourceFile {
    pub path: String,
    pub text: String,
    pub decls: Vec<DeclItem>,
}
