//! Recursive-descent parser for `.osv` specification files.

use std::collections::BTreeSet;

use crate::error::{Error, Pos, Result};
use crate::lexer::{lex, Tok, Token};
use crate::syntax::*;
use crate::term::{BinOp, Quantifier, UnOp};
use crate::types::{Branch, EnumDecl, StructDecl, Type};

/// Parses a whole file into declarations.
pub fn parse(text: &str) -> Result<Vec<DeclItem>> {
    let mut p = Parser::new(text)?;
    let mut out: Vec<DeclItem> = Vec::new();
    let mut names = BTreeSet::new();
    while !p.at(&Tok::Eof) {
        let item = p.decl()?;
        if !names.insert(item.decl.name().to_string()) {
            return Err(Error::syntax(
                item.pos,
                format!("duplicate declaration `{}`", item.decl.name()),
            ));
        }
        out.push(item);
    }
    Ok(out)
}

pub fn parse_file(path: &str, text: &str) -> Result<SourceFile> {
    Ok(SourceFile {
        path: path.to_string(),
        text: text.to_string(),
        decls: parse(text)?,
    })
}

/// Parses text holding a single `query` block.
pub fn parse_query(text: &str) -> Result<QueryDecl> {
    let mut p = Parser::new(text)?;
    let pos = p.pos();
    if !p.at_kw("query") {
        return Err(Error::syntax(pos, "expected `query`"));
    }
    let item = p.decl()?;
    if !p.at(&Tok::Eof) {
        return Err(Error::syntax(p.pos(), "trailing input after query"));
    }
    match item.decl {
        Decl::Query(q) => Ok(q),
        _ => unreachable!(),
    }
}

/// Parses a single expression (used by tests and tools).
pub fn parse_expr(text: &str) -> Result<Expr> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    if !p.at(&Tok::Eof) {
        return Err(Error::syntax(p.pos(), "trailing input after expression"));
    }
    Ok(e)
}

pub fn parse_type(text: &str) -> Result<Type> {
    let mut p = Parser::new(text)?;
    let t = p.ty()?;
    if !p.at(&Tok::Eof) {
        return Err(Error::syntax(p.pos(), "trailing input after type"));
    }
    Ok(t)
}

const KEYWORDS: &[&str] = &[
    "typedef", "struct", "enum", "function", "predicate", "const", "query", "type", "assumes",
    "shows", "switch", "case", "default", "if", "else", "let", "in", "end", "forall", "exists",
    "true", "false", "keys",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

struct Parser {
    toks: Vec<Token>,
    i: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Parser> {
        Ok(Parser { toks: lex(text)?, i: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.i + n).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].tok.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn at(&self, t: &Tok) -> bool {
        self.peek() == t
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.at(t) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let found = match self.peek() {
            Tok::Eof => "end of input".to_string(),
            t => format!("{t:?}"),
        };
        Err(Error::syntax(self.pos(), format!("{}, found {found}", msg.into())))
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.err(format!("expected {t:?}"))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.err(format!("expected `{kw}`"))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(s)
            }
            _ => self.err("expected identifier"),
        }
    }

    /// Consumes a `>` in type position, splitting a `>>` token.
    fn close_angle(&mut self) -> Result<()> {
        match self.peek() {
            Tok::Gt => {
                self.bump();
                Ok(())
            }
            Tok::Shr => {
                self.toks[self.i].tok = Tok::Gt;
                Ok(())
            }
            _ => self.err("expected `>`"),
        }
    }

    fn ty(&mut self) -> Result<Type> {
        let name = self.ident()?;
        match name.as_str() {
            "Seq" => {
                self.expect(Tok::Lt)?;
                let e = self.ty()?;
                self.close_angle()?;
                Ok(Type::seq(e))
            }
            "Map" => {
                self.expect(Tok::Lt)?;
                let k = self.ty()?;
                self.expect(Tok::Comma)?;
                let v = self.ty()?;
                self.close_angle()?;
                Ok(Type::map(k, v))
            }
            _ => Ok(Type::primitive_from_name(&name).unwrap_or(Type::Named(name))),
        }
    }

    fn params(&mut self) -> Result<Vec<(Type, String)>> {
        self.expect(Tok::LParen)?;
        let mut out = Vec::new();
        if !self.at(&Tok::RParen) {
            loop {
                let t = self.ty()?;
                out.push((t, self.ident()?));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        Ok(out)
    }

    fn decl(&mut self) -> Result<DeclItem> {
        let pos = self.pos();
        let decl = if self.eat_kw("typedef") {
            let n = self.ident()?;
            self.expect(Tok::Assign)?;
            let t = self.ty()?;
            self.eat(&Tok::Semi);
            Decl::Typedef(n, t)
        } else if self.eat_kw("struct") {
            let name = self.ident()?;
            self.expect(Tok::LBrace)?;
            let mut fields = Vec::new();
            while !self.eat(&Tok::RBrace) {
                let t = self.ty()?;
                fields.push((self.ident()?, t));
                if !self.eat(&Tok::Semi) && !self.at(&Tok::RBrace) {
                    return self.err("expected `;` or `}`");
                }
            }
            self.eat(&Tok::Semi);
            Decl::Struct(StructDecl { name, fields })
        } else if self.eat_kw("enum") {
            let name = self.ident()?;
            self.expect(Tok::Assign)?;
            let mut branches = Vec::new();
            loop {
                let ctor = self.ident()?;
                let params = if self.at(&Tok::LParen) {
                    self.params()?.into_iter().map(|(t, n)| (n, t)).collect()
                } else {
                    Vec::new()
                };
                branches.push(Branch { ctor, params });
                if !self.eat(&Tok::Bar) {
                    break;
                }
            }
            self.eat(&Tok::Semi);
            Decl::Enum(EnumDecl { name, branches })
        } else if self.at_kw("function") || self.at_kw("predicate") {
            let predicate = self.at_kw("predicate");
            self.bump();
            let name = self.ident()?;
            let params = self.params()?;
            let ret = if predicate {
                Type::Bool
            } else {
                self.expect(Tok::Arrow)?;
                self.ty()?
            };
            let body = if self.eat(&Tok::Semi) {
                None
            } else {
                self.expect(Tok::LBrace)?;
                let b = self.expr()?;
                self.expect(Tok::RBrace)?;
                Some(b)
            };
            Decl::Function(FunctionDecl { name, params, ret, body, predicate })
        } else if self.eat_kw("const") {
            let t = self.ty()?;
            let n = self.ident()?;
            self.expect(Tok::Assign)?;
            let e = self.expr()?;
            self.eat(&Tok::Semi);
            Decl::Const(t, n, e)
        } else if self.eat_kw("query") {
            Decl::Query(self.query_body()?)
        } else {
            return self.err("expected a declaration");
        };
        Ok(DeclItem { decl, pos })
    }

    fn query_body(&mut self) -> Result<QueryDecl> {
        let name = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut q = QueryDecl {
            name,
            type_params: Vec::new(),
            vars: Vec::new(),
            assumes: Vec::new(),
            shows: Expr::new(ExprKind::Bool(true), Pos::default()),
        };
        let mut shows = None;
        let mut labels = BTreeSet::new();
        while !self.eat(&Tok::RBrace) {
            let pos = self.pos();
            if self.eat_kw("type") {
                loop {
                    q.type_params.push(self.ident()?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::Semi)?;
            } else if self.eat_kw("assumes") {
                let label = if matches!(self.peek(), Tok::Ident(s) if !is_keyword(s))
                    && self.peek_at(1) == &Tok::Colon
                {
                    let l = self.ident()?;
                    self.bump();
                    if !labels.insert(l.clone()) {
                        return Err(Error::syntax(pos, format!("duplicate assumption label `{l}`")));
                    }
                    Some(l)
                } else {
                    None
                };
                let e = self.expr()?;
                self.expect(Tok::Semi)?;
                q.assumes.push((label, e));
            } else if self.eat_kw("shows") {
                if shows.is_some() {
                    return Err(Error::syntax(pos, "more than one `shows`"));
                }
                shows = Some(self.expr()?);
                if !self.eat(&Tok::Semi) && !self.at(&Tok::RBrace) {
                    return self.err("expected `;` or `}`");
                }
            } else {
                let t = self.ty()?;
                loop {
                    q.vars.push((t.clone(), self.ident()?));
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::Semi)?;
            }
        }
        q.shows = match shows {
            Some(s) => s,
            None => return self.err("query without `shows`"),
        };
        Ok(q)
    }

    pub fn expr(&mut self) -> Result<Expr> {
        self.binary(1)
    }

    fn binop_at(&self, level: u8) -> Option<BinOp> {
        let op = match self.peek() {
            Tok::Arrow => BinOp::Implies,
            Tok::Iff => BinOp::Iff,
            Tok::OrOr => BinOp::Or,
            Tok::AndAnd => BinOp::And,
            Tok::EqEq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::Bar => BinOp::BitOr,
            Tok::Caret => BinOp::BitXor,
            Tok::Amp => BinOp::BitAnd,
            Tok::Shl => BinOp::Shl,
            Tok::Shr => BinOp::Shr,
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            Tok::Star => BinOp::Mul,
            Tok::Slash => BinOp::Div,
            Tok::Percent => BinOp::Mod,
            _ => return None,
        };
        (binop_level(op) == level).then_some(op)
    }

    fn binary(&mut self, level: u8) -> Result<Expr> {
        if level > MAX_BINARY_LEVEL {
            return self.unary();
        }
        if level == 1 && (self.at_kw("forall") || self.at_kw("exists")) {
            return self.quantifier();
        }
        let mut lhs = self.binary(level + 1)?;
        while let Some(op) = self.binop_at(level) {
            let pos = lhs.pos;
            self.bump();
            if is_right_assoc(op) {
                let rhs = self.binary(level)?;
                return Ok(Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), pos));
            }
            let rhs = self.binary_operand(level + 1)?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), pos);
        }
        Ok(lhs)
    }

    /// Operand parse that still admits a trailing quantifier (`a && forall ...`).
    fn binary_operand(&mut self, level: u8) -> Result<Expr> {
        if self.at_kw("forall") || self.at_kw("exists") {
            return self.quantifier();
        }
        self.binary(level)
    }

    fn quantifier(&mut self) -> Result<Expr> {
        let pos = self.pos();
        let q = if self.eat_kw("forall") {
            Quantifier::Forall
        } else {
            self.expect_kw("exists")?;
            Quantifier::Exists
        };
        self.expect(Tok::LParen)?;
        let mut binders = Vec::new();
        loop {
            let bpos = self.pos();
            let t = self.ty()?;
            let v = self.ident()?;
            let bound = if self.eat_kw("in") {
                if self.eat_kw("keys") {
                    self.expect(Tok::LParen)?;
                    let m = self.expr()?;
                    self.expect(Tok::RParen)?;
                    Some(Box::new(BoundSyn::Keys(m)))
                } else {
                    let lo = self.expr()?;
                    self.expect(Tok::DotDot)?;
                    let hi = self.expr()?;
                    Some(Box::new(BoundSyn::Range(lo, hi)))
                }
            } else {
                None
            };
            binders.push((bpos, t, v, bound));
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RParen)?;
        let mut body = self.expr()?;
        for (i, (bpos, t, v, bound)) in binders.into_iter().enumerate().rev() {
            let p = if i == 0 { pos } else { bpos };
            body = Expr::new(ExprKind::Quant(q, t, v, bound, Box::new(body)), p);
        }
        Ok(body)
    }

    fn unary(&mut self) -> Result<Expr> {
        let pos = self.pos();
        let op = match self.peek() {
            Tok::Bang => UnOp::Not,
            Tok::Minus => UnOp::Neg,
            Tok::Tilde => UnOp::BitNot,
            _ => return self.postfix(),
        };
        self.bump();
        if op == UnOp::Neg {
            if let Tok::Int(v) = *self.peek() {
                // `-3` is a literal, `-(3)` a negation.
                self.bump();
                let lit = Expr::new(ExprKind::Int(-v), pos);
                return self.postfix_from(lit);
            }
        }
        if self.at_kw("forall") || self.at_kw("exists") {
            let e = self.quantifier()?;
            return Ok(Expr::new(ExprKind::Unary(op, Box::new(e)), pos));
        }
        let e = self.unary()?;
        Ok(Expr::new(ExprKind::Unary(op, Box::new(e)), pos))
    }

    fn postfix(&mut self) -> Result<Expr> {
        let e = self.primary()?;
        self.postfix_from(e)
    }

    fn postfix_from(&mut self, mut e: Expr) -> Result<Expr> {
        loop {
            let pos = e.pos;
            match self.peek() {
                Tok::Dot => {
                    self.bump();
                    let f = match self.peek().clone() {
                        // `id` and other keywords are not special after a dot
                        Tok::Ident(s) => {
                            self.bump();
                            s
                        }
                        _ => return self.err("expected field name"),
                    };
                    e = Expr::new(ExprKind::Field(Box::new(e), f), pos);
                }
                Tok::LBracket => {
                    self.bump();
                    let i = self.expr()?;
                    self.expect(Tok::RBracket)?;
                    e = Expr::new(ExprKind::Index(Box::new(e), Box::new(i)), pos);
                }
                Tok::LBrace => {
                    self.bump();
                    let assigns = self.assigns(&Tok::RBrace)?;
                    e = Expr::new(ExprKind::Update { base: Box::new(e), assigns, deep: false }, pos);
                }
                Tok::LBraceBar => {
                    self.bump();
                    let assigns = self.assigns(&Tok::BarRBrace)?;
                    e = Expr::new(ExprKind::Update { base: Box::new(e), assigns, deep: true }, pos);
                }
                _ => return Ok(e),
            }
        }
    }

    fn assigns(&mut self, close: &Tok) -> Result<Vec<(Vec<PathSyn>, Expr)>> {
        let mut out = Vec::new();
        loop {
            let mut path = Vec::new();
            loop {
                if self.eat(&Tok::LBracket) {
                    let i = self.expr()?;
                    self.expect(Tok::RBracket)?;
                    path.push(PathSyn::Index(i));
                } else if path.is_empty() || self.eat(&Tok::Dot) {
                    let f = match self.peek().clone() {
                        Tok::Ident(s) => {
                            self.bump();
                            s
                        }
                        _ => return self.err("expected field name in update path"),
                    };
                    path.push(PathSyn::Field(f));
                } else {
                    break;
                }
            }
            self.expect(Tok::ColonEq)?;
            out.push((path, self.expr()?));
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        if !self.eat(close) {
            return self.err(format!("expected {close:?}"));
        }
        Ok(out)
    }

    fn is_struct_literal_start(&self) -> bool {
        // Name `{` followed by `}` or `field :`
        self.peek_at(1) == &Tok::LBrace
            && (self.peek_at(2) == &Tok::RBrace
                || matches!(self.peek_at(2), Tok::Ident(_)) && self.peek_at(3) == &Tok::Colon)
    }

    fn primary(&mut self) -> Result<Expr> {
        let pos = self.pos();
        let kind = match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                ExprKind::Int(v)
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                return Ok(e);
            }
            Tok::Ident(s) => match s.as_str() {
                "true" | "false" => {
                    self.bump();
                    ExprKind::Bool(s == "true")
                }
                "if" => {
                    self.bump();
                    return self.if_rest(pos);
                }
                "let" => {
                    self.bump();
                    let v = self.ident()?;
                    self.expect(Tok::Assign)?;
                    let rhs = self.expr()?;
                    self.expect_kw("in")?;
                    let body = self.expr()?;
                    self.expect_kw("end")?;
                    ExprKind::Let(v, Box::new(rhs), Box::new(body))
                }
                "switch" => {
                    self.bump();
                    return self.switch_rest(pos);
                }
                "forall" | "exists" => return self.quantifier(),
                "default" if self.peek_at(1) == &Tok::LParen => {
                    self.bump();
                    self.bump();
                    let t = self.ty()?;
                    self.expect(Tok::RParen)?;
                    ExprKind::Default(t)
                }
                _ if is_keyword(&s) => return self.err("expected expression"),
                _ => {
                    if self.is_struct_literal_start() {
                        self.bump();
                        self.bump();
                        let mut fields = Vec::new();
                        while !self.eat(&Tok::RBrace) {
                            let f = self.ident()?;
                            self.expect(Tok::Colon)?;
                            fields.push((f, self.expr()?));
                            if !self.eat(&Tok::Comma) && !self.at(&Tok::RBrace) {
                                return self.err("expected `,` or `}`");
                            }
                        }
                        ExprKind::StructLit(s, fields)
                    } else if self.peek_at(1) == &Tok::LParen {
                        self.bump();
                        self.bump();
                        let mut args = Vec::new();
                        if !self.at(&Tok::RParen) {
                            loop {
                                args.push(self.expr()?);
                                if !self.eat(&Tok::Comma) {
                                    break;
                                }
                            }
                        }
                        self.expect(Tok::RParen)?;
                        ExprKind::Call(s, args)
                    } else {
                        self.bump();
                        ExprKind::Ident(s)
                    }
                }
            },
            _ => return self.err("expected expression"),
        };
        Ok(Expr::new(kind, pos))
    }

    fn if_rest(&mut self, pos: Pos) -> Result<Expr> {
        self.expect(Tok::LParen)?;
        let c = self.expr()?;
        self.expect(Tok::RParen)?;
        self.expect(Tok::LBrace)?;
        let t = self.expr()?;
        self.expect(Tok::RBrace)?;
        self.expect_kw("else")?;
        let e = if self.at_kw("if") {
            let p = self.pos();
            self.bump();
            self.if_rest(p)?
        } else {
            self.expect(Tok::LBrace)?;
            let e = self.expr()?;
            self.expect(Tok::RBrace)?;
            e
        };
        Ok(Expr::new(ExprKind::If(Box::new(c), Box::new(t), Box::new(e)), pos))
    }

    fn case_sep(&mut self) -> Result<()> {
        if self.eat(&Tok::Colon) || self.eat(&Tok::FatArrow) {
            Ok(())
        } else {
            self.err("expected `:` or `=>`")
        }
    }

    fn switch_rest(&mut self, pos: Pos) -> Result<Expr> {
        self.expect(Tok::LParen)?;
        let s = self.expr()?;
        self.expect(Tok::RParen)?;
        self.expect(Tok::LBrace)?;
        let mut cases = Vec::new();
        let mut default = None;
        while !self.eat(&Tok::RBrace) {
            if default.is_some() {
                return self.err("`default` must be the last case");
            }
            if self.eat_kw("case") {
                let p = self.pattern()?;
                self.case_sep()?;
                let body = self.expr()?;
                cases.push((p, body));
            } else if self.eat_kw("default") {
                self.case_sep()?;
                default = Some(Box::new(self.expr()?));
            } else {
                return self.err("expected `case` or `default`");
            }
            if !self.eat(&Tok::Semi) && !self.at(&Tok::RBrace) {
                return self.err("expected `;` or `}`");
            }
        }
        Ok(Expr::new(ExprKind::Switch(Box::new(s), cases, default), pos))
    }

    fn pattern(&mut self) -> Result<PatSyn> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(PatSyn::Int(v))
            }
            Tok::Minus => {
                self.bump();
                match self.bump() {
                    Tok::Int(v) => Ok(PatSyn::Int(-v)),
                    _ => self.err("expected integer after `-` in pattern"),
                }
            }
            Tok::Ident(s) if s == "_" => {
                self.bump();
                Ok(PatSyn::Wild)
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                Ok(PatSyn::Bool(s == "true"))
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                if self.eat(&Tok::LParen) {
                    let mut args = Vec::new();
                    if !self.at(&Tok::RParen) {
                        loop {
                            args.push(self.pattern()?);
                            if !self.eat(&Tok::Comma) {
                                break;
                            }
                        }
                    }
                    self.expect(Tok::RParen)?;
                    Ok(PatSyn::Ctor(name, args))
                } else if self.eat(&Tok::LBrace) {
                    // `{{ ... }}` is accepted as a single-brace pattern.
                    let doubled = self.eat(&Tok::LBrace);
                    let mut fields = Vec::new();
                    while !self.eat(&Tok::RBrace) {
                        let f = self.ident()?;
                        self.expect(Tok::Colon)?;
                        fields.push((f, self.pattern()?));
                        if !self.eat(&Tok::Comma) && !self.at(&Tok::RBrace) {
                            return self.err("expected `,` or `}`");
                        }
                    }
                    if doubled {
                        self.expect(Tok::RBrace)?;
                    }
                    Ok(PatSyn::Struct(name, fields))
                } else {
                    Ok(PatSyn::Ident(name))
                }
            }
            _ => self.err("expected pattern"),
        }
    }
}

pub(crate) const MAX_BINARY_LEVEL: u8 = 10;

/// Binding strength of a binary operator; larger binds tighter. Bitwise
/// operators bind tighter than comparisons.
pub(crate) fn binop_level(op: BinOp) -> u8 {
    match op {
        BinOp::Implies | BinOp::Iff => 1,
        BinOp::Or => 2,
        BinOp::And => 3,
        BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
        BinOp::BitOr => 5,
        BinOp::BitXor => 6,
        BinOp::BitAnd => 7,
        BinOp::Shl | BinOp::Shr => 8,
        BinOp::Add | BinOp::Sub => 9,
        BinOp::Mul | BinOp::Div | BinOp::Mod => 10,
    }
}

pub(crate) fn is_right_assoc(op: BinOp) -> bool {
    matches!(op, BinOp::Implies | BinOp::Iff)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> Expr {
        parse_expr(s).unwrap()
    }

    #[test]
    fn implication_is_right_associative_and_lowest() {
        let x = e("a && b -> c -> d");
        match x.kind {
            ExprKind::Binary(BinOp::Implies, l, r) => {
                assert!(matches!(l.kind, ExprKind::Binary(BinOp::And, ..)));
                assert!(matches!(r.kind, ExprKind::Binary(BinOp::Implies, ..)));
            }
            k => panic!("{k:?}"),
        }
    }

    #[test]
    fn bitwise_or_binds_tighter_than_equality() {
        let x = e("s == A | B");
        match x.kind {
            ExprKind::Binary(BinOp::Eq, _, r) => {
                assert!(matches!(r.kind, ExprKind::Binary(BinOp::BitOr, ..)))
            }
            k => panic!("{k:?}"),
        }
    }

    #[test]
    fn deep_update_path() {
        let x = e("g{|tcbMap[prio].sus := true|}");
        match x.kind {
            ExprKind::Update { assigns, deep: true, .. } => {
                assert_eq!(assigns.len(), 1);
                assert_eq!(assigns[0].0.len(), 3);
            }
            k => panic!("{k:?}"),
        }
    }

    #[test]
    fn struct_literal_vs_update() {
        assert!(matches!(e("Point{x: 3, y: 4}").kind, ExprKind::StructLit(..)));
        assert!(matches!(e("p{x := 5}").kind, ExprKind::Update { deep: false, .. }));
    }

    #[test]
    fn nested_generic_types() {
        assert_eq!(
            parse_type("Seq<Seq<int>>").unwrap(),
            Type::seq(Type::seq(Type::Int))
        );
        assert_eq!(
            parse_type("Map<int, Seq<int32u>>").unwrap(),
            Type::map(Type::Int, Type::seq(Type::bv(32, false)))
        );
    }

    #[test]
    fn multi_binder_quantifier_is_nested() {
        let x = e("forall (int i in 0 .. n, int j) i == j");
        match x.kind {
            ExprKind::Quant(_, _, v, Some(b), body) if matches!(*b, BoundSyn::Range(..)) => {
                assert_eq!(v, "i");
                assert!(matches!(body.kind, ExprKind::Quant(_, _, _, None, _)));
            }
            k => panic!("{k:?}"),
        }
    }

    #[test]
    fn quantifier_extends_right() {
        let x = e("p && forall (int i) q || r");
        match x.kind {
            ExprKind::Binary(BinOp::And, _, r) => match r.kind {
                ExprKind::Quant(_, _, _, _, body) => {
                    assert!(matches!(body.kind, ExprKind::Binary(BinOp::Or, ..)))
                }
                k => panic!("{k:?}"),
            },
            k => panic!("{k:?}"),
        }
    }

    #[test]
    fn switch_both_separators() {
        let x = e("switch (a) { case Vnull => 0; case Vptr(n): n + 1; }");
        match x.kind {
            ExprKind::Switch(_, cases, None) => {
                assert_eq!(cases[0].0, PatSyn::Ident("Vnull".into()));
                assert_eq!(
                    cases[1].0,
                    PatSyn::Ctor("Vptr".into(), vec![PatSyn::Ident("n".into())])
                );
            }
            k => panic!("{k:?}"),
        }
    }

    #[test]
    fn empty_file() {
        assert!(parse("  // nothing\n").unwrap().is_empty());
    }

    #[test]
    fn duplicate_declarations() {
        let err = parse("typedef a = int; typedef a = bool;").unwrap_err();
        assert!(err.to_string().contains("duplicate"));
    }

    #[test]
    fn trivial_query() {
        let q = parse_query("query Q { shows true }").unwrap();
        assert!(q.assumes.is_empty());
        assert_eq!(q.shows.kind, ExprKind::Bool(true));
    }

    #[test]
    fn duplicate_label() {
        assert!(parse_query("query Q { int x; assumes H1: x > 0; assumes H1: x > 1; shows true }").is_err());
    }

    #[test]
    fn missing_shows() {
        assert!(parse_query("query Q { int x; }").is_err());
    }

    #[test]
    fn error_has_position() {
        let err = parse("struct S {\n  int x\n  int y;\n}").unwrap_err();
        assert!(err.to_string().starts_with("3:3"), "{err}");
    }
}
