use crate::error::{Error, Pos, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i128),
    LParen,
    RParen,
    LBrace,
    RBrace,
    /// `{|`
    LBraceBar,
    /// `|}`
    BarRBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Dot,
    DotDot,
    Assign,
    ColonEq,
    FatArrow,
    Arrow,
    Iff,
    AndAnd,
    OrOr,
    Bang,
    Tilde,
    EqEq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Amp,
    Bar,
    Caret,
    Shl,
    Shr,
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

pub fn lex(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            bump!();
            bump!();
            loop {
                if i + 1 >= chars.len() {
                    return Err(Error::syntax(pos, "unterminated comment"));
                }
                if chars[i] == '*' && chars[i + 1] == '/' {
                    bump!();
                    bump!();
                    break;
                }
                bump!();
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), pos });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            let hex = c == '0' && matches!(chars.get(i + 1), Some('x') | Some('X'));
            if hex {
                bump!();
                bump!();
            }
            while i < chars.len() && (chars[i].is_ascii_hexdigit() && (hex || chars[i].is_ascii_digit()) || chars[i] == '_') {
                bump!();
            }
            let s: String = chars[start..i].iter().filter(|c| **c != '_').collect();
            let v = if hex {
                i128::from_str_radix(&s[2..], 16)
            } else {
                s.parse::<i128>()
            }
            .map_err(|_| Error::syntax(pos, format!("bad integer literal `{s}`")))?;
            out.push(Token { tok: Tok::Int(v), pos });
            continue;
        }
        let next = chars.get(i + 1).copied();
        let next2 = chars.get(i + 2).copied();
        let (tok, len) = match (c, next) {
            ('<', Some('-')) if next2 == Some('>') => (Tok::Iff, 3),
            ('{', Some('|')) if next != Some('|') || next2 != Some('|') => (Tok::LBraceBar, 2),
            ('|', Some('}')) => (Tok::BarRBrace, 2),
            ('.', Some('.')) => (Tok::DotDot, 2),
            (':', Some('=')) => (Tok::ColonEq, 2),
            ('=', Some('>')) => (Tok::FatArrow, 2),
            ('=', Some('=')) => (Tok::EqEq, 2),
            ('-', Some('>')) => (Tok::Arrow, 2),
            ('&', Some('&')) => (Tok::AndAnd, 2),
            ('|', Some('|')) => (Tok::OrOr, 2),
            ('!', Some('=')) => (Tok::Ne, 2),
            ('<', Some('=')) => (Tok::Le, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('<', Some('<')) => (Tok::Shl, 2),
            ('>', Some('>')) => (Tok::Shr, 2),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            (',', _) => (Tok::Comma, 1),
            (';', _) => (Tok::Semi, 1),
            (':', _) => (Tok::Colon, 1),
            ('.', _) => (Tok::Dot, 1),
            ('=', _) => (Tok::Assign, 1),
            ('!', _) => (Tok::Bang, 1),
            ('~', _) => (Tok::Tilde, 1),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('/', _) => (Tok::Slash, 1),
            ('%', _) => (Tok::Percent, 1),
            ('&', _) => (Tok::Amp, 1),
            ('|', _) => (Tok::Bar, 1),
            ('^', _) => (Tok::Caret, 1),
            _ => return Err(Error::syntax(pos, format!("unexpected character `{c}`"))),
        };
        for _ in 0..len {
            bump!();
        }
        out.push(Token { tok, pos });
    }
    out.push(Token { tok: Tok::Eof, pos: Pos { line, col } });
    Ok(out)
}
