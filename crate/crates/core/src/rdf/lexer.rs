//! Tokenizer shared by the Turtle-subset and query parsers.

use std::fmt;

use super::term::{is_iriref_char, is_local_char};

/// 1-based source position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    /// `@prefix`
    AtPrefix,
    /// Bare identifier: keywords, function names, numbers.
    Word(String),
    PName {
        prefix: String,
        local: String,
    },
    IriRef(String),
    Var(String),
    Str(String),
    Carets,
    Dot,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Eq,
    Punct(char),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::AtPrefix => f.write_str("@prefix"),
            Tok::Word(w) => f.write_str(w),
            Tok::PName { prefix, local } => write!(f, "{prefix}:{local}"),
            Tok::IriRef(i) => write!(f, "<{i}>"),
            Tok::Var(v) => write!(f, "?{v}"),
            Tok::Str(s) => write!(f, "{s:?}"),
            Tok::Carets => f.write_str("^^"),
            Tok::Dot => f.write_str("."),
            Tok::LBrace => f.write_str("{"),
            Tok::RBrace => f.write_str("}"),
            Tok::LParen => f.write_str("("),
            Tok::RParen => f.write_str(")"),
            Tok::Eq => f.write_str("="),
            Tok::Punct(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Debug)]
pub struct LexError {
    pub pos: Pos,
    pub message: String,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let mut out = String::new();
        while let Some(c) = self.peek().filter(|c| pred(*c)) {
            out.push(c);
            self.bump();
        }
        out
    }
}

pub fn tokenize(text: &str) -> Result<Vec<(Tok, Pos)>, LexError> {
    let mut cur = Cursor {
        chars: text.chars().peekable(),
        pos: Pos { line: 1, col: 1 },
    };
    let mut out = Vec::new();
    while let Some(c) = cur.peek() {
        let start = cur.pos;
        let err = |message: String| LexError {
            pos: start,
            message,
        };
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '#' {
            cur.take_while(|c| c != '\n');
            continue;
        }
        let tok = match c {
            '.' => single(&mut cur, Tok::Dot),
            '{' => single(&mut cur, Tok::LBrace),
            '}' => single(&mut cur, Tok::RBrace),
            '(' => single(&mut cur, Tok::LParen),
            ')' => single(&mut cur, Tok::RParen),
            '=' => single(&mut cur, Tok::Eq),
            '^' => {
                cur.bump();
                if cur.peek() != Some('^') {
                    return Err(err("expected `^^`".into()));
                }
                cur.bump();
                Tok::Carets
            }
            '@' => {
                cur.bump();
                let word = cur.take_while(is_local_char);
                if word != "prefix" {
                    return Err(err(format!("unknown directive `@{word}`")));
                }
                Tok::AtPrefix
            }
            '?' | '$' => {
                cur.bump();
                let name = cur.take_while(|c| c.is_alphanumeric() || c == '_');
                if name.is_empty() {
                    return Err(err("empty variable name".into()));
                }
                Tok::Var(name)
            }
            '"' => {
                cur.bump();
                Tok::Str(string_body(&mut cur).map_err(err)?)
            }
            '<' => {
                cur.bump();
                let body = cur.take_while(|c| c != '>' && is_iriref_char(c));
                if cur.peek() == Some('>') {
                    cur.bump();
                    Tok::IriRef(body)
                } else if body.is_empty() {
                    Tok::Punct('<')
                } else {
                    return Err(err("unterminated IRI".into()));
                }
            }
            ':' => {
                cur.bump();
                Tok::PName {
                    prefix: String::new(),
                    local: cur.take_while(is_local_char),
                }
            }
            c if is_local_char(c) => {
                let word = cur.take_while(is_local_char);
                if cur.peek() == Some(':') {
                    cur.bump();
                    Tok::PName {
                        prefix: word,
                        local: cur.take_while(is_local_char),
                    }
                } else {
                    Tok::Word(word)
                }
            }
            other => single(&mut cur, Tok::Punct(other)),
        };
        out.push((tok, start));
    }
    Ok(out)
}

fn single(cur: &mut Cursor<'_>, tok: Tok) -> Tok {
    cur.bump();
    tok
}

fn string_body(cur: &mut Cursor<'_>) -> Result<String, String> {
    let mut out = String::new();
    loop {
        match cur.bump() {
            None | Some('\n') => return Err("unterminated string".into()),
            Some('"') => return Ok(out),
            Some('\\') => match cur.bump() {
                Some('"') => out.push('"'),
                Some('\\') => out.push('\\'),
                Some('n') => out.push('\n'),
                Some('r') => out.push('\r'),
                Some('t') => out.push('\t'),
                Some('u') => {
                    let hex: String = (0..4).filter_map(|_| cur.bump()).collect();
                    let ch = u32::from_str_radix(&hex, 16)
                        .ok()
                        .and_then(char::from_u32)
                        .ok_or_else(|| format!("bad \\u escape `{hex}`"))?;
                    out.push(ch);
                }
                other => return Err(format!("unknown escape `\\{}`", other.unwrap_or(' '))),
            },
            Some(c) => out.push(c),
        }
    }
}
