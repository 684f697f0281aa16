//! Tokenizer shared by the component-description and call-flow front ends.
//!
//! Both inputs use the same lexical rules (C-style comments, identifiers,
//! decimal literals, a small punctuation set). They differ only in which
//! words are reserved, selected through [`Dialect`].

use std::fmt;

use thiserror::Error;

use crate::span::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Keyword {
    Signature,
    Celltype,
    Cell,
    Entry,
    Call,
    Attr,
    Var,
    Void,
    Task,
    Priority,
}

impl Keyword {
    pub fn as_str(self) -> &'static str {
        match self {
            Keyword::Signature => "signature",
            Keyword::Celltype => "celltype",
            Keyword::Cell => "cell",
            Keyword::Entry => "entry",
            Keyword::Call => "call",
            Keyword::Attr => "attr",
            Keyword::Var => "var",
            Keyword::Void => "void",
            Keyword::Task => "task",
            Keyword::Priority => "priority",
        }
    }
}

/// Reserved-word set in effect while tokenizing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dialect {
    Cdl,
    Flow,
}

impl Dialect {
    fn keywords(self) -> &'static [Keyword] {
        match self {
            Dialect::Cdl => &[
                Keyword::Signature,
                Keyword::Celltype,
                Keyword::Cell,
                Keyword::Entry,
                Keyword::Call,
                Keyword::Attr,
                Keyword::Var,
                Keyword::Void,
            ],
            Dialect::Flow => &[Keyword::Task, Keyword::Priority],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Keyword(Keyword),
    Ident,
    Int,
    Float,
    Bool,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Comma,
    Eq,
    Dot,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Keyword(k) => write!(f, "`{}`", k.as_str()),
            TokenKind::Ident => f.write_str("identifier"),
            TokenKind::Int => f.write_str("integer literal"),
            TokenKind::Float => f.write_str("float literal"),
            TokenKind::Bool => f.write_str("bool literal"),
            TokenKind::LBrace => f.write_str("`{`"),
            TokenKind::RBrace => f.write_str("`}`"),
            TokenKind::LParen => f.write_str("`(`"),
            TokenKind::RParen => f.write_str("`)`"),
            TokenKind::Semi => f.write_str("`;`"),
            TokenKind::Comma => f.write_str("`,`"),
            TokenKind::Eq => f.write_str("`=`"),
            TokenKind::Dot => f.write_str("`.`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexError {
    #[error("{span}: unrecognized input {text:?}")]
    Unrecognized { span: Span, text: String },
    #[error("{span}: unterminated block comment")]
    UnterminatedComment { span: Span },
}

impl LexError {
    pub fn span(&self) -> Span {
        match self {
            LexError::Unrecognized { span, .. } | LexError::UnterminatedComment { span } => *span,
        }
    }
}

/// Tokenizes component-description text.
pub fn tokenize(text: &str) -> Result<Vec<Token>, LexError> {
    tokenize_dialect(text, Dialect::Cdl)
}

pub fn tokenize_dialect(text: &str, dialect: Dialect) -> Result<Vec<Token>, LexError> {
    Lexer::new(text, dialect).run()
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
    dialect: Dialect,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str, dialect: Dialect) -> Self {
        Lexer {
            src,
            bytes: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
            dialect,
        }
    }

    fn peek(&self, ahead: usize) -> Option<u8> {
        self.bytes.get(self.pos + ahead).copied()
    }

    fn bump(&mut self) {
        if let Some(b) = self.peek(0) {
            self.pos += 1;
            if b == b'\n' {
                self.line += 1;
                self.col = 1;
            } else if b & 0xC0 != 0x80 {
                // count chars, not UTF-8 continuation bytes
                self.col += 1;
            }
        }
    }

    fn run(mut self) -> Result<Vec<Token>, LexError> {
        let mut out = Vec::new();
        while let Some(b) = self.peek(0) {
            let (start, line, col) = (self.pos, self.line, self.col);
            match b {
                b' ' | b'\t' | b'\r' | b'\n' => self.bump(),
                b'/' if self.peek(1) == Some(b'/') => {
                    while !matches!(self.peek(0), None | Some(b'\n')) {
                        self.bump();
                    }
                }
                b'/' if self.peek(1) == Some(b'*') => {
                    self.bump();
                    self.bump();
                    loop {
                        match (self.peek(0), self.peek(1)) {
                            (Some(b'*'), Some(b'/')) => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            (Some(_), _) => self.bump(),
                            (None, _) => {
                                return Err(LexError::UnterminatedComment {
                                    span: Span::new(start, self.pos, line, col),
                                })
                            }
                        }
                    }
                }
                b'{' | b'}' | b'(' | b')' | b';' | b',' | b'=' | b'.' => {
                    let kind = match b {
                        b'{' => TokenKind::LBrace,
                        b'}' => TokenKind::RBrace,
                        b'(' => TokenKind::LParen,
                        b')' => TokenKind::RParen,
                        b';' => TokenKind::Semi,
                        b',' => TokenKind::Comma,
                        b'=' => TokenKind::Eq,
                        _ => TokenKind::Dot,
                    };
                    self.bump();
                    out.push(self.token(kind, start, line, col));
                }
                b'0'..=b'9' => out.push(self.number(start, line, col)),
                b'-' if matches!(self.peek(1), Some(b'0'..=b'9')) => {
                    self.bump();
                    out.push(self.number(start, line, col));
                }
                b if b == b'_' || b.is_ascii_alphabetic() => {
                    while matches!(self.peek(0), Some(c) if c == b'_' || c.is_ascii_alphanumeric())
                    {
                        self.bump();
                    }
                    let word = &self.src[start..self.pos];
                    let kind = if word == "true" || word == "false" {
                        TokenKind::Bool
                    } else if let Some(k) =
                        self.dialect.keywords().iter().find(|k| k.as_str() == word)
                    {
                        TokenKind::Keyword(*k)
                    } else {
                        TokenKind::Ident
                    };
                    out.push(self.token(kind, start, line, col));
                }
                _ => {
                    // consume one whole char so the reported text is valid UTF-8
                    self.bump();
                    while matches!(self.peek(0), Some(c) if c & 0xC0 == 0x80) {
                        self.bump();
                    }
                    return Err(LexError::Unrecognized {
                        span: Span::new(start, self.pos, line, col),
                        text: self.src[start..self.pos].to_string(),
                    });
                }
            }
        }
        Ok(out)
    }

    fn number(&mut self, start: usize, line: u32, col: u32) -> Token {
        while matches!(self.peek(0), Some(b'0'..=b'9')) {
            self.bump();
        }
        let mut kind = TokenKind::Int;
        if self.peek(0) == Some(b'.') && matches!(self.peek(1), Some(b'0'..=b'9')) {
            kind = TokenKind::Float;
            self.bump();
            while matches!(self.peek(0), Some(b'0'..=b'9')) {
                self.bump();
            }
        }
        self.token(kind, start, line, col)
    }

    fn token(&self, kind: TokenKind, start: usize, line: u32, col: u32) -> Token {
        Token {
            kind,
            lexeme: self.src[start..self.pos].to_string(),
            span: Span::new(start, self.pos, line, col),
        }
    }
}
