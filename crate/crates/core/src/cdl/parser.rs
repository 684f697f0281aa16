//! Recursive-descent parser for the component description language.

use std::fmt;

use thiserror::Error;

use super::ast::*;
use crate::lexer::{tokenize, Keyword, LexError, Token, TokenKind};
use crate::span::Span;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("{span}: expected {}, found {found}", ExpectedList(.expected))]
    Unexpected {
        span: Span,
        expected: Vec<String>,
        found: String,
    },
    #[error("{span}: {message}")]
    Invalid { span: Span, message: String },
}

impl ParseError {
    pub fn span(&self) -> Span {
        match self {
            ParseError::Lex(e) => e.span(),
            ParseError::Unexpected { span, .. } | ParseError::Invalid { span, .. } => *span,
        }
    }
}

struct ExpectedList<'a>(&'a [String]);

impl fmt::Display for ExpectedList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            [] => f.write_str("nothing"),
            [one] => f.write_str(one),
            many => {
                let (last, rest) = many.split_last().unwrap();
                write!(f, "one of {} or {}", rest.join(", "), last)
            }
        }
    }
}

pub fn parse_cdl(text: &str) -> Result<CdlAst, ParseError> {
    let tokens = tokenize(text)?;
    Parser::new(&tokens, text).file()
}

/// Token cursor shared with the call-flow parser.
pub(crate) struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    eof: Span,
}

impl<'t> Parser<'t> {
    pub(crate) fn new(tokens: &'t [Token], text: &str) -> Self {
        let (line, col) = end_position(text);
        Parser {
            tokens,
            pos: 0,
            eof: Span::new(text.len(), text.len(), line, col),
        }
    }

    pub(crate) fn peek(&self) -> Option<&'t Token> {
        self.tokens.get(self.pos)
    }

    pub(crate) fn peek_kind(&self, ahead: usize) -> Option<TokenKind> {
        self.tokens.get(self.pos + ahead).map(|t| t.kind)
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    pub(crate) fn prev_span(&self) -> Span {
        self.pos
            .checked_sub(1)
            .and_then(|i| self.tokens.get(i))
            .map_or(self.eof, |t| t.span)
    }

    pub(crate) fn unexpected(&self, expected: &[TokenKind]) -> ParseError {
        self.unexpected_str(expected.iter().map(|k| k.to_string()).collect())
    }

    pub(crate) fn unexpected_str(&self, expected: Vec<String>) -> ParseError {
        match self.peek() {
            Some(t) => ParseError::Unexpected {
                span: t.span,
                expected,
                found: format!("`{}`", t.lexeme),
            },
            None => ParseError::Unexpected {
                span: self.eof,
                expected,
                found: "end of input".to_string(),
            },
        }
    }

    pub(crate) fn eat(&mut self, kind: TokenKind) -> Option<&'t Token> {
        match self.peek() {
            Some(t) if t.kind == kind => {
                self.pos += 1;
                Some(t)
            }
            _ => None,
        }
    }

    pub(crate) fn expect(&mut self, kind: TokenKind) -> Result<&'t Token, ParseError> {
        self.eat(kind).ok_or_else(|| self.unexpected(&[kind]))
    }

    pub(crate) fn ident(&mut self) -> Result<Ident, ParseError> {
        let t = self.expect(TokenKind::Ident)?;
        Ok(Ident::new(t.lexeme.clone(), t.span))
    }

    pub(crate) fn int(&mut self) -> Result<(i128, Span), ParseError> {
        let t = self.expect(TokenKind::Int)?;
        let v = t.lexeme.parse::<i128>().map_err(|_| ParseError::Invalid {
            span: t.span,
            message: format!("integer literal `{}` out of range", t.lexeme),
        })?;
        Ok((v, t.span))
    }

    fn literal(&mut self) -> Result<LiteralNode, ParseError> {
        let Some(t) = self.peek() else {
            return Err(self.unexpected(&[TokenKind::Int, TokenKind::Float, TokenKind::Bool]));
        };
        let value = match t.kind {
            TokenKind::Int => Literal::Int(self.int()?.0),
            TokenKind::Float => {
                self.pos += 1;
                Literal::Float(t.lexeme.parse().map_err(|_| ParseError::Invalid {
                    span: t.span,
                    message: format!("malformed float literal `{}`", t.lexeme),
                })?)
            }
            TokenKind::Bool => {
                self.pos += 1;
                Literal::Bool(t.lexeme == "true")
            }
            _ => return Err(self.unexpected(&[TokenKind::Int, TokenKind::Float, TokenKind::Bool])),
        };
        Ok(LiteralNode {
            value,
            span: t.span,
        })
    }

    fn file(mut self) -> Result<CdlAst, ParseError> {
        let mut ast = CdlAst::default();
        while let Some(t) = self.peek() {
            match t.kind {
                TokenKind::Keyword(Keyword::Signature) => ast.signatures.push(self.signature()?),
                TokenKind::Keyword(Keyword::Celltype) => ast.celltypes.push(self.celltype()?),
                TokenKind::Keyword(Keyword::Cell) => ast.cells.push(self.cell()?),
                _ => {
                    return Err(self.unexpected(&[
                        TokenKind::Keyword(Keyword::Signature),
                        TokenKind::Keyword(Keyword::Celltype),
                        TokenKind::Keyword(Keyword::Cell),
                    ]))
                }
            }
        }
        Ok(ast)
    }

    fn close_decl(&mut self) -> Result<Span, ParseError> {
        self.expect(TokenKind::RBrace)?;
        Ok(self.expect(TokenKind::Semi)?.span)
    }

    fn signature(&mut self) -> Result<SignatureDecl, ParseError> {
        let start = self.expect(TokenKind::Keyword(Keyword::Signature))?.span;
        let name = self.ident()?;
        self.expect(TokenKind::LBrace)?;
        let mut functions = Vec::new();
        while self.peek_kind(0) != Some(TokenKind::RBrace) {
            functions.push(self.function()?);
        }
        let end = self.close_decl()?;
        Ok(SignatureDecl {
            name,
            functions,
            span: start.to(end),
        })
    }

    fn function(&mut self) -> Result<FunctionDecl, ParseError> {
        let start = self.peek().map(|t| t.span);
        let ret = if self.eat(TokenKind::Keyword(Keyword::Void)).is_some() {
            None
        } else if self.peek_kind(0) == Some(TokenKind::Ident) {
            Some(self.ident()?)
        } else {
            return Err(self.unexpected(&[
                TokenKind::Keyword(Keyword::Void),
                TokenKind::Ident,
                TokenKind::RBrace,
            ]));
        };
        let name = self.ident()?;
        self.expect(TokenKind::LParen)?;
        let mut params = Vec::new();
        if self.eat(TokenKind::Keyword(Keyword::Void)).is_none() {
            loop {
                params.push(self.param()?);
                if self.eat(TokenKind::Comma).is_none() {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen)?;
        let end = self.expect(TokenKind::Semi)?.span;
        Ok(FunctionDecl {
            ret,
            name,
            params,
            span: start.unwrap_or(end).to(end),
        })
    }

    // param := [ "in" | "out" | "inout" ] type IDENT
    fn param(&mut self) -> Result<ParamDecl, ParseError> {
        let first = self.ident()?;
        let second = self.ident()?;
        let (direction, ty, name) = if self.peek_kind(0) == Some(TokenKind::Ident) {
            let dir = Direction::from_word(&first.name).ok_or_else(|| ParseError::Invalid {
                span: first.span,
                message: format!(
                    "expected parameter direction `in`, `out` or `inout`, found `{}`",
                    first.name
                ),
            })?;
            (dir, second, self.ident()?)
        } else {
            (Direction::In, first, second)
        };
        let span = match direction {
            Direction::In => ty.span.to(name.span),
            _ => self.tokens[self.pos - 3].span.to(name.span),
        };
        Ok(ParamDecl {
            direction,
            ty,
            name,
            span,
        })
    }

    fn celltype(&mut self) -> Result<CelltypeDecl, ParseError> {
        let start = self.expect(TokenKind::Keyword(Keyword::Celltype))?.span;
        let name = self.ident()?;
        self.expect(TokenKind::LBrace)?;
        let (mut entries, mut calls, mut attrs, mut vars) = (vec![], vec![], vec![], vec![]);
        loop {
            match self.peek_kind(0) {
                Some(TokenKind::Keyword(kw @ (Keyword::Entry | Keyword::Call))) => {
                    let kw_span = self.tokens[self.pos].span;
                    self.pos += 1;
                    let signature = self.ident()?;
                    let port = self.ident()?;
                    let end = self.expect(TokenKind::Semi)?.span;
                    let decl = PortDecl {
                        signature,
                        name: port,
                        span: kw_span.to(end),
                    };
                    if kw == Keyword::Entry {
                        entries.push(decl);
                    } else {
                        calls.push(decl);
                    }
                }
                Some(TokenKind::Keyword(Keyword::Attr)) => {
                    self.pos += 1;
                    self.expect(TokenKind::LBrace)?;
                    while self.peek_kind(0) != Some(TokenKind::RBrace) {
                        let ty = self.member_type()?;
                        let name = self.ident()?;
                        let default = match self.eat(TokenKind::Eq) {
                            Some(_) => Some(self.literal()?),
                            None => None,
                        };
                        let end = self.expect(TokenKind::Semi)?.span;
                        attrs.push(AttrDecl {
                            span: ty.span.to(end),
                            ty,
                            name,
                            default,
                        });
                    }
                    self.close_decl()?;
                }
                Some(TokenKind::Keyword(Keyword::Var)) => {
                    self.pos += 1;
                    self.expect(TokenKind::LBrace)?;
                    while self.peek_kind(0) != Some(TokenKind::RBrace) {
                        let ty = self.member_type()?;
                        let name = self.ident()?;
                        self.expect(TokenKind::Eq)?;
                        let init = self.literal()?;
                        let end = self.expect(TokenKind::Semi)?.span;
                        vars.push(VarDecl {
                            span: ty.span.to(end),
                            ty,
                            name,
                            init,
                        });
                    }
                    self.close_decl()?;
                }
                Some(TokenKind::RBrace) => break,
                _ => {
                    return Err(self.unexpected(&[
                        TokenKind::Keyword(Keyword::Entry),
                        TokenKind::Keyword(Keyword::Call),
                        TokenKind::Keyword(Keyword::Attr),
                        TokenKind::Keyword(Keyword::Var),
                        TokenKind::RBrace,
                    ]))
                }
            }
        }
        let end = self.close_decl()?;
        Ok(CelltypeDecl {
            name,
            entries,
            calls,
            attrs,
            vars,
            span: start.to(end),
        })
    }

    fn member_type(&mut self) -> Result<Ident, ParseError> {
        if self.peek_kind(0) == Some(TokenKind::Ident) {
            self.ident()
        } else {
            Err(self.unexpected_str(vec!["type name".into(), TokenKind::RBrace.to_string()]))
        }
    }

    fn cell(&mut self) -> Result<CellDecl, ParseError> {
        let start = self.expect(TokenKind::Keyword(Keyword::Cell))?.span;
        let celltype = self.ident()?;
        let name = self.ident()?;
        self.expect(TokenKind::LBrace)?;
        let mut bindings = Vec::new();
        let mut attr_inits = Vec::new();
        while self.peek_kind(0) != Some(TokenKind::RBrace) {
            if self.at_end() {
                return Err(self.unexpected(&[TokenKind::Ident, TokenKind::RBrace]));
            }
            let lhs = self.ident()?;
            self.expect(TokenKind::Eq)?;
            if self.peek_kind(0) == Some(TokenKind::Ident) {
                let target_cell = self.ident()?;
                self.expect(TokenKind::Dot)?;
                let target_entry = self.ident()?;
                let end = self.expect(TokenKind::Semi)?.span;
                bindings.push(Binding {
                    span: lhs.span.to(end),
                    port: lhs,
                    target_cell,
                    target_entry,
                });
            } else {
                let value = self.literal().map_err(|_| {
                    self.unexpected_str(vec![
                        "cell name".into(),
                        TokenKind::Int.to_string(),
                        TokenKind::Float.to_string(),
                        TokenKind::Bool.to_string(),
                    ])
                })?;
                let end = self.expect(TokenKind::Semi)?.span;
                attr_inits.push(AttrInit {
                    span: lhs.span.to(end),
                    name: lhs,
                    value,
                });
            }
        }
        let end = self.close_decl()?;
        Ok(CellDecl {
            celltype,
            name,
            bindings,
            attr_inits,
            span: start.to(end),
        })
    }
}

fn end_position(text: &str) -> (u32, u32) {
    let line = 1 + text.matches('\n').count() as u32;
    let col = 1 + text.rsplit('\n').next().map_or(0, |l| l.chars().count()) as u32;
    (line, col)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_signature() {
        let ast = parse_cdl("signature sX { void f(void); };").unwrap();
        assert_eq!(ast.signatures.len(), 1);
        let f = &ast.signatures[0].functions[0];
        assert_eq!(f.name.name, "f");
        assert!(f.params.is_empty());
        assert!(f.ret.is_none());
    }

    #[test]
    fn cell_with_attr_init() {
        let src = "celltype tSensor { attr { int32 port; }; };\ncell tSensor S1 { port = 1; };";
        let ast = parse_cdl(src).unwrap();
        let cell = &ast.cells[0];
        assert_eq!(cell.name.name, "S1");
        assert_eq!(cell.attr_inits.len(), 1);
        assert_eq!(cell.attr_inits[0].value.value, Literal::Int(1));
        assert!(cell.bindings.is_empty());
        assert_eq!(cell.span.line, 2);
    }

    #[test]
    fn params_and_directions() {
        let ast =
            parse_cdl("signature s { int32 f(int32 a, out int32 b, inout bool c); };").unwrap();
        let p = &ast.signatures[0].functions[0].params;
        assert_eq!(p.len(), 3);
        assert_eq!(p[0].direction, Direction::In);
        assert_eq!(p[1].direction, Direction::Out);
        assert_eq!(p[2].direction, Direction::InOut);
        assert_eq!(p[2].ty.name, "bool");
        assert!(parse_cdl("signature s { void f(sideways int32 b); };").is_err());
    }

    #[test]
    fn binding_and_attr_are_distinguished() {
        let ast = parse_cdl("cell tC C { cA = A.eA; n = 3.5; b = true; };").unwrap();
        assert_eq!(ast.cells[0].bindings.len(), 1);
        assert_eq!(ast.cells[0].attr_inits.len(), 2);
        assert_eq!(ast.cells[0].attr_inits[0].value.value, Literal::Float(3.5));
    }

    #[test]
    fn errors_point_at_offending_token() {
        let err = parse_cdl("signature s {\n  void f(void)\n};").unwrap_err();
        match &err {
            ParseError::Unexpected {
                span,
                expected,
                found,
            } => {
                assert_eq!(span.line, 3);
                assert_eq!(expected, &vec!["`;`".to_string()]);
                assert_eq!(found, "`}`");
            }
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_cdl("celltype t {").unwrap_err();
        assert!(err.to_string().contains("end of input"));
    }

    #[test]
    fn garbage_never_panics() {
        for src in [
            "}",
            ";;",
            "cell",
            "cell a b { x = ; };",
            "signature s { int32 };",
            "=.",
            "attr",
        ] {
            assert!(parse_cdl(src).is_err(), "{src}");
        }
    }

    #[test]
    fn round_trip_is_structural() {
        let src = "signature s { int32 f(out int32 a); void g(void); };\n\
                   celltype t { entry s e; call s c; attr { int8 a = -3; float32 k; }; var { bool on = false; }; };\n\
                   cell t A { c = A2.e; k = 1.5; };";
        let ast = parse_cdl(src).unwrap();
        let printed = ast.to_string();
        let again = parse_cdl(&printed).unwrap();
        assert_eq!(ast.without_spans(), again.without_spans());
    }
}
