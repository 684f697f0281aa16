use std::fmt;

use crate::span::Span;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

impl Ident {
    pub fn new(name: impl Into<String>, span: Span) -> Self {
        Ident {
            name: name.into(),
            span,
        }
    }

    pub fn as_str(&self) -> &str {
        &self.name
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Scalar types usable for attributes, variables and function parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScalarType {
    Int8,
    Int16,
    Int32,
    Int64,
    Uint8,
    Uint16,
    Uint32,
    Uint64,
    Bool,
    Float32,
    Float64,
    Char,
}

impl ScalarType {
    pub const ALL: [ScalarType; 12] = [
        ScalarType::Int8,
        ScalarType::Int16,
        ScalarType::Int32,
        ScalarType::Int64,
        ScalarType::Uint8,
        ScalarType::Uint16,
        ScalarType::Uint32,
        ScalarType::Uint64,
        ScalarType::Bool,
        ScalarType::Float32,
        ScalarType::Float64,
        ScalarType::Char,
    ];

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|t| t.cdl_name() == name)
    }

    pub fn cdl_name(self) -> &'static str {
        match self {
            ScalarType::Int8 => "int8",
            ScalarType::Int16 => "int16",
            ScalarType::Int32 => "int32",
            ScalarType::Int64 => "int64",
            ScalarType::Uint8 => "uint8",
            ScalarType::Uint16 => "uint16",
            ScalarType::Uint32 => "uint32",
            ScalarType::Uint64 => "uint64",
            ScalarType::Bool => "bool",
            ScalarType::Float32 => "float32",
            ScalarType::Float64 => "float64",
            ScalarType::Char => "char",
        }
    }

    /// Inclusive integer range, `None` for non-integer types.
    pub fn int_range(self) -> Option<(i128, i128)> {
        Some(match self {
            ScalarType::Int8 => (i8::MIN as i128, i8::MAX as i128),
            ScalarType::Int16 => (i16::MIN as i128, i16::MAX as i128),
            ScalarType::Int32 => (i32::MIN as i128, i32::MAX as i128),
            ScalarType::Int64 => (i64::MIN as i128, i64::MAX as i128),
            ScalarType::Uint8 | ScalarType::Char => (0, u8::MAX as i128),
            ScalarType::Uint16 => (0, u16::MAX as i128),
            ScalarType::Uint32 => (0, u32::MAX as i128),
            ScalarType::Uint64 => (0, u64::MAX as i128),
            _ => return None,
        })
    }

    /// Whether `lit` is an acceptable value of this type.
    pub fn accepts(self, lit: &Literal) -> bool {
        match (self, lit) {
            (ScalarType::Bool, Literal::Bool(_)) => true,
            (ScalarType::Float32 | ScalarType::Float64, Literal::Float(_) | Literal::Int(_)) => {
                true
            }
            (t, Literal::Int(v)) => t.int_range().is_some_and(|(lo, hi)| (lo..=hi).contains(v)),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Int(i128),
    Float(f64),
    Bool(bool),
}

impl Literal {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Literal::Int(_) => "integer",
            Literal::Float(_) => "float",
            Literal::Bool(_) => "bool",
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Int(v) => write!(f, "{v}"),
            Literal::Float(v) => {
                let s = v.to_string();
                if s.contains('.') {
                    f.write_str(&s)
                } else {
                    write!(f, "{s}.0")
                }
            }
            Literal::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiteralNode {
    pub value: Literal,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    In,
    Out,
    InOut,
}

impl Direction {
    pub fn from_word(word: &str) -> Option<Self> {
        match word {
            "in" => Some(Direction::In),
            "out" => Some(Direction::Out),
            "inout" => Some(Direction::InOut),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::In => "in",
            Direction::Out => "out",
            Direction::InOut => "inout",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamDecl {
    pub direction: Direction,
    pub ty: Ident,
    pub name: Ident,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionDecl {
    /// `None` for `void`.
    pub ret: Option<Ident>,
    pub name: Ident,
    pub params: Vec<ParamDecl>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignatureDecl {
    pub name: Ident,
    pub functions: Vec<FunctionDecl>,
    pub span: Span,
}

impl SignatureDecl {
    pub fn function(&self, name: &str) -> Option<&FunctionDecl> {
        self.functions.iter().find(|f| f.name.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortDecl {
    pub signature: Ident,
    pub name: Ident,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttrDecl {
    pub ty: Ident,
    pub name: Ident,
    pub default: Option<LiteralNode>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarDecl {
    pub ty: Ident,
    pub name: Ident,
    pub init: LiteralNode,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CelltypeDecl {
    pub name: Ident,
    pub entries: Vec<PortDecl>,
    pub calls: Vec<PortDecl>,
    pub attrs: Vec<AttrDecl>,
    pub vars: Vec<VarDecl>,
    pub span: Span,
}

impl CelltypeDecl {
    pub fn entry(&self, name: &str) -> Option<&PortDecl> {
        self.entries.iter().find(|p| p.name.name == name)
    }

    pub fn call(&self, name: &str) -> Option<&PortDecl> {
        self.calls.iter().find(|p| p.name.name == name)
    }

    pub fn attr(&self, name: &str) -> Option<&AttrDecl> {
        self.attrs.iter().find(|a| a.name.name == name)
    }

    pub fn has_vars(&self) -> bool {
        !self.vars.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Binding {
    pub port: Ident,
    pub target_cell: Ident,
    pub target_entry: Ident,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttrInit {
    pub name: Ident,
    pub value: LiteralNode,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellDecl {
    pub celltype: Ident,
    pub name: Ident,
    pub bindings: Vec<Binding>,
    pub attr_inits: Vec<AttrInit>,
    pub span: Span,
}

/// Parsed component description. Lists keep textual order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CdlAst {
    pub signatures: Vec<SignatureDecl>,
    pub celltypes: Vec<CelltypeDecl>,
    pub cells: Vec<CellDecl>,
}

impl CdlAst {
    /// Copy with every span zeroed, for structural comparison.
    pub fn without_spans(&self) -> CdlAst {
        let mut ast = self.clone();
        ast.clear_spans();
        ast
    }

    fn clear_spans(&mut self) {
        fn id(i: &mut Ident) {
            i.span = Span::default();
        }
        for s in &mut self.signatures {
            s.span = Span::default();
            id(&mut s.name);
            for f in &mut s.functions {
                f.span = Span::default();
                id(&mut f.name);
                if let Some(r) = &mut f.ret {
                    id(r);
                }
                for p in &mut f.params {
                    p.span = Span::default();
                    id(&mut p.ty);
                    id(&mut p.name);
                }
            }
        }
        for c in &mut self.celltypes {
            c.span = Span::default();
            id(&mut c.name);
            for p in c.entries.iter_mut().chain(c.calls.iter_mut()) {
                p.span = Span::default();
                id(&mut p.signature);
                id(&mut p.name);
            }
            for a in &mut c.attrs {
                a.span = Span::default();
                id(&mut a.ty);
                id(&mut a.name);
                if let Some(d) = &mut a.default {
                    d.span = Span::default();
                }
            }
            for v in &mut c.vars {
                v.span = Span::default();
                id(&mut v.ty);
                id(&mut v.name);
                v.init.span = Span::default();
            }
        }
        for c in &mut self.cells {
            c.span = Span::default();
            id(&mut c.celltype);
            id(&mut c.name);
            for b in &mut c.bindings {
                b.span = Span::default();
                id(&mut b.port);
                id(&mut b.target_cell);
                id(&mut b.target_entry);
            }
            for a in &mut c.attr_inits {
                a.span = Span::default();
                id(&mut a.name);
                a.value.span = Span::default();
            }
        }
    }

    /// Every span in the tree, in traversal order.
    pub fn spans(&self) -> Vec<Span> {
        let mut out = Vec::new();
        for s in &self.signatures {
            out.push(s.span);
            out.push(s.name.span);
            for f in &s.functions {
                out.push(f.span);
                out.push(f.name.span);
                out.extend(f.ret.as_ref().map(|r| r.span));
                for p in &f.params {
                    out.extend([p.span, p.ty.span, p.name.span]);
                }
            }
        }
        for c in &self.celltypes {
            out.extend([c.span, c.name.span]);
            for p in c.entries.iter().chain(&c.calls) {
                out.extend([p.span, p.signature.span, p.name.span]);
            }
            for a in &c.attrs {
                out.extend([a.span, a.ty.span, a.name.span]);
                out.extend(a.default.as_ref().map(|d| d.span));
            }
            for v in &c.vars {
                out.extend([v.span, v.ty.span, v.name.span, v.init.span]);
            }
        }
        for c in &self.cells {
            out.extend([c.span, c.celltype.span, c.name.span]);
            for b in &c.bindings {
                out.extend([b.span, b.port.span, b.target_cell.span, b.target_entry.span]);
            }
            for a in &c.attr_inits {
                out.extend([a.span, a.name.span, a.value.span]);
            }
        }
        out
    }
}

/// Canonical CDL text. Reparsing it yields the same tree modulo spans.
impl fmt::Display for CdlAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.signatures {
            writeln!(f, "signature {} {{", s.name)?;
            for func in &s.functions {
                let ret = func.ret.as_ref().map_or("void", |r| r.as_str());
                write!(f, "    {} {}(", ret, func.name)?;
                if func.params.is_empty() {
                    f.write_str("void")?;
                }
                for (i, p) in func.params.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    if p.direction != Direction::In {
                        write!(f, "{} ", p.direction.as_str())?;
                    }
                    write!(f, "{} {}", p.ty, p.name)?;
                }
                writeln!(f, ");")?;
            }
            writeln!(f, "}};")?;
            writeln!(f)?;
        }
        for c in &self.celltypes {
            writeln!(f, "celltype {} {{", c.name)?;
            for p in &c.entries {
                writeln!(f, "    entry {} {};", p.signature, p.name)?;
            }
            for p in &c.calls {
                writeln!(f, "    call {} {};", p.signature, p.name)?;
            }
            if !c.attrs.is_empty() {
                writeln!(f, "    attr {{")?;
                for a in &c.attrs {
                    match &a.default {
                        Some(d) => writeln!(f, "        {} {} = {};", a.ty, a.name, d.value)?,
                        None => writeln!(f, "        {} {};", a.ty, a.name)?,
                    }
                }
                writeln!(f, "    }};")?;
            }
            if !c.vars.is_empty() {
                writeln!(f, "    var {{")?;
                for v in &c.vars {
                    writeln!(f, "        {} {} = {};", v.ty, v.name, v.init.value)?;
                }
                writeln!(f, "    }};")?;
            }
            writeln!(f, "}};")?;
            writeln!(f)?;
        }
        for c in &self.cells {
            writeln!(f, "cell {} {} {{", c.celltype, c.name)?;
            for b in &c.bindings {
                writeln!(f, "    {} = {}.{};", b.port, b.target_cell, b.target_entry)?;
            }
            for a in &c.attr_inits {
                writeln!(f, "    {} = {};", a.name, a.value.value)?;
            }
            writeln!(f, "}};")?;
            writeln!(f)?;
        }
        Ok(())
    }
}
