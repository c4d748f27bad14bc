//! Recursive-descent parser for the C subset.

use std::collections::HashMap;

use super::ast::*;
use super::diag::{Diagnostic, Loc};
use super::token::{IntSuffix, Keyword, Punct, Token, TokenKind};

type PResult<T> = Result<T, Diagnostic>;

enum Deriv {
    Ptr,
    Array(u64),
    Func(Vec<Param>),
}

struct Declarator {
    name: Option<String>,
    name_loc: Loc,
    /// Applied to the base type in order.
    derivs: Vec<Deriv>,
}

impl Declarator {
    fn apply(&self, base: CType) -> CType {
        let mut ty = base;
        for d in &self.derivs {
            ty = match d {
                Deriv::Ptr => CType::ptr(ty),
                Deriv::Array(n) => CType::Array(Box::new(ty), *n),
                Deriv::Func(ps) => {
                    CType::Function { params: ps.iter().map(|p| p.ty.clone()).collect(), result: Box::new(ty) }
                }
            };
        }
        ty
    }

    /// Parameters of the outermost function derivation, when the declarator
    /// declares a function.
    fn function_params(&self) -> Option<&Vec<Param>> {
        match self.derivs.last() {
            Some(Deriv::Func(ps)) => Some(ps),
            _ => None,
        }
    }
}

#[derive(Default)]
struct Specifiers {
    base: Option<CType>,
    is_static: bool,
    is_typedef: bool,
    is_const: bool,
}

pub(crate) struct Parser<'a> {
    toks: Vec<&'a Token>,
    /// Index of each significant token in the full (trivia-including) stream.
    full_index: Vec<usize>,
    pos: usize,
    typedefs: HashMap<String, CType>,
    anon: usize,
    ast: Ast,
    /// Accept annotation-only syntax (`==>`, `\old`, `\result`, booleans).
    annotation: bool,
}

/// Parse a token sequence (as produced by `tokenize`) into an AST.
pub fn parse_unit(tokens: &[Token]) -> Result<Ast, Vec<Diagnostic>> {
    let mut p = Parser::new(tokens, false);
    match p.unit() {
        Ok(()) => Ok(p.ast),
        Err(d) => Err(vec![d]),
    }
}

/// Parse a standalone annotation expression.
pub(crate) fn parse_annotation_expr(tokens: &[Token]) -> PResult<Expr> {
    let mut p = Parser::new(tokens, true);
    let e = p.expr()?;
    if !p.at_end() {
        return Err(p.unexpected("end of clause"));
    }
    Ok(e)
}

impl<'a> Parser<'a> {
    pub(crate) fn new(tokens: &'a [Token], annotation: bool) -> Self {
        let mut toks = Vec::new();
        let mut full_index = Vec::new();
        for (i, t) in tokens.iter().enumerate() {
            if !t.kind.is_trivia() {
                toks.push(t);
                full_index.push(i);
            }
        }
        Parser { toks, full_index, pos: 0, typedefs: HashMap::new(), anon: 0, ast: Ast::default(), annotation }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn peek_kind(&self, off: usize) -> Option<&TokenKind> {
        self.toks.get(self.pos + off).map(|t| &t.kind)
    }

    fn loc(&self) -> Loc {
        self.toks.get(self.pos).or_else(|| self.toks.last()).map(|t| t.loc).unwrap_or(Loc { line: 1, col: 1 })
    }

    fn tok_idx(&self) -> TokIdx {
        TokIdx(self.full_index.get(self.pos).copied().unwrap_or(usize::MAX))
    }

    fn is_punct(&self, p: Punct) -> bool {
        matches!(self.peek_kind(0), Some(TokenKind::Punct(q)) if *q == p)
    }

    fn is_punct_at(&self, off: usize, p: Punct) -> bool {
        matches!(self.peek_kind(off), Some(TokenKind::Punct(q)) if *q == p)
    }

    fn is_kw(&self, k: Keyword) -> bool {
        matches!(self.peek_kind(0), Some(TokenKind::Keyword(q)) if *q == k)
    }

    fn eat_punct(&mut self, p: Punct) -> bool {
        if self.is_punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: Keyword) -> bool {
        if self.is_kw(k) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn unexpected(&self, wanted: &str) -> Diagnostic {
        let found = match self.peek_kind(0) {
            Some(k) => format!("`{}`", describe(k)),
            None => "end of input".to_string(),
        };
        Diagnostic::error("syntax", self.loc(), format!("expected {wanted}, found {found}"))
    }

    fn expect_punct(&mut self, p: Punct) -> PResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{}`", p.as_str())))
        }
    }

    fn ident(&mut self) -> PResult<(String, Loc)> {
        let loc = self.loc();
        match self.peek_kind(0) {
            Some(TokenKind::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok((s, loc))
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    // ---------------------------------------------------------------- types

    fn starts_type(&self, off: usize) -> bool {
        match self.peek_kind(off) {
            Some(TokenKind::Keyword(k)) => matches!(
                k,
                Keyword::Void
                    | Keyword::Char
                    | Keyword::Short
                    | Keyword::Int
                    | Keyword::Long
                    | Keyword::Signed
                    | Keyword::Unsigned
                    | Keyword::Float
                    | Keyword::Double
                    | Keyword::Bool
                    | Keyword::Struct
                    | Keyword::Union
                    | Keyword::Enum
                    | Keyword::Const
                    | Keyword::Volatile
                    | Keyword::Static
                    | Keyword::Extern
                    | Keyword::Typedef
                    | Keyword::Inline
                    | Keyword::Register
                    | Keyword::Auto
            ),
            Some(TokenKind::Ident(s)) => self.typedefs.contains_key(s),
            _ => false,
        }
    }

    fn specifiers(&mut self) -> PResult<Specifiers> {
        let start = self.loc();
        let mut sp = Specifiers::default();
        let (mut signed, mut unsigned, mut longs, mut short, mut char_, mut int, mut void) =
            (false, false, 0, false, false, false, false);
        let (mut float, mut double, mut bool_) = (false, false, false);
        let mut named: Option<CType> = None;
        loop {
            match self.peek_kind(0) {
                Some(TokenKind::Keyword(k)) => {
                    let k = *k;
                    match k {
                        Keyword::Static => sp.is_static = true,
                        Keyword::Typedef => sp.is_typedef = true,
                        Keyword::Const => sp.is_const = true,
                        Keyword::Extern | Keyword::Volatile | Keyword::Inline | Keyword::Register | Keyword::Auto => {}
                        Keyword::Signed => signed = true,
                        Keyword::Unsigned => unsigned = true,
                        Keyword::Long => longs += 1,
                        Keyword::Short => short = true,
                        Keyword::Char => char_ = true,
                        Keyword::Int => int = true,
                        Keyword::Void => void = true,
                        Keyword::Float => float = true,
                        Keyword::Double => double = true,
                        Keyword::Bool => bool_ = true,
                        Keyword::Struct | Keyword::Union => {
                            self.pos += 1;
                            named = Some(self.struct_spec(k == Keyword::Union)?);
                            continue;
                        }
                        Keyword::Enum => {
                            return Err(Diagnostic::error("enum", self.loc(), "enumerations are not supported"))
                        }
                        _ => break,
                    }
                    self.pos += 1;
                }
                Some(TokenKind::Ident(s))
                    if named.is_none()
                        && !(signed || unsigned || longs > 0 || short || char_ || int || void)
                        && self.typedefs.contains_key(s) =>
                {
                    named = Some(self.typedefs[s].clone());
                    self.pos += 1;
                }
                _ => break,
            }
        }
        let any_word = signed || unsigned || longs > 0 || short || char_ || int;
        sp.base = if let Some(t) = named {
            Some(t)
        } else if void {
            Some(CType::Void)
        } else if float {
            Some(CType::Float(32))
        } else if double {
            Some(CType::Float(64))
        } else if bool_ {
            Some(CType::U8)
        } else if any_word {
            let width = if char_ {
                8
            } else if short {
                16
            } else if longs > 0 {
                64
            } else {
                32
            };
            Some(CType::word(width, !unsigned))
        } else {
            None
        };
        if sp.base.is_none() && (sp.is_static || sp.is_const || sp.is_typedef) {
            return Err(Diagnostic::error("syntax", start, "missing type specifier"));
        }
        Ok(sp)
    }

    fn struct_spec(&mut self, is_union: bool) -> PResult<CType> {
        let loc = self.loc();
        let name = if let Some(TokenKind::Ident(s)) = self.peek_kind(0) {
            let s = s.clone();
            self.pos += 1;
            Some(s)
        } else {
            None
        };
        let name = if self.eat_punct(Punct::LBrace) {
            let name = name.unwrap_or_else(|| {
                self.anon += 1;
                format!("__anon_{}", self.anon - 1)
            });
            let mut fields: Vec<(String, CType)> = Vec::new();
            while !self.eat_punct(Punct::RBrace) {
                let sp = self.specifiers()?;
                let base = sp.base.ok_or_else(|| self.unexpected("field type"))?;
                loop {
                    let d = self.declarator(false)?;
                    let fname = d.name.clone().ok_or_else(|| self.unexpected("field name"))?;
                    if fields.iter().any(|(n, _)| *n == fname) {
                        return Err(Diagnostic::error(
                            "duplicate-field",
                            d.name_loc,
                            format!("duplicate field `{fname}`"),
                        ));
                    }
                    fields.push((fname, d.apply(base.clone())));
                    if !self.eat_punct(Punct::Comma) {
                        break;
                    }
                }
                self.expect_punct(Punct::Semi)?;
            }
            if self.ast.struct_decl(&name).is_some() {
                return Err(Diagnostic::error("redefinition", loc, format!("redefinition of `{name}`")));
            }
            self.ast.items.push(Item::Struct(self.ast.structs.len()));
            self.ast.structs.push(StructDecl { name: name.clone(), fields, is_union, loc });
            name
        } else {
            name.ok_or_else(|| self.unexpected("structure name or body"))?
        };
        Ok(if is_union { CType::Union(name) } else { CType::Struct(name) })
    }

    /// Parses a (possibly abstract) declarator.
    fn declarator(&mut self, allow_abstract: bool) -> PResult<Declarator> {
        let mut ptrs = 0;
        while self.eat_punct(Punct::Star) {
            ptrs += 1;
            while self.eat_kw(Keyword::Const) || self.eat_kw(Keyword::Volatile) {}
        }
        let mut inner: Option<Declarator> = None;
        let mut name = None;
        let mut name_loc = self.loc();
        if self.is_punct(Punct::LParen) && (self.is_punct_at(1, Punct::Star) || self.is_punct_at(1, Punct::LParen)) {
            self.pos += 1;
            inner = Some(self.declarator(allow_abstract)?);
            self.expect_punct(Punct::RParen)?;
        } else if let Some(TokenKind::Ident(s)) = self.peek_kind(0) {
            name = Some(s.clone());
            name_loc = self.loc();
            self.pos += 1;
        } else if !allow_abstract {
            return Err(self.unexpected("declarator name"));
        }
        let mut suffixes = Vec::new();
        loop {
            if self.eat_punct(Punct::LBracket) {
                let loc = self.loc();
                let n = match self.peek_kind(0) {
                    Some(TokenKind::Int { value, .. }) => *value,
                    Some(TokenKind::Ident(s)) => {
                        match self.ast.global(s).and_then(|g| g.init.as_ref()).and_then(literal_value) {
                            Some(v) if self.ast.global(s).is_some_and(|g| g.is_const) => v,
                            _ => {
                                return Err(Diagnostic::error(
                                    "array-size",
                                    loc,
                                    "array size must be an integer constant",
                                ))
                            }
                        }
                    }
                    _ => return Err(self.unexpected("array size")),
                };
                self.pos += 1;
                self.expect_punct(Punct::RBracket)?;
                suffixes.push(Deriv::Array(n));
            } else if self.is_punct(Punct::LParen) {
                self.pos += 1;
                suffixes.push(Deriv::Func(self.params()?));
            } else {
                break;
            }
        }
        let mut derivs: Vec<Deriv> = (0..ptrs).map(|_| Deriv::Ptr).collect();
        derivs.extend(suffixes.into_iter().rev());
        if let Some(inner) = inner {
            name = inner.name;
            name_loc = inner.name_loc;
            derivs.extend(inner.derivs);
        }
        Ok(Declarator { name, name_loc, derivs })
    }

    /// Parameter list after the opening parenthesis.
    fn params(&mut self) -> PResult<Vec<Param>> {
        let mut out = Vec::new();
        if self.is_kw(Keyword::Void) && self.is_punct_at(1, Punct::RParen) {
            self.pos += 2;
            return Ok(out);
        }
        if self.eat_punct(Punct::RParen) {
            return Ok(out);
        }
        loop {
            if self.is_punct(Punct::Ellipsis) {
                return Err(Diagnostic::error("variadic", self.loc(), "variadic functions are not supported"));
            }
            let loc = self.loc();
            let sp = self.specifiers()?;
            let base = sp.base.ok_or_else(|| self.unexpected("parameter type"))?;
            let d = self.declarator(true)?;
            let mut ty = d.apply(base);
            // Array and function parameters decay to pointers.
            ty = match ty {
                CType::Array(t, _) => CType::Pointer(t),
                f @ CType::Function { .. } => CType::ptr(f),
                t => t,
            };
            out.push(Param { name: d.name.unwrap_or_default(), ty, loc });
            if self.eat_punct(Punct::RParen) {
                return Ok(out);
            }
            self.expect_punct(Punct::Comma)?;
        }
    }

    fn type_name(&mut self) -> PResult<CType> {
        let sp = self.specifiers()?;
        let base = sp.base.ok_or_else(|| self.unexpected("type name"))?;
        let d = self.declarator(true)?;
        if d.name.is_some() {
            return Err(Diagnostic::error("syntax", d.name_loc, "unexpected name in type"));
        }
        Ok(d.apply(base))
    }

    // ---------------------------------------------------------- top level

    fn unit(&mut self) -> PResult<()> {
        while !self.at_end() {
            if self.eat_punct(Punct::Semi) {
                continue;
            }
            self.external_decl()?;
        }
        Ok(())
    }

    fn external_decl(&mut self) -> PResult<()> {
        let start_loc = self.loc();
        let start_tok = self.tok_idx();
        let sp = self.specifiers()?;
        let base = sp.base.clone().ok_or_else(|| self.unexpected("declaration"))?;
        if self.eat_punct(Punct::Semi) {
            // Bare structure declaration.
            return Ok(());
        }
        loop {
            let d = self.declarator(false)?;
            let name = d.name.clone().unwrap();
            let ty = d.apply(base.clone());
            if sp.is_typedef {
                self.typedefs.insert(name, ty);
            } else if let CType::Function { result, .. } = &ty {
                let params = d.function_params().cloned().unwrap_or_default();
                let body = if self.is_punct(Punct::LBrace) {
                    self.pos += 1;
                    Some(self.block_items()?)
                } else {
                    None
                };
                let def = FunctionDef {
                    name: name.clone(),
                    params,
                    result: (**result).clone(),
                    body,
                    specs: Vec::new(),
                    dont_translate: false,
                    is_static: sp.is_static,
                    loc: start_loc,
                    tok: start_tok,
                };
                let is_def = def.body.is_some();
                if let Some(i) = self.ast.functions.iter().position(|f| f.name == name) {
                    let existing = &self.ast.functions[i];
                    if existing.body.is_some() && is_def {
                        return Err(Diagnostic::error(
                            "redefinition",
                            d.name_loc,
                            format!("function `{name}` defined twice"),
                        ));
                    }
                    if is_def {
                        self.ast.functions[i] = def;
                    }
                } else {
                    self.ast.items.push(Item::Function(self.ast.functions.len()));
                    self.ast.functions.push(def);
                }
                if is_def {
                    return Ok(());
                }
            } else {
                let init = if self.eat_punct(Punct::Assign) { Some(self.assign_expr()?) } else { None };
                if self.ast.global(&name).is_some() {
                    return Err(Diagnostic::error(
                        "redefinition",
                        d.name_loc,
                        format!("global `{name}` declared twice"),
                    ));
                }
                self.ast.items.push(Item::Global(self.ast.globals.len()));
                self.ast.globals.push(GlobalDecl {
                    name,
                    ty,
                    init,
                    is_const: sp.is_const,
                    is_static: sp.is_static,
                    loc: d.name_loc,
                });
            }
            if !self.eat_punct(Punct::Comma) {
                break;
            }
        }
        self.expect_punct(Punct::Semi)
    }

    // ---------------------------------------------------------- statements

    /// Statements up to and including the closing brace.
    fn block_items(&mut self) -> PResult<Vec<Stmt>> {
        let mut out = Vec::new();
        loop {
            if self.eat_punct(Punct::RBrace) {
                return Ok(out);
            }
            if self.at_end() {
                return Err(self.unexpected("`}`"));
            }
            if self.starts_type(0) {
                out.extend(self.local_decl()?);
            } else {
                out.push(self.stmt()?);
            }
        }
    }

    fn local_decl(&mut self) -> PResult<Vec<Stmt>> {
        let sp = self.specifiers()?;
        let base = sp.base.clone().ok_or_else(|| self.unexpected("declaration"))?;
        let mut out = Vec::new();
        if self.eat_punct(Punct::Semi) {
            return Ok(out);
        }
        loop {
            let d = self.declarator(false)?;
            let ty = d.apply(base.clone());
            let name = d.name.clone().unwrap();
            if sp.is_typedef {
                self.typedefs.insert(name, ty);
            } else {
                let init = if self.eat_punct(Punct::Assign) { Some(self.assign_expr()?) } else { None };
                out.push(Stmt::new(StmtKind::Decl(LocalDecl { name, ty, init }), d.name_loc));
            }
            if !self.eat_punct(Punct::Comma) {
                break;
            }
        }
        self.expect_punct(Punct::Semi)?;
        Ok(out)
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let loc = self.loc();
        let tok = self.tok_idx();
        if self.eat_punct(Punct::Semi) {
            return Ok(Stmt::new(StmtKind::Empty, loc));
        }
        if self.eat_punct(Punct::LBrace) {
            return Ok(Stmt::new(StmtKind::Block(self.block_items()?), loc));
        }
        if let Some(TokenKind::Ident(name)) = self.peek_kind(0) {
            if self.is_punct_at(1, Punct::Colon) {
                let name = name.clone();
                self.pos += 2;
                let s = self.stmt()?;
                return Ok(Stmt::new(StmtKind::Label(name, Box::new(s)), loc));
            }
        }
        let kw = match self.peek_kind(0) {
            Some(TokenKind::Keyword(k)) => Some(*k),
            _ => None,
        };
        let kind = match kw {
            Some(Keyword::If) => {
                self.pos += 1;
                self.expect_punct(Punct::LParen)?;
                let c = self.expr()?;
                self.expect_punct(Punct::RParen)?;
                let then = self.stmt()?;
                let els = if self.eat_kw(Keyword::Else) { Some(Box::new(self.stmt()?)) } else { None };
                StmtKind::If(c, Box::new(then), els)
            }
            Some(Keyword::While) => {
                self.pos += 1;
                self.expect_punct(Punct::LParen)?;
                let cond = self.expr()?;
                self.expect_punct(Punct::RParen)?;
                let body = self.stmt()?;
                StmtKind::While { cond, body: Box::new(body), spec: None, tok }
            }
            Some(Keyword::Do) => {
                self.pos += 1;
                let body = self.stmt()?;
                if !self.eat_kw(Keyword::While) {
                    return Err(self.unexpected("`while`"));
                }
                self.expect_punct(Punct::LParen)?;
                let cond = self.expr()?;
                self.expect_punct(Punct::RParen)?;
                self.expect_punct(Punct::Semi)?;
                StmtKind::DoWhile { body: Box::new(body), cond, spec: None, tok }
            }
            Some(Keyword::For) => {
                self.pos += 1;
                self.expect_punct(Punct::LParen)?;
                let init = if self.eat_punct(Punct::Semi) {
                    None
                } else if self.starts_type(0) {
                    let iloc = self.loc();
                    let mut ds = self.local_decl()?;
                    if ds.len() != 1 {
                        return Err(Diagnostic::error(
                            "syntax",
                            iloc,
                            "for-loop initializer must declare exactly one variable",
                        ));
                    }
                    Some(Box::new(ds.remove(0)))
                } else {
                    let iloc = self.loc();
                    let e = self.expr()?;
                    self.expect_punct(Punct::Semi)?;
                    Some(Box::new(Stmt::new(StmtKind::Expr(e), iloc)))
                };
                let cond = if self.is_punct(Punct::Semi) { None } else { Some(self.expr()?) };
                self.expect_punct(Punct::Semi)?;
                let step = if self.is_punct(Punct::RParen) { None } else { Some(self.expr()?) };
                self.expect_punct(Punct::RParen)?;
                let body = self.stmt()?;
                StmtKind::For { init, cond, step, body: Box::new(body), spec: None, tok }
            }
            Some(Keyword::Return) => {
                self.pos += 1;
                let e = if self.is_punct(Punct::Semi) { None } else { Some(self.expr()?) };
                self.expect_punct(Punct::Semi)?;
                StmtKind::Return(e)
            }
            Some(Keyword::Break) => {
                self.pos += 1;
                self.expect_punct(Punct::Semi)?;
                StmtKind::Break
            }
            Some(Keyword::Continue) => {
                self.pos += 1;
                self.expect_punct(Punct::Semi)?;
                StmtKind::Continue
            }
            Some(Keyword::Goto) => {
                self.pos += 1;
                let (l, _) = self.ident()?;
                self.expect_punct(Punct::Semi)?;
                StmtKind::Goto(l)
            }
            Some(Keyword::Switch) => {
                self.pos += 1;
                self.expect_punct(Punct::LParen)?;
                let e = self.expr()?;
                self.expect_punct(Punct::RParen)?;
                let body = self.stmt()?;
                StmtKind::Switch(e, Box::new(body))
            }
            Some(Keyword::Case) => {
                self.pos += 1;
                let e = self.cond_expr()?;
                self.expect_punct(Punct::Colon)?;
                let s = self.stmt()?;
                StmtKind::Case(Some(e), Box::new(s))
            }
            Some(Keyword::Default) => {
                self.pos += 1;
                self.expect_punct(Punct::Colon)?;
                let s = self.stmt()?;
                StmtKind::Case(None, Box::new(s))
            }
            _ => {
                let e = self.expr()?;
                self.expect_punct(Punct::Semi)?;
                StmtKind::Expr(e)
            }
        };
        Ok(Stmt::new(kind, loc))
    }

    // --------------------------------------------------------- expressions

    pub(crate) fn expr(&mut self) -> PResult<Expr> {
        let e = self.assign_expr()?;
        if self.is_punct(Punct::Comma) && !self.annotation {
            return Err(Diagnostic::error("comma-operator", self.loc(), "the comma operator is not supported"));
        }
        Ok(e)
    }

    fn assign_expr(&mut self) -> PResult<Expr> {
        let loc = self.loc();
        let lhs = if self.annotation { self.implies_expr()? } else { self.cond_expr()? };
        let op = match self.peek_kind(0) {
            Some(TokenKind::Punct(p)) => match p {
                Punct::Assign => Some(None),
                Punct::PlusAssign => Some(Some(BinaryOp::Add)),
                Punct::MinusAssign => Some(Some(BinaryOp::Sub)),
                Punct::StarAssign => Some(Some(BinaryOp::Mul)),
                Punct::SlashAssign => Some(Some(BinaryOp::Div)),
                Punct::PercentAssign => Some(Some(BinaryOp::Rem)),
                Punct::ShlAssign => Some(Some(BinaryOp::Shl)),
                Punct::ShrAssign => Some(Some(BinaryOp::Shr)),
                Punct::AmpAssign => Some(Some(BinaryOp::BitAnd)),
                Punct::PipeAssign => Some(Some(BinaryOp::BitOr)),
                Punct::CaretAssign => Some(Some(BinaryOp::BitXor)),
                _ => None,
            },
            _ => None,
        };
        match op {
            Some(op) if !self.annotation => {
                self.pos += 1;
                let rhs = self.assign_expr()?;
                Ok(Expr::new(ExprKind::Assign(op, Box::new(lhs), Box::new(rhs)), loc))
            }
            Some(_) => Err(Diagnostic::error("annotation", self.loc(), "assignments are not allowed in annotations")),
            None => Ok(lhs),
        }
    }

    fn implies_expr(&mut self) -> PResult<Expr> {
        let loc = self.loc();
        let lhs = self.cond_expr()?;
        if self.eat_punct(Punct::Implies) {
            let rhs = self.implies_expr()?;
            return Ok(Expr::new(ExprKind::Binary(BinaryOp::Implies, Box::new(lhs), Box::new(rhs)), loc));
        }
        Ok(lhs)
    }

    fn cond_expr(&mut self) -> PResult<Expr> {
        let loc = self.loc();
        let c = self.binary(0)?;
        if self.eat_punct(Punct::Question) {
            let a = self.expr()?;
            self.expect_punct(Punct::Colon)?;
            let b = self.cond_expr()?;
            return Ok(Expr::new(ExprKind::Cond(Box::new(c), Box::new(a), Box::new(b)), loc));
        }
        Ok(c)
    }

    fn binop_at(&self) -> Option<(BinaryOp, u8)> {
        let p = match self.peek_kind(0) {
            Some(TokenKind::Punct(p)) => *p,
            _ => return None,
        };
        Some(match p {
            Punct::OrOr => (BinaryOp::LogOr, 1),
            Punct::AndAnd => (BinaryOp::LogAnd, 2),
            Punct::Pipe => (BinaryOp::BitOr, 3),
            Punct::Caret => (BinaryOp::BitXor, 4),
            Punct::Amp => (BinaryOp::BitAnd, 5),
            Punct::EqEq => (BinaryOp::Eq, 6),
            Punct::Ne => (BinaryOp::Ne, 6),
            Punct::Lt => (BinaryOp::Lt, 7),
            Punct::Gt => (BinaryOp::Gt, 7),
            Punct::Le => (BinaryOp::Le, 7),
            Punct::Ge => (BinaryOp::Ge, 7),
            Punct::Shl => (BinaryOp::Shl, 8),
            Punct::Shr => (BinaryOp::Shr, 8),
            Punct::Plus => (BinaryOp::Add, 9),
            Punct::Minus => (BinaryOp::Sub, 9),
            Punct::Star => (BinaryOp::Mul, 10),
            Punct::Slash => (BinaryOp::Div, 10),
            Punct::Percent => (BinaryOp::Rem, 10),
            _ => return None,
        })
    }

    /// Precedence climbing over left-associative binary operators.
    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some((op, prec)) = self.binop_at() {
            if prec <= min_prec {
                break;
            }
            let loc = lhs.loc;
            self.pos += 1;
            let rhs = self.binary(prec)?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), loc);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let loc = self.loc();
        let op = match self.peek_kind(0) {
            Some(TokenKind::Punct(Punct::Minus)) => Some(UnaryOp::Neg),
            Some(TokenKind::Punct(Punct::Plus)) => Some(UnaryOp::Plus),
            Some(TokenKind::Punct(Punct::Bang)) => Some(UnaryOp::Not),
            Some(TokenKind::Punct(Punct::Tilde)) => Some(UnaryOp::BitNot),
            Some(TokenKind::Punct(Punct::Star)) => Some(UnaryOp::Deref),
            Some(TokenKind::Punct(Punct::Amp)) => Some(UnaryOp::AddrOf),
            _ => None,
        };
        if let Some(op) = op {
            self.pos += 1;
            let e = self.unary()?;
            return Ok(Expr::new(ExprKind::Unary(op, Box::new(e)), loc));
        }
        if self.is_punct(Punct::PlusPlus) || self.is_punct(Punct::MinusMinus) {
            let inc = self.is_punct(Punct::PlusPlus);
            self.pos += 1;
            let e = self.unary()?;
            return Ok(Expr::new(ExprKind::IncDec { inc, prefix: true, target: Box::new(e) }, loc));
        }
        if self.eat_kw(Keyword::Sizeof) {
            if self.is_punct(Punct::LParen) && self.starts_type(1) {
                self.pos += 1;
                let t = self.type_name()?;
                self.expect_punct(Punct::RParen)?;
                return Ok(Expr::new(ExprKind::SizeofType(t), loc));
            }
            let e = self.unary()?;
            return Ok(Expr::new(ExprKind::SizeofExpr(Box::new(e)), loc));
        }
        if self.is_punct(Punct::LParen) && self.starts_type(1) {
            self.pos += 1;
            let t = self.type_name()?;
            self.expect_punct(Punct::RParen)?;
            let e = self.unary()?;
            return Ok(Expr::new(ExprKind::Cast(t, Box::new(e)), loc));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        loop {
            let loc = e.loc;
            if self.eat_punct(Punct::LParen) {
                let mut args = Vec::new();
                if !self.eat_punct(Punct::RParen) {
                    loop {
                        args.push(self.assign_expr()?);
                        if self.eat_punct(Punct::RParen) {
                            break;
                        }
                        self.expect_punct(Punct::Comma)?;
                    }
                }
                e = Expr::new(ExprKind::Call(Box::new(e), args), loc);
            } else if self.eat_punct(Punct::LBracket) {
                let i = self.expr()?;
                self.expect_punct(Punct::RBracket)?;
                e = Expr::new(ExprKind::Index(Box::new(e), Box::new(i)), loc);
            } else if self.eat_punct(Punct::Dot) {
                let (f, _) = self.ident()?;
                e = Expr::new(ExprKind::Member(Box::new(e), f), loc);
            } else if self.eat_punct(Punct::Arrow) {
                let (f, _) = self.ident()?;
                e = Expr::new(ExprKind::Arrow(Box::new(e), f), loc);
            } else if self.is_punct(Punct::PlusPlus) || self.is_punct(Punct::MinusMinus) {
                let inc = self.is_punct(Punct::PlusPlus);
                self.pos += 1;
                e = Expr::new(ExprKind::IncDec { inc, prefix: false, target: Box::new(e) }, loc);
            } else {
                return Ok(e);
            }
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        let loc = self.loc();
        let kind = match self.peek_kind(0) {
            Some(TokenKind::Int { value, suffix, radix }) => {
                ExprKind::IntLit { value: *value, suffix: *suffix, radix: *radix }
            }
            Some(TokenKind::Char(c)) => ExprKind::IntLit { value: *c, suffix: IntSuffix::default(), radix: 10 },
            Some(TokenKind::Float(s)) => ExprKind::FloatLit(s.clone()),
            Some(TokenKind::Str(s)) => ExprKind::StrLit(s.clone()),
            Some(TokenKind::Ident(s)) => {
                let s = s.clone();
                if self.annotation {
                    match s.as_str() {
                        "true" | "false" => {
                            self.pos += 1;
                            return Ok(Expr::new(ExprKind::BoolLit(s == "true"), loc));
                        }
                        "\\result" => {
                            self.pos += 1;
                            return Ok(Expr::new(ExprKind::Result, loc));
                        }
                        "\\old" => {
                            self.pos += 1;
                            self.expect_punct(Punct::LParen)?;
                            let e = self.expr()?;
                            self.expect_punct(Punct::RParen)?;
                            return Ok(Expr::new(ExprKind::Old(Box::new(e)), loc));
                        }
                        _ => {}
                    }
                }
                if s.starts_with('\\') {
                    return Err(Diagnostic::error(
                        "syntax",
                        loc,
                        format!("`{s}` is only meaningful inside annotations"),
                    ));
                }
                ExprKind::Ident(s)
            }
            Some(TokenKind::Punct(Punct::LParen)) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_punct(Punct::RParen)?;
                return Ok(e);
            }
            _ => return Err(self.unexpected("expression")),
        };
        self.pos += 1;
        Ok(Expr::new(kind, loc))
    }
}

fn literal_value(e: &Expr) -> Option<u64> {
    match &e.kind {
        ExprKind::IntLit { value, .. } => Some(*value),
        _ => None,
    }
}

fn describe(k: &TokenKind) -> String {
    match k {
        TokenKind::Ident(s) => s.clone(),
        TokenKind::Keyword(k) => k.as_str().to_string(),
        TokenKind::Int { value, .. } => value.to_string(),
        TokenKind::Float(s) => s.clone(),
        TokenKind::Char(c) => format!("'{}'", char::from_u32(*c as u32).unwrap_or('?')),
        TokenKind::Str(s) => format!("\"{s}\""),
        TokenKind::Punct(p) => p.as_str().to_string(),
        TokenKind::Comment { .. } => "comment".to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::token::tokenize;

    fn parse(src: &str) -> Ast {
        parse_unit(&tokenize(src).unwrap()).unwrap_or_else(|d| panic!("{d:?}"))
    }

    #[test]
    fn empty_function() {
        let ast = parse("void f(void){}");
        assert_eq!(ast.functions.len(), 1);
        assert_eq!(ast.functions[0].body.as_deref(), Some(&[][..]));
    }

    #[test]
    fn function_pointer_program() {
        let ast = parse(crate::corpus::PFUN_C);
        assert_eq!(ast.definitions().count(), 3);
        assert_eq!(ast.globals.len(), 2);
        let p = ast.global("p_fun").unwrap();
        assert!(p.ty.is_function_pointer());
    }

    #[test]
    fn precedence() {
        let ast = parse("int f(int a, int b) { return a + b * 2 << 1 == 3 && b | 1; }");
        let body = ast.functions[0].body.as_ref().unwrap();
        let StmtKind::Return(Some(e)) = &body[0].kind else { panic!() };
        let ExprKind::Binary(BinaryOp::LogAnd, l, r) = &e.kind else { panic!("{e:?}") };
        assert!(matches!(l.kind, ExprKind::Binary(BinaryOp::Eq, ..)));
        assert!(matches!(r.kind, ExprKind::Binary(BinaryOp::BitOr, ..)));
        let ExprKind::Binary(BinaryOp::Eq, shl, _) = &l.kind else { panic!() };
        let ExprKind::Binary(BinaryOp::Shl, add, _) = &shl.kind else { panic!() };
        let ExprKind::Binary(BinaryOp::Add, _, mul) = &add.kind else { panic!() };
        assert!(matches!(mul.kind, ExprKind::Binary(BinaryOp::Mul, ..)));
    }

    #[test]
    fn left_associative_subtraction() {
        let ast = parse("int f(int a) { return a - 1 - 2; }");
        let StmtKind::Return(Some(e)) = &ast.functions[0].body.as_ref().unwrap()[0].kind else { panic!() };
        let ExprKind::Binary(BinaryOp::Sub, l, r) = &e.kind else { panic!() };
        assert!(matches!(l.kind, ExprKind::Binary(BinaryOp::Sub, ..)));
        assert!(matches!(r.kind, ExprKind::IntLit { value: 2, .. }));
    }

    #[test]
    fn struct_array_and_typedef() {
        let ast = parse(
            "typedef unsigned int u32; struct task { u32 timeout; void (*fun)(void); };
             struct task tasks[8]; static struct { unsigned long control_addr; } rng_regs;",
        );
        assert_eq!(ast.structs.len(), 2);
        assert_eq!(ast.global("tasks").unwrap().ty, CType::Array(Box::new(CType::Struct("task".into())), 8));
        assert_eq!(ast.structs[0].fields[0].1, CType::U32);
        assert!(ast.global("rng_regs").unwrap().is_static);
    }

    #[test]
    fn syntax_error_has_location() {
        let err = parse_unit(&tokenize("void f(void) {\n  x = ;\n}").unwrap()).unwrap_err();
        assert_eq!(err[0].code, "syntax");
        assert!(err[0].loc.same_position(&Loc::new(2, 7)));
    }

    #[test]
    fn rejects_variadic() {
        let err = parse_unit(&tokenize("int printf(char *fmt, ...);").unwrap()).unwrap_err();
        assert_eq!(err[0].code, "variadic");
    }

    #[test]
    fn parses_unsupported_constructs_for_later_rejection() {
        let ast =
            parse("union u { int a; float b; }; void f(int x) { switch (x) { case 1: break; default: ; } l: goto l; }");
        assert!(ast.structs[0].is_union);
        assert_eq!(ast.functions.len(), 1);
    }
}
