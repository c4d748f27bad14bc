//! Syntax tree of the accepted C subset.

use std::collections::BTreeMap;
use std::fmt;

use super::diag::Loc;
use super::token::IntSuffix;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CType {
    Void,
    Word {
        width: u32,
        signed: bool,
    },
    Pointer(Box<CType>),
    Array(Box<CType>, u64),
    /// Reference to a structure declared in [`Ast::structs`].
    Struct(String),
    Union(String),
    Function {
        params: Vec<CType>,
        result: Box<CType>,
    },
    Float(u32),
}

impl CType {
    pub const U8: CType = CType::Word { width: 8, signed: false };
    pub const S8: CType = CType::Word { width: 8, signed: true };
    pub const U32: CType = CType::Word { width: 32, signed: false };
    pub const S32: CType = CType::Word { width: 32, signed: true };
    pub const U64: CType = CType::Word { width: 64, signed: false };
    pub const S64: CType = CType::Word { width: 64, signed: true };

    pub fn word(width: u32, signed: bool) -> CType {
        CType::Word { width, signed }
    }

    pub fn ptr(to: CType) -> CType {
        CType::Pointer(Box::new(to))
    }

    pub fn is_word(&self) -> bool {
        matches!(self, CType::Word { .. })
    }

    pub fn is_pointer(&self) -> bool {
        matches!(self, CType::Pointer(_))
    }

    pub fn is_function_pointer(&self) -> bool {
        matches!(self, CType::Pointer(t) if matches!(**t, CType::Function { .. }))
    }

    /// Words and pointers: the types that fit in a single state cell.
    pub fn is_scalar(&self) -> bool {
        self.is_word() || self.is_pointer()
    }

    pub fn is_signed(&self) -> bool {
        matches!(self, CType::Word { signed: true, .. })
    }

    /// Bit width of the value representation (pointers are 64-bit).
    pub fn bit_width(&self) -> Option<u32> {
        match self {
            CType::Word { width, .. } => Some(*width),
            CType::Pointer(_) => Some(64),
            _ => None,
        }
    }

    pub fn pointee(&self) -> Option<&CType> {
        match self {
            CType::Pointer(t) => Some(t),
            _ => None,
        }
    }

    pub fn contains_float(&self) -> bool {
        match self {
            CType::Float(_) => true,
            CType::Pointer(t) | CType::Array(t, _) => t.contains_float(),
            CType::Function { params, result } => result.contains_float() || params.iter().any(CType::contains_float),
            _ => false,
        }
    }

    pub fn contains_union(&self) -> bool {
        match self {
            CType::Union(_) => true,
            CType::Pointer(t) | CType::Array(t, _) => t.contains_union(),
            CType::Function { params, result } => result.contains_union() || params.iter().any(CType::contains_union),
            _ => false,
        }
    }

    fn base_name(&self) -> String {
        match self {
            CType::Void => "void".into(),
            CType::Word { width, signed } => {
                let base = match width {
                    8 => "char",
                    16 => "short",
                    32 => "int",
                    _ => "long",
                };
                match (width, signed) {
                    (8, true) => "signed char".into(),
                    (_, true) => base.into(),
                    (_, false) => format!("unsigned {base}"),
                }
            }
            CType::Struct(n) => format!("struct {n}"),
            CType::Union(n) => format!("union {n}"),
            CType::Float(32) => "float".into(),
            CType::Float(_) => "double".into(),
            _ => unreachable!("derived type has no base name"),
        }
    }

    /// C declaration syntax for a declarator named `name` of this type.
    pub fn declare(&self, name: &str) -> String {
        self.declare_inner(name.to_string())
    }

    fn declare_inner(&self, inner: String) -> String {
        match self {
            CType::Pointer(t) => match **t {
                CType::Function { .. } | CType::Array(..) => t.declare_inner(format!("(*{inner})")),
                _ => t.declare_inner(format!("*{inner}")),
            },
            CType::Array(t, n) => t.declare_inner(format!("{inner}[{n}]")),
            CType::Function { params, result } => {
                let ps = if params.is_empty() {
                    "void".to_string()
                } else {
                    params.iter().map(|p| p.declare("")).collect::<Vec<_>>().join(", ")
                };
                result.declare_inner(format!("{inner}({ps})"))
            }
            _ => {
                if inner.is_empty() {
                    self.base_name()
                } else {
                    format!("{} {inner}", self.base_name())
                }
            }
        }
    }
}

impl fmt::Display for CType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.declare(""))
    }
}

/// Token index used to attach annotations; excluded from equality like [`Loc`].
#[derive(Clone, Copy, Debug, Default, Eq)]
pub struct TokIdx(pub usize);

impl PartialEq for TokIdx {
    fn eq(&self, _other: &Self) -> bool {
        true
    }
}

impl std::hash::Hash for TokIdx {
    fn hash<H: std::hash::Hasher>(&self, _state: &mut H) {}
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Plus,
    Not,
    BitNot,
    Deref,
    AddrOf,
}

impl UnaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Plus => "+",
            UnaryOp::Not => "!",
            UnaryOp::BitNot => "~",
            UnaryOp::Deref => "*",
            UnaryOp::AddrOf => "&",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Shl,
    Shr,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
    BitAnd,
    BitOr,
    BitXor,
    LogAnd,
    LogOr,
    /// Annotation-only implication.
    Implies,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Rem => "%",
            BinaryOp::Shl => "<<",
            BinaryOp::Shr => ">>",
            BinaryOp::Lt => "<",
            BinaryOp::Gt => ">",
            BinaryOp::Le => "<=",
            BinaryOp::Ge => ">=",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::BitAnd => "&",
            BinaryOp::BitOr => "|",
            BinaryOp::BitXor => "^",
            BinaryOp::LogAnd => "&&",
            BinaryOp::LogOr => "||",
            BinaryOp::Implies => "==>",
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(self, BinaryOp::Lt | BinaryOp::Gt | BinaryOp::Le | BinaryOp::Ge | BinaryOp::Eq | BinaryOp::Ne)
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinaryOp::LogAnd | BinaryOp::LogOr | BinaryOp::Implies)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    IntLit {
        value: u64,
        suffix: IntSuffix,
        radix: u32,
    },
    FloatLit(String),
    StrLit(String),
    /// `true` / `false` in annotations.
    BoolLit(bool),
    Ident(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    /// `lhs = rhs` or compound `lhs op= rhs`.
    Assign(Option<BinaryOp>, Box<Expr>, Box<Expr>),
    IncDec {
        inc: bool,
        prefix: bool,
        target: Box<Expr>,
    },
    Cond(Box<Expr>, Box<Expr>, Box<Expr>),
    Call(Box<Expr>, Vec<Expr>),
    Index(Box<Expr>, Box<Expr>),
    Member(Box<Expr>, String),
    Arrow(Box<Expr>, String),
    Cast(CType, Box<Expr>),
    /// Conversion inserted by the type checker.
    ImplicitCast(CType, Box<Expr>),
    SizeofType(CType),
    SizeofExpr(Box<Expr>),
    /// `\old(e)` in postconditions.
    Old(Box<Expr>),
    /// `\result` in postconditions.
    Result,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    /// Filled in by the type checker.
    pub ty: Option<CType>,
    pub loc: Loc,
}

impl Expr {
    pub fn new(kind: ExprKind, loc: Loc) -> Self {
        Expr { kind, ty: None, loc }
    }

    pub fn ty(&self) -> &CType {
        self.ty.as_ref().expect("expression not type-checked")
    }

    /// Strip implicit conversions.
    pub fn peel(&self) -> &Expr {
        match &self.kind {
            ExprKind::ImplicitCast(_, e) => e.peel(),
            _ => self,
        }
    }

    /// Pre-order visit of this expression and all subexpressions.
    pub fn walk(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Unary(_, a)
            | ExprKind::Cast(_, a)
            | ExprKind::ImplicitCast(_, a)
            | ExprKind::SizeofExpr(a)
            | ExprKind::Old(a)
            | ExprKind::Member(a, _)
            | ExprKind::Arrow(a, _) => a.walk(f),
            ExprKind::IncDec { target, .. } => target.walk(f),
            ExprKind::Binary(_, a, b) | ExprKind::Assign(_, a, b) | ExprKind::Index(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            ExprKind::Cond(c, a, b) => {
                c.walk(f);
                a.walk(f);
                b.walk(f);
            }
            ExprKind::Call(callee, args) => {
                callee.walk(f);
                for a in args {
                    a.walk(f);
                }
            }
            _ => {}
        }
    }
}

/// One clause of an annotation: its source text and parsed expression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub text: String,
    pub expr: Expr,
}

/// Function contract parsed from a `/*@ ... @*/` block.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SpecBlock {
    /// Name given by a `spec NAME;` clause; unnamed blocks take the
    /// function's name.
    pub name: Option<String>,
    /// Target function for blocks read from side spec files (`for NAME;`).
    pub target: Option<String>,
    pub requires: Vec<Clause>,
    pub ensures: Vec<Clause>,
    pub total: bool,
    /// Logical labels bound by `requires`, with their inferred types.
    pub labels: BTreeMap<String, CType>,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LoopSpec {
    pub invariant: Vec<Clause>,
    pub measure: Option<Clause>,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalDecl {
    pub name: String,
    pub ty: CType,
    pub init: Option<Expr>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StmtKind {
    Empty,
    Expr(Expr),
    Decl(LocalDecl),
    Block(Vec<Stmt>),
    If(Expr, Box<Stmt>, Option<Box<Stmt>>),
    While {
        cond: Expr,
        body: Box<Stmt>,
        spec: Option<LoopSpec>,
        tok: TokIdx,
    },
    DoWhile {
        body: Box<Stmt>,
        cond: Expr,
        spec: Option<LoopSpec>,
        tok: TokIdx,
    },
    For {
        init: Option<Box<Stmt>>,
        cond: Option<Expr>,
        step: Option<Expr>,
        body: Box<Stmt>,
        spec: Option<LoopSpec>,
        tok: TokIdx,
    },
    Return(Option<Expr>),
    Break,
    Continue,
    Goto(String),
    Label(String, Box<Stmt>),
    Switch(Expr, Box<Stmt>),
    /// `case e:` (or `default:` when `None`) inside a switch body.
    Case(Option<Expr>, Box<Stmt>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub loc: Loc,
}

impl Stmt {
    pub fn new(kind: StmtKind, loc: Loc) -> Self {
        Stmt { kind, loc }
    }

    /// Pre-order visit of this statement and nested statements.
    pub fn walk(&self, f: &mut impl FnMut(&Stmt)) {
        f(self);
        match &self.kind {
            StmtKind::Block(ss) => ss.iter().for_each(|s| s.walk(f)),
            StmtKind::If(_, a, b) => {
                a.walk(f);
                if let Some(b) = b {
                    b.walk(f);
                }
            }
            StmtKind::While { body, .. } | StmtKind::DoWhile { body, .. } => body.walk(f),
            StmtKind::For { init, body, .. } => {
                if let Some(i) = init {
                    i.walk(f);
                }
                body.walk(f);
            }
            StmtKind::Label(_, s) | StmtKind::Switch(_, s) | StmtKind::Case(_, s) => s.walk(f),
            _ => {}
        }
    }

    /// Visit every expression directly owned by this statement tree.
    pub fn walk_exprs(&self, f: &mut impl FnMut(&Expr)) {
        self.walk(&mut |s| match &s.kind {
            StmtKind::Expr(e) | StmtKind::Switch(e, _) => f(e),
            StmtKind::Return(Some(e)) | StmtKind::Case(Some(e), _) => f(e),
            StmtKind::Decl(d) => {
                if let Some(e) = &d.init {
                    f(e)
                }
            }
            StmtKind::If(c, ..) | StmtKind::While { cond: c, .. } | StmtKind::DoWhile { cond: c, .. } => f(c),
            StmtKind::For { cond, step, .. } => {
                if let Some(c) = cond {
                    f(c)
                }
                if let Some(s) = step {
                    f(s)
                }
            }
            _ => {}
        });
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: CType,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionDef {
    pub name: String,
    pub params: Vec<Param>,
    pub result: CType,
    /// `None` for a prototype.
    pub body: Option<Vec<Stmt>>,
    pub specs: Vec<SpecBlock>,
    pub dont_translate: bool,
    pub is_static: bool,
    pub loc: Loc,
    pub tok: TokIdx,
}

impl FunctionDef {
    pub fn ctype(&self) -> CType {
        CType::Function {
            params: self.params.iter().map(|p| p.ty.clone()).collect(),
            result: Box::new(self.result.clone()),
        }
    }

    /// Locals declared anywhere in the body, in declaration order.
    pub fn locals(&self) -> Vec<(String, CType)> {
        let mut out = Vec::new();
        for s in self.body.iter().flatten() {
            s.walk(&mut |s| {
                if let StmtKind::Decl(d) = &s.kind {
                    out.push((d.name.clone(), d.ty.clone()));
                }
            });
        }
        out
    }

    pub fn has_loop(&self) -> bool {
        let mut found = false;
        for s in self.body.iter().flatten() {
            s.walk(&mut |s| {
                if matches!(s.kind, StmtKind::While { .. } | StmtKind::DoWhile { .. } | StmtKind::For { .. }) {
                    found = true;
                }
            });
        }
        found
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlobalDecl {
    pub name: String,
    pub ty: CType,
    pub init: Option<Expr>,
    pub is_const: bool,
    pub is_static: bool,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructDecl {
    pub name: String,
    pub fields: Vec<(String, CType)>,
    pub is_union: bool,
    pub loc: Loc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Item {
    Struct(usize),
    Global(usize),
    Function(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Ast {
    pub structs: Vec<StructDecl>,
    pub globals: Vec<GlobalDecl>,
    pub functions: Vec<FunctionDef>,
    /// Declaration order across the three lists.
    pub items: Vec<Item>,
}

impl Ast {
    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn function_mut(&mut self, name: &str) -> Option<&mut FunctionDef> {
        self.functions.iter_mut().find(|f| f.name == name)
    }

    pub fn global(&self, name: &str) -> Option<&GlobalDecl> {
        self.globals.iter().find(|g| g.name == name)
    }

    pub fn struct_decl(&self, name: &str) -> Option<&StructDecl> {
        self.structs.iter().find(|s| s.name == name)
    }

    /// Functions with a body (prototypes excluded).
    pub fn definitions(&self) -> impl Iterator<Item = &FunctionDef> {
        self.functions.iter().filter(|f| f.body.is_some())
    }

    /// Size in bytes under natural alignment (LP64).
    pub fn size_of(&self, ty: &CType) -> u64 {
        match ty {
            CType::Word { width, .. } => (*width / 8) as u64,
            CType::Pointer(_) => 8,
            CType::Array(t, n) => self.size_of(t) * n,
            CType::Struct(n) | CType::Union(n) => match self.struct_decl(n) {
                Some(s) => {
                    let mut off: u64 = 0;
                    let mut size = 0;
                    for (_, ft) in &s.fields {
                        let a = self.align_of(ft);
                        if s.is_union {
                            size = size.max(self.size_of(ft));
                        } else {
                            off = off.div_ceil(a) * a + self.size_of(ft);
                            size = off;
                        }
                    }
                    let a = self.align_of(ty);
                    size.div_ceil(a) * a
                }
                None => 0,
            },
            CType::Float(w) => (*w / 8) as u64,
            CType::Void | CType::Function { .. } => 1,
        }
    }

    pub fn align_of(&self, ty: &CType) -> u64 {
        match ty {
            CType::Array(t, _) => self.align_of(t),
            CType::Struct(n) | CType::Union(n) => self
                .struct_decl(n)
                .map(|s| s.fields.iter().map(|(_, t)| self.align_of(t)).max().unwrap_or(1))
                .unwrap_or(1),
            t => self.size_of(t).max(1),
        }
    }

    /// Byte offset and type of `field` within structure `sname`.
    pub fn field_offset(&self, sname: &str, field: &str) -> Option<(u64, CType)> {
        let s = self.struct_decl(sname)?;
        let mut off: u64 = 0;
        for (fname, ft) in &s.fields {
            let a = self.align_of(ft);
            if !s.is_union {
                off = off.div_ceil(a) * a;
            }
            if fname == field {
                return Some((if s.is_union { 0 } else { off }, ft.clone()));
            }
            if !s.is_union {
                off += self.size_of(ft);
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn declarator_syntax() {
        let fp = CType::ptr(CType::Function { params: vec![], result: Box::new(CType::Void) });
        assert_eq!(fp.declare("p_fun"), "void (*p_fun)(void)");
        let arr = CType::Array(Box::new(CType::Struct("task".into())), 8);
        assert_eq!(arr.declare("tasks"), "struct task tasks[8]");
        assert_eq!(CType::ptr(CType::U32).declare("p"), "unsigned int *p");
        assert_eq!(CType::S32.to_string(), "int");
    }

    #[test]
    fn struct_layout() {
        let mut ast = Ast::default();
        ast.structs.push(StructDecl {
            name: "task".into(),
            fields: vec![
                ("timeout".into(), CType::U32),
                ("start".into(), CType::U32),
                ("timeout_fun".into(), CType::ptr(CType::Void)),
            ],
            is_union: false,
            loc: Loc::default(),
        });
        assert_eq!(ast.size_of(&CType::Struct("task".into())), 16);
        assert_eq!(ast.field_offset("task", "timeout_fun").unwrap().0, 8);
        assert_eq!(ast.field_offset("task", "start").unwrap().0, 4);
    }
}
