//! Abstract syntax shared by original, annotated and inverted programs.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Which construct a [`ConstructId`] names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ConstructKind {
    If,
    While,
    Block,
    Proc,
    Call,
}

impl ConstructKind {
    /// Letter used when identifiers are generated automatically.
    pub fn letter(self) -> char {
        match self {
            ConstructKind::If => 'i',
            ConstructKind::While => 'w',
            ConstructKind::Block => 'b',
            ConstructKind::Proc => 'p',
            ConstructKind::Call => 'c',
        }
    }
}

/// Unique name of a conditional, loop, block, procedure or call.
///
/// `prefix` holds the call tokens prepended by procedure-body renaming and
/// `version` is bumped by loop-body versioning. Rendered as
/// `prefix:...:base.version`; the version suffix is always shown for loops
/// and otherwise only when non-zero.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConstructId {
    pub kind: ConstructKind,
    pub prefix: Vec<String>,
    pub base: String,
    pub version: u32,
}

impl ConstructId {
    pub fn new(kind: ConstructKind, base: impl Into<String>) -> Self {
        ConstructId {
            kind,
            prefix: Vec::new(),
            base: base.into(),
            version: 0,
        }
    }

    pub fn with_version(mut self, version: u32) -> Self {
        self.version = version;
        self
    }

    pub fn with_prefix(mut self, prefix: Vec<String>) -> Self {
        self.prefix = prefix;
        self
    }

    /// Placeholder used by the parser before identifiers are generated.
    pub(crate) fn is_auto(&self) -> bool {
        self.base.is_empty()
    }

    /// Base token with its version suffix, e.g. `c2` or `c2.3`.
    pub fn own_token(&self) -> String {
        if self.version > 0 || self.kind == ConstructKind::While {
            format!("{}.{}", self.base, self.version)
        } else {
            self.base.clone()
        }
    }

    /// The tokens a call contributes as a prefix when renaming a body.
    pub fn tokens(&self) -> Vec<String> {
        let mut t = self.prefix.clone();
        t.push(self.own_token());
        t
    }

    /// Name without the construct's own version; the key for version counters.
    pub fn version_key(&self) -> String {
        let mut s = String::new();
        for p in &self.prefix {
            s.push_str(p);
            s.push(':');
        }
        s.push(self.kind.letter());
        s.push('/');
        s.push_str(&self.base);
        s
    }

    /// Parse the rendered form `t1:t2:base[.v]`.
    pub fn parse(kind: ConstructKind, text: &str) -> Option<ConstructId> {
        let mut parts: Vec<&str> = text.split(':').collect();
        let last = parts.pop()?;
        if last.is_empty() || parts.iter().any(|p| p.is_empty()) {
            return None;
        }
        let (base, version) = match last.split_once('.') {
            Some((b, v)) => (b, v.parse().ok()?),
            None => (last, 0),
        };
        if base.is_empty() || !base.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return None;
        }
        Some(ConstructId {
            kind,
            prefix: parts.into_iter().map(str::to_string).collect(),
            base: base.to_string(),
            version,
        })
    }
}

impl fmt::Display for ConstructId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.prefix {
            write!(f, "{p}:")?;
        }
        f.write_str(&self.own_token())
    }
}

/// Enclosing blocks of a statement, innermost first. Empty means global scope.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path(pub Vec<ConstructId>);

impl Path {
    pub fn global() -> Self {
        Path(Vec::new())
    }

    /// Innermost block, `None` at global scope.
    pub fn head(&self) -> Option<&ConstructId> {
        self.0.first()
    }

    pub fn blocks(&self) -> &[ConstructId] {
        &self.0
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("λ");
        }
        for (i, b) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Index of a statement's identifier stack in an
/// [`AnnotationTable`](crate::transform::AnnotationTable).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StmtKey(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ArithExpr {
    Var(String),
    Int(i64),
    Paren(Box<ArithExpr>),
    Bin(ArithOp, Box<ArithExpr>, Box<ArithExpr>),
}

/// Comparison operators. `>=`, `<`, `<=` and `!=` are kept as written so
/// programs render the way they were typed; they evaluate exactly as their
/// `not`/`==`/`>` encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Gt,
    Ge,
    Lt,
    Le,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Ne => "!=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BoolExpr {
    True,
    False,
    Not(Box<BoolExpr>),
    Paren(Box<BoolExpr>),
    Cmp(CmpOp, ArithExpr, ArithExpr),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assign {
    pub var: String,
    pub expr: ArithExpr,
    pub path: Path,
    pub key: Option<StmtKey>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct If {
    pub id: ConstructId,
    pub cond: BoolExpr,
    /// Outcome of the condition once evaluated (forward) or restored (reverse).
    pub decided: Option<bool>,
    pub then_branch: Program,
    pub else_branch: Program,
    pub path: Path,
    pub key: Option<StmtKey>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct While {
    pub id: ConstructId,
    pub cond: BoolExpr,
    pub decided: Option<bool>,
    pub body: Program,
    pub path: Path,
    pub key: Option<StmtKey>,
}

/// `var X = v` or, in removal position, `remove X = v`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarDecl {
    pub var: String,
    pub value: i64,
    pub path: Path,
    pub key: Option<StmtKey>,
}

/// `proc Pn n is P end` or, in removal position, `remove Pn n is P end`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProcDecl {
    pub id: ConstructId,
    pub name: String,
    pub body: Program,
    pub path: Path,
    pub key: Option<StmtKey>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Block {
    pub id: ConstructId,
    /// `VarDecl` statements.
    pub var_decls: Vec<Stmt>,
    /// `ProcDecl` statements.
    pub proc_decls: Vec<Stmt>,
    pub body: Program,
    /// `ProcRemove` statements, mirroring `proc_decls`.
    pub proc_removals: Vec<Stmt>,
    /// `VarRemove` statements, mirroring `var_decls`.
    pub var_removals: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Call {
    pub id: ConstructId,
    pub name: String,
    pub path: Path,
    pub key: Option<StmtKey>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RunC {
    pub id: ConstructId,
    pub body: Program,
    pub key: Option<StmtKey>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Stmt {
    Skip(Option<StmtKey>),
    Assign(Assign),
    If(If),
    While(While),
    Block(Block),
    VarDecl(VarDecl),
    ProcDecl(ProcDecl),
    Call(Call),
    VarRemove(VarDecl),
    ProcRemove(ProcDecl),
    /// Executing block body; never written in source.
    RunB(Program),
    /// Executing call body; never written in source.
    RunC(RunC),
}

impl Stmt {
    pub fn key(&self) -> Option<StmtKey> {
        match self {
            Stmt::Skip(k) => *k,
            Stmt::Assign(s) => s.key,
            Stmt::If(s) => s.key,
            Stmt::While(s) => s.key,
            Stmt::VarDecl(s) | Stmt::VarRemove(s) => s.key,
            Stmt::ProcDecl(s) | Stmt::ProcRemove(s) => s.key,
            Stmt::Call(s) => s.key,
            Stmt::RunC(s) => s.key,
            Stmt::Block(_) | Stmt::RunB(_) => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Stmt::Skip(_) => "Skip",
            Stmt::Assign(_) => "Assign",
            Stmt::If(_) => "If",
            Stmt::While(_) => "While",
            Stmt::Block(_) => "Block",
            Stmt::VarDecl(_) => "VarDecl",
            Stmt::ProcDecl(_) => "ProcDecl",
            Stmt::Call(_) => "Call",
            Stmt::VarRemove(_) => "VarRemove",
            Stmt::ProcRemove(_) => "ProcRemove",
            Stmt::RunB(_) => "RunB",
            Stmt::RunC(_) => "RunC",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub enum Program {
    /// Only used for empty declaration, removal or body lists.
    #[default]
    Empty,
    Single(Box<Stmt>),
    Seq(Box<Program>, Box<Program>),
    Par(Box<Program>, Box<Program>),
}

impl Program {
    pub fn skip() -> Program {
        Program::Single(Box::new(Stmt::Skip(None)))
    }

    pub fn single(stmt: Stmt) -> Program {
        Program::Single(Box::new(stmt))
    }

    pub fn seq(a: Program, b: Program) -> Program {
        Program::Seq(Box::new(a), Box::new(b))
    }

    pub fn par(a: Program, b: Program) -> Program {
        Program::Par(Box::new(a), Box::new(b))
    }

    pub fn is_skip(&self) -> bool {
        matches!(self, Program::Single(s) if matches!(**s, Stmt::Skip(_)))
    }

    /// Right-associated sequence of `items`, dropping empty ones.
    pub fn from_items(items: Vec<Program>) -> Program {
        items
            .into_iter()
            .filter(|p| !matches!(p, Program::Empty))
            .rev()
            .fold(Program::Empty, |acc, p| match acc {
                Program::Empty => p,
                rest => Program::then(p, rest),
            })
    }

    /// Sequential composition that keeps the right-associated normal form.
    pub fn then(a: Program, b: Program) -> Program {
        match (a, b) {
            (Program::Empty, b) => b,
            (a, Program::Empty) => a,
            (Program::Seq(x, y), b) => Program::Seq(x, Box::new(Program::then(*y, b))),
            (a, b) => Program::seq(a, b),
        }
    }

    /// Top-level items of a right-associated sequence.
    pub fn items(&self) -> Vec<&Program> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Program::Empty => break,
                Program::Seq(a, b) => {
                    out.push(a.as_ref());
                    cur = b;
                }
                other => {
                    out.push(other);
                    break;
                }
            }
        }
        out
    }

    pub fn contains_par(&self) -> bool {
        let mut found = false;
        crate::syntax::visit::walk_program(self, &mut |p| {
            if matches!(p, Program::Par(..)) {
                found = true;
            }
        });
        found
    }
}
