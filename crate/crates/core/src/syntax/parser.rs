//! Recursive-descent parser for `.rwl` source.
//!
//! After parsing, omitted construct identifiers are generated per kind in
//! pre-order, block removal lists are synthesized or checked against the
//! declarations, and every statement receives the path of its enclosing
//! blocks.

use std::collections::{BTreeMap, HashSet};

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::visit::walk_stmts_mut;
use super::SyntaxError;

pub fn parse_program(src: &str) -> Result<Program, SyntaxError> {
    let toks = tokenize(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        explicit: Vec::new(),
        in_removal: 0,
    };
    let start = p.here();
    let prog = p.parse_seq()?;
    if p.peek() != &Tok::Eof {
        return Err(p.err(format!("unexpected {}", p.peek().describe())));
    }
    if matches!(prog, Program::Empty) {
        return Err(p.err_at(&start, "empty program"));
    }
    reject_header_stmts(&prog, &start)?;
    p.check_duplicates()?;

    let mut prog = prog;
    let used: HashSet<String> = p.explicit.iter().map(|(id, _)| id.to_string()).collect();
    fill_ids(&mut prog, &mut IdGen::new(used));
    sync_removals(&mut prog);
    assign_paths(&mut prog, &mut Vec::new());
    Ok(prog)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    explicit: Vec<(ConstructId, Token)>,
    in_removal: usize,
}

type PResult<T> = Result<T, SyntaxError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn here(&self) -> Token {
        self.toks[self.pos].clone()
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn err(&self, message: impl Into<String>) -> SyntaxError {
        self.err_at(&self.toks[self.pos], message)
    }

    fn err_at(&self, at: &Token, message: impl Into<String>) -> SyntaxError {
        SyntaxError {
            line: at.line,
            col: at.col,
            message: message.into(),
        }
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.err(format!(
                "expected {}, found {}",
                t.describe(),
                self.peek().describe()
            )))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => Err(self.err(format!("expected identifier, found {}", other.describe()))),
        }
    }

    fn var_name(&mut self) -> PResult<String> {
        let at = self.here();
        let name = self.ident()?;
        if name.contains([':', '.']) {
            return Err(self.err_at(&at, format!("`{name}` is not a valid variable name")));
        }
        Ok(name)
    }

    fn construct_id(&mut self, kind: ConstructKind) -> PResult<ConstructId> {
        let at = self.here();
        let text = self.ident()?;
        let id = ConstructId::parse(kind, &text).ok_or_else(|| {
            self.err_at(&at, format!("`{text}` is not a valid construct identifier"))
        })?;
        if self.in_removal == 0 {
            self.explicit.push((id.clone(), at));
        }
        Ok(id)
    }

    fn auto_id(kind: ConstructKind) -> ConstructId {
        ConstructId::new(kind, "")
    }

    fn check_duplicates(&self) -> PResult<()> {
        let mut seen: HashSet<String> = HashSet::new();
        for (id, at) in &self.explicit {
            if !seen.insert(id.to_string()) {
                return Err(self.err_at(at, format!("duplicate construct identifier `{id}`")));
            }
        }
        Ok(())
    }

    fn at_seq_end(&self) -> bool {
        matches!(self.peek(), Tok::End | Tok::Else | Tok::RBrace | Tok::Eof)
    }

    /// `unit (';' unit)* [';']`, possibly empty.
    fn parse_seq(&mut self) -> PResult<Program> {
        Ok(Program::from_items(
            self.parse_items()?.into_iter().map(|(p, _)| p).collect(),
        ))
    }

    fn parse_items(&mut self) -> PResult<Vec<(Program, Token)>> {
        let mut items = Vec::new();
        while !self.at_seq_end() {
            let at = self.here();
            items.push((self.parse_unit()?, at));
            if !self.eat(&Tok::Semi) {
                break;
            }
        }
        Ok(items)
    }

    /// A body that must not be empty in the abstract syntax; empty means skip.
    fn parse_body(&mut self) -> PResult<Program> {
        let at = self.here();
        let body = self.parse_seq()?;
        reject_header_stmts(&body, &at)?;
        Ok(match body {
            Program::Empty => Program::skip(),
            p => p,
        })
    }

    /// `primary ('par' primary)*`, right-nested.
    fn parse_unit(&mut self) -> PResult<Program> {
        let first = self.parse_primary()?;
        if self.peek() == &Tok::Par {
            self.bump();
            let rest = self.parse_unit()?;
            return Ok(Program::par(first, rest));
        }
        Ok(first)
    }

    fn parse_braced(&mut self) -> PResult<Program> {
        self.expect(Tok::LBrace)?;
        let body = self.parse_body()?;
        self.expect(Tok::RBrace)?;
        Ok(body)
    }

    fn parse_primary(&mut self) -> PResult<Program> {
        match self.peek() {
            Tok::Par => {
                self.bump();
                let mut parts = vec![self.parse_braced()?];
                while self.peek() == &Tok::LBrace {
                    parts.push(self.parse_braced()?);
                }
                if parts.len() < 2 {
                    return Err(self.err("`par` needs at least two `{...}` components"));
                }
                let last = parts.pop().unwrap_or_default();
                Ok(parts
                    .into_iter()
                    .rev()
                    .fold(last, |acc, p| Program::par(p, acc)))
            }
            Tok::LBrace => self.parse_braced(),
            _ => Ok(Program::single(self.parse_stmt()?)),
        }
    }

    fn parse_stmt(&mut self) -> PResult<Stmt> {
        let at = self.here();
        let stmt = match self.peek().clone() {
            Tok::Skip => {
                self.bump();
                Stmt::Skip(None)
            }
            Tok::Ident(_) => {
                let var = self.var_name()?;
                self.expect(Tok::Assign)?;
                let expr = self.parse_arith()?;
                Stmt::Assign(Assign {
                    var,
                    expr,
                    path: Path::global(),
                    key: None,
                })
            }
            Tok::If => self.parse_if()?,
            Tok::While => self.parse_while()?,
            Tok::Begin => self.parse_block()?,
            Tok::Var => {
                self.bump();
                let (var, value) = self.var_binding()?;
                Stmt::VarDecl(VarDecl {
                    var,
                    value,
                    path: Path::global(),
                    key: None,
                })
            }
            Tok::Proc => {
                self.bump();
                Stmt::ProcDecl(self.proc_tail()?)
            }
            Tok::Call => {
                self.bump();
                let (id, name) = if matches!(self.peek_at(1), Tok::Ident(_)) {
                    let id = self.construct_id(ConstructKind::Call)?;
                    (id, self.ident()?)
                } else {
                    (Self::auto_id(ConstructKind::Call), self.ident()?)
                };
                Stmt::Call(Call {
                    id,
                    name,
                    path: Path::global(),
                    key: None,
                })
            }
            Tok::Remove => {
                self.bump();
                if self.peek_at(1) == &Tok::Assign {
                    let (var, value) = self.var_binding()?;
                    Stmt::VarRemove(VarDecl {
                        var,
                        value,
                        path: Path::global(),
                        key: None,
                    })
                } else {
                    self.in_removal += 1;
                    let decl = self.proc_tail();
                    self.in_removal -= 1;
                    Stmt::ProcRemove(decl?)
                }
            }
            Tok::RunB | Tok::RunC => {
                return Err(self.err_at(
                    &at,
                    format!(
                        "{} is reserved and cannot appear in source",
                        self.peek().describe()
                    ),
                ))
            }
            other => {
                return Err(self.err(format!("expected a statement, found {}", other.describe())))
            }
        };
        self.skip_annotation();
        Ok(stmt)
    }

    fn var_binding(&mut self) -> PResult<(String, i64)> {
        let var = self.var_name()?;
        self.expect(Tok::Assign)?;
        let neg = self.eat(&Tok::Minus);
        match self.bump() {
            Tok::Int(n) => Ok((var, if neg { -n } else { n })),
            other => Err(self.err(format!("expected integer, found {}", other.describe()))),
        }
    }

    /// `[id] name ['is' P 'end']` after `proc` or `remove`. The body may only
    /// be omitted in removal position.
    fn proc_tail(&mut self) -> PResult<ProcDecl> {
        let id = if matches!(self.peek_at(1), Tok::Ident(_)) {
            self.construct_id(ConstructKind::Proc)?
        } else {
            Self::auto_id(ConstructKind::Proc)
        };
        let name = self.var_name()?;
        let body = if self.in_removal > 0 && self.peek() != &Tok::Is {
            Program::Empty
        } else {
            self.expect(Tok::Is)?;
            let body = self.parse_body()?;
            self.expect(Tok::End)?;
            body
        };
        Ok(ProcDecl {
            id,
            name,
            body,
            path: Path::global(),
            key: None,
        })
    }

    /// An identifier directly after `if`/`while` names the construct when the
    /// following token cannot continue an expression.
    fn optional_cond_id(&mut self, kind: ConstructKind) -> PResult<ConstructId> {
        let named = matches!(self.peek(), Tok::Ident(_))
            && matches!(
                self.peek_at(1),
                Tok::LParen | Tok::Ident(_) | Tok::Int(_) | Tok::Not | Tok::True | Tok::False
            )
            || self.id_before_minus(kind);
        if named {
            self.construct_id(kind)
        } else {
            Ok(Self::auto_id(kind))
        }
    }

    /// `if i1 -1 > x` names the conditional; `if x -1 > 0` does not.
    fn id_before_minus(&self, kind: ConstructKind) -> bool {
        match (self.peek(), self.peek_at(1)) {
            (Tok::Ident(s), Tok::Minus) => ConstructId::parse(kind, s).is_some_and(|id| {
                let mut cs = id.base.chars();
                cs.next() == Some(kind.letter())
                    && !cs.as_str().is_empty()
                    && cs.all(|c| c.is_ascii_digit())
            }),
            _ => false,
        }
    }

    fn parse_if(&mut self) -> PResult<Stmt> {
        self.expect(Tok::If)?;
        let id = self.optional_cond_id(ConstructKind::If)?;
        let cond = self.parse_bool()?;
        self.expect(Tok::Then)?;
        let then_branch = self.parse_body()?;
        let else_branch = if self.eat(&Tok::Else) {
            self.parse_body()?
        } else {
            Program::skip()
        };
        self.expect(Tok::End)?;
        Ok(Stmt::If(If {
            id,
            cond,
            decided: None,
            then_branch,
            else_branch,
            path: Path::global(),
            key: None,
        }))
    }

    fn parse_while(&mut self) -> PResult<Stmt> {
        self.expect(Tok::While)?;
        let id = self.optional_cond_id(ConstructKind::While)?;
        let cond = self.parse_bool()?;
        self.expect(Tok::Do)?;
        let body = self.parse_body()?;
        self.expect(Tok::End)?;
        Ok(Stmt::While(While {
            id,
            cond,
            decided: None,
            body,
            path: Path::global(),
            key: None,
        }))
    }

    fn parse_block(&mut self) -> PResult<Stmt> {
        let begin = self.here();
        self.expect(Tok::Begin)?;
        let id = if matches!(self.peek(), Tok::Ident(_)) && self.peek_at(1) != &Tok::Assign {
            self.construct_id(ConstructKind::Block)?
        } else {
            Self::auto_id(ConstructKind::Block)
        };
        let mut items = self.parse_items()?.into_iter().peekable();
        self.expect(Tok::End)?;

        let is = |p: &Program, f: fn(&Stmt) -> bool| matches!(p, Program::Single(s) if f(s));
        let mut var_decls = Vec::new();
        let mut proc_decls = Vec::new();
        while let Some((p, _)) = items.next_if(|(p, _)| is(p, |s| matches!(s, Stmt::VarDecl(_)))) {
            var_decls.push(into_stmt(p));
        }
        while let Some((p, _)) = items.next_if(|(p, _)| is(p, |s| matches!(s, Stmt::ProcDecl(_)))) {
            proc_decls.push(into_stmt(p));
        }
        let mut rest: Vec<(Program, Token)> = items.collect();
        let mut var_removals = Vec::new();
        while rest
            .last()
            .is_some_and(|(p, _)| is(p, |s| matches!(s, Stmt::VarRemove(_))))
        {
            var_removals.push(into_stmt(rest.pop().map(|(p, _)| p).unwrap_or_default()));
        }
        let mut proc_removals = Vec::new();
        while rest
            .last()
            .is_some_and(|(p, _)| is(p, |s| matches!(s, Stmt::ProcRemove(_))))
        {
            proc_removals.push(into_stmt(rest.pop().map(|(p, _)| p).unwrap_or_default()));
        }
        var_removals.reverse();
        proc_removals.reverse();
        for (p, at) in &rest {
            reject_header_stmts(p, at)?;
        }
        let body = Program::from_items(rest.into_iter().map(|(p, _)| p).collect());
        let body = if matches!(body, Program::Empty) {
            Program::skip()
        } else {
            body
        };

        let var_removals = self.mirror_vars(&begin, &var_decls, var_removals)?;
        let proc_removals = self.mirror_procs(&begin, &mut proc_decls, proc_removals)?;
        Ok(Stmt::Block(Block {
            id,
            var_decls,
            proc_decls,
            body,
            proc_removals,
            var_removals,
        }))
    }

    fn mirror_vars(&self, at: &Token, decls: &[Stmt], given: Vec<Stmt>) -> PResult<Vec<Stmt>> {
        let expected: Vec<Stmt> = decls
            .iter()
            .rev()
            .map(|d| match d {
                Stmt::VarDecl(v) => Stmt::VarRemove(v.clone()),
                other => other.clone(),
            })
            .collect();
        if given.is_empty() || given == expected {
            return Ok(expected);
        }
        Err(self.err_at(
            at,
            "variable removals must mirror the declarations in reverse order",
        ))
    }

    fn mirror_procs(
        &mut self,
        at: &Token,
        decls: &mut [Stmt],
        given: Vec<Stmt>,
    ) -> PResult<Vec<Stmt>> {
        if given.is_empty() {
            return Ok(decls
                .iter()
                .rev()
                .map(|d| match d {
                    Stmt::ProcDecl(p) => Stmt::ProcRemove(p.clone()),
                    other => other.clone(),
                })
                .collect());
        }
        let err = self.err_at(
            at,
            "procedure removals must mirror the declarations in reverse order",
        );
        let mismatch = || err.clone();
        if given.len() != decls.len() {
            return Err(mismatch());
        }
        let mut out = Vec::new();
        for (decl, rem) in decls.iter_mut().rev().zip(given) {
            let (Stmt::ProcDecl(d), Stmt::ProcRemove(r)) = (decl, rem) else {
                return Err(mismatch());
            };
            if d.name != r.name {
                return Err(mismatch());
            }
            match (d.id.is_auto(), r.id.is_auto()) {
                (false, false) if d.id != r.id => return Err(mismatch()),
                (true, false) => {
                    d.id = r.id.clone();
                    self.explicit.push((r.id.clone(), at.clone()));
                }
                _ => {}
            }
            if !matches!(r.body, Program::Empty) && !same_shape(&d.body, &r.body) {
                return Err(mismatch());
            }
            out.push(Stmt::ProcRemove(d.clone()));
        }
        Ok(out)
    }

    /// Accept and discard `(path, [ids])`, `(path, A)`, `(path)` or a bare
    /// path written after a statement.
    fn skip_annotation(&mut self) {
        let save = self.pos;
        if self.eat(&Tok::LParen) {
            if self.skip_path() && self.skip_stack_part() && self.eat(&Tok::RParen) {
                return;
            }
            self.pos = save;
            return;
        }
        if !self.skip_path() {
            self.pos = save;
        }
    }

    fn skip_path(&mut self) -> bool {
        if self.eat(&Tok::Lambda) {
            return true;
        }
        if !matches!(self.peek(), Tok::Ident(_)) {
            return false;
        }
        self.bump();
        while self.peek() == &Tok::Star && matches!(self.peek_at(1), Tok::Ident(_)) {
            self.bump();
            self.bump();
        }
        true
    }

    fn skip_stack_part(&mut self) -> bool {
        if !self.eat(&Tok::Comma) {
            return true;
        }
        if matches!(self.peek(), Tok::Ident(_)) {
            self.bump();
            return true;
        }
        if !self.eat(&Tok::LBracket) {
            return false;
        }
        while let Tok::Int(_) = self.peek() {
            self.bump();
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.eat(&Tok::RBracket)
    }

    fn parse_bool(&mut self) -> PResult<BoolExpr> {
        let mut lhs = self.parse_and()?;
        while self.eat(&Tok::Or) {
            let rhs = self.parse_and()?;
            lhs = BoolExpr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> PResult<BoolExpr> {
        let mut lhs = self.parse_not()?;
        while self.eat(&Tok::And) {
            let rhs = self.parse_not()?;
            lhs = BoolExpr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_not(&mut self) -> PResult<BoolExpr> {
        if self.eat(&Tok::Not) {
            return Ok(BoolExpr::Not(Box::new(self.parse_not()?)));
        }
        match self.peek() {
            Tok::True => {
                self.bump();
                Ok(BoolExpr::True)
            }
            Tok::False => {
                self.bump();
                Ok(BoolExpr::False)
            }
            Tok::LParen => {
                // `(` opens either an arithmetic operand or a nested condition.
                let save = self.pos;
                if let Ok(c) = self.parse_cmp() {
                    return Ok(c);
                }
                self.pos = save;
                self.bump();
                let inner = self.parse_bool()?;
                self.expect(Tok::RParen)?;
                Ok(BoolExpr::Paren(Box::new(inner)))
            }
            _ => self.parse_cmp(),
        }
    }

    fn parse_cmp(&mut self) -> PResult<BoolExpr> {
        let lhs = self.parse_arith()?;
        let op = match self.peek() {
            Tok::EqEq => CmpOp::Eq,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Ne => CmpOp::Ne,
            other => {
                return Err(self.err(format!("expected comparison, found {}", other.describe())))
            }
        };
        self.bump();
        let rhs = self.parse_arith()?;
        Ok(BoolExpr::Cmp(op, lhs, rhs))
    }

    fn parse_arith(&mut self) -> PResult<ArithExpr> {
        let mut lhs = self.parse_term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.parse_term()?;
            lhs = ArithExpr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn parse_term(&mut self) -> PResult<ArithExpr> {
        let mut lhs = self.parse_factor()?;
        while self.eat(&Tok::Star) {
            let rhs = self.parse_factor()?;
            lhs = ArithExpr::Bin(ArithOp::Mul, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_factor(&mut self) -> PResult<ArithExpr> {
        match self.peek().clone() {
            Tok::Ident(_) => Ok(ArithExpr::Var(self.var_name()?)),
            Tok::Int(n) => {
                self.bump();
                Ok(ArithExpr::Int(n))
            }
            Tok::Minus if matches!(self.peek_at(1), Tok::Int(_)) => {
                self.bump();
                match self.bump() {
                    Tok::Int(n) => Ok(ArithExpr::Int(-n)),
                    _ => unreachable!("checked by the guard"),
                }
            }
            Tok::LParen => {
                self.bump();
                let inner = self.parse_arith()?;
                self.expect(Tok::RParen)?;
                Ok(ArithExpr::Paren(Box::new(inner)))
            }
            other => Err(self.err(format!("expected expression, found {}", other.describe()))),
        }
    }
}

fn into_stmt(p: Program) -> Stmt {
    match p {
        Program::Single(s) => *s,
        _ => Stmt::Skip(None),
    }
}

/// Declarations and removals may only appear in a block's header and tail.
fn reject_header_stmts(p: &Program, at: &Token) -> PResult<()> {
    match p {
        Program::Empty => Ok(()),
        Program::Seq(a, b) | Program::Par(a, b) => {
            reject_header_stmts(a, at)?;
            reject_header_stmts(b, at)
        }
        Program::Single(s) => match **s {
            Stmt::VarDecl(_) | Stmt::ProcDecl(_) | Stmt::VarRemove(_) | Stmt::ProcRemove(_) => {
                Err(SyntaxError {
                    line: at.line,
                    col: at.col,
                    message: format!(
                        "{} may only appear at the start or end of a block",
                        s.kind_name()
                    ),
                })
            }
            _ => Ok(()),
        },
    }
}

/// Structural equality where an omitted identifier on either side matches
/// any identifier.
fn same_shape(a: &Program, b: &Program) -> bool {
    let (mut a, mut b) = (a.clone(), b.clone());
    let mut ids_a = Vec::new();
    let mut ids_b = Vec::new();
    walk_stmts_mut(&mut a, &mut |s| {
        if let Some(id) = construct_id_mut(s) {
            ids_a.push(std::mem::replace(id, ConstructId::new(id.kind, "")));
        }
    });
    walk_stmts_mut(&mut b, &mut |s| {
        if let Some(id) = construct_id_mut(s) {
            ids_b.push(std::mem::replace(id, ConstructId::new(id.kind, "")));
        }
    });
    a == b
        && ids_a
            .iter()
            .zip(&ids_b)
            .all(|(x, y)| x.is_auto() || y.is_auto() || x == y)
}

pub(crate) fn construct_id_mut(s: &mut Stmt) -> Option<&mut ConstructId> {
    match s {
        Stmt::If(i) => Some(&mut i.id),
        Stmt::While(w) => Some(&mut w.id),
        Stmt::Block(b) => Some(&mut b.id),
        Stmt::ProcDecl(p) | Stmt::ProcRemove(p) => Some(&mut p.id),
        Stmt::Call(c) => Some(&mut c.id),
        Stmt::RunC(r) => Some(&mut r.id),
        _ => None,
    }
}

struct IdGen {
    used: HashSet<String>,
    next: BTreeMap<ConstructKind, u32>,
}

impl IdGen {
    fn new(used: HashSet<String>) -> Self {
        IdGen {
            used,
            next: BTreeMap::new(),
        }
    }

    fn fresh(&mut self, kind: ConstructKind) -> ConstructId {
        let n = self.next.entry(kind).or_insert(1);
        loop {
            let base = format!("{}{}", kind.letter(), n);
            *n += 1;
            let id = ConstructId::new(kind, base);
            if self.used.insert(id.to_string()) {
                return id;
            }
        }
    }
}

/// Pre-order identifier generation. Removal statements are skipped; they
/// receive their declaration's identifiers in [`sync_removals`].
fn fill_ids(p: &mut Program, gen: &mut IdGen) {
    match p {
        Program::Empty => {}
        Program::Single(s) => fill_stmt(s, gen),
        Program::Seq(a, b) | Program::Par(a, b) => {
            fill_ids(a, gen);
            fill_ids(b, gen);
        }
    }
}

fn fill_stmt(s: &mut Stmt, gen: &mut IdGen) {
    if matches!(s, Stmt::ProcRemove(_)) {
        return;
    }
    if let Some(id) = construct_id_mut(s) {
        if id.is_auto() {
            *id = gen.fresh(id.kind);
        }
    }
    match s {
        Stmt::If(i) => {
            fill_ids(&mut i.then_branch, gen);
            fill_ids(&mut i.else_branch, gen);
        }
        Stmt::While(w) => fill_ids(&mut w.body, gen),
        Stmt::Block(b) => {
            for d in b.var_decls.iter_mut().chain(b.proc_decls.iter_mut()) {
                fill_stmt(d, gen);
            }
            fill_ids(&mut b.body, gen);
        }
        Stmt::ProcDecl(d) => fill_ids(&mut d.body, gen),
        _ => {}
    }
}

fn sync_removals(p: &mut Program) {
    walk_stmts_mut(p, &mut |s| {
        if let Stmt::Block(b) = s {
            let n = b.proc_decls.len();
            for (j, rem) in b.proc_removals.iter_mut().enumerate() {
                if let (Some(Stmt::ProcDecl(d)), Stmt::ProcRemove(r)) =
                    (b.proc_decls.get(n - 1 - j), rem)
                {
                    r.id = d.id.clone();
                    r.body = d.body.clone();
                }
            }
        }
    });
}

/// Attach to every statement the identifiers of its enclosing blocks.
pub(crate) fn assign_paths(p: &mut Program, scope: &mut Vec<ConstructId>) {
    match p {
        Program::Empty => {}
        Program::Single(s) => assign_stmt_path(s, scope),
        Program::Seq(a, b) | Program::Par(a, b) => {
            assign_paths(a, scope);
            assign_paths(b, scope);
        }
    }
}

fn assign_stmt_path(s: &mut Stmt, scope: &mut Vec<ConstructId>) {
    let here = Path(scope.iter().rev().cloned().collect());
    match s {
        Stmt::Assign(a) => a.path = here,
        Stmt::If(i) => {
            i.path = here;
            assign_paths(&mut i.then_branch, scope);
            assign_paths(&mut i.else_branch, scope);
        }
        Stmt::While(w) => {
            w.path = here;
            assign_paths(&mut w.body, scope);
        }
        Stmt::VarDecl(v) | Stmt::VarRemove(v) => v.path = here,
        Stmt::ProcDecl(d) | Stmt::ProcRemove(d) => {
            d.path = here;
            assign_paths(&mut d.body, scope);
        }
        Stmt::Call(c) => c.path = here,
        Stmt::Block(b) => {
            scope.push(b.id.clone());
            for d in b
                .var_decls
                .iter_mut()
                .chain(b.proc_decls.iter_mut())
                .chain(b.proc_removals.iter_mut())
                .chain(b.var_removals.iter_mut())
            {
                assign_stmt_path(d, scope);
            }
            assign_paths(&mut b.body, scope);
            scope.pop();
        }
        Stmt::RunB(body) => assign_paths(body, scope),
        Stmt::RunC(r) => assign_paths(&mut r.body, scope),
        Stmt::Skip(_) => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stmt(p: &Program) -> &Stmt {
        match p {
            Program::Single(s) => s,
            other => panic!("expected a single statement, got {other:?}"),
        }
    }

    #[test]
    fn label_before_negative_literal() {
        let p = parse_program("if i4 -1 > x then skip; end").unwrap();
        let Stmt::If(i) = stmt(&p) else { panic!() };
        assert_eq!(i.id.to_string(), "i4");
        let p = parse_program("if x -1 > 0 then skip; end").unwrap();
        let Stmt::If(i) = stmt(&p) else { panic!() };
        assert_eq!(i.id.to_string(), "i1");
    }

    #[test]
    fn skip_parses_to_single_skip() {
        assert_eq!(parse_program("skip").unwrap(), Program::skip());
        assert_eq!(parse_program("skip;").unwrap(), Program::skip());
    }

    #[test]
    fn restaurant_with_stack_suffixes() {
        let src = "par { while w1.0 ((m - c - r - 1) >= 0) do c = c + 1 λ; end λ; } { r = 2 λ; }";
        let p = parse_program(src).unwrap();
        let Program::Par(l, r) = &p else {
            panic!("expected par")
        };
        let Stmt::While(w) = stmt(l) else {
            panic!("expected while")
        };
        assert_eq!(w.id.to_string(), "w1.0");
        assert_eq!(w.path, Path::global());
        assert!(matches!(stmt(r), Stmt::Assign(a) if a.var == "r"));
    }

    #[test]
    fn auto_ids_skip_explicit_names() {
        let p = parse_program(
            "if i1 x > 0 then skip end; if x > 1 then skip end; while x > 2 do x = x - 1 end",
        )
        .unwrap();
        let items = p.items();
        let Stmt::If(second) = stmt(items[1]) else {
            panic!()
        };
        assert_eq!(second.id.to_string(), "i2");
        let Stmt::While(w) = stmt(items[2]) else {
            panic!()
        };
        assert_eq!(w.id.to_string(), "w1.0");
    }

    #[test]
    fn removals_are_synthesized_in_reverse() {
        let p = parse_program("begin var a = 1; var b = 2; x = a + b end").unwrap();
        let Stmt::Block(b) = stmt(&p) else { panic!() };
        let names: Vec<_> = b
            .var_removals
            .iter()
            .map(|s| match s {
                Stmt::VarRemove(v) => v.var.clone(),
                _ => panic!(),
            })
            .collect();
        assert_eq!(names, ["b", "a"]);
        assert_eq!(b.id.to_string(), "b1");
    }

    #[test]
    fn paths_follow_block_nesting() {
        let p = parse_program(
            "begin b1 proc p1 fib is begin b2 var T = 0; F = S end end; call c1 fib end",
        )
        .unwrap();
        let Stmt::Block(b1) = stmt(&p) else { panic!() };
        let Stmt::ProcDecl(d) = &b1.proc_decls[0] else {
            panic!()
        };
        assert_eq!(d.path.to_string(), "b1");
        let Stmt::Block(b2) = stmt(&d.body) else {
            panic!()
        };
        let Stmt::Assign(a) = stmt(&b2.body) else {
            panic!()
        };
        assert_eq!(a.path.to_string(), "b2*b1");
        let Stmt::ProcRemove(r) = &b1.proc_removals[0] else {
            panic!()
        };
        assert_eq!(r.body, d.body);
    }

    #[test]
    fn inconsistent_removals_are_rejected() {
        let err = parse_program("begin var a = 1; var b = 2; skip; remove a = 1; remove b = 2 end")
            .unwrap_err();
        assert!(err.message.contains("mirror"), "{err}");
        assert!(parse_program("begin var a = 1; skip; remove a = 1 end").is_ok());
    }

    #[test]
    fn duplicate_explicit_ids_are_rejected() {
        let err = parse_program("begin b1 skip end; begin b1 skip end").unwrap_err();
        assert!(err.message.contains("duplicate"));
        assert_eq!((err.line, err.col), (1, 26));
    }

    #[test]
    fn reserved_forms_are_rejected() {
        assert!(parse_program("runB skip end").is_err());
        assert!(parse_program("runC c1 skip end").is_err());
    }

    #[test]
    fn boolean_parentheses_disambiguate() {
        let p = parse_program("if (x > 0) and (y + 1) > 2 then skip end").unwrap();
        let Stmt::If(i) = stmt(&p) else { panic!() };
        let BoolExpr::And(l, r) = &i.cond else {
            panic!("{:?}", i.cond)
        };
        assert!(matches!(**l, BoolExpr::Paren(_)));
        assert!(matches!(
            **r,
            BoolExpr::Cmp(CmpOp::Gt, ArithExpr::Paren(_), _)
        ));
    }

    #[test]
    fn nary_par_nests_right() {
        let p = parse_program("par { a = 1 } { b = 2 } { c = 3 }").unwrap();
        let Program::Par(_, rest) = &p else { panic!() };
        assert!(matches!(**rest, Program::Par(..)));
    }

    #[test]
    fn declarations_outside_blocks_are_errors() {
        assert!(parse_program("var x = 1").is_err());
        assert!(parse_program("begin x = 1; var y = 2 end").is_err());
    }
}
