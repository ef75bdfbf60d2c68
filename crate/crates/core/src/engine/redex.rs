//! Enumeration of enabled redexes and navigation to a redex position.

use crate::env::StackSel;
use crate::syntax::ast::*;

use super::{is_done, Config, EngineError, Mode, RedexId};

/// Child `idx` of `p` on the way to an active position.
pub(super) fn child_mut(p: &mut Program, idx: u8) -> Option<&mut Program> {
    match (p, idx) {
        (Program::Seq(a, _), 0) => Some(a),
        (Program::Par(a, _), 0) => Some(a),
        (Program::Par(_, b), 1) => Some(b),
        (Program::Single(s), _) => match (&mut **s, idx) {
            (Stmt::If(i), 0) => Some(&mut i.then_branch),
            (Stmt::If(i), 1) => Some(&mut i.else_branch),
            (Stmt::While(w), 0) => Some(&mut w.body),
            (Stmt::RunB(body), 0) => Some(body),
            (Stmt::RunC(r), 0) => Some(&mut r.body),
            _ => None,
        },
        _ => None,
    }
}

fn child(p: &Program, idx: u8) -> Option<&Program> {
    match (p, idx) {
        (Program::Seq(a, _), 0) | (Program::Par(a, _), 0) => Some(a),
        (Program::Par(_, b), 1) => Some(b),
        (Program::Single(s), _) => match (&**s, idx) {
            (Stmt::If(i), 0) => Some(&i.then_branch),
            (Stmt::If(i), 1) => Some(&i.else_branch),
            (Stmt::While(w), 0) => Some(&w.body),
            (Stmt::RunB(body), 0) => Some(body),
            (Stmt::RunC(r), 0) => Some(&r.body),
            _ => None,
        },
        _ => None,
    }
}

/// Rules guarded by identifiers in reverse mode, with the δ stack each one
/// consults.
fn reverse_guard(s: &Stmt, base: &str) -> Option<Option<StackSel>> {
    let sel = match (base, s) {
        ("D1", Stmt::Assign(a)) => Some(StackSel::Var(a.var.clone())),
        ("L1", Stmt::VarDecl(v)) => Some(StackSel::Var(v.var.clone())),
        ("I1", _) => Some(StackSel::B),
        ("W1", _) => Some(StackSel::WI),
        ("W2", _) => Some(StackSel::W),
        ("G1", _) => Some(StackSel::Pr),
        ("L2" | "H1" | "H2", _) => None,
        _ => return None,
    };
    Some(sel)
}

impl Config {
    /// Every enabled redex in canonical order.
    pub fn enabled(&self) -> Vec<RedexId> {
        let mut out = Vec::new();
        self.collect(&self.program, &mut Vec::new(), &mut out);
        out.sort();
        out
    }

    fn push(&self, out: &mut Vec<RedexId>, path: &[u8], base: &str) {
        out.push(RedexId {
            path: path.to_vec(),
            rule: format!("{base}{}", self.mode.suffix()),
        });
    }

    fn collect(&self, p: &Program, path: &mut Vec<u8>, out: &mut Vec<RedexId>) {
        match p {
            Program::Empty => {}
            Program::Seq(a, _) => {
                if is_done(a) {
                    self.push(out, path, "S2");
                } else {
                    path.push(0);
                    self.collect(a, path, out);
                    path.pop();
                }
            }
            Program::Par(a, b) => {
                if is_done(a) {
                    self.push(out, path, "P3");
                }
                if is_done(b) {
                    self.push(out, path, "P4");
                }
                for (i, side) in [(0u8, a), (1, b)] {
                    if !is_done(side) {
                        path.push(i);
                        self.collect(side, path, out);
                        path.pop();
                    }
                }
            }
            Program::Single(s) => self.collect_stmt(s, path, out),
        }
    }

    fn descend(&self, p: &Program, idx: u8, path: &mut Vec<u8>, out: &mut Vec<RedexId>) {
        path.push(idx);
        self.collect(p, path, out);
        path.pop();
    }

    fn collect_stmt(&self, s: &Stmt, path: &mut Vec<u8>, out: &mut Vec<RedexId>) {
        let base = match s {
            Stmt::Skip(_) => return,
            Stmt::Assign(_) => "D1",
            Stmt::If(i) => match i.decided {
                None => "I1",
                Some(true) if is_done(&i.then_branch) => "I4",
                Some(false) if is_done(&i.else_branch) => "I5",
                Some(v) => {
                    return self.descend(
                        if v { &i.then_branch } else { &i.else_branch },
                        !v as u8,
                        path,
                        out,
                    )
                }
            },
            Stmt::While(w) => match w.decided {
                None if self.env.beta.contains_key(&w.id) => "W2",
                None => "W1",
                Some(true) if is_done(&w.body) => "W4",
                Some(true) => return self.descend(&w.body, 0, path, out),
                Some(false) => "W5",
            },
            Stmt::Block(_) => "B1",
            Stmt::RunB(body) if is_done(body) => "B3",
            Stmt::RunB(body) => return self.descend(body, 0, path, out),
            Stmt::VarDecl(_) => "L1",
            Stmt::ProcDecl(_) => "L2",
            Stmt::VarRemove(_) => "H1",
            Stmt::ProcRemove(_) => "H2",
            Stmt::Call(_) => "G1",
            Stmt::RunC(r) if is_done(&r.body) => "G3",
            Stmt::RunC(r) => return self.descend(&r.body, 0, path, out),
        };
        if self.mode == Mode::Reverse {
            if let Some(sel) = reverse_guard(s, base) {
                if !self.guard_holds(s, sel.as_ref()) {
                    return;
                }
            }
        }
        self.push(out, path, base);
    }

    /// Statement stack top, previous identifier and δ top all agree.
    fn guard_holds(&self, s: &Stmt, sel: Option<&StackSel>) -> bool {
        let m = self.counters.prev_id;
        if m == 0 {
            return false;
        }
        let Some(k) = s.key() else { return false };
        if self.table.top(k) != Some(m) {
            return false;
        }
        sel.is_none_or(|sel| self.aux.top_id(sel) == Some(m))
    }

    /// Short label for `r`: its rule and the first line of the term it
    /// rewrites.
    pub fn describe(&self, r: &RedexId) -> String {
        let mut p = &self.program;
        for &i in &r.path {
            match child(p, i) {
                Some(c) => p = c,
                None => return r.rule.clone(),
            }
        }
        let head = match p {
            Program::Seq(..) => "sequence".to_string(),
            Program::Par(..) => "par".to_string(),
            _ => {
                let text = crate::syntax::render(p);
                text.lines()
                    .next()
                    .unwrap_or("")
                    .trim()
                    .trim_end_matches(';')
                    .to_string()
            }
        };
        format!("{}: {head}", r.rule)
    }

    /// Check that `r` is currently enabled.
    pub(super) fn check_enabled(&self, r: &RedexId) -> Result<(), EngineError> {
        if self.enabled().contains(r) {
            Ok(())
        } else {
            Err(EngineError::NotEnabled(r.clone()))
        }
    }
}
