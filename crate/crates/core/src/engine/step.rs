//! Rule application. One function covers all three modes; the mode decides
//! whether a rule evaluates, records or restores.

use crate::env::{ProcEntry, VarKey};
use crate::syntax::ast::*;
use crate::syntax::visit::Orientation;
use crate::transform::{at_current_versions, fresh_keys, get_ai, ire_l, re_l, re_p, set_ai};

use super::eval::{eval_arith, eval_bool};
use super::redex::child_mut;
use super::{Config, EngineError, Mode, RedexId, TransitionRecord};

fn navigate<'a>(p: &'a mut Program, path: &[u8]) -> Option<&'a mut Program> {
    let mut cur = p;
    for &i in path {
        cur = child_mut(cur, i)?;
    }
    Some(cur)
}

fn flag(v: bool) -> &'static str {
    if v {
        "T"
    } else {
        "F"
    }
}

/// Outcome of one rule: identifier used and a short note on δ.
type Applied = (Option<u64>, String);

impl Config {
    /// Apply the rule named by `r`, which must be enabled.
    pub fn step(&mut self, r: &RedexId) -> Result<TransitionRecord, EngineError> {
        self.check_enabled(r)?;
        let base = r
            .rule
            .strip_suffix(self.mode.suffix())
            .unwrap_or(&r.rule)
            .to_string();
        let mut program = std::mem::take(&mut self.program);
        let result = match navigate(&mut program, &r.path) {
            Some(node) => self.apply(node, &base),
            None => Err(EngineError::NotEnabled(r.clone())),
        };
        self.program = program;
        let (id, effect) = result?;
        let rec = TransitionRecord {
            step: self.steps,
            rule: r.rule.clone(),
            redex: r.clone(),
            id,
            effect,
        };
        self.steps += 1;
        Ok(rec)
    }

    fn eval_a(&mut self, e: &ArithExpr, path: &Path) -> Result<i64, EngineError> {
        self.eval_count += 1;
        eval_arith(e, path, &self.env)
    }

    fn eval_b(&mut self, b: &BoolExpr, path: &Path) -> Result<bool, EngineError> {
        self.eval_count += 1;
        eval_bool(b, path, &self.env)
    }

    /// Forward m-rule bookkeeping: draw `next()` and push it on the
    /// statement's stack. Nothing happens without annotation.
    fn draw(&mut self, key: Option<StmtKey>, rule: &str) -> Result<Option<u64>, EngineError> {
        if self.mode != Mode::Annotated {
            return Ok(None);
        }
        let k = key.ok_or_else(|| EngineError::Unannotated { rule: rule.into() })?;
        let m = self.counters.next();
        self.table.push(k, m);
        Ok(Some(m))
    }

    /// Reverse m-rule bookkeeping: take `previous()` and pop it from the
    /// statement's stack.
    fn consume(&mut self, key: Option<StmtKey>, rule: &str) -> Result<u64, EngineError> {
        let k = key.ok_or_else(|| EngineError::Unannotated { rule: rule.into() })?;
        let expected = self.counters.prev_id;
        let found = self.table.top(k);
        if found != Some(expected) || expected == 0 {
            return Err(EngineError::GuardViolation {
                rule: rule.into(),
                expected,
                found,
            });
        }
        let m = self.counters.previous()?;
        self.table.pop(k);
        Ok(m)
    }

    fn beta_copy(&self, id: &ConstructId) -> Result<While, EngineError> {
        self.env
            .beta
            .get(id)
            .cloned()
            .ok_or_else(|| EngineError::MissingLoopCopy(id.to_string()))
    }

    fn apply(&mut self, node: &mut Program, base: &str) -> Result<Applied, EngineError> {
        match base {
            "S2" => {
                let Program::Seq(_, rest) = std::mem::take(node) else {
                    unreachable!("S2 on non-sequence")
                };
                *node = *rest;
                return Ok((None, String::new()));
            }
            "P3" | "P4" => {
                let Program::Par(a, b) = std::mem::take(node) else {
                    unreachable!("{base} on non-par")
                };
                *node = if base == "P3" { *b } else { *a };
                return Ok((None, String::new()));
            }
            _ => {}
        }
        let Program::Single(stmt) = node else {
            unreachable!("{base} on a non-statement")
        };
        let rule = format!("{base}{}", self.mode.suffix());
        let (applied, replacement) = self.apply_stmt(stmt, base, &rule)?;
        if let Some(p) = replacement {
            *node = p;
        }
        Ok(applied)
    }

    /// Returns the rule outcome and, when the statement is replaced, its
    /// replacement.
    fn apply_stmt(
        &mut self,
        stmt: &mut Stmt,
        base: &str,
        rule: &str,
    ) -> Result<(Applied, Option<Program>), EngineError> {
        let reverse = self.mode == Mode::Reverse;
        let skip = Some(Program::skip());
        Ok(match (base, stmt) {
            ("D1", Stmt::Assign(a)) => {
                let l = self.env.eval_v(&a.path, &a.var)?;
                let old = self.env.sigma.get(&l).copied().unwrap_or(0);
                if reverse {
                    let m = self.consume(a.key, rule)?;
                    let v = self.aux.pop_var(&a.var, m)?;
                    self.env.sigma.insert(l, v);
                    ((Some(m), format!("pop {} ({m},{v})", a.var)), skip)
                } else {
                    let v = self.eval_a(&a.expr, &a.path)?;
                    let id = self.draw(a.key, rule)?;
                    self.env.sigma.insert(l, v);
                    match id {
                        Some(m) => {
                            self.aux.push_var(&a.var, m, old);
                            ((id, format!("push {} ({m},{old})", a.var)), skip)
                        }
                        None => ((None, String::new()), skip),
                    }
                }
            }
            ("I1", Stmt::If(i)) => {
                if reverse {
                    let m = self.consume(i.key, rule)?;
                    let v = self.aux.pop_b(m)?;
                    i.decided = Some(v);
                    ((Some(m), format!("pop B ({m},{})", flag(v))), None)
                } else {
                    let v = self.eval_b(&i.cond, &i.path)?;
                    i.decided = Some(v);
                    ((None, String::new()), None)
                }
            }
            ("I4" | "I5", Stmt::If(i)) => {
                let v = base == "I4";
                if reverse {
                    ((None, String::new()), skip)
                } else {
                    match self.draw(i.key, rule)? {
                        Some(m) => {
                            self.aux.push_b(m, v);
                            ((Some(m), format!("push B ({m},{})", flag(v))), skip)
                        }
                        None => ((None, String::new()), skip),
                    }
                }
            }
            ("W1", Stmt::While(w)) if reverse => {
                let m = self.consume(w.key, rule)?;
                let info = self.aux.pop_wi(m)?;
                let body = at_current_versions(&w.body, &self.counters);
                set_ai(&body, &info, &mut self.table, Orientation::Mirrored)?;
                w.body = body;
                self.env.beta.insert(w.id.clone(), w.clone());
                (
                    (Some(m), format!("pop WI ({m},{} stacks)", info.len())),
                    None,
                )
            }
            ("W1", Stmt::While(w)) => {
                let v = self.eval_b(&w.cond, &w.path)?;
                let body = re_l(&w.body, &mut self.counters);
                let stored = While {
                    body: body.clone(),
                    ..w.clone()
                };
                self.env.beta.insert(w.id.clone(), stored);
                let id = self.draw(w.key, rule)?;
                if let Some(m) = id {
                    self.aux.push_w(m, false);
                }
                w.decided = Some(v);
                w.body = body;
                (
                    (
                        id,
                        id.map(|m| format!("push W ({m},F)")).unwrap_or_default(),
                    ),
                    None,
                )
            }
            ("W2", Stmt::While(w)) => {
                let mut stored = self.beta_copy(&w.id)?;
                if reverse {
                    let m = self.consume(w.key, rule)?;
                    let v = self.aux.pop_w(m)?;
                    stored.body = ire_l(&stored.body, &mut self.counters)?;
                    w.decided = Some(v);
                    w.body = stored.body.clone();
                    self.env.beta.insert(w.id.clone(), stored);
                    ((Some(m), format!("pop W ({m},{})", flag(v))), None)
                } else {
                    let v = self.eval_b(&w.cond, &w.path)?;
                    stored.body = re_l(&stored.body, &mut self.counters);
                    let id = self.draw(w.key, rule)?;
                    if let Some(m) = id {
                        self.aux.push_w(m, true);
                    }
                    w.decided = Some(v);
                    w.body = stored.body.clone();
                    self.env.beta.insert(w.id.clone(), stored);
                    (
                        (
                            id,
                            id.map(|m| format!("push W ({m},T)")).unwrap_or_default(),
                        ),
                        None,
                    )
                }
            }
            ("W4", Stmt::While(w)) => {
                let stored = self.beta_copy(&w.id)?;
                (
                    (None, String::new()),
                    Some(Program::single(Stmt::While(stored))),
                )
            }
            ("W5", Stmt::While(w)) => {
                let stored = self.beta_copy(&w.id)?;
                let mut applied = (None, String::new());
                if !reverse {
                    if let Some(m) = self.draw(w.key, rule)? {
                        let info = get_ai(&stored.body, &self.table, Orientation::Forward);
                        applied = (Some(m), format!("push WI ({m},{} stacks)", info.len()));
                        self.aux.push_wi(m, info);
                    }
                }
                self.env.beta.remove(&w.id);
                (applied, skip)
            }
            ("B1", Stmt::Block(b)) => {
                let b = std::mem::replace(
                    b,
                    Block {
                        id: b.id.clone(),
                        var_decls: Vec::new(),
                        proc_decls: Vec::new(),
                        body: Program::Empty,
                        proc_removals: Vec::new(),
                        var_removals: Vec::new(),
                    },
                );
                let singles = |v: Vec<Stmt>| v.into_iter().map(Program::single).collect::<Vec<_>>();
                let mut items = singles(b.var_decls);
                items.extend(singles(b.proc_decls));
                items.push(b.body);
                items.extend(singles(b.proc_removals));
                items.extend(singles(b.var_removals));
                let body = Program::from_items(items);
                let body = if matches!(body, Program::Empty) {
                    Program::skip()
                } else {
                    body
                };
                (
                    (None, String::new()),
                    Some(Program::single(Stmt::RunB(body))),
                )
            }
            ("B3", Stmt::RunB(_)) => ((None, String::new()), skip),
            ("L1", Stmt::VarDecl(d)) => {
                let (id, v, effect) = if reverse {
                    let m = self.consume(d.key, rule)?;
                    let v = self.aux.pop_var(&d.var, m)?;
                    (Some(m), v, format!("pop {} ({m},{v})", d.var))
                } else {
                    (self.draw(d.key, rule)?, d.value, String::new())
                };
                let l = self.counters.next_loc();
                self.env.sigma.insert(l, v);
                let key = VarKey {
                    name: d.var.clone(),
                    block: d.path.head().cloned(),
                };
                self.env.gamma.insert(key, l);
                ((id, effect), skip)
            }
            ("L2", Stmt::ProcDecl(d)) => {
                let id = if reverse {
                    Some(self.consume(d.key, rule)?)
                } else {
                    self.draw(d.key, rule)?
                };
                self.env.mu.insert(
                    d.id.clone(),
                    ProcEntry {
                        name: d.name.clone(),
                        body: d.body.clone(),
                    },
                );
                self.env.proc_scope.insert(d.id.clone(), d.path.clone());
                ((id, String::new()), skip)
            }
            ("H1", Stmt::VarRemove(d)) => {
                let key = VarKey {
                    name: d.var.clone(),
                    block: d.path.head().cloned(),
                };
                let l = *self.env.gamma.get(&key).ok_or_else(|| {
                    crate::env::EnvError::UnboundVariable {
                        name: d.var.clone(),
                        path: d.path.clone(),
                    }
                })?;
                let fin = self.env.sigma.get(&l).copied().unwrap_or(0);
                let mut applied = (None, String::new());
                if reverse {
                    applied.0 = Some(self.consume(d.key, rule)?);
                } else if let Some(m) = self.draw(d.key, rule)? {
                    self.aux.push_var(&d.var, m, fin);
                    applied = (Some(m), format!("push {} ({m},{fin})", d.var));
                }
                self.env.gamma.remove(&key);
                self.env.sigma.insert(l, 0);
                self.counters.free_loc(l);
                (applied, skip)
            }
            ("H2", Stmt::ProcRemove(d)) => {
                if !self.env.mu.contains_key(&d.id) {
                    return Err(EngineError::MissingProcedure(d.id.to_string()));
                }
                let id = if reverse {
                    Some(self.consume(d.key, rule)?)
                } else {
                    self.draw(d.key, rule)?
                };
                self.env.mu.remove(&d.id);
                self.env.proc_scope.remove(&d.id);
                ((id, String::new()), skip)
            }
            ("G1", Stmt::Call(c)) => {
                let pn = self.env.eval_p(&c.name, &c.path)?;
                let basis = self.env.mu[&pn].body.clone();
                let copy = re_p(&basis, &c.id);
                let copy = match self.mode {
                    Mode::Plain => copy,
                    _ => fresh_keys(&copy, &mut self.table),
                };
                let mut applied = (None, String::new());
                if reverse {
                    let m = self.consume(c.key, rule)?;
                    let info = self.aux.pop_pr(m)?;
                    set_ai(&copy, &info, &mut self.table, Orientation::Mirrored)?;
                    applied = (Some(m), format!("pop Pr ({m},{} stacks)", info.len()));
                }
                self.env.mu.insert(
                    c.id.clone(),
                    ProcEntry {
                        name: c.name.clone(),
                        body: copy.clone(),
                    },
                );
                self.copies.insert(c.id.clone(), copy.clone());
                let run = RunC {
                    id: c.id.clone(),
                    body: copy,
                    key: c.key,
                };
                (applied, Some(Program::single(Stmt::RunC(run))))
            }
            ("G3", Stmt::RunC(r)) => {
                let entry = self
                    .env
                    .mu
                    .get(&r.id)
                    .ok_or_else(|| EngineError::MissingProcedure(r.id.to_string()))?;
                let mut applied = (None, String::new());
                if !reverse {
                    let info = get_ai(&entry.body, &self.table, Orientation::Forward);
                    if let Some(m) = self.draw(r.key, rule)? {
                        applied = (Some(m), format!("push Pr ({m},{} stacks)", info.len()));
                        self.aux.push_pr(m, info);
                    }
                }
                self.env.mu.remove(&r.id);
                (applied, Some(Program::Single(Box::new(Stmt::Skip(None)))))
            }
            (_, s) => unreachable!("rule {rule} does not apply to {}", s.kind_name()),
        })
    }
}
