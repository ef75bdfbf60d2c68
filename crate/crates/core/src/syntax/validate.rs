//! Static well-formedness checks on a parsed or constructed program.

use std::collections::BTreeSet;
use std::fmt;

use super::ast::*;
use crate::transform::remove_ann;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticKind {
    DuplicateId,
    PathMismatch,
    RemovalMismatch,
    DuplicateProcName,
    ReservedForm,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.message)
    }
}

/// Check identifier uniqueness, paths and declaration mirroring. An empty
/// result means the program is valid source.
pub fn validate(p: &Program) -> Vec<Diagnostic> {
    let mut v = Validator {
        seen: BTreeSet::new(),
        out: Vec::new(),
        allow_runtime: false,
    };
    v.program(p, &mut Vec::new());
    v.out
}

/// As [`validate`], but accepts the `runB`/`runC` forms of residual terms.
pub fn validate_residual(p: &Program) -> Vec<Diagnostic> {
    let mut v = Validator {
        seen: BTreeSet::new(),
        out: Vec::new(),
        allow_runtime: true,
    };
    v.program(p, &mut Vec::new());
    v.out
}

struct Validator {
    seen: BTreeSet<ConstructId>,
    out: Vec<Diagnostic>,
    allow_runtime: bool,
}

impl Validator {
    fn report(&mut self, kind: DiagnosticKind, message: String) {
        self.out.push(Diagnostic { kind, message });
    }

    fn id(&mut self, id: &ConstructId) {
        if !self.seen.insert(id.clone()) {
            self.report(
                DiagnosticKind::DuplicateId,
                format!("construct identifier `{id}` occurs more than once"),
            );
        }
    }

    fn path(&mut self, what: &str, path: &Path, scope: &[ConstructId]) {
        let expected: Vec<ConstructId> = scope.iter().rev().cloned().collect();
        if path.0 != expected {
            self.report(
                DiagnosticKind::PathMismatch,
                format!("{what} has path {path}, expected {}", Path(expected)),
            );
        }
    }

    fn program(&mut self, p: &Program, scope: &mut Vec<ConstructId>) {
        match p {
            Program::Empty => {}
            Program::Single(s) => self.stmt(s, scope),
            Program::Seq(a, b) | Program::Par(a, b) => {
                self.program(a, scope);
                self.program(b, scope);
            }
        }
    }

    fn stmt(&mut self, s: &Stmt, scope: &mut Vec<ConstructId>) {
        match s {
            Stmt::Skip(_) => {}
            Stmt::Assign(a) => self.path(&format!("assignment to `{}`", a.var), &a.path, scope),
            Stmt::If(i) => {
                self.id(&i.id);
                self.path(&format!("conditional `{}`", i.id), &i.path, scope);
                self.program(&i.then_branch, scope);
                self.program(&i.else_branch, scope);
            }
            Stmt::While(w) => {
                self.id(&w.id);
                self.path(&format!("loop `{}`", w.id), &w.path, scope);
                self.program(&w.body, scope);
            }
            Stmt::Block(b) => self.block(b, scope),
            Stmt::VarDecl(v) | Stmt::VarRemove(v) => {
                self.path(&format!("declaration of `{}`", v.var), &v.path, scope)
            }
            Stmt::ProcDecl(d) => {
                self.id(&d.id);
                self.path(&format!("procedure `{}`", d.id), &d.path, scope);
                self.program(&d.body, scope);
            }
            Stmt::ProcRemove(d) => self.path(&format!("removal of `{}`", d.id), &d.path, scope),
            Stmt::Call(c) => {
                self.id(&c.id);
                self.path(&format!("call `{}`", c.id), &c.path, scope);
            }
            Stmt::RunB(body) => {
                if !self.allow_runtime {
                    self.report(
                        DiagnosticKind::ReservedForm,
                        "runB in source program".into(),
                    );
                }
                self.program(body, scope);
            }
            Stmt::RunC(r) => {
                if !self.allow_runtime {
                    self.report(
                        DiagnosticKind::ReservedForm,
                        format!("runC {} in source program", r.id),
                    );
                }
                self.program(&r.body, scope);
            }
        }
    }

    fn block(&mut self, b: &Block, scope: &mut Vec<ConstructId>) {
        self.id(&b.id);
        scope.push(b.id.clone());
        for d in b
            .var_decls
            .iter()
            .chain(&b.proc_decls)
            .chain(&b.proc_removals)
            .chain(&b.var_removals)
        {
            self.stmt(d, scope);
        }
        self.program(&b.body, scope);
        scope.pop();

        let var_pairs = |list: &[Stmt]| -> Vec<(String, i64)> {
            list.iter()
                .filter_map(|s| match s {
                    Stmt::VarDecl(v) | Stmt::VarRemove(v) => Some((v.var.clone(), v.value)),
                    _ => None,
                })
                .collect()
        };
        let mut decls = var_pairs(&b.var_decls);
        decls.reverse();
        let rems = var_pairs(&b.var_removals);
        if decls != rems {
            let missing: Vec<String> = decls
                .iter()
                .filter(|d| !rems.contains(d))
                .map(|(x, _)| x.clone())
                .collect();
            self.report(
                DiagnosticKind::RemovalMismatch,
                format!(
                    "block {}: variable removals do not mirror declarations (unmatched: {})",
                    b.id,
                    missing.join(", ")
                ),
            );
        }

        let procs = |list: &[Stmt]| -> Vec<(ConstructId, String, Program)> {
            list.iter()
                .filter_map(|s| match s {
                    Stmt::ProcDecl(d) | Stmt::ProcRemove(d) => {
                        Some((d.id.clone(), d.name.clone(), remove_ann(&d.body)))
                    }
                    _ => None,
                })
                .collect()
        };
        let mut pdecls = procs(&b.proc_decls);
        pdecls.reverse();
        if pdecls != procs(&b.proc_removals) {
            self.report(
                DiagnosticKind::RemovalMismatch,
                format!(
                    "block {}: procedure removals do not mirror declarations",
                    b.id
                ),
            );
        }
        let mut names = BTreeSet::new();
        for (_, name, _) in &pdecls {
            if !names.insert(name.clone()) {
                self.report(
                    DiagnosticKind::DuplicateProcName,
                    format!("block {}: procedure `{name}` declared twice", b.id),
                );
            }
        }
    }
}
