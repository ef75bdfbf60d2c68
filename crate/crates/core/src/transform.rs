//! Program-to-program functions: annotation, inversion, loop-body
//! versioning, procedure-body renaming and annotation-info transfer.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::env::{Counters, EnvError};
use crate::syntax::ast::*;
use crate::syntax::parser::construct_id_mut;
use crate::syntax::visit::{keys, walk_stmts, walk_stmts_mut, Orientation};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error("program is already annotated")]
    AlreadyAnnotated,
    #[error("program is not annotated")]
    NotAnnotated,
    #[error("identifier `{id}` lacks the prefix `{prefix}`")]
    MissingPrefix { id: String, prefix: String },
    #[error(
        "annotation info has {found} entries but the program has {expected} annotatable statements"
    )]
    ArityMismatch { expected: usize, found: usize },
    #[error("no entry for `{0}`")]
    MissingKey(String),
    #[error("stored copy and executing copy differ in structure")]
    StructureMismatch,
    #[error(transparent)]
    Env(#[from] EnvError),
}

/// Identifier stacks indexed by [`StmtKey`]; the top of a stack is its last
/// element.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AnnotationTable {
    stacks: Vec<Vec<u64>>,
}

impl AnnotationTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh_key(&mut self) -> StmtKey {
        self.stacks.push(Vec::new());
        StmtKey(self.stacks.len() as u32 - 1)
    }

    pub fn len(&self) -> usize {
        self.stacks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stacks.is_empty()
    }

    pub fn stack(&self, k: StmtKey) -> &[u64] {
        self.stacks
            .get(k.0 as usize)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn top(&self, k: StmtKey) -> Option<u64> {
        self.stack(k).last().copied()
    }

    pub fn push(&mut self, k: StmtKey, id: u64) {
        if let Some(s) = self.stacks.get_mut(k.0 as usize) {
            s.push(id);
        }
    }

    pub fn pop(&mut self, k: StmtKey) -> Option<u64> {
        self.stacks.get_mut(k.0 as usize).and_then(Vec::pop)
    }

    pub fn set(&mut self, k: StmtKey, ids: Vec<u64>) {
        if let Some(s) = self.stacks.get_mut(k.0 as usize) {
            *s = ids;
        }
    }

    pub fn contains(&self, k: StmtKey) -> bool {
        (k.0 as usize) < self.stacks.len()
    }
}

/// Snapshot of the stacks of a program's annotatable statements, in
/// traversal order.
pub type AnnotationInfo = Vec<(StmtKey, Vec<u64>)>;

fn is_annotatable(s: &Stmt) -> bool {
    !matches!(s, Stmt::Block(_) | Stmt::RunB(_))
}

fn set_key(s: &mut Stmt, k: Option<StmtKey>) {
    match s {
        Stmt::Skip(key) => *key = k,
        Stmt::Assign(a) => a.key = k,
        Stmt::If(i) => i.key = k,
        Stmt::While(w) => w.key = k,
        Stmt::VarDecl(v) | Stmt::VarRemove(v) => v.key = k,
        Stmt::ProcDecl(d) | Stmt::ProcRemove(d) => d.key = k,
        Stmt::Call(c) => c.key = k,
        Stmt::RunC(r) => r.key = k,
        Stmt::Block(_) | Stmt::RunB(_) => {}
    }
}

/// Give every annotatable statement a fresh, empty identifier stack.
pub fn ann(p: &Program, table: &mut AnnotationTable) -> Result<Program, TransformError> {
    let mut annotated = false;
    walk_stmts(p, Orientation::Forward, &mut |s| {
        annotated |= s.key().is_some()
    });
    if annotated {
        return Err(TransformError::AlreadyAnnotated);
    }
    let mut out = p.clone();
    walk_stmts_mut(&mut out, &mut |s| {
        if is_annotatable(s) {
            set_key(s, Some(table.fresh_key()));
        }
    });
    Ok(out)
}

/// Drop all statement keys.
pub fn remove_ann(p: &Program) -> Program {
    let mut out = p.clone();
    walk_stmts_mut(&mut out, &mut |s| set_key(s, None));
    out
}

pub fn is_annotated(p: &Program) -> bool {
    let mut all = true;
    let mut any = false;
    walk_stmts(p, Orientation::Forward, &mut |s| {
        if is_annotatable(s) {
            any = true;
            all &= s.key().is_some();
        }
    });
    any && all
}

/// Invert an executed annotated program. Statement keys, and therefore the
/// identifier stacks, are carried over unchanged.
pub fn inv(p: &Program) -> Result<Program, TransformError> {
    if !is_annotated(p) {
        return Err(TransformError::NotAnnotated);
    }
    Ok(inv_program(p))
}

/// Structural inversion without the annotation check, for comparing
/// stored bodies.
pub fn inv_structure(p: &Program) -> Program {
    inv_program(p)
}

fn inv_program(p: &Program) -> Program {
    match p {
        Program::Empty => Program::Empty,
        Program::Single(s) => Program::single(inv_stmt(s)),
        Program::Seq(a, b) => Program::then(inv_program(b), inv_program(a)),
        Program::Par(a, b) => Program::par(inv_program(a), inv_program(b)),
    }
}

fn inv_list(list: &[Stmt]) -> Vec<Stmt> {
    list.iter().rev().map(inv_stmt).collect()
}

fn inv_stmt(s: &Stmt) -> Stmt {
    match s {
        Stmt::Skip(_) | Stmt::Assign(_) | Stmt::Call(_) => s.clone(),
        Stmt::If(i) => Stmt::If(If {
            then_branch: inv_program(&i.then_branch),
            else_branch: inv_program(&i.else_branch),
            ..i.clone()
        }),
        Stmt::While(w) => Stmt::While(While {
            body: inv_program(&w.body),
            ..w.clone()
        }),
        Stmt::Block(b) => Stmt::Block(Block {
            id: b.id.clone(),
            var_decls: inv_list(&b.var_removals),
            proc_decls: inv_list(&b.proc_removals),
            body: inv_program(&b.body),
            proc_removals: inv_list(&b.proc_decls),
            var_removals: inv_list(&b.var_decls),
        }),
        Stmt::VarDecl(v) => Stmt::VarRemove(v.clone()),
        Stmt::VarRemove(v) => Stmt::VarDecl(v.clone()),
        Stmt::ProcDecl(d) => Stmt::ProcRemove(ProcDecl {
            body: inv_program(&d.body),
            ..d.clone()
        }),
        Stmt::ProcRemove(d) => Stmt::ProcDecl(ProcDecl {
            body: inv_program(&d.body),
            ..d.clone()
        }),
        Stmt::RunB(body) => Stmt::RunB(inv_program(body)),
        Stmt::RunC(r) => Stmt::RunC(RunC {
            body: inv_program(&r.body),
            ..r.clone()
        }),
    }
}

fn paths_mut(s: &mut Stmt) -> Option<&mut Path> {
    match s {
        Stmt::Assign(a) => Some(&mut a.path),
        Stmt::If(i) => Some(&mut i.path),
        Stmt::While(w) => Some(&mut w.path),
        Stmt::VarDecl(v) | Stmt::VarRemove(v) => Some(&mut v.path),
        Stmt::ProcDecl(d) | Stmt::ProcRemove(d) => Some(&mut d.path),
        Stmt::Call(c) => Some(&mut c.path),
        _ => None,
    }
}

/// Rename every construct identifier of `p` with `f`, applying the same new
/// identifier to repeated occurrences, and rewrite path elements naming a
/// renamed block.
fn rename(
    p: &Program,
    f: &mut dyn FnMut(&ConstructId) -> Result<ConstructId, TransformError>,
) -> Result<Program, TransformError> {
    let mut out = p.clone();
    let mut map: BTreeMap<ConstructId, ConstructId> = BTreeMap::new();
    let mut err = None;
    walk_stmts_mut(&mut out, &mut |s| {
        if err.is_some() {
            return;
        }
        if let Some(id) = construct_id_mut(s) {
            let new = match map.get(id) {
                Some(n) => n.clone(),
                None => match f(id) {
                    Ok(n) => {
                        map.insert(id.clone(), n.clone());
                        n
                    }
                    Err(e) => {
                        err = Some(e);
                        return;
                    }
                },
            };
            *id = new;
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    walk_stmts_mut(&mut out, &mut |s| {
        if let Some(path) = paths_mut(s) {
            for b in &mut path.0 {
                if let Some(n) = map.get(b) {
                    *b = n.clone();
                }
            }
        }
    });
    Ok(out)
}

/// Loop-body versioning: every construct gets the next version of its name.
pub fn re_l(p: &Program, counters: &mut Counters) -> Program {
    rename(p, &mut |id| {
        let v = counters.next_version(&id.version_key());
        Ok(id.clone().with_version(v))
    })
    .expect("versioning cannot fail")
}

/// Undo one [`re_l`]: every construct gets the previous version of its name.
pub fn ire_l(p: &Program, counters: &mut Counters) -> Result<Program, TransformError> {
    rename(p, &mut |id| {
        let v = counters.previous_version(&id.version_key())?;
        Ok(id.clone().with_version(v))
    })
}

/// Give every construct the version its counter currently holds.
pub fn at_current_versions(p: &Program, counters: &Counters) -> Program {
    rename(p, &mut |id| {
        let v = counters.current_version(&id.version_key());
        Ok(id.clone().with_version(v))
    })
    .expect("versioning cannot fail")
}

/// Procedure-body renaming: prefix every construct with the call's tokens.
pub fn re_p(p: &Program, cn: &ConstructId) -> Program {
    let tokens = cn.tokens();
    rename(p, &mut |id| {
        let mut prefix = tokens.clone();
        prefix.extend(id.prefix.iter().cloned());
        Ok(id.clone().with_prefix(prefix))
    })
    .expect("renaming cannot fail")
}

/// Undo [`re_p`].
pub fn ire_p(p: &Program, cn: &ConstructId) -> Result<Program, TransformError> {
    let tokens = cn.tokens();
    rename(p, &mut |id| {
        if id.prefix.len() < tokens.len() || id.prefix[..tokens.len()] != tokens[..] {
            return Err(TransformError::MissingPrefix {
                id: id.to_string(),
                prefix: tokens.join(":"),
            });
        }
        Ok(id.clone().with_prefix(id.prefix[tokens.len()..].to_vec()))
    })
}

/// Replace every key of `p` by a fresh one whose stack starts as a copy of
/// the old one.
pub fn fresh_keys(p: &Program, table: &mut AnnotationTable) -> Program {
    let mut out = p.clone();
    walk_stmts_mut(&mut out, &mut |s| {
        if let Some(old) = s.key() {
            let ids = table.stack(old).to_vec();
            let k = table.fresh_key();
            table.set(k, ids);
            set_key(s, Some(k));
        }
    });
    out
}

pub fn get_ai(p: &Program, table: &AnnotationTable, orient: Orientation) -> AnnotationInfo {
    keys(p, orient)
        .into_iter()
        .map(|k| (k, table.stack(k).to_vec()))
        .collect()
}

/// Write `info` positionally onto the statements of `p`.
pub fn set_ai(
    p: &Program,
    info: &AnnotationInfo,
    table: &mut AnnotationTable,
    orient: Orientation,
) -> Result<(), TransformError> {
    let ks = keys(p, orient);
    if ks.len() != info.len() {
        return Err(TransformError::ArityMismatch {
            expected: ks.len(),
            found: info.len(),
        });
    }
    for (k, (_, ids)) in ks.into_iter().zip(info) {
        table.set(k, ids.clone());
    }
    Ok(())
}

/// Statement kinds in pre-order, ignoring identifiers and keys.
fn shape(p: &Program) -> Vec<&'static str> {
    let mut out = Vec::new();
    walk_stmts(p, Orientation::Forward, &mut |s| out.push(s.kind_name()));
    out
}

/// Copy the annotation state of `executing` onto `stored`.
pub fn reflect(
    stored: &Program,
    executing: &Program,
    table: &mut AnnotationTable,
) -> Result<(), TransformError> {
    if shape(stored) != shape(executing) {
        return Err(TransformError::StructureMismatch);
    }
    let info = get_ai(executing, table, Orientation::Forward);
    set_ai(stored, &info, table, Orientation::Forward)
}

/// Reflect an executing loop body into the copy held in β.
pub fn ref_w(
    beta: &BTreeMap<ConstructId, While>,
    wn: &ConstructId,
    executing: &Program,
    table: &mut AnnotationTable,
) -> Result<(), TransformError> {
    let w = beta
        .get(wn)
        .ok_or_else(|| TransformError::MissingKey(wn.to_string()))?;
    reflect(&w.body, executing, table)
}

/// Reflect an executing call body into the copy held in μ.
pub fn ref_c(
    mu: &BTreeMap<ConstructId, crate::env::ProcEntry>,
    cn: &ConstructId,
    executing: &Program,
    table: &mut AnnotationTable,
) -> Result<(), TransformError> {
    let e = mu
        .get(cn)
        .ok_or_else(|| TransformError::MissingKey(cn.to_string()))?;
    reflect(&e.body, executing, table)
}

/// Every construct identifier occurring in `p`.
pub fn construct_ids(p: &Program) -> BTreeSet<ConstructId> {
    let mut out = BTreeSet::new();
    let mut q = p.clone();
    walk_stmts_mut(&mut q, &mut |s| {
        if let Some(id) = construct_id_mut(s) {
            out.insert(id.clone());
        }
    });
    out
}
