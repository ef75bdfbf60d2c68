//! Tree traversals used by the transforms, the validator and the engines.

use super::ast::{Program, Stmt};

/// Traversal direction over sequences.
///
/// `Mirrored` visits every sequence (and the five block sections) back to
/// front. Mirrored traversal of an inverted program meets statements in the
/// same order as pre-order traversal of the program it was inverted from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Forward,
    Mirrored,
}

/// Visit every `Program` node, outer before inner.
pub fn walk_program(p: &Program, f: &mut dyn FnMut(&Program)) {
    f(p);
    match p {
        Program::Empty => {}
        Program::Single(s) => {
            for_each_child_program(s, &mut |c| walk_program(c, f));
        }
        Program::Seq(a, b) | Program::Par(a, b) => {
            walk_program(a, f);
            walk_program(b, f);
        }
    }
}

fn for_each_child_program(s: &Stmt, f: &mut dyn FnMut(&Program)) {
    match s {
        Stmt::If(i) => {
            f(&i.then_branch);
            f(&i.else_branch);
        }
        Stmt::While(w) => f(&w.body),
        Stmt::Block(b) => {
            for d in b.var_decls.iter().chain(&b.proc_decls) {
                for_each_child_program(d, f);
            }
            f(&b.body);
            for d in b.proc_removals.iter().chain(&b.var_removals) {
                for_each_child_program(d, f);
            }
        }
        Stmt::ProcDecl(p) | Stmt::ProcRemove(p) => f(&p.body),
        Stmt::RunB(body) => f(body),
        Stmt::RunC(r) => f(&r.body),
        _ => {}
    }
}

/// Visit every statement in pre-order under the given orientation.
pub fn walk_stmts(p: &Program, orient: Orientation, f: &mut dyn FnMut(&Stmt)) {
    match p {
        Program::Empty => {}
        Program::Single(s) => walk_stmt(s, orient, f),
        Program::Seq(a, b) => match orient {
            Orientation::Forward => {
                walk_stmts(a, orient, f);
                walk_stmts(b, orient, f);
            }
            Orientation::Mirrored => {
                walk_stmts(b, orient, f);
                walk_stmts(a, orient, f);
            }
        },
        Program::Par(a, b) => {
            walk_stmts(a, orient, f);
            walk_stmts(b, orient, f);
        }
    }
}

fn walk_list(list: &[Stmt], orient: Orientation, f: &mut dyn FnMut(&Stmt)) {
    match orient {
        Orientation::Forward => list.iter().for_each(|s| walk_stmt(s, orient, f)),
        Orientation::Mirrored => list.iter().rev().for_each(|s| walk_stmt(s, orient, f)),
    }
}

fn walk_stmt(s: &Stmt, orient: Orientation, f: &mut dyn FnMut(&Stmt)) {
    f(s);
    match s {
        Stmt::If(i) => {
            walk_stmts(&i.then_branch, orient, f);
            walk_stmts(&i.else_branch, orient, f);
        }
        Stmt::While(w) => walk_stmts(&w.body, orient, f),
        Stmt::Block(b) => match orient {
            Orientation::Forward => {
                walk_list(&b.var_decls, orient, f);
                walk_list(&b.proc_decls, orient, f);
                walk_stmts(&b.body, orient, f);
                walk_list(&b.proc_removals, orient, f);
                walk_list(&b.var_removals, orient, f);
            }
            Orientation::Mirrored => {
                walk_list(&b.var_removals, orient, f);
                walk_list(&b.proc_removals, orient, f);
                walk_stmts(&b.body, orient, f);
                walk_list(&b.proc_decls, orient, f);
                walk_list(&b.var_decls, orient, f);
            }
        },
        Stmt::ProcDecl(p) | Stmt::ProcRemove(p) => walk_stmts(&p.body, orient, f),
        Stmt::RunB(body) => walk_stmts(body, orient, f),
        Stmt::RunC(r) => walk_stmts(&r.body, orient, f),
        _ => {}
    }
}

/// Visit every statement mutably, forward pre-order.
pub fn walk_stmts_mut(p: &mut Program, f: &mut dyn FnMut(&mut Stmt)) {
    match p {
        Program::Empty => {}
        Program::Single(s) => walk_stmt_mut(s, f),
        Program::Seq(a, b) | Program::Par(a, b) => {
            walk_stmts_mut(a, f);
            walk_stmts_mut(b, f);
        }
    }
}

fn walk_stmt_mut(s: &mut Stmt, f: &mut dyn FnMut(&mut Stmt)) {
    f(s);
    match s {
        Stmt::If(i) => {
            walk_stmts_mut(&mut i.then_branch, f);
            walk_stmts_mut(&mut i.else_branch, f);
        }
        Stmt::While(w) => walk_stmts_mut(&mut w.body, f),
        Stmt::Block(b) => {
            for d in b.var_decls.iter_mut().chain(b.proc_decls.iter_mut()) {
                walk_stmt_mut(d, f);
            }
            walk_stmts_mut(&mut b.body, f);
            for d in b.proc_removals.iter_mut().chain(b.var_removals.iter_mut()) {
                walk_stmt_mut(d, f);
            }
        }
        Stmt::ProcDecl(p) | Stmt::ProcRemove(p) => walk_stmts_mut(&mut p.body, f),
        Stmt::RunB(body) => walk_stmts_mut(body, f),
        Stmt::RunC(r) => walk_stmts_mut(&mut r.body, f),
        _ => {}
    }
}

/// Keys of all annotatable statements in traversal order.
pub fn keys(p: &Program, orient: Orientation) -> Vec<super::ast::StmtKey> {
    let mut out = Vec::new();
    walk_stmts(p, orient, &mut |s| {
        if let Some(k) = s.key() {
            out.push(k);
        }
    });
    out
}
