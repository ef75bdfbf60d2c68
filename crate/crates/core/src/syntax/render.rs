//! Deterministic pretty-printer.
//!
//! Every list item ends with `;` on its own line and nested bodies are
//! indented by two spaces. With an annotation table, annotatable statements
//! get a `(path,[ids])` suffix listing their stack bottom to top.

use std::fmt::Write;

use super::ast::*;
use crate::transform::AnnotationTable;

pub fn render(p: &Program) -> String {
    Renderer { table: None }.program(p)
}

pub fn render_annotated(p: &Program, table: &AnnotationTable) -> String {
    Renderer { table: Some(table) }.program(p)
}

pub fn render_arith(e: &ArithExpr) -> String {
    let mut s = String::new();
    arith(&mut s, e);
    s
}

pub fn render_bool(b: &BoolExpr) -> String {
    let mut s = String::new();
    boolean(&mut s, b);
    s
}

fn arith(out: &mut String, e: &ArithExpr) {
    match e {
        ArithExpr::Var(v) => out.push_str(v),
        ArithExpr::Int(n) => {
            let _ = write!(out, "{n}");
        }
        ArithExpr::Paren(inner) => {
            out.push('(');
            arith(out, inner);
            out.push(')');
        }
        ArithExpr::Bin(op, a, b) => {
            arith(out, a);
            let _ = write!(out, " {} ", op.symbol());
            arith(out, b);
        }
    }
}

fn boolean(out: &mut String, b: &BoolExpr) {
    match b {
        BoolExpr::True => out.push_str("true"),
        BoolExpr::False => out.push_str("false"),
        BoolExpr::Not(inner) => {
            out.push_str("not ");
            boolean(out, inner);
        }
        BoolExpr::Paren(inner) => {
            out.push('(');
            boolean(out, inner);
            out.push(')');
        }
        BoolExpr::Cmp(op, l, r) => {
            arith(out, l);
            let _ = write!(out, " {} ", op.symbol());
            arith(out, r);
        }
        BoolExpr::And(l, r) | BoolExpr::Or(l, r) => {
            boolean(out, l);
            out.push_str(if matches!(b, BoolExpr::And(..)) {
                " and "
            } else {
                " or "
            });
            boolean(out, r);
        }
    }
}

struct Renderer<'a> {
    table: Option<&'a AnnotationTable>,
}

impl Renderer<'_> {
    fn program(&self, p: &Program) -> String {
        let mut out = String::new();
        self.items(&mut out, p, 0);
        out
    }

    fn indent(out: &mut String, depth: usize) {
        for _ in 0..depth {
            out.push_str("  ");
        }
    }

    /// Each top-level item of `p` on its own line(s), terminated by `;`.
    fn items(&self, out: &mut String, p: &Program, depth: usize) {
        for item in p.items() {
            Self::indent(out, depth);
            self.item(out, item, depth);
            out.push_str(";\n");
        }
    }

    fn item(&self, out: &mut String, p: &Program, depth: usize) {
        match p {
            Program::Empty => out.push_str("skip"),
            Program::Single(s) => self.stmt(out, s, depth),
            Program::Par(..) => {
                out.push_str("par ");
                let mut cur = p;
                let mut first = true;
                loop {
                    let (part, rest) = match cur {
                        Program::Par(a, b) => (a.as_ref(), Some(b.as_ref())),
                        other => (other, None),
                    };
                    if !first {
                        out.push(' ');
                    }
                    first = false;
                    out.push_str("{\n");
                    self.items(out, part, depth + 1);
                    Self::indent(out, depth);
                    out.push('}');
                    match rest {
                        Some(r) => cur = r,
                        None => break,
                    }
                }
            }
            Program::Seq(..) => {
                // A sequence nested as the head of another sequence.
                out.push_str("{\n");
                self.items(out, p, depth + 1);
                Self::indent(out, depth);
                out.push('}');
            }
        }
    }

    fn list(&self, out: &mut String, list: &[Stmt], depth: usize) {
        for s in list {
            Self::indent(out, depth);
            self.stmt(out, s, depth);
            out.push_str(";\n");
        }
    }

    fn suffix(&self, out: &mut String, path: &Path, key: Option<StmtKey>) {
        if let (Some(table), Some(k)) = (self.table, key) {
            let ids: Vec<String> = table.stack(k).iter().map(u64::to_string).collect();
            let _ = write!(out, " ({},[{}])", path, ids.join(","));
        }
    }

    fn cond(&self, out: &mut String, cond: &BoolExpr, decided: Option<bool>) {
        match decided {
            Some(true) => out.push_str("[T]"),
            Some(false) => out.push_str("[F]"),
            None => boolean(out, cond),
        }
    }

    fn body(&self, out: &mut String, p: &Program, depth: usize) {
        out.push('\n');
        self.items(out, p, depth + 1);
        Self::indent(out, depth);
    }

    fn stmt(&self, out: &mut String, s: &Stmt, depth: usize) {
        match s {
            Stmt::Skip(_) => out.push_str("skip"),
            Stmt::Assign(a) => {
                let _ = write!(out, "{} = ", a.var);
                arith(out, &a.expr);
                self.suffix(out, &a.path, a.key);
            }
            Stmt::If(i) => {
                let _ = write!(out, "if {} ", i.id);
                self.cond(out, &i.cond, i.decided);
                out.push_str(" then");
                self.body(out, &i.then_branch, depth);
                if !i.else_branch.is_skip() {
                    out.push_str("else");
                    self.body(out, &i.else_branch, depth);
                }
                out.push_str("end");
                self.suffix(out, &i.path, i.key);
            }
            Stmt::While(w) => {
                let _ = write!(out, "while {} ", w.id);
                self.cond(out, &w.cond, w.decided);
                out.push_str(" do");
                self.body(out, &w.body, depth);
                out.push_str("end");
                self.suffix(out, &w.path, w.key);
            }
            Stmt::Block(b) => {
                let _ = writeln!(out, "begin {}", b.id);
                self.list(out, &b.var_decls, depth + 1);
                self.list(out, &b.proc_decls, depth + 1);
                self.items(out, &b.body, depth + 1);
                self.list(out, &b.proc_removals, depth + 1);
                self.list(out, &b.var_removals, depth + 1);
                Self::indent(out, depth);
                out.push_str("end");
            }
            Stmt::VarDecl(v) | Stmt::VarRemove(v) => {
                let kw = if matches!(s, Stmt::VarDecl(_)) {
                    "var"
                } else {
                    "remove"
                };
                let _ = write!(out, "{kw} {} = {}", v.var, v.value);
                self.suffix(out, &v.path, v.key);
            }
            Stmt::ProcDecl(d) | Stmt::ProcRemove(d) => {
                let kw = if matches!(s, Stmt::ProcDecl(_)) {
                    "proc"
                } else {
                    "remove"
                };
                let _ = write!(out, "{kw} {} {} is", d.id, d.name);
                self.body(out, &d.body, depth);
                out.push_str("end");
                self.suffix(out, &d.path, d.key);
            }
            Stmt::Call(c) => {
                let _ = write!(out, "call {} {}", c.id, c.name);
                self.suffix(out, &c.path, c.key);
            }
            Stmt::RunB(body) => {
                out.push_str("runB");
                self.body(out, body, depth);
                out.push_str("end");
            }
            Stmt::RunC(r) => {
                let _ = write!(out, "runC {}", r.id);
                self.body(out, &r.body, depth);
                out.push_str("end");
                if let (Some(table), Some(k)) = (self.table, r.key) {
                    let ids: Vec<String> = table.stack(k).iter().map(u64::to_string).collect();
                    let _ = write!(out, " [{}]", ids.join(","));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;

    #[test]
    fn renders_restaurant_layout() {
        let p = parse_program("par { while ((m - c - r - 1) >= 0) do c = c + 1 end } { r = 2 }")
            .unwrap();
        let expected = "\
par {
  while w1.0 ((m - c - r - 1) >= 0) do
    c = c + 1;
  end;
} {
  r = 2;
};
";
        assert_eq!(render(&p), expected);
    }

    #[test]
    fn render_then_parse_is_identity() {
        let srcs = [
            "skip",
            "x = -3 * (y + 1); if not x == 2 or y < 1 then x = 1 else x = 2 end",
            "begin b4 var x = 1; proc q is call q end; x = x + 1; call c9 q end",
            "par { a = 1 } { par { b = 2 } { c = 3 } } { d = 4 }; e = 5",
            "while (x > 0 and (y != 1)) do x = x - 1 end",
        ];
        for src in srcs {
            let p = parse_program(src).unwrap();
            let text = render(&p);
            assert_eq!(parse_program(&text).unwrap(), p, "{text}");
        }
    }
}
