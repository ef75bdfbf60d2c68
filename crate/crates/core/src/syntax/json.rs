//! Canonical JSON dump of the AST: one object per node with a `kind` field,
//! construct identifiers and paths as strings.

use serde_json::{json, Map, Value};

use super::ast::*;

pub fn program_to_json(p: &Program) -> Value {
    match p {
        Program::Empty => json!({"kind": "Empty"}),
        Program::Single(s) => stmt_to_json(s),
        Program::Seq(..) => json!({
            "kind": "Seq",
            "items": p.items().into_iter().map(program_to_json).collect::<Vec<_>>(),
        }),
        Program::Par(a, b) => json!({
            "kind": "Par",
            "left": program_to_json(a),
            "right": program_to_json(b),
        }),
    }
}

fn list(l: &[Stmt]) -> Value {
    Value::Array(l.iter().map(stmt_to_json).collect())
}

pub fn arith_to_json(e: &ArithExpr) -> Value {
    match e {
        ArithExpr::Var(v) => json!({"kind": "Var", "name": v}),
        ArithExpr::Int(n) => json!({"kind": "Int", "value": n}),
        ArithExpr::Paren(i) => json!({"kind": "Paren", "expr": arith_to_json(i)}),
        ArithExpr::Bin(op, a, b) => json!({
            "kind": "BinOp",
            "op": op.symbol(),
            "left": arith_to_json(a),
            "right": arith_to_json(b),
        }),
    }
}

pub fn bool_to_json(b: &BoolExpr) -> Value {
    match b {
        BoolExpr::True => json!({"kind": "True"}),
        BoolExpr::False => json!({"kind": "False"}),
        BoolExpr::Not(i) => json!({"kind": "Not", "expr": bool_to_json(i)}),
        BoolExpr::Paren(i) => json!({"kind": "Paren", "expr": bool_to_json(i)}),
        BoolExpr::Cmp(op, l, r) => json!({
            "kind": "Cmp",
            "op": op.symbol(),
            "left": arith_to_json(l),
            "right": arith_to_json(r),
        }),
        BoolExpr::And(l, r) => {
            json!({"kind": "And", "left": bool_to_json(l), "right": bool_to_json(r)})
        }
        BoolExpr::Or(l, r) => {
            json!({"kind": "Or", "left": bool_to_json(l), "right": bool_to_json(r)})
        }
    }
}

pub fn stmt_to_json(s: &Stmt) -> Value {
    let mut obj = Map::new();
    obj.insert("kind".into(), json!(s.kind_name()));
    if let Some(k) = s.key() {
        obj.insert("key".into(), json!(k.0));
    }
    let mut put = |k: &str, v: Value| {
        obj.insert(k.to_string(), v);
    };
    match s {
        Stmt::Skip(_) => {}
        Stmt::Assign(a) => {
            put("var", json!(a.var));
            put("expr", arith_to_json(&a.expr));
            put("path", json!(a.path.to_string()));
        }
        Stmt::If(i) => {
            put("id", json!(i.id.to_string()));
            put("cond", bool_to_json(&i.cond));
            if let Some(d) = i.decided {
                put("decided", json!(d));
            }
            put("then", program_to_json(&i.then_branch));
            put("else", program_to_json(&i.else_branch));
            put("path", json!(i.path.to_string()));
        }
        Stmt::While(w) => {
            put("id", json!(w.id.to_string()));
            put("cond", bool_to_json(&w.cond));
            if let Some(d) = w.decided {
                put("decided", json!(d));
            }
            put("body", program_to_json(&w.body));
            put("path", json!(w.path.to_string()));
        }
        Stmt::Block(b) => {
            put("id", json!(b.id.to_string()));
            put("varDecls", list(&b.var_decls));
            put("procDecls", list(&b.proc_decls));
            put("body", program_to_json(&b.body));
            put("procRemovals", list(&b.proc_removals));
            put("varRemovals", list(&b.var_removals));
        }
        Stmt::VarDecl(v) | Stmt::VarRemove(v) => {
            put("var", json!(v.var));
            put("value", json!(v.value));
            put("path", json!(v.path.to_string()));
        }
        Stmt::ProcDecl(d) | Stmt::ProcRemove(d) => {
            put("id", json!(d.id.to_string()));
            put("name", json!(d.name));
            put("body", program_to_json(&d.body));
            put("path", json!(d.path.to_string()));
        }
        Stmt::Call(c) => {
            put("id", json!(c.id.to_string()));
            put("name", json!(c.name));
            put("path", json!(c.path.to_string()));
        }
        Stmt::RunB(body) => put("body", program_to_json(body)),
        Stmt::RunC(r) => {
            put("id", json!(r.id.to_string()));
            put("body", program_to_json(&r.body));
        }
    }
    Value::Object(obj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;

    #[test]
    fn dump_uses_kind_and_string_ids() {
        let p = parse_program("while x > 0 do x = x - 1 end; skip").unwrap();
        let v = program_to_json(&p);
        assert_eq!(v["kind"], "Seq");
        assert_eq!(v["items"][0]["kind"], "While");
        assert_eq!(v["items"][0]["id"], "w1.0");
        assert_eq!(v["items"][0]["path"], "λ");
        assert_eq!(v["items"][1]["kind"], "Skip");
    }
}
