//! Atomic evaluation of arithmetic and boolean expressions.

use crate::env::Env;
use crate::syntax::ast::{ArithExpr, ArithOp, BoolExpr, CmpOp, Path};
use crate::syntax::render::render_arith;

use super::EngineError;

pub fn eval_arith(e: &ArithExpr, path: &Path, env: &Env) -> Result<i64, EngineError> {
    match e {
        ArithExpr::Var(x) => Ok(env.read(path, x)?),
        ArithExpr::Int(n) => Ok(*n),
        ArithExpr::Paren(inner) => eval_arith(inner, path, env),
        ArithExpr::Bin(op, a, b) => {
            let (l, r) = (eval_arith(a, path, env)?, eval_arith(b, path, env)?);
            let v = match op {
                ArithOp::Add => l.checked_add(r),
                ArithOp::Sub => l.checked_sub(r),
                ArithOp::Mul => l.checked_mul(r),
            };
            v.ok_or_else(|| EngineError::Overflow {
                expr: render_arith(e),
            })
        }
    }
}

pub fn eval_bool(b: &BoolExpr, path: &Path, env: &Env) -> Result<bool, EngineError> {
    Ok(match b {
        BoolExpr::True => true,
        BoolExpr::False => false,
        BoolExpr::Not(inner) | BoolExpr::Paren(inner) => {
            let v = eval_bool(inner, path, env)?;
            if matches!(b, BoolExpr::Not(_)) {
                !v
            } else {
                v
            }
        }
        BoolExpr::Cmp(op, l, r) => {
            let (l, r) = (eval_arith(l, path, env)?, eval_arith(r, path, env)?);
            match op {
                CmpOp::Eq => l == r,
                CmpOp::Gt => l > r,
                CmpOp::Ge => l >= r,
                CmpOp::Lt => l < r,
                CmpOp::Le => l <= r,
                CmpOp::Ne => l != r,
            }
        }
        // both operands are evaluated, so errors do not depend on the left value
        BoolExpr::And(l, r) => {
            let (l, r) = (eval_bool(l, path, env)?, eval_bool(r, path, env)?);
            l && r
        }
        BoolExpr::Or(l, r) => {
            let (l, r) = (eval_bool(l, path, env)?, eval_bool(r, path, env)?);
            l || r
        }
    })
}
