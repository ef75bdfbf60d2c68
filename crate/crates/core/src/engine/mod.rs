//! Small-step interpreters: forward-only, annotated forward and reverse.
//!
//! A [`Config`] holds the residual program and every environment. Callers
//! ask for the enabled redexes, pick one and [`Config::step`] it; the
//! [`run`] module loops this under a scheduling policy.

pub mod eval;
mod redex;
pub mod run;
mod step;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::env::{AuxStore, Counters, Env, EnvError};
use crate::scheduler::ScheduleError;
use crate::syntax::ast::*;
use crate::syntax::render::render;
use crate::transform::{ann, inv, AnnotationTable, TransformError};

pub use run::{run_to_completion, Bundle, Trace, DEFAULT_BUDGET};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("arithmetic overflow in `{expr}`")]
    Overflow { expr: String },
    #[error("no rule applies to non-terminal program:\n{residual}")]
    Stuck { residual: String },
    #[error("step budget of {budget} exceeded")]
    BudgetExceeded { budget: u64 },
    #[error("redex {0} is not enabled")]
    NotEnabled(RedexId),
    #[error("{rule}: statement stack top {found:?} does not match identifier {expected}")]
    GuardViolation {
        rule: String,
        expected: u64,
        found: Option<u64>,
    },
    #[error("{0} has no entry in β")]
    MissingLoopCopy(String),
    #[error("{0} has no entry in μ")]
    MissingProcedure(String),
    #[error("{rule} reached an unannotated statement")]
    Unannotated { rule: String },
    #[error("execution is not complete")]
    NotComplete,
    #[error("operation needs a {expected} configuration")]
    WrongMode { expected: Mode },
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Forward execution without state saving.
    Plain,
    /// Forward execution that records identifiers and reversal data.
    Annotated,
    /// Backtracking execution of an inverted program.
    Reverse,
}

impl Mode {
    fn suffix(self) -> &'static str {
        match self {
            Mode::Plain => "",
            Mode::Annotated => "a",
            Mode::Reverse => "r",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Plain => "plain",
            Mode::Annotated => "annotated",
            Mode::Reverse => "reverse",
        })
    }
}

/// A position where a rule can fire: child indices from the root of the
/// residual program, plus the rule name. Ordering is lexicographic on the
/// path, so outer and left positions come first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RedexId {
    pub path: Vec<u8>,
    pub rule: String,
}

impl RedexId {
    /// Whether firing this redex draws (annotated) or consumes (reverse) an
    /// identifier.
    pub fn is_m_rule(&self) -> bool {
        const FORWARD: &[&str] = &[
            "D1", "I4", "I5", "W1", "W2", "W5", "L1", "L2", "G3", "H1", "H2",
        ];
        const REVERSE: &[&str] = &["D1", "L1", "I1", "W1", "W2", "G1", "L2", "H1", "H2"];
        match self.rule.split_at(self.rule.len().saturating_sub(1)) {
            (base, "a") => FORWARD.contains(&base),
            (base, "r") => REVERSE.contains(&base),
            _ => false,
        }
    }
}

impl fmt::Display for RedexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p: Vec<String> = self.path.iter().map(u8::to_string).collect();
        write!(f, "[{}]@{}", self.rule, p.join("."))
    }
}

/// One applied rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub step: u64,
    pub rule: String,
    pub redex: RedexId,
    /// Identifier drawn or consumed; present exactly for m-rules.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub id: Option<u64>,
    #[serde(skip_serializing_if = "String::is_empty", default)]
    pub effect: String,
}

/// Residual program together with all environments of one execution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub mode: Mode,
    pub program: Program,
    pub env: Env,
    pub aux: AuxStore,
    pub counters: Counters,
    pub table: AnnotationTable,
    /// The program as it was when execution began, keyed into `table`.
    pub origin: Program,
    /// Renamed call bodies created so far, kept for display.
    pub copies: BTreeMap<ConstructId, Program>,
    /// Number of expression evaluations performed.
    pub eval_count: u64,
    pub steps: u64,
}

impl Config {
    fn bare(mode: Mode, program: Program) -> Config {
        Config {
            mode,
            origin: program.clone(),
            program,
            env: Env::default(),
            aux: AuxStore::default(),
            counters: Counters::default(),
            table: AnnotationTable::new(),
            copies: BTreeMap::new(),
            eval_count: 0,
            steps: 0,
        }
    }

    fn bind_globals(&mut self, init: &BTreeMap<String, i64>) {
        for x in free_globals(&self.program) {
            self.env.init_global(&mut self.counters, &x, 0);
        }
        for (x, v) in init {
            self.env.init_global(&mut self.counters, x, *v);
        }
    }

    /// Forward-only execution of an original program. Every free variable
    /// starts at 0 unless `init` says otherwise.
    pub fn plain(program: &Program, init: &BTreeMap<String, i64>) -> Config {
        let mut c = Config::bare(Mode::Plain, crate::transform::remove_ann(program));
        c.bind_globals(init);
        c
    }

    /// Annotated execution of `ann(program)`.
    pub fn annotated(
        program: &Program,
        init: &BTreeMap<String, i64>,
    ) -> Result<Config, EngineError> {
        let mut table = AnnotationTable::new();
        let annotated = ann(program, &mut table)?;
        let mut c = Config::bare(Mode::Annotated, annotated);
        c.table = table;
        c.bind_globals(init);
        Ok(c)
    }

    /// Reverse execution of the inversion of a completed annotated run,
    /// starting from that run's final environments and auxiliary store.
    pub fn reverse_of(fwd: &Config) -> Result<Config, EngineError> {
        let (executed, table) = fwd.executed_program()?;
        let inverted = inv(&executed)?;
        let mut counters = fwd.counters.clone();
        counters.prev_id = counters.next_id - 1;
        Ok(Config {
            mode: Mode::Reverse,
            origin: inverted.clone(),
            program: inverted,
            env: fwd.env.clone(),
            aux: fwd.aux.clone(),
            counters,
            table,
            copies: BTreeMap::new(),
            eval_count: 0,
            steps: 0,
        })
    }

    pub fn is_terminal(&self) -> bool {
        is_done(&self.program)
    }

    /// The executed annotated version: the original tree with the stacks
    /// accumulated during the run.
    pub fn executed_program(&self) -> Result<(Program, AnnotationTable), EngineError> {
        if self.mode != Mode::Annotated {
            return Err(EngineError::WrongMode {
                expected: Mode::Annotated,
            });
        }
        if !self.is_terminal() {
            return Err(EngineError::NotComplete);
        }
        Ok((self.origin.clone(), self.table.clone()))
    }

    /// JSON dump of the environments, δ and counters.
    pub fn dump_state(&self) -> Value {
        let mut v = self.env.dump();
        let obj = v.as_object_mut().expect("env dump is an object");
        obj.insert("delta".into(), self.aux.dump());
        obj.insert("counters".into(), self.counters.dump());
        v
    }

    pub fn dump(&self) -> Value {
        json!({
            "mode": self.mode,
            "program": render(&self.program),
            "state": self.dump_state(),
            "evalCount": self.eval_count,
            "steps": self.steps,
        })
    }
}

pub(crate) fn is_done(p: &Program) -> bool {
    matches!(p, Program::Empty) || p.is_skip()
}

/// Names read or written somewhere in `p` at a point where no enclosing
/// block declares them.
pub fn free_globals(p: &Program) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_free(p, &mut Vec::new(), &mut out);
    out
}

fn arith_vars(e: &ArithExpr, f: &mut dyn FnMut(&str)) {
    match e {
        ArithExpr::Var(x) => f(x),
        ArithExpr::Int(_) => {}
        ArithExpr::Paren(i) => arith_vars(i, f),
        ArithExpr::Bin(_, a, b) => {
            arith_vars(a, f);
            arith_vars(b, f);
        }
    }
}

fn bool_vars(b: &BoolExpr, f: &mut dyn FnMut(&str)) {
    match b {
        BoolExpr::True | BoolExpr::False => {}
        BoolExpr::Not(i) | BoolExpr::Paren(i) => bool_vars(i, f),
        BoolExpr::Cmp(_, l, r) => {
            arith_vars(l, f);
            arith_vars(r, f);
        }
        BoolExpr::And(l, r) | BoolExpr::Or(l, r) => {
            bool_vars(l, f);
            bool_vars(r, f);
        }
    }
}

fn collect_free(p: &Program, scope: &mut Vec<BTreeSet<String>>, out: &mut BTreeSet<String>) {
    match p {
        Program::Empty => {}
        Program::Single(s) => collect_free_stmt(s, scope, out),
        Program::Seq(a, b) | Program::Par(a, b) => {
            collect_free(a, scope, out);
            collect_free(b, scope, out);
        }
    }
}

fn collect_free_stmt(s: &Stmt, scope: &mut Vec<BTreeSet<String>>, out: &mut BTreeSet<String>) {
    let mut note = |x: &str, scope: &Vec<BTreeSet<String>>| {
        if !scope.iter().any(|d| d.contains(x)) {
            out.insert(x.to_string());
        }
    };
    match s {
        Stmt::Assign(a) => {
            note(&a.var, scope);
            arith_vars(&a.expr, &mut |x| note(x, scope));
        }
        Stmt::If(i) => {
            bool_vars(&i.cond, &mut |x| note(x, scope));
            collect_free(&i.then_branch, scope, out);
            collect_free(&i.else_branch, scope, out);
        }
        Stmt::While(w) => {
            bool_vars(&w.cond, &mut |x| note(x, scope));
            collect_free(&w.body, scope, out);
        }
        Stmt::Block(b) => {
            let names = b
                .var_decls
                .iter()
                .chain(&b.var_removals)
                .filter_map(|d| match d {
                    Stmt::VarDecl(v) | Stmt::VarRemove(v) => Some(v.var.clone()),
                    _ => None,
                })
                .collect();
            scope.push(names);
            for d in b.proc_decls.iter().chain(&b.proc_removals) {
                collect_free_stmt(d, scope, out);
            }
            collect_free(&b.body, scope, out);
            scope.pop();
        }
        Stmt::ProcDecl(d) | Stmt::ProcRemove(d) => collect_free(&d.body, scope, out),
        Stmt::RunB(body) => collect_free(body, scope, out),
        Stmt::RunC(r) => collect_free(&r.body, scope, out),
        Stmt::Skip(_) | Stmt::VarDecl(_) | Stmt::VarRemove(_) | Stmt::Call(_) => {}
    }
}
