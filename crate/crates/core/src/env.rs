//! Environments, the auxiliary store and the execution counters.

use std::collections::BTreeMap;
use std::fmt;

use serde_json::{json, Value};

use crate::syntax::ast::{ConstructId, Path, Program, While};
use crate::syntax::render::render;
use crate::transform::AnnotationInfo;

/// A memory location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Loc(pub u64);

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EnvError {
    #[error("unbound variable `{name}` at path {path}")]
    UnboundVariable { name: String, path: Path },
    #[error("unbound procedure `{name}` at path {path}")]
    UnboundProcedure { name: String, path: Path },
    #[error("pop from empty stack {stack}")]
    EmptyStack { stack: String },
    #[error("stack {stack}: top identifier {found} does not match {expected}")]
    IdMismatch {
        stack: String,
        expected: u64,
        found: u64,
    },
    #[error("identifier counter exhausted")]
    CounterExhausted,
    #[error("version counter for `{key}` would drop below zero")]
    VersionUnderflow { key: String },
}

/// Variable name paired with its declaring block, `None` for global scope.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarKey {
    pub name: String,
    pub block: Option<ConstructId>,
}

impl VarKey {
    pub fn global(name: impl Into<String>) -> Self {
        VarKey {
            name: name.into(),
            block: None,
        }
    }
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.block {
            None => write!(f, "{}", self.name),
            Some(b) => write!(f, "{}@{}", self.name, b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcEntry {
    pub name: String,
    pub body: Program,
}

/// γ, σ, μ and β, plus the declaring path of each procedure.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Env {
    pub gamma: BTreeMap<VarKey, Loc>,
    pub sigma: BTreeMap<Loc, i64>,
    pub mu: BTreeMap<ConstructId, ProcEntry>,
    pub proc_scope: BTreeMap<ConstructId, Path>,
    pub beta: BTreeMap<ConstructId, While>,
}

impl Env {
    /// Resolve `name` through the blocks of `path`, innermost first, then the
    /// global scope.
    pub fn eval_v(&self, path: &Path, name: &str) -> Result<Loc, EnvError> {
        let mut key = VarKey::global(name);
        for b in path.blocks() {
            key.block = Some(b.clone());
            if let Some(l) = self.gamma.get(&key) {
                return Ok(*l);
            }
        }
        key.block = None;
        self.gamma
            .get(&key)
            .copied()
            .ok_or_else(|| EnvError::UnboundVariable {
                name: name.to_string(),
                path: path.clone(),
            })
    }

    /// Resolve a procedure name to the identifier of its innermost visible
    /// declaration.
    pub fn eval_p(&self, name: &str, path: &Path) -> Result<ConstructId, EnvError> {
        let declared_in = |head: Option<&ConstructId>| {
            self.proc_scope.iter().find_map(|(pn, pa)| {
                let entry = self.mu.get(pn)?;
                (entry.name == name && pa.head() == head).then(|| pn.clone())
            })
        };
        path.blocks()
            .iter()
            .find_map(|b| declared_in(Some(b)))
            .or_else(|| declared_in(None))
            .ok_or_else(|| EnvError::UnboundProcedure {
                name: name.to_string(),
                path: path.clone(),
            })
    }

    pub fn read(&self, path: &Path, name: &str) -> Result<i64, EnvError> {
        let l = self.eval_v(path, name)?;
        Ok(self.sigma.get(&l).copied().unwrap_or(0))
    }

    /// Bind a global variable at a fresh location.
    pub fn init_global(&mut self, counters: &mut Counters, name: &str, value: i64) {
        let key = VarKey::global(name);
        let l = match self.gamma.get(&key) {
            Some(l) => *l,
            None => {
                let l = counters.next_loc();
                self.gamma.insert(key, l);
                l
            }
        };
        self.sigma.insert(l, value);
    }

    /// Composed view σ∘γ, the store as seen by a program.
    pub fn store_view(&self) -> BTreeMap<VarKey, i64> {
        self.gamma
            .iter()
            .map(|(k, l)| (k.clone(), self.sigma.get(l).copied().unwrap_or(0)))
            .collect()
    }

    /// Values of global variables by name.
    pub fn globals(&self) -> BTreeMap<String, i64> {
        self.store_view()
            .into_iter()
            .filter(|(k, _)| k.block.is_none())
            .map(|(k, v)| (k.name, v))
            .collect()
    }

    pub fn dump(&self) -> Value {
        let gamma: serde_json::Map<String, Value> = self
            .gamma
            .iter()
            .map(|(k, l)| (k.to_string(), json!(l.to_string())))
            .collect();
        let sigma: serde_json::Map<String, Value> = self
            .sigma
            .iter()
            .map(|(l, v)| (l.to_string(), json!(v)))
            .collect();
        let mu: serde_json::Map<String, Value> = self
            .mu
            .iter()
            .map(|(id, e)| {
                let scope = self.proc_scope.get(id).map(|p| p.to_string());
                (
                    id.to_string(),
                    json!({"name": e.name, "scope": scope, "body": render(&e.body)}),
                )
            })
            .collect();
        let beta: serde_json::Map<String, Value> = self
            .beta
            .iter()
            .map(|(id, w)| {
                let stmt = crate::syntax::ast::Stmt::While(w.clone());
                (id.to_string(), json!(render(&Program::single(stmt))))
            })
            .collect();
        json!({"gamma": gamma, "sigma": sigma, "mu": mu, "beta": beta})
    }
}

/// Identifier, location and version counters of one execution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counters {
    pub next_id: u64,
    pub prev_id: u64,
    pub loc_next: u64,
    pub free: Vec<Loc>,
    pub versions: BTreeMap<String, u32>,
}

impl Default for Counters {
    fn default() -> Self {
        Counters {
            next_id: 1,
            prev_id: 0,
            loc_next: 0,
            free: Vec::new(),
            versions: BTreeMap::new(),
        }
    }
}

impl Counters {
    #[allow(clippy::should_implement_trait)]
    pub fn next(&mut self) -> u64 {
        let m = self.next_id;
        self.next_id += 1;
        m
    }

    pub fn previous(&mut self) -> Result<u64, EnvError> {
        if self.prev_id == 0 {
            return Err(EnvError::CounterExhausted);
        }
        let m = self.prev_id;
        self.prev_id -= 1;
        Ok(m)
    }

    /// Reuse the most recently freed location, else mint a new one.
    pub fn next_loc(&mut self) -> Loc {
        self.free.pop().unwrap_or_else(|| {
            let l = Loc(self.loc_next);
            self.loc_next += 1;
            l
        })
    }

    pub fn free_loc(&mut self, l: Loc) {
        self.free.push(l);
    }

    /// Increment the version counter for `key` and return the new value.
    pub fn next_version(&mut self, key: &str) -> u32 {
        let v = self.versions.entry(key.to_string()).or_insert(0);
        *v += 1;
        *v
    }

    /// Decrement the version counter for `key` and return the new value.
    pub fn previous_version(&mut self, key: &str) -> Result<u32, EnvError> {
        match self.versions.get_mut(key) {
            Some(v) if *v > 0 => {
                *v -= 1;
                Ok(*v)
            }
            _ => Err(EnvError::VersionUnderflow {
                key: key.to_string(),
            }),
        }
    }

    pub fn current_version(&self, key: &str) -> u32 {
        self.versions.get(key).copied().unwrap_or(0)
    }

    pub fn dump(&self) -> Value {
        json!({
            "nextId": self.next_id,
            "prevId": self.prev_id,
            "locNext": self.loc_next,
            "free": self.free.iter().map(|l| l.0).collect::<Vec<_>>(),
            "versions": self.versions,
        })
    }
}

/// Selects one stack of the auxiliary store.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StackSel {
    Var(String),
    B,
    W,
    WI,
    Pr,
}

impl fmt::Display for StackSel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StackSel::Var(x) => write!(f, "{x}"),
            StackSel::B => f.write_str("B"),
            StackSel::W => f.write_str("W"),
            StackSel::WI => f.write_str("WI"),
            StackSel::Pr => f.write_str("Pr"),
        }
    }
}

/// δ: per-variable stacks of overwritten values plus the B, W, WI and Pr
/// stacks. Every entry is paired with the identifier that pushed it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AuxStore {
    pub vars: BTreeMap<String, Vec<(u64, i64)>>,
    pub b: Vec<(u64, bool)>,
    pub w: Vec<(u64, bool)>,
    pub wi: Vec<(u64, AnnotationInfo)>,
    pub pr: Vec<(u64, AnnotationInfo)>,
}

fn pop_checked<T>(stack: &mut Vec<(u64, T)>, sel: &StackSel, id: u64) -> Result<T, EnvError> {
    match stack.last() {
        None => Err(EnvError::EmptyStack {
            stack: sel.to_string(),
        }),
        Some((top, _)) if *top != id => Err(EnvError::IdMismatch {
            stack: sel.to_string(),
            expected: id,
            found: *top,
        }),
        Some(_) => Ok(stack.pop().map(|(_, v)| v).expect("checked non-empty")),
    }
}

impl AuxStore {
    pub fn push_var(&mut self, x: &str, id: u64, v: i64) {
        self.vars.entry(x.to_string()).or_default().push((id, v));
    }

    pub fn push_b(&mut self, id: u64, v: bool) {
        self.b.push((id, v));
    }

    pub fn push_w(&mut self, id: u64, v: bool) {
        self.w.push((id, v));
    }

    pub fn push_wi(&mut self, id: u64, c: AnnotationInfo) {
        self.wi.push((id, c));
    }

    pub fn push_pr(&mut self, id: u64, c: AnnotationInfo) {
        self.pr.push((id, c));
    }

    pub fn pop_var(&mut self, x: &str, id: u64) -> Result<i64, EnvError> {
        let sel = StackSel::Var(x.to_string());
        let stack = self.vars.get_mut(x).ok_or_else(|| EnvError::EmptyStack {
            stack: x.to_string(),
        })?;
        let v = pop_checked(stack, &sel, id)?;
        if stack.is_empty() {
            self.vars.remove(x);
        }
        Ok(v)
    }

    pub fn pop_b(&mut self, id: u64) -> Result<bool, EnvError> {
        pop_checked(&mut self.b, &StackSel::B, id)
    }

    pub fn pop_w(&mut self, id: u64) -> Result<bool, EnvError> {
        pop_checked(&mut self.w, &StackSel::W, id)
    }

    pub fn pop_wi(&mut self, id: u64) -> Result<AnnotationInfo, EnvError> {
        pop_checked(&mut self.wi, &StackSel::WI, id)
    }

    pub fn pop_pr(&mut self, id: u64) -> Result<AnnotationInfo, EnvError> {
        pop_checked(&mut self.pr, &StackSel::Pr, id)
    }

    /// Identifier on top of the selected stack.
    pub fn top_id(&self, sel: &StackSel) -> Option<u64> {
        match sel {
            StackSel::Var(x) => self.vars.get(x).and_then(|s| s.last()).map(|e| e.0),
            StackSel::B => self.b.last().map(|e| e.0),
            StackSel::W => self.w.last().map(|e| e.0),
            StackSel::WI => self.wi.last().map(|e| e.0),
            StackSel::Pr => self.pr.last().map(|e| e.0),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.vars.values().all(Vec::is_empty)
            && self.b.is_empty()
            && self.w.is_empty()
            && self.wi.is_empty()
            && self.pr.is_empty()
    }

    /// Identifier sequences of every stack, bottom to top.
    pub fn id_sequences(&self) -> Vec<(StackSel, Vec<u64>)> {
        let mut out: Vec<(StackSel, Vec<u64>)> = self
            .vars
            .iter()
            .map(|(x, s)| (StackSel::Var(x.clone()), s.iter().map(|e| e.0).collect()))
            .collect();
        out.push((StackSel::B, self.b.iter().map(|e| e.0).collect()));
        out.push((StackSel::W, self.w.iter().map(|e| e.0).collect()));
        out.push((StackSel::WI, self.wi.iter().map(|e| e.0).collect()));
        out.push((StackSel::Pr, self.pr.iter().map(|e| e.0).collect()));
        out
    }

    pub fn dump(&self) -> Value {
        let info =
            |c: &AnnotationInfo| -> Value { c.iter().map(|(k, ids)| json!([k.0, ids])).collect() };
        json!({
            "vars": self.vars.iter().map(|(x, s)| {
                (x.clone(), s.iter().map(|(m, v)| json!([m, v])).collect::<Vec<_>>())
            }).collect::<BTreeMap<_, _>>(),
            "B": self.b.iter().map(|(m, v)| json!([m, v])).collect::<Vec<_>>(),
            "W": self.w.iter().map(|(m, v)| json!([m, v])).collect::<Vec<_>>(),
            "WI": self.wi.iter().map(|(m, c)| json!([m, info(c)])).collect::<Vec<_>>(),
            "Pr": self.pr.iter().map(|(m, c)| json!([m, info(c)])).collect::<Vec<_>>(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::ast::ConstructKind;

    fn block(text: &str) -> ConstructId {
        ConstructId::parse(ConstructKind::Block, text).unwrap()
    }

    fn path(parts: &[&str]) -> Path {
        Path(parts.iter().map(|p| block(p)).collect())
    }

    #[test]
    fn eval_v_finds_renamed_local() {
        let mut env = Env::default();
        env.gamma.insert(
            VarKey {
                name: "T".into(),
                block: Some(block("c1:c2:b2")),
            },
            Loc(5),
        );
        assert_eq!(env.eval_v(&path(&["c1:c2:b2", "b1"]), "T"), Ok(Loc(5)));
    }

    #[test]
    fn eval_v_prefers_innermost_then_global() {
        let mut env = Env::default();
        env.gamma.insert(VarKey::global("x"), Loc(0));
        env.gamma.insert(
            VarKey {
                name: "x".into(),
                block: Some(block("b1")),
            },
            Loc(1),
        );
        assert_eq!(env.eval_v(&path(&["b2", "b1"]), "x"), Ok(Loc(1)));
        assert_eq!(env.eval_v(&path(&["b3"]), "x"), Ok(Loc(0)));
        assert!(env.eval_v(&path(&["b1"]), "y").is_err());
    }

    #[test]
    fn eval_p_innermost_declaration_wins() {
        let mut env = Env::default();
        let p1 = ConstructId::new(ConstructKind::Proc, "p1");
        let p2 = ConstructId::new(ConstructKind::Proc, "p2");
        for (id, scope) in [(&p1, path(&["b1"])), (&p2, path(&["b2", "b1"]))] {
            env.mu.insert(
                id.clone(),
                ProcEntry {
                    name: "fib".into(),
                    body: Program::skip(),
                },
            );
            env.proc_scope.insert(id.clone(), scope);
        }
        assert_eq!(env.eval_p("fib", &path(&["b2", "b1"])), Ok(p2));
        assert_eq!(env.eval_p("fib", &path(&["b1"])), Ok(p1));
        assert!(matches!(
            env.eval_p("nope", &path(&["b1"])),
            Err(EnvError::UnboundProcedure { .. })
        ));
    }

    #[test]
    fn locations_are_reused_lifo() {
        let mut c = Counters::default();
        assert_eq!(
            (c.next_loc(), c.next_loc(), c.next_loc()),
            (Loc(0), Loc(1), Loc(2))
        );
        c.free_loc(Loc(0));
        c.free_loc(Loc(2));
        assert_eq!(c.next_loc(), Loc(2));
        assert_eq!(c.next_loc(), Loc(0));
        assert_eq!(c.next_loc(), Loc(3));
    }

    #[test]
    fn identifier_counters() {
        let mut c = Counters::default();
        assert_eq!((c.next(), c.next()), (1, 2));
        c.prev_id = 2;
        assert_eq!(c.previous(), Ok(2));
        assert_eq!(c.previous(), Ok(1));
        assert_eq!(c.previous(), Err(EnvError::CounterExhausted));
    }

    #[test]
    fn aux_pop_checks_identifier() {
        let mut d = AuxStore::default();
        d.push_var("c", 2, 0);
        assert!(matches!(
            d.pop_var("c", 3),
            Err(EnvError::IdMismatch { .. })
        ));
        assert_eq!(d.pop_var("c", 2), Ok(0));
        assert!(d.is_empty());
        assert!(matches!(d.pop_w(1), Err(EnvError::EmptyStack { .. })));
    }

    #[test]
    fn interleaved_pushes_keep_per_stack_order() {
        let mut d = AuxStore::default();
        for (x, m) in [("c", 2), ("c", 4), ("r", 6), ("c", 7)] {
            d.push_var(x, m, 0);
        }
        let ids = |x: &str| d.vars[x].iter().map(|e| e.0).collect::<Vec<_>>();
        assert_eq!(ids("c"), [2, 4, 7]);
        assert_eq!(ids("r"), [6]);
    }
}
