//! Environment equivalences, identifier-order audits and the round-trip
//! conformance harness.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use serde::Serialize;

use crate::engine::{run_to_completion, Config, EngineError, Trace};
use crate::env::{AuxStore, Env};
use crate::error::Error;
use crate::scheduler::SchedulePolicy;
use crate::syntax::ast::Program;
use crate::transform::{inv_structure, remove_ann};

/// Outcome of one check, with the first counterexample when it fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl Check {
    pub fn pass() -> Check {
        Check {
            ok: true,
            witness: None,
        }
    }

    pub fn fail(witness: impl Into<String>) -> Check {
        Check {
            ok: false,
            witness: Some(witness.into()),
        }
    }

    fn and(self, other: Check) -> Check {
        if self.ok {
            other
        } else {
            self
        }
    }
}

/// How stored bodies on the two sides are expected to relate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BodyRelation {
    /// The right side is the left side with annotations.
    Annotated,
    /// The right side is the inversion of the left side.
    Inverted,
}

fn bodies_match(left: &Program, right: &Program, rel: BodyRelation) -> bool {
    match rel {
        BodyRelation::Annotated => remove_ann(left) == remove_ann(right),
        BodyRelation::Inverted => remove_ann(left) == remove_ann(&inv_structure(right)),
    }
}

pub fn store_equiv(a: &Env, b: &Env) -> Check {
    let (va, vb) = (a.store_view(), b.store_view());
    for k in va.keys().chain(vb.keys()) {
        match (va.get(k), vb.get(k)) {
            (Some(x), Some(y)) if x == y => {}
            (x, y) => return Check::fail(format!("{k}: {x:?} vs {y:?}")),
        }
    }
    Check::pass()
}

pub fn proc_equiv(a: &Env, b: &Env, rel: BodyRelation) -> Check {
    for id in a.mu.keys().chain(b.mu.keys()) {
        match (a.mu.get(id), b.mu.get(id)) {
            (Some(x), Some(y)) if x.name == y.name && bodies_match(&x.body, &y.body, rel) => {}
            (Some(_), Some(_)) => return Check::fail(format!("μ({id}) bodies differ")),
            (x, _) => {
                let side = if x.is_some() { "right" } else { "left" };
                return Check::fail(format!("μ({id}) missing on the {side}"));
            }
        }
    }
    Check::pass()
}

pub fn while_equiv(a: &Env, b: &Env, rel: BodyRelation) -> Check {
    for id in a.beta.keys().chain(b.beta.keys()) {
        match (a.beta.get(id), b.beta.get(id)) {
            (Some(x), Some(y)) if x.cond == y.cond && bodies_match(&x.body, &y.body, rel) => {}
            (Some(_), Some(_)) => return Check::fail(format!("β({id}) bodies differ")),
            (x, _) => {
                let side = if x.is_some() { "right" } else { "left" };
                return Check::fail(format!("β({id}) missing on the {side}"));
            }
        }
    }
    Check::pass()
}

/// Stack-wise equality; a stack absent on one side counts as empty.
pub fn aux_equiv(a: &AuxStore, b: &AuxStore) -> Check {
    let empty = Vec::new();
    for x in a.vars.keys().chain(b.vars.keys()) {
        let (sa, sb) = (
            a.vars.get(x).unwrap_or(&empty),
            b.vars.get(x).unwrap_or(&empty),
        );
        if sa != sb {
            return Check::fail(format!("stack {x}: {sa:?} vs {sb:?}"));
        }
    }
    if a.b != b.b {
        return Check::fail(format!("stack B: {:?} vs {:?}", a.b, b.b));
    }
    if a.w != b.w {
        return Check::fail(format!("stack W: {:?} vs {:?}", a.w, b.w));
    }
    if a.wi != b.wi {
        return Check::fail(format!(
            "stack WI differs ({} vs {} entries)",
            a.wi.len(),
            b.wi.len()
        ));
    }
    if a.pr != b.pr {
        return Check::fail(format!(
            "stack Pr differs ({} vs {} entries)",
            a.pr.len(),
            b.pr.len()
        ));
    }
    Check::pass()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EquivalenceReport {
    pub store_equiv: Check,
    pub proc_equiv: Check,
    pub while_equiv: Check,
    /// Reported alongside; not part of `overall`.
    pub aux_equiv: Check,
    pub overall: bool,
}

/// Compare all environments of two configurations.
pub fn equivalence(a: &Config, b: &Config, rel: BodyRelation) -> EquivalenceReport {
    let store = store_equiv(&a.env, &b.env);
    let procs = proc_equiv(&a.env, &b.env, rel);
    let whiles = while_equiv(&a.env, &b.env, rel);
    EquivalenceReport {
        overall: store.ok && procs.ok && whiles.ok,
        store_equiv: store,
        proc_equiv: procs,
        while_equiv: whiles,
        aux_equiv: aux_equiv(&a.aux, &b.aux),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Ascending,
    Descending,
}

/// Consecutive identifier transitions differ by exactly one in `dir`.
pub fn audit_identifier_order(trace: &Trace, dir: Direction) -> Check {
    let ids = trace.identifiers();
    for w in ids.windows(2) {
        let expected = match dir {
            Direction::Ascending => w[0].checked_add(1),
            Direction::Descending => w[0].checked_sub(1),
        };
        if Some(w[1]) != expected {
            return Check::fail(format!("identifier {} followed by {}", w[0], w[1]));
        }
    }
    Check::pass()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Forward,
    Inversion,
    Reverse,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Phase::Forward => "forward",
            Phase::Inversion => "inversion",
            Phase::Reverse => "reverse",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{phase} phase: {source}")]
pub struct PhaseError {
    pub phase: Phase,
    pub source: Error,
}

fn at(phase: Phase) -> impl Fn(EngineError) -> PhaseError {
    move |e| PhaseError {
        phase,
        source: e.into(),
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConformanceReport {
    /// Program uses `par`; the restoration check then goes beyond the
    /// sequential statement it is backed by.
    pub extended: bool,
    /// Plain and annotated residuals agree after every step.
    pub lockstep: Check,
    /// Final plain environments against final annotated ones.
    pub forward_equiv: EquivalenceReport,
    pub ascending_ids: Check,
    pub descending_ids: Check,
    /// Restored environments against the initial ones, δ included.
    pub restored: EquivalenceReport,
    pub reverse_evaluations: u64,
    pub forward_trace: Trace,
    pub reverse_identifiers: Vec<u64>,
    pub timings_ms: BTreeMap<String, f64>,
    pub passed: bool,
}

/// Run `program` plain and annotated in lockstep under `policy`, invert,
/// reverse, and check every conformance property.
pub fn roundtrip(
    program: &Program,
    init: &BTreeMap<String, i64>,
    policy: &mut SchedulePolicy,
    budget: u64,
) -> Result<ConformanceReport, PhaseError> {
    let mut timings = BTreeMap::new();
    let clock = Instant::now();
    let mut plain = Config::plain(program, init);
    let mut fwd = Config::annotated(program, init).map_err(at(Phase::Forward))?;
    let initial = fwd.clone();

    let trace = run_lockstep(&mut fwd, &mut plain, policy, budget).map_err(at(Phase::Forward))?;
    let (trace, lockstep) = trace;
    timings.insert("forward".to_string(), clock.elapsed().as_secs_f64() * 1e3);

    let clock = Instant::now();
    let mut rev = Config::reverse_of(&fwd).map_err(at(Phase::Inversion))?;
    timings.insert("inversion".to_string(), clock.elapsed().as_secs_f64() * 1e3);

    let clock = Instant::now();
    let rtrace = run_to_completion(&mut rev, &mut SchedulePolicy::LeftmostFirst, budget)
        .map_err(at(Phase::Reverse))?;
    timings.insert("reverse".to_string(), clock.elapsed().as_secs_f64() * 1e3);

    let forward_equiv = equivalence(&plain, &fwd, BodyRelation::Annotated);
    let restored = equivalence(&initial, &rev, BodyRelation::Inverted);
    let ascending_ids = audit_identifier_order(&trace, Direction::Ascending);
    let descending_ids = audit_identifier_order(&rtrace, Direction::Descending);
    let passed = lockstep.ok
        && forward_equiv.overall
        && ascending_ids.ok
        && descending_ids.ok
        && restored.overall
        && restored.aux_equiv.ok
        && rev.eval_count == 0
        && rev.counters.prev_id == 0;
    Ok(ConformanceReport {
        extended: program.contains_par(),
        lockstep,
        forward_equiv,
        ascending_ids,
        descending_ids,
        restored,
        reverse_evaluations: rev.eval_count,
        reverse_identifiers: rtrace.identifiers(),
        forward_trace: trace,
        timings_ms: timings,
        passed,
    })
}

/// Drive `fwd` with `policy` and mirror every choice on `plain`, comparing
/// residuals and environments after each step.
fn run_lockstep(
    fwd: &mut Config,
    plain: &mut Config,
    policy: &mut SchedulePolicy,
    budget: u64,
) -> Result<(Trace, Check), EngineError> {
    let mut check = Check::pass();
    let mut trace = Trace {
        schedule: crate::scheduler::Schedule {
            seed: policy.seed(),
            choices: Vec::new(),
        },
        ..Trace::default()
    };
    loop {
        let enabled = fwd.enabled();
        let mirror = plain.enabled();
        if check.ok && enabled.len() != mirror.len() {
            check = Check::fail(format!(
                "step {}: {} vs {} enabled redexes",
                fwd.steps,
                mirror.len(),
                enabled.len()
            ));
        }
        if enabled.is_empty() {
            if !fwd.is_terminal() {
                return Err(EngineError::Stuck {
                    residual: crate::syntax::render(&fwd.program),
                });
            }
            return Ok((trace, check));
        }
        if trace.records.len() as u64 >= budget {
            return Err(EngineError::BudgetExceeded { budget });
        }
        let i = policy.choose(&enabled, fwd.steps)?;
        trace.schedule.choices.push(i);
        trace.records.push(fwd.step(&enabled[i])?);
        if let Some(r) = mirror.get(i) {
            plain.step(r)?;
        }
        if check.ok {
            let shape = if remove_ann(&fwd.program) == plain.program {
                Check::pass()
            } else {
                Check::fail(format!("step {}: residual programs differ", fwd.steps))
            };
            let envs = equivalence(plain, fwd, BodyRelation::Annotated);
            check = shape
                .and(envs.store_equiv)
                .and(envs.proc_equiv)
                .and(envs.while_equiv);
        }
    }
}

/// Final global stores over every interleaving of `program`, found by
/// depth-first search over forward-only configurations. Fails once more
/// than `limit` configurations have been expanded.
pub fn final_stores(
    program: &Program,
    init: &BTreeMap<String, i64>,
    limit: usize,
) -> Result<BTreeSet<BTreeMap<String, i64>>, EngineError> {
    let mut out = BTreeSet::new();
    let mut stack = vec![Config::plain(program, init)];
    let mut expanded = 0;
    while let Some(c) = stack.pop() {
        expanded += 1;
        if expanded > limit {
            return Err(EngineError::BudgetExceeded {
                budget: limit as u64,
            });
        }
        let enabled = c.enabled();
        if enabled.is_empty() {
            if !c.is_terminal() {
                return Err(EngineError::Stuck {
                    residual: crate::syntax::render(&c.program),
                });
            }
            out.insert(c.env.globals());
            continue;
        }
        for r in &enabled {
            let mut next = c.clone();
            next.step(r)?;
            stack.push(next);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Counters;

    #[test]
    fn store_equivalence_ignores_locations() {
        let (mut a, mut b) = (Env::default(), Env::default());
        let (mut ca, mut cb) = (Counters::default(), Counters::default());
        cb.next_loc();
        a.init_global(&mut ca, "x", 1);
        a.init_global(&mut ca, "y", 2);
        b.init_global(&mut cb, "y", 2);
        b.init_global(&mut cb, "x", 1);
        assert!(store_equiv(&a, &b).ok);
        b.init_global(&mut cb, "x", 5);
        assert!(!store_equiv(&a, &b).ok);
    }

    #[test]
    fn extra_w_entry_is_a_witness() {
        let a = AuxStore::default();
        let mut b = AuxStore::default();
        assert!(aux_equiv(&a, &b).ok);
        b.push_w(3, true);
        let c = aux_equiv(&a, &b);
        assert!(!c.ok);
        assert!(c.witness.unwrap().contains('W'));
    }

    #[test]
    fn absent_variable_stack_counts_as_empty() {
        let a = AuxStore::default();
        let mut b = AuxStore::default();
        b.vars.insert("x".into(), Vec::new());
        assert!(aux_equiv(&a, &b).ok);
    }

    #[test]
    fn audit_flags_gaps() {
        let rec = |id| crate::engine::TransitionRecord {
            step: 0,
            rule: "D1a".into(),
            redex: crate::engine::RedexId {
                path: vec![],
                rule: "D1a".into(),
            },
            id: Some(id),
            effect: String::new(),
        };
        let mut t = Trace {
            records: vec![rec(1), rec(3)],
            ..Trace::default()
        };
        let c = audit_identifier_order(&t, Direction::Ascending);
        assert_eq!(c.witness.as_deref(), Some("identifier 1 followed by 3"));
        t.records = vec![rec(3), rec(2), rec(1)];
        assert!(audit_identifier_order(&t, Direction::Descending).ok);
    }

    #[test]
    fn final_stores_of_a_write_race() {
        let p = crate::syntax::parse_program("par { x = 1; } { x = 2; }").unwrap();
        let finals = final_stores(&p, &BTreeMap::new(), 100).unwrap();
        let xs: Vec<i64> = finals.iter().map(|g| g["x"]).collect();
        assert_eq!(xs, [1, 2]);
    }
}
