//! Driving a configuration to termination, and the executed-run bundle.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::scheduler::{Schedule, SchedulePolicy};
use crate::syntax::render_annotated;
use crate::transform::AnnotationTable;

use super::{Config, EngineError, TransitionRecord};

pub const DEFAULT_BUDGET: u64 = 100_000;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub records: Vec<TransitionRecord>,
    pub schedule: Schedule,
}

impl Trace {
    /// Identifiers in the order they were used.
    pub fn identifiers(&self) -> Vec<u64> {
        self.records.iter().filter_map(|r| r.id).collect()
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        self.records
            .iter()
            .map(|r| serde_json::to_string(r).expect("records serialize") + "\n")
            .collect()
    }
}

/// Step `config` under `policy` until no redex is enabled. A non-terminal
/// configuration without redexes is an error, as is running past `budget`
/// steps. On error `config` holds the state reached.
pub fn run_to_completion(
    config: &mut Config,
    policy: &mut SchedulePolicy,
    budget: u64,
) -> std::result::Result<Trace, EngineError> {
    let mut trace = Trace {
        records: Vec::new(),
        schedule: Schedule {
            seed: policy.seed(),
            choices: Vec::new(),
        },
    };
    let mut taken = 0u64;
    loop {
        let enabled = config.enabled();
        if enabled.is_empty() {
            if config.is_terminal() {
                return Ok(trace);
            }
            return Err(EngineError::Stuck {
                residual: crate::syntax::render(&config.program),
            });
        }
        if taken >= budget {
            return Err(EngineError::BudgetExceeded { budget });
        }
        let i = policy.choose(&enabled, config.steps)?;
        trace.schedule.choices.push(i);
        trace.records.push(config.step(&enabled[i])?);
        taken += 1;
    }
}

/// Everything needed to invert and reverse a completed annotated run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bundle {
    pub source: String,
    pub init: BTreeMap<String, i64>,
    pub schedule: Schedule,
    /// Executed annotated version, rendered with its stacks.
    pub program: String,
    pub table: AnnotationTable,
    pub delta: Value,
    pub counters: Value,
    pub trace: Vec<TransitionRecord>,
}

impl Bundle {
    pub fn new(
        source: &str,
        init: &BTreeMap<String, i64>,
        config: &Config,
        trace: &Trace,
    ) -> Result<Bundle> {
        let (executed, table) = config.executed_program()?;
        Ok(Bundle {
            source: source.to_string(),
            init: init.clone(),
            schedule: trace.schedule.clone(),
            program: render_annotated(&executed, &table),
            table,
            delta: config.aux.dump(),
            counters: config.counters.dump(),
            trace: trace.records.clone(),
        })
    }

    /// Re-run the recorded schedule and check it reproduces the trace.
    pub fn replay(&self, budget: u64) -> Result<Config> {
        let program = crate::parse_and_validate(&self.source)?;
        let mut config = Config::annotated(&program, &self.init)?;
        let mut policy = SchedulePolicy::scripted(self.schedule.choices.clone());
        let trace = run_to_completion(&mut config, &mut policy, budget)?;
        if let Some(step) = (0..self.trace.len().max(trace.records.len()))
            .find(|&i| self.trace.get(i) != trace.records.get(i))
        {
            return Err(Error::ReplayMismatch { step });
        }
        Ok(config)
    }
}
