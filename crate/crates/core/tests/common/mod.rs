//! Shared helpers for the integration tests: example sources, initial
//! stores and a generator of random terminating programs.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn source(name: &str) -> String {
    let path = format!("{}/../../programs/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn init(pairs: &[(&str, i64)]) -> BTreeMap<String, i64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Choice indices of the schedule shipped next to the restaurant program.
pub fn restaurant_choices() -> Vec<usize> {
    let s: revlang_core::scheduler::Schedule =
        serde_json::from_str(&source("restaurant.schedule.json")).unwrap();
    s.choices
}

#[derive(Debug, Clone, Copy)]
pub struct GenOpts {
    pub par: bool,
    pub max_depth: u32,
}

impl GenOpts {
    pub fn sequential() -> Self {
        GenOpts {
            par: false,
            max_depth: 4,
        }
    }

    pub fn parallel() -> Self {
        GenOpts {
            par: true,
            max_depth: 4,
        }
    }
}

struct Proc {
    name: String,
    /// Global depth counter for self-recursive procedures.
    guard: Option<String>,
}

struct Gen {
    rng: ChaCha8Rng,
    opts: GenOpts,
    fresh: u32,
    /// Assignable variables per enclosing scope, outermost first.
    vars: Vec<Vec<String>>,
    procs: Vec<Vec<Proc>>,
    budget: i32,
}

/// Source text of a random program: globals g0..g2, loops bounded by
/// block-local counters, acyclic procedures plus self-recursion guarded by
/// a decreasing global, nesting depth at most `max_depth` and `par` of width
/// two or three when allowed.
pub fn gen_program(seed: u64, opts: GenOpts) -> String {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        opts,
        fresh: 0,
        vars: vec![vec!["g0".into(), "g1".into(), "g2".into()]],
        procs: vec![Vec::new()],
        budget: 24,
    };
    let mut out = String::new();
    let n = g.rng.gen_range(1..=4);
    g.seq(n, 0, &mut out, 0);
    out
}

impl Gen {
    fn name(&mut self, base: &str) -> String {
        self.fresh += 1;
        format!("{base}{}", self.fresh)
    }

    fn pad(out: &mut String, indent: usize) {
        out.push_str(&"  ".repeat(indent));
    }

    fn var(&mut self) -> String {
        let all: Vec<&String> = self.vars.iter().flatten().collect();
        all[self.rng.gen_range(0..all.len())].clone()
    }

    fn atom(&mut self) -> String {
        if self.rng.gen_bool(0.5) {
            self.var()
        } else {
            self.rng.gen_range(-3..=5).to_string()
        }
    }

    fn expr(&mut self) -> String {
        match self.rng.gen_range(0..5) {
            0 => self.atom(),
            1 => format!("{} + {}", self.atom(), self.atom()),
            2 => format!("{} - {}", self.atom(), self.atom()),
            3 => format!(
                "({} - {}) * {}",
                self.atom(),
                self.atom(),
                self.rng.gen_range(0..3)
            ),
            _ => format!("{} + {}", self.var(), self.rng.gen_range(1..4)),
        }
    }

    fn cond(&mut self) -> String {
        let ops = [">", "==", ">=", "<", "<=", "!="];
        let c = format!(
            "{} {} {}",
            self.expr(),
            ops[self.rng.gen_range(0..ops.len())],
            self.atom()
        );
        match self.rng.gen_range(0..6) {
            0 => format!("not ({c})"),
            1 => format!("({c}) and ({} > {})", self.var(), self.atom()),
            2 => format!("({c}) or ({} == {})", self.var(), self.atom()),
            _ => c,
        }
    }

    fn seq(&mut self, n: usize, depth: u32, out: &mut String, indent: usize) {
        for _ in 0..n {
            self.stmt(depth, out, indent);
        }
        if n == 0 {
            Self::pad(out, indent);
            out.push_str("skip;\n");
        }
    }

    fn visible_procs(&self) -> Vec<(String, Option<String>)> {
        self.procs
            .iter()
            .flatten()
            .map(|p| (p.name.clone(), p.guard.clone()))
            .collect()
    }

    fn stmt(&mut self, depth: u32, out: &mut String, indent: usize) {
        self.budget -= 1;
        let leaf = depth >= self.opts.max_depth || self.budget <= 0;
        let kind = if leaf {
            self.rng.gen_range(0..10).min(1)
        } else {
            self.rng.gen_range(0..11)
        };
        match kind {
            0 | 2 | 3 => {
                let (x, e) = (self.var(), self.expr());
                Self::pad(out, indent);
                out.push_str(&format!("{x} = {e};\n"));
            }
            1 => {
                let procs = self.visible_procs();
                if procs.is_empty() {
                    let (x, e) = (self.var(), self.expr());
                    Self::pad(out, indent);
                    out.push_str(&format!("{x} = {e};\n"));
                    return;
                }
                self.call(&procs, out, indent);
            }
            4 => {
                let c = self.cond();
                Self::pad(out, indent);
                out.push_str(&format!("if {c} then\n"));
                let n = self.rng.gen_range(0..3);
                self.seq(n, depth + 1, out, indent + 1);
                if self.rng.gen_bool(0.6) {
                    Self::pad(out, indent);
                    out.push_str("else\n");
                    let n = self.rng.gen_range(0..3);
                    self.seq(n, depth + 1, out, indent + 1);
                }
                Self::pad(out, indent);
                out.push_str("end;\n");
            }
            5 | 6 => self.loop_(depth, out, indent),
            7 | 8 => self.block(depth, out, indent),
            9 if self.opts.par => {
                let width = self.rng.gen_range(2..=3);
                Self::pad(out, indent);
                out.push_str("par");
                for _ in 0..width {
                    out.push_str(" {\n");
                    let n = self.rng.gen_range(1..3);
                    self.seq(n, depth + 1, out, indent + 1);
                    Self::pad(out, indent);
                    out.push('}');
                }
                out.push_str(";\n");
            }
            _ => {
                Self::pad(out, indent);
                out.push_str("skip;\n");
            }
        }
    }

    fn call(&mut self, procs: &[(String, Option<String>)], out: &mut String, indent: usize) {
        let (name, guard) = &procs[self.rng.gen_range(0..procs.len())];
        if let Some(d) = guard {
            Self::pad(out, indent);
            out.push_str(&format!("{d} = {};\n", self.rng.gen_range(0..3)));
        }
        Self::pad(out, indent);
        out.push_str(&format!("call {name};\n"));
    }

    fn loop_(&mut self, depth: u32, out: &mut String, indent: usize) {
        let k = self.name("k");
        let bound = self.rng.gen_range(0..=3);
        Self::pad(out, indent);
        out.push_str("begin\n");
        Self::pad(out, indent + 1);
        out.push_str(&format!("var {k} = {bound};\n"));
        Self::pad(out, indent + 1);
        let extra = if self.rng.gen_bool(0.3) {
            format!(" and ({})", self.cond())
        } else {
            String::new()
        };
        out.push_str(&format!("while ({k} > 0){extra} do\n"));
        self.vars.push(Vec::new());
        self.procs.push(Vec::new());
        let n = self.rng.gen_range(1..3);
        self.seq(n, depth + 1, out, indent + 2);
        self.vars.pop();
        self.procs.pop();
        Self::pad(out, indent + 2);
        out.push_str(&format!("{k} = {k} - 1;\n"));
        Self::pad(out, indent + 1);
        out.push_str("end;\n");
        Self::pad(out, indent);
        out.push_str("end;\n");
    }

    fn block(&mut self, depth: u32, out: &mut String, indent: usize) {
        Self::pad(out, indent);
        out.push_str("begin\n");
        let mut locals = Vec::new();
        for _ in 0..self.rng.gen_range(0..3) {
            let x = self.name("l");
            Self::pad(out, indent + 1);
            out.push_str(&format!("var {x} = {};\n", self.rng.gen_range(-2..5)));
            locals.push(x);
        }
        self.vars.push(locals);
        self.procs.push(Vec::new());
        for _ in 0..self.rng.gen_range(0..3) {
            let name = self.name("f");
            let recursive = self.rng.gen_bool(0.35);
            Self::pad(out, indent + 1);
            out.push_str(&format!("proc {name} is\n"));
            if recursive {
                let d = self.name("d");
                Self::pad(out, indent + 2);
                out.push_str(&format!("if ({d} > 0) then\n"));
                Self::pad(out, indent + 3);
                out.push_str(&format!("{d} = {d} - 1;\n"));
                let n = self.rng.gen_range(0..3);
                self.seq(n, depth + 2, out, indent + 3);
                Self::pad(out, indent + 3);
                out.push_str(&format!("call {name};\n"));
                Self::pad(out, indent + 2);
                out.push_str("end;\n");
                self.procs.last_mut().unwrap().push(Proc {
                    name,
                    guard: Some(d),
                });
            } else {
                let n = self.rng.gen_range(1..3);
                self.seq(n, depth + 1, out, indent + 2);
                self.procs
                    .last_mut()
                    .unwrap()
                    .push(Proc { name, guard: None });
            }
            Self::pad(out, indent + 1);
            out.push_str("end;\n");
        }
        let own = self.procs.last().map_or(0, Vec::len);
        if own > 0 && self.rng.gen_bool(0.75) {
            let procs = self.visible_procs();
            self.call(&procs[procs.len() - own..], out, indent + 1);
        }
        let n = self.rng.gen_range(1..4);
        self.seq(n, depth + 1, out, indent + 1);
        self.vars.pop();
        self.procs.pop();
        Self::pad(out, indent);
        out.push_str("end;\n");
    }
}

/// Random initial values for the generator's globals.
pub fn gen_init(seed: u64) -> BTreeMap<String, i64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    (0..3)
        .map(|i| (format!("g{i}"), rng.gen_range(-5..10)))
        .collect()
}
