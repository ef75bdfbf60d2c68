//! `revlang`: parse, run, invert and reverse programs from the shell, or
//! serve the stepping API.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use revlang_core::checker::{equivalence, final_stores, roundtrip, BodyRelation};
use revlang_core::engine::{run_to_completion, Bundle, Config, DEFAULT_BUDGET};
use revlang_core::scheduler::{Schedule, SchedulePolicy};
use revlang_core::syntax::{render, render_annotated, Program};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Runtime(String),
    #[error("{0}")]
    Conformance(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Runtime(_) => 3,
            CliError::Conformance(_) => 4,
        }
    }
}

impl From<revlang_core::Error> for CliError {
    fn from(e: revlang_core::Error) -> Self {
        match e {
            revlang_core::Error::Syntax(_) | revlang_core::Error::Invalid(_) => {
                CliError::Parse(e.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<revlang_core::engine::EngineError> for CliError {
    fn from(e: revlang_core::engine::EngineError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "revlang",
    version,
    about = "Reversible interpreter for a small while-language"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum RunMode {
    Plain,
    Annotated,
}

#[derive(Subcommand)]
enum Command {
    /// Print the canonical rendering of a program
    Parse {
        file: PathBuf,
        /// Print the syntax tree as JSON instead
        #[arg(long)]
        json: bool,
    },
    /// Check that a program is a valid source program
    Validate { file: PathBuf },
    /// Execute a program
    Run {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "annotated")]
        mode: RunMode,
        /// Initial globals, e.g. F=3,S=4
        #[arg(long, value_delimiter = ',')]
        init: Vec<String>,
        /// `seed:N` or a schedule JSON file
        #[arg(long)]
        schedule: Option<String>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long)]
        dump_state: Option<PathBuf>,
        #[arg(long)]
        dump_bundle: Option<PathBuf>,
    },
    /// Print the inverted program of a recorded run
    Invert {
        bundle: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Reverse a recorded run and compare with its initial state
    Reverse {
        bundle: PathBuf,
        #[arg(long)]
        dump_state: Option<PathBuf>,
    },
    /// Run, invert and reverse under many schedules, checking every property
    Roundtrip {
        file: PathBuf,
        #[arg(long, default_value_t = 10)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',')]
        init: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Also enumerate every interleaving and list the distinct final stores
        #[arg(long)]
        race: bool,
    },
    /// Serve the stepping API
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        ui_dir: Option<PathBuf>,
        /// Idle session lifetime in seconds
        #[arg(long, default_value_t = 1800)]
        ttl: u64,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<(String, Program)> {
    let src = read(path)?;
    let p = revlang_core::parse_and_validate(&src)?;
    Ok((src, p))
}

fn parse_init(pairs: &[String]) -> Result<BTreeMap<String, i64>> {
    pairs
        .iter()
        .filter(|s| !s.is_empty())
        .map(|s| {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--init expects name=value, got `{s}`")))?;
            let v = v
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("`{v}` is not an integer")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn parse_schedule(arg: Option<&str>) -> Result<SchedulePolicy> {
    let Some(arg) = arg else {
        return Ok(SchedulePolicy::default());
    };
    if let Some(n) = arg.strip_prefix("seed:") {
        let seed = n
            .parse()
            .map_err(|_| CliError::Usage(format!("bad seed `{n}`")))?;
        return Ok(SchedulePolicy::seeded(seed));
    }
    let s: Schedule = serde_json::from_str(&read(Path::new(arg))?)
        .map_err(|e| CliError::Parse(format!("{arg}: {e}")))?;
    Ok(SchedulePolicy::scripted(s.choices))
}

fn store_line(c: &Config) -> String {
    let g: Vec<String> = c
        .env
        .globals()
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect();
    g.join(" ")
}

fn load_bundle(path: &Path) -> Result<Bundle> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn cmd_parse(file: &Path, json: bool) -> Result<()> {
    let p = revlang_core::syntax::parse_program(&read(file)?)
        .map_err(|e| CliError::Parse(format!("parse error at {e}")))?;
    if json {
        let v = revlang_core::syntax::json::program_to_json(&p);
        println!(
            "{}",
            serde_json::to_string_pretty(&v).expect("json values serialize")
        );
    } else {
        print!("{}", render(&p));
    }
    Ok(())
}

fn cmd_validate(file: &Path) -> Result<()> {
    load(file)?;
    println!("ok");
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    file: &Path,
    mode: RunMode,
    init: &[String],
    schedule: Option<&str>,
    budget: u64,
    dump_state: Option<&Path>,
    dump_bundle: Option<&Path>,
) -> Result<()> {
    let (src, p) = load(file)?;
    let init = parse_init(init)?;
    let mut policy = parse_schedule(schedule)?;
    let mut c = match mode {
        RunMode::Plain => Config::plain(&p, &init),
        RunMode::Annotated => Config::annotated(&p, &init)?,
    };
    let trace = run_to_completion(&mut c, &mut policy, budget)?;
    println!("{}", store_line(&c));
    println!("steps: {}", trace.records.len());
    if let RunMode::Annotated = mode {
        let (e, t) = c.executed_program()?;
        print!("{}", render_annotated(&e, &t));
    }
    if let Some(path) = dump_state {
        write(path, &format!("{:#}\n", c.dump_state()))?;
    }
    if let Some(path) = dump_bundle {
        if let RunMode::Plain = mode {
            return Err(CliError::Usage(
                "--dump-bundle needs --mode annotated".into(),
            ));
        }
        let b = Bundle::new(&src, &init, &c, &trace)?;
        write(
            path,
            &serde_json::to_string_pretty(&b).expect("bundles serialize"),
        )?;
    }
    Ok(())
}

fn cmd_invert(bundle: &Path, output: Option<&Path>) -> Result<()> {
    let fwd = load_bundle(bundle)?.replay(DEFAULT_BUDGET)?;
    let r = Config::reverse_of(&fwd)?;
    let text = render_annotated(&r.program, &r.table);
    match output {
        Some(path) => write(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_reverse(bundle: &Path, dump_state: Option<&Path>) -> Result<()> {
    let b = load_bundle(bundle)?;
    let fwd = b.replay(DEFAULT_BUDGET)?;
    let initial = Config::annotated(&revlang_core::parse_and_validate(&b.source)?, &b.init)?;
    let mut r = Config::reverse_of(&fwd)?;
    let trace = run_to_completion(&mut r, &mut SchedulePolicy::LeftmostFirst, DEFAULT_BUDGET)?;
    println!("{}", store_line(&r));
    println!("steps: {}", trace.records.len());
    let report = equivalence(&initial, &r, BodyRelation::Inverted);
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("reports serialize")
    );
    if let Some(path) = dump_state {
        write(path, &format!("{:#}\n", r.dump_state()))?;
    }
    let empty = r.aux.is_empty();
    println!("delta empty: {empty}");
    if report.overall && empty && r.eval_count == 0 {
        println!("restored");
        Ok(())
    } else {
        Err(CliError::Conformance("initial state not restored".into()))
    }
}

fn cmd_roundtrip(
    file: &Path,
    trials: u64,
    seed: u64,
    init: &[String],
    budget: u64,
    race: bool,
) -> Result<()> {
    let (_, p) = load(file)?;
    let init = parse_init(init)?;
    let mut passed = 0;
    let mut finals: BTreeMap<String, BTreeSet<i64>> = BTreeMap::new();
    for t in 0..trials {
        let s = seed.wrapping_add(t);
        let report = roundtrip(&p, &init, &mut SchedulePolicy::seeded(s), budget)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        if report.passed {
            passed += 1;
        } else {
            println!(
                "seed {s}: FAIL {}",
                serde_json::to_string(&report).expect("reports serialize")
            );
        }
        let mut c = Config::plain(&p, &init);
        run_to_completion(
            &mut c,
            &mut SchedulePolicy::scripted(report.forward_trace.schedule.choices),
            budget,
        )?;
        for (k, v) in c.env.globals() {
            finals.entry(k).or_default().insert(v);
        }
    }
    let kind = if p.contains_par() {
        " (extended: par)"
    } else {
        ""
    };
    println!("{passed}/{trials} pass{kind}");
    for (k, vs) in &finals {
        let vs: Vec<String> = vs.iter().map(i64::to_string).collect();
        println!("final {k}: {}", vs.join(" "));
    }
    if race {
        let all = final_stores(&p, &init, budget as usize)?;
        println!("interleavings reach {} distinct final store(s):", all.len());
        for g in &all {
            let line: Vec<String> = g.iter().map(|(k, v)| format!("{k}={v}")).collect();
            println!("  {}", line.join(" "));
        }
    }
    if passed == trials {
        Ok(())
    } else {
        Err(CliError::Conformance(format!(
            "{} trial(s) failed",
            trials - passed
        )))
    }
}

fn cmd_serve(port: u16, ui_dir: Option<PathBuf>, ttl: u64) -> Result<()> {
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Runtime(e.to_string()))?;
    let addr = std::net::SocketAddr::from(([127, 0, 0, 1], port));
    eprintln!("listening on http://{addr}");
    rt.block_on(revlang_service::serve(
        addr,
        ui_dir,
        Duration::from_secs(ttl),
    ))
    .map_err(|e| CliError::Runtime(e.to_string()))
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Parse { file, json } => cmd_parse(&file, json),
        Command::Validate { file } => cmd_validate(&file),
        Command::Run {
            file,
            mode,
            init,
            schedule,
            budget,
            dump_state,
            dump_bundle,
        } => cmd_run(
            &file,
            mode,
            &init,
            schedule.as_deref(),
            budget,
            dump_state.as_deref(),
            dump_bundle.as_deref(),
        ),
        Command::Invert { bundle, output } => cmd_invert(&bundle, output.as_deref()),
        Command::Reverse { bundle, dump_state } => cmd_reverse(&bundle, dump_state.as_deref()),
        Command::Roundtrip {
            file,
            trials,
            seed,
            init,
            budget,
            race,
        } => cmd_roundtrip(&file, trials, seed, &init, budget, race),
        Command::Serve { port, ui_dir, ttl } => cmd_serve(port, ui_dir, ttl),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
