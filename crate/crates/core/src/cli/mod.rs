//! Batch front end: parse a model file, run analyses, write a JSON report
//! and CSV trajectories.

mod analysis;
mod model;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::symcore::Sampler;

pub use analysis::{num, Failure, Outcome, EXIT_NUMERIC, EXIT_PARSE, EXIT_PRECONDITION};
pub use model::{ConnectionModel, ConnectionSpec, ControlModel, IntegrateModel, Model, ModelError, Symmetry, SymmetryKind};

pub const SCHEMA: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Lagrangian,
    Noether,
    Constraints,
    Kl,
    Geodesic,
    Control,
    All,
}

impl Command {
    pub const ANALYSES: [Command; 6] =
        [Command::Lagrangian, Command::Noether, Command::Constraints, Command::Kl, Command::Geodesic, Command::Control];

    pub fn name(self) -> &'static str {
        match self {
            Command::Lagrangian => "lagrangian",
            Command::Noether => "noether",
            Command::Constraints => "constraints",
            Command::Kl => "kl",
            Command::Geodesic => "geodesic",
            Command::Control => "control",
            Command::All => "all",
        }
    }

    /// Whether the model has the sections this analysis reads.
    fn applies(self, m: &Model) -> bool {
        match self {
            Command::Lagrangian | Command::Constraints | Command::Kl => m.lagrangian.is_some(),
            Command::Noether => m.lagrangian.is_some() && (!m.symmetries.is_empty() || !m.constants.is_empty()),
            Command::Geodesic => m.connection.is_some() && m.integrate.is_some(),
            Command::Control => m.control.is_some(),
            Command::All => true,
        }
    }

    fn analyse(self, m: &Model, s: &mut Sampler) -> Result<Outcome, Failure> {
        match self {
            Command::Lagrangian => analysis::lagrangian(m, s),
            Command::Noether => analysis::noether(m, s),
            Command::Constraints => analysis::constraints(m, s),
            Command::Kl => analysis::kl(m, s),
            Command::Geodesic => analysis::geodesic_report(m, s),
            Command::Control => analysis::control(m, s),
            Command::All => unreachable!("expanded by the caller"),
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "mech", version, about = "Analyses of mechanical systems described in a TOML model file")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    pub model: PathBuf,
    /// Seed for every random probe; defaults to `[integrate] seed` or 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory for the report and CSV files.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the JSON report instead of the text summary.
    #[arg(long)]
    pub json_only: bool,
}

/// Report and CSV files of one invocation.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Value,
    pub csv: Vec<(String, String)>,
    pub code: i32,
}

fn model_stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "model".to_string(), |s| s.to_string_lossy().into_owned())
}

/// Run a command on model text; the report is deterministic in
/// `(text, seed, command)`.
pub fn analyse(command: Command, text: &str, seed: Option<u64>) -> Result<RunOutput, Failure> {
    let model = Model::parse(text)?;
    let seed = seed.or(model.integrate.as_ref().and_then(|i| i.seed)).unwrap_or(0);
    let root = Sampler::new(seed);
    let commands: Vec<Command> = if command == Command::All {
        Command::ANALYSES.iter().copied().filter(|c| c.applies(&model)).collect()
    } else {
        vec![command]
    };
    let mut sections = Map::new();
    let mut csv = Vec::new();
    let mut code = 0;
    for c in commands {
        let mut sampler = root.fork(c.name());
        match c.analyse(&model, &mut sampler) {
            Ok(o) => {
                sections.insert(c.name().to_string(), o.section);
                csv.extend(o.csv);
            }
            Err(f) => {
                if code == 0 {
                    code = f.code;
                }
                sections.insert(c.name().to_string(), json!({ "error": f.message, "exit_code": f.code }));
            }
        }
    }
    let hash = hex::encode(Sha256::digest(text.as_bytes()));
    let report = json!({
        "schema": SCHEMA,
        "version": env!("CARGO_PKG_VERSION"),
        "command": command.name(),
        "model_hash": hash,
        "seed": seed,
        "analyses": Value::Object(sections),
    });
    Ok(RunOutput { report, csv, code })
}

/// One `key = value` line per scalar leaf of the report.
pub fn summary(report: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut String) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&p, x, out);
                }
            }
            Value::Array(xs) if xs.iter().any(|x| x.is_object() || x.is_array()) => {
                for (i, x) in xs.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), x, out);
                }
            }
            Value::String(s) => {
                let _ = writeln!(out, "{prefix} = {s}");
            }
            other => {
                let _ = writeln!(out, "{prefix} = {other}");
            }
        }
    }
    let mut out = String::new();
    walk("", report, &mut out);
    out
}

/// Entry point of the `mech` binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARSE } else { 0 };
        }
    };
    match execute(&args) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("mech: {}", f.message);
            f.code
        }
    }
}

pub fn execute(args: &Args) -> Result<i32, Failure> {
    let text = std::fs::read_to_string(&args.model)
        .map_err(|e| Failure { code: EXIT_PARSE, message: format!("{}: {e}", args.model.display()) })?;
    let run = analyse(args.command, &text, args.seed)?;
    let dir = args.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let io = |e: std::io::Error| Failure::precondition(format!("cannot write to {}: {e}", dir.display()));
    std::fs::create_dir_all(&dir).map_err(io)?;
    let stem = model_stem(&args.model);
    let mut json = serde_json::to_string_pretty(&run.report).expect("serializable");
    json.push('\n');
    std::fs::write(dir.join(format!("{stem}.report.json")), &json).map_err(io)?;
    for (name, body) in &run.csv {
        std::fs::write(dir.join(format!("{stem}.{name}.csv")), body).map_err(io)?;
    }
    if args.json_only {
        print!("{json}");
    } else {
        print!("{}", summary(&run.report));
    }
    if let Some(Value::Object(m)) = run.report.get("analyses") {
        for (name, s) in m {
            if let Some(e) = s.get("error").and_then(Value::as_str) {
                eprintln!("mech: {name}: {e}");
            }
        }
    }
    Ok(run.code)
}
