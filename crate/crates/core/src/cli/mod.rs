//! The `hierarch` command line.
//!
//! Exit codes: 0 success, 2 usage, 3 data, 4 provider. Failures print one
//! JSON object `{"error": <kind>, "message": <text>}` on stderr.

mod commands;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{ArgAction, ArgMatches, CommandFactory, FromArgMatches, Parser, Subcommand};
use serde_json::{Map, Value};

use crate::estimation::ModelKind;
use crate::games::{Condition, Fraction, GameKind};
use crate::harness::{HarnessError, Temperature};
use crate::store::StoreError;

pub use commands::fit_dataset;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Provider(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Provider(_) => 4,
        }
    }

    fn to_json(&self) -> String {
        let (kind, message) = match self {
            CliError::Usage(m) => ("usage", m),
            CliError::Data(m) => ("data", m),
            CliError::Provider(m) => ("provider", m),
        };
        serde_json::json!({ "error": kind, "message": message }).to_string()
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<StoreError> for CliError {
    fn from(e: StoreError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Provider(p) => CliError::Provider(p.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "hierarch", version, about = "Level-k and cognitive-hierarchy models for guessing games")]
pub struct Cli {
    /// JSON object of option values keyed by long flag name, plus an
    /// optional "command"; flags on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Write the fully resolved options of this run as a config file.
    #[arg(long, global = true, value_name = "FILE")]
    pub save_config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Prediction ladders by rank, as CSV or JSON.
    Predict(commands::PredictArgs),
    /// Fit level-k or CH to a response dataset.
    Estimate(commands::EstimateArgs),
    /// Repeated beauty contest with rule-based agents.
    Simulate(commands::SimulateArgs),
    /// Run an experiment plan against a chat service.
    Collect(commands::CollectArgs),
    /// Two-sample KS tests and the dominance verdict.
    Compare(commands::CompareArgs),
    /// Plot-ready CSVs from fits, datasets and simulation logs.
    Report(commands::ReportArgs),
}

const SUBCOMMANDS: [&str; 6] = ["predict", "estimate", "simulate", "collect", "compare", "report"];

/// Splits `--config FILE` out of the arguments.
fn take_config(args: &[OsString]) -> CliResult<(Option<PathBuf>, Vec<OsString>)> {
    let mut rest = Vec::with_capacity(args.len());
    let mut config = None;
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            let v = it.next().ok_or_else(|| CliError::Usage("--config needs a file".into()))?;
            config = Some(PathBuf::from(v));
        } else if let Some(v) = s.strip_prefix("--config=") {
            config = Some(PathBuf::from(v));
        } else {
            rest.push(a.clone());
        }
    }
    Ok((config, rest))
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Turns a config object into flags, returning the command it names.
fn config_args(path: &Path) -> CliResult<(Option<String>, Vec<OsString>)> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let doc: Map<String, Value> =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let mut command = None;
    let mut out = Vec::new();
    for (key, value) in doc {
        if key == "command" {
            command = Some(scalar(&value));
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => out.push(flag.into()),
            Value::Array(items) => {
                for item in items {
                    out.push(flag.clone().into());
                    out.push(scalar(&item).into());
                }
            }
            other => {
                out.push(flag.into());
                out.push(scalar(&other).into());
            }
        }
    }
    Ok((command, out))
}

/// Full argument list with config values placed ahead of the user's own
/// flags, so later (user) occurrences win.
fn merged_args(args: &[OsString]) -> CliResult<Vec<OsString>> {
    let (config, rest) = take_config(args)?;
    let Some(path) = config else {
        return Ok(rest);
    };
    let (cfg_command, cfg_args) = config_args(&path)?;
    let mut iter = rest.into_iter();
    let bin = iter.next().unwrap_or_else(|| "hierarch".into());
    let user: Vec<OsString> = iter.collect();
    let pos = user.iter().position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()));
    let (command, before, after) = match (pos, cfg_command) {
        (Some(i), cfg) => {
            let named = user[i].to_string_lossy().to_string();
            if let Some(c) = cfg.filter(|c| *c != named) {
                return Err(CliError::Usage(format!("config is for {c:?} but the command is {named:?}")));
            }
            (named, user[..i].to_vec(), user[i + 1..].to_vec())
        }
        (None, Some(c)) => (c, Vec::new(), user),
        (None, None) => return Err(CliError::Usage("no command given on the command line or in the config".into())),
    };
    let mut out = vec![bin];
    out.extend(before);
    out.push(command.into());
    out.extend(cfg_args);
    out.extend(after);
    Ok(out)
}

/// The resolved options of a subcommand as a config object.
fn resolved_config(name: &str, matches: &ArgMatches) -> Value {
    let cmd = Cli::command();
    let sub = cmd.find_subcommand(name).expect("known subcommand");
    let mut doc = Map::new();
    doc.insert("command".into(), Value::String(name.into()));
    for arg in sub.get_arguments() {
        let id = arg.get_id().as_str();
        if matches!(id, "config" | "save_config" | "help" | "version") {
            continue;
        }
        match arg.get_action() {
            ArgAction::SetTrue => {
                doc.insert(id.into(), Value::Bool(matches.get_flag(id)));
            }
            action => {
                let Some(raw) = matches.get_raw(id) else { continue };
                let vals: Vec<Value> = raw.map(|v| Value::String(v.to_string_lossy().into())).collect();
                let v = if matches!(action, ArgAction::Append) { Value::Array(vals) } else { vals[0].clone() };
                doc.insert(id.into(), v);
            }
        }
    }
    Value::Object(doc)
}

/// Parses and runs one invocation, returning the exit code.
pub fn run(args: Vec<OsString>) -> i32 {
    match dispatch(args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.code()
        }
    }
}

pub fn dispatch(args: Vec<OsString>) -> CliResult<()> {
    let args = merged_args(&args)?;
    let matches = match Cli::command().args_override_self(true).try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => match e.kind() {
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                print!("{e}");
                return Ok(());
            }
            _ => return Err(CliError::Usage(e.render().to_string().trim().to_string())),
        },
    };
    let cli = Cli::from_arg_matches(&matches).map_err(|e| CliError::Usage(e.to_string()))?;
    if let Some(path) = &cli.save_config {
        let (name, sub) = matches.subcommand().expect("subcommand required");
        let doc = serde_json::to_string_pretty(&resolved_config(name, sub)).expect("json value");
        std::fs::write(path, doc + "\n").map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    }
    match cli.command {
        Command::Predict(a) => commands::predict(a),
        Command::Estimate(a) => commands::estimate(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Collect(a) => commands::collect(a),
        Command::Compare(a) => commands::compare(a),
        Command::Report(a) => commands::report(a),
    }
}

pub(crate) fn parse_condition(s: &str) -> Result<Condition, crate::Error> {
    s.parse()
}

pub(crate) fn parse_model(s: &str) -> Result<ModelKind, crate::Error> {
    s.parse()
}

pub(crate) fn parse_game(s: &str) -> Result<GameKind, crate::Error> {
    s.parse()
}

pub(crate) fn parse_fraction(s: &str) -> Result<Fraction, crate::Error> {
    s.parse()
}

pub(crate) fn parse_temperature(s: &str) -> Result<Temperature, crate::Error> {
    s.parse()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn config_values_come_before_user_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        std::fs::write(&cfg, r#"{"command":"predict","game":"gg","tau":2.0,"quiet":true,"skip":false}"#).unwrap();
        let merged = merged_args(&os(&["hierarch", "--config", cfg.to_str().unwrap(), "--tau", "1.5"])).unwrap();
        assert_eq!(merged, os(&["hierarch", "predict", "--game", "gg", "--quiet", "--tau", "2.0", "--tau", "1.5"]));
    }

    #[test]
    fn conflicting_commands_are_usage_errors() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        std::fs::write(&cfg, r#"{"command":"predict"}"#).unwrap();
        let err = merged_args(&os(&["hierarch", "estimate", "--config", cfg.to_str().unwrap()])).unwrap_err();
        assert_eq!(err.code(), 2);
    }

    #[test]
    fn unknown_flags_are_usage_errors() {
        let err = dispatch(os(&["hierarch", "predict", "--bogus"])).unwrap_err();
        assert_eq!(err.code(), 2);
    }
}
