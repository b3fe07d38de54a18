mod commands;
mod emit;
mod scene;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use commands::{CartanOp, CheckKind, Outcome, EXIT_MALFORMED};
use scene::{Scene, SceneError};

#[derive(Parser)]
#[command(name = "conred", version, about = "Classify, reduce and check objects on flat constraint spaces")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the W/N class of an object.
    Classify { scene: PathBuf, name: String },
    /// Emit the reduced object as a new scene.
    Reduce { scene: PathBuf, name: String },
    /// Run a checker on an object.
    Check {
        #[arg(value_enum)]
        kind: CheckKind,
        scene: PathBuf,
        name: String,
    },
    /// Apply a calculus operation to named objects.
    Cartan {
        #[arg(value_enum)]
        op: CartanOp,
        scene: PathBuf,
        #[arg(required = true)]
        names: Vec<String>,
    },
    /// Run the full invariant suite.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Run the sweeps on one thread.
        #[arg(long)]
        sequential: bool,
    },
}

fn load(path: &Path) -> Result<Scene, SceneError> {
    let text = std::fs::read_to_string(path).map_err(|e| SceneError::at(path.display().to_string(), e))?;
    Scene::parse(&text)
}

fn dispatch(cmd: Cmd) -> Result<Outcome, SceneError> {
    match cmd {
        Cmd::Classify { scene, name } => commands::classify(&load(&scene)?, &name),
        Cmd::Reduce { scene, name } => commands::reduce(&load(&scene)?, &name),
        Cmd::Check { kind, scene, name } => commands::check(kind, &load(&scene)?, &name),
        Cmd::Cartan { op, scene, names } => commands::cartan_op(op, &load(&scene)?, &names),
        Cmd::Selftest { seed, sequential } => Ok(commands::run_selftest(seed, sequential)),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    let outcome = dispatch(cli.cmd).unwrap_or_else(|e| {
        let mut err = json!({"message": e.to_string()});
        if let Some(loc) = e.location() {
            err["location"] = Value::String(loc.into());
        }
        let mut o = Outcome { code: EXIT_MALFORMED, body: Default::default(), summary: format!("error: {e}") };
        o.body.insert("error".into(), err);
        o
    });
    let mut report = json!({"command": argv, "status": outcome.status()});
    for (k, v) in outcome.body {
        report[k] = v;
    }
    println!("{}", serde_json::to_string_pretty(&report).expect("plain data"));
    eprintln!("{}", outcome.summary);
    ExitCode::from(outcome.code as u8)
}
