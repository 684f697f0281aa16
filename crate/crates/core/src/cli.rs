//! Command-line driver. `main.rs` only parses arguments and maps the
//! outcome to an exit code; everything else lives here so tests can call it.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::callflow::{parse_callflow, CallFlowSet};
use crate::cdl::parse_cdl;
use crate::codegen::{
    build_generation_model, emit_all, line_report, EmittedFileSet, FileKind, TemplateError,
    TemplateSet, GEN_DIR, USER_DIR,
};
use crate::model::{build_model, check_acyclic, ComponentModel, ModelError};
use crate::optimizer::{initial_plan, optimize, LockPlan};
use crate::simcheck::{explore, lower_to_sim, Bounds};

/// Environment variable naming a directory of template overrides.
pub const TEMPLATES_ENV: &str = "TECSOE_TEMPLATES";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Pass {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "both")]
    Both,
}

/// Generate component scaffolding and an RTOS configuration from a
/// component description, optionally optimizing locks from task call flows.
#[derive(Debug, Clone, Parser)]
#[command(name = "tecsoe", version)]
pub struct Args {
    /// Component description file.
    #[arg(long)]
    pub cdl: PathBuf,
    /// Per-task call-flow file. Required for pass 2 and --simulate.
    #[arg(long)]
    pub flows: Option<PathBuf>,
    /// Output directory; `gen/` is regenerated, `src_user/` is only added to.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "1")]
    pub pass: Pass,
    /// Enumerate task interleavings under the final lock plan.
    #[arg(long)]
    pub simulate: bool,
    /// Maximum number of distinct states the simulator may visit.
    #[arg(long)]
    pub state_bound: Option<usize>,
    /// Print the lock plan and line counts to stdout.
    #[arg(long)]
    pub report: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    /// Diagnostics, one per line, already prefixed with the file path.
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Io(String),
    #[error("simulation found problems; see {report}")]
    Simulation { report: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Io(_) => 2,
            CliError::Simulation { .. } => 3,
        }
    }
}

impl From<TemplateError> for CliError {
    fn from(e: TemplateError) -> Self {
        CliError::Io(e.to_string())
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn prefixed(path: &Path, text: &str) -> String {
    text.lines()
        .map(|l| format!("{}:{l}", path.display()))
        .collect::<Vec<_>>()
        .join("\n")
}

fn load_model(path: &Path, text: &str) -> Result<ComponentModel, CliError> {
    let ast = parse_cdl(text).map_err(|e| CliError::Invalid(prefixed(path, &e.to_string())))?;
    let model = build_model(&ast).map_err(|e| {
        let body = match &e {
            ModelError::Invalid(report) => report.to_string(),
            other => format!(" {other}"),
        };
        CliError::Invalid(prefixed(path, &body))
    })?;
    let cycles = check_acyclic(&model);
    if !cycles.is_empty() {
        return Err(CliError::Invalid(prefixed(path, &cycles.to_string())));
    }
    Ok(model)
}

fn load_flows(path: &Path, model: &ComponentModel) -> Result<CallFlowSet, CliError> {
    let text = read(path)?;
    parse_callflow(&text, model).map_err(|e| {
        let msg = match e.span() {
            Some(_) => e.to_string(),
            None => format!(" {e}"),
        };
        CliError::Invalid(prefixed(path, &msg))
    })
}

/// SHA-256 of every file under `dir`, keyed by path relative to `dir`.
pub fn hash_tree(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, CliError> {
    let mut out = BTreeMap::new();
    if !dir.is_dir() {
        return Ok(out);
    }
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).map_err(|e| io_err(&d, e))? {
            let path = entry.map_err(|e| io_err(&d, e))?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let bytes = std::fs::read(&path).map_err(|e| io_err(&path, e))?;
                let rel = path
                    .strip_prefix(dir)
                    .unwrap()
                    .to_string_lossy()
                    .replace('\\', "/");
                out.insert(rel, Sha256::digest(&bytes).to_vec());
            }
        }
    }
    Ok(out)
}

/// What a run produced, for the caller to print.
#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    pub written: Vec<String>,
    pub kept: Vec<String>,
}

struct Inputs {
    cdl_text: String,
    model: ComponentModel,
    flows: Option<CallFlowSet>,
    templates: TemplateSet,
}

fn generate(inputs: &Inputs, plan: &LockPlan) -> Result<EmittedFileSet, CliError> {
    let gm = build_generation_model(&inputs.model, plan, inputs.flows.as_ref());
    Ok(emit_all(&gm, &inputs.templates, &BTreeSet::new())?)
}

/// Writes `files` under `out`, leaving existing user files byte-for-byte
/// untouched (checked by hashing before and after).
fn write_checked(
    files: &EmittedFileSet,
    out: &Path,
) -> Result<(Vec<String>, Vec<String>), CliError> {
    let user_dir = out.join(USER_DIR);
    let before = hash_tree(&user_dir)?;
    let summary = files.write_to(out).map_err(|e| io_err(out, e))?;
    let after = hash_tree(&user_dir)?;
    for (path, digest) in &before {
        if after.get(path) != Some(digest) {
            return Err(CliError::Io(format!(
                "{USER_DIR}/{path} changed during generation"
            )));
        }
    }
    Ok((summary.written, summary.kept))
}

pub fn run(args: &Args) -> Result<Outcome, CliError> {
    let cdl_text = read(&args.cdl)?;
    let model = load_model(&args.cdl, &cdl_text)?;
    let flows = match &args.flows {
        Some(p) => Some(load_flows(p, &model)?),
        None => None,
    };
    let needs_flows = args.pass != Pass::One || args.simulate;
    if needs_flows && flows.is_none() {
        return Err(CliError::Invalid(
            "--flows is required for pass 2 and --simulate".into(),
        ));
    }
    let template_dir = std::env::var_os(TEMPLATES_ENV).map(PathBuf::from);
    let inputs = Inputs {
        cdl_text,
        templates: TemplateSet::load(template_dir.as_deref())?,
        model,
        flows,
    };

    let mut outcome = Outcome::default();
    let plan1 = initial_plan(&inputs.model, inputs.flows.as_ref());
    let pass1 = generate(&inputs, &plan1)?;

    let (plan, mut files, report) = if args.pass == Pass::One {
        let report = line_report(&inputs.cdl_text, &pass1, None);
        (plan1, pass1, report)
    } else {
        if args.pass == Pass::Both {
            let mut first = pass1.clone();
            let r = line_report(&inputs.cdl_text, &pass1, None);
            first.insert(
                format!("{GEN_DIR}/lines.tsv"),
                FileKind::Report,
                r.to_string(),
            );
            let (w, k) = write_checked(&first, &args.out)?;
            outcome.written.extend(w);
            outcome.kept.extend(k);
        }
        let flows = inputs.flows.as_ref().expect("checked above");
        let plan2 = optimize(&inputs.model, flows);
        let pass2 = generate(&inputs, &plan2)?;
        let report = line_report(&inputs.cdl_text, &pass1, Some(&pass2));
        (plan2, pass2, report)
    };
    files.insert(
        format!("{GEN_DIR}/lines.tsv"),
        FileKind::Report,
        report.to_string(),
    );

    let mut sim_failed = None;
    if args.simulate {
        let flows = inputs.flows.as_ref().expect("checked above");
        let program = lower_to_sim(&inputs.model, flows, &plan);
        let mut bounds = Bounds::default();
        if let Some(n) = args.state_bound {
            bounds.max_states = n;
        }
        let result = explore(&program, bounds);
        let path = format!("{GEN_DIR}/simreport.txt");
        files.insert(path.clone(), FileKind::Report, result.report(&program));
        if !result.is_clean() {
            sim_failed = Some(path);
        }
    }

    let (w, k) = write_checked(&files, &args.out)?;
    outcome.written.extend(w);
    outcome.kept.extend(k);
    outcome.written.sort();
    outcome.written.dedup();
    outcome.kept.sort();
    outcome.kept.dedup();

    if args.report {
        outcome.stdout.push_str(&plan.report(&inputs.model));
        outcome.stdout.push('\n');
        outcome.stdout.push_str(&report.to_string());
    }
    if let Some(report) = sim_failed {
        return Err(CliError::Simulation {
            report: args.out.join(report).display().to_string(),
        });
    }
    Ok(outcome)
}
