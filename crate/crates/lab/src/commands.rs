//! Command dispatch: argument parsing, workspace loading, library calls, and
//! report assembly.
//!
//! Exit codes: 0 success; 1 negative verdict where the command makes
//! negativity an outcome (no embedding, unrelated tuple, blocked witness,
//! failed axiom, unrealized extension problems); 2 input error; 3 node
//! budget exceeded. Every error also lands in the report as a structured
//! diagnostic.

use std::path::PathBuf;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use fraisse_core::amalgam::{check_axioms_on, AxiomReport};
use fraisse_core::canon::canonical_form;
use fraisse_core::classify::class_report;
use fraisse_core::embed::{find_embedding, find_embedding_budgeted, BudgetedSearch, EmbeddingMode};
use fraisse_core::enumerate::{enumerate_up_to, DEFAULT_ENUMERATION_CAP};
use fraisse_core::forbidden::{is_k_irreducible, minimalize, ForbiddenFamily, Irreducibility};
use fraisse_core::generic::{default_depth, extension_axiom_audit, generate, GenerateOptions};
use fraisse_core::structure::RelStructure;
use fraisse_core::witness::{
    dividing_witness, nonsimplicity_witness, sop3_certificate, sop_cycle, CycleOutcome,
    DividingOutcome,
};

use crate::dsl::{self, Workspace};
use crate::report::*;

#[derive(Parser, Debug)]
#[command(name = "fraisse-lab", version, about = "Forbidden-substructure classes: classification, generic structures, and witness certificates", disable_help_subcommand = true)]
struct Cli {
    /// Worker threads for partitionable commands
    /// (falls back to FRAISSE_LAB_THREADS, then to available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Minimalise a family and decide simplicity of its generic theory.
    Classify {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        family: String,
    },
    /// Emit the minimal forbidden family as DSL text.
    Minimalize {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        family: String,
        /// Write the DSL text here and report on stdout instead.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check k-irreducibility of a structure.
    Irreducible {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        structure: String,
        #[arg(long)]
        k: usize,
    },
    /// Grow a free structure by extension-axiom saturation.
    Generate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        family: String,
        #[arg(long)]
        size: usize,
        /// Defaults to (largest member size - 1), or 2 for an empty family.
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Audit extension-axiom saturation of a structure.
    Audit {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        structure: String,
        #[arg(long)]
        family: String,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Build witness configurations with re-verifiable certificates.
    Witness {
        #[command(subcommand)]
        which: WitnessCmd,
    },
    /// Exhaustively check the independence axioms over small structures.
    Axioms {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        signature: String,
        #[arg(long)]
        max_size: usize,
        /// Enumeration cap (sizes above it are refused).
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: usize,
    },
    /// Search for a weak or induced embedding between two structures.
    Embed {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Node budget; exhausting it exits 3 instead of deciding.
        #[arg(long)]
        budget: Option<u64>,
    },
}

#[derive(Subcommand, Debug)]
enum WitnessCmd {
    /// Row construction refuting simplicity, with contradiction certificate.
    Nonsimplicity {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        family: String,
        /// Member structure to use (default: first non-3-irreducible one).
        #[arg(long)]
        member: Option<String>,
        #[arg(long, default_value_t = 3)]
        rows: usize,
    },
    /// Spine tuple attached over an independent sequence of copies.
    Dividing {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        family: String,
        #[arg(long)]
        pattern: String,
        #[arg(long, default_value_t = 3)]
        copies: usize,
    },
    /// The n-cycle of a self-paired pattern.
    SopCycle {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        family: String,
        #[arg(long)]
        pattern: String,
        #[arg(long)]
        n: usize,
    },
    /// Order-property certificate from the row construction.
    Sop3 {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        family: String,
        #[arg(long)]
        member: Option<String>,
        #[arg(long, default_value_t = 3)]
        rows: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Weak,
    Induced,
}

impl From<ModeArg> for EmbeddingMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Weak => EmbeddingMode::Weak,
            ModeArg::Induced => EmbeddingMode::Induced,
        }
    }
}

/// What the process should print and how it should exit.
pub struct CommandOutput {
    pub exit: i32,
    pub stdout: StdoutPayload,
}

pub enum StdoutPayload {
    Json(Value),
    Text(String),
}

struct CmdError {
    exit: i32,
    code: String,
    message: String,
    diagnostics: Vec<Value>,
}

impl CmdError {
    fn input(code: &str, message: impl Into<String>) -> Self {
        CmdError { exit: 2, code: code.into(), message: message.into(), diagnostics: Vec::new() }
    }
}

macro_rules! input_error {
    ($code:expr, $($arg:tt)*) => { CmdError::input($code, format!($($arg)*)) };
}

pub fn run(argv: &[String]) -> CommandOutput {
    let started = Instant::now();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            return CommandOutput { exit: 0, stdout: StdoutPayload::Text(e.to_string()) };
        }
        Err(e) => {
            let report = envelope(
                argv,
                json!({"error": {"code": "usage", "message": e.to_string()}}),
                started,
            );
            return CommandOutput { exit: 2, stdout: StdoutPayload::Json(report) };
        }
    };
    let threads = resolve_threads(cli.threads);
    match dispatch(cli.command, threads) {
        Ok((exit, payload, artifact)) => match artifact {
            Some(text) => CommandOutput { exit, stdout: StdoutPayload::Text(text) },
            None => CommandOutput {
                exit,
                stdout: StdoutPayload::Json(envelope(argv, payload, started)),
            },
        },
        Err(e) => {
            let payload = json!({"error": {
                "code": e.code,
                "message": e.message,
                "diagnostics": e.diagnostics,
            }});
            CommandOutput { exit: e.exit, stdout: StdoutPayload::Json(envelope(argv, payload, started)) }
        }
    }
}

fn envelope(argv: &[String], payload: Value, started: Instant) -> Value {
    let mut report = json!({
        "schema": 1,
        "tool": {"name": "fraisse-lab", "version": env!("CARGO_PKG_VERSION")},
        "command": argv.iter().skip(1).collect::<Vec<_>>(),
        "timing_ms": started.elapsed().as_millis() as u64,
    });
    if let (Value::Object(report), Value::Object(payload)) = (&mut report, payload) {
        for (k, v) in payload {
            report.insert(k, v);
        }
    }
    report
}

fn resolve_threads(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("FRAISSE_LAB_THREADS").ok().and_then(|v| v.parse().ok())
    })
    .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
    .max(1)
}

fn load(files: &[PathBuf]) -> Result<Workspace, CmdError> {
    let mut ws = Workspace::default();
    for path in files {
        let text = std::fs::read_to_string(path).map_err(|e| {
            input_error!("io", "cannot read {}: {e}", path.display())
        })?;
        ws = dsl::parse_workspace_with(ws, &text).map_err(|diags| {
            let mut err = CmdError::input("parse", format!("{} does not parse", path.display()));
            err.diagnostics = diags
                .iter()
                .map(|d| {
                    json!({
                        "file": path.display().to_string(),
                        "line": d.line,
                        "col": d.col,
                        "code": d.code.as_str(),
                        "message": d.message,
                    })
                })
                .collect();
            err
        })?;
    }
    Ok(ws)
}

fn named_family(ws: &Workspace, name: &str) -> Result<ForbiddenFamily, CmdError> {
    ws.family(name)
        .map(|f| f.family.clone())
        .ok_or_else(|| input_error!("unresolved-name", "family `{name}` is not declared"))
}

fn named_structure(ws: &Workspace, name: &str) -> Result<RelStructure, CmdError> {
    ws.structure(name)
        .map(|s| s.structure.clone())
        .ok_or_else(|| input_error!("unresolved-name", "structure `{name}` is not declared"))
}

fn family_inputs(name: &str, f: &ForbiddenFamily) -> Value {
    json!({"family": {
        "name": name,
        "member_codes": f.members().iter().map(|m| canonical_form(m).to_string()).collect::<Vec<String>>(),
    }})
}

type Dispatched = (i32, Value, Option<String>);

fn dispatch(cmd: Cmd, threads: usize) -> Result<Dispatched, CmdError> {
    match cmd {
        Cmd::Classify { files, family } => {
            let ws = load(&files)?;
            let declared = named_family(&ws, &family)?;
            let minimal = minimalize(&declared);
            let report = class_report(&minimal)
                .map_err(|e| input_error!("classify", "{e}"))?;
            let payload = json!({
                "inputs": family_inputs(&family, &declared),
                "verdict": class_report_json(&report),
            });
            Ok((0, payload, None))
        }
        Cmd::Minimalize { files, family, out } => {
            let ws = load(&files)?;
            let named = ws
                .family(&family)
                .ok_or_else(|| input_error!("unresolved-name", "family `{family}` is not declared"))?;
            let minimal = minimalize(&named.family);
            let text = minimal_family_text(&ws, named, &minimal);
            match out {
                Some(path) => {
                    std::fs::write(&path, &text).map_err(|e| {
                        input_error!("io", "cannot write {}: {e}", path.display())
                    })?;
                    let payload = json!({
                        "inputs": family_inputs(&family, &named.family),
                        "verdict": {
                            "members_before": named.family.len(),
                            "members_after": minimal.len(),
                            "family": family_json(&minimal),
                            "out": path.display().to_string(),
                        },
                    });
                    Ok((0, payload, None))
                }
                None => Ok((0, Value::Null, Some(text))),
            }
        }
        Cmd::Irreducible { files, structure, k } => {
            if k < 2 {
                return Err(input_error!("bad-argument", "k must be at least 2, got {k}"));
            }
            let ws = load(&files)?;
            let s = named_structure(&ws, &structure)?;
            let verdict = is_k_irreducible(&s, k);
            let exit = if verdict.is_irreducible() { 0 } else { 1 };
            let payload = json!({
                "inputs": {"structure": {"name": structure, "code": canonical_form(&s).to_string()}},
                "verdict": match &verdict {
                    Irreducibility::Irreducible => json!({"k": k, "outcome": "irreducible"}),
                    Irreducibility::UnrelatedTuple(w) => json!({
                        "k": k,
                        "outcome": "unrelated-tuple",
                        "witness": w.iter().map(|&p| p as u64).collect::<Vec<u64>>(),
                    }),
                },
            });
            Ok((exit, payload, None))
        }
        Cmd::Generate { files, family, size, depth, seed, out } => {
            let ws = load(&files)?;
            let declared = named_family(&ws, &family)?;
            let minimal = minimalize(&declared);
            let depth = depth.unwrap_or_else(|| default_depth(&minimal));
            let opts = GenerateOptions { size, depth, seed, allow_unclosed: false };
            let m = generate(&minimal, &opts).map_err(|e| input_error!("generate", "{e}"))?;
            let name = format!("{family}-n{size}-m{depth}-s{seed}");
            let text = dsl::print_structure_file(&ws, &name, &m);
            std::fs::write(&out, &text)
                .map_err(|e| input_error!("io", "cannot write {}: {e}", out.display()))?;
            let payload = json!({
                "inputs": family_inputs(&family, &declared),
                "verdict": {
                    "size": m.size(),
                    "depth": depth,
                    "seed": seed,
                    "instances": m.instance_count(),
                    "canonical_code": canonical_form(&m).to_string(),
                    "structure_name": name,
                    "out": out.display().to_string(),
                },
            });
            Ok((0, payload, None))
        }
        Cmd::Audit { files, structure, family, depth } => {
            let ws = load(&files)?;
            let s = named_structure(&ws, &structure)?;
            let declared = named_family(&ws, &family)?;
            let minimal = minimalize(&declared);
            let depth = depth.unwrap_or_else(|| default_depth(&minimal));
            let audit = extension_axiom_audit(&s, &minimal, depth)
                .map_err(|e| input_error!("audit", "{e}"))?;
            let exit = if audit.fully_realized() { 0 } else { 1 };
            let payload = json!({
                "inputs": {
                    "structure": {"name": structure, "code": canonical_form(&s).to_string()},
                    "family": family_inputs(&family, &declared)["family"],
                },
                "verdict": genericity_audit_json(&audit),
            });
            Ok((exit, payload, None))
        }
        Cmd::Witness { which } => witness(which),
        Cmd::Axioms { files, signature, max_size, cap } => {
            let ws = load(&files)?;
            let sig = ws
                .signature(&signature)
                .cloned()
                .ok_or_else(|| input_error!("unresolved-name", "signature `{signature}` is not declared"))?;
            let structures = enumerate_up_to(&sig, max_size, cap)
                .map_err(|e| input_error!("enumeration", "{e}"))?;
            let report = parallel_axiom_check(&structures, threads);
            let exit = if report.all_hold() { 0 } else { 1 };
            let payload = json!({
                "inputs": {"signature": {"name": signature, "symbols": signature_json(&sig)["symbols"]}},
                "verdict": axiom_report_json(&report),
            });
            Ok((exit, payload, None))
        }
        Cmd::Embed { files, a, b, mode, budget } => {
            let ws = load(&files)?;
            let sa = named_structure(&ws, &a)?;
            let sb = named_structure(&ws, &b)?;
            let mode: EmbeddingMode = mode.into();
            let inputs = json!({
                "a": {"name": a, "code": canonical_form(&sa).to_string()},
                "b": {"name": b, "code": canonical_form(&sb).to_string()},
            });
            let (exit, verdict) = match budget {
                None => {
                    let found = find_embedding(&sa, &sb, mode, None)
                        .map_err(|e| input_error!("embed", "{e}"))?;
                    match found {
                        Some(e) => (0, json!({"outcome": "found", "embedding": embedding_json(&e)})),
                        None => (1, json!({"outcome": "absent"})),
                    }
                }
                Some(budget) => {
                    match find_embedding_budgeted(&sa, &sb, mode, None, budget)
                        .map_err(|e| input_error!("embed", "{e}"))?
                    {
                        BudgetedSearch::Found(e) => {
                            (0, json!({"outcome": "found", "embedding": embedding_json(&e)}))
                        }
                        BudgetedSearch::NotFound => (1, json!({"outcome": "absent"})),
                        BudgetedSearch::BudgetExceeded { nodes } => {
                            (3, json!({"outcome": "budget-exceeded", "nodes": nodes}))
                        }
                    }
                }
            };
            Ok((exit, json!({"inputs": inputs, "verdict": verdict}), None))
        }
    }
}

fn witness(cmd: WitnessCmd) -> Result<Dispatched, CmdError> {
    match cmd {
        WitnessCmd::Nonsimplicity { files, family, member, rows } => {
            let ws = load(&files)?;
            let declared = named_family(&ws, &family)?;
            let minimal = minimalize(&declared);
            let member = resolve_member(&ws, &minimal, member.as_deref())?;
            let w = nonsimplicity_witness(&minimal, member, rows)
                .map_err(|e| input_error!("witness", "{e}"))?;
            let payload = json!({
                "inputs": family_inputs(&family, &declared),
                "verdict": {"outcome": "witness", "witness": nonsimplicity_witness_json(&w)},
            });
            Ok((0, payload, None))
        }
        WitnessCmd::Dividing { files, family, pattern, copies } => {
            let ws = load(&files)?;
            let declared = named_family(&ws, &family)?;
            let minimal = minimalize(&declared);
            let p = ws
                .pattern(&pattern)
                .ok_or_else(|| input_error!("unresolved-name", "pattern `{pattern}` is not declared"))?;
            let outcome = dividing_witness(&p.pattern, &minimal, copies)
                .map_err(|e| input_error!("witness", "{e}"))?;
            let (exit, verdict) = match outcome {
                DividingOutcome::Witness(w) => (
                    0,
                    json!({
                        "outcome": "witness",
                        "structure": structure_json(&w.structure),
                        "base": points_json(w.base),
                        "copies": w.copies.iter().map(|&c| points_json(c)).collect::<Vec<Value>>(),
                        "spine": points_json(w.spine),
                    }),
                ),
                DividingOutcome::Blocked { member, embedding } => (
                    1,
                    json!({
                        "outcome": "blocked",
                        "member": member,
                        "embedding": embedding_json(&embedding),
                    }),
                ),
            };
            let payload = json!({
                "inputs": family_inputs(&family, &declared),
                "verdict": verdict,
            });
            Ok((exit, payload, None))
        }
        WitnessCmd::SopCycle { files, family, pattern, n } => {
            let ws = load(&files)?;
            let declared = named_family(&ws, &family)?;
            let minimal = minimalize(&declared);
            let p = ws
                .pattern(&pattern)
                .ok_or_else(|| input_error!("unresolved-name", "pattern `{pattern}` is not declared"))?;
            let outcome =
                sop_cycle(&p.pattern, &minimal, n).map_err(|e| input_error!("witness", "{e}"))?;
            let (exit, verdict) = match outcome {
                CycleOutcome::Free(w) => (
                    0,
                    json!({
                        "outcome": "free",
                        "structure": structure_json(&w.structure),
                        "base": points_json(w.base),
                        "copies": w.copies.iter().map(|&c| points_json(c)).collect::<Vec<Value>>(),
                    }),
                ),
                CycleOutcome::Blocked { member, embedding } => (
                    1,
                    json!({
                        "outcome": "blocked",
                        "member": member,
                        "embedding": embedding_json(&embedding),
                    }),
                ),
            };
            let payload = json!({
                "inputs": family_inputs(&family, &declared),
                "verdict": verdict,
            });
            Ok((exit, payload, None))
        }
        WitnessCmd::Sop3 { files, family, member, rows } => {
            let ws = load(&files)?;
            let declared = named_family(&ws, &family)?;
            let minimal = minimalize(&declared);
            let member = resolve_member(&ws, &minimal, member.as_deref())?;
            let w = nonsimplicity_witness(&minimal, member, rows)
                .map_err(|e| input_error!("witness", "{e}"))?;
            let cert = sop3_certificate(&minimal, &w)
                .map_err(|e| input_error!("witness", "{e}"))?;
            let payload = json!({
                "inputs": family_inputs(&family, &declared),
                "verdict": {
                    "outcome": "certificate",
                    "witness": nonsimplicity_witness_json(&w),
                    "certificate": sop3_certificate_json(&cert),
                },
            });
            Ok((0, payload, None))
        }
    }
}

/// Picks the member index: by name when given, otherwise the first member
/// admitting an unrelated triple.
fn resolve_member(
    ws: &Workspace,
    minimal: &ForbiddenFamily,
    name: Option<&str>,
) -> Result<usize, CmdError> {
    match name {
        Some(name) => {
            let s = named_structure(ws, name)?;
            let code = canonical_form(&s);
            minimal
                .members()
                .iter()
                .position(|m| canonical_form(m) == code)
                .ok_or_else(|| {
                    input_error!(
                        "unresolved-name",
                        "`{name}` is not a member of the minimalised family"
                    )
                })
        }
        None => minimal
            .members()
            .iter()
            .position(|m| !is_k_irreducible(m, 3).is_irreducible())
            .ok_or_else(|| {
                input_error!(
                    "witness",
                    "every member is 3-irreducible; no non-simplicity witness exists"
                )
            }),
    }
}

/// The minimal family as a standalone DSL text: signature, member structure
/// declarations, and the family itself.
fn minimal_family_text(
    ws: &Workspace,
    named: &crate::dsl::NamedFamily,
    minimal: &ForbiddenFamily,
) -> String {
    let sig = ws.signature(&named.signature_name).expect("family's signature is declared");
    let mut lines = vec![dsl::print_signature(&named.signature_name, sig)];
    let mut member_names = Vec::new();
    for (i, member) in minimal.members().iter().enumerate() {
        // reuse the declared name when the member survived unchanged
        let code = canonical_form(member);
        let original = named
            .member_names
            .iter()
            .find(|n| {
                ws.structure(n)
                    .map(|s| canonical_form(&s.structure) == code)
                    .unwrap_or(false)
            })
            .cloned();
        let name = original.unwrap_or_else(|| format!("{}-min{}", named.name, i));
        lines.push(dsl::print_structure(&name, &named.signature_name, member));
        member_names.push(name);
    }
    lines.push(dsl::print_family(&named.name, &named.signature_name, &member_names));
    let mut out = lines.join("\n");
    out.push('\n');
    out
}

/// Splits the isomorphism classes across workers and folds the per-structure
/// reports deterministically (chunk order, first counterexample wins).
fn parallel_axiom_check(structures: &[RelStructure], threads: usize) -> AxiomReport {
    let threads = threads.min(structures.len()).max(1);
    let chunk_size = structures.len().div_ceil(threads);
    let partial: Vec<AxiomReport> = std::thread::scope(|scope| {
        let handles: Vec<_> = structures
            .chunks(chunk_size)
            .map(|chunk| {
                scope.spawn(move || {
                    let mut acc: Option<AxiomReport> = None;
                    for d in chunk {
                        let part = check_axioms_on(d, &fraisse_core::amalgam::fa_independent);
                        acc = Some(match acc {
                            None => part,
                            Some(prev) => prev.merge(part),
                        });
                    }
                    acc
                })
            })
            .collect();
        handles.into_iter().filter_map(|h| h.join().expect("worker panicked")).collect()
    });
    partial
        .into_iter()
        .reduce(AxiomReport::merge)
        .expect("at least the empty structure is always enumerated")
}
