//! Command-line surface: problem files, the five subcommands and exit codes.
//!
//! A problem file is JSON:
//!
//! ```json
//! {
//!   "variables": ["x1", "x2"],
//!   "constraints": ["1 - x1^4 - x2^4 - x1^2*x2^2 >= 0"],
//!   "box": [[-1.5, 1.5], [-1.5, 1.5]],
//!   "options": { "eps_gap": 1e-8 }
//! }
//! ```
//!
//! `box` and `options` are optional. Without a box, one is derived from the
//! coordinate ranges of the dense lift.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::geometry::{curvature_check, sample_boundary, CurvatureVerdict};
use crate::lift::{self, build_dense_lift, build_sparse_lift, detect_partition, SdpRepresentation};
use crate::poly::SemialgebraicSet;
use crate::sdp::{sdpa, SolveStatus, SolverOptions};
use crate::sos::{is_sos_concave, SosOutcome};
use crate::verify::{projection_equivalence_with, DEFAULT_DELTA};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_REFUSED: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;
pub const EXIT_INDETERMINATE: i32 = 5;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Refused(String),
    #[error("{0}")]
    Indeterminate(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Refused(_) => EXIT_REFUSED,
            CliError::Indeterminate(_) => EXIT_INDETERMINATE,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemOptions {
    #[serde(default)]
    pub eps_gap: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub variables: Vec<String>,
    pub constraints: Vec<String>,
    #[serde(default, rename = "box")]
    pub bbox: Option<Vec<(f64, f64)>>,
    #[serde(default)]
    pub options: ProblemOptions,
}

/// A parsed problem file.
#[derive(Debug, Clone)]
pub struct Problem {
    pub set: SemialgebraicSet,
    pub bbox: Option<Vec<(f64, f64)>>,
    pub opts: SolverOptions,
}

fn check_box(bbox: &[(f64, f64)], n: usize) -> Result<(), CliError> {
    if bbox.len() != n {
        return Err(CliError::Parse(format!("box has {} intervals for {n} variables", bbox.len())));
    }
    for (i, &(lo, hi)) in bbox.iter().enumerate() {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(CliError::Parse(format!("box interval {} is not a finite `lo < hi` pair", i + 1)));
        }
    }
    Ok(())
}

impl Problem {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let file: ProblemFile =
            serde_json::from_str(text).map_err(|e| CliError::Parse(format!("problem file: {e}")))?;
        let set = SemialgebraicSet::parse(&file.variables, &file.constraints)
            .map_err(|e| CliError::Parse(e.to_string()))?;
        if let Some(b) = &file.bbox {
            check_box(b, set.nvars())?;
        }
        let mut opts = SolverOptions::default();
        if let Some(g) = file.options.eps_gap {
            if !(g > 0.0) {
                return Err(CliError::Parse("options.eps_gap must be positive".into()));
            }
            opts.eps_gap = g;
        }
        Ok(Problem {
            set,
            bbox: file.bbox,
            opts: opts.env_override(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The explicit box, else the file's, else the padded coordinate ranges
    /// of the dense lift.
    pub fn resolve_box(&self, flag: Option<&[(f64, f64)]>) -> Result<Vec<(f64, f64)>, CliError> {
        let n = self.set.nvars();
        if let Some(b) = flag.map(<[_]>::to_vec).or_else(|| self.bbox.clone()) {
            check_box(&b, n)?;
            return Ok(b);
        }
        let rep = build_dense_lift(&self.set);
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            let lo = rep.minimize_with(&e, &self.opts).map_err(|e| CliError::Indeterminate(e.to_string()))?.value;
            e[i] = -1.0;
            let hi = -rep.minimize_with(&e, &self.opts).map_err(|e| CliError::Indeterminate(e.to_string()))?.value;
            if !lo.is_finite() || !hi.is_finite() {
                return Err(CliError::Parse(format!(
                    "cannot bound {} from the lift; pass --box",
                    self.set.names()[i]
                )));
            }
            let pad = 0.25 * (hi - lo) + 0.1;
            out.push((lo - pad, hi + pad));
        }
        Ok(out)
    }
}

/// Parses `"lo:hi,lo:hi,…"`.
pub fn parse_box(text: &str) -> Result<Vec<(f64, f64)>, CliError> {
    text.split(',')
        .map(|part| {
            let (lo, hi) = part
                .split_once(':')
                .ok_or_else(|| CliError::Parse(format!("box entry `{part}` is not `lo:hi`")))?;
            let lo: f64 = lo.trim().parse().map_err(|_| CliError::Parse(format!("bad bound `{lo}`")))?;
            let hi: f64 = hi.trim().parse().map_err(|_| CliError::Parse(format!("bad bound `{hi}`")))?;
            Ok((lo, hi))
        })
        .collect()
}

/// Parses `"c1,c2,…"` into a direction of length `n`.
pub fn parse_objective(text: &str, n: usize) -> Result<Vec<f64>, CliError> {
    let v: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse().map_err(|_| CliError::Parse(format!("bad objective entry `{t}`"))))
        .collect::<Result<_, _>>()?;
    if v.len() != n {
        return Err(CliError::Parse(format!("objective has {} entries for {n} variables", v.len())));
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Dense,
    Sparse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Json,
    Sdpa,
}

#[derive(Debug, Parser)]
#[command(name = "sdplift", version, about = "Semidefinite lifts of convex semialgebraic sets")]
pub struct Cli {
    /// Print the JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct LiftArgs {
    #[arg(long, value_enum, default_value = "dense")]
    pub mode: Mode,
    /// Build a sparse lift even when some constraint is not certified sos-concave.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify sos-concavity of each constraint and show the variable partition.
    Check { problem: PathBuf },
    /// Build a lift and write it as JSON or SDPA.
    Lift {
        problem: PathBuf,
        #[command(flatten)]
        lift: LiftArgs,
        #[arg(long, value_enum, default_value = "json")]
        out: OutFormat,
        /// Output file; standard output when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Objective `ℓ` to minimize, for SDPA output.
        #[arg(long)]
        objective: Option<String>,
    },
    /// Minimize `ℓᵀx` over the lift.
    Optimize {
        problem: PathBuf,
        #[command(flatten)]
        lift: LiftArgs,
        #[arg(long)]
        objective: String,
    },
    /// Sample-based check that the lift projects onto the set.
    Verify {
        problem: PathBuf,
        #[command(flatten)]
        lift: LiftArgs,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "box")]
        bbox: Option<String>,
    },
    /// Boundary curvature diagnostics.
    Curvature {
        problem: PathBuf,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "box")]
        bbox: Option<String>,
    },
}

/// What a command produced.
#[derive(Debug, Clone)]
pub struct Report {
    pub text: String,
    pub json: Value,
    pub code: i32,
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|a| format!("{:.6}", if a.abs() < 5e-7 { 0.0 } else { *a })).collect();
    format!("({})", parts.join(", "))
}

struct CheckResult {
    outcomes: Vec<SosOutcome>,
}

impl CheckResult {
    fn all_certified(&self) -> bool {
        self.outcomes.iter().all(SosOutcome::is_certified)
    }
}

fn run_check(set: &SemialgebraicSet) -> CheckResult {
    let outcomes = set
        .constraints()
        .iter()
        .map(|g| {
            is_sos_concave(g).unwrap_or_else(|e| SosOutcome::Indeterminate {
                reason: e.to_string(),
                gram_margin: None,
            })
        })
        .collect();
    CheckResult { outcomes }
}

pub fn cmd_check(p: &Problem) -> Report {
    let res = run_check(&p.set);
    let partition = detect_partition(&p.set);
    let mut text = String::new();
    let mut rows = Vec::new();
    for (i, (g, o)) in p.set.constraint_strings().iter().zip(&res.outcomes).enumerate() {
        let _ = writeln!(text, "constraint {}: {g}", i + 1);
        match o {
            SosOutcome::Certified(c) => {
                let _ = writeln!(
                    text,
                    "  certified sos-concave (basis {}, residual {:.1e}, min eig {:.3e})",
                    c.basis.len(),
                    c.residual,
                    c.min_eig
                );
            }
            SosOutcome::Refuted(r) => {
                let kind = serde_json::to_value(r.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
                let _ = write!(text, "  refuted: {kind}");
                if let Some(x) = &r.point {
                    let _ = write!(text, " at x = {}", fmt_vec(x));
                }
                if let Some(v) = &r.direction {
                    let _ = write!(text, ", v = {}", fmt_vec(v));
                }
                let _ = writeln!(text, ", value {:.6}", r.value);
            }
            SosOutcome::Indeterminate { reason, .. } => {
                let _ = writeln!(text, "  indeterminate: {reason}");
            }
        }
        let mut j = o.to_json();
        j["index"] = json!(i + 1);
        j["constraint"] = json!(g);
        rows.push(j);
    }
    let _ = writeln!(text, "partition: {}", partition.display());
    let mut note = None;
    if res.outcomes.iter().any(|o| matches!(o, SosOutcome::Refuted(_))) {
        let n = "some constraint is not sos-concave; the lifts are then relaxations only. \
                 `sdplift curvature` checks positive boundary curvature instead";
        let _ = writeln!(text, "note: {n}");
        note = Some(n);
    }
    let indeterminate = res.outcomes.iter().any(|o| matches!(o, SosOutcome::Indeterminate { .. }));
    Report {
        text,
        json: json!({
            "constraints": rows,
            "partition": partition.blocks.iter().map(|b| b.iter().map(|i| i + 1).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "all_certified": res.all_certified(),
            "note": note,
        }),
        code: if indeterminate { EXIT_INDETERMINATE } else { EXIT_OK },
    }
}

/// Builds the requested lift. Sparse mode requires every constraint to be
/// certified sos-concave unless `force` is set; the returned warnings say
/// when it was forced.
pub fn build_lift(p: &Problem, mode: Mode, force: bool) -> Result<(SdpRepresentation, Vec<String>), CliError> {
    match mode {
        Mode::Dense => Ok((build_dense_lift(&p.set), Vec::new())),
        Mode::Sparse => {
            let res = run_check(&p.set);
            let failed: Vec<usize> = res
                .outcomes
                .iter()
                .enumerate()
                .filter(|(_, o)| !o.is_certified())
                .map(|(i, _)| i + 1)
                .collect();
            let mut warnings = Vec::new();
            if !failed.is_empty() {
                let msg = format!("constraints {failed:?} are not certified sos-concave");
                if !force {
                    return Err(CliError::Refused(format!("{msg}; sparse lift refused (use --force)")));
                }
                warnings.push(format!("{msg}; sparse lift forced and may not be exact"));
            }
            Ok((build_sparse_lift(&p.set), warnings))
        }
    }
}

fn size_summary(rep: &SdpRepresentation) -> String {
    let mut s = String::new();
    let dims: Vec<String> = rep.pencil_dims().iter().map(|d| format!("{d}x{d}")).collect();
    let _ = writeln!(s, "pencils: {}", dims.join(", "));
    let _ = writeln!(s, "aux_count: {}", rep.aux_count());
    let _ = writeln!(s, "aux: {}", rep.aux_labels().join(" "));
    let _ = writeln!(s, "inequalities: {}", rep.linear_ineqs.len());
    for b in &rep.blocks {
        let vars: Vec<String> = b.block.iter().map(|i| rep.names[*i].clone()).collect();
        let _ = writeln!(
            s,
            "block {{{}}}: |F| = {}, pencil {}, aux slots {}",
            vars.join(","),
            b.lattice.len(),
            b.pencil + 1,
            rep.block_aux(b).len()
        );
    }
    s
}

/// Returns the report and the serialized representation.
pub fn cmd_lift(
    p: &Problem,
    mode: Mode,
    force: bool,
    out: OutFormat,
    objective: Option<&[f64]>,
) -> Result<(Report, String), CliError> {
    let (rep, warnings) = build_lift(p, mode, force)?;
    let body = match out {
        OutFormat::Json => {
            let mut v = lift::json::to_value(&rep);
            if !warnings.is_empty() {
                v["warnings"] = json!(warnings);
            }
            serde_json::to_string_pretty(&v).expect("json serializes") + "\n"
        }
        OutFormat::Sdpa => {
            let zeros = vec![0.0; rep.nvars];
            let ell = objective.unwrap_or(&zeros);
            let neg: Vec<f64> = ell.iter().map(|v| -v).collect();
            let lp = rep.to_problem(&neg);
            let mut head = String::new();
            for w in &warnings {
                let _ = writeln!(head, "* warning: {w}");
            }
            let names: Vec<String> = lp.layout.iter().map(|v| lift::json::var_name(*v)).collect();
            let _ = writeln!(head, "* variables: {}", names.join(" "));
            head + &sdpa::write(&lp.problem)
        }
    };
    let mut text = size_summary(&rep);
    for w in &warnings {
        let _ = writeln!(text, "warning: {w}");
    }
    let json = json!({
        "mode": format!("{mode:?}").to_lowercase(),
        "pencil_dims": rep.pencil_dims(),
        "aux_count": rep.aux_count(),
        "aux_labels": rep.aux_labels(),
        "blocks": rep.blocks.iter().map(|b| json!({
            "variables": b.block,
            "lattice_size": b.lattice.len(),
            "aux": rep.block_aux(b),
        })).collect::<Vec<_>>(),
        "warnings": warnings,
    });
    Ok((Report { text, json, code: EXIT_OK }, body))
}

pub fn cmd_optimize(p: &Problem, mode: Mode, force: bool, ell: &[f64]) -> Result<Report, CliError> {
    let (rep, warnings) = build_lift(p, mode, force)?;
    let opt = rep.minimize_with(ell, &p.opts).map_err(|e| CliError::Parse(e.to_string()))?;
    let r = &opt.result;
    let mut text = String::new();
    for w in &warnings {
        let _ = writeln!(text, "warning: {w}");
    }
    let status = serde_json::to_value(r.status).expect("status serializes");
    let _ = writeln!(text, "status: {}", status.as_str().unwrap_or_default());
    let _ = writeln!(text, "value: {:.10}", opt.value);
    if r.status == SolveStatus::Optimal {
        let _ = writeln!(text, "x: {}", fmt_vec(&opt.x));
        let _ = writeln!(text, "margin: {:.3e}", r.margin);
        let _ = writeln!(text, "gap: {:.3e}", r.gap);
    }
    let _ = writeln!(text, "iterations: {}", r.iterations);
    if !r.message.is_empty() {
        let _ = writeln!(text, "message: {}", r.message);
    }
    let json = json!({
        "status": status,
        "value": if opt.value.is_finite() { json!(opt.value) } else { json!(opt.value.to_string()) },
        "x": opt.x,
        "margin": r.margin,
        "gap": r.gap,
        "iterations": r.iterations,
        "message": r.message,
        "warnings": warnings,
    });
    let code = if r.status == SolveStatus::Indeterminate { EXIT_INDETERMINATE } else { EXIT_OK };
    Ok(Report { text, json, code })
}

pub fn cmd_verify(
    p: &Problem,
    mode: Mode,
    force: bool,
    nsamples: usize,
    delta: f64,
    seed: u64,
    bbox: Option<&[(f64, f64)]>,
) -> Result<Report, CliError> {
    let (rep, warnings) = build_lift(p, mode, force)?;
    let bbox = p.resolve_box(bbox)?;
    let report = projection_equivalence_with(&rep, &p.set, &bbox, nsamples, delta, seed, &p.opts)
        .map_err(|e| CliError::Indeterminate(e.to_string()))?;
    let mut text = String::new();
    for w in &warnings {
        let _ = writeln!(text, "warning: {w}");
    }
    let b: Vec<String> = bbox.iter().map(|(lo, hi)| format!("{lo:.4}:{hi:.4}")).collect();
    let _ = writeln!(text, "box: {}", b.join(","));
    text += &report.table();
    let mut json = serde_json::to_value(&report).expect("report serializes");
    json["box"] = json!(bbox);
    json["warnings"] = json!(warnings);
    Ok(Report {
        text,
        json,
        code: if report.pass { EXIT_OK } else { EXIT_VERIFY },
    })
}

/// Samples the boundary piece of every nonlinear constraint (of every
/// constraint when all are linear) and reports the worst verdict.
pub fn cmd_curvature(p: &Problem, count: usize, seed: u64, bbox: Option<&[(f64, f64)]>) -> Result<Report, CliError> {
    let bbox = p.resolve_box(bbox)?;
    let cons = p.set.constraints();
    let mut active: Vec<usize> = (0..cons.len()).filter(|&i| cons[i].degree() >= 2).collect();
    if active.is_empty() {
        active = (0..cons.len()).collect();
    }
    let names = p.set.constraint_strings();
    let rank = |v: CurvatureVerdict| match v {
        CurvatureVerdict::PositivelyCurvedOnSamples => 0,
        CurvatureVerdict::Degenerate => 1,
        CurvatureVerdict::CurvatureFailure => 2,
    };
    let mut worst = CurvatureVerdict::PositivelyCurvedOnSamples;
    let mut text = String::new();
    let mut rows = Vec::new();
    for (k, &i) in active.iter().enumerate() {
        let samples = sample_boundary(&p.set, i, count, seed.wrapping_add(k as u64), &bbox, None)
            .map_err(|e| CliError::Indeterminate(e.to_string()))?;
        let r = curvature_check(&p.set, &samples);
        if rank(r.verdict) > rank(worst) {
            worst = r.verdict;
        }
        let verdict = serde_json::to_value(r.verdict).expect("verdict serializes");
        let _ = writeln!(text, "constraint {}: {}", i + 1, names[i]);
        let _ = writeln!(
            text,
            "  samples {}/{}, min sff {:.6e}, min |grad| {:.3e}, verdict {}",
            r.samples,
            r.requested,
            r.min_sff,
            r.min_grad_norm,
            verdict.as_str().unwrap_or_default()
        );
        if !r.note.is_empty() {
            let _ = writeln!(text, "  {}", r.note);
        }
        let mut j = serde_json::to_value(&r).expect("report serializes");
        j["constraint"] = json!(i + 1);
        rows.push(j);
    }
    let verdict = serde_json::to_value(worst).expect("verdict serializes");
    let _ = writeln!(text, "verdict: {}", verdict.as_str().unwrap_or_default());
    Ok(Report {
        text,
        json: json!({ "reports": rows, "verdict": verdict }),
        code: EXIT_OK,
    })
}

fn write_out(path: Option<&Path>, body: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, body).map_err(|e| CliError::Parse(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Report, CliError> {
    match &cli.command {
        Command::Check { problem } => Ok(cmd_check(&Problem::load(problem)?)),
        Command::Lift {
            problem,
            lift,
            out,
            output,
            objective,
        } => {
            let p = Problem::load(problem)?;
            let ell = objective.as_deref().map(|o| parse_objective(o, p.set.nvars())).transpose()?;
            let (report, body) = cmd_lift(&p, lift.mode, lift.force, *out, ell.as_deref())?;
            write_out(output.as_deref(), &body)?;
            if output.is_none() {
                // keep stdout clean for the representation
                eprint!("{}", report.text);
                return Ok(Report {
                    text: String::new(),
                    json: Value::Null,
                    code: report.code,
                });
            }
            Ok(report)
        }
        Command::Optimize { problem, lift, objective } => {
            let p = Problem::load(problem)?;
            let ell = parse_objective(objective, p.set.nvars())?;
            cmd_optimize(&p, lift.mode, lift.force, &ell)
        }
        Command::Verify {
            problem,
            lift,
            samples,
            delta,
            seed,
            bbox,
        } => {
            let p = Problem::load(problem)?;
            let b = bbox.as_deref().map(parse_box).transpose()?;
            cmd_verify(&p, lift.mode, lift.force, *samples, *delta, *seed, b.as_deref())
        }
        Command::Curvature {
            problem,
            samples,
            seed,
            bbox,
        } => {
            let p = Problem::load(problem)?;
            let b = bbox.as_deref().map(parse_box).transpose()?;
            cmd_curvature(&p, *samples, *seed, b.as_deref())
        }
    }
}

/// Runs a parsed command line, printing its report; returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    match dispatch(cli) {
        Ok(r) => {
            if cli.json {
                if !r.json.is_null() {
                    println!("{}", serde_json::to_string_pretty(&r.json).expect("json serializes"));
                }
            } else {
                print!("{}", r.text);
            }
            r.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
