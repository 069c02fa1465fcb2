use std::fmt;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use splitvi::diagnostics::{attach_reference, check_records, condition_report, verify_trace, ProbeSet, TraceVerification};
use splitvi::geometry::Point;
use splitvi::problems::{self, BenchmarkProblem};
use splitvi::solver::{run, validate_config, ProblemSpec, SolverConfig};

use crate::config_file;
use crate::error::CliError;
use crate::trace::{read_trace, write_trace};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SPLITVI_OUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExitStatus {
    Success,
    Failure,
    CheckFailed,
}

impl ExitStatus {
    pub fn code(self) -> u8 {
        match self {
            ExitStatus::Success => 0,
            ExitStatus::Failure => 1,
            ExitStatus::CheckFailed => 2,
        }
    }

    fn worst(self, other: ExitStatus) -> ExitStatus {
        if other.code() > self.code() {
            other
        } else {
            self
        }
    }
}

/// Problem file contents: the tuple, a start point, and optionally a known
/// limit and a recommended configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub name: String,
    pub spec: ProblemSpec,
    pub x0: Point,
    #[serde(default)]
    pub reference: Option<Point>,
    #[serde(default)]
    pub config: Option<SolverConfig>,
}

impl ProblemFile {
    pub fn from_benchmark(p: &BenchmarkProblem) -> Result<Self, CliError> {
        Ok(Self {
            name: p.name.clone(),
            spec: p.spec.clone(),
            reference: Some(p.expected_limit(&p.x0)?),
            x0: p.x0.clone(),
            config: Some(p.config.clone()),
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let file: ProblemFile = serde_json::from_str(&text).map_err(|e| CliError::parse(path, e.to_string()))?;
        file.spec.validate().map_err(|e| CliError::parse(path, e.to_string()))?;
        Ok(file)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProblemRef {
    Named(String),
    File(PathBuf),
}

impl ProblemRef {
    /// A value naming an existing file or ending in `.json` is a path,
    /// anything else a generator address such as `box:7`.
    pub fn parse(s: &str) -> Self {
        let path = Path::new(s);
        if path.is_file() || s.ends_with(".json") {
            ProblemRef::File(path.to_path_buf())
        } else {
            ProblemRef::Named(s.to_string())
        }
    }

    pub fn load(&self) -> Result<ProblemFile, CliError> {
        match self {
            ProblemRef::Named(name) => ProblemFile::from_benchmark(&problems::resolve(name)?),
            ProblemRef::File(path) => ProblemFile::load(path),
        }
    }

    fn label(&self) -> String {
        match self {
            ProblemRef::Named(name) => name.clone(),
            ProblemRef::File(path) => path.display().to_string(),
        }
    }
}

impl fmt::Display for ProblemRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub problem: ProblemRef,
    pub config: Option<PathBuf>,
    /// Applied after the config file, in order.
    pub overrides: Vec<(String, String)>,
    pub trace_out: PathBuf,
    pub summary_out: PathBuf,
}

impl RunManifest {
    /// Output paths default to `<dir>/<name>.csv` and
    /// `<dir>/<name>.summary.json`.
    pub fn with_defaults(problem: ProblemRef, out_dir: &Path) -> Self {
        let stem = file_stem(&problem.label());
        Self {
            trace_out: out_dir.join(format!("{stem}.csv")),
            summary_out: out_dir.join(format!("{stem}.summary.json")),
            problem,
            config: None,
            overrides: Vec::new(),
        }
    }
}

fn file_stem(label: &str) -> String {
    let base = Path::new(label).file_stem().and_then(|s| s.to_str()).unwrap_or(label);
    base.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub problem: String,
    pub termination: String,
    pub converged: bool,
    pub iterations: usize,
    pub warnings: Vec<String>,
    pub config: SolverConfig,
    pub norm_estimate: f64,
    pub x0: Point,
    pub final_x: Point,
    pub reference: Point,
    pub reference_is_proxy: bool,
    pub final_distance_to_reference: f64,
    pub verification: TraceVerification,
    pub exit_code: u8,
}

#[derive(Debug)]
pub struct RunReport {
    pub status: ExitStatus,
    pub message: String,
    pub summary: Option<RunSummary>,
}

impl RunReport {
    fn fail(message: impl Into<String>) -> Self {
        Self { status: ExitStatus::Failure, message: message.into(), summary: None }
    }
}

fn build_config(manifest: &RunManifest, file: &ProblemFile) -> Result<(ProblemSpec, SolverConfig), CliError> {
    let mut cfg = file.config.clone().unwrap_or_else(|| SolverConfig {
        lambda: file.spec.m1.lambda(),
        ..SolverConfig::default()
    });
    let mut pairs = match &manifest.config {
        Some(path) => config_file::read_pairs(path)?,
        None => Vec::new(),
    };
    pairs.extend(manifest.overrides.iter().cloned());
    let mut lambda_set = false;
    for (k, v) in &pairs {
        config_file::apply(&mut cfg, k, v).map_err(CliError::Config)?;
        lambda_set |= k == "lambda";
    }
    let mut spec = file.spec.clone();
    if lambda_set && cfg.lambda > 0.0 && cfg.lambda.is_finite() {
        // resolvents follow the configured step
        spec = spec.with_lambda(cfg.lambda)?;
    }
    Ok((spec, cfg))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

/// Loads, validates, runs and checks one problem, writing the trace and
/// summary. Exit status: 0 when the run stopped by tolerance and every
/// bound and chain check passed, 2 when a check failed, 1 otherwise.
pub fn cmd_run(manifest: &RunManifest) -> RunReport {
    match run_inner(manifest) {
        Ok(report) => report,
        Err(e) => RunReport::fail(e.to_string()),
    }
}

fn run_inner(manifest: &RunManifest) -> Result<RunReport, CliError> {
    let file = manifest.problem.load()?;
    let (spec, cfg) = build_config(manifest, &file)?;
    let validated = match validate_config(&spec, &cfg) {
        Ok(v) => v,
        Err(errs) => {
            let lines: Vec<String> = errs.violations().iter().map(|v| format!("config error: {v}")).collect();
            return Ok(RunReport::fail(lines.join("\n")));
        }
    };

    let mut outcome = run(&spec, &validated, &file.x0)?;
    let (reference, proxy) = match &file.reference {
        Some(p) => (p.clone(), false),
        None => (outcome.final_x.clone(), true),
    };
    attach_reference(&mut outcome.trace, &reference)?;
    let probes = ProbeSet::standard(reference.clone(), cfg.probe_seed, proxy);
    let verification = verify_trace(&outcome.trace, cfg.gamma, validated.norm_estimate(), &spec.s, &probes, cfg.probe_seed)?;

    let converged = outcome.termination.converged();
    let (status, message) = if !verification.checks_passed() {
        (
            ExitStatus::CheckFailed,
            format!(
                "check failure: {} bound and {} chain violations",
                verification.simple_proof_bound.violations, verification.chain.violations
            ),
        )
    } else if !converged {
        (ExitStatus::Failure, outcome.termination.to_string())
    } else {
        (ExitStatus::Success, outcome.termination.to_string())
    };

    let records = outcome.records();
    let mut out = create(&manifest.trace_out)?;
    write_trace(&mut out, &records)?;

    let summary = RunSummary {
        problem: file.name.clone(),
        termination: outcome.termination.to_string(),
        converged,
        iterations: outcome.trace.len(),
        warnings: outcome.warnings.clone(),
        config: cfg,
        norm_estimate: validated.norm_estimate(),
        x0: outcome.x0.clone(),
        final_distance_to_reference: outcome.final_x.distance(&reference),
        final_x: outcome.final_x.clone(),
        reference,
        reference_is_proxy: proxy,
        verification,
        exit_code: status.code(),
    };
    let mut sum_out = create(&manifest.summary_out)?;
    serde_json::to_writer_pretty(&mut sum_out, &summary)?;
    std::io::Write::flush(&mut sum_out).map_err(|e| CliError::io(&manifest.summary_out, e))?;

    Ok(RunReport { status, message, summary: Some(summary) })
}

#[derive(Debug)]
pub struct VerifyReport {
    pub status: ExitStatus,
    /// Human-readable pass/fail table or error message.
    pub text: String,
    /// 0-based data row of the first bound violation.
    pub first_violation: Option<usize>,
}

/// Re-checks a trace CSV offline: the `‖y − z‖` bound on every row,
/// nondecreasing `dist_x0`, and the condition trends. Exit 0 when all
/// checks pass, 2 on a violation, 1 on an empty or malformed trace.
pub fn cmd_verify(path: &Path) -> VerifyReport {
    let fail = |text: String| VerifyReport { status: ExitStatus::Failure, text, first_violation: None };
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) => return fail(format!("{}: {e}", path.display())),
    };
    let records = match read_trace(file) {
        Ok(r) => r,
        Err(e) => return fail(format!("{}: malformed trace: {e}", path.display())),
    };
    if records.is_empty() {
        return fail(format!("{}: empty trace", path.display()));
    }
    if let Some(i) = records.iter().position(|r| !r.is_well_formed()) {
        return fail(format!("{}: row {i} has negative or non-finite entries", path.display()));
    }

    let (bound, monotone) = check_records(&records);
    let mark = |ok: bool| if ok { "PASS" } else { "FAIL" };
    let mut text = format!("{:<22} {:<6} {:>8} {:>10}  {}\n", "check", "status", "rows", "violations", "first row");
    for (name, t) in [("y-z bound", &bound), ("distance to x0", &monotone)] {
        let first = t.first_violation.map_or("-".to_string(), |i| i.to_string());
        text += &format!("{:<22} {:<6} {:>8} {:>10}  {}\n", name, mark(t.passed()), t.checked, t.violations, first);
    }
    match condition_report(&records) {
        Ok(c) => {
            text += &format!(
                "{:<22} {:<6} last σ = {:.3e}, nonincreasing = {}\n",
                "sigma trend",
                "INFO",
                c.last_sigma,
                c.sigma_nonincreasing
            );
            text += &format!(
                "{:<22} {:<6} ratio {:.3e} -> {:.3e} over {} rows{}\n",
                "condition (ii) ratio",
                "INFO",
                c.ratio_window_start,
                c.last_ratio,
                c.window,
                if c.cond2_flag { " (not decreasing)" } else { "" }
            );
        }
        Err(_) => text += &format!("{:<22} {:<6} fewer than 2 rows\n", "condition trends", "INFO"),
    }

    let status = if bound.passed() && monotone.passed() { ExitStatus::Success } else { ExitStatus::CheckFailed };
    let first_violation = bound.first_violation.or(monotone.first_violation);
    if let Some(i) = first_violation {
        text += &format!("first violation at row {i} (n = {})\n", records[i].n);
    }
    VerifyReport { status, text, first_violation }
}

/// Writes a generated problem to `out` as JSON.
pub fn cmd_generate(name: &str, out: &Path) -> Result<ProblemFile, CliError> {
    let file = ProblemFile::from_benchmark(&problems::resolve(name)?)?;
    let mut w = create(out)?;
    serde_json::to_writer_pretty(&mut w, &file)?;
    std::io::Write::flush(&mut w).map_err(|e| CliError::io(out, e))?;
    Ok(file)
}

/// Runs every suite problem concurrently, each with its own output files
/// under `out_dir`. Returns the reports in suite order.
pub fn run_suite(out_dir: &Path, config: Option<&Path>, overrides: &[(String, String)]) -> Vec<(String, RunReport)> {
    problems::suite()
        .into_par_iter()
        .map(|name| {
            let mut m = RunManifest::with_defaults(ProblemRef::Named(name.clone()), out_dir);
            m.config = config.map(Path::to_path_buf);
            m.overrides = overrides.to_vec();
            let report = cmd_run(&m);
            (name, report)
        })
        .collect()
}

pub fn suite_status(reports: &[(String, RunReport)]) -> ExitStatus {
    reports.iter().fold(ExitStatus::Success, |acc, (_, r)| acc.worst(r.status))
}
