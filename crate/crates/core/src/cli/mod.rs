//! Command-line front end: `mck build|verify|hilb`.

mod recipe;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::ckd::{verify_all, verify_chern_grade, verify_ck, verify_multiplicative, CKDecomposition};
use crate::error::{Error, Result};
use crate::hilbert::{
    build_descent, build_hilb_square, build_nested_12, build_nested_23, build_tower, s3_action, verify_diagonal_lemma,
    verify_excess_configurations,
};
use crate::report::{Report, Status};
use crate::Rat;

pub use recipe::{evaluate, parse_class, Builder, Built, Center, Definition, Evaluated, Name, Pos, Recipe};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "mck", version, about = "Exact Chow-Kunneth decompositions and Hilbert-scheme pipelines")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the JSON report here.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for the library's parallel loops.
    #[arg(long, global = true, env = "MCK_THREADS")]
    pub threads: Option<usize>,
    /// Record per-check wall-clock times in the JSON report.
    #[arg(long, global = true)]
    pub timings: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build every definition of a recipe and report ranks.
    Build {
        /// Recipe file.
        recipe: PathBuf,
    },
    /// Build a recipe and run verifier suites on every definition.
    Verify {
        /// Recipe file.
        recipe: PathBuf,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "all")]
        checks: Vec<CheckSet>,
    },
    /// Hilbert-scheme pipelines over the target of a curve or surface recipe.
    Hilb {
        /// Recipe whose target is the curve or surface `X`.
        #[arg(long)]
        base: PathBuf,
        /// Pipelines to run; all of them when omitted.
        #[arg(long, value_enum, value_delimiter = ',')]
        pipeline: Vec<Pipeline>,
        /// Leave out the `X^[3]` pipeline.
        #[arg(long)]
        skip_capstone: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckSet {
    /// Ring axioms and variety sanity.
    Algebra,
    /// Orthogonal idempotents summing to the diagonal, self-duality.
    Ck,
    /// Multiplicativity of the decomposition.
    Mult,
    /// Chern classes in grade 0.
    Chern,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Pipeline {
    Square,
    Nested12,
    Nested23,
    Cube,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CheckRecord {
    pub check_id: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub millis: Option<u64>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Stage {
    pub stage: String,
    pub checks: Vec<CheckRecord>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct GradeRank {
    pub codim: usize,
    pub grade: i64,
    pub rank: usize,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct RankTable {
    pub variety: String,
    pub dim: usize,
    pub codim_ranks: Vec<usize>,
    pub grade_ranks: Vec<GradeRank>,
    /// `dim CH^p_{(0)}` for `p = 0..dim`.
    pub grade0_ranks: Vec<usize>,
}

impl RankTable {
    pub fn of(name: &str, ck: &CKDecomposition<Rat>) -> Self {
        let x = &ck.variety;
        RankTable {
            variety: name.to_string(),
            dim: x.dim,
            codim_ranks: x.ranks(),
            grade_ranks: ck.graded_ranks().into_iter().map(|(codim, grade, rank)| GradeRank { codim, grade, rank }).collect(),
            grade0_ranks: ck.grade0_ranks(),
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ErrorRecord {
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub col: Option<usize>,
    pub message: String,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Totals {
    pub checks: usize,
    pub failed: usize,
}

/// The JSON document written by every command.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Output {
    pub schema: u32,
    pub command: &'static str,
    pub input: String,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorRecord>,
    pub varieties: Vec<RankTable>,
    pub stages: Vec<Stage>,
    pub totals: Totals,
}

/// Exit code, JSON document and human summary of one invocation.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub code: i32,
    pub output: Output,
    pub summary: String,
}

impl Outcome {
    pub fn json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.output).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } => 2,
        Error::Verification(_) => 4,
        _ => 3,
    }
}

fn error_record(e: &Error) -> ErrorRecord {
    match e {
        Error::Parse { line, col, msg } => ErrorRecord { kind: "parse", line: Some(*line), col: Some(*col), message: msg.clone() },
        Error::Verification(m) => ErrorRecord { kind: "verification", line: None, col: None, message: m.clone() },
        other => ErrorRecord { kind: "precondition", line: None, col: None, message: other.to_string() },
    }
}

struct Collector {
    timings: bool,
    varieties: Vec<RankTable>,
    stages: Vec<Stage>,
}

impl Collector {
    fn stage(&mut self, name: impl Into<String>, report: Report) {
        let checks = report
            .checks
            .into_iter()
            .map(|c| CheckRecord { check_id: c.check_id, status: c.status, witness: c.witness, millis: self.timings.then_some(c.millis) })
            .collect();
        self.stages.push(Stage { stage: name.into(), checks });
    }
}

fn read_recipe(path: &PathBuf) -> Result<Evaluated> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Precondition(format!("cannot read {}: {e}", path.display())))?;
    evaluate(&Recipe::parse(&text)?)
}

fn checks_for(ck: &CKDecomposition<Rat>, sets: &[CheckSet]) -> Report {
    let mut rep = Report::new();
    let all = sets.contains(&CheckSet::All);
    if all || sets.contains(&CheckSet::Algebra) {
        rep.extend(ck.variety.verify());
    }
    if all {
        rep.extend(verify_all(ck));
        return rep;
    }
    if sets.contains(&CheckSet::Ck) {
        rep.extend(verify_ck(ck));
    }
    if sets.contains(&CheckSet::Mult) {
        rep.extend(verify_multiplicative(ck));
    }
    if sets.contains(&CheckSet::Chern) {
        rep.extend(verify_chern_grade(ck));
    }
    rep
}

fn run_build(col: &mut Collector, recipe: &PathBuf) -> Result<()> {
    let ev = read_recipe(recipe)?;
    for b in &ev.built {
        col.varieties.push(RankTable::of(&b.name, &b.ck));
        col.stage(&b.name, b.report.clone());
    }
    Ok(())
}

fn run_verify(col: &mut Collector, recipe: &PathBuf, sets: &[CheckSet]) -> Result<()> {
    let ev = read_recipe(recipe)?;
    for b in &ev.built {
        col.varieties.push(RankTable::of(&b.name, &b.ck));
        col.stage(&b.name, checks_for(&b.ck, sets));
    }
    Ok(())
}

fn run_pipeline(col: &mut Collector, ck: &CKDecomposition<Rat>, p: Pipeline) -> Result<()> {
    match p {
        Pipeline::Square => {
            let h = build_hilb_square(ck)?;
            col.varieties.push(RankTable::of("X^[2]", h.ck()));
            col.stage("square", h.report);
        }
        Pipeline::Nested12 => {
            let n = build_nested_12(ck)?;
            let mut rep = n.swap.verify().prefixed("nested12.swap");
            rep.extend(n.ck.report.clone().prefixed("nested12"));
            rep.extend(verify_all(&n.ck.ck).prefixed("nested12"));
            col.varieties.push(RankTable::of("X^[1,2]", &n.ck.ck));
            col.stage("nested12", rep);
        }
        Pipeline::Nested23 => {
            let n = build_nested_23(ck)?;
            col.varieties.push(RankTable::of("X^[2,3]", &n.ck.ck));
            col.stage("nested23", n.report);
        }
        Pipeline::Cube => {
            let tower = build_tower(ck)?;
            col.stage("cube.tower", tower.report.clone());
            let actions = s3_action(&tower)?;
            col.stage("cube.s3", actions.report.clone());
            let bu1 = tower.blow_up1();
            let mut lemmas = verify_diagonal_lemma(bu1, &bu1.normal.chern);
            lemmas.extend(verify_excess_configurations(&tower)?);
            col.stage("cube.lemmas", lemmas);
            let h = build_descent(tower, actions)?;
            col.varieties.push(RankTable::of("X^[3]", h.ck()));
            col.stage("cube.descent", h.report);
        }
    }
    Ok(())
}

fn run_hilb(col: &mut Collector, base: &PathBuf, pipelines: &[Pipeline], skip_capstone: bool) -> Result<()> {
    let ev = read_recipe(base)?;
    let target = ev.target();
    let ck = &target.ck;
    let dim = ck.variety.dim;
    if !(1..=2).contains(&dim) {
        return Err(Error::Precondition(format!("'{}' has dimension {dim}, expected a curve or a surface", target.name)));
    }
    col.varieties.push(RankTable::of(&target.name, ck));
    col.stage("base", verify_all(ck));
    let chosen: Vec<Pipeline> = if pipelines.is_empty() {
        vec![Pipeline::Square, Pipeline::Nested12, Pipeline::Nested23, Pipeline::Cube]
    } else {
        pipelines.to_vec()
    };
    for p in chosen {
        if p == Pipeline::Cube && (skip_capstone || (dim == 1 && pipelines.is_empty())) {
            continue;
        }
        run_pipeline(col, ck, p)?;
    }
    Ok(())
}

fn summarize(out: &Output) -> String {
    let mut s = String::new();
    if let Some(e) = &out.error {
        match (e.line, e.col) {
            (Some(l), Some(c)) => s.push_str(&format!("{}: {} error at {l}:{c}: {}\n", out.input, e.kind, e.message)),
            _ => s.push_str(&format!("{}: {} error: {}\n", out.input, e.kind, e.message)),
        }
    }
    for v in &out.varieties {
        let grade0 = v.grade0_ranks.iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
        let codim = v.codim_ranks.iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
        s.push_str(&format!("{:<12} dim {}  ranks ({codim})  grade 0 ({grade0})\n", v.variety, v.dim));
    }
    for st in &out.stages {
        let failed: Vec<&CheckRecord> = st.checks.iter().filter(|c| c.status == Status::Fail).collect();
        s.push_str(&format!("{:<12} {}/{} checks pass\n", st.stage, st.checks.len() - failed.len(), st.checks.len()));
        for c in failed {
            s.push_str(&format!("  FAIL {}: {}\n", c.check_id, c.witness.clone().unwrap_or_default()));
        }
    }
    s.push_str(&format!("{}: {} checks, {} failed\n", out.status, out.totals.checks, out.totals.failed));
    s
}

/// Run a parsed command line. Thread settings are the caller's business.
pub fn run(cli: &Cli) -> Outcome {
    let mut col = Collector { timings: cli.timings, varieties: Vec::new(), stages: Vec::new() };
    let (command, input, result) = match &cli.command {
        Command::Build { recipe } => ("build", recipe.display().to_string(), run_build(&mut col, recipe)),
        Command::Verify { recipe, checks } => ("verify", recipe.display().to_string(), run_verify(&mut col, recipe, checks)),
        Command::Hilb { base, pipeline, skip_capstone } => ("hilb", base.display().to_string(), run_hilb(&mut col, base, pipeline, *skip_capstone)),
    };
    let checks = col.stages.iter().map(|s| s.checks.len()).sum();
    let failed = col.stages.iter().flat_map(|s| &s.checks).filter(|c| c.status == Status::Fail).count();
    let (code, error) = match &result {
        Err(e) => (exit_code(e), Some(error_record(e))),
        Ok(()) if failed > 0 => (4, None),
        Ok(()) => (0, None),
    };
    let output = Output {
        schema: SCHEMA,
        command,
        input,
        status: if code == 0 { "pass" } else { "fail" },
        error,
        varieties: col.varieties,
        stages: col.stages,
        totals: Totals { checks, failed },
    };
    let summary = summarize(&output);
    Outcome { code, output, summary }
}

/// Parse arguments, run, write `--out`, print the summary; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: thread pool already initialised: {e}");
        }
    }
    let outcome = run(&cli);
    print!("{}", outcome.summary);
    if let Some(path) = &cli.out {
        if let Err(e) = std::fs::write(path, outcome.json()) {
            eprintln!("cannot write {}: {e}", path.display());
            return 3;
        }
    }
    outcome.code
}
