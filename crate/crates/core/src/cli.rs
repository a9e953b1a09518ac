//! The `rainbow` command line.
//!
//! Every subcommand reads JSON, writes one JSON document (to `--out` or stdout)
//! and emits a [`RunManifest`] (to `--manifest` or stderr). Exit codes: 0 success
//! or found, 1 a legitimate negative answer, 2 a usage or validation error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::extremal::extremal_rainbow_pm;
use crate::graph::generate::{
    complete_rainbow, near_split, random_dirac_instance, superextremal_instance,
};
use crate::graph::{ColoredBipartiteGraph, ConflictFile, ConflictSystem, GraphFile};
use crate::matching::{is_conflict_free, violated_pairs, MatchingFile};
use crate::oracle::enumerate_perfect_matchings;
use crate::params::ParamSet;
use crate::reductions::{
    counterexample, delta_factor_blowup, embedding_auxiliary, extract_embedding, extract_factor,
    find_template, EmbeddingInstance, SimpleGraph, SimpleGraphFile,
};
use crate::sampler::{
    find_conflict_free_pm, frequency_report, sample_matchings, ChainConfig, SampleSchedule,
    SearchOptions, SearchReport,
};
use crate::structure::{classify, refine_to_superextremal, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Largest number of perfect matchings enumerated as the sampling target.
const SAMPLE_TARGET_CAP: u64 = 100_000;

#[derive(Debug, Parser)]
#[command(name = "rainbow", version, about = "Rainbow and conflict-free perfect matchings")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// ParamSet JSON file; missing fields take their defaults.
    #[arg(long, global = true)]
    pub params: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for the restart phase.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Include per-stage traces in the output.
    #[arg(long, global = true)]
    pub trace: bool,
    #[arg(long, global = true)]
    pub exact_threshold: Option<usize>,
    /// Restart budget for the search.
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    /// Indented JSON, and text tables for `sample` and `bench`.
    #[arg(long, global = true)]
    pub pretty: bool,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write the run manifest here instead of stderr.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an instance.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Robust expander or extremal, with certificate.
    Classify { graph: PathBuf },
    /// Find a rainbow (or conflict-free) perfect matching.
    Solve {
        graph: PathBuf,
        /// Explicit conflict pairs instead of the colouring.
        #[arg(long)]
        conflicts: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Strategy::Auto)]
        strategy: Strategy,
    },
    /// Check a matching file against a graph.
    Verify {
        graph: PathBuf,
        matching: PathBuf,
        #[arg(long)]
        conflicts: Option<PathBuf>,
    },
    /// Run the switch chain and report state frequencies.
    Sample {
        graph: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = vec![4, 6])]
        cycles: Vec<usize>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0.5)]
        laziness: f64,
        /// Steps between samples (default depends on the size).
        #[arg(long)]
        stride: Option<u64>,
        #[arg(long)]
        burn_in: Option<u64>,
    },
    /// Rainbow Δ-factor of a simple graph via its bipartite blow-up.
    Factor {
        graph: PathBuf,
        #[arg(long)]
        delta: usize,
    },
    /// Rainbow copy of a bipartite template.
    Embed {
        instance: PathBuf,
        /// Bipartite pattern to place when the instance has no template.
        #[arg(long)]
        pattern: Option<PathBuf>,
    },
    /// Time the solver on random Dirac instances.
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = vec![8, 12, 16])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        instances: usize,
        /// Colour bound; defaults to ⌈n/4⌉.
        #[arg(long)]
        bound: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum GenKind {
    /// Random Dirac graph with bounded colour classes.
    RandomDirac {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        bound: usize,
    },
    /// Dirac graph with a (t+1)²-bounded colouring and no rainbow perfect matching.
    Counterexample {
        #[arg(long)]
        t: usize,
    },
    /// K_{n,n}, all colours distinct.
    Knn {
        #[arg(long)]
        n: usize,
    },
    /// Near-split fixture on side size 2m+1.
    NearSplit {
        #[arg(long)]
        m: usize,
    },
    /// Superextremal instance on side size 2k+ell.
    Superextremal {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        ell: usize,
        #[arg(long, default_value_t = 2)]
        bound: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Classify, then route to the expander search or the extremal construction.
    Auto,
    /// Restart sampling and switch repair only (plus the small-size exact fallback).
    Search,
    /// The extremal construction, failing if the graph is not extremal.
    Extremal,
}

/// Record of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub params: ParamSet,
    pub seed: u64,
    /// SHA-256 over the input files, in argument order.
    pub input_digest: Option<String>,
    /// SHA-256 of the emitted JSON document.
    pub output_digest: String,
    pub outcome: String,
    pub exit_code: i32,
    pub elapsed_ms: f64,
}

/// Result of a subcommand before printing.
#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    pub code: i32,
    pub output: Value,
    pub outcome: String,
    pub table: Option<String>,
}

impl Execution {
    fn new(code: i32, outcome: &str, output: Value) -> Self {
        Execution { code, output, outcome: outcome.into(), table: None }
    }
}

#[derive(Debug)]
pub struct CliError(pub String);

impl<E: std::fmt::Display> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError(e.to_string())
    }
}

type CmdResult = Result<Execution, CliError>;

struct Inputs {
    digest: Sha256,
    used: bool,
}

impl Inputs {
    fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError(format!("{}: {e}", path.display())))?;
        self.digest.update(text.as_bytes());
        self.used = true;
        Ok(text)
    }

    fn json<T: serde::de::DeserializeOwned>(&mut self, path: &Path) -> Result<T, CliError> {
        let text = self.read(path)?;
        serde_json::from_str(&text).map_err(|e| CliError(format!("{}: {e}", path.display())))
    }

    fn graph(&mut self, path: &Path) -> Result<ColoredBipartiteGraph, CliError> {
        let file: GraphFile = self.json(path)?;
        Ok(ColoredBipartiteGraph::from_file(&file)?)
    }

    fn conflicts(&mut self, g: &ColoredBipartiteGraph, path: Option<&PathBuf>) -> Result<ConflictSystem, CliError> {
        match path {
            None => Ok(g.conflicts_from_coloring()),
            Some(p) => {
                let file: ConflictFile = self.json(p)?;
                let f = ConflictSystem::from_file(&file)?;
                f.validate_against(g)?;
                Ok(f)
            }
        }
    }
}

fn resolve_params(global: &GlobalArgs) -> Result<ParamSet, CliError> {
    let mut params = match &global.params {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError(format!("{}: {e}", path.display())))?
        }
        None => ParamSet::default(),
    };
    if let Some(seed) = global.seed {
        params.seed = seed;
    }
    if let Some(t) = global.exact_threshold {
        params.exact_threshold = t;
    }
    if let Some(b) = global.budget {
        params.restart_budget = b;
    }
    params.validate()?;
    if global.jobs == 0 {
        return Err(CliError("--jobs must be at least 1".into()));
    }
    Ok(params)
}

fn search_options(params: &ParamSet, global: &GlobalArgs) -> SearchOptions {
    SearchOptions { jobs: global.jobs, ..SearchOptions::from_params(params) }
}

fn outcome_name(report: &SearchReport) -> &'static str {
    match &report.outcome {
        crate::sampler::SearchOutcome::Found { .. } => "found",
        crate::sampler::SearchOutcome::Exhausted => "exhausted",
        crate::sampler::SearchOutcome::ProvedNone { .. } => "proved_none",
    }
}

fn cmd_gen(kind: &GenKind, params: &ParamSet) -> CmdResult {
    let (file, extra) = match *kind {
        GenKind::RandomDirac { n, bound } => (random_dirac_instance(n, bound, params, params.seed)?.to_file(), None),
        GenKind::Counterexample { t } => {
            let (g, meta) = counterexample(t)?;
            (g.to_file(), Some(json!({ "partition": meta.partition, "color_bound": meta.color_bound })))
        }
        GenKind::Knn { n } => (complete_rainbow(n).to_file(), None),
        GenKind::NearSplit { m } => {
            let (g, p) = near_split(m);
            (g.to_file(), Some(json!({ "partition": p })))
        }
        GenKind::Superextremal { k, ell, bound } => {
            let (g, p) = superextremal_instance(k, ell, bound, params.seed)?;
            (g.to_file(), Some(json!({ "partition": p })))
        }
    };
    let mut output = serde_json::to_value(&file)?;
    if let Some(Value::Object(extra)) = extra {
        output.as_object_mut().unwrap().insert("meta".into(), Value::Object(extra));
    }
    Ok(Execution::new(EXIT_OK, "generated", output))
}

fn cmd_classify(graph: &Path, params: &ParamSet, inputs: &mut Inputs) -> CmdResult {
    let g = inputs.graph(graph)?;
    let c = classify(&g, params)?;
    let outcome = if c.is_expander() { "expander" } else { "extremal" };
    Ok(Execution::new(EXIT_OK, outcome, serde_json::to_value(&c)?))
}

fn cmd_solve(
    graph: &Path,
    conflicts: Option<&PathBuf>,
    strategy: Strategy,
    params: &ParamSet,
    global: &GlobalArgs,
    inputs: &mut Inputs,
) -> CmdResult {
    let g = inputs.graph(graph)?;
    let f = inputs.conflicts(&g, conflicts)?;
    let opts = search_options(params, global);
    let mut notes = Vec::new();
    let mut attempted_extremal = false;

    // the extremal construction handles colourings only
    let try_extremal = conflicts.is_none() && strategy != Strategy::Search && g.is_dirac();
    if strategy == Strategy::Extremal && !try_extremal {
        return Err(CliError("extremal strategy needs a Dirac graph and no conflict file".into()));
    }
    let mut verdict = None;
    if try_extremal {
        let c = classify(&g, params)?;
        let route_extremal = strategy == Strategy::Extremal || !c.is_expander();
        if let (true, Verdict::Extremal { partition, .. }) = (route_extremal, &c.verdict) {
            attempted_extremal = true;
            match refine_to_superextremal(&g, partition, params) {
                Ok(r) => match extremal_rainbow_pm(&g, &r.partition, params) {
                    Ok(out) => {
                        let output = json!({
                            "outcome": "found",
                            "route": "extremal",
                            "matching": out.matching,
                            "m_star": out.m_star,
                            "verdict": c,
                            "trace": global.trace.then_some(&out.trace),
                        });
                        return Ok(Execution::new(EXIT_OK, "found", output));
                    }
                    Err(e) => notes.push(format!("extremal construction: {e}")),
                },
                Err(e) => notes.push(format!("refinement: {e}")),
            }
            if strategy == Strategy::Extremal {
                let output = json!({ "outcome": "exhausted", "route": "extremal", "notes": notes, "verdict": c });
                return Ok(Execution::new(EXIT_NEGATIVE, "exhausted", output));
            }
        } else if strategy == Strategy::Extremal {
            return Err(CliError("graph classified as robust expander; extremal strategy does not apply".into()));
        }
        verdict = Some(c);
    } else if conflicts.is_none() && !g.is_dirac() {
        notes.push("graph is not Dirac; running the search without guarantees".into());
    }

    let report = find_conflict_free_pm(&g, &f, &opts);
    let name = outcome_name(&report);
    let verified = report.outcome.matching().map(|m| m.is_perfect() && m.validate_in(&g).is_ok() && is_conflict_free(m, &f));
    let mut output = serde_json::to_value(&report)?;
    let obj = output.as_object_mut().unwrap();
    obj.insert("route".into(), json!(if attempted_extremal { "extremal_then_search" } else { "search" }));
    obj.insert("verified".into(), json!(verified));
    obj.insert("conflict_bound".into(), json!(f.bound()));
    if let Some(c) = verdict {
        obj.insert("verdict".into(), serde_json::to_value(c)?);
    }
    if !notes.is_empty() {
        obj.insert("notes".into(), json!(notes));
    }
    let code = if report.outcome.is_found() { EXIT_OK } else { EXIT_NEGATIVE };
    Ok(Execution::new(code, name, output))
}

fn cmd_verify(graph: &Path, matching: &Path, conflicts: Option<&PathBuf>, inputs: &mut Inputs) -> CmdResult {
    let g = inputs.graph(graph)?;
    let file: MatchingFile = inputs.json(matching)?;
    let f = inputs.conflicts(&g, conflicts)?;
    let m = file.into_matching(g.n())?;
    let valid = m.validate_in(&g);
    let violations = violated_pairs(&m, &f);
    let ok = m.is_perfect() && valid.is_ok() && violations.is_empty();
    let output = json!({
        "valid": ok,
        "perfect": m.is_perfect(),
        "edges_in_graph": valid.as_ref().map(|_| true).unwrap_or(false),
        "edge_error": valid.err().map(|e| e.to_string()),
        "violations": violations,
    });
    Ok(Execution::new(if ok { EXIT_OK } else { EXIT_NEGATIVE }, if ok { "valid" } else { "invalid" }, output))
}

struct SampleArgs<'a> {
    graph: &'a Path,
    cycles: &'a [usize],
    samples: usize,
    laziness: f64,
    stride: Option<u64>,
    burn_in: Option<u64>,
}

fn cmd_sample(a: SampleArgs<'_>, params: &ParamSet, inputs: &mut Inputs) -> CmdResult {
    let g = inputs.graph(a.graph)?;
    let cfg = ChainConfig { cycle_lengths: a.cycles.to_vec(), steps: 0, laziness: a.laziness, seed: params.seed };
    let mut schedule = SampleSchedule::for_size(g.n());
    schedule.stride = a.stride.unwrap_or(schedule.stride);
    schedule.burn_in = a.burn_in.unwrap_or(schedule.burn_in);
    let samples = match sample_matchings(&g, &cfg, a.samples, schedule) {
        Ok(s) => s,
        Err(crate::sampler::SamplerError::NoPerfectMatching) => {
            return Ok(Execution::new(EXIT_NEGATIVE, "no_perfect_matching", json!({ "error": "graph has no perfect matching" })));
        }
        Err(e) => return Err(e.into()),
    };
    let target = enumerate_perfect_matchings(&g, SAMPLE_TARGET_CAP);
    let target = (!target.truncated).then_some(target.matchings);
    let report = frequency_report(&samples, target.as_deref());
    let mut table = format!("{:<24} {:>8} {:>10}\n", "permutation", "count", "frequency");
    for s in &report.states {
        table.push_str(&format!("{:<24} {:>8} {:>10.4}\n", format!("{:?}", s.permutation), s.count, s.frequency));
    }
    table.push_str(&format!(
        "states visited {}, target {}, max deviation {}\n",
        report.states_visited,
        report.target_states.map_or("-".into(), |t| t.to_string()),
        report.max_abs_deviation.map_or("-".into(), |d| format!("{d:.4}")),
    ));
    let output = json!({ "schedule": schedule, "cycle_lengths": a.cycles, "report": report });
    Ok(Execution { table: Some(table), ..Execution::new(EXIT_OK, "sampled", output) })
}

fn cmd_factor(graph: &Path, delta: usize, params: &ParamSet, global: &GlobalArgs, inputs: &mut Inputs) -> CmdResult {
    let file: SimpleGraphFile = inputs.json(graph)?;
    let g = SimpleGraph::from_file(&file)?;
    let (q, map) = delta_factor_blowup(&g, delta)?;
    let report = find_conflict_free_pm(&q, &q.conflicts_from_coloring(), &search_options(params, global));
    let Some(m) = report.outcome.matching() else {
        let output = json!({ "outcome": outcome_name(&report), "blowup_side": q.n(), "search": report });
        return Ok(Execution::new(EXIT_NEGATIVE, outcome_name(&report), output));
    };
    let x = extract_factor(&g, &q, &map, m)?;
    let h = x.to_graph(g.n())?;
    let output = json!({
        "outcome": "found",
        "factor": h.to_file(),
        "blowup_side": q.n(),
        "blowup_color_bound": q.coloring_bound(),
        "source_is_dirac": map.source_is_dirac,
        "regular": x.regular,
        "rainbow": x.rainbow,
        "simple": x.simple,
        "search": global.trace.then_some(&report),
    });
    Ok(Execution::new(EXIT_OK, "found", output))
}

fn cmd_embed(instance: &Path, pattern: Option<&PathBuf>, params: &ParamSet, global: &GlobalArgs, inputs: &mut Inputs) -> CmdResult {
    let mut inst: EmbeddingInstance = inputs.json(instance)?;
    if inst.template.is_empty() {
        let Some(pattern) = pattern else {
            return Err(CliError("instance has no template and no --pattern was given".into()));
        };
        let pat = inputs.graph(pattern)?;
        let host = SimpleGraph::from_file(&inst.host)?;
        match find_template(&host, &inst.a_side, &inst.b_side, &pat)? {
            Some(j) => inst.template = j,
            None => {
                return Ok(Execution::new(EXIT_NEGATIVE, "no_template", json!({ "outcome": "no_template" })));
            }
        }
    }
    let aux = embedding_auxiliary(&inst)?;
    let report = find_conflict_free_pm(&aux.q, &aux.conflicts, &search_options(params, global));
    let stats = json!({
        "q_side": aux.q.n(),
        "q_edges": aux.q.edge_count(),
        "q_min_degree": aux.min_degree,
        "conflict_pairs": aux.conflicts.len(),
        "conflict_bound": aux.conflicts.bound(),
    });
    let Some(m) = report.outcome.matching() else {
        let output = json!({ "outcome": outcome_name(&report), "auxiliary": stats, "search": report });
        return Ok(Execution::new(EXIT_NEGATIVE, outcome_name(&report), output));
    };
    let emb = extract_embedding(&inst, &aux, m)?;
    let output = json!({
        "outcome": "found",
        "template": inst.template,
        "embedding": emb,
        "auxiliary": stats,
        "search": global.trace.then_some(&report),
    });
    Ok(Execution::new(EXIT_OK, "found", output))
}

fn cmd_bench(sizes: &[usize], instances: usize, bound: Option<usize>, params: &ParamSet, global: &GlobalArgs) -> CmdResult {
    let mut rows = Vec::new();
    let mut table = format!("{:>4} {:>6} {:>6} {:>10} {:>12}\n", "n", "bound", "found", "exhausted", "mean_ms");
    for &n in sizes {
        let k = bound.unwrap_or(n.div_ceil(4)).max(1);
        let (mut found, mut other, mut total_ms) = (0, 0, 0.0);
        for i in 0..instances {
            let seed = crate::util::derive_seed(params.seed, (n * 1_000 + i) as u64);
            let g = random_dirac_instance(n, k, params, seed)?;
            let opts = SearchOptions { seed, ..search_options(params, global) };
            let start = Instant::now();
            let r = find_conflict_free_pm(&g, &g.conflicts_from_coloring(), &opts);
            total_ms += start.elapsed().as_secs_f64() * 1e3;
            if r.outcome.is_found() {
                found += 1;
            } else {
                other += 1;
            }
        }
        let mean = total_ms / instances.max(1) as f64;
        table.push_str(&format!("{n:>4} {k:>6} {found:>6} {other:>10} {mean:>12.3}\n"));
        rows.push(json!({ "n": n, "bound": k, "instances": instances, "found": found, "not_found": other, "mean_ms": mean }));
    }
    Ok(Execution { table: Some(table), ..Execution::new(EXIT_OK, "benchmarked", json!({ "rows": rows })) })
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Gen { .. } => "gen",
        Command::Classify { .. } => "classify",
        Command::Solve { .. } => "solve",
        Command::Verify { .. } => "verify",
        Command::Sample { .. } => "sample",
        Command::Factor { .. } => "factor",
        Command::Embed { .. } => "embed",
        Command::Bench { .. } => "bench",
    }
}

/// Runs a parsed command and returns its result and manifest without printing.
pub fn execute(cli: &Cli) -> (Execution, RunManifest) {
    let start = Instant::now();
    let mut inputs = Inputs { digest: Sha256::new(), used: false };
    let params = resolve_params(&cli.global);
    let g = &cli.global;
    let result = params.as_ref().map_err(|e| CliError(e.0.clone())).and_then(|params| match &cli.command {
        Command::Gen { kind } => cmd_gen(kind, params),
        Command::Classify { graph } => cmd_classify(graph, params, &mut inputs),
        Command::Solve { graph, conflicts, strategy } => {
            cmd_solve(graph, conflicts.as_ref(), *strategy, params, g, &mut inputs)
        }
        Command::Verify { graph, matching, conflicts } => cmd_verify(graph, matching, conflicts.as_ref(), &mut inputs),
        Command::Sample { graph, cycles, samples, laziness, stride, burn_in } => cmd_sample(
            SampleArgs { graph, cycles, samples: *samples, laziness: *laziness, stride: *stride, burn_in: *burn_in },
            params,
            &mut inputs,
        ),
        Command::Factor { graph, delta } => cmd_factor(graph, *delta, params, g, &mut inputs),
        Command::Embed { instance, pattern } => cmd_embed(instance, pattern.as_ref(), params, g, &mut inputs),
        Command::Bench { sizes, instances, bound } => cmd_bench(sizes, *instances, *bound, params, g),
    });
    let exec = result.unwrap_or_else(|e| Execution::new(EXIT_ERROR, "error", json!({ "error": e.0 })));
    let params = params.unwrap_or_default();
    let rendered = serde_json::to_string(&exec.output).expect("JSON values serialize");
    let manifest = RunManifest {
        command: command_name(&cli.command).into(),
        seed: params.seed,
        params,
        input_digest: inputs.used.then(|| hex::encode(inputs.digest.finalize())),
        output_digest: hex::encode(Sha256::digest(rendered.as_bytes())),
        outcome: exec.outcome.clone(),
        exit_code: exec.code,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    (exec, manifest)
}

fn emit(path: Option<&PathBuf>, text: &str, fallback: impl FnOnce(&str)) -> Result<(), String> {
    match path {
        Some(p) => fs::write(p, format!("{text}\n")).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            fallback(text);
            Ok(())
        }
    }
}

/// Parses `args`, runs the command, prints the result and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    let (exec, manifest) = execute(&cli);
    let text = match (&exec.table, cli.global.pretty) {
        (Some(table), true) => table.clone(),
        (None, true) => serde_json::to_string_pretty(&exec.output).expect("JSON values serialize"),
        _ => serde_json::to_string(&exec.output).expect("JSON values serialize"),
    };
    let manifest_text = serde_json::to_string(&manifest).expect("manifest serializes");
    let written = emit(cli.global.out.as_ref(), &text, |t| println!("{t}"))
        .and_then(|_| emit(cli.global.manifest.as_ref(), &manifest_text, |t| eprintln!("{t}")));
    if let Err(e) = written {
        eprintln!("{e}");
        return EXIT_ERROR;
    }
    exec.code
}
