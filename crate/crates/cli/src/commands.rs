use std::fs;
use std::path::{Path, PathBuf};

use deobbench_adapter::{infer_all, HttpModel, Model, RetryPolicy, StubIdentityModel};
use deobbench_core::artifacts::ArtifactBundle;
use deobbench_core::dataset::read_jsonl;
use deobbench_core::frontend::{parse_checked, pretty_print, SourceUnit};
use deobbench_core::metrics::{
    score_quality, score_semantics_text, score_syntax, QualityScore, SemanticScore, SyntaxMode, SyntaxScore,
};
use deobbench_core::report::{aggregate, to_csv, to_table, ScoreRecord};
use deobbench_core::symexec::{count_tests, explore};
use deobbench_core::transforms::apply;
use serde::Serialize;

use crate::manifest::Provider;
use crate::pipeline::{build_dataset, write_file};
use crate::{
    CliError, DatasetBuildArgs, EvaluateArgs, InferArgs, ObfuscateArgs, PipelineArgs, ReportArgs, RunManifest,
    SymexecArgs,
};

fn read_source(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn parse_source(stage: &'static str, path: &Path) -> Result<SourceUnit, CliError> {
    let text = read_source(path)?;
    parse_checked(&path.display().to_string(), &text).map_err(|diags| {
        let lines: Vec<String> = diags.iter().map(ToString::to_string).collect();
        CliError::stage(stage, lines.join("\n"))
    })
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "program".to_string())
}

fn default_entry(stage: &'static str, unit: &SourceUnit, entry: Option<&str>) -> Result<String, CliError> {
    match entry {
        Some(e) => Ok(e.to_string()),
        None => unit
            .functions
            .last()
            .map(|f| f.name.clone())
            .ok_or_else(|| CliError::stage(stage, "no functions")),
    }
}

fn syntax_mode(compiler_cmd: Option<&str>) -> SyntaxMode {
    match compiler_cmd {
        Some(cmd) => SyntaxMode::External(cmd.to_string()),
        None => SyntaxMode::Internal,
    }
}

fn emit(text: &str, dest: Option<&Path>, stage: &'static str) -> Result<(), CliError> {
    match dest {
        Some(path) => write_file(stage, path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn obfuscate(a: &ObfuscateArgs, m: &RunManifest) -> Result<(), CliError> {
    let unit = parse_source("obfuscate", &a.input)?;
    let mut cfg = m.transform_config();
    cfg.paper_fidelity |= a.paper_fidelity;
    let result = apply(a.kind, &unit, &cfg).map_err(|e| CliError::stage("obfuscate", e))?;
    log::info!("{}: {} rewrite(s)", a.input.display(), result.rewrite_log.len());
    emit(&pretty_print(&result.output), a.output.as_deref(), "obfuscate")
}

pub fn symexec(a: &SymexecArgs, m: &RunManifest, out: Option<&Path>) -> Result<(), CliError> {
    let dir = a
        .output
        .as_deref()
        .or(out)
        .ok_or_else(|| CliError::Usage("symexec needs an output directory (-o DIR)".to_string()))?;
    let unit = parse_source("symexec", &a.input)?;
    let entry = default_entry("symexec", &unit, a.entry.as_deref())?;
    let mut limits = m.limits.clone();
    if let Some(n) = a.max_paths {
        limits.max_paths = n;
    }
    if let Some(n) = a.max_loop_unroll {
        limits.max_loop_unroll = n;
    }
    if let Some(d) = a.domain {
        limits.domain = d;
    }
    let x = explore(&unit, &entry, &limits).map_err(|e| match e {
        deobbench_core::symexec::ExploreError::Limits(l) => CliError::Usage(l.to_string()),
        other => CliError::stage("symexec", other),
    })?;
    let mut m = m.clone();
    m.smt2_int_sort |= a.smt2_int_sort;
    let bundle = ArtifactBundle::from_exploration(&stem(&a.input), &x, m.smt2_sort());
    let files = bundle.write_to(dir).map_err(|e| CliError::stage("symexec", e))?;
    let s = &x.stats;
    println!(
        "{entry}: {} path(s), {} test(s), {} solver call(s), {} timeout(s), depth {}{}",
        s.paths_explored,
        count_tests(&x.records),
        s.solver_calls,
        s.timeouts,
        s.max_depth_reached,
        if x.hit_limits(&limits) { ", limits reached" } else { "" }
    );
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

pub fn dataset_build(a: &DatasetBuildArgs, mut m: RunManifest, out: Option<&Path>) -> Result<(), CliError> {
    if out.is_none() && m.out == RunManifest::default().out {
        return Err(CliError::Usage("dataset build needs --out DIR".to_string()));
    }
    if let Some(c) = &a.corpus {
        m.corpus = c.clone();
    }
    if let Some(c) = a.condition {
        m.conditions = vec![c];
    }
    if let Some(b) = a.budget {
        m.token_budget = b;
    }
    if let Some(f) = a.test_fraction {
        m.test_fraction = f;
    }
    m.smt2_int_sort |= a.smt2_int_sort;
    m.validate()?;
    let built = build_dataset(&m, &m.out)?;
    let r = &built.filter;
    println!(
        "kept {} program(s); dropped {} for path explosion, {} for the token budget",
        r.kept, r.dropped_path_explosion, r.dropped_token_budget
    );
    for (file, n) in &built.files {
        println!("wrote {n} record(s) to {}", file.display());
    }
    Ok(())
}

pub fn infer(a: &InferArgs, m: &RunManifest, out: Option<&Path>) -> Result<(), CliError> {
    let records = read_jsonl(&a.input).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut model_spec = m.model.clone();
    if let Some(e) = &a.endpoint {
        model_spec.provider = Provider::Http;
        model_spec.endpoint = Some(e.clone());
    }
    if a.stub {
        model_spec = crate::ModelSpec::default();
    }
    if let Some(name) = &a.model {
        model_spec.name = name.clone();
    }
    if let Some(v) = &a.api_key_env {
        model_spec.api_key_env = v.clone();
    }
    if let Some(t) = a.timeout {
        model_spec.timeout_secs = t;
    }
    if let Some(r) = a.max_retries {
        model_spec.max_retries = r;
    }
    let dest = out.map(Path::to_path_buf).unwrap_or_else(|| {
        let name = a.input.file_name().unwrap_or_default().to_string_lossy();
        let stem = name.strip_suffix(".jsonl").unwrap_or(&name);
        a.input.with_file_name(format!("{stem}.results.jsonl"))
    });
    let (model, retry, jobs): (Box<dyn Model>, RetryPolicy, usize) = match model_spec.provider {
        Provider::Stub => (
            Box::new(StubIdentityModel::new()),
            RetryPolicy {
                max_retries: 0,
                initial_backoff: Default::default(),
            },
            m.jobs,
        ),
        Provider::Http => {
            let cfg = model_spec.endpoint_config(m.jobs)?;
            let retry = RetryPolicy::from(&cfg);
            let jobs = cfg.max_concurrency;
            (Box::new(HttpModel::new(cfg)), retry, jobs)
        }
    };
    let results = infer_all(&records, model.as_ref(), retry, jobs);
    let mut text = String::new();
    for r in &results {
        text.push_str(&serde_json::to_string(r).expect("result serializes"));
        text.push('\n');
    }
    write_file("infer", &dest, &text)?;
    let failed = results.iter().filter(|r| r.error.is_some()).count();
    let extracted = results.iter().filter(|r| r.extracted_code.is_some()).count();
    println!(
        "{} record(s): {extracted} with code, {failed} failed; wrote {}",
        results.len(),
        dest.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct Evaluation {
    program_id: String,
    syntax: SyntaxScore,
    semantic: SemanticScore,
    quality: QualityScore,
}

pub fn evaluate(a: &EvaluateArgs, m: &RunManifest, out: Option<&Path>) -> Result<(), CliError> {
    let original = parse_source("evaluate", &a.original)?;
    let candidate = read_source(&a.candidate)?;
    let entry = default_entry("evaluate", &original, a.entry.as_deref())?;
    let compiler = a.compiler_cmd.as_deref().or(m.compiler_cmd.as_deref());
    let syntax = score_syntax(&candidate, &syntax_mode(compiler)).map_err(|e| CliError::stage("evaluate", e))?;
    let semantic = score_semantics_text(&original, &candidate, &entry, &m.limits);
    let quality = score_quality(&candidate);
    let program_id = stem(&a.original);
    let json = match a.kind {
        Some(kind) => serde_json::to_string_pretty(&ScoreRecord {
            program_id,
            kind,
            model_condition: a.model_condition.clone().unwrap_or_default(),
            syntax,
            semantic,
            quality,
        }),
        None => serde_json::to_string_pretty(&Evaluation {
            program_id,
            syntax,
            semantic,
            quality,
        }),
    }
    .expect("scores serialize");
    emit(&format!("{json}\n"), out, "evaluate")
}

fn collect_json(path: &Path, found: &mut Vec<PathBuf>) -> Result<(), CliError> {
    if path.is_dir() {
        let mut children: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| CliError::stage("report", format!("{}: {e}", path.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .collect();
        children.sort();
        for c in children {
            if c.is_dir() || c.extension().is_some_and(|e| e == "json") {
                collect_json(&c, found)?;
            }
        }
        Ok(())
    } else if path.exists() {
        found.push(path.to_path_buf());
        Ok(())
    } else {
        Err(CliError::Usage(format!("{} does not exist", path.display())))
    }
}

/// Reads score files, skipping malformed ones. Returns the records and the
/// number skipped.
pub fn read_scores(inputs: &[PathBuf]) -> Result<(Vec<ScoreRecord>, usize), CliError> {
    let mut files = Vec::new();
    for i in inputs {
        collect_json(i, &mut files)?;
    }
    let mut records = Vec::new();
    let mut skipped = 0;
    for f in files {
        let parsed = fs::read_to_string(&f)
            .map_err(|e| e.to_string())
            .and_then(|t| serde_json::from_str::<ScoreRecord>(&t).map_err(|e| e.to_string()));
        match parsed {
            Ok(r) => records.push(r),
            Err(e) => {
                log::warn!("skipping {}: {e}", f.display());
                skipped += 1;
            }
        }
    }
    Ok((records, skipped))
}

/// The table text followed by a footer line.
pub fn report_text(records: &[ScoreRecord], skipped: usize) -> (String, String) {
    let rows = aggregate(records);
    let table = format!(
        "{}\n{} score file(s) read, {skipped} malformed file(s) skipped\n",
        to_table(&rows).trim_end(),
        records.len()
    );
    (to_csv(&rows), table)
}

pub fn report(a: &ReportArgs, out: Option<&Path>) -> Result<(), CliError> {
    let (records, skipped) = read_scores(&a.inputs)?;
    let (csv, table) = report_text(&records, skipped);
    if let Some(dir) = out {
        write_file("report", &dir.join("report.csv"), &csv)?;
        write_file("report", &dir.join("report.txt"), &table)?;
    }
    print!("{table}");
    Ok(())
}

pub fn pipeline_manifest(a: &PipelineArgs, mut m: RunManifest) -> Result<RunManifest, CliError> {
    if let Some(c) = &a.corpus {
        m.corpus = c.clone();
    }
    if let Some(k) = &a.kinds {
        m.kinds = k.clone();
    }
    if let Some(c) = &a.conditions {
        m.conditions = c.clone();
    }
    if let Some(b) = a.budget {
        m.token_budget = b;
    }
    if let Some(f) = a.test_fraction {
        m.test_fraction = f;
    }
    if let Some(c) = &a.compiler_cmd {
        m.compiler_cmd = Some(c.clone());
    }
    m.smt2_int_sort |= a.smt2_int_sort;
    if let Some(e) = &a.endpoint {
        m.model.provider = Provider::Http;
        m.model.endpoint = Some(e.clone());
    }
    if let Some(name) = &a.model {
        m.model.name = name.clone();
    }
    m.validate()?;
    Ok(m)
}
