use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use deobbench_adapter::{infer_all, HttpModel, InferenceResult, Model, RetryPolicy, StubIdentityModel};
use deobbench_core::dataset::{
    build_record, corpus_file_name, filter_path_explosion, filter_token_budget, split_programs, write_jsonl,
    CorpusEntry, FilterReport, TrainingRecord,
};
use deobbench_core::frontend::parse_checked;
use deobbench_core::metrics::{score_quality, score_semantics_text, score_syntax, SyntaxMode};
use deobbench_core::report::{aggregate, AggregateRow, ScoreRecord};
use sha2::{Digest, Sha256};

use crate::commands::report_text;
use crate::manifest::Provider;
use crate::pool::parallel_map;
use crate::{CliError, RunManifest};

/// Holds the running stage, `failed <stage>: ...`, or `complete`.
pub const STAGE_FILE: &str = "STAGE";
/// SHA-256 of every other output file, one `<hex>  <path>` line each.
pub const SUMS_FILE: &str = "SHA256SUMS";

const OWNED: [&str; 12] = [
    "obfuscated",
    "artifacts",
    "dataset",
    "inference",
    "candidates",
    "scores",
    "filter_report.json",
    "report.csv",
    "report.txt",
    "manifest.toml",
    SUMS_FILE,
    STAGE_FILE,
];

#[derive(Debug, Clone)]
pub struct PipelineSummary {
    pub out: PathBuf,
    pub filter: FilterReport,
    pub rows: Vec<AggregateRow>,
    pub table: String,
}

pub(crate) struct BuiltDataset {
    pub entries: Vec<CorpusEntry>,
    pub filter: FilterReport,
    pub files: Vec<(PathBuf, usize)>,
    /// Records that inference runs on.
    pub eval: Vec<TrainingRecord>,
}

pub(crate) fn write_file(stage: &'static str, path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::stage(stage, format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::stage(stage, format!("{}: {e}", path.display())))
}

fn load_corpus(dir: &Path) -> Result<Vec<(String, String)>, CliError> {
    if !dir.is_dir() {
        return Err(CliError::Usage(format!("corpus directory {} does not exist", dir.display())));
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "c"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Usage(format!("no .c files in {}", dir.display())));
    }
    paths
        .into_iter()
        .map(|p| {
            let id = p.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            fs::read_to_string(&p)
                .map(|text| (id, text))
                .map_err(|e| CliError::stage("build", format!("{}: {e}", p.display())))
        })
        .collect()
}

fn build_entries(m: &RunManifest, sources: &[(String, String)]) -> Result<Vec<CorpusEntry>, CliError> {
    let opts = m.build_options();
    let built = parallel_map(sources, m.jobs, |(id, text)| CorpusEntry::build(id, text, &opts));
    let mut entries = Vec::new();
    let mut errors = Vec::new();
    for b in built {
        match b {
            Ok(e) => entries.push(e),
            Err(e) => errors.push(e.to_string()),
        }
    }
    if !errors.is_empty() {
        return Err(CliError::stage("build", errors.join("\n")));
    }
    Ok(entries)
}

fn filter_and_write(m: &RunManifest, entries: Vec<CorpusEntry>, out: &Path) -> Result<BuiltDataset, CliError> {
    let (mut kept, mut report) = filter_path_explosion(entries, &m.limits);
    for &condition in &m.conditions {
        let (k, r) = filter_token_budget(kept, m.token_budget, condition);
        kept = k;
        report = report.then(r);
    }
    let json = serde_json::to_string_pretty(&report).expect("filter report serializes");
    write_file("filter", &out.join("filter_report.json"), &format!("{json}\n"))?;

    let ids: Vec<String> = kept.iter().map(|e| e.program_id.clone()).collect();
    let (train, test) = if m.test_fraction > 0.0 {
        split_programs(&ids, m.test_fraction, m.seed)
    } else {
        (ids, Vec::new())
    };
    let by_id: BTreeMap<&str, &CorpusEntry> = kept.iter().map(|e| (e.program_id.as_str(), e)).collect();
    let dataset = out.join("dataset");
    let mut files = Vec::new();
    let mut eval = Vec::new();
    for &kind in &m.kinds {
        for &condition in &m.conditions {
            let records = |ids: &[String]| -> Result<Vec<TrainingRecord>, CliError> {
                ids.iter()
                    .map(|id| build_record(by_id[id.as_str()], kind, condition))
                    .collect::<Result<_, _>>()
                    .map_err(|e| CliError::stage("dataset", e))
            };
            let name = corpus_file_name(kind, condition);
            let mut write = |path: PathBuf, rs: &[TrainingRecord]| -> Result<(), CliError> {
                fs::create_dir_all(path.parent().expect("dataset dir"))
                    .map_err(|e| CliError::stage("dataset", e))?;
                let n = write_jsonl(rs, &path).map_err(|e| CliError::stage("dataset", e))?;
                files.push((path, n));
                Ok(())
            };
            if test.is_empty() {
                let rs = records(&train)?;
                write(dataset.join(&name), &rs)?;
                eval.extend(rs);
            } else {
                write(dataset.join("train").join(&name), &records(&train)?)?;
                let rs = records(&test)?;
                write(dataset.join("test").join(&name), &rs)?;
                eval.extend(rs);
            }
        }
    }
    Ok(BuiltDataset {
        entries: kept,
        filter: report,
        files,
        eval,
    })
}

/// Builds, filters and writes the JSONL corpora for `m` under `out`.
pub(crate) fn build_dataset(m: &RunManifest, out: &Path) -> Result<BuiltDataset, CliError> {
    let sources = load_corpus(&m.corpus)?;
    let entries = build_entries(m, &sources)?;
    filter_and_write(m, entries, out)
}

fn model_for(m: &RunManifest) -> Result<(Box<dyn Model>, RetryPolicy), CliError> {
    match m.model.provider {
        Provider::Stub => Ok((
            Box::new(StubIdentityModel::new()),
            RetryPolicy {
                max_retries: 0,
                initial_backoff: Duration::ZERO,
            },
        )),
        Provider::Http => {
            let cfg = m.model.endpoint_config(m.jobs)?;
            let retry = RetryPolicy::from(&cfg);
            Ok((Box::new(HttpModel::new(cfg)), retry))
        }
    }
}

fn clear_outputs(out: &Path) -> Result<(), CliError> {
    for name in OWNED {
        let p = out.join(name);
        let res = if p.is_dir() {
            fs::remove_dir_all(&p)
        } else if p.exists() {
            fs::remove_file(&p)
        } else {
            Ok(())
        };
        res.map_err(|e| CliError::stage("setup", format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn set_stage(out: &Path, text: &str) -> Result<(), CliError> {
    write_file("setup", &out.join(STAGE_FILE), &format!("{text}\n"))
}

fn files_under(dir: &Path, base: &Path, found: &mut Vec<(String, PathBuf)>) -> std::io::Result<()> {
    for e in fs::read_dir(dir)? {
        let p = e?.path();
        if p.is_dir() {
            files_under(&p, base, found)?;
        } else {
            let rel = p.strip_prefix(base).expect("under base");
            let rel: Vec<String> = rel.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect();
            found.push((rel.join("/"), p));
        }
    }
    Ok(())
}

/// `<hex>  <path>` for every file under `dir` except the sums file itself.
pub fn checksums(dir: &Path) -> std::io::Result<String> {
    let mut files = Vec::new();
    files_under(dir, dir, &mut files)?;
    files.sort();
    let mut text = String::new();
    for (rel, path) in files {
        if rel == SUMS_FILE {
            continue;
        }
        let digest = Sha256::digest(fs::read(&path)?);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        text.push_str(&format!("{hex}  {rel}\n"));
    }
    Ok(text)
}

fn score(
    m: &RunManifest,
    entries: &BTreeMap<&str, &CorpusEntry>,
    result: &InferenceResult,
    model_condition: &str,
) -> Result<ScoreRecord, CliError> {
    let entry = entries[result.program_id.as_str()];
    let original = parse_checked(&entry.program_id, &entry.original).map_err(|d| {
        CliError::stage("evaluate", format!("{}: {:?}", entry.program_id, d.first().map(ToString::to_string)))
    })?;
    let candidate = result.extracted_code.as_deref().unwrap_or("");
    let mode = match &m.compiler_cmd {
        Some(cmd) => SyntaxMode::External(cmd.clone()),
        None => SyntaxMode::Internal,
    };
    let syntax = score_syntax(candidate, &mode).map_err(|e| CliError::stage("evaluate", e))?;
    Ok(ScoreRecord {
        program_id: result.program_id.clone(),
        kind: result.kind,
        model_condition: model_condition.to_string(),
        syntax,
        semantic: score_semantics_text(&original, candidate, &entry.entry, &m.limits),
        quality: score_quality(candidate),
    })
}

fn stages(m: &RunManifest, out: &Path, stage: &mut &'static str) -> Result<PipelineSummary, CliError> {
    let enter = |name: &'static str, stage: &mut &'static str| {
        *stage = name;
        log::info!("stage {name}");
        set_stage(out, &format!("running {name}"))
    };

    enter("build", stage)?;
    let mut written = m.clone();
    written.out = PathBuf::from(".");
    write_file("build", &out.join("manifest.toml"), &written.to_toml())?;
    let sources = load_corpus(&m.corpus)?;
    let entries = build_entries(m, &sources)?;
    for e in &entries {
        for &kind in &m.kinds {
            let path = out.join("obfuscated").join(&e.program_id).join(format!("{}.c", kind.tag()));
            write_file("build", &path, &e.variants[&kind])?;
        }
        if let Some(bundle) = &e.bundle {
            bundle
                .write_to(&out.join("artifacts").join(&e.program_id))
                .map_err(|err| CliError::stage("build", err))?;
        }
    }

    enter("dataset", stage)?;
    let built = filter_and_write(m, entries, out)?;

    enter("infer", stage)?;
    let (model, retry) = model_for(m)?;
    let mut results = Vec::new();
    for &kind in &m.kinds {
        for &condition in &m.conditions {
            let group: Vec<TrainingRecord> = built
                .eval
                .iter()
                .filter(|r| r.kind == kind && r.condition == condition)
                .cloned()
                .collect();
            let rs = infer_all(&group, model.as_ref(), retry, m.jobs);
            let mut text = String::new();
            for r in &rs {
                text.push_str(&serde_json::to_string(r).expect("result serializes"));
                text.push('\n');
            }
            let name = format!("{}_{}.results.jsonl", kind.tag(), condition.tag());
            write_file("infer", &out.join("inference").join(name), &text)?;
            let failed = rs.iter().filter(|r| r.error.is_some()).count();
            if failed > 0 {
                log::warn!("{kind} {}: {failed} request(s) failed", condition.tag());
            }
            results.extend(rs);
        }
    }

    enter("evaluate", stage)?;
    let by_id: BTreeMap<&str, &CorpusEntry> = built.entries.iter().map(|e| (e.program_id.as_str(), e)).collect();
    let label = |r: &InferenceResult| format!("{}_{}", r.model, r.condition.tag());
    let scored = parallel_map(&results, m.jobs, |r| score(m, &by_id, r, &label(r)));
    let mut scores = Vec::with_capacity(scored.len());
    for (r, s) in results.iter().zip(scored) {
        let s = s?;
        let dir_of = |root: &str| out.join(root).join(&s.model_condition).join(s.kind.tag());
        if let Some(code) = &r.extracted_code {
            write_file("evaluate", &dir_of("candidates").join(format!("{}.c", r.program_id)), code)?;
        }
        let json = serde_json::to_string_pretty(&s).expect("score serializes");
        write_file("evaluate", &dir_of("scores").join(format!("{}.json", r.program_id)), &format!("{json}\n"))?;
        scores.push(s);
    }

    enter("report", stage)?;
    let (csv, table) = report_text(&scores, 0);
    write_file("report", &out.join("report.csv"), &csv)?;
    write_file("report", &out.join("report.txt"), &table)?;
    Ok(PipelineSummary {
        out: out.to_path_buf(),
        filter: built.filter,
        rows: aggregate(&scores),
        table,
    })
}

/// Runs every stage into `m.out`. Earlier outputs of this tool in that
/// directory are replaced; on failure the partial outputs stay and the
/// stage file names the failing stage.
pub fn run_pipeline(m: &RunManifest) -> Result<PipelineSummary, CliError> {
    m.validate()?;
    if !m.corpus.is_dir() {
        return Err(CliError::Usage(format!("corpus directory {} does not exist", m.corpus.display())));
    }
    let out = m.out.as_path();
    fs::create_dir_all(out).map_err(|e| CliError::stage("setup", format!("{}: {e}", out.display())))?;
    clear_outputs(out)?;
    let mut stage = "setup";
    match stages(m, out, &mut stage) {
        Ok(summary) => {
            set_stage(out, "complete")?;
            let sums = checksums(out).map_err(|e| CliError::stage("report", e))?;
            write_file("report", &out.join(SUMS_FILE), &sums)?;
            Ok(summary)
        }
        Err(e) => {
            let _ = set_stage(out, &format!("failed {stage}: {e}"));
            Err(e)
        }
    }
}
