mod common;

use std::collections::BTreeMap;

use common::{corpus, fixture_dir};
use deobbench_core::dataset::{
    build_record, estimate_tokens, filter_path_explosion, filter_token_budget, read_jsonl,
    split_programs, write_jsonl, BuildOptions, Condition, CorpusEntry, DropReason, Message, Role,
    TrainingRecord, BASELINE_SYSTEM, ENHANCED_SYSTEM,
};
use deobbench_core::symexec::ExplorationLimits;
use deobbench_core::transforms::TransformKind;
use proptest::prelude::*;

fn entry(id: &str, src: &str) -> CorpusEntry {
    CorpusEntry::build(id, src, &BuildOptions::default()).unwrap()
}

fn f_entry() -> CorpusEntry {
    let text = std::fs::read_to_string(fixture_dir("listings").join("f_before.c")).unwrap();
    entry("f", &text)
}

const COUNTDOWN: &str = "int countdown(int x) { while (x != 0) x = x - 1; return x; }\n";

#[test]
fn path_explosion_filter() {
    let limits = ExplorationLimits::default();
    let (kept, report) = filter_path_explosion(vec![f_entry(), entry("countdown", COUNTDOWN)], &limits);
    assert_eq!(kept.len(), 1);
    assert_eq!(kept[0].program_id, "f");
    assert_eq!(report.dropped_path_explosion, 1);
    assert_eq!(report.reasons, vec![("countdown".to_string(), DropReason::PathExplosion)]);
    assert!(entry("countdown", COUNTDOWN).bundle.is_none());
    let (kept, report) = filter_path_explosion(vec![], &limits);
    assert!(kept.is_empty());
    assert_eq!(report.kept + report.dropped_path_explosion + report.dropped_token_budget, 0);
}

#[test]
fn token_estimate_is_quarter_chars_rounded_up() {
    let record = TrainingRecord {
        messages: vec![
            Message { role: Role::System, content: "a".repeat(100) },
            Message { role: Role::User, content: "é".repeat(200) },
            Message { role: Role::Assistant, content: "b".repeat(101) },
        ],
        condition: Condition::Baseline,
        kind: TransformKind::AE,
        program_id: "p".into(),
    };
    assert_eq!(estimate_tokens(&record), 101);
}

#[test]
fn token_budget_depends_on_condition() {
    let f = f_entry();
    let baseline_max = TransformKind::ALL
        .iter()
        .map(|&k| estimate_tokens(&build_record(&f, k, Condition::Baseline).unwrap()))
        .max()
        .unwrap();
    let enhanced_max = TransformKind::ALL
        .iter()
        .map(|&k| estimate_tokens(&build_record(&f, k, Condition::Enhanced).unwrap()))
        .max()
        .unwrap();
    assert!(enhanced_max > baseline_max);
    let budget = baseline_max;
    let (kept, _) = filter_token_budget(vec![f.clone()], budget, Condition::Baseline);
    assert_eq!(kept.len(), 1);
    let (kept, report) = filter_token_budget(vec![f.clone()], budget, Condition::Enhanced);
    assert!(kept.is_empty());
    assert_eq!(report.dropped_token_budget, 1);
    let (kept, report) = filter_token_budget(vec![f], 0, Condition::Baseline);
    assert!(kept.is_empty());
    assert_eq!(report.dropped_token_budget, 1);
}

#[test]
fn small_record_fits_a_thousand_tokens() {
    let f = f_entry();
    let record = build_record(&f, TransformKind::OP, Condition::Baseline).unwrap();
    let chars: usize = record.messages.iter().map(|m| m.content.chars().count()).sum();
    assert!(chars <= 1000, "{chars}");
    assert_eq!(filter_token_budget(vec![f], 1000, Condition::Baseline).0.len(), 1);
}

#[test]
fn record_layout() {
    let f = f_entry();
    let base = build_record(&f, TransformKind::CFF, Condition::Baseline).unwrap();
    let roles: Vec<Role> = base.messages.iter().map(|m| m.role).collect();
    assert_eq!(roles, [Role::System, Role::User, Role::Assistant]);
    assert_eq!(base.content(Role::System), Some(BASELINE_SYSTEM));
    let user = base.content(Role::User).unwrap();
    assert!(user.starts_with("Obfuscated Code:\n"));
    assert_eq!(&user["Obfuscated Code:\n".len()..], f.variants[&TransformKind::CFF]);
    assert_eq!(base.content(Role::Assistant), Some(f.original.as_str()));

    let enhanced = build_record(&f, TransformKind::CFF, Condition::Enhanced).unwrap();
    assert_eq!(enhanced.content(Role::System), Some(ENHANCED_SYSTEM));
    let user = enhanced.content(Role::User).unwrap();
    assert!(user.contains("KLEE Artifacts:\nSMT2:"));
    let mut at = 0;
    for header in ["KLEE Artifacts:", "SMT2:", "KQuery:", "iStats:", "KTest:"] {
        let pos = user[at..].find(header).unwrap_or_else(|| panic!("{header} missing or out of order"));
        at += pos + header.len();
    }
    assert_eq!(enhanced.obfuscated_code(), base.obfuscated_code());
}

#[test]
fn conditions_differ_only_in_system_text_and_artifacts() {
    let limits = ExplorationLimits::default();
    let entries: Vec<CorpusEntry> = corpus()
        .into_iter()
        .map(|(name, text, _)| entry(name.trim_end_matches(".c"), &text))
        .collect();
    let (entries, _) = filter_path_explosion(entries, &limits);
    assert!(entries.len() >= 25);
    for e in &entries {
        for kind in TransformKind::ALL {
            let b = build_record(e, kind, Condition::Baseline).unwrap();
            let x = build_record(e, kind, Condition::Enhanced).unwrap();
            assert_eq!(b.content(Role::Assistant), x.content(Role::Assistant));
            let (bu, xu) = (b.content(Role::User).unwrap(), x.content(Role::User).unwrap());
            let artifacts = xu.strip_prefix(bu).expect("enhanced user text extends baseline");
            assert!(artifacts.starts_with("\n\nKLEE Artifacts:\n"));
        }
    }
}

#[test]
fn missing_bundle_or_variant_is_an_error() {
    let mut e = entry("countdown", COUNTDOWN);
    assert!(build_record(&e, TransformKind::AE, Condition::Baseline).is_ok());
    assert!(build_record(&e, TransformKind::AE, Condition::Enhanced).is_err());
    e.variants = BTreeMap::new();
    assert!(build_record(&e, TransformKind::AE, Condition::Baseline).is_err());
}

#[test]
fn jsonl_line_shape() {
    let f = f_entry();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cff_baseline.jsonl");
    let record = build_record(&f, TransformKind::CFF, Condition::Baseline).unwrap();
    assert_eq!(write_jsonl(&[record], &path).unwrap(), 1);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with(
        "{\"messages\": [{\"role\": \"system\", \"content\": \"You are an expert deobfuscation assistant. Output only valid C code.\"}, {\"role\": \"user\", \"content\": \"Obfuscated Code:\\n"
    ));
    assert!(text.ends_with("}]}\n"));
    assert_eq!(text.lines().count(), 1);
    let value: serde_json::Value = serde_json::from_str(text.trim_end()).unwrap();
    let obj = value.as_object().unwrap();
    assert_eq!(obj.keys().collect::<Vec<_>>(), ["messages"]);

    let empty = dir.path().join("empty.jsonl");
    assert_eq!(write_jsonl(&[], &empty).unwrap(), 0);
    assert_eq!(std::fs::read_to_string(&empty).unwrap(), "");
    assert!(read_jsonl(&empty).unwrap().is_empty());
}

#[test]
fn filters_commute_on_kept_set() {
    let limits = ExplorationLimits::default();
    let entries: Vec<CorpusEntry> = corpus()
        .into_iter()
        .map(|(name, text, _)| entry(name.trim_end_matches(".c"), &text))
        .collect();
    for budget in [150, 400, 5000] {
        let ids = |v: &[CorpusEntry]| v.iter().map(|e| e.program_id.clone()).collect::<Vec<_>>();
        let (a, _) = filter_path_explosion(entries.clone(), &limits);
        let (a, _) = filter_token_budget(a, budget, Condition::Enhanced);
        let (b, _) = filter_token_budget(entries.clone(), budget, Condition::Enhanced);
        let (b, _) = filter_path_explosion(b, &limits);
        assert_eq!(ids(&a), ids(&b), "budget {budget}");
    }
}

#[test]
fn split_is_seeded_and_disjoint() {
    let ids: Vec<String> = (0..20).map(|i| format!("p{i:02}")).collect();
    let (train, test) = split_programs(&ids, 0.25, 7);
    assert_eq!(test.len(), 5);
    assert_eq!(train.len(), 15);
    assert!(test.iter().all(|t| !train.contains(t)));
    assert_eq!(split_programs(&ids, 0.25, 7), (train, test));
    assert_eq!(split_programs(&ids, 0.0, 7).1.len(), 0);
}

fn record_strategy() -> impl Strategy<Value = TrainingRecord> {
    (
        "\\PC{0,40}",
        "[ -~\\n\\t\"\\\\é€]{0,120}",
        "[ -~\\n]{0,80}",
        prop::sample::select(TransformKind::ALL.to_vec()),
        prop::sample::select(Condition::ALL.to_vec()),
        "[a-z_]{1,12}",
    )
        .prop_map(|(sys, user, asst, kind, condition, id)| TrainingRecord {
            messages: vec![
                Message { role: Role::System, content: sys },
                Message { role: Role::User, content: user },
                Message { role: Role::Assistant, content: asst },
            ],
            condition,
            kind,
            program_id: id,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn jsonl_round_trips(records in prop::collection::vec(record_strategy(), 100)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mixed.jsonl");
        prop_assert_eq!(write_jsonl(&records, &path).unwrap(), 100);
        let text = std::fs::read_to_string(&path).unwrap();
        prop_assert_eq!(text.lines().count(), 100);
        for line in text.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            prop_assert_eq!(v.as_object().unwrap().len(), 1);
        }
        prop_assert_eq!(read_jsonl(&path).unwrap(), records);
    }
}
