mod common;

use common::{corpus, grid, load};
use deobbench_core::frontend::{
    count_loc, has_errors, parse, pretty_print, typecheck, Outcome, Program, SourceUnit,
    DEFAULT_FUEL,
};
use deobbench_core::transforms::{apply, TransformConfig, TransformKind};

fn fidelity_cfg() -> TransformConfig {
    TransformConfig {
        paper_fidelity: true,
        ..TransformConfig::default()
    }
}

fn entry_of(unit: &SourceUnit) -> (&str, usize) {
    let f = unit.functions.last().unwrap();
    (&f.name, f.params.len())
}

fn outcomes(unit: &SourceUnit, inputs: &[Vec<i32>]) -> Vec<Outcome> {
    let (name, arity) = entry_of(unit);
    let program = Program::compile(unit).unwrap();
    let entry = program.entry(name, arity).unwrap();
    inputs
        .iter()
        .map(|args| program.run(entry, args, DEFAULT_FUEL, None))
        .collect()
}

fn golden(before: &str, after: &str, kind: TransformKind) {
    let input = load("listings", before);
    let expected = load("listings", after);
    let result = apply(kind, &input, &fidelity_cfg()).unwrap();
    assert!(
        result.output.same_code(&expected),
        "{kind}:\n{}\nexpected:\n{}",
        pretty_print(&result.output),
        pretty_print(&expected)
    );
    let strip = |u: &SourceUnit| {
        let mut u = u.clone();
        u.comments.clear();
        pretty_print(&u)
    };
    assert_eq!(strip(&result.output), strip(&expected));
}

#[test]
fn listing_cff_matches_golden() {
    golden("f_before.c", "f_after_cff.c", TransformKind::CFF);
}

#[test]
fn listing_op_matches_golden() {
    golden("g_before.c", "g_after_op.c", TransformKind::OP);
}

#[test]
fn listing_ae_matches_golden() {
    golden("h_before.c", "h_after_ae.c", TransformKind::AE);
}

#[test]
fn listing_be_matches_golden() {
    golden("k_before.c", "k_after_be.c", TransformKind::BE);
}

#[test]
fn annotations_are_attached() {
    let cases = [
        ("g_before.c", TransformKind::OP, vec!["// always true", "// unreachable"]),
        ("h_before.c", TransformKind::AE, vec!["// equivalent to a + 1"]),
        ("k_before.c", TransformKind::BE, vec!["// encodes sign"]),
    ];
    for (file, kind, notes) in cases {
        let out = apply(kind, &load("listings", file), &fidelity_cfg()).unwrap().output;
        let text = pretty_print(&out);
        for note in notes {
            assert!(text.contains(note), "{kind} lacks {note}:\n{text}");
        }
        assert!(count_loc(&text).comment_lines >= 1);
    }
    let op = apply(TransformKind::OP, &load("listings", "g_before.c"), &fidelity_cfg()).unwrap();
    assert!(count_loc(&pretty_print(&op.output)).comment_lines >= 2);
}

#[test]
fn cff_keeps_straight_line_functions() {
    let unit = parse("id.c", "int id(int a) { return a; }").unwrap();
    let out = apply(TransformKind::CFF, &unit, &TransformConfig::default()).unwrap();
    assert!(out.output.same_code(&unit));
    assert!(out.rewrite_log.is_empty());
}

#[test]
fn zero_intensity_is_identity() {
    let unit = load("listings", "h_before.c");
    let cfg = TransformConfig {
        ae_intensity: 0.0,
        ..TransformConfig::default()
    };
    let out = apply(TransformKind::AE, &unit, &cfg).unwrap();
    assert!(out.output.same_code(&unit));
    assert!(out.rewrite_log.is_empty());
}

#[test]
fn be_without_if_is_identity() {
    let unit = load("listings", "h_before.c");
    let out = apply(TransformKind::BE, &unit, &TransformConfig::default()).unwrap();
    assert!(out.output.same_code(&unit));
}

#[test]
fn default_ae_of_h_is_exact_on_full_range() {
    let unit = load("listings", "h_before.c");
    let encoded = apply(TransformKind::AE, &unit, &TransformConfig::default()).unwrap().output;
    assert!(!encoded.same_code(&unit));
    let mut inputs: Vec<Vec<i32>> = [i32::MIN, i32::MIN + 1, -1, 0, 1, 1 << 29, i32::MAX - 1, i32::MAX]
        .iter()
        .map(|&v| vec![v])
        .collect();
    inputs.extend((0..4096i64).map(|i| vec![(i * 1_048_573 - (1 << 31)) as i32]));
    let got = outcomes(&encoded, &inputs);
    for (args, out) in inputs.iter().zip(got) {
        assert_eq!(out, Outcome::Returned(Some(args[0].wrapping_add(1))), "a = {}", args[0]);
    }
}

#[test]
fn fidelity_mode_divergences_are_real() {
    let h = apply(TransformKind::AE, &load("listings", "h_before.c"), &fidelity_cfg()).unwrap().output;
    let a = 1 << 29;
    assert_eq!(outcomes(&h, &[vec![a]]), vec![Outcome::Returned(Some(-536_870_911))]);
    let k = apply(TransformKind::BE, &load("listings", "k_before.c"), &fidelity_cfg()).unwrap().output;
    assert_eq!(outcomes(&k, &[vec![0]]), vec![Outcome::Returned(Some(1))]);
    let original = load("listings", "k_before.c");
    assert_eq!(outcomes(&original, &[vec![0]]), vec![Outcome::Returned(Some(-1))]);
}

#[test]
fn every_kind_preserves_behaviour_on_the_corpus() {
    for (name, _, unit) in corpus() {
        let (_, arity) = entry_of(&unit);
        let inputs = grid(arity, -1024, 1023, 1 << 16);
        let expected = outcomes(&unit, &inputs);
        for kind in TransformKind::ALL {
            for seed in [0u64, 7] {
                let cfg = TransformConfig {
                    seed,
                    opaque_pool_size: 4,
                    ..TransformConfig::default()
                };
                let out = apply(kind, &unit, &cfg).unwrap().output;
                assert!(!has_errors(&typecheck(&out)), "{name} {kind}");
                let got = outcomes(&out, &inputs);
                if let Some(i) = (0..inputs.len()).find(|&i| got[i] != expected[i]) {
                    panic!(
                        "{name} {kind} seed {seed}: input {:?} gave {} instead of {}\n{}",
                        inputs[i],
                        got[i],
                        expected[i],
                        pretty_print(&out)
                    );
                }
            }
        }
    }
}

#[test]
fn cff_and_op_never_shrink_programs() {
    for (name, _, unit) in corpus() {
        let before = count_loc(&pretty_print(&unit)).code_lines;
        for kind in [TransformKind::CFF, TransformKind::OP] {
            let out = apply(kind, &unit, &TransformConfig::default()).unwrap().output;
            let after = count_loc(&pretty_print(&out)).code_lines;
            assert!(after >= before, "{name} {kind}: {after} < {before}");
        }
    }
}

#[test]
fn outputs_are_deterministic_and_seed_sensitive_only_where_random() {
    let (_, _, unit) = corpus().into_iter().find(|(n, ..)| n == "tax_bracket.c").unwrap();
    for kind in TransformKind::ALL {
        let cfg = TransformConfig {
            seed: 42,
            ..TransformConfig::default()
        };
        let a = pretty_print(&apply(kind, &unit, &cfg).unwrap().output);
        let b = pretty_print(&apply(kind, &unit, &cfg).unwrap().output);
        assert_eq!(a, b, "{kind}");
    }
}

#[test]
fn ill_typed_input_is_rejected() {
    let unit = parse("bad.c", "int f(int x) { return y; }").unwrap();
    for kind in TransformKind::ALL {
        assert!(apply(kind, &unit, &TransformConfig::default()).is_err());
    }
}

#[test]
fn four_variants_per_program() {
    let unit = load("listings", "f_before.c");
    let variants: Vec<String> = TransformKind::ALL
        .iter()
        .map(|&k| pretty_print(&apply(k, &unit, &TransformConfig::default()).unwrap().output))
        .collect();
    assert_eq!(variants.len(), 4);
}
