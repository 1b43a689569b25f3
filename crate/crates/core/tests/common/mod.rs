#![allow(dead_code)]

use std::path::{Path, PathBuf};

use deobbench_core::frontend::{parse_checked, SourceUnit};

pub fn fixture_dir(sub: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(sub)
}

pub fn load(sub: &str, name: &str) -> SourceUnit {
    let path = fixture_dir(sub).join(name);
    let text = std::fs::read_to_string(&path).unwrap();
    parse_checked(name, &text).unwrap_or_else(|d| panic!("{}: {:?}", path.display(), d))
}

/// Every corpus program as (file name, source text, unit), sorted by name.
pub fn corpus() -> Vec<(String, String, SourceUnit)> {
    let mut entries: Vec<_> = std::fs::read_dir(fixture_dir("corpus"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "c"))
        .collect();
    entries.sort();
    entries
        .into_iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            let text = std::fs::read_to_string(&p).unwrap();
            let unit = parse_checked(&name, &text).unwrap_or_else(|d| panic!("{name}: {d:?}"));
            (name, text, unit)
        })
        .collect()
}

/// Reference enumeration of the input grid: every vector when the full
/// product fits in `cap`, otherwise a fixed stride lattice plus corners.
pub fn grid(arity: usize, lo: i32, hi: i32, cap: usize) -> Vec<Vec<i32>> {
    let width = (hi as i64 - lo as i64 + 1) as usize;
    let per_dim = if arity == 0 {
        1
    } else {
        let mut k = width;
        while k.pow(arity as u32) > cap {
            k -= 1;
        }
        k
    };
    let axis: Vec<i32> = if per_dim >= width {
        (lo..=hi).collect()
    } else {
        (0..per_dim)
            .map(|i| lo + ((i as i64 * (width as i64 - 1)) / (per_dim as i64 - 1).max(1)) as i32)
            .collect()
    };
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|v| {
                axis.iter().map(move |&x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

pub mod strategies {
    use deobbench_core::frontend::{BinaryOp, UnaryOp};
    use deobbench_core::symexec::SymExpr;
    use proptest::prelude::*;

    pub const BINARY_OPS: [BinaryOp; 18] = [
        BinaryOp::Add,
        BinaryOp::Sub,
        BinaryOp::Mul,
        BinaryOp::Div,
        BinaryOp::Rem,
        BinaryOp::Shl,
        BinaryOp::Shr,
        BinaryOp::BitAnd,
        BinaryOp::BitOr,
        BinaryOp::BitXor,
        BinaryOp::LogAnd,
        BinaryOp::LogOr,
        BinaryOp::Eq,
        BinaryOp::Ne,
        BinaryOp::Lt,
        BinaryOp::Gt,
        BinaryOp::Le,
        BinaryOp::Ge,
    ];

    pub const UNARY_OPS: [UnaryOp; 3] = [UnaryOp::Neg, UnaryOp::LogNot, UnaryOp::BitNot];

    /// Terms over `vars` variables, biased toward small constants so that
    /// identities and cancellations actually occur.
    pub fn sym_expr(vars: usize) -> impl Strategy<Value = SymExpr> {
        let leaf = prop_oneof![
            (-4i32..=4).prop_map(SymExpr::Const),
            any::<i32>().prop_map(SymExpr::Const),
            (0..vars).prop_map(SymExpr::Var),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            prop_oneof![
                (0..UNARY_OPS.len(), inner.clone()).prop_map(|(i, a)| SymExpr::unary(UNARY_OPS[i], a)),
                (0..BINARY_OPS.len(), inner.clone(), inner.clone())
                    .prop_map(|(i, a, b)| SymExpr::binary(BINARY_OPS[i], a, b)),
                // E op E shapes
                (0..BINARY_OPS.len(), inner).prop_map(|(i, a)| SymExpr::binary(BINARY_OPS[i], a.clone(), a)),
            ]
        })
    }
}
