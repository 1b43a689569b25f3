//! Per-file score records and their aggregation into
//! transformation × model-condition rows.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::metrics::{round2, QualityScore, SemanticScore, SyntaxScore};
use crate::transforms::TransformKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub program_id: String,
    pub kind: TransformKind,
    pub model_condition: String,
    pub syntax: SyntaxScore,
    pub semantic: SemanticScore,
    pub quality: QualityScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub transformation: TransformKind,
    pub model_condition: String,
    pub total_files: usize,
    pub successful: usize,
    pub success_rate: f64,
    pub semantic_mean: f64,
    pub semantic_std: f64,
    pub quality_mean: f64,
    pub quality_std: f64,
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// One row per (transformation, model condition) that has files, ordered by
/// transformation then condition. Means include files that failed to compile.
pub fn aggregate(records: &[ScoreRecord]) -> Vec<AggregateRow> {
    let mut cells: BTreeMap<(TransformKind, &str), Vec<&ScoreRecord>> = BTreeMap::new();
    for r in records {
        cells.entry((r.kind, &r.model_condition)).or_default().push(r);
    }
    cells
        .into_iter()
        .map(|((kind, condition), rs)| {
            let successful = rs.iter().filter(|r| r.syntax.passed()).count();
            let semantic: Vec<f64> = rs.iter().map(|r| r.semantic.value).collect();
            let quality: Vec<f64> = rs.iter().map(|r| r.quality.value).collect();
            let (semantic_mean, semantic_std) = mean_std(&semantic);
            let (quality_mean, quality_std) = mean_std(&quality);
            AggregateRow {
                transformation: kind,
                model_condition: condition.to_string(),
                total_files: rs.len(),
                successful,
                success_rate: (1000.0 * successful as f64 / rs.len() as f64).round() / 10.0,
                semantic_mean: round2(semantic_mean),
                semantic_std: round2(semantic_std),
                quality_mean: round2(quality_mean),
                quality_std: round2(quality_std),
            }
        })
        .collect()
}

pub const CSV_HEADER: [&str; 9] = [
    "transformation",
    "model_condition",
    "total_files",
    "successful",
    "success_rate",
    "semantic_mean",
    "semantic_std",
    "quality_mean",
    "quality_std",
];

fn fields(row: &AggregateRow) -> [String; 9] {
    [
        row.transformation.display_name().to_string(),
        row.model_condition.clone(),
        row.total_files.to_string(),
        row.successful.to_string(),
        format!("{:.1}", row.success_rate),
        format!("{:.2}", row.semantic_mean),
        format!("{:.2}", row.semantic_std),
        format!("{:.2}", row.quality_mean),
        format!("{:.2}", row.quality_std),
    ]
}

pub fn to_csv(rows: &[AggregateRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for row in rows {
        w.write_record(fields(row)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV of UTF-8 fields")
}

/// Fixed-width table for terminals.
pub fn to_table(rows: &[AggregateRow]) -> String {
    let header = [
        "Transformation",
        "Model",
        "Total Files",
        "Successful",
        "Success Rate",
        "Semantic Mean",
        "Semantic Std",
        "Quality Mean",
        "Quality Std",
    ];
    let body: Vec<[String; 9]> = rows.iter().map(fields).collect();
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in &body {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| if i < 2 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&line(rule.iter().map(String::as_str).collect()));
    for r in &body {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    out
}
