use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::frontend::{Outcome, Program, SourceUnit, DEFAULT_FUEL};

/// Inputs tried by [`check_equivalence`].
///
/// Each argument ranges over `domain` (evenly thinned when the full product
/// would exceed `max_vectors`), optionally followed by edge probes
/// ±2^11..±2^30, `i32::MAX` and `i32::MIN` in that order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceGrid {
    pub domain: (i32, i32),
    pub max_vectors: usize,
    pub edges: bool,
}

impl Default for EquivalenceGrid {
    fn default() -> Self {
        EquivalenceGrid {
            domain: (-1024, 1023),
            max_vectors: 1 << 16,
            edges: true,
        }
    }
}

fn edge_values(domain: (i32, i32)) -> Vec<i32> {
    let mut out = Vec::new();
    for k in 11..=30 {
        out.push(1i32 << k);
        out.push(-(1i32 << k));
    }
    out.push(i32::MAX);
    out.push(i32::MIN);
    out.retain(|v| *v < domain.0 || *v > domain.1);
    out
}

impl EquivalenceGrid {
    /// Values each argument takes, in probing order.
    pub fn axis(&self, arity: usize) -> Vec<i32> {
        if arity == 0 {
            return Vec::new();
        }
        let edges = if self.edges { edge_values(self.domain) } else { Vec::new() };
        let width = (i64::from(self.domain.1) - i64::from(self.domain.0) + 1).max(0) as usize;
        let fits = |k: usize| {
            (k + edges.len())
                .checked_pow(arity as u32)
                .is_some_and(|n| n <= self.max_vectors.max(1))
        };
        let mut k = width;
        if !fits(k) {
            let (mut lo, mut hi) = (0, width);
            while lo < hi {
                let mid = (lo + hi).div_ceil(2);
                if fits(mid) {
                    lo = mid;
                } else {
                    hi = mid - 1;
                }
            }
            k = lo;
        }
        let k = k.max(1);
        let mut axis: Vec<i32> = if k >= width {
            (self.domain.0..=self.domain.1).collect()
        } else if k == 1 {
            vec![self.domain.0]
        } else {
            let span = width as i64 - 1;
            (0..k as i64)
                .map(|i| (i64::from(self.domain.0) + i * span / (k as i64 - 1)) as i32)
                .collect()
        };
        if fits(axis.len()) {
            axis.extend(edges);
        }
        axis
    }

    pub fn vectors(&self, arity: usize) -> Vec<Vec<i32>> {
        let axis = self.axis(arity);
        let mut out = vec![Vec::new()];
        for _ in 0..arity {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    axis.iter().map(move |&v| {
                        let mut w = prefix.clone();
                        w.push(v);
                        w
                    })
                })
                .collect();
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equivalence {
    Equivalent { checked: usize },
    Counterexample {
        input: Vec<i32>,
        original: Outcome,
        candidate: Outcome,
    },
}

/// Runs both programs on every grid vector in order and reports the first
/// differing outcome. Traps are outcomes too.
pub fn check_equivalence(
    original: &SourceUnit,
    candidate: &SourceUnit,
    entry: &str,
    grid: &EquivalenceGrid,
) -> Result<Equivalence, MetricsError> {
    let incomparable = |e: crate::frontend::EvalError| MetricsError::Incomparable(e.to_string());
    let arity = original
        .function(entry)
        .ok_or_else(|| MetricsError::Incomparable(format!("original has no function `{entry}`")))?
        .params
        .len();
    let a = Program::compile(original).map_err(incomparable)?;
    let b = Program::compile(candidate).map_err(incomparable)?;
    let ea = a.entry(entry, arity).map_err(incomparable)?;
    let eb = b.entry(entry, arity).map_err(incomparable)?;
    let vectors = grid.vectors(arity);
    for input in &vectors {
        let x = a.run(ea, input, DEFAULT_FUEL, None);
        let y = b.run(eb, input, DEFAULT_FUEL, None);
        if x != y {
            return Ok(Equivalence::Counterexample {
                input: input.clone(),
                original: x,
                candidate: y,
            });
        }
    }
    Ok(Equivalence::Equivalent {
        checked: vectors.len(),
    })
}
