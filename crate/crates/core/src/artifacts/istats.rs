use super::FormatError;
use crate::symexec::ExecStats;

const KEYS: [&str; 5] = [
    "paths_explored",
    "tests_generated",
    "solver_calls",
    "timeouts",
    "max_depth_reached",
];

fn fields(s: &ExecStats) -> [u64; 5] {
    [
        s.paths_explored,
        s.tests_generated,
        s.solver_calls,
        s.timeouts,
        s.max_depth_reached,
    ]
}

pub fn emit_istats(stats: &ExecStats) -> String {
    KEYS.iter()
        .zip(fields(stats))
        .map(|(k, v)| format!("{k}={v}\n"))
        .collect()
}

pub fn parse_istats(text: &str) -> Result<ExecStats, FormatError> {
    let mut values = [0u64; 5];
    let mut lines = text.lines().enumerate();
    for (slot, key) in values.iter_mut().zip(KEYS) {
        let (n, line) = lines
            .next()
            .ok_or_else(|| FormatError::new(KEYS.len(), format!("missing `{key}`")))?;
        let value = line
            .strip_prefix(key)
            .and_then(|rest| rest.strip_prefix('='))
            .ok_or_else(|| FormatError::new(n + 1, format!("expected `{key}=<count>`")))?;
        *slot = value
            .parse()
            .map_err(|_| FormatError::new(n + 1, format!("bad count `{value}`")))?;
    }
    if let Some((n, _)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(FormatError::new(n + 1, "unexpected trailing line"));
    }
    let [paths_explored, tests_generated, solver_calls, timeouts, max_depth_reached] = values;
    Ok(ExecStats {
        paths_explored,
        tests_generated,
        solver_calls,
        timeouts,
        max_depth_reached,
    })
}
