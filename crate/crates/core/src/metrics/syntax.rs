use std::io::Write;
use std::process::Command;

use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::frontend::{has_errors, parse, typecheck};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SyntaxMode {
    Internal,
    /// Command line run on a scratch copy of the candidate. `{file}` is
    /// replaced by its path; without a placeholder the path is appended.
    External(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyntaxMethod {
    InternalFrontend,
    ExternalCommand,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntaxScore {
    pub value: f64,
    pub method: SyntaxMethod,
    pub detail: String,
}

impl SyntaxScore {
    pub fn passed(&self) -> bool {
        self.value == 100.0
    }
}

pub fn score_syntax(candidate: &str, mode: &SyntaxMode) -> Result<SyntaxScore, MetricsError> {
    match mode {
        SyntaxMode::Internal => Ok(internal(candidate)),
        SyntaxMode::External(template) => external(candidate, template),
    }
}

fn internal(candidate: &str) -> SyntaxScore {
    let score = |ok: bool, detail: String| SyntaxScore {
        value: if ok { 100.0 } else { 0.0 },
        method: SyntaxMethod::InternalFrontend,
        detail,
    };
    let unit = match parse("candidate.c", candidate) {
        Ok(u) => u,
        Err(diags) => {
            let text: Vec<String> = diags.iter().map(ToString::to_string).collect();
            return score(false, text.join("\n"));
        }
    };
    if unit.functions.is_empty() {
        return score(false, "no functions".to_string());
    }
    let diags = typecheck(&unit);
    let text: Vec<String> = diags.iter().map(ToString::to_string).collect();
    score(!has_errors(&diags), text.join("\n"))
}

fn external(candidate: &str, template: &str) -> Result<SyntaxScore, MetricsError> {
    let mut file = tempfile::Builder::new()
        .suffix(".c")
        .tempfile()
        .map_err(MetricsError::Scratch)?;
    file.write_all(candidate.as_bytes()).map_err(MetricsError::Scratch)?;
    file.flush().map_err(MetricsError::Scratch)?;
    let path = file.path().display().to_string();
    let mut words: Vec<String> = template.split_whitespace().map(str::to_string).collect();
    if words.is_empty() {
        return Err(MetricsError::EmptyCommand);
    }
    if words.iter().any(|w| w.contains("{file}")) {
        for w in &mut words {
            *w = w.replace("{file}", &path);
        }
    } else {
        words.push(path);
    }
    let output = Command::new(&words[0])
        .args(&words[1..])
        .output()
        .map_err(|source| MetricsError::CommandUnavailable {
            command: words[0].clone(),
            source,
        })?;
    let mut detail = String::from_utf8_lossy(&output.stdout).into_owned();
    detail.push_str(&String::from_utf8_lossy(&output.stderr));
    Ok(SyntaxScore {
        value: if output.status.success() { 100.0 } else { 0.0 },
        method: SyntaxMethod::ExternalCommand,
        detail,
    })
}
