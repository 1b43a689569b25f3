//! JSONL files hold only `{"messages": [...]}` per line, formatted with
//! `", "` and `": "` separators. Record metadata goes to a sidecar file
//! with the same stem and line order.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use super::{Condition, DatasetError, Message, TrainingRecord};
use crate::transforms::TransformKind;

pub const JSONL_META_SUFFIX: &str = ".meta.jsonl";

#[derive(Serialize, Deserialize)]
struct Line {
    messages: Vec<Message>,
}

#[derive(Serialize, Deserialize)]
struct Meta {
    program_id: String,
    kind: TransformKind,
    condition: Condition,
}

/// Compact JSON with a space after `,` and `:`.
struct Spaced;

impl Formatter for Spaced {
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        if first {
            Ok(())
        } else {
            w.write_all(b", ")
        }
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        if first {
            Ok(())
        } else {
            w.write_all(b", ")
        }
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        w.write_all(b": ")
    }
}

fn to_line<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Spaced);
    value.serialize(&mut ser).expect("in-memory serialization");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

fn meta_path(path: &Path) -> PathBuf {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let stem = name.strip_suffix(".jsonl").unwrap_or(&name);
    path.with_file_name(format!("{stem}{JSONL_META_SUFFIX}"))
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes the records and their metadata sidecar; returns the record count.
pub fn write_jsonl(records: &[TrainingRecord], path: &Path) -> Result<usize, DatasetError> {
    let mut body = String::new();
    let mut meta = String::new();
    for r in records {
        body.push_str(&to_line(&Line {
            messages: r.messages.clone(),
        }));
        body.push('\n');
        meta.push_str(&to_line(&Meta {
            program_id: r.program_id.clone(),
            kind: r.kind,
            condition: r.condition,
        }));
        meta.push('\n');
    }
    fs::write(path, body).map_err(io_error(path))?;
    let sidecar = meta_path(path);
    fs::write(&sidecar, meta).map_err(io_error(&sidecar))?;
    Ok(records.len())
}

pub fn read_jsonl(path: &Path) -> Result<Vec<TrainingRecord>, DatasetError> {
    let body = fs::read_to_string(path).map_err(io_error(path))?;
    let sidecar = meta_path(path);
    let meta = fs::read_to_string(&sidecar).map_err(io_error(&sidecar))?;
    let format = |p: &Path, line: usize, message: String| DatasetError::Format {
        path: p.display().to_string(),
        line,
        message,
    };
    let lines: Vec<&str> = body.lines().collect();
    let metas: Vec<&str> = meta.lines().collect();
    if lines.len() != metas.len() {
        return Err(format(
            &sidecar,
            metas.len().min(lines.len()) + 1,
            format!("{} records but {} metadata lines", lines.len(), metas.len()),
        ));
    }
    let mut out = Vec::with_capacity(lines.len());
    for (i, (l, m)) in lines.iter().zip(&metas).enumerate() {
        let line: Line = serde_json::from_str(l).map_err(|e| format(path, i + 1, e.to_string()))?;
        let meta: Meta = serde_json::from_str(m).map_err(|e| format(&sidecar, i + 1, e.to_string()))?;
        out.push(TrainingRecord {
            messages: line.messages,
            condition: meta.condition,
            kind: meta.kind,
            program_id: meta.program_id,
        });
    }
    Ok(out)
}
