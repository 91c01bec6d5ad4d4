use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use expsum_core::code_model::FunctionRecord;
use expsum_core::summarizer::{FunctionCategory, SummaryResult};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// One benchmark item: a function plus its optional human-written summary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub id: String,
    pub function: FunctionRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_summary: Option<String>,
}

fn json_lines(path: &Path) -> Result<Vec<(usize, Value)>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if text.trim_start().starts_with('[') {
        let items: Vec<Value> = serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", path.display()))?;
        return Ok(items.into_iter().enumerate().map(|(i, v)| (i + 1, v)).collect());
    }
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(line)
            .with_context(|| format!("{}:{}: invalid JSON", path.display(), i + 1))?;
        out.push((i + 1, v));
    }
    Ok(out)
}

/// Read a JSON-lines (or JSON array) corpus; ids must be unique.
pub fn read_corpus(path: &Path) -> Result<Vec<CorpusRecord>> {
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for (line, v) in json_lines(path)? {
        let rec: CorpusRecord = serde_json::from_value(v)
            .with_context(|| format!("{}:{line}: not a corpus record", path.display()))?;
        if !seen.insert(rec.id.clone()) {
            bail!("{}:{line}: duplicate id `{}`", path.display(), rec.id);
        }
        records.push(rec);
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryLine {
    pub id: String,
    pub final_summary: String,
    pub category: FunctionCategory,
    pub retrieved_terms: Vec<String>,
    pub iterations: u32,
    pub degraded: bool,
}

impl SummaryLine {
    pub fn new(id: &str, r: SummaryResult) -> Self {
        SummaryLine {
            id: id.to_string(),
            final_summary: r.final_summary,
            category: r.category,
            retrieved_terms: r.retrieved_terms,
            iterations: r.iterations,
            degraded: r.degraded,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorLine {
    pub id: String,
    pub error: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OutputLine {
    Summary(SummaryLine),
    Error(ErrorLine),
}

impl OutputLine {
    pub fn id(&self) -> &str {
        match self {
            OutputLine::Summary(s) => &s.id,
            OutputLine::Error(e) => &e.id,
        }
    }

    pub fn is_error(&self) -> bool {
        matches!(self, OutputLine::Error(_))
    }
}

pub fn write_lines<W: Write>(mut w: W, lines: &[OutputLine]) -> Result<()> {
    for l in lines {
        serde_json::to_writer(&mut w, l)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn text_field(v: &Value, keys: &[&str]) -> Option<String> {
    keys.iter().find_map(|k| v.get(k)?.as_str().map(str::to_string))
}

/// `(id, text)` pairs from a JSON-lines file, taking the first of `keys`
/// present on each line. Lines without any of them are skipped with a warning.
pub fn read_texts(path: &Path, keys: &[&str]) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (line, v) in json_lines(path)? {
        let Some(id) = v.get("id").and_then(|i| match i {
            Value::String(s) => Some(s.clone()),
            Value::Number(n) => Some(n.to_string()),
            _ => None,
        }) else {
            bail!("{}:{line}: missing id", path.display());
        };
        match text_field(&v, keys) {
            Some(t) => out.push((id, t)),
            None => log::warn!("{}:{line}: `{id}` has none of {keys:?}, skipped", path.display()),
        }
    }
    Ok(out)
}
