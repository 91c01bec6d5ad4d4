//! Phase II: drop empty and uninformative metadata before prompting.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code_model::{MetadataSet, ParameterField};

const SEED: &str = include_str!("../data/uninformative.txt");

#[derive(Debug, Error)]
pub enum DictionaryError {
    #[error("cannot read dictionary {path}")]
    IoFailure {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("dictionary has no entries")]
    EmptyDictionary,
}

/// Lowercased keywords and phrases whose presence as a whole field value
/// makes the field uninformative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UninformativeDictionary {
    entries: BTreeSet<String>,
    version: String,
}

fn normalize(s: &str) -> String {
    s.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

impl UninformativeDictionary {
    /// Parse the line-delimited format. A `# version: X` comment sets the version.
    pub fn parse(text: &str) -> Result<Self, DictionaryError> {
        let mut version = String::from("unversioned");
        let mut entries = BTreeSet::new();
        for line in text.lines() {
            let line = line.trim();
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(v) = comment.trim().strip_prefix("version:") {
                    version = v.trim().to_string();
                }
                continue;
            }
            let entry = normalize(line);
            if !entry.is_empty() {
                entries.insert(entry);
            }
        }
        if entries.is_empty() {
            return Err(DictionaryError::EmptyDictionary);
        }
        Ok(UninformativeDictionary { entries, version })
    }

    pub fn from_entries<I, S>(entries: I) -> Result<Self, DictionaryError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let entries: BTreeSet<String> = entries
            .into_iter()
            .map(|e| normalize(e.as_ref()))
            .filter(|e| !e.is_empty())
            .collect();
        if entries.is_empty() {
            return Err(DictionaryError::EmptyDictionary);
        }
        Ok(UninformativeDictionary {
            entries,
            version: "unversioned".into(),
        })
    }

    /// The dictionary shipped with the crate.
    pub fn seed() -> Self {
        Self::parse(SEED).expect("seed dictionary is non-empty")
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(String::as_str)
    }

    /// Whole-value phrase match, case-insensitive.
    pub fn matches(&self, value: &str) -> bool {
        self.entries.contains(&normalize(value))
    }

    pub fn insert(&mut self, entry: &str) {
        let e = normalize(entry);
        if !e.is_empty() {
            self.entries.insert(e);
        }
    }
}

pub fn load_dictionary(path: impl AsRef<Path>) -> Result<UninformativeDictionary, DictionaryError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| DictionaryError::IoFailure {
        path: path.display().to_string(),
        source,
    })?;
    UninformativeDictionary::parse(&text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemovalReason {
    Empty,
    Uninformative,
}

impl fmt::Display for RemovalReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RemovalReason::Empty => "empty",
            RemovalReason::Uninformative => "uninformative",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovedField {
    /// Field name; list items are `parameters[i]` / `dependency[i]`, DMT keys are the key itself.
    pub field: String,
    pub reason: RemovalReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub removed_fields: Vec<RemovedField>,
    pub retained: MetadataSet,
}

struct Checker<'d> {
    dict: &'d UninformativeDictionary,
    removed: Vec<RemovedField>,
}

impl Checker<'_> {
    fn classify(&self, value: &str) -> Option<RemovalReason> {
        if value.trim().is_empty() {
            Some(RemovalReason::Empty)
        } else if self.dict.matches(value) {
            Some(RemovalReason::Uninformative)
        } else {
            None
        }
    }

    fn remove(&mut self, field: impl Into<String>, reason: RemovalReason) {
        self.removed.push(RemovedField {
            field: field.into(),
            reason,
        });
    }

    fn scalar(&mut self, name: &str, value: &mut Option<String>) {
        if let Some(reason) = value.as_deref().and_then(|v| self.classify(v)) {
            self.remove(name, reason);
            *value = None;
        }
    }

    fn parameter(&self, p: &ParameterField) -> Option<RemovalReason> {
        let ty = p.type_annotation.as_deref().unwrap_or("");
        if p.name.trim().is_empty() && ty.trim().is_empty() {
            return Some(RemovalReason::Empty);
        }
        let name_uninformative = self.classify(&p.name).is_some();
        let type_uninformative = self.classify(ty).is_some();
        (name_uninformative && type_uninformative).then_some(RemovalReason::Uninformative)
    }

    fn parameters(&mut self, params: &mut Option<Vec<ParameterField>>) {
        let Some(list) = params.take() else {
            return;
        };
        if list.is_empty() {
            self.remove("parameters", RemovalReason::Empty);
            return;
        }
        let mut kept = Vec::with_capacity(list.len());
        for (i, p) in list.into_iter().enumerate() {
            match self.parameter(&p) {
                Some(reason) => self.remove(format!("parameters[{i}]"), reason),
                None => kept.push(p),
            }
        }
        *params = (!kept.is_empty()).then_some(kept);
    }

    fn dependencies(&mut self, deps: &mut Option<Vec<String>>) {
        let Some(list) = deps.take() else {
            return;
        };
        if list.is_empty() {
            self.remove("dependency", RemovalReason::Empty);
            return;
        }
        let mut kept = Vec::with_capacity(list.len());
        for (i, d) in list.into_iter().enumerate() {
            match self.classify(&d) {
                Some(reason) => self.remove(format!("dependency[{i}]"), reason),
                None => kept.push(d),
            }
        }
        *deps = (!kept.is_empty()).then_some(kept);
    }
}

/// Remove empty and dictionary-matched fields. `function_name` and
/// `file_path` are always kept; fields already absent are not reported.
pub fn check_metadata(m: &MetadataSet, dict: &UninformativeDictionary) -> CheckReport {
    let mut retained = m.clone();
    let mut c = Checker {
        dict,
        removed: Vec::new(),
    };
    c.parameters(&mut retained.parameters);
    c.scalar("return_type", &mut retained.return_type);
    c.scalar("package_module", &mut retained.package_module);
    c.dependencies(&mut retained.dependency);
    c.scalar("control_flow_skeleton", &mut retained.control_flow_skeleton);
    c.scalar("io_behavior", &mut retained.io_behavior);
    c.scalar("variable_modification", &mut retained.variable_modification);

    let dmt = std::mem::take(&mut retained.dmt);
    for (key, value) in dmt {
        match c.classify(&value) {
            Some(reason) => c.remove(key, reason),
            None => {
                retained.dmt.insert(key, value);
            }
        }
    }
    CheckReport {
        removed_fields: c.removed,
        retained,
    }
}
