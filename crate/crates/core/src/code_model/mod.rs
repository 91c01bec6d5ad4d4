//! Phase I: turn a function into a structured metadata set.
//!
//! A [`MetadataSet`] keeps the common metadata (signature, context and
//! behavior dimensions) plus an open map of project-specific annotations.
//! Fields are `Option`s so that a field removed by the informativeness
//! check (`None`) stays distinguishable from one that was extracted but
//! found empty (`Some("")` / `Some(vec![])`).

mod typescript;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use typescript::TypeScriptFrontend;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("parse failure in {file_path}: {reason}")]
    ParseFailure { file_path: String, reason: String },
    #[error("no frontend for language `{0}` and no pre-extracted metadata")]
    UnsupportedLanguage(Language),
    #[error("invalid function record: {0}")]
    InvalidRecord(String),
    #[error("malformed metadata JSON")]
    Json(#[from] serde_json::Error),
}

impl ModelError {
    /// Short variant name used in batch output.
    pub fn kind(&self) -> &'static str {
        match self {
            ModelError::ParseFailure { .. } => "ParseFailure",
            ModelError::UnsupportedLanguage(_) => "UnsupportedLanguage",
            ModelError::InvalidRecord(_) => "InvalidRecord",
            ModelError::Json(_) => "MalformedMetadata",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Language {
    Arkts,
    Typescript,
    Java,
    Python,
    CCpp,
    #[default]
    Unknown,
}

impl Language {
    pub fn from_path(path: impl AsRef<Path>) -> Self {
        let ext = path
            .as_ref()
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("ets") => Language::Arkts,
            Some("ts" | "tsx" | "mts" | "cts" | "js" | "jsx" | "mjs") => Language::Typescript,
            Some("java") => Language::Java,
            Some("py") => Language::Python,
            Some("c" | "cc" | "cpp" | "cxx" | "h" | "hh" | "hpp") => Language::CCpp,
            _ => Language::Unknown,
        }
    }
}

impl std::fmt::Display for Language {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Language::Arkts => "arkts",
            Language::Typescript => "typescript",
            Language::Java => "java",
            Language::Python => "python",
            Language::CCpp => "c_cpp",
            Language::Unknown => "unknown",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Language {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "arkts" | "ets" => Ok(Language::Arkts),
            "typescript" | "ts" => Ok(Language::Typescript),
            "java" => Ok(Language::Java),
            "python" | "py" => Ok(Language::Python),
            "c_cpp" | "c" | "cpp" | "c++" => Ok(Language::CCpp),
            "unknown" => Ok(Language::Unknown),
            other => Err(format!("unknown language `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParameterField {
    pub name: String,
    #[serde(default)]
    pub type_annotation: Option<String>,
    #[serde(default)]
    pub default_value: Option<String>,
}

impl ParameterField {
    pub fn new(name: impl Into<String>) -> Self {
        ParameterField {
            name: name.into(),
            type_annotation: None,
            default_value: None,
        }
    }

    pub fn typed(name: impl Into<String>, ty: impl Into<String>) -> Self {
        ParameterField {
            type_annotation: Some(ty.into()),
            ..ParameterField::new(name)
        }
    }

    pub fn with_default(mut self, value: impl Into<String>) -> Self {
        self.default_value = Some(value.into());
        self
    }

    /// Compact `name: type = default` rendering used in query text.
    pub fn render(&self) -> String {
        let mut out = self.name.clone();
        if let Some(ty) = self.type_annotation.as_deref().filter(|t| !t.is_empty()) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(ty);
        }
        if let Some(v) = self.default_value.as_deref().filter(|v| !v.is_empty()) {
            out.push_str(" = ");
            out.push_str(v);
        }
        out
    }
}

/// Metadata of one function. Field order follows the signature, context,
/// behavior, domain grouping and is the serialization order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetadataSet {
    pub function_name: String,
    #[serde(default)]
    pub parameters: Option<Vec<ParameterField>>,
    #[serde(default)]
    pub return_type: Option<String>,
    pub file_path: String,
    #[serde(default)]
    pub package_module: Option<String>,
    #[serde(default)]
    pub dependency: Option<Vec<String>>,
    #[serde(default)]
    pub control_flow_skeleton: Option<String>,
    #[serde(default)]
    pub io_behavior: Option<String>,
    #[serde(default)]
    pub variable_modification: Option<String>,
    #[serde(default)]
    pub dmt: BTreeMap<String, String>,
}

impl MetadataSet {
    pub fn new(function_name: impl Into<String>, file_path: impl Into<String>) -> Self {
        MetadataSet {
            function_name: function_name.into(),
            parameters: None,
            return_type: None,
            file_path: file_path.into(),
            package_module: None,
            dependency: None,
            control_flow_skeleton: None,
            io_behavior: None,
            variable_modification: None,
            dmt: BTreeMap::new(),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.function_name.trim().is_empty() {
            return Err(ModelError::InvalidRecord("function_name is empty".into()));
        }
        if self.file_path.trim().is_empty() {
            return Err(ModelError::InvalidRecord("file_path is empty".into()));
        }
        for p in self.parameters.iter().flatten() {
            if p.name.is_empty() && p.type_annotation.as_deref().unwrap_or("").is_empty() {
                return Err(ModelError::InvalidRecord(
                    "parameter without name must carry a type annotation".into(),
                ));
            }
        }
        Ok(())
    }

    /// Drop every DMT key the config does not enable.
    pub fn retain_dmt(&mut self, config: &DmtConfig) {
        self.dmt.retain(|k, _| config.enables(k));
    }

    /// Present values in field order, lists flattened; used to build retrieval queries.
    pub fn values(&self) -> Vec<String> {
        let mut out = vec![self.function_name.clone()];
        let mut push = |s: &str| {
            let s = s.trim();
            if !s.is_empty() {
                out.push(s.to_string());
            }
        };
        for p in self.parameters.iter().flatten() {
            push(&p.render());
        }
        push(self.return_type.as_deref().unwrap_or(""));
        push(&self.file_path);
        push(self.package_module.as_deref().unwrap_or(""));
        for d in self.dependency.iter().flatten() {
            push(d);
        }
        push(self.control_flow_skeleton.as_deref().unwrap_or(""));
        push(self.io_behavior.as_deref().unwrap_or(""));
        push(self.variable_modification.as_deref().unwrap_or(""));
        for v in self.dmt.values() {
            push(v);
        }
        out
    }
}

/// Canonical pretty JSON. DMT keys come out sorted because the map is ordered.
pub fn serialize_metadata(m: &MetadataSet) -> String {
    serde_json::to_string_pretty(m).expect("metadata is always serializable")
}

pub fn deserialize_metadata(s: &str) -> Result<MetadataSet, ModelError> {
    Ok(serde_json::from_str(s)?)
}

/// Which domain-metadata annotation keys to harvest for a project.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DmtConfig {
    keys: BTreeSet<String>,
}

impl DmtConfig {
    pub const HARMONY_KEYS: [&'static str; 6] = [
        "@deprecated",
        "@atomicservice",
        "@since",
        "@syscap",
        "@officialdoc",
        "@usage",
    ];

    pub fn new<I, S>(keys: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let keys = keys
            .into_iter()
            .map(|k| {
                let k = k.as_ref().trim();
                if k.starts_with('@') {
                    k.to_string()
                } else {
                    format!("@{k}")
                }
            })
            .collect();
        DmtConfig { keys }
    }

    pub fn none() -> Self {
        DmtConfig {
            keys: BTreeSet::new(),
        }
    }

    pub fn enables(&self, key: &str) -> bool {
        self.keys.contains(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.keys.iter().map(String::as_str)
    }
}

impl Default for DmtConfig {
    fn default() -> Self {
        DmtConfig::new(Self::HARMONY_KEYS)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionRecord {
    #[serde(default)]
    pub source_text: Option<String>,
    #[serde(default)]
    pub language: Language,
    pub file_path: String,
    #[serde(default)]
    pub pre_extracted: Option<MetadataSet>,
}

impl FunctionRecord {
    pub fn from_source(source: impl Into<String>, file_path: impl Into<String>) -> Self {
        let file_path = file_path.into();
        FunctionRecord {
            source_text: Some(source.into()),
            language: Language::from_path(&file_path),
            file_path,
            pre_extracted: None,
        }
    }

    pub fn from_metadata(meta: MetadataSet) -> Self {
        FunctionRecord {
            source_text: None,
            language: Language::Unknown,
            file_path: meta.file_path.clone(),
            pre_extracted: Some(meta),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.source_text.is_none() && self.pre_extracted.is_none() {
            return Err(ModelError::InvalidRecord(
                "record needs source_text or pre_extracted".into(),
            ));
        }
        if self.file_path.trim().is_empty() {
            return Err(ModelError::InvalidRecord("file_path is empty".into()));
        }
        Ok(())
    }

    /// Declared language, or the one implied by the file extension.
    pub fn effective_language(&self) -> Language {
        match self.language {
            Language::Unknown => Language::from_path(&self.file_path),
            l => l,
        }
    }
}

/// A parser frontend for one or more source languages.
pub trait Frontend: Send + Sync {
    fn name(&self) -> &str;

    fn supports(&self, language: Language) -> bool;

    /// Model the first function found in `source`. DMT keys are returned unfiltered.
    fn model(&self, source: &str, file_path: &str) -> Result<MetadataSet, ModelError>;

    fn control_flow_skeleton(&self, source: &str) -> Result<String, ModelError>;
}

/// Frontend registry plus the pre-extracted ingestion path.
pub struct CodeModeler {
    frontends: Vec<Box<dyn Frontend>>,
}

impl Default for CodeModeler {
    fn default() -> Self {
        CodeModeler {
            frontends: vec![Box::new(TypeScriptFrontend)],
        }
    }
}

impl CodeModeler {
    pub fn empty() -> Self {
        CodeModeler {
            frontends: Vec::new(),
        }
    }

    pub fn with_frontend(mut self, frontend: Box<dyn Frontend>) -> Self {
        self.frontends.push(frontend);
        self
    }

    pub fn frontend_for(&self, language: Language) -> Option<&dyn Frontend> {
        self.frontends
            .iter()
            .find(|f| f.supports(language))
            .map(|f| f.as_ref())
    }

    pub fn model_function(
        &self,
        record: &FunctionRecord,
        dmt_config: &DmtConfig,
    ) -> Result<MetadataSet, ModelError> {
        record.validate()?;
        let mut meta = if let Some(pre) = &record.pre_extracted {
            pre.clone()
        } else {
            let language = record.effective_language();
            let frontend = self
                .frontend_for(language)
                .ok_or(ModelError::UnsupportedLanguage(language))?;
            let source = record.source_text.as_deref().unwrap_or_default();
            frontend.model(source, &record.file_path)?
        };
        meta.retain_dmt(dmt_config);
        Ok(meta)
    }

    pub fn control_flow_skeleton(
        &self,
        source: &str,
        language: Language,
    ) -> Result<String, ModelError> {
        self.frontend_for(language)
            .ok_or(ModelError::UnsupportedLanguage(language))?
            .control_flow_skeleton(source)
    }
}

/// [`CodeModeler::model_function`] with the default frontends.
pub fn model_function(
    record: &FunctionRecord,
    dmt_config: &DmtConfig,
) -> Result<MetadataSet, ModelError> {
    CodeModeler::default().model_function(record, dmt_config)
}

pub fn extract_control_flow_skeleton(
    source: &str,
    language: Language,
) -> Result<String, ModelError> {
    CodeModeler::default().control_flow_skeleton(source, language)
}
