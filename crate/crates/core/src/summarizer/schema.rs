use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SummarizeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionCategory {
    Field,
    Procedural,
    Constructor,
    Callback,
    Utility,
}

impl FunctionCategory {
    pub const ALL: [FunctionCategory; 5] = [
        FunctionCategory::Field,
        FunctionCategory::Procedural,
        FunctionCategory::Constructor,
        FunctionCategory::Callback,
        FunctionCategory::Utility,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FunctionCategory::Field => "field",
            FunctionCategory::Procedural => "procedural",
            FunctionCategory::Constructor => "constructor",
            FunctionCategory::Callback => "callback",
            FunctionCategory::Utility => "utility",
        }
    }

    /// Heading used for this category inside the rendered constraint block.
    pub fn heading(self) -> &'static str {
        match self {
            FunctionCategory::Field => "Field type",
            FunctionCategory::Procedural => "Procedural type",
            FunctionCategory::Constructor => "Constructor type",
            FunctionCategory::Callback => "Callback type",
            FunctionCategory::Utility => "Utility type",
        }
    }
}

impl fmt::Display for FunctionCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownCategory(pub String);

impl fmt::Display for UnknownCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown function category `{}`", self.0)
    }
}

impl std::error::Error for UnknownCategory {}

impl FromStr for FunctionCategory {
    type Err = UnknownCategory;

    /// Case-insensitive; tolerates a trailing "type"/"function" word and
    /// surrounding quotes or punctuation as models tend to emit them.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let cleaned: String = s
            .trim()
            .trim_matches(|c: char| !c.is_alphanumeric())
            .to_lowercase();
        let word = cleaned
            .strip_suffix(" type")
            .or_else(|| cleaned.strip_suffix(" function"))
            .unwrap_or(&cleaned)
            .trim();
        FunctionCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == word)
            .ok_or_else(|| UnknownCategory(s.trim().to_string()))
    }
}

/// Constraint schema for one category: how to recognise it and how its summaries are phrased.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategorySchema {
    pub category: FunctionCategory,
    pub definition: String,
    pub classification_criteria: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub datatype_templates: Option<BTreeMap<String, String>>,
    #[serde(default)]
    pub forbidden: Vec<String>,
    #[serde(default)]
    pub example_names: Vec<String>,
}

impl CategorySchema {
    pub fn validate(&self) -> Result<(), SummarizeError> {
        if self.definition.trim().is_empty() {
            return Err(SummarizeError::Schema(format!("{}: empty definition", self.category)));
        }
        if self.classification_criteria.iter().all(|c| c.trim().is_empty()) {
            return Err(SummarizeError::Schema(format!(
                "{}: no classification criteria",
                self.category
            )));
        }
        Ok(())
    }

    /// JSON object placed under the category heading in the draft prompt.
    pub fn render(&self) -> serde_json::Value {
        let mut when_true = serde_json::Map::new();
        if let Some(t) = &self.datatype_templates {
            when_true.insert("datatype templates".into(), serde_json::json!(t));
        }
        if !self.forbidden.is_empty() {
            when_true.insert("forbidden".into(), serde_json::json!(self.forbidden));
        }
        let mut obj = serde_json::Map::new();
        obj.insert("definition".into(), serde_json::json!(self.definition));
        obj.insert(
            "classification criteria".into(),
            serde_json::json!(self.classification_criteria),
        );
        if !when_true.is_empty() {
            obj.insert("if true".into(), serde_json::Value::Object(when_true));
        }
        if !self.example_names.is_empty() {
            obj.insert("example names".into(), serde_json::json!(self.example_names));
        }
        serde_json::Value::Object(obj)
    }
}

/// One schema per category, in `FunctionCategory::ALL` order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaSet {
    schemas: Vec<CategorySchema>,
}

const BUILTIN: [&str; 5] = [
    include_str!("../../data/schemas/field.json"),
    include_str!("../../data/schemas/procedural.json"),
    include_str!("../../data/schemas/constructor.json"),
    include_str!("../../data/schemas/callback.json"),
    include_str!("../../data/schemas/utility.json"),
];

impl SchemaSet {
    pub fn new(schemas: Vec<CategorySchema>) -> Result<Self, SummarizeError> {
        let mut ordered = Vec::with_capacity(5);
        for cat in FunctionCategory::ALL {
            let mut found = schemas.iter().filter(|s| s.category == cat);
            let schema = found
                .next()
                .ok_or_else(|| SummarizeError::Schema(format!("missing schema for {cat}")))?;
            if found.next().is_some() {
                return Err(SummarizeError::Schema(format!("duplicate schema for {cat}")));
            }
            schema.validate()?;
            ordered.push(schema.clone());
        }
        Ok(SchemaSet { schemas: ordered })
    }

    pub fn builtin() -> Self {
        let schemas = BUILTIN
            .iter()
            .map(|s| serde_json::from_str(s).expect("bundled schema is valid JSON"))
            .collect();
        SchemaSet::new(schemas).expect("bundled schemas are complete")
    }

    /// Load `<category>.json` for every category from `dir`.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self, SummarizeError> {
        let dir = dir.as_ref();
        let mut schemas = Vec::new();
        for cat in FunctionCategory::ALL {
            let path = dir.join(format!("{cat}.json"));
            let text = std::fs::read_to_string(&path).map_err(|e| {
                SummarizeError::Schema(format!("{}: {e}", path.display()))
            })?;
            let schema: CategorySchema = serde_json::from_str(&text)
                .map_err(|e| SummarizeError::Schema(format!("{}: {e}", path.display())))?;
            if schema.category != cat {
                return Err(SummarizeError::Schema(format!(
                    "{} declares category {}",
                    path.display(),
                    schema.category
                )));
            }
            schemas.push(schema);
        }
        SchemaSet::new(schemas)
    }

    pub fn get(&self, cat: FunctionCategory) -> &CategorySchema {
        &self.schemas[FunctionCategory::ALL.iter().position(|c| *c == cat).unwrap()]
    }

    pub fn iter(&self) -> impl Iterator<Item = &CategorySchema> {
        self.schemas.iter()
    }
}

impl Default for SchemaSet {
    fn default() -> Self {
        SchemaSet::builtin()
    }
}

/// Ordered rules the refiner applies to an accepted draft.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RefinerConstraints(Vec<String>);

impl RefinerConstraints {
    pub fn new(rules: Vec<String>) -> Result<Self, SummarizeError> {
        let rules: Vec<String> = rules
            .into_iter()
            .map(|r| r.trim().to_string())
            .filter(|r| !r.is_empty())
            .collect();
        if rules.is_empty() {
            return Err(SummarizeError::Schema("refiner constraint list is empty".into()));
        }
        Ok(RefinerConstraints(rules))
    }

    pub fn builtin() -> Self {
        let rules: Vec<String> =
            serde_json::from_str(include_str!("../../data/refiner_constraints.json"))
                .expect("bundled refiner constraints are valid JSON");
        RefinerConstraints::new(rules).expect("bundled refiner constraints are non-empty")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SummarizeError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| SummarizeError::Schema(format!("{}: {e}", path.display())))?;
        let rules: Vec<String> = serde_json::from_str(&text)
            .map_err(|e| SummarizeError::Schema(format!("{}: {e}", path.display())))?;
        RefinerConstraints::new(rules)
    }

    pub fn rules(&self) -> &[String] {
        &self.0
    }
}

impl Default for RefinerConstraints {
    fn default() -> Self {
        RefinerConstraints::builtin()
    }
}
