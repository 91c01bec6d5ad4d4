use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::code_model::MetadataSet;
use crate::kb::KnowledgeEntry;
use crate::llm::LlmRequest;
use crate::retrieval::RetrievalResult;

use super::schema::{FunctionCategory, RefinerConstraints, SchemaSet};
use super::SummarizeError;

pub const DRAFT_HEADER: &str = "## Draft Generator";
pub const REFINE_HEADER: &str = "## Summary Refiner";

const DRAFT_SYSTEM: &str = "You write concise natural-language summaries of API functions \
for developer documentation. Follow the requested output format exactly.";
const REFINE_SYSTEM: &str = "You review draft summaries of API functions for developer \
documentation. Follow the requested output format exactly.";

const DOC_LIMIT: usize = 400;

/// A retrieved domain term together with where it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermContext {
    pub term: String,
    pub path_context: String,
    pub documentation: String,
}

impl TermContext {
    pub fn from_entry<F>(entry: &KnowledgeEntry<F>) -> Self {
        TermContext {
            term: entry.term.clone(),
            path_context: entry.path_context.clone(),
            documentation: entry.documentation.clone(),
        }
    }

    /// One context per surviving term, taken from its best-ranked entry.
    pub fn from_retrieval<F>(result: &RetrievalResult<F>) -> Vec<Self> {
        result
            .terms
            .iter()
            .map(|term| {
                result
                    .entries
                    .iter()
                    .find(|e| &e.term == term)
                    .map(TermContext::from_entry)
                    .unwrap_or_else(|| TermContext {
                        term: term.clone(),
                        path_context: String::new(),
                        documentation: String::new(),
                    })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DraftResult {
    pub declared_category: FunctionCategory,
    pub summary_text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum RefinementOutcome {
    Accepted { final_text: String },
    Rejected { error_category: FunctionCategory },
}

fn metadata_json(meta: &MetadataSet) -> String {
    serde_json::to_string_pretty(meta).expect("metadata serializes")
}

fn excerpt(text: &str) -> String {
    let flat = text.split_whitespace().collect::<Vec<_>>().join(" ");
    if flat.chars().count() <= DOC_LIMIT {
        flat
    } else {
        let cut: String = flat.chars().take(DOC_LIMIT).collect();
        format!("{cut}...")
    }
}

pub fn build_draft_prompt(
    meta: &MetadataSet,
    knowledge: &[TermContext],
    schemas: &SchemaSet,
    excluded: &BTreeSet<FunctionCategory>,
) -> Result<LlmRequest, SummarizeError> {
    let allowed: Vec<FunctionCategory> = FunctionCategory::ALL
        .into_iter()
        .filter(|c| !excluded.contains(c))
        .collect();
    if allowed.is_empty() {
        return Err(SummarizeError::AllCategoriesExcluded);
    }

    let mut constraints = serde_json::Map::new();
    for cat in &allowed {
        constraints.insert(cat.heading().to_string(), schemas.get(*cat).render());
    }
    let constraints = serde_json::to_string_pretty(&serde_json::json!({ "Constraints": constraints }))
        .expect("constraints serialize");

    let mut entries = String::new();
    if knowledge.is_empty() {
        entries.push_str("(no entries)\n");
    }
    for k in knowledge {
        entries.push_str(&format!("- Term: {}\n", k.term));
        if !k.path_context.is_empty() {
            entries.push_str(&format!("  Path context: {}\n", k.path_context));
        }
        if !k.documentation.trim().is_empty() {
            entries.push_str(&format!("  Documentation: {}\n", excerpt(&k.documentation)));
        }
    }

    let names: Vec<&str> = allowed.iter().map(|c| c.as_str()).collect();
    let user = format!(
        "{DRAFT_HEADER}\n\
Step 1. Decide which category the target function belongs to by checking the \
classification criteria of each category in the constraints below.\n\
Step 2. Write a draft summary that follows the rules of that category. Use the \
knowledge entries to choose accurate domain terms. Describe only what the \
metadata states.\n\n\
<Input Metadata Set>\n{meta}\n</Input Metadata Set>\n\n\
<Knowledge Entries>\n{entries}</Knowledge Entries>\n\n\
{constraints}\n\n\
Reply with exactly two lines:\n\
CATEGORY: <one of: {names}>\n\
SUMMARY: <draft summary>\n",
        meta = metadata_json(meta),
        names = names.join(", "),
    );
    Ok(LlmRequest::new(DRAFT_SYSTEM, user).expect("prompts are non-empty"))
}

pub fn build_refine_prompt(
    meta: &MetadataSet,
    draft: &DraftResult,
    constraints: &RefinerConstraints,
) -> LlmRequest {
    let rules: String = constraints
        .rules()
        .iter()
        .enumerate()
        .map(|(i, r)| format!("{}. {r}\n", i + 1))
        .collect();
    let user = format!(
        "{REFINE_HEADER}\n\
Step 1. Check whether the category declared in the draft is consistent with the \
input metadata set. If it is not, reply with exactly one line:\n\
Error category: <declared category>\n\
Step 2. Otherwise revise the draft summary according to the constraints for the \
refiner and reply with exactly one line:\n\
FINAL: <refined summary>\n\n\
<Input Metadata Set>\n{meta}\n</Input Metadata Set>\n\n\
<Draft>\nCATEGORY: {cat}\nSUMMARY: {summary}\n</Draft>\n\n\
Constraints for the refiner:\n{rules}",
        meta = metadata_json(meta),
        cat = draft.declared_category,
        summary = draft.summary_text,
    );
    LlmRequest::new(REFINE_SYSTEM, user).expect("prompts are non-empty")
}

/// Drop `<think>...</think>` blocks that reasoning models prepend.
fn strip_reasoning(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(start) = rest.find("<think>") {
        out.push_str(&rest[..start]);
        match rest[start..].find("</think>") {
            Some(end) => rest = &rest[start + end + "</think>".len()..],
            None => {
                rest = "";
                break;
            }
        }
    }
    out.push_str(rest);
    out
}

/// If `line` starts with `marker` (case-insensitive, ignoring markdown emphasis), the remainder.
fn after_marker<'a>(line: &'a str, marker: &str) -> Option<&'a str> {
    let line = line.trim_start().trim_start_matches(['*', '#', '-', ' ', '>']);
    let head = line.get(..marker.len())?;
    if head.eq_ignore_ascii_case(marker) {
        Some(line[marker.len()..].trim_start_matches('*').trim())
    } else {
        None
    }
}

pub fn parse_draft(text: &str) -> Result<DraftResult, SummarizeError> {
    let text = strip_reasoning(text);
    let lines: Vec<&str> = text.lines().collect();
    let (cat_idx, cat_raw) = lines
        .iter()
        .enumerate()
        .rev()
        .find_map(|(i, l)| after_marker(l, "CATEGORY:").map(|v| (i, v)))
        .ok_or_else(|| SummarizeError::MalformedDraft("no CATEGORY line".into()))?;
    let declared_category = cat_raw
        .parse::<FunctionCategory>()
        .map_err(|e| SummarizeError::MalformedDraft(e.to_string()))?;

    let (sum_idx, first) = lines
        .iter()
        .enumerate()
        .skip(cat_idx + 1)
        .find_map(|(i, l)| after_marker(l, "SUMMARY:").map(|v| (i, v)))
        .ok_or_else(|| SummarizeError::MalformedDraft("no SUMMARY line".into()))?;
    let mut summary = first.to_string();
    for l in &lines[sum_idx + 1..] {
        if !l.trim().is_empty() {
            summary.push(' ');
            summary.push_str(l.trim());
        }
    }
    let summary_text = summary.trim().to_string();
    if summary_text.is_empty() {
        return Err(SummarizeError::MalformedDraft("empty SUMMARY".into()));
    }
    Ok(DraftResult { declared_category, summary_text })
}

pub fn parse_refinement(text: &str) -> Result<RefinementOutcome, SummarizeError> {
    let text = strip_reasoning(text);
    let lower = text.to_lowercase();
    if let Some(pos) = lower.find("error category:") {
        let rest = &text[pos + "error category:".len()..];
        let value = rest.lines().next().unwrap_or("");
        let error_category = value
            .parse::<FunctionCategory>()
            .map_err(|e| SummarizeError::MalformedRefinement(e.to_string()))?;
        return Ok(RefinementOutcome::Rejected { error_category });
    }

    let lines: Vec<&str> = text.lines().collect();
    let final_text = match lines
        .iter()
        .enumerate()
        .rev()
        .find_map(|(i, l)| after_marker(l, "FINAL:").map(|v| (i, v)))
    {
        Some((idx, first)) => {
            let mut s = first.to_string();
            for l in &lines[idx + 1..] {
                if !l.trim().is_empty() {
                    s.push(' ');
                    s.push_str(l.trim());
                }
            }
            s
        }
        None => lines
            .iter()
            .map(|l| l.trim())
            .filter(|l| !l.is_empty())
            .collect::<Vec<_>>()
            .join(" "),
    };
    let final_text = final_text.trim().to_string();
    if final_text.is_empty() {
        return Err(SummarizeError::MalformedRefinement("empty refinement".into()));
    }
    Ok(RefinementOutcome::Accepted { final_text })
}
