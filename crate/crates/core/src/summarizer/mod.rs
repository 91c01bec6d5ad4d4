//! Category-constrained draft generation followed by self-refinement.
//!
//! Each iteration asks the model for a categorised draft, then asks it to
//! either accept and polish the draft or reject the declared category. A
//! rejected category is excluded from every later draft prompt of the same
//! function. When the iteration budget runs out, or excluding one more
//! category would leave none, the last draft is returned with
//! `degraded = true`.

mod prompt;
mod schema;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code_model::MetadataSet;
use crate::llm::{ClientError, LlmClient, LlmRequest};

pub use prompt::{
    build_draft_prompt, build_refine_prompt, parse_draft, parse_refinement, DraftResult,
    RefinementOutcome, TermContext, DRAFT_HEADER, REFINE_HEADER,
};
pub use schema::{CategorySchema, FunctionCategory, RefinerConstraints, SchemaSet, UnknownCategory};

const RETRY_NOTE: &str = "\n\nYour previous reply could not be parsed. Reply again using exactly the requested format.";

#[derive(Debug, Error)]
pub enum SummarizeError {
    #[error("every function category has been excluded")]
    AllCategoriesExcluded,
    #[error("llm client: {0}")]
    Client(#[from] ClientError),
    #[error("malformed draft: {0}")]
    MalformedDraft(String),
    #[error("malformed refinement: {0}")]
    MalformedRefinement(String),
    #[error("invalid summarizer config: {0}")]
    InvalidConfig(String),
    #[error("schema: {0}")]
    Schema(String),
}

impl SummarizeError {
    pub fn kind(&self) -> &'static str {
        match self {
            SummarizeError::AllCategoriesExcluded => "AllCategoriesExcluded",
            SummarizeError::Client(_) => "ClientError",
            SummarizeError::MalformedDraft(_) => "MalformedDraft",
            SummarizeError::MalformedRefinement(_) => "MalformedRefinement",
            SummarizeError::InvalidConfig(_) => "InvalidConfig",
            SummarizeError::Schema(_) => "SchemaError",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SummarizerConfig {
    pub max_iterations: u32,
    /// Extra attempts per model call when its reply cannot be parsed.
    pub max_parse_retries: u32,
    pub max_tokens: u32,
    pub temperature: f64,
}

impl Default for SummarizerConfig {
    fn default() -> Self {
        SummarizerConfig {
            max_iterations: 3,
            max_parse_retries: 1,
            max_tokens: LlmRequest::DEFAULT_MAX_TOKENS,
            temperature: 0.0,
        }
    }
}

impl SummarizerConfig {
    pub fn validate(&self) -> Result<(), SummarizeError> {
        if self.max_iterations == 0 {
            return Err(SummarizeError::InvalidConfig("max_iterations must be >= 1".into()));
        }
        if self.max_tokens == 0 {
            return Err(SummarizeError::InvalidConfig("max_tokens must be >= 1".into()));
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(SummarizeError::InvalidConfig("temperature must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub iteration: u32,
    pub draft: DraftResult,
    pub outcome: RefinementOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryResult {
    pub final_summary: String,
    pub category: FunctionCategory,
    pub retrieved_terms: Vec<String>,
    pub iterations: u32,
    pub excluded_categories: BTreeSet<FunctionCategory>,
    pub trace: Vec<TraceStep>,
    pub degraded: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Summarizer {
    pub schemas: SchemaSet,
    pub constraints: RefinerConstraints,
    pub config: SummarizerConfig,
}

impl Summarizer {
    pub fn new(
        schemas: SchemaSet,
        constraints: RefinerConstraints,
        config: SummarizerConfig,
    ) -> Result<Self, SummarizeError> {
        config.validate()?;
        Ok(Summarizer { schemas, constraints, config })
    }

    pub fn with_config(config: SummarizerConfig) -> Result<Self, SummarizeError> {
        Summarizer::new(SchemaSet::builtin(), RefinerConstraints::builtin(), config)
    }

    fn prepare(&self, req: LlmRequest) -> Result<LlmRequest, SummarizeError> {
        Ok(req
            .with_temperature(self.config.temperature)?
            .with_max_tokens(self.config.max_tokens))
    }

    fn call<T>(
        &self,
        client: &dyn LlmClient,
        mut req: LlmRequest,
        parse: impl Fn(&str) -> Result<T, SummarizeError>,
    ) -> Result<T, SummarizeError> {
        let mut attempt = 0;
        loop {
            let resp = client.complete(&req)?;
            match parse(&resp.text) {
                Ok(v) => return Ok(v),
                Err(e) if attempt < self.config.max_parse_retries => {
                    log::debug!("unparseable reply ({e}), retrying");
                    attempt += 1;
                    if attempt == 1 {
                        req.user_prompt.push_str(RETRY_NOTE);
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }

    pub fn summarize(
        &self,
        meta: &MetadataSet,
        knowledge: &[TermContext],
        client: &dyn LlmClient,
    ) -> Result<SummaryResult, SummarizeError> {
        let mut excluded = BTreeSet::new();
        let mut trace = Vec::new();
        let retrieved_terms: Vec<String> = knowledge.iter().map(|k| k.term.clone()).collect();

        for iteration in 1..=self.config.max_iterations {
            let req = self.prepare(build_draft_prompt(meta, knowledge, &self.schemas, &excluded)?)?;
            let draft = self.call(client, req, |text| {
                let d = parse_draft(text)?;
                if excluded.contains(&d.declared_category) {
                    return Err(SummarizeError::MalformedDraft(format!(
                        "declared excluded category {}",
                        d.declared_category
                    )));
                }
                Ok(d)
            })?;

            let req = self.prepare(build_refine_prompt(meta, &draft, &self.constraints))?;
            let outcome = self.call(client, req, parse_refinement)?;
            trace.push(TraceStep { iteration, draft: draft.clone(), outcome: outcome.clone() });

            let finish = |final_summary: String, degraded: bool, excluded: BTreeSet<_>, trace| {
                Ok(SummaryResult {
                    final_summary,
                    category: draft.declared_category,
                    retrieved_terms: retrieved_terms.clone(),
                    iterations: iteration,
                    excluded_categories: excluded,
                    trace,
                    degraded,
                })
            };

            match outcome {
                RefinementOutcome::Accepted { final_text } => {
                    return finish(final_text, false, excluded, trace);
                }
                RefinementOutcome::Rejected { error_category } => {
                    if error_category != draft.declared_category {
                        log::debug!(
                            "refiner named {error_category}, draft declared {}",
                            draft.declared_category
                        );
                    }
                    let last = iteration == self.config.max_iterations;
                    let exhausts = excluded.len() + 1 >= FunctionCategory::ALL.len();
                    if last || exhausts {
                        log::warn!(
                            "{}: no accepted category after {iteration} iteration(s), keeping last draft",
                            meta.function_name
                        );
                        return finish(draft.summary_text.clone(), true, excluded, trace);
                    }
                    excluded.insert(draft.declared_category);
                }
            }
        }
        unreachable!("the final iteration always returns")
    }
}

/// Summarise with the bundled schemas and refiner constraints.
pub fn summarize(
    meta: &MetadataSet,
    knowledge: &[TermContext],
    client: &dyn LlmClient,
    config: SummarizerConfig,
) -> Result<SummaryResult, SummarizeError> {
    Summarizer::with_config(config)?.summarize(meta, knowledge, client)
}
