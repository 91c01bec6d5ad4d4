//! ExpSum core: metadata modelling, informativeness checking, a TF-IDF
//! knowledge base with three-stage retrieval, category-constrained
//! summarization through a pluggable LLM client, and BLEU/ROUGE scoring.
//!
//! Numeric containers are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar for callers that do not care.

pub mod check;
pub mod code_model;
pub mod kb;
pub mod llm;
pub mod metrics;
pub mod retrieval;
pub mod scalar;
pub mod summarizer;

pub use check::{check_metadata, load_dictionary, CheckReport, UninformativeDictionary};
pub use code_model::{
    extract_control_flow_skeleton, model_function, CodeModeler, DmtConfig, FunctionRecord,
    Language, MetadataSet, ModelError, ParameterField,
};
pub use kb::{build_knowledge_base, build_knowledge_base_lexical, KbError, PackageDoc};
pub use llm::{ClientError, HttpClient, HttpConfig, LlmClient, LlmRequest, LlmResponse, MockClient, MockScript};
pub use metrics::{bleu4, evaluate_corpus, rouge_l, ScorePair};
pub use retrieval::{retrieve, QueryText, RetrievalConfig};
pub use scalar::Scalar;
pub use summarizer::{
    summarize, FunctionCategory, SummarizeError, Summarizer, SummarizerConfig, SummaryResult,
    TermContext,
};

pub type KnowledgeBase = kb::KnowledgeBase<f64>;
pub type KnowledgeBaseF32 = kb::KnowledgeBase<f32>;
pub type KnowledgeEntry = kb::KnowledgeEntry<f64>;
pub type KnowledgeEntryF32 = kb::KnowledgeEntry<f32>;
pub type TfIdfModel = kb::TfIdfModel<f64>;
pub type TfIdfModelF32 = kb::TfIdfModel<f32>;
pub type SparseVector = kb::SparseVector<f64>;
pub type SparseVectorF32 = kb::SparseVector<f32>;
pub type RetrievalResult = retrieval::RetrievalResult<f64>;
pub type RetrievalResultF32 = retrieval::RetrievalResult<f32>;
pub type EvaluationReport = metrics::EvaluationReport<f64>;
pub type EvaluationReportF32 = metrics::EvaluationReport<f32>;
