//! Batch front end for the expsum pipeline: knowledge-base construction,
//! metadata extraction and checking, retrieval, corpus summarization and
//! evaluation.

pub mod commands;
pub mod config;
pub mod corpus;
pub mod pipeline;
