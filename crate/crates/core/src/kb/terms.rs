//! Domain-term extraction from package documentation.
//!
//! Lexical pass: special surface forms (CamelCase, all-caps, underscores or
//! other non-word characters). Semantic pass: each remaining content word is
//! put through a synonym-substitution test by the LLM; words whose
//! substitution changes the sentence meaning are kept.

use std::collections::HashSet;

use super::{KbError, PackageDoc};
use crate::llm::{ClientError, LlmClient, LlmRequest};

const STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but",
    "by", "can", "could", "did", "do", "does", "doing", "down", "during", "each", "few", "for",
    "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers", "herself",
    "him", "himself", "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself", "just",
    "may", "me", "might", "more", "most", "must", "my", "myself", "no", "nor", "not", "now", "of",
    "off", "on", "once", "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own",
    "same", "shall", "she", "should", "so", "some", "such", "than", "that", "the", "their",
    "theirs", "them", "themselves", "then", "there", "these", "they", "this", "those", "through",
    "to", "too", "under", "until", "up", "use", "used", "using", "very", "was", "we", "were",
    "what", "when", "where", "which", "while", "who", "whom", "why", "will", "with", "would",
    "you", "your", "yours", "yourself", "yourselves",
];

const SEMANTIC_SYSTEM: &str =
    "You identify domain-specific terms in software documentation by testing whether a word resists synonym substitution.";

fn trim_word(w: &str) -> &str {
    w.trim_start_matches(|c: char| "([{<\"'`“‘".contains(c))
        .trim_end_matches(|c: char| ".,;:!?)]}>\"'`”’".contains(c))
}

/// Whether a whitespace-delimited word is a special surface form.
pub fn is_special_form(word: &str) -> bool {
    let w = trim_word(word);
    if !w.chars().any(char::is_alphabetic) {
        return false;
    }
    let longest_run = w
        .split(|c: char| !c.is_alphanumeric())
        .map(|r| r.chars().count())
        .max()
        .unwrap_or(0);
    if longest_run < 2 {
        return false;
    }
    // hyphens and apostrophes are ordinary English compounding
    let special_char = w
        .chars()
        .any(|c| !c.is_alphanumeric() && c != '-' && c != '\'');
    let letters: Vec<char> = w.chars().filter(|c| c.is_alphabetic()).collect();
    let all_caps = letters.len() >= 2 && letters.iter().all(|c| c.is_uppercase());
    let camel = letters.iter().any(|c| c.is_lowercase())
        && w.chars().skip(1).any(char::is_uppercase);
    special_char || all_caps || camel
}

/// Special-form terms in order of first occurrence, deduplicated.
pub fn extract_terms_lexical(doc: &PackageDoc) -> Vec<String> {
    let mut seen = HashSet::new();
    doc.text
        .split_whitespace()
        .filter(|w| is_special_form(w))
        .map(|w| trim_word(w).to_string())
        .filter(|w| seen.insert(w.clone()))
        .collect()
}

fn sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    for (k, &(i, c)) in chars.iter().enumerate() {
        let end_of_sentence = c == '\n'
            || (matches!(c, '.' | '!' | '?')
                && chars.get(k + 1).is_none_or(|(_, n)| n.is_whitespace()));
        if end_of_sentence {
            let s = text[start..i + c.len_utf8()].trim();
            if !s.is_empty() {
                out.push(s);
            }
            start = i + c.len_utf8();
        }
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        out.push(tail);
    }
    out
}

/// Plain content words (lowercased, in first-occurrence order) with their sentence.
pub fn semantic_candidates(doc: &PackageDoc) -> Vec<(String, String)> {
    let stop: HashSet<&str> = STOPWORDS.iter().copied().collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for sentence in sentences(&doc.text) {
        for raw in sentence.split_whitespace() {
            if is_special_form(raw) {
                continue;
            }
            let w = trim_word(raw);
            if w.chars().count() < 3 || !w.chars().all(char::is_alphabetic) {
                continue;
            }
            let lower = w.to_lowercase();
            if stop.contains(lower.as_str()) || !seen.insert(lower.clone()) {
                continue;
            }
            out.push((lower, sentence.to_string()));
        }
    }
    out
}

pub fn semantic_prompt(sentence: &str, word: &str) -> LlmRequest {
    let user = format!(
        "## Term Extraction: synonym substitution test\n\
         Sentence: {sentence}\n\
         Word: {word}\n\n\
         Propose one plausible synonym for the word, substitute it into the sentence, \
         and judge whether the substitution changes the meaning of the sentence in this technical context.\n\
         Answer in exactly this format:\n\
         SYNONYM: <synonym>\n\
         VERDICT: changed | preserved"
    );
    LlmRequest::new(SEMANTIC_SYSTEM, user).expect("prompts are non-empty")
}

/// `Some(true)` when the verdict says the meaning changed.
pub fn parse_verdict(response: &str) -> Option<bool> {
    let line = response
        .lines()
        .find_map(|l| {
            let l = l.trim();
            l.get(..8)
                .filter(|p| p.eq_ignore_ascii_case("verdict:"))
                .map(|_| l[8..].trim().to_lowercase())
        })?;
    if line.starts_with("preserved") || line.starts_with("unchanged") {
        Some(false)
    } else if line.starts_with("changed") {
        Some(true)
    } else {
        None
    }
}

/// Words judged meaning-changing under synonym substitution.
pub fn extract_terms_semantic(
    doc: &PackageDoc,
    client: &dyn LlmClient,
) -> Result<Vec<String>, KbError> {
    let wrap = |source: ClientError| KbError::Client {
        path_context: doc.path_context.clone(),
        source,
    };
    let mut terms = Vec::new();
    for (word, sentence) in semantic_candidates(doc) {
        let response = client.complete(&semantic_prompt(&sentence, &word)).map_err(wrap)?;
        let changed = parse_verdict(&response.text).ok_or_else(|| {
            wrap(ClientError::Malformed(format!(
                "no verdict for `{word}`: {}",
                response.text.trim()
            )))
        })?;
        if changed {
            terms.push(word);
        }
    }
    Ok(terms)
}
