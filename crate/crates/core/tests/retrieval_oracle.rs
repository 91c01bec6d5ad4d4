use expsum_core::kb::{KnowledgeBase, KnowledgeEntry, TfIdfModel};
use expsum_core::retrieval::{path_overlap, retrieve, token_overlap, QueryText, RetrievalConfig};
use proptest::prelude::*;

const PATHS: [&str; 5] = [
    "ohos.multimedia.avsession",
    "ohos.multimedia.audio",
    "ohos.data.relationalStore",
    "@ohos.multimedia.avsession",
    "ohos.battery",
];
const TERMS: [&str; 8] = [
    "AVSession",
    "AVSessionController",
    "AVMetadata",
    "RdbStore",
    "RDB store",
    "audio renderer",
    "media key event",
    "battery level",
];
const WORDS: [&str; 8] = ["media", "session", "audio", "store", "battery", "key", "event", "level"];

fn kb_strategy() -> impl Strategy<Value = KnowledgeBase<f64>> {
    let entry = (0..PATHS.len(), 0..TERMS.len(), prop::collection::vec(0..WORDS.len(), 1..8));
    prop::collection::vec(entry, 1..14).prop_map(|raw| {
        let docs: Vec<String> = raw
            .iter()
            .map(|(_, _, ws)| ws.iter().map(|w| WORDS[*w]).collect::<Vec<_>>().join(" "))
            .collect();
        let model = TfIdfModel::<f64>::fit(docs.iter().map(String::as_str)).unwrap();
        let entries = raw
            .iter()
            .zip(&docs)
            .map(|((p, t, _), d)| KnowledgeEntry {
                term: TERMS[*t].to_string(),
                documentation: d.clone(),
                path_context: PATHS[*p].to_string(),
                vector: model.encode(d),
            })
            .collect();
        KnowledgeBase { model, entries }
    })
}

/// Exhaustive re-derivation: score everything, filter, sort by the full key, cut, deduplicate.
fn oracle(q: &QueryText, kb: &KnowledgeBase<f64>, cfg: &RetrievalConfig) -> Vec<String> {
    let qv = kb.model.encode(&q.concatenated);
    let mut scored: Vec<(f64, &str, &str)> = kb
        .entries
        .iter()
        .filter(|e| path_overlap(&q.path, &e.path_context) >= cfg.path_overlap_threshold)
        .map(|e| (qv.cosine(&e.vector), e.path_context.as_str(), e.term.as_str()))
        .collect();
    scored.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then(a.1.cmp(b.1))
            .then(a.2.cmp(b.2))
    });
    let mut unique: Vec<&str> = Vec::new();
    for (_, _, t) in scored.into_iter().take(cfg.top_n) {
        if !unique.contains(&t) {
            unique.push(t);
        }
    }
    unique
        .iter()
        .filter(|t| {
            !unique.iter().any(|o| {
                o.chars().count() > t.chars().count()
                    && token_overlap(t, o) >= cfg.token_overlap_threshold
            })
        })
        .map(|t| t.to_string())
        .collect()
}

fn query() -> impl Strategy<Value = QueryText> {
    (
        prop::collection::vec(0..WORDS.len(), 1..6),
        0..PATHS.len(),
    )
        .prop_map(|(ws, p)| {
            let text = ws.iter().map(|w| WORDS[*w]).collect::<Vec<_>>().join(", ");
            QueryText::new(text, PATHS[p]).unwrap()
        })
}

fn config() -> impl Strategy<Value = RetrievalConfig> {
    (0.01..=1.0f64, 1usize..12, 0.01..=1.0f64)
        .prop_map(|(p, n, t)| RetrievalConfig::new(p, n, t).unwrap())
}

proptest! {
    #[test]
    fn retrieve_matches_exhaustive_oracle(kb in kb_strategy(), q in query(), cfg in config()) {
        let r = retrieve(&q, &kb, &cfg);
        prop_assert_eq!(r.terms, oracle(&q, &kb, &cfg));
    }

    #[test]
    fn stage_invariants(kb in kb_strategy(), q in query(), cfg in config()) {
        let r = retrieve(&q, &kb, &cfg);
        prop_assert!(r.entries.len() <= cfg.top_n);
        prop_assert!(r.terms.len() <= r.entries.len());
        prop_assert_eq!(r.entries.len(), r.scores.len());
        for e in &r.entries {
            prop_assert!(path_overlap(&q.path, &e.path_context) >= cfg.path_overlap_threshold);
        }
        for w in r.scores.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
        for a in &r.terms {
            for b in &r.terms {
                if a != b && a.chars().count() < b.chars().count() {
                    prop_assert!(token_overlap(a, b) < cfg.token_overlap_threshold);
                }
            }
        }
        prop_assert!(r.stage_trace.path_matched >= r.stage_trace.ranked);
        prop_assert!(r.stage_trace.ranked >= r.stage_trace.deduplicated);
    }

    #[test]
    fn f32_kb_scores_track_f64(kb in kb_strategy(), q in query()) {
        let cfg = RetrievalConfig::default();
        let r64 = retrieve(&q, &kb, &cfg);
        let kb32 = KnowledgeBase::<f32> {
            model: TfIdfModel::<f32>::fit(kb.entries.iter().map(|e| e.documentation.as_str())).unwrap(),
            entries: Vec::new(),
        };
        let kb32 = KnowledgeBase {
            entries: kb.entries.iter().map(|e| KnowledgeEntry {
                term: e.term.clone(),
                documentation: e.documentation.clone(),
                path_context: e.path_context.clone(),
                vector: kb32.model.encode(&e.documentation),
            }).collect(),
            model: kb32.model,
        };
        let r32 = retrieve(&q, &kb32, &cfg);
        prop_assert_eq!(r64.stage_trace.path_matched, r32.stage_trace.path_matched);
        for (a, b) in r64.scores.iter().zip(&r32.scores) {
            prop_assert!((a - *b as f64).abs() < 1e-4);
        }
    }
}
