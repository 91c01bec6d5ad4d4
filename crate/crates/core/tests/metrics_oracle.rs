use std::collections::HashMap;

use expsum_core::metrics::{bleu4, evaluate_corpus, rouge_l, tokenize, ScorePair};
use proptest::prelude::*;

fn ngrams(tokens: &[String], n: usize) -> HashMap<Vec<String>, usize> {
    let mut m = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *m.entry(w.to_vec()).or_insert(0) += 1;
        }
    }
    m
}

fn bleu_oracle(c: &[String], r: &[String]) -> f64 {
    if c.is_empty() {
        return 0.0;
    }
    let orders = c.len().min(4);
    let mut log_sum = 0.0;
    for n in 1..=orders {
        let cn = ngrams(c, n);
        let rn = ngrams(r, n);
        let matched: usize = cn.iter().map(|(g, k)| (*k).min(*rn.get(g).unwrap_or(&0))).sum();
        let total: usize = cn.values().sum();
        let num = if matched == 0 { 0.1 } else { matched as f64 };
        log_sum += (num / total as f64).ln() / orders as f64;
    }
    let (cl, rl) = (c.len() as f64, r.len() as f64);
    let bp = if cl > rl { 1.0 } else { (1.0 - rl / cl).exp() };
    100.0 * bp * log_sum.exp()
}

/// Plain recursive LCS with memo table, independent of the library's DP.
fn lcs(a: &[String], b: &[String], memo: &mut HashMap<(usize, usize), usize>) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let key = (a.len(), b.len());
    if let Some(v) = memo.get(&key) {
        return *v;
    }
    let v = if a[0] == b[0] {
        1 + lcs(&a[1..], &b[1..], memo)
    } else {
        lcs(&a[1..], b, memo).max(lcs(a, &b[1..], memo))
    };
    memo.insert(key, v);
    v
}

fn rouge_oracle(c: &[String], r: &[String]) -> f64 {
    let l = lcs(c, r, &mut HashMap::new()) as f64;
    if l == 0.0 {
        return 0.0;
    }
    let p = l / c.len() as f64;
    let rec = l / r.len() as f64;
    100.0 * 2.0 * p * rec / (p + rec)
}

fn sentence() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(vec!["the", "battery", "level", "obtains", "state", "of", "a", "session"]), 0..10)
        .prop_map(|w| w.join(" "))
}

proptest! {
    #[test]
    fn bleu_matches_oracle(c in sentence(), r in sentence().prop_filter("non-empty", |s| !s.is_empty())) {
        let pair = ScorePair::new(c.clone(), r.clone()).unwrap();
        let got: f64 = bleu4(&pair);
        let want = bleu_oracle(&tokenize(&c), &tokenize(&r));
        prop_assert!((got - want).abs() < 1e-9, "{} vs {}", got, want);
        prop_assert!((0.0..=100.0 + 1e-9).contains(&got));
    }

    #[test]
    fn rouge_matches_oracle(c in sentence(), r in sentence().prop_filter("non-empty", |s| !s.is_empty())) {
        let pair = ScorePair::new(c.clone(), r.clone()).unwrap();
        let got: f64 = rouge_l(&pair);
        let want = rouge_oracle(&tokenize(&c), &tokenize(&r));
        prop_assert!((got - want).abs() < 1e-9);
        prop_assert!((0.0..=100.0 + 1e-9).contains(&got));
    }

    #[test]
    fn identical_text_scores_100(r in sentence().prop_filter("non-empty", |s| !s.is_empty())) {
        let pair = ScorePair::new(r.clone(), r).unwrap();
        prop_assert!((bleu4::<f64>(&pair) - 100.0).abs() < 1e-9);
        prop_assert!((rouge_l::<f64>(&pair) - 100.0).abs() < 1e-9);
    }
}

#[test]
fn corpus_mean_of_perfect_and_empty() {
    let pairs = vec![
        ("a".to_string(), ScorePair::new("indicates the battery level", "indicates the battery level").unwrap()),
        ("b".to_string(), ScorePair::new("", "obtains the session state").unwrap()),
    ];
    let report = evaluate_corpus::<f64>(&pairs).unwrap();
    assert_eq!(report.n, 2);
    assert!((report.corpus_means.bleu4 - 50.0).abs() < 1e-9);
    assert!((report.corpus_means.rouge_l - 50.0).abs() < 1e-9);
}
