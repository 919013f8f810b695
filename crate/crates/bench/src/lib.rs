//! Shared inputs for the benchmarks.

use medmine_core::fixtures::CorpusSpec;
use medmine_core::Corpus;

pub fn corpus(total: usize, positive: usize) -> Corpus {
    CorpusSpec::new("bench", total, positive, positive / 10, 7).build()
}

/// Deterministic span lists of `n` spans over a text of roughly `4 * n` code points.
pub fn span_lists(n: usize) -> (Vec<(usize, usize)>, Vec<(usize, usize)>) {
    let gold = (0..n).map(|i| (i * 4, i * 4 + 3)).collect();
    let pred = (0..n).map(|i| (i * 4 + (i % 3), i * 4 + 2 + (i % 3))).collect();
    (gold, pred)
}

pub fn noisy_text(words: usize) -> String {
    let parts = ["took", "tylenol", "💊", "$", "#pregnancy", "lol", "🤰🏽", "@mom", "~", "advil."];
    (0..words).map(|i| parts[(i * 7 + 3) % parts.len()]).collect::<Vec<_>>().join(" ")
}
