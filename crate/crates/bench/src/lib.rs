//! Fixtures shared by the benchmarks.

use netepi::Graph;

/// Ring of `n` nodes where node `i` also listens to `i + 3` and `i + 7`, with
/// weights varying deterministically in `[0.5, 1.5)`.
pub fn ring_with_chords(n: usize) -> Graph {
    assert!(n >= 8, "need at least 8 nodes");
    let mut rows = vec![vec![0.0; n]; n];
    for (i, row) in rows.iter_mut().enumerate() {
        for (k, off) in [1, 3, 7].into_iter().enumerate() {
            let j = (i + off) % n;
            row[j] = 0.5 + ((i * 31 + k * 17) % 100) as f64 / 100.0;
        }
    }
    Graph::from_rows(&rows).expect("valid weights")
}
