//! Lexicographic indexing of unordered pairs (i, j) with i < j.

/// Number of pairs i < j among n items.
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Index of the pair (i, j), i < j, in lexicographic order.
pub fn pair_index(i: usize, j: usize, n: usize) -> usize {
    debug_assert!(i < j && j < n);
    // pairs starting with 0..i come first: sum_{k<i} (n-1-k)
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// All pairs (i, j) with i < j < n in lexicographic order.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}
