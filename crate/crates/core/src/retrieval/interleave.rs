use std::collections::HashSet;
use std::hash::Hash;

/// Round-robin merge: the first item of every list in list order, then the
/// second of every list, and so on, up to `max_items`.
///
/// An item that was already emitted is skipped. The skipped slot is *not*
/// back-filled from deeper in the same list, so the output can be shorter
/// than `max_items` even when the inputs hold enough distinct items.
///
/// ```
/// use facetpool::retrieval::interleave_round_robin;
/// let merged = interleave_round_robin(&[vec!["a", "b"], vec!["a", "c"]], 4);
/// assert_eq!(merged, ["a", "b", "c"]);
/// ```
pub fn interleave_round_robin<T: Clone + Eq + Hash>(lists: &[Vec<T>], max_items: usize) -> Vec<T> {
    interleave_round_robin_by(lists, max_items, |item| item.clone())
}

/// [`interleave_round_robin`] with duplicates detected through `key`.
pub fn interleave_round_robin_by<T, K, F>(lists: &[Vec<T>], max_items: usize, key: F) -> Vec<T>
where
    T: Clone,
    K: Eq + Hash,
    F: Fn(&T) -> K,
{
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let depth = lists.iter().map(Vec::len).max().unwrap_or(0);
    'rounds: for round in 0..depth {
        for list in lists {
            if out.len() >= max_items {
                break 'rounds;
            }
            if let Some(item) = list.get(round) {
                if seen.insert(key(item)) {
                    out.push(item.clone());
                }
            }
        }
    }
    out
}
