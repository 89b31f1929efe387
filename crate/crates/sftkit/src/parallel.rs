//! Deterministic fan-out over independent work items.
//!
//! Results always come back in input order, so callers produce identical
//! output whether they run serially (`threads <= 1`) or fanned out.  The
//! thread cap comes from the `SFTKIT_THREADS` environment variable at the
//! CLI layer; 0 means serial.

/// Applies `f` to every item, using up to `threads` worker threads, and
/// returns the results in input order.
pub fn parallel_map<T, R, F>(items: Vec<T>, threads: usize, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync,
{
    if threads <= 1 || items.len() <= 1 {
        return items.into_iter().map(f).collect();
    }
    let chunk_size = items.len().div_ceil(threads);
    let chunks: Vec<Vec<T>> = {
        let mut chunks = Vec::new();
        let mut it = items.into_iter();
        loop {
            let chunk: Vec<T> = it.by_ref().take(chunk_size).collect();
            if chunk.is_empty() {
                break;
            }
            chunks.push(chunk);
        }
        chunks
    };
    let f = &f;
    std::thread::scope(|scope| {
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|chunk| scope.spawn(move || chunk.into_iter().map(f).collect::<Vec<R>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker thread panicked"))
            .collect()
    })
}
