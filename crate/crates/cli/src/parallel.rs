//! Deterministic threaded mapping of trial indices.
//!
//! Work is split into contiguous index ranges, one per worker, and results
//! are concatenated in range order, so the output vector is identical to the
//! sequential map regardless of the thread count (each trial draws only from
//! its own seed substreams).

/// Map `f` over `0..count`, using up to `threads` workers.
pub fn run_trials<T, F>(threads: usize, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = threads.max(1).min(count.max(1));
    if workers <= 1 {
        return (0..count).map(f).collect();
    }
    let chunk = count.div_ceil(workers);
    let mut chunks: Vec<Vec<T>> = Vec::new();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for w in 0..workers {
            let start = w * chunk;
            let end = ((w + 1) * chunk).min(count);
            if start >= end {
                break;
            }
            let f = &f;
            handles.push(scope.spawn(move || (start..end).map(f).collect::<Vec<T>>()));
        }
        chunks = handles
            .into_iter()
            .map(|h| h.join().expect("trial worker panicked"))
            .collect();
    });
    chunks.into_iter().flatten().collect()
}

/// Default worker count: the logical core count.
pub fn default_threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}
