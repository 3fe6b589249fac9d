//! Optional worker pool for per-sample check evaluation.
//!
//! `MORITA_WORKBENCH_THREADS` caps the pool; unset or `1` means fully
//! sequential. Results are collected in input order, so reports are
//! byte-identical at any thread count.

use std::sync::OnceLock;

fn configured_threads() -> usize {
    static THREADS: OnceLock<usize> = OnceLock::new();
    *THREADS.get_or_init(|| {
        std::env::var("MORITA_WORKBENCH_THREADS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .filter(|&n| n >= 1)
            .unwrap_or(1)
    })
}

/// Map `f` over `items`, fanning out to at most the configured number
/// of worker threads, preserving order.
pub fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send + Sync,
    U: Send,
    F: Fn(&T) -> U + Sync,
{
    let threads = configured_threads().min(items.len().max(1));
    if threads <= 1 {
        return items.iter().map(|t| f(t)).collect();
    }
    let n = items.len();
    let chunk = n.div_ceil(threads);
    let mut out: Vec<Option<U>> = (0..n).map(|_| None).collect();
    std::thread::scope(|scope| {
        let f = &f;
        let mut handles = Vec::new();
        for (c, (items_chunk, out_chunk)) in items
            .chunks(chunk)
            .zip(out.chunks_mut(chunk))
            .enumerate()
        {
            let _ = c;
            handles.push(scope.spawn(move || {
                for (item, slot) in items_chunk.iter().zip(out_chunk.iter_mut()) {
                    *slot = Some(f(item));
                }
            }));
        }
        for h in handles {
            h.join().expect("worker thread panicked");
        }
    });
    out.into_iter().map(|v| v.expect("slot filled")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn par_map_preserves_order() {
        let items: Vec<usize> = (0..100).collect();
        let out = par_map(items, |&i| i * i);
        assert_eq!(out[7], 49);
        assert_eq!(out.len(), 100);
    }
}
