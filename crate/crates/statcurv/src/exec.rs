//! Data-parallel map over sample points. With the `parallel` feature
//! (default) the work is spread over rayon; without it the same API runs
//! sequentially. Results come back in input order either way, so reports
//! are identical across both modes.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
pub fn map_items<I: Sync, T: Send>(items: &[I], f: impl Fn(&I) -> T + Sync + Send) -> Vec<T> {
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_items<I, T>(items: &[I], f: impl Fn(&I) -> T) -> Vec<T> {
    items.iter().map(f).collect()
}

/// Sequential reference path; kept unconditionally for benchmarking the
/// parallel speedup and as the fallback semantics map_items must match.
pub fn map_items_seq<I, T>(items: &[I], f: impl Fn(&I) -> T) -> Vec<T> {
    items.iter().map(f).collect()
}

/// Cap rayon's global pool from the STATCURV_THREADS env var. No-op when
/// unset, invalid, or when the crate is built without `parallel`.
pub fn init_thread_cap_from_env() {
    #[cfg(feature = "parallel")]
    {
        if let Ok(v) = std::env::var("STATCURV_THREADS") {
            if let Ok(k) = v.parse::<usize>() {
                if k >= 1 {
                    // Ignore the error if a pool was already built.
                    let _ = rayon::ThreadPoolBuilder::new()
                        .num_threads(k)
                        .build_global();
                }
            }
        }
    }
}
