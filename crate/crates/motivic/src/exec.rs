//! Runtime switch between the rayon data-parallel core and its sequential
//! fallback.
//!
//! The `parallel` cargo feature compiles the rayon paths in; this module adds a
//! process-wide runtime toggle on top so a single binary can exercise both
//! modes (the benches compare them, and `--seq` style flags map onto
//! [`set_parallel`]). With the feature disabled the toggle is inert and every
//! call site takes the sequential path.

use std::sync::atomic::{AtomicBool, Ordering};

static PARALLEL: AtomicBool = AtomicBool::new(true);

/// Enables or disables the data-parallel core at runtime. Returns the
/// previous setting. A no-op returning `false` when the `parallel` feature is
/// compiled out.
pub fn set_parallel(on: bool) -> bool {
    if cfg!(feature = "parallel") {
        PARALLEL.swap(on, Ordering::SeqCst)
    } else {
        false
    }
}

/// True when the `parallel` feature is compiled in and currently enabled.
pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel") && PARALLEL.load(Ordering::SeqCst)
}

/// Runs `make` over `items`, in parallel when enabled, and collects the
/// results in input order.
pub fn map_collect<T, U, F>(items: Vec<T>, make: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel_enabled() {
        use rayon::prelude::*;
        return items.into_par_iter().map(make).collect();
    }
    items.into_iter().map(make).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toggle_round_trips() {
        let prev = set_parallel(false);
        assert!(!parallel_enabled());
        set_parallel(true);
        if cfg!(feature = "parallel") {
            assert!(parallel_enabled());
        }
        set_parallel(prev);
    }

    #[test]
    fn map_collect_preserves_order() {
        let out = map_collect((0..100).collect(), |x: i32| x * x);
        assert_eq!(out, (0..100).map(|x| x * x).collect::<Vec<_>>());
    }
}
