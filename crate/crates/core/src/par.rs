//! Switch between the rayon-backed and sequential execution of the
//! data-parallel loops (brute-force enumeration, exhaustive scans, annealing
//! reads). Results never depend on the chosen mode.

/// Execution mode for data-parallel loops.
///
/// `Parallel` silently runs sequentially when the crate is built without the
/// `parallel` feature.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    #[default]
    Parallel,
}

impl Parallelism {
    /// True when work will actually be spread over the rayon pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Parallelism::Parallel
    }
}

/// Evaluates `f(0), f(1), ..., f(count - 1)` and returns the results in index order.
pub(crate) fn map_indexed<T, F>(mode: Parallelism, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return (0..count).into_par_iter().map(f).collect();
    }
    let _ = mode;
    (0..count).map(f).collect()
}
