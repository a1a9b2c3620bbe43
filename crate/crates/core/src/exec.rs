//! Order-preserving fan-out of independent runs.
//!
//! With the `parallel` feature the work is spread over rayon's pool; without
//! it, or in [`ExecMode::Sequential`], it runs on the calling thread. Results
//! come back in index order either way, so nothing downstream can tell the
//! difference.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    Sequential,
    #[default]
    Parallel,
}

/// `f(0), f(1), …, f(n-1)` in order.
pub fn map_indexed<R, F>(n: usize, mode: ExecMode, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}
