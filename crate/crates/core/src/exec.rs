//! Data-parallel helpers with a sequential fallback.
//!
//! All parallel sections in the crate go through [`map_indexed`] or
//! [`try_map_indexed`]. Results are always collected in index order, so any
//! reduction done afterwards sees the same operand order whatever the
//! thread count. With the `parallel` feature disabled, or with
//! [`Execution::Sequential`] selected at run time, the same closures run on
//! the calling thread.

use std::sync::atomic::{AtomicU8, Ordering};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

static MODE: AtomicU8 = AtomicU8::new(1);

/// Selects how subsequent parallel sections run. Without the `parallel`
/// feature this is recorded but has no effect.
pub fn set_execution(mode: Execution) {
    MODE.store(mode as u8, Ordering::Relaxed);
    sync_linalg();
}

/// Keeps the dense linear algebra backend in the same mode as the loops.
fn sync_linalg() {
    #[cfg(feature = "parallel")]
    faer::set_global_parallelism(match execution() {
        Execution::Parallel => faer::Par::rayon(0),
        Execution::Sequential => faer::Par::Seq,
    });
}

pub fn execution() -> Execution {
    if cfg!(feature = "parallel") && MODE.load(Ordering::Relaxed) == Execution::Parallel as u8 {
        Execution::Parallel
    } else {
        Execution::Sequential
    }
}

/// Runs `f` with the given execution mode and restores the previous one.
pub fn with_execution<R>(mode: Execution, f: impl FnOnce() -> R) -> R {
    let previous = MODE.swap(mode as u8, Ordering::Relaxed);
    sync_linalg();
    let out = f();
    MODE.store(previous, Ordering::Relaxed);
    sync_linalg();
    out
}

pub fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if execution() == Execution::Parallel {
        use rayon::prelude::*;
        return (0..len).into_par_iter().map(f).collect();
    }
    (0..len).map(f).collect()
}

pub fn try_map_indexed<T, E, F>(len: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if execution() == Execution::Parallel {
        use rayon::prelude::*;
        return (0..len).into_par_iter().map(f).collect();
    }
    (0..len).map(f).collect()
}
