//! Constructive checks around lower bounds for two-color Folkman numbers.
//!
//! * [`sumset`]: finite-sum sets `S(A)`, sum-distinctness, odd parts and
//!   least-element transversals.
//! * [`coloring`]: uniform and doubling colorings, exact monochromatic
//!   probabilities.
//! * [`verifier`]: witness search over a fixed coloring.
//! * [`bounds`]: the certified floor `⌊2^(2^(k-1)/k)⌋` and the first-moment table.
//! * [`search`]: exact `F(k)` for tiny `k`, DIMACS export and model import.

mod bitset;
pub mod bounds;
pub mod coloring;
pub mod error;
pub mod search;
pub mod sumset;
pub mod verifier;

pub use error::{Error, Result};

/// Runs `f` on a dedicated pool of `threads` workers (`0` = rayon default).
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}
