//! Ensemble verification, the binegative-state search and plane sections.
//!
//! Every sample is keyed by `(seed, index)` and results are reduced in index
//! order, so reports do not depend on the number of worker threads.

mod search;
mod section;
mod verify;

pub use search::{reverify_exemplar, search_binegative, search_binegative_with, Exemplar, SearchRecord, BINEGATIVE_THRESHOLD};
pub use section::{cross_section, default_plane, Cell, CellClass, Plane, SectionGrid};
pub use verify::{
    verify_ensemble, Counts, SampleOutcome, VerificationReport, Violation, WorstMargin, WorstMargins,
};

use rayon::prelude::*;

/// `f(0..count)` evaluated in parallel, returned in index order.
pub(crate) fn map_indexed<R: Send>(count: usize, f: impl Fn(usize) -> R + Sync + Send) -> Vec<R> {
    (0..count).into_par_iter().map(f).collect()
}

/// Runs `f` on a dedicated pool with `threads` workers.
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("thread pool")
        .install(f)
}
