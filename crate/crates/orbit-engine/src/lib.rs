//! Orbit classification, the `u_n` probe and a Fubini–Study normality probe.

mod classify;
mod probe;
mod slice;

pub use classify::{classify, ClassifyParams, EscapeClass, OrbitRecord};
pub use probe::{equicontinuity_probe, equicontinuity_profile, psh_probe, PshField};
pub use slice::SliceGrid;

/// Run `job` on a dedicated pool of `workers` threads (`0` means the rayon default).
///
/// Everything in this workspace collects parallel results by index, so the
/// output never depends on the worker count.
pub fn with_workers<R: Send>(workers: usize, job: impl FnOnce() -> R + Send) -> R {
    if workers == 0 {
        return job();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool")
        .install(job)
}
