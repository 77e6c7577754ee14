//! File formats, the program generator and the reports behind the `qalloc`
//! command.

pub mod fuzz;
pub mod report;
pub mod syntax;

/// Stack size for threads running the checkers, the allocator or the
/// interpreters. Every pass recurses once per nesting level, and
/// straight-line code nests one level per statement, so a program at
/// [`syntax::MAX_NESTING`] needs far more than the 2 MiB default. The
/// reservation is virtual; untouched pages cost nothing.
pub const PIPELINE_STACK: usize = 256 << 20;

/// Runs `f` on a scoped thread with [`PIPELINE_STACK`] bytes of stack.
pub fn with_pipeline_stack<T, F>(f: F) -> T
where
    F: FnOnce() -> T + Send,
    T: Send,
{
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .name("qalloc-pipeline".into())
            .stack_size(PIPELINE_STACK)
            .spawn_scoped(s, f)
            .expect("spawning the pipeline thread")
            .join()
            .unwrap_or_else(|e| std::panic::resume_unwind(e))
    })
}
