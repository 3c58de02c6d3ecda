//! Entry accounting for live sign matrices.
//!
//! Every [`SignMatrix`](crate::SignMatrix) reports its entry count here on
//! construction, clone and drop. Counters and the size limit are kept per
//! thread so that concurrent test threads do not disturb each other's peaks.

use std::cell::Cell;

use crate::error::{Error, Result};

/// Default cap on the number of entries a single matrix may hold.
pub const DEFAULT_ENTRY_LIMIT: u64 = 1 << 26;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AllocationCounter {
    /// Entries held by live matrices.
    pub current_entries: u64,
    /// High-water mark of `current_entries`.
    pub peak_entries: u64,
    /// Sum of the sizes of every matrix ever constructed.
    pub allocated_entries: u64,
}

thread_local! {
    static COUNTER: Cell<AllocationCounter> = const { Cell::new(AllocationCounter {
        current_entries: 0,
        peak_entries: 0,
        allocated_entries: 0,
    }) };
    static LIMIT: Cell<u64> = const { Cell::new(DEFAULT_ENTRY_LIMIT) };
}

pub(crate) fn on_alloc(entries: usize) {
    COUNTER.with(|c| {
        let mut v = c.get();
        v.current_entries += entries as u64;
        v.allocated_entries += entries as u64;
        v.peak_entries = v.peak_entries.max(v.current_entries);
        c.set(v);
    });
}

pub(crate) fn on_free(entries: usize) {
    COUNTER.with(|c| {
        let mut v = c.get();
        v.current_entries = v.current_entries.saturating_sub(entries as u64);
        c.set(v);
    });
}

/// Snapshot of this thread's counters.
pub fn snapshot() -> AllocationCounter {
    COUNTER.with(Cell::get)
}

/// Runs `f` with fresh counters and returns what it allocated.
///
/// Matrices still owned by the returned value are counted in
/// `current_entries`. Nested calls are folded back into the enclosing
/// counter when they finish.
pub fn instrument<T>(f: impl FnOnce() -> T) -> (T, AllocationCounter) {
    let outer = COUNTER.with(|c| c.replace(AllocationCounter::default()));
    let out = f();
    let inner = COUNTER.with(Cell::get);
    let current = outer.current_entries + inner.current_entries;
    COUNTER.with(|c| {
        c.set(AllocationCounter {
            current_entries: current,
            peak_entries: outer
                .peak_entries
                .max(outer.current_entries + inner.peak_entries),
            allocated_entries: outer.allocated_entries + inner.allocated_entries,
        })
    });
    (out, inner)
}

/// Current per-matrix entry limit for this thread.
pub fn entry_limit() -> u64 {
    LIMIT.with(Cell::get)
}

/// Restores the previous limit when dropped.
#[must_use = "the limit is reset when the guard is dropped"]
pub struct LimitGuard {
    previous: u64,
}

impl Drop for LimitGuard {
    fn drop(&mut self) {
        LIMIT.with(|l| l.set(self.previous));
    }
}

/// Overrides the entry limit on this thread until the guard is dropped.
pub fn set_entry_limit(limit: u64) -> LimitGuard {
    let previous = LIMIT.with(|l| l.replace(limit));
    LimitGuard { previous }
}

/// Checks a prospective `rows × cols` allocation against the limit.
pub(crate) fn check_entries(rows: usize, cols: usize) -> Result<usize> {
    let requested = rows as u128 * cols as u128;
    check_count(requested).map(|n| n as usize)
}

pub(crate) fn check_count(requested: u128) -> Result<u128> {
    let limit = entry_limit();
    if requested > limit as u128 {
        return Err(Error::Resource { requested, limit });
    }
    Ok(requested)
}
