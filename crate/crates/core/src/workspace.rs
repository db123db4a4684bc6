//! Fixed-capacity scoped bump allocator with high-watermark accounting.
//!
//! Streamed operations take every poly-sized buffer, staging buffer and
//! driver state block from a [`WorkArena`]. Scopes are strictly LIFO: a
//! scope's allocations are released when the [`Scope`] guard drops, and
//! only the innermost live scope may allocate. Because of that, sibling
//! scopes can never hold memory at the same time and the arena watermark of
//! an operation equals its driver allocations plus the largest pass peak.

use std::cell::{Cell, RefCell, UnsafeCell};
use std::collections::BTreeMap;
use std::fmt;
use std::mem::{align_of, size_of};

use bytemuck::Pod;
use thiserror::Error;

const ALIGN: usize = 8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArenaError {
    #[error("arena exhausted allocating {requested} bytes for `{label}` ({available} available)")]
    Exhausted {
        label: &'static str,
        requested: usize,
        available: usize,
    },
    #[error("LIFO violation: `{label}` used while a nested scope is live")]
    Lifo { label: &'static str },
}

/// What an allocation holds. Everything except [`AllocKind::State`] counts
/// toward the large-object watermark compared against streaming baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllocKind {
    Poly,
    Staging,
    Workspace,
    State,
}

impl AllocKind {
    fn is_large(self) -> bool {
        !matches!(self, AllocKind::State)
    }
}

#[derive(Debug)]
struct ActiveScope {
    path: String,
    start: usize,
    large_start: usize,
    peak: usize,
    large_peak: usize,
    entered: u64,
}

/// One completed scope instance, kept for the overlap audit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScopeSpan {
    pub path: String,
    pub entered: u64,
    pub exited: u64,
    pub offset: usize,
    pub peak: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct PeakStat {
    peak: usize,
    large_peak: usize,
    entries: u64,
}

pub struct WorkArena {
    mem: Box<[UnsafeCell<u64>]>,
    capacity: usize,
    cursor: Cell<usize>,
    large: Cell<usize>,
    padding: Cell<usize>,
    watermark: Cell<usize>,
    large_watermark: Cell<usize>,
    padding_peak: Cell<usize>,
    clock: Cell<u64>,
    active: RefCell<Vec<ActiveScope>>,
    peaks: RefCell<BTreeMap<String, PeakStat>>,
    spans: RefCell<Vec<ScopeSpan>>,
}

impl fmt::Debug for WorkArena {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WorkArena")
            .field("capacity", &self.capacity)
            .field("cursor", &self.cursor.get())
            .field("watermark", &self.watermark.get())
            .finish()
    }
}

impl WorkArena {
    pub fn with_capacity(bytes: usize) -> Self {
        let words = bytes.div_ceil(ALIGN);
        let mem = (0..words).map(|_| UnsafeCell::new(0u64)).collect::<Vec<_>>().into_boxed_slice();
        WorkArena {
            mem,
            capacity: words * ALIGN,
            cursor: Cell::new(0),
            large: Cell::new(0),
            padding: Cell::new(0),
            watermark: Cell::new(0),
            large_watermark: Cell::new(0),
            padding_peak: Cell::new(0),
            clock: Cell::new(0),
            active: RefCell::new(Vec::new()),
            peaks: RefCell::new(BTreeMap::new()),
            spans: RefCell::new(Vec::new()),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Bytes currently allocated.
    pub fn in_use(&self) -> usize {
        self.cursor.get()
    }

    /// Highest occupancy since construction or the last [`reset_stats`](Self::reset_stats).
    pub fn watermark(&self) -> usize {
        self.watermark.get()
    }

    /// Highest occupancy counting only poly, staging and workspace allocations.
    pub fn large_watermark(&self) -> usize {
        self.large_watermark.get()
    }

    /// Alignment padding live at the peak (reported separately from payload).
    pub fn padding_overhead(&self) -> usize {
        self.padding_peak.get()
    }

    /// Clears watermarks and per-scope statistics. Must be called with no live scope.
    pub fn reset_stats(&self) {
        debug_assert!(self.active.borrow().is_empty());
        self.watermark.set(self.cursor.get());
        self.large_watermark.set(self.large.get());
        self.padding_peak.set(self.padding.get());
        self.peaks.borrow_mut().clear();
        self.spans.borrow_mut().clear();
    }

    /// Opens a top-level scope. Fails if another scope is live.
    pub fn scope(&self, label: &'static str) -> Result<Scope<'_>, ArenaError> {
        if !self.active.borrow().is_empty() {
            return Err(ArenaError::Lifo { label });
        }
        Ok(self.enter(label.to_owned(), label))
    }

    fn enter(&self, path: String, label: &'static str) -> Scope<'_> {
        let tick = self.tick();
        let mut active = self.active.borrow_mut();
        active.push(ActiveScope {
            path,
            start: self.cursor.get(),
            large_start: self.large.get(),
            peak: 0,
            large_peak: 0,
            entered: tick,
        });
        Scope {
            arena: self,
            depth: active.len(),
            label,
            saved_cursor: self.cursor.get(),
            saved_large: self.large.get(),
            saved_padding: self.padding.get(),
        }
    }

    fn tick(&self) -> u64 {
        let t = self.clock.get() + 1;
        self.clock.set(t);
        t
    }

    fn innermost(&self) -> usize {
        self.active.borrow().len()
    }

    fn bump(&self, bytes: usize, kind: AllocKind, label: &'static str) -> Result<*mut u8, ArenaError> {
        let padded = bytes.div_ceil(ALIGN) * ALIGN;
        let cursor = self.cursor.get();
        let available = self.capacity - cursor;
        if padded > available {
            return Err(ArenaError::Exhausted { label, requested: padded, available });
        }
        // SAFETY: `cursor + padded <= capacity`, and [cursor, cursor + padded)
        // is not handed out to any live allocation (bump discipline).
        let ptr = unsafe {
            let base = UnsafeCell::raw_get(self.mem.as_ptr()) as *mut u8;
            let p = base.add(cursor);
            std::ptr::write_bytes(p, 0, padded);
            p
        };
        self.cursor.set(cursor + padded);
        self.padding.set(self.padding.get() + padded - bytes);
        if kind.is_large() {
            self.large.set(self.large.get() + padded);
        }
        if self.cursor.get() > self.watermark.get() {
            self.watermark.set(self.cursor.get());
            self.padding_peak.set(self.padding.get());
        }
        self.large_watermark.set(self.large_watermark.get().max(self.large.get()));
        for s in self.active.borrow_mut().iter_mut() {
            s.peak = s.peak.max(self.cursor.get() - s.start);
            s.large_peak = s.large_peak.max(self.large.get() - s.large_start);
        }
        Ok(ptr)
    }

    /// Per-scope peak table.
    pub fn report(&self) -> ArenaReport {
        let rows = self
            .peaks
            .borrow()
            .iter()
            .map(|(path, s)| ScopeRow {
                label: path.rsplit('/').next().unwrap_or(path).to_owned(),
                scope_path: path.clone(),
                bytes_peak: s.peak,
                large_peak: s.large_peak,
                entries: s.entries,
            })
            .collect();
        ArenaReport {
            watermark: self.watermark(),
            large_watermark: self.large_watermark(),
            padding: self.padding_overhead(),
            rows,
        }
    }

    /// Completed scope instances in the order they were exited.
    pub fn spans(&self) -> Vec<ScopeSpan> {
        self.spans.borrow().clone()
    }

    /// Pairs of scope instances whose labels are both in `labels` and whose
    /// lifetimes overlapped.
    pub fn overlapping(&self, labels: &[&str]) -> Vec<(ScopeSpan, ScopeSpan)> {
        let spans = self.spans.borrow();
        let picked: Vec<&ScopeSpan> = spans
            .iter()
            .filter(|s| labels.iter().any(|l| s.path.rsplit('/').next() == Some(*l)))
            .collect();
        let mut out = Vec::new();
        for (i, a) in picked.iter().enumerate() {
            for b in &picked[i + 1..] {
                if a.entered < b.exited && b.entered < a.exited {
                    out.push(((*a).clone(), (*b).clone()));
                }
            }
        }
        out
    }
}

/// LIFO scope guard. Allocations borrow the guard and are released on drop.
pub struct Scope<'a> {
    arena: &'a WorkArena,
    depth: usize,
    label: &'static str,
    saved_cursor: usize,
    saved_large: usize,
    saved_padding: usize,
}

impl<'a> Scope<'a> {
    pub fn label(&self) -> &'static str {
        self.label
    }

    pub fn arena(&self) -> &'a WorkArena {
        self.arena
    }

    fn check_innermost(&self, label: &'static str) -> Result<(), ArenaError> {
        if self.arena.innermost() != self.depth {
            return Err(ArenaError::Lifo { label });
        }
        Ok(())
    }

    /// Opens a nested scope; this scope may not allocate until it closes.
    pub fn scope(&self, label: &'static str) -> Result<Scope<'_>, ArenaError> {
        self.check_innermost(label)?;
        let path = format!("{}/{label}", self.arena.active.borrow()[self.depth - 1].path);
        Ok(self.arena.enter(path, label))
    }

    /// Zeroed slice of `count` values.
    #[allow(clippy::mut_from_ref)]
    pub fn alloc_slice<T: Pod>(&self, count: usize, kind: AllocKind, label: &'static str) -> Result<&mut [T], ArenaError> {
        const { assert!(align_of::<T>() <= ALIGN) };
        self.check_innermost(label)?;
        let ptr = self.arena.bump(size_of::<T>() * count, kind, label)?;
        // SAFETY: the region is fresh, zeroed (a valid `T` for `Pod`), aligned
        // to 8 bytes, exclusive to this borrow, and released only when `self`
        // drops, which the returned lifetime forbids while it is in use.
        Ok(unsafe { std::slice::from_raw_parts_mut(ptr as *mut T, count) })
    }

    /// Zeroed single value.
    #[allow(clippy::mut_from_ref)]
    pub fn alloc<T: Pod>(&self, kind: AllocKind, label: &'static str) -> Result<&mut T, ArenaError> {
        let slice = self.alloc_slice::<T>(1, kind, label)?;
        Ok(&mut slice[0])
    }
}

impl Drop for Scope<'_> {
    fn drop(&mut self) {
        let arena = self.arena;
        let exited = arena.tick();
        let scope = {
            let mut active = arena.active.borrow_mut();
            debug_assert_eq!(active.len(), self.depth, "scope dropped out of order");
            active.pop()
        };
        arena.cursor.set(self.saved_cursor);
        arena.large.set(self.saved_large);
        arena.padding.set(self.saved_padding);
        if let Some(s) = scope {
            let mut peaks = arena.peaks.borrow_mut();
            let stat = peaks.entry(s.path.clone()).or_default();
            stat.peak = stat.peak.max(s.peak);
            stat.large_peak = stat.large_peak.max(s.large_peak);
            stat.entries += 1;
            arena.spans.borrow_mut().push(ScopeSpan {
                path: s.path,
                entered: s.entered,
                exited,
                offset: s.start,
                peak: s.peak,
            });
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScopeRow {
    pub label: String,
    pub scope_path: String,
    /// Peak bytes held by the scope and its descendants.
    pub bytes_peak: usize,
    /// Same, excluding driver state blocks.
    pub large_peak: usize,
    pub entries: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArenaReport {
    pub watermark: usize,
    pub large_watermark: usize,
    pub padding: usize,
    pub rows: Vec<ScopeRow>,
}

impl ArenaReport {
    pub fn row(&self, scope_path: &str) -> Option<&ScopeRow> {
        self.rows.iter().find(|r| r.scope_path == scope_path)
    }

    /// `label,bytes_peak,scope_path` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,bytes_peak,scope_path\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.label, r.bytes_peak, r.scope_path));
        }
        out
    }
}

impl fmt::Display for ArenaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<28} {:>10} {:>10} {:>8}", "scope", "peak", "large", "entries")?;
        for r in &self.rows {
            writeln!(f, "{:<28} {:>10} {:>10} {:>8}", r.scope_path, r.bytes_peak, r.large_peak, r.entries)?;
        }
        writeln!(f, "watermark {} B (large objects {} B, alignment padding {} B)", self.watermark, self.large_watermark, self.padding)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_alloc() {
        let arena = WorkArena::with_capacity(8192);
        {
            let s = arena.scope("op").unwrap();
            let buf = s.alloc_slice::<u8>(1024, AllocKind::Poly, "p").unwrap();
            assert_eq!(buf.len(), 1024);
            assert_eq!(arena.in_use(), 1024);
        }
        assert_eq!(arena.in_use(), 0);
        assert_eq!(arena.watermark(), 1024 + arena.padding_overhead());
        assert_eq!(arena.padding_overhead(), 0);
    }

    #[test]
    fn siblings_count_max() {
        let arena = WorkArena::with_capacity(8192);
        let root = arena.scope("op").unwrap();
        for label in ["a", "b"] {
            let s = root.scope(label).unwrap();
            s.alloc_slice::<u8>(1024, AllocKind::Poly, "p").unwrap();
        }
        drop(root);
        assert_eq!(arena.watermark(), 1024);
        assert!(arena.overlapping(&["a", "b"]).is_empty());
    }

    #[test]
    fn nested_counts_sum() {
        let arena = WorkArena::with_capacity(8192);
        let root = arena.scope("op").unwrap();
        {
            let a = root.scope("a").unwrap();
            a.alloc_slice::<u8>(1024, AllocKind::Poly, "p").unwrap();
            let b = a.scope("b").unwrap();
            b.alloc_slice::<u8>(2048, AllocKind::Workspace, "w").unwrap();
        }
        drop(root);
        assert_eq!(arena.watermark(), 3072);
        let rep = arena.report();
        assert_eq!(rep.row("op/a").unwrap().bytes_peak, 3072);
        assert_eq!(rep.row("op/a/b").unwrap().bytes_peak, 2048);
    }

    #[test]
    fn padding_reported() {
        let arena = WorkArena::with_capacity(64);
        let s = arena.scope("op").unwrap();
        s.alloc_slice::<u8>(3, AllocKind::State, "x").unwrap();
        drop(s);
        assert_eq!(arena.watermark(), 8);
        assert_eq!(arena.padding_overhead(), 5);
        assert_eq!(arena.large_watermark(), 0);
    }

    #[test]
    fn exhausted() {
        let arena = WorkArena::with_capacity(1024);
        let s = arena.scope("op").unwrap();
        s.alloc_slice::<u8>(1000, AllocKind::Poly, "a").unwrap();
        let err = s.alloc_slice::<u8>(100, AllocKind::Poly, "b").unwrap_err();
        assert!(matches!(err, ArenaError::Exhausted { label: "b", .. }));
    }

    #[test]
    fn parent_cannot_allocate_under_child() {
        let arena = WorkArena::with_capacity(4096);
        let root = arena.scope("op").unwrap();
        let child = root.scope("c").unwrap();
        assert_eq!(root.alloc_slice::<u8>(8, AllocKind::Poly, "x").unwrap_err(), ArenaError::Lifo { label: "x" });
        assert!(root.scope("d").is_err());
        assert!(arena.scope("other").is_err());
        drop(child);
        assert!(root.alloc_slice::<u8>(8, AllocKind::Poly, "x").is_ok());
    }

    #[test]
    fn memory_is_zeroed_on_reuse() {
        let arena = WorkArena::with_capacity(64);
        {
            let s = arena.scope("a").unwrap();
            s.alloc_slice::<u32>(4, AllocKind::Poly, "x").unwrap().fill(7);
        }
        let s = arena.scope("b").unwrap();
        assert!(s.alloc_slice::<u32>(4, AllocKind::Poly, "x").unwrap().iter().all(|&v| v == 0));
    }

    #[test]
    fn csv_schema() {
        let arena = WorkArena::with_capacity(4096);
        {
            let root = arena.scope("sign").unwrap();
            root.scope("passA").unwrap().alloc_slice::<u8>(16, AllocKind::Poly, "y").unwrap();
        }
        let csv = arena.report().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("label,bytes_peak,scope_path"));
        assert!(csv.contains("passA,16,sign/passA"));
    }
}
