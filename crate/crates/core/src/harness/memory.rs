//! Approximate peak-allocation tracking.
//!
//! Binaries that want per-cell figures install [`CountingAlloc`] as the
//! global allocator. Counters are per thread, so work a cell hands to other
//! threads is not attributed to it. Without the allocator the resident set
//! from `/proc/self/statm` is sampled instead.

use std::alloc::{GlobalAlloc, Layout, System};
use std::cell::Cell;
use std::sync::atomic::{AtomicBool, Ordering};

pub struct CountingAlloc;

static INSTALLED: AtomicBool = AtomicBool::new(false);

thread_local! {
    static LIVE: Cell<isize> = const { Cell::new(0) };
    static PEAK: Cell<isize> = const { Cell::new(0) };
}

fn record(delta: isize) {
    let _ = LIVE.try_with(|live| {
        let now = live.get() + delta;
        live.set(now);
        let _ = PEAK.try_with(|peak| {
            if now > peak.get() {
                peak.set(now);
            }
        });
    });
}

unsafe impl GlobalAlloc for CountingAlloc {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let p = unsafe { System.alloc(layout) };
        if !p.is_null() {
            record(layout.size() as isize);
        }
        p
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        unsafe { System.dealloc(ptr, layout) };
        record(-(layout.size() as isize));
    }

    unsafe fn realloc(&self, ptr: *mut u8, layout: Layout, new_size: usize) -> *mut u8 {
        let p = unsafe { System.realloc(ptr, layout, new_size) };
        if !p.is_null() {
            record(new_size as isize - layout.size() as isize);
        }
        p
    }
}

impl CountingAlloc {
    /// Call once at startup so probes know the counters are live.
    pub fn mark_installed() {
        INSTALLED.store(true, Ordering::Relaxed);
    }
}

fn resident_bytes() -> Option<usize> {
    let text = std::fs::read_to_string("/proc/self/statm").ok()?;
    let pages: usize = text.split_whitespace().nth(1)?.parse().ok()?;
    Some(pages * 4096)
}

/// Snapshot taken before a measured region.
pub struct MemoryProbe {
    start: isize,
    rss_start: Option<usize>,
}

impl MemoryProbe {
    pub fn start() -> Self {
        let start = LIVE.with(Cell::get);
        PEAK.with(|p| p.set(start));
        MemoryProbe {
            start,
            rss_start: resident_bytes(),
        }
    }

    /// Peak growth since [`MemoryProbe::start`], in MiB.
    pub fn peak_mb(&self) -> f64 {
        let bytes = if INSTALLED.load(Ordering::Relaxed) {
            (PEAK.with(Cell::get) - self.start).max(0) as f64
        } else {
            match (self.rss_start, resident_bytes()) {
                (Some(a), Some(b)) => b.saturating_sub(a) as f64,
                _ => 0.0,
            }
        };
        bytes / (1024.0 * 1024.0)
    }
}
