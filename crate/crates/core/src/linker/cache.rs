use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use super::{normalize, AlignmentBackend, EntityLink, LinkError, TargetKg};
use crate::functions::FunctionCategory;

type Key = (FunctionCategory, TargetKg, String);
type Slot = Arc<Mutex<Option<Vec<EntityLink>>>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CacheStats {
    pub hits: usize,
    /// Requests forwarded to the inner backend.
    pub misses: usize,
}

/// Memoizes a backend on (category, kg, normalized input).
///
/// The inner backend receives the normalized text. Concurrent requests for
/// the same key wait on a per-key lock, so each key reaches the inner
/// backend at most once unless that call fails; failures are not cached.
pub struct CachedBackend<B> {
    inner: B,
    slots: Mutex<HashMap<Key, Slot>>,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl<B: AlignmentBackend> CachedBackend<B> {
    pub fn new(inner: B) -> Self {
        CachedBackend {
            inner,
            slots: Mutex::new(HashMap::new()),
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
        }
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats { hits: self.hits.load(Ordering::SeqCst), misses: self.misses.load(Ordering::SeqCst) }
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }
}

impl<B: AlignmentBackend> AlignmentBackend for CachedBackend<B> {
    fn align(&self, category: FunctionCategory, text: &str, kg: TargetKg) -> Result<Vec<EntityLink>, LinkError> {
        let normalized = normalize(text);
        let slot = {
            let mut slots = self.slots.lock().unwrap_or_else(|e| e.into_inner());
            slots.entry((category, kg, normalized.clone())).or_default().clone()
        };
        let mut guard = slot.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(links) = guard.as_ref() {
            self.hits.fetch_add(1, Ordering::SeqCst);
            return Ok(links.clone());
        }
        self.misses.fetch_add(1, Ordering::SeqCst);
        let links = self.inner.align(category, &normalized, kg)?;
        *guard = Some(links.clone());
        Ok(links)
    }
}
