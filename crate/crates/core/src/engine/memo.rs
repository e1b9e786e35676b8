use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use parking_lot::RwLock;

use crate::algebra::CanonicalKey;

type MemoKey = (CanonicalKey, usize);

/// Memo of `⟨φ^p ũ^p̃⟩^(n)` coefficient vectors keyed by canonical monomial
/// and truncation order.
#[derive(Debug, Default)]
pub struct MemoCache {
    map: RwLock<HashMap<MemoKey, Arc<[f64]>>>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl MemoCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &CanonicalKey, n: usize) -> Option<Arc<[f64]>> {
        // the lookup key is rebuilt only on the read path
        let found = self.map.read().get(&(key.clone(), n)).cloned();
        if found.is_some() {
            self.hits.fetch_add(1, Ordering::Relaxed);
        } else {
            self.misses.fetch_add(1, Ordering::Relaxed);
        }
        found
    }

    pub fn insert(&self, key: CanonicalKey, n: usize, value: Arc<[f64]>) {
        self.map.write().entry((key, n)).or_insert(value);
    }

    pub fn len(&self) -> usize {
        self.map.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn clear(&self) {
        self.map.write().clear();
        self.hits.store(0, Ordering::Relaxed);
        self.misses.store(0, Ordering::Relaxed);
    }

    /// `(hits, misses)` since creation or the last [`clear`](Self::clear).
    pub fn stats(&self) -> (u64, u64) {
        (self.hits.load(Ordering::Relaxed), self.misses.load(Ordering::Relaxed))
    }
}
