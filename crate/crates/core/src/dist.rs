//! Discrete probability distributions over ordered keys.

use alloc::string::String;
use alloc::vec::Vec;

/// Tolerance used when checking that probabilities sum to one.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// A finite distribution, stored sorted by key with unique keys.
///
/// Key order doubles as the tie-breaking order everywhere: for string
/// tokens it is lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<K = String> {
    entries: Vec<(K, f64)>,
}

impl<K: Ord + Clone> Distribution<K> {
    /// Builds a distribution from `(key, weight)` pairs, summing duplicate
    /// keys and normalizing. Returns `None` if the total weight is not a
    /// positive finite number or any weight is negative.
    pub fn from_weights(pairs: impl IntoIterator<Item = (K, f64)>) -> Option<Self> {
        let mut entries: Vec<(K, f64)> = pairs.into_iter().collect();
        if entries.iter().any(|(_, w)| !(w.is_finite() && *w >= 0.0)) {
            return None;
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        entries.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        let total: f64 = entries.iter().map(|e| e.1).sum();
        if !(total.is_finite() && total > 0.0) {
            return None;
        }
        for e in &mut entries {
            e.1 /= total;
        }
        Some(Self { entries })
    }

    /// Wraps pairs that are already sorted, unique and normalized.
    pub(crate) fn from_sorted_unchecked(entries: Vec<(K, f64)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        Self { entries }
    }

    pub fn point_mass(key: K) -> Self {
        Self { entries: alloc::vec![(key, 1.0)] }
    }

    pub fn entries(&self) -> &[(K, f64)] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<(K, f64)> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn prob(&self, key: &K) -> f64 {
        match self.entries.binary_search_by(|e| e.0.cmp(key)) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0.0,
        }
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn is_normalized(&self) -> bool {
        self.entries.iter().all(|e| e.1 >= 0.0 && e.1.is_finite())
            && (self.total() - 1.0).abs() <= NORMALIZATION_TOLERANCE
    }

    /// Highest-probability key; ties go to the smallest key.
    pub fn argmax(&self) -> Option<&K> {
        let mut best: Option<&(K, f64)> = None;
        for e in &self.entries {
            match best {
                Some(b) if e.1 <= b.1 => {}
                _ => best = Some(e),
            }
        }
        best.map(|b| &b.0)
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.1 > 0.0)
            .map(|e| -e.1 * libm::log(e.1))
            .sum()
    }

    /// Same probabilities over different keys. `f` must preserve key order.
    pub fn map_keys<J: Ord + Clone>(self, mut f: impl FnMut(K) -> J) -> Distribution<J> {
        let entries: Vec<(J, f64)> = self.entries.into_iter().map(|(k, p)| (f(k), p)).collect();
        Distribution::from_sorted_unchecked(entries)
    }
}
