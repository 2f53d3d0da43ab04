//! Subsets of a finite universe `{0, .., n-1}`.

use std::fmt;

use fixedbitset::FixedBitSet;

/// A subset of a fixed-size universe of item indices.
///
/// The encoding is canonical (one bit per universe item), so two sets compare
/// equal and hash identically iff they contain the same items. Universes of
/// up to 64 items can round-trip through a `u64` mask.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ItemSet {
    bits: FixedBitSet,
}

impl ItemSet {
    pub fn empty(universe: usize) -> Self {
        ItemSet {
            bits: FixedBitSet::with_capacity(universe),
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(universe);
        bits.insert_range(..);
        ItemSet { bits }
    }

    /// Panics if an item is outside the universe; use
    /// [`GroundSet::set_of`](crate::GroundSet::set_of) for checked construction.
    pub fn from_items<I: IntoIterator<Item = usize>>(universe: usize, items: I) -> Self {
        let mut s = Self::empty(universe);
        for v in items {
            s.insert(v);
        }
        s
    }

    pub fn from_mask(universe: usize, mask: u64) -> Self {
        debug_assert!(universe <= 64);
        let mut s = Self::empty(universe);
        let mut m = mask;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            s.insert(v);
            m &= m - 1;
        }
        s
    }

    /// The set as a bitmask, for universes of at most 64 items.
    pub fn mask(&self) -> Option<u64> {
        if self.universe() > 64 {
            return None;
        }
        Some(self.bits.as_slice().first().map_or(0, |&w| w as u64))
    }

    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.bits.contains(v)
    }

    pub fn insert(&mut self, v: usize) {
        self.bits.insert(v);
    }

    pub fn remove(&mut self, v: usize) {
        self.bits.set(v, false);
    }

    /// Copy with `v` added.
    pub fn with(&self, v: usize) -> Self {
        let mut s = self.clone();
        s.insert(v);
        s
    }

    pub fn union(&self, other: &ItemSet) -> Self {
        let mut s = self.clone();
        s.bits.union_with(&other.bits);
        s
    }

    pub fn intersection(&self, other: &ItemSet) -> Self {
        let mut s = self.clone();
        s.bits.intersect_with(&other.bits);
        s
    }

    pub fn difference(&self, other: &ItemSet) -> Self {
        let mut s = self.clone();
        s.bits.difference_with(&other.bits);
        s
    }

    pub fn is_subset(&self, other: &ItemSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    /// Items in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Debug for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl serde::Serialize for ItemSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}
