//! Bitset over item indices.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::error::{Error, Result};

/// Largest market size representable by an [`ItemSet`].
pub const MAX_ITEMS: usize = 64;

/// A subset of `{0, .., m-1}` stored as a 64-bit mask.
///
/// Also used for subsets of a coverage universe.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct ItemSet(u64);

impl ItemSet {
    pub const EMPTY: ItemSet = ItemSet(0);

    pub const fn from_bits(bits: u64) -> Self {
        ItemSet(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    /// All items of an `m`-item market.
    pub fn full(m: usize) -> Self {
        assert!(m <= MAX_ITEMS, "at most {MAX_ITEMS} items are supported");
        if m == MAX_ITEMS {
            ItemSet(u64::MAX)
        } else {
            ItemSet((1u64 << m) - 1)
        }
    }

    pub fn singleton(item: usize) -> Self {
        assert!(item < MAX_ITEMS);
        ItemSet(1u64 << item)
    }

    /// Builds a set from indices, rejecting any index `>= m`.
    pub fn from_items<I: IntoIterator<Item = usize>>(items: I, m: usize) -> Result<Self> {
        let mut bits = 0u64;
        for item in items {
            if item >= m || item >= MAX_ITEMS {
                return Err(Error::ItemOutOfRange { item, items: m });
            }
            bits |= 1u64 << item;
        }
        Ok(ItemSet(bits))
    }

    pub const fn contains(self, item: usize) -> bool {
        item < MAX_ITEMS && self.0 >> item & 1 == 1
    }

    pub fn insert(&mut self, item: usize) {
        assert!(item < MAX_ITEMS);
        self.0 |= 1u64 << item;
    }

    pub fn remove(&mut self, item: usize) {
        if item < MAX_ITEMS {
            self.0 &= !(1u64 << item);
        }
    }

    pub const fn union(self, other: ItemSet) -> ItemSet {
        ItemSet(self.0 | other.0)
    }

    pub const fn intersection(self, other: ItemSet) -> ItemSet {
        ItemSet(self.0 & other.0)
    }

    pub const fn difference(self, other: ItemSet) -> ItemSet {
        ItemSet(self.0 & !other.0)
    }

    pub const fn is_subset(self, other: ItemSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub const fn is_disjoint(self, other: ItemSet) -> bool {
        self.0 & other.0 == 0
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// One past the largest member, or 0 for the empty set.
    pub const fn span(self) -> usize {
        (u64::BITS - self.0.leading_zeros()) as usize
    }

    /// Members in ascending order.
    pub fn iter(self) -> Iter {
        Iter(self.0)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Every subset of `self`, starting with the empty set and ending with
    /// `self`, in increasing mask order.
    pub fn subsets(self) -> Subsets {
        Subsets {
            mask: self.0,
            next: Some(0),
        }
    }

    /// Canonical bundle order used for demand tie-breaking: fewer items
    /// first, then the lexicographically smaller ascending item sequence.
    pub fn canonical_cmp(self, other: ItemSet) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.iter().cmp(other.iter()))
    }
}

impl fmt::Debug for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (n, item) in self.iter().enumerate() {
            if n > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{item}")?;
        }
        f.write_str("}")
    }
}

impl IntoIterator for ItemSet {
    type Item = usize;
    type IntoIter = Iter;

    fn into_iter(self) -> Iter {
        self.iter()
    }
}

#[derive(Clone, Debug)]
pub struct Iter(u64);

impl Iterator for Iter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let item = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(item)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Iter {}

#[derive(Clone, Debug)]
pub struct Subsets {
    mask: u64,
    next: Option<u64>,
}

impl Iterator for Subsets {
    type Item = ItemSet;

    fn next(&mut self) -> Option<ItemSet> {
        let current = self.next?;
        self.next = if current == self.mask {
            None
        } else {
            // next submask in increasing numeric order
            Some((current.wrapping_sub(self.mask)) & self.mask)
        };
        Some(ItemSet(current))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use proptest::prelude::*;

    #[test]
    fn basic_set_algebra() {
        let a = ItemSet::from_items([0, 2], 4).unwrap();
        let b = ItemSet::from_items([2, 3], 4).unwrap();
        assert_eq!(a.union(b).to_vec(), [0, 2, 3]);
        assert_eq!(a.intersection(b).to_vec(), [2]);
        assert_eq!(a.difference(b).to_vec(), [0]);
        assert!(a.intersection(b).is_subset(a));
        assert_eq!(ItemSet::full(4).len(), 4);
        assert_eq!(ItemSet::full(64).len(), 64);
        assert_eq!(a.span(), 3);
        assert_eq!(format!("{a}"), "{0 2}");
    }

    #[test]
    fn out_of_range_item_is_rejected() {
        assert_eq!(
            ItemSet::from_items([1, 5], 3),
            Err(Error::ItemOutOfRange { item: 5, items: 3 })
        );
    }

    #[test]
    fn subsets_enumerates_power_set() {
        let s = ItemSet::from_items([1, 3, 4], 5).unwrap();
        let all: Vec<_> = s.subsets().collect();
        assert_eq!(all.len(), 8);
        assert_eq!(all[0], ItemSet::EMPTY);
        assert_eq!(*all.last().unwrap(), s);
        assert!(all.iter().all(|t| t.is_subset(s)));
        assert_eq!(ItemSet::EMPTY.subsets().count(), 1);
    }

    #[test]
    fn canonical_order_prefers_small_then_lexicographic() {
        let s = |v: &[usize]| ItemSet::from_items(v.iter().copied(), 8).unwrap();
        assert_eq!(s(&[5]).canonical_cmp(s(&[0, 1])), Ordering::Less);
        assert_eq!(s(&[0, 7]).canonical_cmp(s(&[1, 2])), Ordering::Less);
        assert_eq!(s(&[1, 2]).canonical_cmp(s(&[1, 3])), Ordering::Less);
        assert_eq!(ItemSet::EMPTY.canonical_cmp(s(&[0])), Ordering::Less);
    }

    proptest! {
        #[test]
        fn subsets_are_distinct_and_complete(bits in 0u64..(1 << 10)) {
            let s = ItemSet::from_bits(bits);
            let subs: Vec<_> = s.subsets().collect();
            prop_assert_eq!(subs.len(), 1usize << s.len());
            prop_assert!(subs.windows(2).all(|w| w[0].bits() < w[1].bits()));
        }
    }
}
