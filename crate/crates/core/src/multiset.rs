//! Ordered multisets backed by `BTreeMap`, used for sequent contexts.
//!
//! Sequent zones are multisets: the same formula may occur several times and
//! occurrences are indistinguishable. Keeping the keys ordered makes every
//! printed context and every iteration order deterministic.

use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Multiset<T: Ord> {
    counts: BTreeMap<T, usize>,
}

impl<T: Ord> Default for Multiset<T> {
    fn default() -> Self {
        Multiset {
            counts: BTreeMap::new(),
        }
    }
}

impl<T: Ord + Clone> Multiset<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(x: T) -> Self {
        let mut m = Self::new();
        m.insert(x);
        m
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Total number of occurrences.
    pub fn len(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn count(&self, x: &T) -> usize {
        self.counts.get(x).copied().unwrap_or(0)
    }

    pub fn contains(&self, x: &T) -> bool {
        self.count(x) > 0
    }

    pub fn insert(&mut self, x: T) {
        *self.counts.entry(x).or_insert(0) += 1;
    }

    pub fn insert_n(&mut self, x: T, n: usize) {
        if n > 0 {
            *self.counts.entry(x).or_insert(0) += n;
        }
    }

    /// Removes one occurrence in place; false if absent.
    pub fn remove_one(&mut self, x: &T) -> bool {
        match self.counts.get_mut(x) {
            Some(c) if *c > 1 => {
                *c -= 1;
                true
            }
            Some(_) => {
                self.counts.remove(x);
                true
            }
            None => false,
        }
    }

    /// A copy with one occurrence of `x` removed, or None if absent.
    pub fn minus_one(&self, x: &T) -> Option<Self> {
        if !self.contains(x) {
            return None;
        }
        let mut m = self.clone();
        m.remove_one(x);
        Some(m)
    }

    /// A copy with `k` occurrences of `x` removed, or None if fewer are present.
    pub fn minus_n(&self, x: &T, k: usize) -> Option<Self> {
        if self.count(x) < k {
            return None;
        }
        let mut m = self.clone();
        for _ in 0..k {
            m.remove_one(x);
        }
        Some(m)
    }

    /// A copy with every occurrence of `x` removed.
    pub fn minus_all(&self, x: &T) -> Self {
        let mut m = self.clone();
        m.counts.remove(x);
        m
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut m = self.clone();
        for (x, n) in &other.counts {
            m.insert_n(x.clone(), *n);
        }
        m
    }

    /// Multiset difference `self − other`; None unless `other ⊆ self`.
    pub fn minus(&self, other: &Self) -> Option<Self> {
        let mut m = self.clone();
        for (x, n) in &other.counts {
            if m.count(x) < *n {
                return None;
            }
            for _ in 0..*n {
                m.remove_one(x);
            }
        }
        Some(m)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.counts.iter().all(|(x, n)| other.count(x) >= *n)
    }

    /// Iterates occurrences, repeating each element by its multiplicity.
    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.counts
            .iter()
            .flat_map(|(x, n)| std::iter::repeat(x).take(*n))
    }

    /// Iterates distinct elements once each.
    pub fn distinct(&self) -> impl Iterator<Item = &T> {
        self.counts.keys()
    }

    pub fn counts(&self) -> impl Iterator<Item = (&T, usize)> {
        self.counts.iter().map(|(x, n)| (x, *n))
    }
}

impl<T: Ord + Clone> FromIterator<T> for Multiset<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut m = Self::new();
        for x in iter {
            m.insert(x);
        }
        m
    }
}

impl<T: Ord + Clone + fmt::Display> fmt::Display for Multiset<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for x in self.iter() {
            if !first {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
            first = false;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn union_and_minus_are_inverse() {
        let a: Multiset<u32> = [1, 1, 2].into_iter().collect();
        let b: Multiset<u32> = [1, 3].into_iter().collect();
        let u = a.union(&b);
        assert_eq!(u.len(), 5);
        assert_eq!(u.minus(&b), Some(a.clone()));
        assert_eq!(u.minus(&a), Some(b));
        assert!(a.minus(&u).is_none());
    }

    #[test]
    fn occurrence_counting() {
        let mut m: Multiset<&str> = Multiset::new();
        m.insert("p");
        m.insert("p");
        assert_eq!(m.count(&"p"), 2);
        assert!(m.remove_one(&"p"));
        assert_eq!(m.count(&"p"), 1);
        assert_eq!(m.minus_all(&"p").len(), 0);
        assert!(m.minus_n(&"p", 2).is_none());
    }
}
