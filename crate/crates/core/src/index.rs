//! Index sets over an ordered basis, compared from the right.
//!
//! Everything keyed by a wedge monomial `dlog b_{i1} ^ ... ^ dlog b_{im}` or by
//! a square-free exponent pattern uses an `IndexSet`: a strictly increasing
//! list of basis positions. The order compares the largest positions first, so
//! adjoining a new top basis element (`x`, then a place `p`) keeps all older
//! sets below everything that mentions the new element.

use std::cmp::Ordering;
use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn empty() -> Self {
        IndexSet(Vec::new())
    }

    /// Builds a set from arbitrary positions, sorting and deduplicating.
    pub fn from_slice(ix: &[usize]) -> Self {
        let mut v = ix.to_vec();
        v.sort_unstable();
        v.dedup();
        IndexSet(v)
    }

    pub fn singleton(i: usize) -> Self {
        IndexSet(vec![i])
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    /// Largest position, named to stay clear of `Ord::max`.
    pub fn max_slot(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn insert(&self, i: usize) -> Self {
        let mut v = self.0.clone();
        if let Err(pos) = v.binary_search(&i) {
            v.insert(pos, i);
        }
        IndexSet(v)
    }

    pub fn remove(&self, i: usize) -> Self {
        let mut v = self.0.clone();
        if let Ok(pos) = v.binary_search(&i) {
            v.remove(pos);
        }
        IndexSet(v)
    }

    /// Symmetric difference; this is the sum of exponent patterns mod 2.
    pub fn sym_diff(&self, other: &Self) -> Self {
        let mut v = Vec::new();
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&x), Some(&&y)) if x == y => {
                    a.next();
                    b.next();
                }
                (Some(&&x), Some(&&y)) => {
                    if x < y {
                        v.push(x);
                        a.next();
                    } else {
                        v.push(y);
                        b.next();
                    }
                }
                (Some(&&x), None) => {
                    v.push(x);
                    a.next();
                }
                (None, Some(&&y)) => {
                    v.push(y);
                    b.next();
                }
                (None, None) => break,
            }
        }
        IndexSet(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    /// True when `self + other > other` in the right-to-left order, which
    /// happens exactly when the largest element of `self` is missing from
    /// `other` (and `self` is nonempty).
    pub fn shifts_up(&self, other: &Self) -> bool {
        match self.max_slot() {
            None => false,
            Some(m) => !other.contains(m),
        }
    }
}

impl Ord for IndexSet {
    fn cmp(&self, other: &Self) -> Ordering {
        // Right-to-left: the set whose largest differing element is present
        // is the bigger one. Comparing the reversed lists lexicographically
        // (shorter prefix = smaller) implements that.
        let mut a = self.0.iter().rev();
        let mut b = other.0.iter().rev();
        loop {
            match (a.next(), b.next()) {
                (Some(x), Some(y)) if x == y => continue,
                (Some(x), Some(y)) => return x.cmp(y),
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (None, None) => return Ordering::Equal,
            }
        }
    }
}

impl PartialOrd for IndexSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl FromIterator<usize> for IndexSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        let v: Vec<usize> = iter.into_iter().collect();
        IndexSet::from_slice(&v)
    }
}
