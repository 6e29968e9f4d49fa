//! Sets of variable indices stored as 64-bit masks. Also used as monomial keys.

use std::fmt;

pub const MAX_VARS: usize = 64;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct VarSet(pub u64);

impl VarSet {
    pub const EMPTY: VarSet = VarSet(0);

    pub fn full(n: usize) -> VarSet {
        assert!(n <= MAX_VARS);
        if n == MAX_VARS {
            VarSet(u64::MAX)
        } else {
            VarSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> VarSet {
        assert!(i < MAX_VARS, "variable index {i} too large");
        VarSet(1u64 << i)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> VarSet {
        it.into_iter()
            .fold(VarSet::EMPTY, |s, i| s | VarSet::singleton(i))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        i < MAX_VARS && self.0 >> i & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        *self = *self | VarSet::singleton(i);
    }

    pub fn remove(&mut self, i: usize) {
        if i < MAX_VARS {
            self.0 &= !(1u64 << i);
        }
    }

    pub fn is_subset(self, other: VarSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: VarSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn max_index(self) -> Option<usize> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros() as usize)
    }

    /// Indices in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(i)
        })
    }

    /// All subsets, in increasing mask order, starting with the empty set.
    pub fn subsets(self) -> impl Iterator<Item = VarSet> {
        let full = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let cur = next?;
            let succ = cur.wrapping_sub(full) & full;
            next = (succ != 0).then_some(succ);
            Some(VarSet(cur))
        })
    }

    pub fn subsets_of_size(self, k: usize) -> impl Iterator<Item = VarSet> {
        self.subsets().filter(move |s| s.len() == k)
    }

    /// The `k` smallest indices of the set.
    pub fn lowest(self, k: usize) -> VarSet {
        VarSet::from_indices(self.iter().take(k))
    }
}

impl std::ops::BitOr for VarSet {
    type Output = VarSet;
    fn bitor(self, o: VarSet) -> VarSet {
        VarSet(self.0 | o.0)
    }
}

impl std::ops::BitAnd for VarSet {
    type Output = VarSet;
    fn bitand(self, o: VarSet) -> VarSet {
        VarSet(self.0 & o.0)
    }
}

impl std::ops::Sub for VarSet {
    type Output = VarSet;
    fn sub(self, o: VarSet) -> VarSet {
        VarSet(self.0 & !o.0)
    }
}

impl FromIterator<usize> for VarSet {
    fn from_iter<I: IntoIterator<Item = usize>>(it: I) -> Self {
        VarSet::from_indices(it)
    }
}

impl fmt::Debug for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_enumerate_everything_once() {
        let s = VarSet::from_indices([1, 4, 5]);
        let subs: Vec<_> = s.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert_eq!(subs[0], VarSet::EMPTY);
        assert!(subs.windows(2).all(|w| w[0] < w[1]));
        assert!(subs.iter().all(|t| t.is_subset(s)));
        assert_eq!(VarSet::EMPTY.subsets().count(), 1);
    }

    #[test]
    fn basic_set_ops() {
        let a = VarSet::from_indices([0, 2, 3]);
        let b = VarSet::from_indices([2, 7]);
        assert_eq!((a | b).len(), 4);
        assert_eq!(a & b, VarSet::singleton(2));
        assert_eq!(a - b, VarSet::from_indices([0, 3]));
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![0, 2, 3]);
        assert_eq!(a.lowest(2), VarSet::from_indices([0, 2]));
        assert_eq!(b.max_index(), Some(7));
        assert_eq!(format!("{a}"), "{1,3,4}");
    }
}
