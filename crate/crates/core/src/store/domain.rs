//! Integer domains stored as sorted, disjoint, non-adjacent closed intervals.

use std::fmt;

/// A finite set of integers.
///
/// Domains are kept as a normalized interval list so that wide ranges such as
/// the unconstrained `i64` range cost the same as a handful of values, while
/// holes punched by `≠` constraints are still represented exactly.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FdDomain {
    ranges: Vec<(i64, i64)>,
}

impl FdDomain {
    /// `[lo, hi]`; empty when `lo > hi`.
    pub fn range(lo: i64, hi: i64) -> Self {
        if lo > hi {
            Self::empty()
        } else {
            FdDomain {
                ranges: vec![(lo, hi)],
            }
        }
    }

    pub fn singleton(v: i64) -> Self {
        Self::range(v, v)
    }

    pub fn empty() -> Self {
        FdDomain { ranges: Vec::new() }
    }

    pub fn full() -> Self {
        Self::range(i64::MIN, i64::MAX)
    }

    pub fn from_values<I: IntoIterator<Item = i64>>(values: I) -> Self {
        let mut vals: Vec<i64> = values.into_iter().collect();
        vals.sort_unstable();
        vals.dedup();
        let mut ranges: Vec<(i64, i64)> = Vec::new();
        for v in vals {
            match ranges.last_mut() {
                Some((_, hi)) if hi.checked_add(1) == Some(v) => *hi = v,
                _ => ranges.push((v, v)),
            }
        }
        FdDomain { ranges }
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    pub fn min(&self) -> Option<i64> {
        self.ranges.first().map(|r| r.0)
    }

    pub fn max(&self) -> Option<i64> {
        self.ranges.last().map(|r| r.1)
    }

    /// The single value of a determined domain.
    pub fn value(&self) -> Option<i64> {
        match self.ranges.as_slice() {
            [(lo, hi)] if lo == hi => Some(*lo),
            _ => None,
        }
    }

    pub fn is_singleton(&self) -> bool {
        self.value().is_some()
    }

    /// Number of values, saturating at `u128::MAX` never being reached for i64 ranges.
    pub fn size(&self) -> u128 {
        self.ranges
            .iter()
            .map(|&(lo, hi)| (hi as i128 - lo as i128 + 1) as u128)
            .sum()
    }

    pub fn contains(&self, v: i64) -> bool {
        // Ranges are sorted; binary search on the lower bound.
        let idx = self.ranges.partition_point(|&(lo, _)| lo <= v);
        idx > 0 && self.ranges[idx - 1].1 >= v
    }

    pub fn ranges(&self) -> &[(i64, i64)] {
        &self.ranges
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> + '_ {
        self.ranges.iter().flat_map(|&(lo, hi)| lo..=hi)
    }

    /// Keeps only values in `[lo, hi]`. Returns whether the domain changed.
    pub fn restrict(&mut self, lo: i64, hi: i64) -> bool {
        let before = self.ranges.len();
        let (old_min, old_max) = (self.min(), self.max());
        if lo > hi {
            let changed = !self.ranges.is_empty();
            self.ranges.clear();
            return changed;
        }
        self.ranges.retain(|&(a, b)| b >= lo && a <= hi);
        if let Some(first) = self.ranges.first_mut() {
            first.0 = first.0.max(lo);
        }
        if let Some(last) = self.ranges.last_mut() {
            last.1 = last.1.min(hi);
        }
        self.ranges.len() != before || self.min() != old_min || self.max() != old_max
    }

    /// Removes one value. Returns whether the domain changed.
    pub fn remove(&mut self, v: i64) -> bool {
        let idx = self.ranges.partition_point(|&(lo, _)| lo <= v);
        if idx == 0 || self.ranges[idx - 1].1 < v {
            return false;
        }
        let (lo, hi) = self.ranges[idx - 1];
        match (lo == v, hi == v) {
            (true, true) => {
                self.ranges.remove(idx - 1);
            }
            (true, false) => self.ranges[idx - 1].0 = v + 1,
            (false, true) => self.ranges[idx - 1].1 = v - 1,
            (false, false) => {
                self.ranges[idx - 1].1 = v - 1;
                self.ranges.insert(idx, (v + 1, hi));
            }
        }
        true
    }

    /// Intersects with `other`. Returns whether the domain changed.
    pub fn intersect(&mut self, other: &FdDomain) -> bool {
        let mut out = Vec::with_capacity(self.ranges.len());
        let (mut i, mut j) = (0, 0);
        while i < self.ranges.len() && j < other.ranges.len() {
            let (a0, a1) = self.ranges[i];
            let (b0, b1) = other.ranges[j];
            let lo = a0.max(b0);
            let hi = a1.min(b1);
            if lo <= hi {
                out.push((lo, hi));
            }
            if a1 < b1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        let changed = out != self.ranges;
        self.ranges = out;
        changed
    }

    pub fn is_disjoint(&self, other: &FdDomain) -> bool {
        let mut probe = self.clone();
        probe.intersect(other);
        probe.is_empty()
    }
}

impl fmt::Display for FdDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (lo, hi)) in self.ranges.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            if lo == hi {
                write!(f, "{lo}")?;
            } else {
                write!(f, "{lo}..{hi}")?;
            }
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    #[test]
    fn restrict_and_remove() {
        let mut d = FdDomain::range(0, 127);
        assert_eq!(d.size(), 128);
        assert!(d.restrict(41, 58));
        assert_eq!((d.min(), d.max()), (Some(41), Some(58)));
        assert!(!d.contains(60));
        assert!(d.remove(50));
        assert!(!d.contains(50));
        assert_eq!(d.size(), 17);
        assert!(!d.remove(50));
        assert_eq!(d.to_string(), "{41..49, 51..58}");
    }

    #[test]
    fn full_range_has_exact_size() {
        let d = FdDomain::full();
        assert_eq!(d.size(), 1u128 << 64);
        assert!(d.contains(i64::MIN) && d.contains(i64::MAX));
    }

    #[test]
    fn singleton_is_determined() {
        let d = FdDomain::range(5, 5);
        assert_eq!(d.value(), Some(5));
        let mut e = FdDomain::range(4, 6);
        e.remove(4);
        e.remove(6);
        assert_eq!(e.value(), Some(5));
    }

    fn arb_set() -> impl Strategy<Value = BTreeSet<i64>> {
        proptest::collection::btree_set(-20i64..20, 0..25)
    }

    proptest! {
        #[test]
        fn ops_agree_with_sets(a in arb_set(), b in arb_set(), v in -22i64..22, lo in -22i64..22, w in 0i64..20) {
            let da = FdDomain::from_values(a.iter().copied());
            let db = FdDomain::from_values(b.iter().copied());
            prop_assert_eq!(da.iter().collect::<BTreeSet<_>>(), a.clone());
            prop_assert_eq!(da.size() as usize, a.len());

            let mut inter = da.clone();
            inter.intersect(&db);
            let expect: BTreeSet<i64> = a.intersection(&b).copied().collect();
            prop_assert_eq!(inter.iter().collect::<BTreeSet<_>>(), expect.clone());
            prop_assert_eq!(da.is_disjoint(&db), expect.is_empty());

            let mut rem = da.clone();
            let changed = rem.remove(v);
            prop_assert_eq!(changed, a.contains(&v));
            let mut expect_rem = a.clone();
            expect_rem.remove(&v);
            prop_assert_eq!(rem.iter().collect::<BTreeSet<_>>(), expect_rem);

            let hi = lo + w;
            let mut r = da.clone();
            r.restrict(lo, hi);
            let expect_r: BTreeSet<i64> = a.iter().copied().filter(|x| *x >= lo && *x <= hi).collect();
            prop_assert_eq!(r.iter().collect::<BTreeSet<_>>(), expect_r);
            prop_assert_eq!(da.contains(v), a.contains(&v));
        }
    }
}
