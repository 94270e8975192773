use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

/// Sorted, duplicate-free set of integer heights (points of one face).
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SiteSet(Vec<i64>);

impl SiteSet {
    pub fn new() -> Self {
        SiteSet(Vec::new())
    }

    pub fn from_sorted(v: Vec<i64>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        SiteSet(v)
    }

    pub fn singleton(x: i64) -> Self {
        SiteSet(vec![x])
    }

    pub fn range(r: Range<i64>) -> Self {
        SiteSet(r.collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = i64> + ExactSizeIterator + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, x: i64) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    pub fn min(&self) -> Option<i64> {
        self.0.first().copied()
    }

    pub fn max(&self) -> Option<i64> {
        self.0.last().copied()
    }

    /// Points inside `r`.
    pub fn restrict(&self, r: Range<i64>) -> SiteSet {
        let a = self.0.partition_point(|&x| x < r.start);
        let b = self.0.partition_point(|&x| x < r.end);
        SiteSet(self.0[a..b].to_vec())
    }

    pub fn union(&self, other: &SiteSet) -> SiteSet {
        let mut v = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            let (a, b) = (self.0[i], other.0[j]);
            if a < b {
                v.push(a);
                i += 1;
            } else if b < a {
                v.push(b);
                j += 1;
            } else {
                v.push(a);
                i += 1;
                j += 1;
            }
        }
        v.extend_from_slice(&self.0[i..]);
        v.extend_from_slice(&other.0[j..]);
        SiteSet(v)
    }

    pub fn is_subset(&self, other: &SiteSet) -> bool {
        self.0.iter().all(|&x| other.contains(x))
    }

    pub fn is_disjoint(&self, other: &SiteSet) -> bool {
        self.0.iter().all(|&x| !other.contains(x))
    }

    pub fn into_vec(self) -> Vec<i64> {
        self.0
    }
}

impl FromIterator<i64> for SiteSet {
    fn from_iter<I: IntoIterator<Item = i64>>(iter: I) -> Self {
        let mut v: Vec<i64> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        SiteSet(v)
    }
}

impl From<Vec<i64>> for SiteSet {
    fn from(v: Vec<i64>) -> Self {
        v.into_iter().collect()
    }
}

impl<const N: usize> From<[i64; N]> for SiteSet {
    fn from(v: [i64; N]) -> Self {
        v.into_iter().collect()
    }
}

impl fmt::Display for SiteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dedups_and_sorts() {
        let s: SiteSet = vec![5, 1, 5, 3].into();
        assert_eq!(s.as_slice(), &[1, 3, 5]);
        assert_eq!(s.to_string(), "[1,3,5]");
        assert_eq!(serde_json::to_string(&s).unwrap(), "[1,3,5]");
    }

    #[test]
    fn set_operations() {
        let a = SiteSet::from([1, 2, 3, 7]);
        let b = SiteSet::from([2, 8]);
        assert_eq!(a.union(&b).as_slice(), &[1, 2, 3, 7, 8]);
        assert_eq!(a.restrict(2..7).as_slice(), &[2, 3]);
        assert!(SiteSet::from([2, 3]).is_subset(&a));
        assert!(!a.is_disjoint(&b));
    }
}
