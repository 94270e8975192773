//! Ordered families, fractal sets, corridors and recovery.

mod corridor;

pub use corridor::{branch_corridors, detect_recovery, Corridor, Orientation};

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::renorm::{IntervalIndex, LabelTable, ScaleParams};
use crate::sites::SiteSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FractalParams {
    pub branching: u64,
    pub loss_exponent: u32,
    pub corridor_count_vertical: usize,
    pub recovery_family_size: u64,
}

impl FractalParams {
    /// Small constants that keep desk-scale windows tractable.
    pub fn desk(l: u64) -> Self {
        FractalParams {
            branching: 2,
            loss_exponent: 1,
            corridor_count_vertical: 4,
            recovery_family_size: l - 1,
        }
    }

    /// Large-scale constants: branching `2^10`, loss exponent 4.
    pub fn large(l: u64) -> Self {
        FractalParams {
            branching: 1 << 10,
            loss_exponent: 4,
            corridor_count_vertical: 4,
            recovery_family_size: l - 1,
        }
    }

    pub fn validate(&self, sp: &ScaleParams) -> Result<()> {
        if self.branching == 0 {
            return param("branching must be at least 1");
        }
        if self.loss_exponent == 0 {
            return param("loss exponent must be at least 1");
        }
        if self.recovery_family_size > sp.l {
            return param(format!(
                "recovery family size {} exceeds L = {}",
                self.recovery_family_size, sp.l
            ));
        }
        Ok(())
    }

    /// `branching^k`, or `None` on overflow.
    pub fn fractal_size(&self, k: u32) -> Option<u64> {
        self.branching.checked_pow(k)
    }

    /// `2^(loss_exponent·(h−1))`, the number of fractals that start a defect crossing.
    pub fn family_size(&self, h: u64) -> Option<u64> {
        let e = (self.loss_exponent as u64).checked_mul(h.checked_sub(1)?)?;
        1u64.checked_shl(u32::try_from(e).ok()?)
    }
}

/// Scale-`k` intervals meeting `s`.
pub fn z_k(s: &SiteSet, k: u32, sp: &ScaleParams) -> Vec<IntervalIndex> {
    let len = sp.len(k);
    let mut out: Vec<IntervalIndex> = Vec::new();
    for x in s.iter() {
        let i = x.div_euclid(len);
        if out.last().map(|m| m.i) != Some(i) {
            out.push(IntervalIndex::new(k, i));
        }
    }
    out
}

/// Answer of [`is_grouped`]; the empty set is grouped only vacuously.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Grouped {
    pub value: bool,
    pub degenerate: bool,
}

pub fn is_grouped(s: &SiteSet, k: u32, sp: &ScaleParams) -> Grouped {
    if s.is_empty() {
        return Grouped {
            value: true,
            degenerate: true,
        };
    }
    let len = sp.len(k);
    Grouped {
        value: s.min().unwrap().div_euclid(len) == s.max().unwrap().div_euclid(len),
        degenerate: false,
    }
}

/// A `k`-ordered family: `Z_k(S_1) ≺ ... ≺ Z_k(S_n)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderedFamily {
    pub scale: u32,
    pub sets: Vec<SiteSet>,
}

impl OrderedFamily {
    pub fn new(sets: Vec<SiteSet>, k: u32, sp: &ScaleParams) -> Result<Self> {
        let len = sp.len(k);
        for (idx, s) in sets.iter().enumerate() {
            if s.is_empty() {
                return Err(Error::Precondition(format!(
                    "member {idx} of an ordered family is empty"
                )));
            }
        }
        for (idx, w) in sets.windows(2).enumerate() {
            let left = w[0].max().unwrap().div_euclid(len);
            let right = w[1].min().unwrap().div_euclid(len);
            if left >= right {
                return Err(Error::Precondition(format!(
                    "members {idx} and {} share or reverse scale-{k} intervals",
                    idx + 1
                )));
            }
        }
        Ok(OrderedFamily { scale: k, sets })
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn union(&self) -> SiteSet {
        self.sets.iter().flat_map(|s| s.iter()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }
}

fn fractal_rec(
    pts: &[i64],
    k: u32,
    labels: &LabelTable,
    b: usize,
    sp: &ScaleParams,
) -> Result<bool> {
    if k == 0 {
        return Ok(pts.len() == 1 && labels.h(0, pts[0])? == 0);
    }
    let len = sp.len(k);
    for &x in pts {
        if labels.h(k, x.div_euclid(len))? > 0 {
            return Ok(false);
        }
    }
    let chunk = pts.len() / b;
    let below = sp.len(k - 1);
    for (n, piece) in pts.chunks(chunk).enumerate() {
        if n > 0 {
            let prev_end = pts[n * chunk - 1].div_euclid(below);
            if prev_end >= piece[0].div_euclid(below) {
                return Ok(false);
            }
        }
        if !fractal_rec(piece, k - 1, labels, b, sp)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Recursive fractal test. The `(k−1)`-ordered pieces of a `k`-fractal are necessarily
/// consecutive runs of `branching^(k−1)` points, so no search is needed.
pub fn is_k_fractal(
    s: &SiteSet,
    k: u32,
    labels_y: &LabelTable,
    fp: &FractalParams,
    sp: &ScaleParams,
) -> Result<bool> {
    let Some(size) = fp.fractal_size(k) else {
        return Ok(false);
    };
    if s.len() as u64 != size || fp.branching == 0 {
        return Ok(false);
    }
    fractal_rec(s.as_slice(), k, labels_y, fp.branching as usize, sp)
}

/// Leftmost `k`-grouped `k`-fractal inside the good interval `m`, if one exists.
pub fn build_grouped_fractal(
    labels_y: &LabelTable,
    m: IntervalIndex,
    fp: &FractalParams,
    sp: &ScaleParams,
) -> Result<Option<SiteSet>> {
    if labels_y.h(m.k, m.i)? > 0 {
        return Err(Error::Precondition(format!(
            "interval ({}, {}) is bad",
            m.k, m.i
        )));
    }
    fn build(
        labels: &LabelTable,
        m: IntervalIndex,
        b: u64,
        sp: &ScaleParams,
        out: &mut Vec<i64>,
    ) -> Result<bool> {
        if m.k == 0 {
            out.push(m.i);
            return Ok(true);
        }
        let mut got = 0;
        for c in m.children(sp) {
            if got == b {
                break;
            }
            if labels.h(c.k, c.i)? > 0 {
                continue;
            }
            let mark = out.len();
            if build(labels, c, b, sp, out)? {
                got += 1;
            } else {
                out.truncate(mark);
            }
        }
        Ok(got == b)
    }
    let mut out = Vec::new();
    Ok(if build(labels_y, m, fp.branching, sp, &mut out)? {
        Some(SiteSet::from_sorted(out))
    } else {
        None
    })
}

/// Position of the last point of the earliest-ending `k`-fractal among `pts` that starts
/// at or after `from`; `pts` must already be good at every scale up to `k`.
fn earliest_end(pts: &[i64], k: u32, from: i64, b: u64, sp: &ScaleParams) -> Option<i64> {
    if k == 0 {
        let i = pts.partition_point(|&x| x < from);
        return pts.get(i).copied();
    }
    let below = sp.len(k - 1);
    let mut pos = from;
    let mut last = None;
    for _ in 0..b {
        let e = earliest_end(pts, k - 1, pos, b, sp)?;
        pos = (e.div_euclid(below) + 1) * below;
        last = Some(e);
    }
    last
}

/// Largest `N` such that `t` contains a `k`-ordered family of `N` `k`-fractals.
///
/// Greedy earliest-finish selection at every scale; optimal because a family is a chain
/// of interval-disjoint blocks and only the last occupied interval constrains the rest.
pub fn count_ordered_fractals(
    t: &SiteSet,
    k: u32,
    labels_y: &LabelTable,
    fp: &FractalParams,
    sp: &ScaleParams,
) -> Result<u64> {
    let mut good = Vec::with_capacity(t.len());
    for x in t.iter() {
        if labels_y.is_good_up_to(x, k)? {
            good.push(x);
        }
    }
    if fp.branching == 0 {
        return Ok(0);
    }
    let len = sp.len(k);
    let mut count = 0;
    let mut pos = i64::MIN;
    while let Some(e) = earliest_end(&good, k, pos, fp.branching, sp) {
        count += 1;
        pos = (e.div_euclid(len) + 1) * len;
    }
    Ok(count)
}

/// Whether some single `k`-interval of `t` holds a `k`-fractal.
pub fn contains_grouped_fractal(
    t: &SiteSet,
    k: u32,
    labels_y: &LabelTable,
    fp: &FractalParams,
    sp: &ScaleParams,
) -> Result<bool> {
    let len = sp.len(k);
    let mut rest = t.as_slice();
    while let Some(&first) = rest.first() {
        let m = first.div_euclid(len);
        let end = rest.partition_point(|&y| y < (m + 1) * len);
        let part = SiteSet::from_sorted(rest[..end].to_vec());
        if count_ordered_fractals(&part, k, labels_y, fp, sp)? >= 1 {
            return Ok(true);
        }
        rest = &rest[end..];
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::GapSequence;
    use crate::renorm::compute_labels;

    fn labels(xi: Vec<u64>, l: u64, k: u32) -> (LabelTable, ScaleParams) {
        let sp = ScaleParams::new(l, k).unwrap();
        (
            compute_labels(&GapSequence::new(0, xi).unwrap(), sp).unwrap(),
            sp,
        )
    }

    #[test]
    fn z_k_examples() {
        let sp = ScaleParams::new(4, 2).unwrap();
        assert_eq!(
            z_k(&SiteSet::from([0]), 2, &sp),
            vec![IntervalIndex::new(2, 0)]
        );
        assert_eq!(
            z_k(&SiteSet::from([3, 4]), 1, &sp),
            vec![IntervalIndex::new(1, 0), IntervalIndex::new(1, 1)]
        );
        assert!(z_k(&SiteSet::new(), 1, &sp).is_empty());
    }

    #[test]
    fn grouped_examples() {
        let sp = ScaleParams::new(4, 1).unwrap();
        assert!(is_grouped(&SiteSet::from([0, 1]), 1, &sp).value);
        assert!(!is_grouped(&SiteSet::from([3, 4]), 1, &sp).value);
        let g = is_grouped(&SiteSet::new(), 1, &sp);
        assert!(g.value && g.degenerate);
    }

    #[test]
    fn fractal_examples() {
        let fp = FractalParams::desk(4);
        let (t, sp) = labels(vec![0; 16], 4, 2);
        assert!(is_k_fractal(&SiteSet::from([5]), 0, &t, &fp, &sp).unwrap());
        assert!(is_k_fractal(&SiteSet::from([0, 4]), 1, &t, &fp, &sp).unwrap());
        assert!(is_k_fractal(&SiteSet::from([0, 1]), 1, &t, &fp, &sp).unwrap());
        assert!(!is_k_fractal(&SiteSet::from([0, 1, 2, 3]), 2, &t, &fp, &sp).unwrap());
        assert!(is_k_fractal(&SiteSet::from([0, 1, 4, 5]), 2, &t, &fp, &sp).unwrap());
        assert!(!is_k_fractal(&SiteSet::from([0, 4, 8]), 1, &t, &fp, &sp).unwrap());
        let (t, sp) = labels(vec![0, 2, 0, 0], 4, 1);
        assert!(!is_k_fractal(&SiteSet::from([1]), 0, &t, &fp, &sp).unwrap());
        assert!(!is_k_fractal(&SiteSet::from([0, 1]), 1, &t, &fp, &sp).unwrap());
    }

    #[test]
    fn build_examples() {
        let fp = FractalParams::desk(4);
        let (t, sp) = labels(vec![0; 16], 4, 2);
        let s = build_grouped_fractal(&t, IntervalIndex::new(2, 0), &fp, &sp)
            .unwrap()
            .unwrap();
        assert_eq!(s.as_slice(), &[0, 1, 4, 5]);
        assert!(is_k_fractal(&s, 2, &t, &fp, &sp).unwrap());

        let (t, sp) = labels(vec![0, 1, 0, 0], 4, 1);
        assert!(t.is_good(1, 0).unwrap());
        let s = build_grouped_fractal(&t, IntervalIndex::new(1, 0), &fp, &sp)
            .unwrap()
            .unwrap();
        assert_eq!(s.as_slice(), &[0, 2]);

        let (t, sp) = labels(vec![0, 1, 1, 0], 4, 1);
        assert!(matches!(
            build_grouped_fractal(&t, IntervalIndex::new(1, 0), &fp, &sp),
            Err(Error::Precondition(_))
        ));

        let full = FractalParams { branching: 4, ..fp };
        let (t, sp) = labels(vec![0, 1, 0, 0], 4, 1);
        assert_eq!(
            build_grouped_fractal(&t, IntervalIndex::new(1, 0), &full, &sp).unwrap(),
            None
        );
    }

    #[test]
    fn counting_examples() {
        let fp = FractalParams::desk(4);
        let (t, sp) = labels(vec![0; 16], 4, 2);
        assert_eq!(
            count_ordered_fractals(&SiteSet::new(), 1, &t, &fp, &sp).unwrap(),
            0
        );
        assert_eq!(
            count_ordered_fractals(&SiteSet::from([0, 1]), 1, &t, &fp, &sp).unwrap(),
            1
        );
        assert_eq!(
            count_ordered_fractals(&SiteSet::from([0, 1, 2, 3, 4, 5]), 1, &t, &fp, &sp).unwrap(),
            2
        );
        assert_eq!(
            count_ordered_fractals(&SiteSet::from([0, 1, 2, 3, 4, 5]), 0, &t, &fp, &sp).unwrap(),
            6
        );
    }

    #[test]
    fn family_sizes() {
        let fp = FractalParams::large(1_000_000);
        assert_eq!(fp.family_size(1), Some(1));
        assert_eq!(fp.family_size(3), Some(256));
        assert_eq!(fp.fractal_size(2), Some(1 << 20));
        assert_eq!(fp.family_size(0), None);
    }

    #[test]
    fn ordered_family_rules() {
        let sp = ScaleParams::new(4, 1).unwrap();
        let ok =
            OrderedFamily::new(vec![SiteSet::from([0, 1]), SiteSet::from([4])], 1, &sp).unwrap();
        assert_eq!(ok.to_json(), r#"{"scale":1,"sets":[[0,1],[4]]}"#);
        assert!(
            OrderedFamily::new(vec![SiteSet::from([0, 4]), SiteSet::from([5])], 1, &sp).is_err()
        );
    }
}
