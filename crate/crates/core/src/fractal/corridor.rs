use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{count_ordered_fractals, is_k_fractal, FractalParams};
use crate::error::{Error, Result};
use crate::perc::{remainder, remainder_vertical, sliced_remainder, PercSample, Rectangle};
use crate::renorm::{is_good_block, LabelTable, ScaleParams};
use crate::sites::SiteSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// A row (or column) of scale-`k` boxes: intervals `i0..=i1` along the crossing direction,
/// transverse interval `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Corridor {
    pub orientation: Orientation,
    pub k: u32,
    pub i0: i64,
    pub i1: i64,
    pub j: i64,
}

impl Corridor {
    pub fn horizontal(k: u32, i0: i64, i1: i64, j: i64) -> Self {
        Corridor {
            orientation: Orientation::Horizontal,
            k,
            i0,
            i1,
            j,
        }
    }

    pub fn vertical(k: u32, i0: i64, i1: i64, j: i64) -> Self {
        Corridor {
            orientation: Orientation::Vertical,
            k,
            i0,
            i1,
            j,
        }
    }

    pub fn length(&self) -> i64 {
        self.i1 - self.i0
    }

    /// Sites along the crossing direction, `[i0·L_k, (i1+1)·L_k)`.
    pub fn along(&self, sp: &ScaleParams) -> Range<i64> {
        let len = sp.len(self.k);
        self.i0 * len..(self.i1 + 1) * len
    }

    pub fn transverse(&self, sp: &ScaleParams) -> Range<i64> {
        let len = sp.len(self.k);
        self.j * len..(self.j + 1) * len
    }

    pub fn rect(&self, sp: &ScaleParams) -> Rectangle {
        let (a, t) = (self.along(sp), self.transverse(sp));
        match self.orientation {
            Orientation::Horizontal => Rectangle {
                a: a.start,
                b: a.end,
                c: t.start,
                d: t.end,
            },
            Orientation::Vertical => Rectangle {
                a: t.start,
                b: t.end,
                c: a.start,
                d: a.end,
            },
        }
    }

    fn tables<'a>(
        &self,
        labels_x: &'a LabelTable,
        labels_y: &'a LabelTable,
    ) -> (&'a LabelTable, &'a LabelTable) {
        match self.orientation {
            Orientation::Horizontal => (labels_x, labels_y),
            Orientation::Vertical => (labels_y, labels_x),
        }
    }

    /// Transverse interval good and the block of crossed intervals good.
    pub fn is_good(&self, labels_x: &LabelTable, labels_y: &LabelTable) -> Result<bool> {
        if self.i0 > self.i1 {
            return Ok(false);
        }
        let (along, across) = self.tables(labels_x, labels_y);
        Ok(across.is_good(self.k, self.j)? && is_good_block(along, self.k, self.i0, self.i1)?)
    }

    /// Exit face of the crossing started from `s` on the entry face.
    pub fn remainder(&self, sample: &PercSample, s: &SiteSet, sp: &ScaleParams) -> Result<SiteSet> {
        match self.orientation {
            Orientation::Horizontal => remainder(sample, s, self.rect(sp)),
            Orientation::Vertical => remainder_vertical(sample, s, self.rect(sp)),
        }
    }

    /// The remainder of `s` still contains a `k`-fractal.
    pub fn is_well_crossed(
        &self,
        sample: &PercSample,
        s: &SiteSet,
        labels_x: &LabelTable,
        labels_y: &LabelTable,
        fp: &FractalParams,
        sp: &ScaleParams,
    ) -> Result<bool> {
        let r = self.remainder(sample, s, sp)?.restrict(self.transverse(sp));
        let (_, across) = self.tables(labels_x, labels_y);
        Ok(count_ordered_fractals(&r, self.k, across, fp, sp)? >= 1)
    }

    /// Whether the two corridors share a box.
    pub fn crosses(&self, other: &Corridor) -> bool {
        if self.k != other.k || self.orientation == other.orientation {
            return false;
        }
        let inside = |c: &Corridor, t: i64| t >= c.i0 && t <= c.i1;
        inside(self, other.j) && inside(other, self.j)
    }
}

/// Corridor family inside `[i0, i1]·L_k × I^y_{(k+1, j)}`: the `L` horizontal rows and
/// `count` vertical columns over the leftmost good scale-`k` intervals of the block.
pub fn branch_corridors(
    k: u32,
    i0: i64,
    i1: i64,
    j: i64,
    labels_x: &LabelTable,
    count: usize,
    sp: &ScaleParams,
) -> Result<(Vec<Corridor>, Vec<Corridor>)> {
    let l = sp.l as i64;
    if 2 * (i1 - i0) < l {
        return Err(Error::Geometry(format!(
            "block [{i0}, {i1}] is shorter than L/2 = {}",
            l as f64 / 2.0
        )));
    }
    let horizontal = (1..=l)
        .map(|r| Corridor::horizontal(k, i0, i1, j * l + r - 1))
        .collect();
    let mut vertical = Vec::with_capacity(count);
    for i in i0..=i1 {
        if vertical.len() == count {
            break;
        }
        if labels_x.is_good(k, i)? {
            vertical.push(Corridor::vertical(k, j * l, j * l + l - 1, i));
        }
    }
    if vertical.len() < count {
        return Err(Error::Geometry(format!(
            "block [{i0}, {i1}] has {} good scale-{k} intervals, {count} needed",
            vertical.len()
        )));
    }
    Ok((horizontal, vertical))
}

/// `S` recovers in `I`: its scale-`(k+1)` sliced remainder across `I` holds, inside a single
/// `(k+1)`-interval, an ordered family of `recovery_family_size` `k`-fractals.
pub fn detect_recovery(
    sample: &PercSample,
    s: &SiteSet,
    i: Range<i64>,
    k: u32,
    labels_y: &LabelTable,
    fp: &FractalParams,
    sp: &ScaleParams,
) -> Result<bool> {
    if !is_k_fractal(s, k, labels_y, fp, sp)? {
        return Err(Error::Precondition(format!("{s} is not a {k}-fractal")));
    }
    let r = sliced_remainder(sample, s, i, k + 1, sp)?;
    let len = sp.len(k + 1);
    let mut rest = r.as_slice();
    while let Some(&first) = rest.first() {
        let m = first.div_euclid(len);
        let end = rest.partition_point(|&y| y < (m + 1) * len);
        let part = SiteSet::from_sorted(rest[..end].to_vec());
        if count_ordered_fractals(&part, k, labels_y, fp, sp)? >= fp.recovery_family_size {
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
    use crate::fractal::build_grouped_fractal;
    use crate::renorm::{compute_labels, IntervalIndex};

    fn flat(l: u64, k: u32, n: usize) -> (LabelTable, ScaleParams) {
        let sp = ScaleParams::new(l, k).unwrap();
        (
            compute_labels(&GapSequence::new(0, vec![0; n]).unwrap(), sp).unwrap(),
            sp,
        )
    }

    #[test]
    fn branch_grid() {
        let (t, sp) = flat(4, 2, 16);
        let (h, v) = branch_corridors(0, 0, 4, 0, &t, 4, &sp).unwrap();
        assert_eq!(h.len(), 4);
        assert_eq!(v.len(), 4);
        for a in &h {
            for b in &v {
                assert!(a.crosses(b) && b.crosses(a));
            }
        }
        for (n, a) in h.iter().enumerate() {
            for b in &h[n + 1..] {
                assert!(a.transverse(&sp).end <= b.transverse(&sp).start);
            }
        }
        assert!(branch_corridors(0, 0, 1, 0, &t, 4, &sp).is_err());
    }

    #[test]
    fn paving_assigns_each_grouped_fractal_one_row() {
        let (t, sp) = flat(4, 2, 16);
        let fp = FractalParams::desk(4);
        let (h, _) = branch_corridors(1, 0, 3, 0, &t, 1, &sp).unwrap();
        for m in 0..4 {
            let s = build_grouped_fractal(&t, IntervalIndex::new(1, m), &fp, &sp)
                .unwrap()
                .unwrap();
            let rows = h
                .iter()
                .filter(|c| s.iter().all(|y| c.transverse(&sp).contains(&y)))
                .count();
            assert_eq!(rows, 1);
        }
    }

    #[test]
    fn recovery_extremes() {
        let (t, sp) = flat(4, 2, 16);
        let fp = FractalParams::desk(4);
        let s = SiteSet::from([0, 4]);
        let rect = Rectangle::new(0, 8, 0, 16).unwrap();
        assert!(detect_recovery(&PercSample::all(rect, true), &s, 0..8, 1, &t, &fp, &sp).unwrap());
        assert!(
            !detect_recovery(&PercSample::all(rect, false), &s, 0..8, 1, &t, &fp, &sp).unwrap()
        );
        assert!(matches!(
            detect_recovery(
                &PercSample::all(rect, true),
                &SiteSet::from([0]),
                0..8,
                1,
                &t,
                &fp,
                &sp
            ),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn good_corridor() {
        let sp = ScaleParams::new(4, 1).unwrap();
        let x = compute_labels(&GapSequence::new(0, vec![0; 16]).unwrap(), sp).unwrap();
        let y = compute_labels(
            &GapSequence::new(0, vec![0, 0, 0, 0, 3, 0, 0, 0]).unwrap(),
            sp,
        )
        .unwrap();
        assert!(Corridor::horizontal(1, 0, 3, 0).is_good(&x, &y).unwrap());
        assert!(!Corridor::horizontal(1, 0, 3, 1).is_good(&x, &y).unwrap());
        assert!(Corridor::vertical(1, 0, 0, 2).is_good(&x, &y).unwrap());
        assert!(!Corridor::vertical(1, 0, 1, 2).is_good(&x, &y).unwrap());
    }
}
