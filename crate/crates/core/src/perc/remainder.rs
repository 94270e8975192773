use std::ops::Range;

use super::{DisjointSets, PercSample, Rectangle};
use crate::error::{Error, Result};
use crate::renorm::ScaleParams;
use crate::sites::SiteSet;

/// Open clusters of a sample restricted to the edges of a sub-rectangle.
#[derive(Debug, Clone)]
pub struct Components {
    rect: Rectangle,
    dsu: DisjointSets,
}

impl Components {
    pub fn new(sample: &PercSample, rect: Rectangle) -> Result<Self> {
        if !sample.rect().contains_rect(&rect) {
            return Err(Error::Geometry(format!(
                "{rect:?} is not inside the sampled {:?}",
                sample.rect()
            )));
        }
        let mut dsu = DisjointSets::new(rect.site_count());
        for y in rect.c..rect.d {
            for x in rect.a..rect.b {
                let here = rect.site_index(x, y);
                if sample.open_h(x, y) {
                    dsu.union(here, here + 1);
                }
                if sample.open_v(x, y) {
                    dsu.union(here, rect.site_index(x, y + 1));
                }
            }
        }
        Ok(Components { rect, dsu })
    }

    pub fn rect(&self) -> Rectangle {
        self.rect
    }

    pub fn root(&mut self, x: i64, y: i64) -> usize {
        let i = self.rect.site_index(x, y);
        self.dsu.find(i)
    }

    pub fn connected(&mut self, z: (i64, i64), w: (i64, i64)) -> bool {
        self.root(z.0, z.1) == self.root(w.0, w.1)
    }
}

fn face_check(s: &SiteSet, lo: i64, hi: i64, face: &str) -> Result<()> {
    match (s.min(), s.max()) {
        (Some(a), Some(b)) if a < lo || b > hi => Err(Error::Geometry(format!(
            "start set {s} is not on the {face} face [{lo}, {hi}]"
        ))),
        _ => Ok(()),
    }
}

/// Right-face heights reachable from `s × {a}` inside `rect`.
pub fn remainder(sample: &PercSample, s: &SiteSet, rect: Rectangle) -> Result<SiteSet> {
    face_check(s, rect.c, rect.d, "left")?;
    if s.is_empty() {
        return Ok(SiteSet::new());
    }
    let mut comp = Components::new(sample, rect)?;
    let mut hit = vec![false; rect.site_count()];
    for y in s.iter() {
        let r = comp.root(rect.a, y);
        hit[r] = true;
    }
    Ok(SiteSet::from_sorted(
        (rect.c..=rect.d)
            .filter(|&y| {
                let r = comp.root(rect.b, y);
                hit[r]
            })
            .collect(),
    ))
}

/// Top-face abscissae reachable from `s` on the bottom face of `rect`.
pub fn remainder_vertical(sample: &PercSample, s: &SiteSet, rect: Rectangle) -> Result<SiteSet> {
    face_check(s, rect.a, rect.b, "bottom")?;
    if s.is_empty() {
        return Ok(SiteSet::new());
    }
    let mut comp = Components::new(sample, rect)?;
    let mut hit = vec![false; rect.site_count()];
    for x in s.iter() {
        let r = comp.root(x, rect.c);
        hit[r] = true;
    }
    Ok(SiteSet::from_sorted(
        (rect.a..=rect.b)
            .filter(|&x| {
                let r = comp.root(x, rect.d);
                hit[r]
            })
            .collect(),
    ))
}

/// Union over the scale-`k` row slices met by `s` of the remainder inside `I × slice`.
pub fn sliced_remainder(
    sample: &PercSample,
    s: &SiteSet,
    i: Range<i64>,
    k: u32,
    params: &ScaleParams,
) -> Result<SiteSet> {
    let len = params.len(k);
    let mut out = SiteSet::new();
    let mut rest = s.as_slice();
    while let Some(&first) = rest.first() {
        let m = first.div_euclid(len);
        let end = rest.partition_point(|&y| y < (m + 1) * len);
        let part = SiteSet::from_sorted(rest[..end].to_vec());
        rest = &rest[end..];
        let rect = Rectangle::new(i.start, i.end, m * len, (m + 1) * len)?;
        out = out.union(&remainder(sample, &part, rect)?);
    }
    Ok(out)
}

/// Column-sliced analogue of [`sliced_remainder`] for crossings from bottom to top of `J`.
pub fn sliced_remainder_vertical(
    sample: &PercSample,
    s: &SiteSet,
    j: Range<i64>,
    k: u32,
    params: &ScaleParams,
) -> Result<SiteSet> {
    let len = params.len(k);
    let mut out = SiteSet::new();
    let mut rest = s.as_slice();
    while let Some(&first) = rest.first() {
        let m = first.div_euclid(len);
        let end = rest.partition_point(|&x| x < (m + 1) * len);
        let part = SiteSet::from_sorted(rest[..end].to_vec());
        rest = &rest[end..];
        let rect = Rectangle::new(m * len, (m + 1) * len, j.start, j.end)?;
        out = out.union(&remainder_vertical(sample, &part, rect)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_remainders() {
        let r = Rectangle::new(0, 3, 0, 2).unwrap();
        let s = SiteSet::from([1]);
        assert_eq!(
            remainder(&PercSample::all(r, true), &s, r).unwrap(),
            SiteSet::from([0, 1])
        );
        assert!(remainder(&PercSample::all(r, false), &s, r)
            .unwrap()
            .is_empty());
        assert!(remainder(&PercSample::all(r, true), &SiteSet::from([5]), r).is_err());
    }

    #[test]
    fn top_right_corner_is_isolated() {
        let r = Rectangle::new(0, 2, 0, 2).unwrap();
        let out = remainder(&PercSample::all(r, true), &SiteSet::from([2]), r).unwrap();
        assert_eq!(out, SiteSet::from([0, 1]));
    }

    #[test]
    fn single_slice_equals_plain_remainder() {
        let params = ScaleParams::new(4, 1).unwrap();
        let big = Rectangle::new(0, 4, 0, 8).unwrap();
        let mut open = vec![true; big.edge_count()];
        open[3] = false;
        let sample = PercSample::from_states(big, open).unwrap();
        let s = SiteSet::from([4, 6]);
        let sliced = sliced_remainder(&sample, &s, 0..4, 1, &params).unwrap();
        let plain = remainder(&sample, &s, Rectangle::new(0, 4, 4, 8).unwrap()).unwrap();
        assert_eq!(sliced, plain);
    }

    #[test]
    fn slices_do_not_talk() {
        let params = ScaleParams::new(2, 1).unwrap();
        let big = Rectangle::new(0, 2, 0, 4).unwrap();
        let sample = PercSample::all(big, true);
        let out = sliced_remainder(&sample, &SiteSet::from([0]), 0..2, 1, &params).unwrap();
        assert_eq!(out, SiteSet::from([0, 1]));
        let both = sliced_remainder(&sample, &SiteSet::from([0, 2]), 0..2, 1, &params).unwrap();
        assert_eq!(both, SiteSet::from([0, 1, 2, 3]));
    }
}
