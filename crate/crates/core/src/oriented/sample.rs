use serde::{Deserialize, Serialize};

use super::geometry::{check_parallel, is_vertex, OrientedCorridor, OrientedEdge, OrientedGeometry};
use crate::env::{check_probability, stretched_probability, ColumnIndicator, GapSequence};
use crate::error::{param, Error, Result};
use crate::rng;
use crate::sites::SiteSet;

pub(crate) const KIND_UP: u64 = rng::tag("oriented/up");
pub(crate) const KIND_DOWN: u64 = rng::tag("oriented/down");
pub(crate) const KIND_SITE: u64 = rng::tag("oriented/site");

/// Vertices `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrientedRegion {
    pub x0: i64,
    pub x1: i64,
    pub y0: i64,
    pub y1: i64,
}

impl OrientedRegion {
    pub fn new(x0: i64, x1: i64, y0: i64, y1: i64) -> Result<Self> {
        if x1 < x0 || y1 < y0 {
            return Err(Error::Geometry(format!(
                "empty region [{x0}, {x1}] × [{y0}, {y1}]"
            )));
        }
        Ok(OrientedRegion { x0, x1, y0, y1 })
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        (self.x0..=self.x1).contains(&x) && (self.y0..=self.y1).contains(&y)
    }

    pub fn covers(&self, other: &OrientedRegion) -> bool {
        self.contains(other.x0, other.y0) && self.contains(other.x1, other.y1)
    }

    fn height(&self) -> usize {
        (self.y1 - self.y0 + 1) as usize
    }

    fn index(&self, x: i64, y: i64) -> usize {
        (x - self.x0) as usize * self.height() + (y - self.y0) as usize
    }

    /// Edges with both endpoints in the region, column by column.
    pub fn edges(&self) -> Vec<OrientedEdge> {
        let mut out = Vec::new();
        for i in self.x0..self.x1 {
            for j in self.y0..=self.y1 {
                if !is_vertex(i, j) {
                    continue;
                }
                for up in [false, true] {
                    let e = OrientedEdge { i, j, up };
                    if self.contains(e.end().0, e.end().1) {
                        out.push(e);
                    }
                }
            }
        }
        out
    }
}

/// Open/closed states of the oriented edges leaving columns `x0..x1` of a region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientedSample {
    region: OrientedRegion,
    up: Vec<bool>,
    down: Vec<bool>,
}

impl OrientedSample {
    pub fn all(region: OrientedRegion, open: bool) -> Self {
        let n = region.height() * (region.x1 - region.x0 + 1) as usize;
        OrientedSample {
            region,
            up: vec![open; n],
            down: vec![open; n],
        }
    }

    /// Sample with `edges[t]` open iff `states[t]`, everything else closed.
    pub fn from_states(
        region: OrientedRegion,
        edges: &[OrientedEdge],
        states: &[bool],
    ) -> Result<Self> {
        if edges.len() != states.len() {
            return param("one state per edge is required");
        }
        let mut s = OrientedSample::all(region, false);
        for (e, &open) in edges.iter().zip(states) {
            s.set(*e, open)?;
        }
        Ok(s)
    }

    pub fn region(&self) -> OrientedRegion {
        self.region
    }

    fn slot(&self, e: OrientedEdge) -> Option<usize> {
        let (x, y) = e.end();
        (is_vertex(e.i, e.j)
            && e.i < self.region.x1
            && self.region.contains(e.i, e.j)
            && self.region.contains(x, y))
        .then(|| self.region.index(e.i, e.j))
    }

    pub fn set(&mut self, e: OrientedEdge, open: bool) -> Result<()> {
        let Some(at) = self.slot(e) else {
            return Err(Error::Geometry(format!(
                "edge from ({}, {}) leaves the sample",
                e.i, e.j
            )));
        };
        if e.up {
            self.up[at] = open;
        } else {
            self.down[at] = open;
        }
        Ok(())
    }

    /// Closed outside the region.
    pub fn is_open(&self, e: OrientedEdge) -> bool {
        match self.slot(e) {
            Some(at) if e.up => self.up[at],
            Some(at) => self.down[at],
            None => false,
        }
    }

    pub fn open_fraction(&self) -> f64 {
        let edges = self.region.edges();
        let open = edges.iter().filter(|e| self.is_open(**e)).count();
        open as f64 / edges.len().max(1) as f64
    }
}

/// Edge from column `i` open with probability `p^(ξ_i+1)`.
pub fn sample_oriented(
    xi: &GapSequence,
    p: f64,
    region: OrientedRegion,
    seed: u64,
) -> Result<OrientedSample> {
    check_probability(p, "p")?;
    let mut s = OrientedSample::all(region, false);
    for i in region.x0..region.x1 {
        let q = stretched_probability(p, xi.get(i)?);
        for j in region.y0..=region.y1 {
            if !is_vertex(i, j) {
                continue;
            }
            let at = region.index(i, j);
            s.up[at] = j < region.y1 && rng::site_uniform(seed, KIND_UP, i, j) < q;
            s.down[at] = j > region.y0 && rng::site_uniform(seed, KIND_DOWN, i, j) < q;
        }
    }
    Ok(s)
}

/// Open sites of a region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteField {
    region: OrientedRegion,
    open: Vec<bool>,
}

impl SiteField {
    pub fn all(region: OrientedRegion, open: bool) -> Self {
        SiteField {
            region,
            open: vec![open; region.height() * (region.x1 - region.x0 + 1) as usize],
        }
    }

    pub fn region(&self) -> OrientedRegion {
        self.region
    }

    /// Closed outside the region.
    pub fn is_open(&self, x: i64, y: i64) -> bool {
        self.region.contains(x, y) && self.open[self.region.index(x, y)]
    }

    pub fn set(&mut self, x: i64, y: i64, open: bool) -> Result<()> {
        if !self.region.contains(x, y) {
            return Err(Error::Geometry(format!("site ({x}, {y}) is outside the field")));
        }
        let at = self.region.index(x, y);
        self.open[at] = open;
        Ok(())
    }
}

/// Site `(x, y)` open with probability `p_b` if `η_x = 1`, `p_g` otherwise.
pub fn sample_ksv(
    eta: &ColumnIndicator,
    p_g: f64,
    p_b: f64,
    region: OrientedRegion,
    seed: u64,
) -> Result<SiteField> {
    check_probability(p_g, "p_g")?;
    check_probability(p_b, "p_b")?;
    let hi = eta.len() as i64 - 1;
    for x in [region.x0, region.x1] {
        if !(0..=hi).contains(&x) {
            return Err(Error::Window {
                what: "column indicator",
                index: x,
                lo: 0,
                hi,
            });
        }
    }
    let mut f = SiteField::all(region, false);
    for x in region.x0..=region.x1 {
        let q = if eta.values()[x as usize] == 1 { p_b } else { p_g };
        for y in region.y0..=region.y1 {
            let at = region.index(x, y);
            f.open[at] = rng::site_uniform(seed, KIND_SITE, x, y) < q;
        }
    }
    Ok(f)
}

/// Column-by-column oriented sweep from `starts` on column `from` to column `to`.
/// `step(x, y, up)` says whether the move from `(x, y)` to `(x+1, y±1)` is available.
pub(crate) fn sweep(
    starts: impl IntoIterator<Item = i64>,
    from: i64,
    to: i64,
    mut step: impl FnMut(i64, i64, bool) -> bool,
) -> SiteSet {
    let mut cur: Vec<i64> = starts.into_iter().collect();
    cur.sort_unstable();
    cur.dedup();
    for x in from..to {
        let mut next = Vec::with_capacity(cur.len() + 1);
        for &y in &cur {
            if step(x, y, false) {
                next.push(y - 1);
            }
            if step(x, y, true) {
                next.push(y + 1);
            }
        }
        next.sort_unstable();
        next.dedup();
        if next.is_empty() {
            return SiteSet::new();
        }
        cur = next;
    }
    SiteSet::from_sorted(cur)
}

/// Where the oriented exploration is confined.
#[derive(Debug, Clone, Copy)]
pub enum Confinement<'a> {
    Region(OrientedRegion),
    /// A parallel family; each corridor is explored separately from its own part of `S`.
    Parallel(&'a [OrientedCorridor]),
}

/// Right-boundary vertices reached from `S` (on the left boundary column) by open paths
/// inside the confinement.
pub fn oriented_reachable(
    sample: &OrientedSample,
    s: &SiteSet,
    within: Confinement<'_>,
    g: &OrientedGeometry,
) -> Result<SiteSet> {
    match within {
        Confinement::Region(r) => {
            if !sample.region().covers(&r) {
                return Err(Error::Geometry("region exceeds the sample".into()));
            }
            check_starts(s, r.x0)?;
            let starts = s.iter().filter(|&y| r.contains(r.x0, y));
            Ok(sweep(starts, r.x0, r.x1, |x, y, up| {
                let e = OrientedEdge { i: x, j: y, up };
                let (ex, ey) = e.end();
                r.contains(ex, ey) && sample.is_open(e)
            }))
        }
        Confinement::Parallel(family) => {
            check_parallel(family)?;
            let (a, b) = family[0].x_span(g);
            check_starts(s, a)?;
            let mut out = SiteSet::new();
            for c in family {
                let starts = s.iter().filter(|&y| c.contains(a, y, g));
                let r = sweep(starts, a, b, |x, y, up| {
                    let e = OrientedEdge { i: x, j: y, up };
                    let (ex, ey) = e.end();
                    c.contains(ex, ey, g) && sample.is_open(e)
                });
                out = out.union(&r);
            }
            Ok(out)
        }
    }
}

fn check_starts(s: &SiteSet, x: i64) -> Result<()> {
    match s.iter().find(|&y| !is_vertex(x, y)) {
        Some(y) => Err(Error::Geometry(format!("({x}, {y}) is not a vertex"))),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::super::geometry::parallel_family;
    use super::*;

    fn geom() -> OrientedGeometry {
        OrientedGeometry::new(4, 2, 2).unwrap()
    }

    #[test]
    fn p_one_opens_everything() {
        let r = OrientedRegion::new(0, 6, -3, 3).unwrap();
        let xi = GapSequence::constant(0..=5, 2).unwrap();
        let s = sample_oriented(&xi, 1.0, r, 3).unwrap();
        assert_eq!(s.open_fraction(), 1.0);
        assert!(sample_oriented(&xi, 0.5, OrientedRegion::new(0, 7, 0, 1).unwrap(), 3).is_err());
    }

    #[test]
    fn open_fraction_is_binomial() {
        let r = OrientedRegion::new(0, 316, 0, 633).unwrap();
        let xi = GapSequence::constant(0..=316, 0).unwrap();
        let s = sample_oriented(&xi, 0.8, r, 11).unwrap();
        let n = r.edges().len() as f64;
        assert!(n > 1e5);
        let se = (0.8 * 0.2 / n).sqrt();
        assert!((s.open_fraction() - 0.8).abs() < 3.0 * se);
    }

    #[test]
    fn ksv_fields() {
        let r = OrientedRegion::new(0, 199, 0, 499).unwrap();
        let ones = ColumnIndicator::new(vec![1; 200]).unwrap();
        let f = sample_ksv(&ones, 0.9, 0.3, r, 5).unwrap();
        let n = 200.0 * 500.0;
        let open = (0..200)
            .flat_map(|x| (0..500).map(move |y| (x, y)))
            .filter(|&(x, y)| f.is_open(x, y))
            .count() as f64;
        assert!((open / n - 0.3).abs() < 3.0 * (0.21f64 / n).sqrt());
        let mut eta = vec![0u8; 200];
        eta[0] = 1;
        let eta = ColumnIndicator::new(eta).unwrap();
        let f = sample_ksv(&eta, 0.9, 0.0, r, 5).unwrap();
        assert!((0..500).all(|y| !f.is_open(0, y)));
        let a = sample_ksv(&eta, 0.6, 0.6, r, 9).unwrap();
        let b = sample_ksv(&ones, 0.6, 0.6, r, 9).unwrap();
        assert_eq!(a, b);
        assert!(sample_ksv(&eta, 0.5, 0.5, OrientedRegion::new(0, 200, 0, 1).unwrap(), 1).is_err());
    }

    #[test]
    fn zigzags_fill_the_box() {
        let r = OrientedRegion::new(0, 5, 0, 6).unwrap();
        let s = OrientedSample::all(r, true);
        let got = oriented_reachable(&s, &SiteSet::from([0]), Confinement::Region(r), &geom())
            .unwrap();
        assert_eq!(got, SiteSet::from([1, 3, 5]));
        let closed = OrientedSample::all(r, false);
        let got = oriented_reachable(&closed, &SiteSet::from([0, 2]), Confinement::Region(r), &geom())
            .unwrap();
        assert!(got.is_empty());
        assert!(
            oriented_reachable(&s, &SiteSet::from([1]), Confinement::Region(r), &geom()).is_err()
        );
    }

    #[test]
    fn parallel_union_is_per_corridor() {
        let g = geom();
        let r = OrientedRegion::new(0, 8, -8, 16).unwrap();
        let xi = GapSequence::constant(0..=7, 0).unwrap();
        let sample = sample_oriented(&xi, 0.8, r, 21).unwrap();
        let fam = parallel_family(1, 0, 0..4, 2, true).unwrap();
        let s = SiteSet::from([0, 2, 4, 6]);
        let all = oriented_reachable(&sample, &s, Confinement::Parallel(&fam), &g).unwrap();
        let mut each = SiteSet::new();
        for c in &fam {
            let part = oriented_reachable(&sample, &s, Confinement::Parallel(std::slice::from_ref(c)), &g)
                .unwrap();
            each = each.union(&part);
        }
        assert_eq!(all, each);
        let mut bent = fam.clone();
        bent[0].steps[1] = false;
        assert!(matches!(
            oriented_reachable(&sample, &s, Confinement::Parallel(&bent), &g),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn monotone_in_p_and_start() {
        let g = geom();
        let r = OrientedRegion::new(0, 12, -6, 6).unwrap();
        let xi = GapSequence::constant(0..=11, 1).unwrap();
        let lo = sample_oriented(&xi, 0.7, r, 4).unwrap();
        let hi = sample_oriented(&xi, 0.9, r, 4).unwrap();
        let small = SiteSet::from([0]);
        let big = SiteSet::from([-2, 0, 4]);
        let reach = |s: &OrientedSample, set: &SiteSet| {
            oriented_reachable(s, set, Confinement::Region(r), &g).unwrap()
        };
        assert!(reach(&lo, &small).is_subset(&reach(&hi, &small)));
        assert!(reach(&lo, &small).is_subset(&reach(&lo, &big)));
    }
}
