use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::sites::SiteSet;

/// Scales of the oriented lattice: `L^x_k = L^k` horizontally, `L^y_k = (L/c)^k` vertically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrientedGeometry {
    pub l: u64,
    pub c: u64,
    pub k_max: u32,
}

impl OrientedGeometry {
    pub fn new(l: u64, c: u64, k_max: u32) -> Result<Self> {
        if l < 2 {
            return param(format!("L must be at least 2, got {l}"));
        }
        if c == 0 || !l.is_multiple_of(c) {
            return param(format!("c = {c} must divide L = {l}"));
        }
        if (l as f64).powi(k_max as i32) > (1u64 << 40) as f64 {
            return param(format!("L^{k_max} is out of range"));
        }
        Ok(OrientedGeometry { l, c, k_max })
    }

    pub fn len_x(&self, k: u32) -> i64 {
        (self.l as i64).pow(k)
    }

    pub fn len_y(&self, k: u32) -> i64 {
        ((self.l / self.c) as i64).pow(k)
    }
}

#[inline]
pub fn is_vertex(x: i64, y: i64) -> bool {
    (x + y).rem_euclid(2) == 0
}

/// `((i, j), (i+1, j±1))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrientedEdge {
    pub i: i64,
    pub j: i64,
    pub up: bool,
}

impl OrientedEdge {
    pub fn new(i: i64, j: i64, up: bool) -> Result<Self> {
        if !is_vertex(i, j) {
            return Err(Error::Geometry(format!("({i}, {j}) is not a vertex")));
        }
        Ok(OrientedEdge { i, j, up })
    }

    pub fn start(&self) -> (i64, i64) {
        (self.i, self.j)
    }

    pub fn end(&self) -> (i64, i64) {
        (self.i + 1, if self.up { self.j + 1 } else { self.j - 1 })
    }

    pub fn shares_endpoint(&self, other: &OrientedEdge) -> bool {
        self.start() == other.start() || self.end() == other.end()
    }
}

/// The box of a scale-`k` renormalized edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrientedBox {
    pub k: u32,
    pub edge: OrientedEdge,
}

impl OrientedBox {
    pub fn new(k: u32, edge: OrientedEdge) -> Self {
        OrientedBox { k, edge }
    }

    pub fn x_range(&self, g: &OrientedGeometry) -> Range<i64> {
        let len = g.len_x(self.k);
        self.edge.i * len..(self.edge.i + 1) * len
    }

    pub fn y_range(&self, g: &OrientedGeometry) -> Range<i64> {
        let len = g.len_y(self.k);
        let lo = self.edge.j.min(self.edge.end().1);
        lo * len..(lo + 2) * len
    }

    pub fn contains(&self, x: i64, y: i64, g: &OrientedGeometry) -> bool {
        is_vertex(x, y) && self.x_range(g).contains(&x) && self.y_range(g).contains(&y)
    }

    /// Whether the two boxes share a vertex.
    pub fn meets(&self, other: &OrientedBox, g: &OrientedGeometry) -> bool {
        let (a, b) = (self.x_range(g), other.x_range(g));
        let (c, d) = (self.y_range(g), other.y_range(g));
        let xs = a.start.max(b.start)..a.end.min(b.end);
        let ys = c.start.max(d.start)..c.end.min(d.end);
        xs.clone()
            .any(|x| ys.clone().any(|y| is_vertex(x, y)))
    }
}

/// Vertex `(x, y)` on a column `x ∈ L^x_k·Z` whose interval index `j = ⌊y / L^y_k⌋` has
/// `x / L^x_k + j` even.
pub fn is_admissible(x: i64, y: i64, k: u32, g: &OrientedGeometry) -> bool {
    let lx = g.len_x(k);
    if !is_vertex(x, y) || x.rem_euclid(lx) != 0 {
        return false;
    }
    (x / lx + y.div_euclid(g.len_y(k))).rem_euclid(2) == 0
}

pub fn is_admissible_set(x: i64, s: &SiteSet, k: u32, g: &OrientedGeometry) -> bool {
    s.iter().all(|y| is_admissible(x, y, k, g))
}

/// Fractal test on column `x` with admissibility in place of goodness.
pub fn is_admissible_fractal(
    x: i64,
    s: &SiteSet,
    k: u32,
    branching: u64,
    g: &OrientedGeometry,
) -> bool {
    fn rec(x: i64, pts: &[i64], k: u32, b: usize, g: &OrientedGeometry) -> bool {
        if pts.iter().any(|&y| !is_admissible(x, y, k, g)) {
            return false;
        }
        if k == 0 {
            return pts.len() == 1;
        }
        let chunk = pts.len() / b;
        let below = g.len_y(k - 1);
        pts.chunks(chunk).enumerate().all(|(n, piece)| {
            (n == 0 || pts[n * chunk - 1].div_euclid(below) < piece[0].div_euclid(below))
                && rec(x, piece, k - 1, b, g)
        })
    }
    if branching == 0 || (branching as f64).powi(k as i32) > 1e15 {
        return false;
    }
    if s.len() as u64 != branching.pow(k) {
        return false;
    }
    rec(x, s.as_slice(), k, branching as usize, g)
}

/// Renormalized path of scale-`k` boxes from `(i, j)`, one up/down step per box.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrientedCorridor {
    pub k: u32,
    pub i: i64,
    pub j: i64,
    pub steps: Vec<bool>,
}

impl OrientedCorridor {
    pub fn new(k: u32, i: i64, j: i64, steps: Vec<bool>) -> Result<Self> {
        if !is_vertex(i, j) {
            return Err(Error::Geometry(format!("({i}, {j}) is not a vertex")));
        }
        if steps.is_empty() {
            return Err(Error::Geometry("corridor needs at least one step".into()));
        }
        Ok(OrientedCorridor { k, i, j, steps })
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn boxes(&self) -> Vec<OrientedBox> {
        let mut j = self.j;
        self.steps
            .iter()
            .enumerate()
            .map(|(t, &up)| {
                let e = OrientedEdge {
                    i: self.i + t as i64,
                    j,
                    up,
                };
                j = e.end().1;
                OrientedBox::new(self.k, e)
            })
            .collect()
    }

    /// Columns `[i·L^x_k, (i+n)·L^x_k]`.
    pub fn x_span(&self, g: &OrientedGeometry) -> (i64, i64) {
        let len = g.len_x(self.k);
        (self.i * len, (self.i + self.len() as i64) * len)
    }

    /// Union of the boxes, each closed on its right column.
    pub fn contains(&self, x: i64, y: i64, g: &OrientedGeometry) -> bool {
        let len = g.len_x(self.k);
        let (a, b) = self.x_span(g);
        if !is_vertex(x, y) || x < a || x > b {
            return false;
        }
        let boxes = self.boxes();
        let t = ((x - a) / len) as usize;
        let hit = |t: usize| boxes.get(t).is_some_and(|bx| bx.y_range(g).contains(&y));
        hit(t) || ((x - a) % len == 0 && t > 0 && hit(t - 1))
    }
}

/// Corridors from `(i, j)` for every `j` in `js` with `i + j` even, all stepping the same way.
pub fn parallel_family(
    k: u32,
    i: i64,
    js: Range<i64>,
    n: usize,
    up: bool,
) -> Result<Vec<OrientedCorridor>> {
    js.filter(|&j| is_vertex(i, j))
        .map(|j| OrientedCorridor::new(k, i, j, vec![up; n]))
        .collect()
}

/// Same scale, start column, length and steps; distinct start rows.
pub fn check_parallel(family: &[OrientedCorridor]) -> Result<()> {
    let Some(first) = family.first() else {
        return Err(Error::Geometry("empty corridor family".into()));
    };
    for c in &family[1..] {
        if c.k != first.k || c.i != first.i || c.steps != first.steps {
            return Err(Error::Geometry(format!(
                "corridors from ({}, {}) and ({}, {}) are not parallel",
                first.i, first.j, c.i, c.j
            )));
        }
    }
    let mut js: Vec<i64> = family.iter().map(|c| c.j).collect();
    js.sort_unstable();
    if js.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Geometry("repeated corridor in family".into()));
    }
    Ok(())
}
