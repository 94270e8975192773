//! Quenched bond percolation on rectangles, remainders and exact enumeration.

mod boundary;
mod dsu;
mod exact;
mod remainder;

pub use boundary::{
    reaches_boundary, reaches_boundary_in, reaches_rect_boundary, reaches_rect_boundary_in,
};
pub use dsu::DisjointSets;
pub use exact::{exact_event_probability, MAX_ENUMERATED_EDGES};
pub use remainder::{
    remainder, remainder_vertical, sliced_remainder, sliced_remainder_vertical, Components,
};

use serde::{Deserialize, Serialize};

use crate::env::{check_probability, stretched_probability, Axis, Edge, Environment};
use crate::error::{Error, Result};
use crate::rng;

/// `[a,b) × [c,d)` together with its right and top faces.
///
/// Sites are `[a,b] × [c,d]`; edges are `{w, w+e1}` and `{w, w+e2}` for `w ∈ [a,b) × [c,d)`,
/// so the right face carries no vertical edges and the top face no horizontal ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rectangle {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl Rectangle {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        if a >= b || c >= d {
            return Err(Error::Geometry(format!(
                "rectangle [{a},{b}) x [{c},{d}) is empty"
            )));
        }
        Ok(Rectangle { a, b, c, d })
    }

    pub fn width(&self) -> i64 {
        self.b - self.a
    }

    pub fn height(&self) -> i64 {
        self.d - self.c
    }

    pub fn edge_count(&self) -> usize {
        2 * (self.width() * self.height()) as usize
    }

    pub fn site_count(&self) -> usize {
        ((self.width() + 1) * (self.height() + 1)) as usize
    }

    pub fn contains_site(&self, x: i64, y: i64) -> bool {
        x >= self.a && x <= self.b && y >= self.c && y <= self.d
    }

    #[inline]
    pub fn site_index(&self, x: i64, y: i64) -> usize {
        ((y - self.c) * (self.width() + 1) + (x - self.a)) as usize
    }

    pub fn site_at(&self, idx: usize) -> (i64, i64) {
        let w = self.width() + 1;
        (self.a + idx as i64 % w, self.c + idx as i64 / w)
    }

    pub fn contains_edge(&self, e: Edge) -> bool {
        e.x >= self.a && e.x < self.b && e.y >= self.c && e.y < self.d
    }

    /// Position of `e` in the rectangle's edge order: horizontal edges row by row, then vertical.
    #[inline]
    pub fn edge_index(&self, e: Edge) -> Option<usize> {
        if !self.contains_edge(e) {
            return None;
        }
        let base = ((e.y - self.c) * self.width() + (e.x - self.a)) as usize;
        Some(match e.axis {
            Axis::Horizontal => base,
            Axis::Vertical => base + (self.width() * self.height()) as usize,
        })
    }

    pub fn edge_at(&self, idx: usize) -> Edge {
        let half = (self.width() * self.height()) as usize;
        let (axis, j) = if idx < half {
            (Axis::Horizontal, idx)
        } else {
            (Axis::Vertical, idx - half)
        };
        Edge {
            x: self.a + (j as i64 % self.width()),
            y: self.c + (j as i64 / self.width()),
            axis,
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        (0..self.edge_count()).map(|i| self.edge_at(i))
    }

    pub fn contains_rect(&self, r: &Rectangle) -> bool {
        r.a >= self.a && r.b <= self.b && r.c >= self.c && r.d <= self.d
    }
}

/// Hash key separating the two edge families.
#[inline]
pub(crate) fn axis_key(axis: Axis) -> u64 {
    match axis {
        Axis::Horizontal => 0x68,
        Axis::Vertical => 0x76,
    }
}

/// The uniform attached to `edge` under `seed`; an edge is open iff it falls below the edge probability.
#[inline]
pub fn edge_uniform(seed: u64, edge: Edge) -> f64 {
    rng::site_uniform(seed, axis_key(edge.axis), edge.x, edge.y)
}

pub fn edge_is_open(env: &Environment, p: f64, seed: u64, edge: Edge) -> Result<bool> {
    let q = stretched_probability(p, env.gap_of(edge)?);
    Ok(edge_uniform(seed, edge) < q)
}

/// One percolation configuration on a rectangle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PercSample {
    rect: Rectangle,
    open: Vec<bool>,
    /// Bits of `p` for the record; configurations built by hand carry `None`.
    p_bits: Option<u64>,
    seed: u64,
}

impl PercSample {
    pub fn from_states(rect: Rectangle, open: Vec<bool>) -> Result<Self> {
        if open.len() != rect.edge_count() {
            return Err(Error::Parameter(format!(
                "expected {} edge states, got {}",
                rect.edge_count(),
                open.len()
            )));
        }
        Ok(PercSample {
            rect,
            open,
            p_bits: None,
            seed: 0,
        })
    }

    pub fn all(rect: Rectangle, state: bool) -> Self {
        PercSample {
            rect,
            open: vec![state; rect.edge_count()],
            p_bits: None,
            seed: 0,
        }
    }

    pub fn rect(&self) -> Rectangle {
        self.rect
    }

    pub fn p(&self) -> Option<f64> {
        self.p_bits.map(f64::from_bits)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn states(&self) -> &[bool] {
        &self.open
    }

    pub(crate) fn states_mut(&mut self) -> &mut [bool] {
        &mut self.open
    }

    /// `None` when `e` is not an edge of the sampled rectangle.
    #[inline]
    pub fn is_open(&self, e: Edge) -> Option<bool> {
        self.rect.edge_index(e).map(|i| self.open[i])
    }

    #[inline]
    pub(crate) fn open_h(&self, x: i64, y: i64) -> bool {
        let r = &self.rect;
        self.open[((y - r.c) * r.width() + (x - r.a)) as usize]
    }

    #[inline]
    pub(crate) fn open_v(&self, x: i64, y: i64) -> bool {
        let r = &self.rect;
        self.open[((y - r.c) * r.width() + (x - r.a) + r.width() * r.height()) as usize]
    }

    pub fn open_count(&self) -> usize {
        self.open.iter().filter(|&&o| o).count()
    }

    /// Debug picture, top row first: `+` sites, `-`/`|` open edges, `.` closed ones.
    pub fn to_text_grid(&self) -> String {
        let r = self.rect;
        let mut out = String::new();
        for y in (r.c..=r.d).rev() {
            if y < r.d {
                for x in r.a..=r.b {
                    out.push(if x < r.b && self.open_v(x, y) {
                        '|'
                    } else if x < r.b {
                        '.'
                    } else {
                        ' '
                    });
                    if x < r.b {
                        out.push(' ');
                    }
                }
                out.push('\n');
            }
            for x in r.a..=r.b {
                out.push('+');
                if x < r.b {
                    out.push(if y < r.d && self.open_h(x, y) {
                        '-'
                    } else if y < r.d {
                        '.'
                    } else {
                        ' '
                    });
                }
            }
            out.push('\n');
        }
        out
    }
}

fn window_check(env: &Environment, rect: &Rectangle) -> Result<()> {
    env.xi_x.get(rect.a)?;
    env.xi_x.get(rect.b - 1)?;
    env.xi_y.get(rect.c)?;
    env.xi_y.get(rect.d - 1)?;
    Ok(())
}

pub fn sample_configuration(
    env: &Environment,
    p: f64,
    rect: Rectangle,
    seed: u64,
) -> Result<PercSample> {
    check_probability(p, "p")?;
    window_check(env, &rect)?;
    let px: Vec<f64> = (rect.a..rect.b)
        .map(|x| stretched_probability(p, env.xi_x.get(x).unwrap()))
        .collect();
    let py: Vec<f64> = (rect.c..rect.d)
        .map(|y| stretched_probability(p, env.xi_y.get(y).unwrap()))
        .collect();
    let mut open = vec![false; rect.edge_count()];
    let half = (rect.width() * rect.height()) as usize;
    let hk = axis_key(Axis::Horizontal);
    let vk = axis_key(Axis::Vertical);
    for y in rect.c..rect.d {
        let qy = py[(y - rect.c) as usize];
        for x in rect.a..rect.b {
            let base = ((y - rect.c) * rect.width() + (x - rect.a)) as usize;
            open[base] = rng::site_uniform(seed, hk, x, y) < px[(x - rect.a) as usize];
            open[base + half] = rng::site_uniform(seed, vk, x, y) < qy;
        }
    }
    Ok(PercSample {
        rect,
        open,
        p_bits: Some(p.to_bits()),
        seed,
    })
}
