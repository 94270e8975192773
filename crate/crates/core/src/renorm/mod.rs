//! Interval paving, recursive defect labels and block weights.

mod certificate;
mod estimate;
pub mod interval;

pub use certificate::{check_certificate, phi, CertificateReport, CheckedRange, Rho, Violation};
pub use estimate::{estimate_pk, estimate_pkhb, PkhbTable, DEFAULT_H_MAX};

use serde::{Deserialize, Serialize};

use crate::env::GapSequence;
use crate::error::{param, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleParams {
    pub l: u64,
    pub k_max: u32,
}

impl ScaleParams {
    pub fn new(l: u64, k_max: u32) -> Result<Self> {
        if l < 2 {
            return param(format!("scale ratio L must be at least 2, got {l}"));
        }
        let mut acc: i64 = 1;
        for _ in 0..k_max {
            acc = acc
                .checked_mul(l as i64)
                .ok_or_else(|| Error::Parameter(format!("L^{k_max} overflows 64 bits")))?;
        }
        Ok(ScaleParams { l, k_max })
    }

    /// `L^k`; callers stay within `k_max`, which `new` checked for overflow.
    #[inline]
    pub fn len(&self, k: u32) -> i64 {
        (self.l as i64).pow(k)
    }

    pub fn interval(&self, k: u32, x: i64) -> IntervalIndex {
        IntervalIndex {
            k,
            i: x.div_euclid(self.len(k)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IntervalIndex {
    pub k: u32,
    pub i: i64,
}

impl IntervalIndex {
    pub fn new(k: u32, i: i64) -> Self {
        IntervalIndex { k, i }
    }

    pub fn span(&self, params: &ScaleParams) -> std::ops::Range<i64> {
        let len = params.len(self.k);
        self.i * len..(self.i + 1) * len
    }

    pub fn children(&self, params: &ScaleParams) -> impl Iterator<Item = IntervalIndex> {
        assert!(self.k > 0, "scale-0 intervals have no children");
        let (k, base, l) = (self.k - 1, self.i * params.l as i64, params.l as i64);
        (0..l).map(move |j| IntervalIndex { k, i: base + j })
    }

    pub fn parent(&self, params: &ScaleParams) -> IntervalIndex {
        IntervalIndex {
            k: self.k + 1,
            i: self.i.div_euclid(params.l as i64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct LabelRow {
    start: i64,
    h: Vec<u64>,
    b: Vec<u32>,
}

/// Labels `(H, B)` for every interval of every scale inside an aligned window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelTable {
    params: ScaleParams,
    rows: Vec<LabelRow>,
}

/// `(H, B)` of a parent from its children's labels; `k` is the children's scale.
#[inline]
pub fn combine(children_h: &[u64], children_b: &[u32], k: u32) -> (u64, u32) {
    let mut bad = 0usize;
    let mut last = 0usize;
    let mut sum = 0u64;
    for (idx, &h) in children_h.iter().enumerate() {
        if h > 0 {
            bad += 1;
            last = idx;
            sum = sum.saturating_add(h);
        }
    }
    match bad {
        0 => (0, 0),
        1 => {
            let h = children_h[last] - 1;
            if h == 0 {
                (0, 0)
            } else {
                (h, children_b[last])
            }
        }
        _ => (sum.saturating_add(1), k + 1),
    }
}

pub fn compute_labels(xi: &GapSequence, params: ScaleParams) -> Result<LabelTable> {
    let top = params.len(params.k_max);
    if xi.lo().rem_euclid(top) != 0 || (xi.len() as i64) % top != 0 {
        return Err(Error::Alignment(format!(
            "window [{}, {}] is not aligned to L^{} = {top}",
            xi.lo(),
            xi.hi(),
            params.k_max
        )));
    }
    let l = params.l as usize;
    let mut rows = Vec::with_capacity(params.k_max as usize + 1);
    rows.push(LabelRow {
        start: xi.lo(),
        h: xi.values().to_vec(),
        b: vec![0; xi.len()],
    });
    for k in 0..params.k_max {
        let prev = &rows[k as usize];
        let n = prev.h.len() / l;
        let mut h = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for m in 0..n {
            let (hh, bb) = combine(&prev.h[m * l..(m + 1) * l], &prev.b[m * l..(m + 1) * l], k);
            h.push(hh);
            b.push(bb);
        }
        rows.push(LabelRow {
            start: prev.start.div_euclid(params.l as i64),
            h,
            b,
        });
    }
    Ok(LabelTable { params, rows })
}

impl LabelTable {
    pub fn params(&self) -> ScaleParams {
        self.params
    }

    /// Interval indices available at scale `k`.
    pub fn index_range(&self, k: u32) -> std::ops::Range<i64> {
        let row = &self.rows[k as usize];
        row.start..row.start + row.h.len() as i64
    }

    /// Lattice positions covered by the table.
    pub fn site_range(&self) -> std::ops::Range<i64> {
        self.index_range(0)
    }

    fn slot(&self, k: u32, i: i64) -> Result<usize> {
        if k > self.params.k_max {
            return Err(Error::Window {
                what: "scale",
                index: k as i64,
                lo: 0,
                hi: self.params.k_max as i64,
            });
        }
        let r = self.index_range(k);
        if !r.contains(&i) {
            return Err(Error::Window {
                what: "interval",
                index: i,
                lo: r.start,
                hi: r.end - 1,
            });
        }
        Ok((i - r.start) as usize)
    }

    pub fn h(&self, k: u32, i: i64) -> Result<u64> {
        let s = self.slot(k, i)?;
        Ok(self.rows[k as usize].h[s])
    }

    pub fn b(&self, k: u32, i: i64) -> Result<u32> {
        let s = self.slot(k, i)?;
        Ok(self.rows[k as usize].b[s])
    }

    pub fn is_good(&self, k: u32, i: i64) -> Result<bool> {
        Ok(self.h(k, i)? == 0)
    }

    pub fn h_row(&self, k: u32) -> &[u64] {
        &self.rows[k as usize].h
    }

    pub fn b_row(&self, k: u32) -> &[u32] {
        &self.rows[k as usize].b
    }

    /// True when every scale-`j` interval containing `x`, `j ≤ k`, is good.
    pub fn is_good_up_to(&self, x: i64, k: u32) -> Result<bool> {
        for j in 0..=k {
            if self.h(j, x.div_euclid(self.params.len(j)))? > 0 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// `H_{(k,i0)} + ... + H_{(k,i1)}`.
pub fn block_weight(table: &LabelTable, k: u32, i0: i64, i1: i64) -> Result<u64> {
    if i0 > i1 {
        return param(format!("block bounds reversed: {i0} > {i1}"));
    }
    let mut w = 0u64;
    for i in i0..=i1 {
        w = w.saturating_add(table.h(k, i)?);
    }
    Ok(w)
}

pub fn is_good_block(table: &LabelTable, k: u32, i0: i64, i1: i64) -> Result<bool> {
    Ok(block_weight(table, k, i0, i1)? <= 1)
}

pub fn block_length(i0: i64, i1: i64) -> i64 {
    i1 - i0
}
