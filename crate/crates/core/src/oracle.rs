//! Slow reference implementations used to cross-check the fast paths.
//!
//! Nothing here shares code with the routines it checks.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::env::{Edge, GapSequence};
use crate::error::{Error, Result};
use crate::fractal::FractalParams;
use crate::oriented::{is_vertex, KSVParams, OrientedEdge, OrientedRegion, OrientedSample, SiteField};
use crate::perc::{PercSample, Rectangle};
use crate::renorm::{LabelTable, ScaleParams};
use crate::sites::SiteSet;

/// `(H, B)` of every interval, scale by scale, each evaluated from the definition by
/// recursion from the top.
pub fn labels_by_definition(xi: &GapSequence, sp: ScaleParams) -> Result<Vec<Vec<(u64, u32)>>> {
    let top = sp.len(sp.k_max);
    if xi.lo().rem_euclid(top) != 0 || (xi.len() as i64) % top != 0 {
        return Err(Error::Alignment("window is not aligned".into()));
    }
    fn label(xi: &GapSequence, sp: &ScaleParams, k: u32, i: i64) -> (u64, u32) {
        if k == 0 {
            return (xi.get(i).expect("inside the window"), 0);
        }
        let l = sp.l as i64;
        let bad: Vec<(u64, u32)> = (i * l..(i + 1) * l)
            .map(|c| label(xi, sp, k - 1, c))
            .filter(|&(h, _)| h != 0)
            .collect();
        if bad.len() >= 2 {
            return (1 + bad.iter().map(|&(h, _)| h).sum::<u64>(), k);
        }
        match bad.first() {
            Some(&(h, b)) if h > 1 => (h - 1, b),
            _ => (0, 0),
        }
    }
    Ok((0..=sp.k_max)
        .map(|k| {
            let len = sp.len(k);
            let first = xi.lo() / len;
            let count = xi.len() as i64 / len;
            (first..first + count)
                .map(|i| label(xi, &sp, k, i))
                .collect()
        })
        .collect())
}

/// Whether a table agrees with [`labels_by_definition`] everywhere; the first mismatch otherwise.
pub fn check_labels(xi: &GapSequence, table: &LabelTable) -> Result<Option<String>> {
    let sp = table.params();
    let want = labels_by_definition(xi, sp)?;
    for (k, row) in want.iter().enumerate() {
        let k = k as u32;
        for (n, &(h, b)) in row.iter().enumerate() {
            let i = table.index_range(k).start + n as i64;
            let got = (table.h(k, i)?, table.b(k, i)?);
            if got != (h, b) {
                return Ok(Some(format!(
                    "interval ({k}, {i}): table {got:?}, definition {:?}",
                    (h, b)
                )));
            }
        }
    }
    Ok(None)
}

/// Violations of the three structural properties of the labels.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StructuralReport {
    /// A good parent with two bad children, or with one whose `H` exceeds 1.
    pub good_single_bad: Vec<String>,
    /// `B_m = k` without two bad children.
    pub merged: Vec<String>,
    /// Bad with `B_m < k` without exactly one bad child.
    pub inherited: Vec<String>,
}

impl StructuralReport {
    pub fn violations(&self) -> usize {
        self.good_single_bad.len() + self.merged.len() + self.inherited.len()
    }
}

pub fn structural_violations(table: &LabelTable) -> Result<StructuralReport> {
    let sp = table.params();
    let mut rep = StructuralReport::default();
    for k in 1..=sp.k_max {
        for i in table.index_range(k) {
            let (h, b) = (table.h(k, i)?, table.b(k, i)?);
            let mut bad = Vec::new();
            for c in i * sp.l as i64..(i + 1) * sp.l as i64 {
                let hc = table.h(k - 1, c)?;
                if hc > 0 {
                    bad.push(hc);
                }
            }
            let at = format!("({k}, {i})");
            if h == 0 {
                if bad.len() > 1 || bad.first().is_some_and(|&hc| hc != 1) {
                    rep.good_single_bad.push(at);
                }
            } else if b == k {
                if bad.len() < 2 {
                    rep.merged.push(at);
                }
            } else if bad.len() != 1 {
                rep.inherited.push(at);
            }
        }
    }
    Ok(rep)
}

fn good_at(labels: &LabelTable, sp: &ScaleParams, x: i64, k: u32) -> Result<bool> {
    Ok(labels.h(k, x.div_euclid(sp.len(k)))? == 0)
}

/// Fractal test by search over every split of `s` into `branching` ordered pieces.
pub fn is_k_fractal_exhaustive(
    s: &SiteSet,
    k: u32,
    labels: &LabelTable,
    fp: &FractalParams,
    sp: &ScaleParams,
) -> Result<bool> {
    fn rec(pts: &[i64], k: u32, b: usize, labels: &LabelTable, sp: &ScaleParams) -> Result<bool> {
        if pts.is_empty() {
            return Ok(false);
        }
        for &x in pts {
            if !good_at(labels, sp, x, k)? {
                return Ok(false);
            }
        }
        if k == 0 {
            return Ok(pts.len() == 1);
        }
        split(pts, k, b, b, labels, sp, None)
    }
    // Every choice of first piece, then the rest with one piece fewer.
    fn split(
        pts: &[i64],
        k: u32,
        b: usize,
        pieces: usize,
        labels: &LabelTable,
        sp: &ScaleParams,
        prev_end: Option<i64>,
    ) -> Result<bool> {
        if pieces == 0 {
            return Ok(pts.is_empty());
        }
        let below = sp.len(k - 1);
        for cut in 1..=pts.len() {
            let (head, tail) = pts.split_at(cut);
            if prev_end.is_some_and(|e| e >= head[0].div_euclid(below)) {
                continue;
            }
            let end = head[head.len() - 1].div_euclid(below);
            if rec(head, k - 1, b, labels, sp)?
                && split(tail, k, b, pieces - 1, labels, sp, Some(end))?
            {
                return Ok(true);
            }
        }
        Ok(false)
    }
    if fp.branching == 0 || fp.branching > 64 {
        return Ok(false);
    }
    rec(s.as_slice(), k, fp.branching as usize, labels, sp)
}

/// Largest ordered family of `k`-fractals inside `t`, by listing every `(first, last)` point
/// pair a `k`-fractal can realize and taking the longest chain.
pub fn count_ordered_fractals_exhaustive(
    t: &SiteSet,
    k: u32,
    labels: &LabelTable,
    fp: &FractalParams,
    sp: &ScaleParams,
) -> Result<u64> {
    let b = fp.branching as usize;
    if b == 0 {
        return Ok(0);
    }
    let mut pts = Vec::new();
    for x in t.iter() {
        let mut ok = true;
        for j in 0..=k {
            ok &= good_at(labels, sp, x, j)?;
        }
        if ok {
            pts.push(x);
        }
    }
    // Realizable (first, last) pairs at each scale.
    let mut spans: BTreeSet<(i64, i64)> = pts.iter().map(|&x| (x, x)).collect();
    for j in 1..=k {
        let below = sp.len(j - 1);
        let prev: Vec<(i64, i64)> = spans.iter().copied().collect();
        let mut chains: BTreeSet<(i64, i64)> = prev.iter().copied().collect();
        for _ in 1..b {
            let mut next = BTreeSet::new();
            for &(a, e) in &chains {
                for &(c, d) in &prev {
                    if e.div_euclid(below) < c.div_euclid(below) {
                        next.insert((a, d));
                    }
                }
            }
            chains = next;
        }
        spans = chains;
    }
    let len = sp.len(k);
    let spans: Vec<(i64, i64)> = spans.into_iter().collect();
    let mut best = vec![1u64; spans.len()];
    for n in 0..spans.len() {
        for m in 0..n {
            if spans[m].1.div_euclid(len) < spans[n].0.div_euclid(len) {
                best[n] = best[n].max(best[m] + 1);
            }
        }
    }
    Ok(best.into_iter().max().unwrap_or(0))
}

/// Right-face sites reached from `s` on the left face, by breadth-first search over the
/// open edges of the rectangle.
pub fn remainder_bfs(sample: &PercSample, s: &SiteSet, rect: Rectangle) -> Result<SiteSet> {
    let mut adj: BTreeMap<(i64, i64), Vec<(i64, i64)>> = BTreeMap::new();
    for e in rect.edges() {
        let open = sample
            .is_open(e)
            .ok_or_else(|| Error::Geometry("rectangle exceeds the sample".into()))?;
        if open {
            let (z, w) = e.endpoints();
            adj.entry(z).or_default().push(w);
            adj.entry(w).or_default().push(z);
        }
    }
    let mut seen: BTreeSet<(i64, i64)> = s.iter().map(|y| (rect.a, y)).collect();
    let mut queue: VecDeque<(i64, i64)> = seen.iter().copied().collect();
    while let Some(z) = queue.pop_front() {
        for &w in adj.get(&z).into_iter().flatten() {
            if seen.insert(w) {
                queue.push_back(w);
            }
        }
    }
    Ok(seen
        .into_iter()
        .filter(|&(x, _)| x == rect.b)
        .map(|(_, y)| y)
        .collect())
}

/// Whether an open path joins `z` to `w`, by depth-first search over the rectangle's edges.
pub fn connected_dfs(sample: &PercSample, rect: Rectangle, z: (i64, i64), w: (i64, i64)) -> bool {
    let open: Vec<Edge> = rect
        .edges()
        .filter(|&e| sample.is_open(e) == Some(true))
        .collect();
    let mut seen = BTreeSet::from([z]);
    let mut stack = vec![z];
    while let Some(u) = stack.pop() {
        if u == w {
            return true;
        }
        for e in &open {
            let (a, b) = e.endpoints();
            let v = if a == u {
                b
            } else if b == u {
                a
            } else {
                continue;
            };
            if seen.insert(v) {
                stack.push(v);
            }
        }
    }
    false
}

/// Right-column vertices reached from `s`, by listing every oriented path inside the region.
pub fn oriented_paths_reach(
    sample: &OrientedSample,
    s: &SiteSet,
    region: OrientedRegion,
) -> SiteSet {
    fn walk(
        sample: &OrientedSample,
        r: &OrientedRegion,
        x: i64,
        y: i64,
        out: &mut BTreeSet<i64>,
    ) {
        if x == r.x1 {
            out.insert(y);
            return;
        }
        for up in [true, false] {
            let e = OrientedEdge { i: x, j: y, up };
            let (nx, ny) = e.end();
            if r.contains(nx, ny) && sample.is_open(e) {
                walk(sample, r, nx, ny, out);
            }
        }
    }
    let mut out = BTreeSet::new();
    for y in s.iter() {
        if region.contains(region.x0, y) && is_vertex(region.x0, y) {
            walk(sample, &region, region.x0, y, &mut out);
        }
    }
    out.into_iter().collect()
}

/// One exploration step re-evaluated target by target: a point of `I_w` counts when a
/// backward search through open sites of the box meets the seeds of `z`.
pub fn ksv_step_by_definition(
    field: &SiteField,
    ksv: &KSVParams,
    i: i64,
    layer: &BTreeMap<i64, Vec<i64>>,
) -> BTreeMap<i64, Vec<i64>> {
    let ell = ksv.ell as i64;
    let m = ksv.ell.div_ceil(10).max(1) as usize;
    let (x0, x1) = (5 * ell * i, 5 * ell * (i + 1));
    let mut next: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
    for (&j, seeds) in layer {
        for j2 in [j - 1, j + 1] {
            let ys = (j.min(j2) - 1) * ell..(j.max(j2) + 2) * ell;
            let mut hit = Vec::new();
            for y in j2 * ell..(j2 + 1) * ell {
                if !is_vertex(x1, y) || !field.is_open(x1, y) {
                    continue;
                }
                let mut frontier = BTreeSet::from([y]);
                for x in (x0..x1).rev() {
                    frontier = frontier
                        .iter()
                        .flat_map(|&v| [v - 1, v + 1])
                        .filter(|v| ys.contains(v) && (x == x0 || field.is_open(x, *v)))
                        .collect();
                }
                if frontier.iter().any(|v| seeds.contains(v)) {
                    hit.push(y);
                }
            }
            if hit.len() >= m {
                next.entry(j2).or_default().extend(hit);
            }
        }
    }
    for seeds in next.values_mut() {
        seeds.sort_unstable();
        seeds.dedup();
        seeds.truncate(m);
    }
    next
}

/// `P(Bin(n, α) ≤ n/2)` by direct summation of the mass function.
pub fn binomial_lower_tail(alpha: f64, n: u64) -> f64 {
    let ln_choose = |k: u64| -> f64 {
        (1..=k)
            .map(|t| ((n - k + t) as f64).ln() - (t as f64).ln())
            .sum()
    };
    (0..=n / 2)
        .map(|k| {
            let mut lp = ln_choose(k);
            if k > 0 {
                lp += k as f64 * alpha.ln();
            }
            if n > k {
                lp += (n - k) as f64 * (1.0 - alpha).ln();
            }
            lp.exp()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractal::{count_ordered_fractals, is_k_fractal};
    use crate::oriented::{
        exploration_region, ksv_block_exploration, oriented_reachable, sample_ksv,
        Confinement, OrientedGeometry,
    };
    use crate::perc::{remainder, sample_configuration};
    use crate::env::{ColumnIndicator, Environment};
    use crate::renorm::compute_labels;

    #[test]
    fn labels_agree_on_fixed_cases() {
        let sp = ScaleParams::new(3, 2).unwrap();
        let xi = GapSequence::new(0, vec![0, 2, 0, 0, 0, 1, 3, 0, 0]).unwrap();
        let t = compute_labels(&xi, sp).unwrap();
        assert_eq!(check_labels(&xi, &t).unwrap(), None);
        assert_eq!(structural_violations(&t).unwrap().violations(), 0);
        let by_def = labels_by_definition(&xi, sp).unwrap();
        assert_eq!(by_def[1], vec![(1, 0), (0, 0), (2, 0)]);
        assert_eq!(by_def[2], vec![(4, 2)]);
    }

    #[test]
    fn structural_report_flags_tampering() {
        let sp = ScaleParams::new(2, 1).unwrap();
        let xi = GapSequence::new(0, vec![3, 0]).unwrap();
        let mut t = compute_labels(&xi, sp).unwrap();
        assert_eq!(structural_violations(&t).unwrap().violations(), 0);
        let json = serde_json::to_string(&t).unwrap().replace("[2]", "[0]");
        t = serde_json::from_str(&json).unwrap();
        assert!(structural_violations(&t).unwrap().violations() > 0);
    }

    #[test]
    fn fractal_oracles_agree() {
        let sp = ScaleParams::new(4, 2).unwrap();
        let fp = FractalParams::desk(4);
        let xi = GapSequence::new(0, vec![0, 1, 0, 0, 2, 0, 0, 0, 0, 0, 0, 3, 0, 0, 0, 0]).unwrap();
        let t = compute_labels(&xi, sp).unwrap();
        let all: Vec<i64> = (0..16).collect();
        for mask in (0u32..1 << 16).step_by(97) {
            let s: SiteSet = all.iter().copied().filter(|&x| mask >> x & 1 == 1).collect();
            for k in 0..=2 {
                assert_eq!(
                    is_k_fractal(&s, k, &t, &fp, &sp).unwrap(),
                    is_k_fractal_exhaustive(&s, k, &t, &fp, &sp).unwrap(),
                    "{s} k={k}"
                );
                assert_eq!(
                    count_ordered_fractals(&s, k, &t, &fp, &sp).unwrap(),
                    count_ordered_fractals_exhaustive(&s, k, &t, &fp, &sp).unwrap(),
                    "{s} k={k}"
                );
            }
        }
    }

    #[test]
    fn bfs_matches_components() {
        let env = Environment::flat(0..=3, 0..=3).unwrap();
        let r = Rectangle::new(0, 3, 0, 3).unwrap();
        for seed in 0..100 {
            let sample = sample_configuration(&env, 0.5, r, seed).unwrap();
            let s = SiteSet::from([0, 2]);
            assert_eq!(
                remainder(&sample, &s, r).unwrap(),
                remainder_bfs(&sample, &s, r).unwrap()
            );
        }
    }

    #[test]
    fn oriented_paths_match_sweep() {
        let g = OrientedGeometry::new(4, 2, 1).unwrap();
        let r = OrientedRegion::new(0, 4, -2, 2).unwrap();
        let edges = r.edges();
        assert!(edges.len() <= 20);
        let s = SiteSet::from([-2, 0, 2]);
        for mask in 0u32..1 << edges.len() {
            let states: Vec<bool> = (0..edges.len()).map(|t| mask >> t & 1 == 1).collect();
            let sample = OrientedSample::from_states(r, &edges, &states).unwrap();
            assert_eq!(
                oriented_reachable(&sample, &s, Confinement::Region(r), &g).unwrap(),
                oriented_paths_reach(&sample, &s, r)
            );
        }
    }

    #[test]
    fn ksv_step_matches_exploration() {
        let k = KSVParams {
            p_g: 0.7,
            p_b: 0.4,
            rho: 0.3,
            ell: 5,
            m: 1,
        };
        for seed in 0..20 {
            let region = exploration_region(&k, 2);
            let eta = ColumnIndicator::bernoulli(region.x1 as usize + 1, k.rho, seed).unwrap();
            let field = sample_ksv(&eta, k.p_g, k.p_b, region, seed).unwrap();
            let e = ksv_block_exploration(&field, &k, 2).unwrap();
            for i in 0..2 {
                assert_eq!(
                    ksv_step_by_definition(&field, &k, i, &e.layers[i as usize]),
                    e.layers[i as usize + 1]
                );
            }
        }
    }

    #[test]
    fn binomial_sum_matches_closed_values() {
        assert!((binomial_lower_tail(0.9, 10) - 0.0016349374).abs() < 1e-9);
        assert!((binomial_lower_tail(0.9, 1) - 0.1).abs() < 1e-15);
    }
}
