use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::geometry::is_vertex;
use super::sample::{sample_ksv, sweep, OrientedRegion, SiteField};
use crate::env::{check_probability, ColumnIndicator};
use crate::error::{param, Error, Result};
use crate::par;
use crate::rng;
use crate::stats::EstimateRecord;

const TAG_ETA: u64 = rng::tag("ksv/eta");
const TAG_FIELD: u64 = rng::tag("ksv/field");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KSVParams {
    pub p_g: f64,
    pub p_b: f64,
    pub rho: f64,
    pub ell: u64,
    pub m: u64,
}

impl KSVParams {
    pub fn validate(&self) -> Result<()> {
        check_probability(self.p_g, "p_g")?;
        check_probability(self.p_b, "p_b")?;
        check_probability(self.rho, "rho")?;
        if self.ell == 0 {
            return param("block side must be positive");
        }
        Ok(())
    }

    /// Number of points carried from one block to the next, `⌈ℓ/10⌉` and at least one.
    pub fn seed_count(&self) -> usize {
        self.ell.div_ceil(10).max(1) as usize
    }

    pub fn width(&self) -> i64 {
        5 * self.ell as i64
    }

    /// `(1 − L^(−10))^(M/4) ≤ p_b^(ℓ²)`.
    pub fn reduction_holds(&self, l: u64) -> bool {
        let lhs = self.m as f64 / 4.0 * (-(l as f64).powi(-10)).ln_1p();
        let rhs = (self.ell * self.ell) as f64 * self.p_b.ln();
        lhs <= rhs
    }

    /// Smallest `M` for which the reduction holds, if any.
    pub fn min_multiplier(&self, l: u64) -> Option<u64> {
        let per = (-(l as f64).powi(-10)).ln_1p();
        let rhs = (self.ell * self.ell) as f64 * self.p_b.ln();
        if !rhs.is_finite() || per == 0.0 {
            return None;
        }
        let m = (4.0 * rhs / per).ceil();
        (m < u64::MAX as f64).then_some(m.max(0.0) as u64)
    }
}

/// Renormalized sites reached at each layer, with their carried seed points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exploration {
    pub layers: Vec<BTreeMap<i64, Vec<i64>>>,
}

impl Exploration {
    pub fn sizes(&self) -> Vec<usize> {
        self.layers.iter().map(|g| g.len()).collect()
    }

    pub fn survived(&self) -> bool {
        self.layers.last().is_some_and(|g| !g.is_empty())
    }
}

/// Field needed by `layers` steps of the exploration.
pub fn exploration_region(ksv: &KSVParams, layers: u32) -> OrientedRegion {
    let ell = ksv.ell as i64;
    let n = layers as i64;
    OrientedRegion {
        x0: 0,
        x1: ksv.width() * n,
        y0: -(n + 1) * ell,
        y1: (n + 2) * ell - 1,
    }
}

/// Points of `I_w` reached from `seeds` on column `5iℓ` inside the box of the renormalized
/// edge `(i, j) → (i+1, j2)`.
pub fn crossing_targets(
    field: &SiteField,
    ksv: &KSVParams,
    i: i64,
    j: i64,
    j2: i64,
    seeds: &[i64],
) -> Vec<i64> {
    let ell = ksv.ell as i64;
    let (x0, x1) = (ksv.width() * i, ksv.width() * (i + 1));
    let ys = (j.min(j2) - 1) * ell..(j.max(j2) + 2) * ell;
    let reached = sweep(seeds.iter().copied(), x0, x1, |x, y, up| {
        let y2 = if up { y + 1 } else { y - 1 };
        ys.contains(&y2) && field.is_open(x + 1, y2)
    });
    reached.restrict(j2 * ell..(j2 + 1) * ell).into_vec()
}

/// One-step block exploration: from `G(0) = {0}` seeded by the vertices of `I_(0,0)`, a
/// renormalized edge `(z, w)` succeeds when at least `⌈ℓ/10⌉` points of `I_w` are reached
/// inside its box; `w` then carries the lowest `⌈ℓ/10⌉` reached points.
pub fn ksv_block_exploration(
    field: &SiteField,
    ksv: &KSVParams,
    layers: u32,
) -> Result<Exploration> {
    ksv.validate()?;
    let need = exploration_region(ksv, layers);
    if !field.region().covers(&need) {
        return Err(Error::Geometry(format!(
            "field {:?} does not cover {:?}",
            field.region(),
            need
        )));
    }
    let m = ksv.seed_count();
    let ell = ksv.ell as i64;
    let first: Vec<i64> = (0..ell).filter(|&y| is_vertex(0, y)).collect();
    let mut layers_out = vec![BTreeMap::from([(0i64, first)])];
    for i in 0..layers as i64 {
        let mut next: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
        for (&j, seeds) in &layers_out[i as usize] {
            for j2 in [j - 1, j + 1] {
                let hit = crossing_targets(field, ksv, i, j, j2, seeds);
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
        layers_out.push(next);
    }
    Ok(Exploration { layers: layers_out })
}

/// Frequency with which the exploration survives `layers` steps, with a fresh Bernoulli(`rho`)
/// column indicator per trial.
pub fn ksv_survival_probability(
    ksv: &KSVParams,
    layers: u32,
    trials: u64,
    seed: u64,
) -> Result<EstimateRecord> {
    ksv.validate()?;
    if trials == 0 {
        return param("trials must be positive");
    }
    let region = exploration_region(ksv, layers);
    let cols = region.x1 as usize + 1;
    let hits = par::try_map(trials, |t| {
        let eta = ColumnIndicator::bernoulli(cols, ksv.rho, rng::derive(seed, TAG_ETA, t))?;
        let field = sample_ksv(&eta, ksv.p_g, ksv.p_b, region, rng::derive(seed, TAG_FIELD, t))?;
        Ok(ksv_block_exploration(&field, ksv, layers)?.survived() as u64)
    })?
    .into_iter()
    .sum();
    let params = crate::params! {
        "model" => "ksv",
        "p_g" => ksv.p_g,
        "p_b" => ksv.p_b,
        "rho" => ksv.rho,
        "ell" => ksv.ell,
        "layers" => layers,
    };
    Ok(EstimateRecord::bernoulli("ksv_survival", params, hits, trials, seed))
}

/// Sites of a single tube from `(5iℓ, y_start)` whose opening alone lets the start reach
/// `⌈ℓ/10⌉` points of `I_(i+1, j2)`: a path to the middle of the target interval followed by
/// a fan over the last columns.
pub fn tube_witness(
    ksv: &KSVParams,
    i: i64,
    j: i64,
    j2: i64,
    y_start: i64,
) -> Result<Vec<(i64, i64)>> {
    let ell = ksv.ell as i64;
    let (x0, x1) = (ksv.width() * i, ksv.width() * (i + 1));
    if (j2 - j).abs() != 1 {
        return Err(Error::Geometry(format!("({i}, {j}) → ({}, {j2}) is not an edge", i + 1)));
    }
    if !is_vertex(x0, y_start) || !(j * ell..(j + 1) * ell).contains(&y_start) {
        return Err(Error::Geometry(format!(
            "({x0}, {y_start}) is not a vertex of the source interval"
        )));
    }
    let d = ksv.seed_count() as i64 - 1;
    let mut yc = j2 * ell + ell / 2;
    if !is_vertex(x1 - d, yc) {
        yc -= 1;
    }
    if yc - d < j2 * ell || yc + d >= (j2 + 1) * ell {
        return Err(Error::Geometry(format!("block side {ell} is too small for a tube")));
    }
    let mut out = Vec::new();
    let mut y = y_start;
    for x in x0 + 1..=x1 - d {
        y += if y < yc { 1 } else { -1 };
        out.push((x, y));
    }
    debug_assert_eq!(y, yc);
    for t in 1..=d {
        for s in (-t..=t).step_by(2) {
            out.push((x1 - d + t, yc + s));
        }
    }
    Ok(out)
}

/// Probability that every site of the tube is open in a bad column.
pub fn tube_probability(p_b: f64, sites: usize) -> f64 {
    p_b.powi(sites as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p_g: f64, p_b: f64, ell: u64) -> KSVParams {
        KSVParams {
            p_g,
            p_b,
            rho: 0.2,
            ell,
            m: 1,
        }
    }

    fn field(ksv: &KSVParams, layers: u32, seed: u64) -> SiteField {
        let r = exploration_region(ksv, layers);
        let eta = ColumnIndicator::bernoulli(r.x1 as usize + 1, ksv.rho, seed).unwrap();
        sample_ksv(&eta, ksv.p_g, ksv.p_b, r, seed).unwrap()
    }

    #[test]
    fn fixed_points() {
        let one = params(1.0, 1.0, 5);
        let e = ksv_block_exploration(&field(&one, 3, 1), &one, 3).unwrap();
        assert_eq!(e.sizes(), vec![1, 2, 3, 4]);
        assert!(e.survived());
        let zero = params(0.0, 0.0, 5);
        let e = ksv_block_exploration(&field(&zero, 3, 1), &zero, 3).unwrap();
        assert_eq!(e.sizes()[1], 0);
        assert!(!e.survived());
    }

    #[test]
    fn small_field_is_rejected() {
        let k = params(0.5, 0.5, 5);
        let f = SiteField::all(OrientedRegion::new(0, 20, 0, 20).unwrap(), true);
        assert!(matches!(
            ksv_block_exploration(&f, &k, 2),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn deterministic_and_dominated() {
        let lo = params(0.75, 0.3, 10);
        let hi = params(0.75, 0.6, 10);
        let a = ksv_block_exploration(&field(&lo, 4, 7), &lo, 4).unwrap();
        let b = ksv_block_exploration(&field(&lo, 4, 7), &lo, 4).unwrap();
        assert_eq!(a, b);
        let c = ksv_block_exploration(&field(&hi, 4, 7), &hi, 4).unwrap();
        for (g, h) in a.layers.iter().zip(&c.layers) {
            assert!(g.keys().all(|j| h.contains_key(j)));
        }
    }

    #[test]
    fn tube_alone_crosses() {
        for ell in [5u64, 10, 23, 40] {
            let k = params(0.0, 0.0, ell);
            let region = exploration_region(&k, 1);
            for (j2, y) in [(1, 0), (-1, 2)] {
                let tube = tube_witness(&k, 0, 0, j2, y).unwrap();
                let mut f = SiteField::all(region, false);
                for &(x, y) in &tube {
                    f.set(x, y, true).unwrap();
                }
                let hit = crossing_targets(&f, &k, 0, 0, j2, &[y]);
                assert!(hit.len() >= k.seed_count(), "ell = {ell}");
                if ell >= 5 {
                    assert!(tube.len() as u64 <= ell * ell);
                }
            }
        }
        assert!(tube_witness(&params(0.5, 0.5, 5), 0, 0, 2, 0).is_err());
    }

    #[test]
    fn reduction_threshold() {
        let mut k = params(0.9, 0.5, 3);
        let m = k.min_multiplier(2).unwrap();
        k.m = m;
        assert!(k.reduction_holds(2));
        k.m = m - 1;
        assert!(!k.reduction_holds(2));
        assert_eq!(params(0.9, 0.0, 3).min_multiplier(2), None);
    }

    #[test]
    fn survival_estimate_extremes() {
        let r = ksv_survival_probability(&params(1.0, 1.0, 5), 2, 20, 3).unwrap();
        assert_eq!(r.mean, 1.0);
        let r = ksv_survival_probability(&params(0.0, 0.0, 5), 2, 20, 3).unwrap();
        assert_eq!(r.mean, 0.0);
    }
}
