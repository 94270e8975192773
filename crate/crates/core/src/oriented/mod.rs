//! Oriented models: bond percolation on `{i + j even}` with stretched columns, and the
//! columnar site model with good and bad columns.

mod geometry;
mod ksv;
mod sample;

pub use geometry::{
    check_parallel, is_admissible, is_admissible_fractal, is_admissible_set, is_vertex,
    parallel_family, OrientedBox, OrientedCorridor, OrientedEdge, OrientedGeometry,
};
pub use ksv::{
    crossing_targets, exploration_region, ksv_block_exploration, ksv_survival_probability,
    tube_probability, tube_witness, Exploration, KSVParams,
};
pub use sample::{
    oriented_reachable, sample_ksv, sample_oriented, Confinement, OrientedRegion, OrientedSample,
    SiteField,
};

use crate::env::{check_probability, stretched_probability, GapDistribution, GapSampler, GapSequence};
use crate::error::{param, Result};
use crate::par;
use crate::rng;
use crate::stats::EstimateRecord;
use sample::{sweep, KIND_DOWN, KIND_UP};

const TAG_ENV: u64 = rng::tag("oriented/env");
const TAG_CFG: u64 = rng::tag("oriented/config");

/// Whether an open oriented path from `(0, 0)` reaches column `depth`. Edge uniforms are the
/// ones [`sample_oriented`] uses for the same seed.
pub fn reaches_depth(xi: &GapSequence, p: f64, depth: i64, seed: u64) -> Result<bool> {
    check_probability(p, "p")?;
    let q: Vec<f64> = (0..depth)
        .map(|i| Ok(stretched_probability(p, xi.get(i)?)))
        .collect::<Result<_>>()?;
    let kind = |up| if up { KIND_UP } else { KIND_DOWN };
    Ok(!sweep([0], 0, depth, |x, y, up| {
        rng::site_uniform(seed, kind(up), x, y) < q[x as usize]
    })
    .is_empty())
}

/// Frequency with which `(0, 0)` reaches column `depth`, one fresh column sequence per trial.
pub fn oriented_percolation_probability(
    dist: GapDistribution,
    p: f64,
    depth: i64,
    trials: u64,
    seed: u64,
) -> Result<EstimateRecord> {
    check_probability(p, "p")?;
    if depth < 1 {
        return param("depth must be positive");
    }
    if trials == 0 {
        return param("trials must be positive");
    }
    let sampler = GapSampler::new(&dist)?;
    let hits = par::try_map(trials, |t| {
        let xi = GapSequence::sample(&sampler, 0..=depth - 1, rng::derive(seed, TAG_ENV, t), 0)?;
        reaches_depth(&xi, p, depth, rng::derive(seed, TAG_CFG, t)).map(u64::from)
    })?
    .into_iter()
    .sum();
    let params = crate::params! {
        "model" => "oriented_geom",
        "dist" => dist.to_string(),
        "p" => p,
        "depth" => depth,
    };
    Ok(EstimateRecord::bernoulli(
        "oriented_percolation",
        params,
        hits,
        trials,
        seed,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sites::SiteSet;

    #[test]
    fn certain_at_p_one() {
        let r = oriented_percolation_probability(GapDistribution::geometric(0.3), 1.0, 50, 30, 1)
            .unwrap();
        assert_eq!(r.mean, 1.0);
        assert_eq!(r.param("model").unwrap(), "oriented_geom");
    }

    #[test]
    fn depth_reach_matches_sample() {
        let xi = GapSequence::constant(0..=9, 1).unwrap();
        let g = OrientedGeometry::new(4, 2, 1).unwrap();
        let r = OrientedRegion::new(0, 10, -10, 10).unwrap();
        for seed in 0..40 {
            let s = sample_oriented(&xi, 0.85, r, seed).unwrap();
            let reached =
                oriented_reachable(&s, &SiteSet::from([0]), Confinement::Region(r), &g).unwrap();
            assert_eq!(reaches_depth(&xi, 0.85, 10, seed).unwrap(), !reached.is_empty());
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let d = GapDistribution::geometric(0.3);
        assert!(oriented_percolation_probability(d, 0.5, 0, 10, 1).is_err());
        assert!(oriented_percolation_probability(d, 1.5, 5, 10, 1).is_err());
    }
}
