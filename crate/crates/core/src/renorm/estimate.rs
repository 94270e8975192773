use serde::Serialize;

use super::{compute_labels, ScaleParams};
use crate::env::{GapDistribution, GapSampler, GapSequence};
use crate::error::{param, Result};
use crate::par;
use crate::params;
use crate::rng;
use crate::stats::EstimateRecord;

pub const DEFAULT_H_MAX: u64 = 32;

const TAG_PK: u64 = rng::tag("renorm/pk");

fn rho_value(dist: &GapDistribution) -> serde_json::Value {
    match dist {
        GapDistribution::Geometric { rho } => serde_json::json!(rho),
        _ => serde_json::Value::Null,
    }
}

/// Labels at position 0 of every scale, for one fresh environment.
fn origin_labels(
    sampler: &GapSampler,
    params: ScaleParams,
    seed: u64,
    trial: u64,
    out: &mut Vec<(u64, u32)>,
) {
    let n = params.len(params.k_max);
    let mut r = rng::stream(seed, TAG_PK, trial);
    let values = (0..n).map(|_| sampler.sample(&mut r)).collect();
    let xi = GapSequence::new(0, values).expect("non-empty window");
    let table = compute_labels(&xi, params).expect("aligned window");
    out.clear();
    for k in 0..=params.k_max {
        out.push((table.h_row(k)[0], table.b_row(k)[0]));
    }
}

/// Frequency of `{H_(k,0) > 0}` for every `k ≤ K_max`.
pub fn estimate_pk(
    dist: &GapDistribution,
    params: ScaleParams,
    trials: u64,
    seed: u64,
) -> Result<Vec<EstimateRecord>> {
    if trials == 0 {
        return param("trials must be at least 1");
    }
    let sampler = GapSampler::new(dist)?;
    let width = params.k_max as usize + 1;
    let counts = par::sum_vectors(trials, width, |t, acc| {
        let mut labels = Vec::with_capacity(width);
        origin_labels(&sampler, params, seed, t, &mut labels);
        for (k, &(h, _)) in labels.iter().enumerate() {
            if h > 0 {
                acc[k] += 1;
            }
        }
    });
    Ok(counts
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            EstimateRecord::bernoulli(
                "p_k",
                params! {
                    "k" => k, "L" => params.l, "rho" => rho_value(dist),
                    "dist" => dist.to_string(),
                },
                c,
                trials,
                seed,
            )
        })
        .collect())
}

/// Joint `(H, B)` bins at position 0; `h_max + 1` collects every `H > h_max`.
#[derive(Debug, Clone, Serialize)]
pub struct PkhbTable {
    pub k_max: u32,
    pub h_max: u64,
    pub records: Vec<EstimateRecord>,
}

impl PkhbTable {
    pub fn get(&self, k: u32, h: u64, b: u32) -> Option<&EstimateRecord> {
        if k > self.k_max || h == 0 || h > self.h_max + 1 || b > self.k_max {
            return None;
        }
        let hb = (self.h_max + 1) as usize;
        let bb = self.k_max as usize + 1;
        self.records
            .get(k as usize * hb * bb + (h as usize - 1) * bb + b as usize)
    }

    pub fn overflow(&self, k: u32, b: u32) -> Option<&EstimateRecord> {
        self.get(k, self.h_max + 1, b)
    }
}

pub fn estimate_pkhb(
    dist: &GapDistribution,
    params: ScaleParams,
    trials: u64,
    seed: u64,
    h_max: u64,
) -> Result<PkhbTable> {
    if trials == 0 {
        return param("trials must be at least 1");
    }
    if h_max == 0 {
        return param("h_max must be at least 1");
    }
    let sampler = GapSampler::new(dist)?;
    let kb = params.k_max as usize + 1;
    let hb = (h_max + 1) as usize;
    let width = kb * hb * kb;
    let counts = par::sum_vectors(trials, width, |t, acc| {
        let mut labels = Vec::with_capacity(kb);
        origin_labels(&sampler, params, seed, t, &mut labels);
        for (k, &(h, b)) in labels.iter().enumerate() {
            if h > 0 {
                let hi = (h.min(h_max + 1) - 1) as usize;
                acc[k * hb * kb + hi * kb + b as usize] += 1;
            }
        }
    });
    let mut records = Vec::with_capacity(width);
    for k in 0..kb {
        for hi in 0..hb {
            for b in 0..kb {
                let h = hi as u64 + 1;
                let overflow = h > h_max;
                records.push(EstimateRecord::bernoulli(
                    "p_khb",
                    params! {
                        "k" => k, "h" => h, "b" => b, "L" => params.l,
                        "rho" => rho_value(dist), "dist" => dist.to_string(),
                        "overflow" => overflow,
                    },
                    counts[k * hb * kb + hi * kb + b],
                    trials,
                    seed,
                ));
            }
        }
    }
    Ok(PkhbTable {
        k_max: params.k_max,
        h_max,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rho_gives_zero() {
        let p = ScaleParams::new(4, 2).unwrap();
        let r = estimate_pk(&GapDistribution::geometric(0.0), p, 500, 1).unwrap();
        assert!(r.iter().all(|e| e.mean == 0.0));
    }

    #[test]
    fn scale_zero_matches_rho() {
        let p = ScaleParams::new(4, 0).unwrap();
        let r = estimate_pk(&GapDistribution::geometric(0.2), p, 50_000, 2).unwrap();
        assert!(r[0].agrees_with(0.2, 3.0), "{:?}", r[0]);
    }

    #[test]
    fn b_above_k_is_empty() {
        let p = ScaleParams::new(3, 2).unwrap();
        let t = estimate_pkhb(&GapDistribution::geometric(0.3), p, 2000, 3, 8).unwrap();
        for k in 0..=2u32 {
            for h in 1..=9 {
                for b in (k + 1)..=2 {
                    assert_eq!(t.get(k, h, b).unwrap().mean, 0.0);
                }
            }
        }
        assert!(estimate_pk(&GapDistribution::geometric(0.3), p, 0, 1).is_err());
    }
}
