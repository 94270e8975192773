use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

use super::{count_occurrences, require_trials, GluingInstance, Landscape, CONDITIONING_BUDGET};
use crate::env::{check_probability, Environment, GapDistribution, GapSampler};
use crate::error::{param, Error, Result};
use crate::par;
use crate::perc::{reaches_boundary, reaches_rect_boundary};
use crate::renorm::ScaleParams;
use crate::rng;
use crate::stats::{normal_upper_tail, two_proportion_z, within_sigmas, EstimateRecord};

const TAG_ENV: u64 = rng::tag("smoke/env");
const TAG_CFG: u64 = rng::tag("smoke/config");
const TAG_SHARP: u64 = rng::tag("sharpness/n");
const TAG_BINOM: u64 = rng::tag("binomial/trial");
const TAG_ORIGIN: u64 = rng::tag("gluing/env");

/// Largest half-width accepted by the sharpness rectangles.
const MAX_HALF_WIDTH: i64 = 1 << 20;
/// Largest site count of a sharpness rectangle.
const MAX_SITES: i64 = 100_000_000;

/// Frequency with which the origin reaches the boundary of `[-n, n]^2`, one fresh
/// environment per trial.
pub fn percolation_probability(
    dist_x: GapDistribution,
    dist_y: GapDistribution,
    p: f64,
    n: i64,
    trials: u64,
    seed: u64,
) -> Result<EstimateRecord> {
    check_probability(p, "p")?;
    require_trials(trials)?;
    if n < 0 {
        return param("box radius must be non-negative");
    }
    let sx = GapSampler::new(&dist_x)?;
    let sy = GapSampler::new(&dist_y)?;
    let lo = -n.max(1);
    let hi = n.max(1) - 1;
    let hits = par::sum_trials(trials, |t| {
        let env = Environment::sample_with(
            &sx,
            &sy,
            dist_x,
            dist_y,
            lo..=hi,
            lo..=hi,
            rng::derive(seed, TAG_ENV, t),
        )
        .expect("window is non-empty");
        reaches_boundary(&env, p, n, rng::derive(seed, TAG_CFG, t)).expect("window covers the box")
            as u64
    });
    let params = crate::params! {
        "dist_x" => dist_x.to_string(),
        "dist_y" => dist_y.to_string(),
        "p" => p,
        "n" => n,
    };
    Ok(EstimateRecord::bernoulli(
        "percolation",
        params,
        hits,
        trials,
        seed,
    ))
}

/// Smallest `k ≥ 1` with `p + p^k < 1`.
pub fn column_width_threshold(p: f64) -> Result<u64> {
    check_probability(p, "p")?;
    if p >= 1.0 {
        return param("no column width blocks crossings at p = 1");
    }
    let mut k = 1u64;
    while p + p.powf(k as f64) >= 1.0 {
        k += 1;
    }
    Ok(k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessConfig {
    pub dist_x: GapDistribution,
    pub dist_y: GapDistribution,
    pub p: f64,
    pub n_list: Vec<u32>,
    /// Aspect exponent: `R_n = [−e^n, e^n] × [−e^{δn}, e^{δn}]`.
    pub delta: f64,
    /// Run-length factor for the wide-column event; defaults to `1 / (2 log(1/α))`.
    pub beta: Option<f64>,
    /// Row-gap factor for the tall-row event; defaults to `−2 / log p`.
    pub a: Option<f64>,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpnessRow {
    pub n: u32,
    pub half_x: i64,
    pub half_y: i64,
    pub k_p: u64,
    /// `None` when no gap reaches `k_p`.
    pub run_length: Option<u64>,
    pub a: f64,
    /// Frequency of a run of `run_length` column gaps `≥ k_p` starting in `[1, e^n)`.
    pub wide_columns: f64,
    /// Frequency of a row gap `> a·n` among rows `1..=e^{δn}`.
    pub tall_row: f64,
    pub connection: EstimateRecord,
}

/// Connection from the origin to the boundary of `R_n` next to the two environment events
/// that block it, for each `n` in the list. Every trial draws a fresh environment.
pub fn sharpness_experiment(cfg: &SharpnessConfig) -> Result<Vec<SharpnessRow>> {
    check_probability(cfg.p, "p")?;
    cfg.dist_x.validate()?;
    cfg.dist_y.validate()?;
    if !(cfg.delta > 0.0) {
        return param("delta must be positive");
    }
    if cfg.trials == 0 {
        return Ok(Vec::new());
    }
    let k_p = column_width_threshold(cfg.p)?;
    let alpha = cfg.dist_x.survival(k_p);
    let beta = match cfg.beta {
        Some(b) if b > 0.0 => Some(b),
        Some(_) => return param("beta must be positive"),
        None if alpha <= 0.0 => None,
        None if alpha >= 1.0 => Some(0.0),
        None => Some(1.0 / (2.0 * (1.0 / alpha).ln())),
    };
    let a = match cfg.a {
        Some(a) => a,
        None if cfg.p > 0.0 => -2.0 / cfg.p.ln(),
        None => 0.0,
    };
    let sx = GapSampler::new(&cfg.dist_x)?;
    let sy = GapSampler::new(&cfg.dist_y)?;
    let mut rows = Vec::with_capacity(cfg.n_list.len());
    for &n in &cfg.n_list {
        let ex = (n as f64).exp();
        let ey = (cfg.delta * n as f64).exp();
        if !(ex <= MAX_HALF_WIDTH as f64 && ey <= MAX_HALF_WIDTH as f64) {
            return Err(Error::Resource(format!(
                "R_{n} exceeds the supported window"
            )));
        }
        let half_x = (ex.floor() as i64).max(1);
        let half_y = (ey.floor() as i64).max(1);
        if (2 * half_x + 1) * (2 * half_y + 1) > MAX_SITES {
            return Err(Error::Resource(format!("R_{n} has too many sites")));
        }
        let run = beta.map(|b| ((b * n as f64).ceil() as u64).max(1));
        let tall = a * n as f64;
        let base = rng::derive(cfg.seed, TAG_SHARP, n as u64);
        let counts = par::sum_vectors(cfg.trials, 3, |t, acc| {
            let env = Environment::sample_with(
                &sx,
                &sy,
                cfg.dist_x,
                cfg.dist_y,
                -half_x..=half_x - 1,
                -half_y..=half_y - 1,
                rng::derive(base, TAG_ENV, t),
            )
            .expect("window is non-empty");
            if let Some(run) = run {
                let mut streak = 0u64;
                for i in 1..half_x {
                    if env.xi_x.get(i).unwrap() >= k_p {
                        streak += 1;
                        if streak >= run {
                            acc[0] += 1;
                            break;
                        }
                    } else {
                        streak = 0;
                    }
                }
            }
            if (1..half_y).any(|j| env.xi_y.get(j).unwrap() as f64 > tall) {
                acc[1] += 1;
            }
            if reaches_rect_boundary(&env, cfg.p, half_x, half_y, rng::derive(base, TAG_CFG, t))
                .expect("window covers the box")
            {
                acc[2] += 1;
            }
        });
        let tf = cfg.trials as f64;
        let wide = counts[0] as f64 / tf;
        let tall_freq = counts[1] as f64 / tf;
        let params = crate::params! {
            "dist_x" => cfg.dist_x.to_string(),
            "dist_y" => cfg.dist_y.to_string(),
            "p" => cfg.p,
            "n" => n,
            "delta" => cfg.delta,
            "half_x" => half_x,
            "half_y" => half_y,
            "k_p" => k_p,
            "run_length" => run,
            "a" => a,
            "wide_columns" => wide,
            "tall_row" => tall_freq,
        };
        rows.push(SharpnessRow {
            n,
            half_x,
            half_y,
            k_p,
            run_length: run,
            a,
            wide_columns: wide,
            tall_row: tall_freq,
            connection: EstimateRecord::bernoulli(
                "sharpness",
                params,
                counts[2],
                cfg.trials,
                cfg.seed,
            ),
        });
    }
    Ok(rows)
}

/// One-sided two-proportion test that `later` is smaller than `earlier` at `level`.
pub fn significant_decrease(earlier: &EstimateRecord, later: &EstimateRecord, level: f64) -> bool {
    let x1 = (earlier.mean * earlier.trials as f64).round() as u64;
    let x2 = (later.mean * later.trials as f64).round() as u64;
    let z = two_proportion_z(x1, earlier.trials, x2, later.trials);
    normal_upper_tail(z) < level
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinomialRow {
    pub n: u64,
    pub estimate: EstimateRecord,
    /// `P(Bin(n, α) ≤ n/2)`.
    pub exact: f64,
    /// `10(1 − α)`.
    pub bound: f64,
    pub below_bound: bool,
    pub matches_exact: bool,
}

impl BinomialRow {
    pub fn passed(&self) -> bool {
        self.below_bound && self.matches_exact
    }
}

/// Lower-tail frequency of `n` Bernoulli(α) draws against `10(1 − α)` and the exact CDF.
pub fn binomial_tail_check(
    alpha: f64,
    n_list: &[u64],
    trials: u64,
    seed: u64,
) -> Result<Vec<BinomialRow>> {
    check_probability(alpha, "alpha")?;
    if alpha < 0.9 {
        return param("alpha must lie in [0.9, 1]");
    }
    require_trials(trials)?;
    let mut out = Vec::with_capacity(n_list.len());
    for &n in n_list {
        if n == 0 {
            return param("n must be positive");
        }
        let hits = par::sum_trials(trials, |t| {
            let mut r = rng::stream(seed, TAG_BINOM ^ n, t);
            let ones = (0..n).filter(|_| r.random::<f64>() < alpha).count() as u64;
            (2 * ones <= n) as u64
        });
        let exact = Binomial::new(alpha, n)
            .map_err(|e| Error::Parameter(e.to_string()))?
            .cdf(n / 2);
        let estimate = EstimateRecord::bernoulli(
            "binomial_tail",
            crate::params! { "alpha" => alpha, "n" => n },
            hits,
            trials,
            seed,
        );
        let bound = 10.0 * (1.0 - alpha);
        out.push(BinomialRow {
            n,
            below_bound: estimate.mean <= bound + 3.0 * estimate.stderr,
            matches_exact: within_sigmas(estimate.mean, exact, trials, 3.0),
            estimate,
            exact,
            bound,
        });
    }
    Ok(out)
}

/// Environment on `[0, L^K)^2` whose origin intervals are good at every scale, by rejection.
pub fn sample_good_origin(
    dist_x: GapDistribution,
    dist_y: GapDistribution,
    sp: ScaleParams,
    seed: u64,
) -> Result<Landscape> {
    let sx = GapSampler::new(&dist_x)?;
    let sy = GapSampler::new(&dist_y)?;
    let top = sp.len(sp.k_max);
    for attempt in 0..CONDITIONING_BUDGET {
        let env = Environment::sample_with(
            &sx,
            &sy,
            dist_x,
            dist_y,
            0..=top - 1,
            0..=top - 1,
            rng::derive(seed, TAG_ORIGIN, attempt),
        )?;
        let land = Landscape::new(env, sp)?;
        let ok = (0..=sp.k_max).all(|k| {
            land.labels_x.is_good(k, 0).unwrap_or(false)
                && land.labels_y.is_good(k, 0).unwrap_or(false)
        });
        if ok {
            return Ok(land);
        }
    }
    Err(Error::Conditioning(format!(
        "no environment with good origin intervals in {CONDITIONING_BUDGET} draws"
    )))
}

/// Frequency of the nested crossing event around the origin.
pub fn gluing_diagnostic(
    inst: &GluingInstance,
    p: f64,
    trials: u64,
    seed: u64,
) -> Result<EstimateRecord> {
    require_trials(trials)?;
    let hits = count_occurrences(inst, p, trials, seed)?;
    let params = crate::params! {
        "k0" => inst.k0,
        "K" => inst.k_top,
        "L" => inst.landscape.sp.l,
        "p" => p,
    };
    Ok(EstimateRecord::bernoulli(
        "gluing", params, hits, trials, seed,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_width() {
        assert_eq!(column_width_threshold(0.5).unwrap(), 2);
        assert_eq!(column_width_threshold(0.9).unwrap(), 22);
        assert!(column_width_threshold(1.0).is_err());
    }

    #[test]
    fn binomial_exact_values() {
        let rows = binomial_tail_check(0.9, &[1, 10], 2000, 1).unwrap();
        assert!((rows[0].exact - 0.1).abs() < 1e-12);
        assert!((rows[1].exact - 0.001_634_937_4).abs() < 1e-9);
        assert!(rows.iter().all(BinomialRow::passed));
        let one = binomial_tail_check(1.0, &[10], 500, 1).unwrap();
        assert_eq!(one[0].estimate.mean, 0.0);
    }

    #[test]
    fn trivial_percolation() {
        let g = GapDistribution::geometric(0.1);
        assert_eq!(
            percolation_probability(g, g, 1.0, 20, 10, 0).unwrap().mean,
            1.0
        );
        assert_eq!(
            percolation_probability(g, g, 0.0, 20, 10, 0).unwrap().mean,
            0.0
        );
    }

    #[test]
    fn empty_sharpness_table() {
        let cfg = SharpnessConfig {
            dist_x: GapDistribution::polynomial(1.5),
            dist_y: GapDistribution::polynomial(3.0),
            p: 0.9,
            n_list: vec![2, 3],
            delta: 1.0,
            beta: None,
            a: None,
            trials: 0,
            seed: 0,
        };
        assert!(sharpness_experiment(&cfg).unwrap().is_empty());
        let big = SharpnessConfig {
            n_list: vec![40],
            trials: 1,
            ..cfg
        };
        assert!(matches!(
            sharpness_experiment(&big),
            Err(Error::Resource(_))
        ));
    }
}
