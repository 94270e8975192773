//! Monte Carlo records and the significance helpers used by every estimator.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub experiment: String,
    pub params: Map<String, Value>,
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
    pub seed: u64,
}

impl EstimateRecord {
    /// Record for a Bernoulli frequency `successes / trials`.
    pub fn bernoulli(
        experiment: impl Into<String>,
        params: Map<String, Value>,
        successes: u64,
        trials: u64,
        seed: u64,
    ) -> Self {
        let mean = if trials == 0 {
            0.0
        } else {
            successes as f64 / trials as f64
        };
        EstimateRecord {
            experiment: experiment.into(),
            params,
            mean,
            stderr: bernoulli_se(mean, trials),
            trials,
            seed,
        }
    }

    pub fn param(&self, key: &str) -> Option<&Value> {
        self.params.get(key)
    }

    /// Agreement with an exact value at `sigmas` standard errors, measured under the exact value.
    pub fn agrees_with(&self, exact: f64, sigmas: f64) -> bool {
        within_sigmas(self.mean, exact, self.trials, sigmas)
    }
}

pub fn bernoulli_se(mean: f64, trials: u64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    (mean * (1.0 - mean) / trials as f64).max(0.0).sqrt()
}

/// `|estimate − exact| ≤ sigmas · sqrt(exact(1−exact)/n)`, with a small slack for roundoff.
pub fn within_sigmas(estimate: f64, exact: f64, trials: u64, sigmas: f64) -> bool {
    let se = bernoulli_se(exact, trials);
    (estimate - exact).abs() <= sigmas * se + 1e-12
}

/// One-sided two-proportion z statistic for `H1: p1 > p2`, pooled variance.
pub fn two_proportion_z(x1: u64, n1: u64, x2: u64, n2: u64) -> f64 {
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let p1 = x1 as f64 / n1f;
    let p2 = x2 as f64 / n2f;
    let pooled = (x1 + x2) as f64 / (n1f + n2f);
    let var = pooled * (1.0 - pooled) * (1.0 / n1f + 1.0 / n2f);
    if var <= 0.0 {
        return if p1 > p2 {
            f64::INFINITY
        } else if p1 < p2 {
            f64::NEG_INFINITY
        } else {
            0.0
        };
    }
    (p1 - p2) / var.sqrt()
}

/// Upper tail of the standard normal, `P(Z > z)`.
pub fn normal_upper_tail(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(z / std::f64::consts::SQRT_2)
}

pub const CSV_HEADER: [&str; 6] = ["experiment", "params_json", "mean", "stderr", "trials", "seed"];

/// Writes records as CSV with a fixed column order; `params_json` holds the parameter map.
pub fn write_csv<W: std::io::Write>(records: &[EstimateRecord], out: W) -> crate::Result<()> {
    let io = |e: csv::Error| crate::Error::Resource(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in records {
        let params = serde_json::to_string(&r.params).expect("plain data serializes");
        w.write_record([
            r.experiment.clone(),
            params,
            format!("{:?}", r.mean),
            format!("{:?}", r.stderr),
            r.trials.to_string(),
            r.seed.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| crate::Error::Resource(e.to_string()))?;
    Ok(())
}

/// Builds a parameter map from `(key, value)` pairs.
#[macro_export]
macro_rules! params {
    ($($k:expr => $v:expr),* $(,)?) => {{
        #[allow(unused_mut)]
        let mut m = serde_json::Map::new();
        $( m.insert(String::from($k), serde_json::json!($v)); )*
        m
    }};
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_columns() {
        let r = EstimateRecord::bernoulli("u_k", crate::params! {"p" => 0.5}, 1, 4, 9);
        let mut buf = Vec::new();
        write_csv(&[r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "experiment,params_json,mean,stderr,trials,seed\nu_k,\"{\"\"p\"\":0.5}\",0.25,0.21650635094610965,4,9\n"
        );
    }

    #[test]
    fn se_matches_formula() {
        let r = EstimateRecord::bernoulli("x", Map::new(), 30, 100, 0);
        assert!((r.stderr - (0.3f64 * 0.7 / 100.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn normal_tail_values() {
        assert!((normal_upper_tail(0.0) - 0.5).abs() < 1e-7);
        assert!((normal_upper_tail(2.326_347_874) - 0.01).abs() < 1e-6);
        assert!((normal_upper_tail(-1.0) - 0.841_344_746).abs() < 1e-6);
    }

    #[test]
    fn z_signs() {
        assert!(two_proportion_z(80, 100, 50, 100) > 4.0);
        assert_eq!(two_proportion_z(100, 100, 100, 100), 0.0);
    }
}
