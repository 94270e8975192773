//! Grid certificate for the label-decay induction, in base-`L` exponents.

use serde::{Deserialize, Serialize};

use super::interval::Interval;
use crate::error::{param, Error, Result};

/// Largest number of grid points evaluated in one call.
pub const MAX_POINTS: u64 = 2_000_000_000;
const MAX_LISTED: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", content = "value", rename_all = "snake_case")]
pub enum Rho {
    /// `rho = L^e`, kept symbolic so that equality cases stay exact.
    PowerOfL(f64),
    Value(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckedRange {
    pub check: String,
    pub r: Option<[u64; 2]>,
    pub h: Option<[u64; 2]>,
    pub k: [u64; 2],
    pub b: Option<[u64; 2]>,
    pub points: u64,
    pub min_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub check: String,
    pub r: Option<u64>,
    pub h: Option<u64>,
    pub k: Option<u64>,
    pub b: Option<u64>,
    /// Upper end of the enclosure of the left-hand exponent.
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub l: u64,
    pub rho: Rho,
    pub within_hypothesis: bool,
    pub checked_ranges: Vec<CheckedRange>,
    /// First violations found, in grid order.
    pub violations: Vec<Violation>,
    pub violation_count: u64,
    pub min_margin: f64,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }
}

struct Tally {
    check: &'static str,
    min_margin: f64,
    points: u64,
    count: u64,
    listed: Vec<Violation>,
}

impl Tally {
    fn new(check: &'static str) -> Self {
        Tally {
            check,
            min_margin: f64::INFINITY,
            points: 0,
            count: 0,
            listed: Vec::new(),
        }
    }

    /// Records `lhs ≤ rhs` (or `<` when `strict`), with `lhs` an enclosure.
    #[inline]
    fn record(&mut self, lhs: Interval, rhs: f64, strict: bool, at: [Option<u64>; 4]) {
        self.points += 1;
        let margin = (Interval::exact(rhs) - Interval::exact(lhs.hi)).lo;
        if margin < self.min_margin {
            self.min_margin = margin;
        }
        let bad = if strict { lhs.hi >= rhs } else { lhs.hi > rhs };
        if bad {
            self.count += 1;
            if self.listed.len() < MAX_LISTED {
                self.listed.push(Violation {
                    check: self.check.to_string(),
                    r: at[0],
                    h: at[1],
                    k: at[2],
                    b: at[3],
                    lhs: lhs.hi,
                    rhs,
                    margin,
                });
            }
        }
    }
}

fn int(x: u64) -> Interval {
    Interval::exact(x as f64)
}

/// Checks, over finite grids:
/// (i) `h·log_L rho ≤ −3h − 13`;
/// (ii) `1 − (k + (h+1)/(b+1)) − 2(h+1) − 13 ≤ −(k+1) − h/(b+1) − 2h − 13`;
/// (iii) `φ(r,h,k) < −r` with
///   `φ = −(r−1)k − h/((k+1)(k+2)) − 12r + 18 + r log_L h + r log_L(k+1)`, `r ∈ [2, min(r_max, L)]`;
/// (iv) `log_L(k+1) − k − 15 − log_L(1 − L^{−2}) ≤ −k/2`.
pub fn check_certificate(
    l: u64,
    rho: Rho,
    r_max: u64,
    h_max: u64,
    k_max: u64,
    b_max: u64,
) -> Result<CertificateReport> {
    if l < 2 {
        return param(format!("L must be at least 2, got {l}"));
    }
    if l as f64 > 2f64.powi(53) || h_max as f64 > 2f64.powi(52) || k_max as f64 > 2f64.powi(26) {
        return param("grid values must be exactly representable");
    }
    if h_max == 0 {
        return param("h_max must be at least 1");
    }
    match rho {
        Rho::Value(v) if !(v > 0.0 && v < 1.0) => {
            return param(format!("rho must lie in (0,1), got {v}"))
        }
        Rho::PowerOfL(e) if !(e < 0.0 && e.is_finite()) => {
            return param(format!("rho exponent must be negative, got {e}"))
        }
        _ => {}
    }
    let r_hi = r_max.min(l);
    let b_pts: u64 = (0..=k_max).map(|k| k.min(b_max) + 1).sum();
    let n_ii = h_max.saturating_mul(b_pts);
    let n_iii = if r_hi >= 2 {
        (r_hi - 1).saturating_mul(h_max).saturating_mul(k_max + 1)
    } else {
        0
    };
    let total = n_ii.saturating_add(n_iii).saturating_add(h_max);
    if total > MAX_POINTS {
        let scale = (MAX_POINTS as f64 / total as f64).sqrt();
        return Err(Error::Resource(format!(
            "certificate grid has {total} points (limit {MAX_POINTS}); try h_max <= {} and k_max <= {}",
            ((h_max as f64 * scale) as u64).max(1),
            ((k_max as f64 * scale) as u64).max(1)
        )));
    }

    let ln_l = int(l).ln();
    let log_rho = match rho {
        Rho::PowerOfL(e) => Interval::exact(e),
        Rho::Value(v) => Interval::exact(v).log(ln_l),
    };
    let within_hypothesis = l > (1 << 15) && log_rho.hi <= -16.0;

    let mut base = Tally::new("base_case");
    for h in 1..=h_max {
        let lhs = int(h) * log_rho;
        let rhs = -3.0 * h as f64 - 13.0;
        base.record(lhs, rhs, false, [None, Some(h), Some(0), Some(0)]);
    }

    let mut chain = Tally::new("case1_chain");
    for k in 0..=k_max {
        for b in 0..=k.min(b_max) {
            let bp1 = int(b + 1);
            for h in 1..=h_max {
                let lhs = int(1) - (int(k) + int(h + 1) / bp1) - int(2 * (h + 1)) - int(13);
                let rhs = -(int(k + 1) + int(h) / bp1) - int(2 * h) - int(13);
                // Compare the enclosures: lhs.hi against the lower end of rhs.
                chain.record(lhs, rhs.lo, false, [None, Some(h), Some(k), Some(b)]);
            }
        }
    }

    let mut phi = Tally::new("phi_below_minus_r");
    if r_hi >= 2 {
        let log_h: Vec<Interval> = (1..=h_max).map(|h| int(h).log(ln_l)).collect();
        for k in 0..=k_max {
            let log_k1 = int(k + 1).log(ln_l);
            let denom = int((k + 1) * (k + 2));
            for h in 1..=h_max {
                let s = log_h[(h - 1) as usize] + log_k1;
                let c = -(int(h) / denom);
                for r in 2..=r_hi {
                    let lin = -((r - 1) as f64) * k as f64 - 12.0 * r as f64 + 18.0;
                    let value = Interval::exact(lin) + c + int(r) * s;
                    phi.record(value, -(r as f64), true, [Some(r), Some(h), Some(k), None]);
                }
            }
        }
    }

    let mut sum = Tally::new("pk_summation");
    let inv_l2 = int(1) / (int(l) * int(l));
    let log_tail = (int(1) - inv_l2).log(ln_l);
    for k in 0..=k_max {
        let lhs = int(k + 1).log(ln_l) - int(k) - int(15) - log_tail;
        let rhs = Interval::exact(-(k as f64)) / int(2);
        sum.record(lhs, rhs.lo, false, [None, None, Some(k), None]);
    }

    let tallies = [base, chain, phi, sum];
    let mut checked_ranges = Vec::new();
    let mut violations = Vec::new();
    let mut count = 0;
    let mut min_margin = f64::INFINITY;
    for t in tallies {
        let (r, h, b) = match t.check {
            "base_case" => (None, Some([1, h_max]), None),
            "case1_chain" => (None, Some([1, h_max]), Some([0, b_max.min(k_max)])),
            "phi_below_minus_r" => (Some([2, r_hi]), Some([1, h_max]), None),
            _ => (None, None, None),
        };
        let k = if t.check == "base_case" {
            [0, 0]
        } else {
            [0, k_max]
        };
        if t.points > 0 {
            min_margin = min_margin.min(t.min_margin);
        }
        checked_ranges.push(CheckedRange {
            check: t.check.to_string(),
            r,
            h,
            k,
            b,
            points: t.points,
            min_margin: t.min_margin,
        });
        count += t.count;
        let room = MAX_LISTED.saturating_sub(violations.len());
        violations.extend(t.listed.into_iter().take(room));
    }
    Ok(CertificateReport {
        l,
        rho,
        within_hypothesis,
        checked_ranges,
        violations,
        violation_count: count,
        min_margin,
    })
}

/// `φ(r,h,k)` as an enclosure.
pub fn phi(l: u64, r: u64, h: u64, k: u64) -> Interval {
    let ln_l = int(l).ln();
    let lin = -((r - 1) as f64) * k as f64 - 12.0 * r as f64 + 18.0;
    Interval::exact(lin) - int(h) / int((k + 1) * (k + 2))
        + int(r) * int(h).log(ln_l)
        + int(r) * int(k + 1).log(ln_l)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_example() {
        let v = phi(1_000_000, 2, 1, 0);
        assert!(v.lo <= -6.5 && -6.5 <= v.hi);
        assert!(v.hi - v.lo < 1e-12);
    }

    #[test]
    fn base_case_equality_has_zero_margin() {
        let rep = check_certificate(1_000_000, Rho::PowerOfL(-16.0), 2, 1, 0, 0).unwrap();
        assert!(rep.passed(), "{:?}", rep.violations);
        assert_eq!(rep.checked_ranges[0].min_margin, 0.0);
        assert!(rep.within_hypothesis);
    }

    #[test]
    fn small_l_fails() {
        let rep = check_certificate(2, Rho::PowerOfL(-16.0), 100, 200, 10, 10).unwrap();
        assert!(!rep.passed());
        assert!(rep
            .violations
            .iter()
            .any(|v| v.check == "phi_below_minus_r" && v.r == Some(2)));
        assert!(!rep.within_hypothesis);
    }

    #[test]
    fn oversized_grid_is_a_resource_error() {
        assert!(matches!(
            check_certificate(1_000_000, Rho::PowerOfL(-16.0), 1000, 1_000_000, 1000, 1000),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn value_rho_above_threshold_is_outside_hypothesis() {
        let rep = check_certificate(1_000_000, Rho::Value(1e-3), 3, 5, 2, 2).unwrap();
        assert!(!rep.within_hypothesis);
        assert!(!rep.passed());
    }
}
