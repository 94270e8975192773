//! Monte Carlo estimates of crossing failures, smoke tests and exact scale-0 values.
//!
//! Every estimator builds an [`EventInstance`]: a fixed environment, a finite rectangle
//! and an event on configurations of that rectangle. The same instance feeds the Monte
//! Carlo loop and exhaustive enumeration.

mod crossing;
mod scenario;
mod smoke;

pub use crossing::{
    contraction_report, estimate_corridor_crossing, estimate_recovery, estimate_u_k, estimate_v_k,
    ContractionRow, CorridorInstance, CorridorStart, FamilyEstimate, GluingInstance,
    RecoveryInstance, RecoverySpec, scenario_instances,
};
pub use scenario::{
    DefectPolicy, Event, RowPolicy, ScenarioFamily, ScenarioInstance, ScenarioSpec, StartPolicy,
    CONDITIONING_BUDGET,
};
pub use smoke::{
    binomial_tail_check, column_width_threshold, gluing_diagnostic, percolation_probability,
    sample_good_origin, sharpness_experiment, significant_decrease, BinomialRow, SharpnessConfig,
    SharpnessRow,
};

use std::sync::Mutex;

use crate::env::{check_probability, Environment};
use crate::error::{param, Error, Result};
use crate::par;
use crate::perc::{exact_event_probability, sample_configuration, PercSample, Rectangle};
use crate::renorm::{compute_labels, LabelTable, ScaleParams};
use crate::rng;

const TAG_TRIAL: u64 = rng::tag("estimators/trial");

/// `(u_0, v_0(h))`: one crossing edge per start row, all rows independent.
pub fn exact_scale0(p: f64, h: u64, loss_exponent: u32) -> Result<(f64, f64)> {
    check_probability(p, "p")?;
    if h == 0 {
        return param("defect intensity must be at least 1");
    }
    let e = loss_exponent as u64 * (h - 1);
    if e > 1023 {
        return param(format!("family size 2^{e} is out of range"));
    }
    let fail = 1.0 - p.powi((h + 1) as i32);
    Ok((1.0 - p, fail.powf(2f64.powi(e as i32))))
}

/// An environment together with its label tables on both axes.
#[derive(Debug, Clone, PartialEq)]
pub struct Landscape {
    pub env: Environment,
    pub sp: ScaleParams,
    pub labels_x: LabelTable,
    pub labels_y: LabelTable,
}

impl Landscape {
    pub fn new(env: Environment, sp: ScaleParams) -> Result<Self> {
        let labels_x = compute_labels(&env.xi_x, sp)?;
        let labels_y = compute_labels(&env.xi_y, sp)?;
        Ok(Landscape {
            env,
            sp,
            labels_x,
            labels_y,
        })
    }

    /// Flat environment on `[0, nx·L^K) × [0, ny·L^K)`.
    pub fn flat(sp: ScaleParams, nx: i64, ny: i64) -> Result<Self> {
        let top = sp.len(sp.k_max);
        if nx < 1 || ny < 1 {
            return param("landscape needs at least one top-scale interval per axis");
        }
        Landscape::new(Environment::flat(0..=nx * top - 1, 0..=ny * top - 1)?, sp)
    }
}

/// A fixed environment, a rectangle and an event on its configurations.
pub trait EventInstance: Sync {
    fn env(&self) -> &Environment;
    fn rect(&self) -> Rectangle;
    fn occurs(&self, sample: &PercSample) -> Result<bool>;
}

/// Number of trials, out of `trials`, in which the event occurs.
pub fn count_occurrences(inst: &dyn EventInstance, p: f64, trials: u64, seed: u64) -> Result<u64> {
    check_probability(p, "p")?;
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let hits = par::sum_trials(trials, |t| {
        let s = rng::derive(seed, TAG_TRIAL, t);
        match sample_configuration(inst.env(), p, inst.rect(), s).and_then(|c| inst.occurs(&c)) {
            Ok(hit) => hit as u64,
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e);
                0
            }
        }
    });
    match failure.into_inner().unwrap() {
        Some(e) => Err(e),
        None => Ok(hits),
    }
}

/// Exact probability of the instance's event by enumeration of its rectangle.
pub fn exact_probability(inst: &dyn EventInstance, p: f64) -> Result<f64> {
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let v = exact_event_probability(inst.env(), p, inst.rect(), |s| match inst.occurs(s) {
        Ok(b) => b,
        Err(e) => {
            failure.lock().unwrap().get_or_insert(e);
            false
        }
    })?;
    match failure.into_inner().unwrap() {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

fn require_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return param("trials must be positive");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scale0_closed_forms() {
        let (u, v) = exact_scale0(0.9, 1, 1).unwrap();
        assert!((u - 0.1).abs() < 1e-15);
        assert!((v - (1.0 - 0.81)).abs() < 1e-15);
        assert_eq!(exact_scale0(1.0, 3, 4).unwrap().1, 0.0);
        let (_, v) = exact_scale0(0.5, 3, 1).unwrap();
        assert!((v - (1.0f64 - 0.0625).powi(4)).abs() < 1e-15);
        assert!(exact_scale0(0.5, 0, 1).is_err());
    }
}
