use std::collections::BTreeMap;
use std::ops::Range;

use serde::Serialize;

use super::{
    count_occurrences, require_trials, EventInstance, Landscape, ScenarioFamily, ScenarioInstance,
    ScenarioSpec,
};
use crate::env::{check_probability, Environment};
use crate::error::{param, Error, Result};
use crate::fractal::{
    build_grouped_fractal, detect_recovery, is_k_fractal, Corridor, FractalParams, OrderedFamily,
};
use crate::perc::{Components, PercSample, Rectangle};
use crate::renorm::{is_good_block, IntervalIndex};
use crate::rng;
use crate::sites::SiteSet;
use crate::stats::EstimateRecord;

const TAG_SCENARIO: u64 = rng::tag("crossing/scenario");
const TAG_MC: u64 = rng::tag("crossing/mc");
const TAG_SCALE: u64 = rng::tag("crossing/scale");

/// Per-scenario failure frequencies and the largest of them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyEstimate {
    pub per_scenario: Vec<EstimateRecord>,
    pub max: EstimateRecord,
}

/// The fixed instances that an estimate over `scenarios` with `seed` runs on.
pub fn scenario_instances(scenarios: &[ScenarioSpec], seed: u64) -> Result<Vec<ScenarioInstance>> {
    scenarios
        .iter()
        .enumerate()
        .map(|(idx, spec)| spec.instantiate(rng::derive(seed, TAG_SCENARIO, idx as u64)))
        .collect()
}

fn estimate_family(
    experiment: &str,
    scenarios: &[ScenarioSpec],
    p: f64,
    trials: u64,
    seed: u64,
) -> Result<FamilyEstimate> {
    check_probability(p, "p")?;
    require_trials(trials)?;
    if scenarios.is_empty() {
        return param("scenario family is empty");
    }
    let mut per_scenario = Vec::with_capacity(scenarios.len());
    for (idx, inst) in scenario_instances(scenarios, seed)?.into_iter().enumerate() {
        let spec = &inst.spec;
        let hits = count_occurrences(&inst, p, trials, rng::derive(seed, TAG_MC, idx as u64))?;
        let mut params = spec.params();
        params.insert("p".into(), p.into());
        params.insert("construction".into(), inst.construction.into());
        per_scenario.push(EstimateRecord::bernoulli(
            experiment, params, hits, trials, seed,
        ));
    }
    let best =
        per_scenario.iter().enumerate().fold(
            0,
            |b, (i, r)| if r.mean > per_scenario[b].mean { i } else { b },
        );
    let mut max = per_scenario[best].clone();
    max.experiment = format!("{experiment}_max");
    Ok(FamilyEstimate { per_scenario, max })
}

/// Failure to regroup after a good column, over the scenario family.
pub fn estimate_u_k(
    scenarios: &[ScenarioSpec],
    p: f64,
    trials: u64,
    seed: u64,
) -> Result<FamilyEstimate> {
    if let Some(s) = scenarios.iter().find(|s| s.h != 0) {
        return param(format!(
            "scenario {} has h = {}, expected a good column",
            s.name, s.h
        ));
    }
    estimate_family("u_k", scenarios, p, trials, seed)
}

/// Failure to keep any fractal after a defective column, over the scenario family.
pub fn estimate_v_k(
    scenarios: &[ScenarioSpec],
    p: f64,
    trials: u64,
    seed: u64,
) -> Result<FamilyEstimate> {
    if let Some(s) = scenarios.iter().find(|s| s.h == 0) {
        return param(format!("scenario {} has h = 0, expected a defect", s.name));
    }
    estimate_family("v_k", scenarios, p, trials, seed)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorridorStart {
    /// Leftmost grouped fractal of the transverse interval.
    Grouped,
    Given(SiteSet),
}

/// A good corridor, its start set and the event that it is not well crossed.
#[derive(Debug, Clone)]
pub struct CorridorInstance {
    pub landscape: Landscape,
    pub corridor: Corridor,
    pub start: SiteSet,
    pub fractal: FractalParams,
}

impl CorridorInstance {
    pub fn new(
        landscape: Landscape,
        corridor: Corridor,
        start: CorridorStart,
        fractal: FractalParams,
    ) -> Result<Self> {
        let sp = landscape.sp;
        fractal.validate(&sp)?;
        if !corridor.is_good(&landscape.labels_x, &landscape.labels_y)? {
            return Err(Error::Precondition(format!("{corridor:?} is not good")));
        }
        let across = match corridor.orientation {
            crate::fractal::Orientation::Horizontal => &landscape.labels_y,
            crate::fractal::Orientation::Vertical => &landscape.labels_x,
        };
        let start = match start {
            CorridorStart::Grouped => build_grouped_fractal(
                across,
                IntervalIndex::new(corridor.k, corridor.j),
                &fractal,
                &sp,
            )?
            .ok_or_else(|| {
                Error::Precondition("transverse interval hosts no grouped fractal".into())
            })?,
            CorridorStart::Given(s) => {
                let t = corridor.transverse(&sp);
                if s.iter().any(|y| !t.contains(&y)) {
                    return Err(Error::Geometry(format!("start {s} leaves the corridor")));
                }
                s
            }
        };
        Ok(CorridorInstance {
            landscape,
            corridor,
            start,
            fractal,
        })
    }
}

impl EventInstance for CorridorInstance {
    fn env(&self) -> &Environment {
        &self.landscape.env
    }

    fn rect(&self) -> Rectangle {
        self.corridor.rect(&self.landscape.sp)
    }

    fn occurs(&self, sample: &PercSample) -> Result<bool> {
        let l = &self.landscape;
        Ok(!self.corridor.is_well_crossed(
            sample,
            &self.start,
            &l.labels_x,
            &l.labels_y,
            &self.fractal,
            &l.sp,
        )?)
    }
}

/// Frequency of the not-well-crossed event. `companion` is an estimate of
/// `max(u_k, v_k)`; when given, `(i1 − i0 + 1)·companion` is recorded beside the estimate.
pub fn estimate_corridor_crossing(
    inst: &CorridorInstance,
    p: f64,
    trials: u64,
    seed: u64,
    companion: Option<f64>,
) -> Result<EstimateRecord> {
    require_trials(trials)?;
    let hits = count_occurrences(inst, p, trials, seed)?;
    let c = &inst.corridor;
    let mut params = crate::params! {
        "orientation" => c.orientation,
        "k" => c.k,
        "i0" => c.i0,
        "i1" => c.i1,
        "j" => c.j,
        "L" => inst.landscape.sp.l,
        "p" => p,
    };
    if let Some(m) = companion {
        params.insert("union_bound".into(), ((c.i1 - c.i0 + 1) as f64 * m).into());
    }
    Ok(EstimateRecord::bernoulli(
        "corridor_crossing",
        params,
        hits,
        trials,
        seed,
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecoverySpec {
    pub k: u32,
    /// Block `[i0, i1]` of scale-`k` column intervals.
    pub i0: i64,
    pub i1: i64,
    /// Three ordered fractals; by default the leftmost grouped ones of the first three
    /// good `(k+1)`-intervals.
    pub starts: Option<Vec<SiteSet>>,
    /// Skip the block-length window, for enumerable toy instances.
    pub allow_short_block: bool,
}

/// Joint non-recovery of three fractals across a good block.
#[derive(Debug, Clone)]
pub struct RecoveryInstance {
    pub landscape: Landscape,
    pub spec: RecoverySpec,
    pub starts: Vec<SiteSet>,
    pub fractal: FractalParams,
    rect: Rectangle,
}

impl RecoveryInstance {
    pub fn new(landscape: Landscape, spec: RecoverySpec, fractal: FractalParams) -> Result<Self> {
        let sp = landscape.sp;
        let k = spec.k;
        fractal.validate(&sp)?;
        if k + 1 > sp.k_max {
            return param(format!(
                "recovery at scale {k} needs labels up to {}",
                k + 1
            ));
        }
        let len = spec.i1 - spec.i0;
        let l = sp.l as i64;
        if !spec.allow_short_block && (2 * len < l + 4 || len > l) {
            return Err(Error::Precondition(format!(
                "block length {len} is outside [L/2 + 2, L]"
            )));
        }
        if len < 0 || !is_good_block(&landscape.labels_x, k, spec.i0, spec.i1)? {
            return Err(Error::Precondition(format!(
                "block [{}, {}] is not good",
                spec.i0, spec.i1
            )));
        }
        let starts = match &spec.starts {
            Some(s) => s.clone(),
            None => default_starts(&landscape, k, &fractal)?,
        };
        if starts.len() != 3 {
            return Err(Error::Precondition(format!(
                "{} start sets, 3 needed",
                starts.len()
            )));
        }
        for s in &starts {
            if !is_k_fractal(s, k, &landscape.labels_y, &fractal, &sp)? {
                return Err(Error::Precondition(format!("{s} is not a {k}-fractal")));
            }
        }
        OrderedFamily::new(starts.clone(), k, &sp)?;
        let up = sp.len(k + 1);
        for s in &starts {
            for y in s.iter() {
                if !landscape.labels_y.is_good(k + 1, y.div_euclid(up))? {
                    return Err(Error::Precondition(format!(
                        "start {s} meets a bad scale-{} interval",
                        k + 1
                    )));
                }
            }
        }
        let first = starts[0].min().unwrap().div_euclid(up);
        let last = starts[2].max().unwrap().div_euclid(up);
        let w = sp.len(k);
        let rect = Rectangle::new(spec.i0 * w, (spec.i1 + 1) * w, first * up, (last + 1) * up)?;
        Ok(RecoveryInstance {
            landscape,
            spec,
            starts,
            fractal,
            rect,
        })
    }

    fn block(&self) -> Range<i64> {
        let w = self.landscape.sp.len(self.spec.k);
        self.spec.i0 * w..(self.spec.i1 + 1) * w
    }
}

fn default_starts(landscape: &Landscape, k: u32, fp: &FractalParams) -> Result<Vec<SiteSet>> {
    let sp = &landscape.sp;
    let t = &landscape.labels_y;
    let mut out = Vec::new();
    for n in t.index_range(k + 1) {
        if out.len() == 3 {
            break;
        }
        if !t.is_good(k + 1, n)? {
            continue;
        }
        for c in IntervalIndex::new(k + 1, n).children(sp) {
            if t.is_good(c.k, c.i)? {
                if let Some(s) = build_grouped_fractal(t, c, fp, sp)? {
                    out.push(s);
                    break;
                }
            }
        }
    }
    if out.len() < 3 {
        return Err(Error::Precondition(
            "fewer than three good intervals host a start fractal".into(),
        ));
    }
    Ok(out)
}

impl EventInstance for RecoveryInstance {
    fn env(&self) -> &Environment {
        &self.landscape.env
    }

    fn rect(&self) -> Rectangle {
        self.rect
    }

    fn occurs(&self, sample: &PercSample) -> Result<bool> {
        let l = &self.landscape;
        for s in &self.starts {
            if detect_recovery(
                sample,
                s,
                self.block(),
                self.spec.k,
                &l.labels_y,
                &self.fractal,
                &l.sp,
            )? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Frequency of joint non-recovery; `companion` is `max(u_k, v_k)` and adds `L^5·companion²`.
pub fn estimate_recovery(
    inst: &RecoveryInstance,
    p: f64,
    trials: u64,
    seed: u64,
    companion: Option<f64>,
) -> Result<EstimateRecord> {
    require_trials(trials)?;
    let hits = count_occurrences(inst, p, trials, seed)?;
    let l = inst.landscape.sp.l;
    let mut params = crate::params! {
        "k" => inst.spec.k,
        "i0" => inst.spec.i0,
        "i1" => inst.spec.i1,
        "L" => l,
        "p" => p,
    };
    if let Some(m) = companion {
        params.insert("companion".into(), ((l as f64).powi(5) * m * m).into());
    }
    Ok(EstimateRecord::bernoulli(
        "recovery", params, hits, trials, seed,
    ))
}

/// The nested crossing event built around the origin from scale `k0` to `K`.
#[derive(Debug, Clone)]
pub struct GluingInstance {
    pub landscape: Landscape,
    pub k0: u32,
    pub k_top: u32,
}

impl GluingInstance {
    pub fn new(landscape: Landscape, k0: u32, k_top: u32) -> Result<Self> {
        if k_top < k0 {
            return param("top scale below the starting scale");
        }
        if k_top > landscape.sp.k_max {
            return param(format!(
                "top scale {k_top} exceeds the label depth {}",
                landscape.sp.k_max
            ));
        }
        for k in 0..=k_top {
            if !landscape.labels_x.is_good(k, 0)? || !landscape.labels_y.is_good(k, 0)? {
                return Err(Error::Precondition(format!(
                    "scale-{k} intervals at the origin are not both good"
                )));
            }
        }
        Ok(GluingInstance {
            landscape,
            k0,
            k_top,
        })
    }
}

fn crossing(sample: &PercSample, rect: Rectangle, horizontal: bool) -> Result<bool> {
    let mut comp = Components::new(sample, rect)?;
    let (entry, exit): (Vec<(i64, i64)>, Vec<(i64, i64)>) = if horizontal {
        (
            (rect.c..=rect.d).map(|y| (rect.a, y)).collect(),
            (rect.c..=rect.d).map(|y| (rect.b, y)).collect(),
        )
    } else {
        (
            (rect.a..=rect.b).map(|x| (x, rect.c)).collect(),
            (rect.a..=rect.b).map(|x| (x, rect.d)).collect(),
        )
    };
    let mut roots: Vec<usize> = entry.iter().map(|&(x, y)| comp.root(x, y)).collect();
    roots.sort_unstable();
    Ok(exit
        .iter()
        .any(|&(x, y)| roots.binary_search(&comp.root(x, y)).is_ok()))
}

impl EventInstance for GluingInstance {
    fn env(&self) -> &Environment {
        &self.landscape.env
    }

    fn rect(&self) -> Rectangle {
        let top = self.landscape.sp.len(self.k_top);
        Rectangle {
            a: 0,
            b: top,
            c: 0,
            d: top,
        }
    }

    fn occurs(&self, sample: &PercSample) -> Result<bool> {
        let sp = &self.landscape.sp;
        for y in 0..sp.len(self.k0) {
            if !sample.open_v(0, y) {
                return Ok(false);
            }
        }
        for k in self.k0..self.k_top {
            let (small, big) = (sp.len(k), sp.len(k + 1));
            if !crossing(sample, Rectangle::new(0, big, 0, small)?, true)?
                || !crossing(sample, Rectangle::new(0, small, 0, big)?, false)?
            {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionRow {
    pub k: u32,
    pub u_k: f64,
    pub v_k: f64,
    pub u_next: f64,
    pub v_next: f64,
    pub constant: f64,
    /// `constant · max(u_k, v_k)²`.
    pub bound: f64,
    /// An estimate at `k + 1` exceeds the bound; diagnostic only.
    pub violation: bool,
}

/// Side-by-side estimates at consecutive scales against `constant · max(u_k, v_k)²`.
pub fn contraction_report(
    ks: &[u32],
    p: f64,
    family: impl Fn(u32) -> ScenarioFamily,
    trials: u64,
    seed: u64,
    constant: f64,
) -> Result<Vec<ContractionRow>> {
    let mut cache: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
    let mut at = |k: u32| -> Result<(f64, f64)> {
        if let Some(&v) = cache.get(&k) {
            return Ok(v);
        }
        let fam = family(k);
        let s = rng::derive(seed, TAG_SCALE, k as u64);
        let u = estimate_u_k(&fam.u, p, trials, s)?.max.mean;
        let v = estimate_v_k(&fam.v, p, trials, s)?.max.mean;
        cache.insert(k, (u, v));
        Ok((u, v))
    };
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        let (u_k, v_k) = at(k)?;
        let (u_next, v_next) = at(k + 1)?;
        let bound = constant * u_k.max(v_k).powi(2);
        rows.push(ContractionRow {
            k,
            u_k,
            v_k,
            u_next,
            v_next,
            constant,
            bound,
            violation: u_next > bound || v_next > bound,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{exact_probability, DefectPolicy, StartPolicy};
    use crate::renorm::ScaleParams;

    #[test]
    fn scale0_u_matches_closed_form() {
        let fp = FractalParams::desk(4);
        let spec = ScenarioSpec::new(4, 0, 0, fp, DefectPolicy::None, StartPolicy::Grouped);
        let est = estimate_u_k(&[spec.clone()], 0.9, 20_000, 3).unwrap();
        assert!(est.max.agrees_with(0.1, 3.0), "{:?}", est.max);
        let inst = spec.instantiate(0).unwrap();
        assert!((exact_probability(&inst, 0.9).unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(estimate_u_k(&[spec], 1.0, 100, 3).unwrap().max.mean, 0.0);
    }

    #[test]
    fn length_one_corridor_is_the_grouped_event() {
        let sp = ScaleParams::new(2, 2).unwrap();
        let land = Landscape::flat(sp, 1, 1).unwrap();
        let fp = FractalParams::desk(2);
        let c = Corridor::horizontal(1, 0, 0, 0);
        let inst = CorridorInstance::new(land, c, CorridorStart::Grouped, fp).unwrap();
        let spec = ScenarioSpec::new(2, 1, 0, fp, DefectPolicy::None, StartPolicy::Grouped);
        let scen = spec.instantiate(0).unwrap();
        for seed in 0..200 {
            let env = Environment::flat(0..=3, 0..=3).unwrap();
            let s = crate::perc::sample_configuration(
                &env,
                0.6,
                Rectangle::new(0, 2, 0, 2).unwrap(),
                seed,
            )
            .unwrap();
            assert_eq!(inst.occurs(&s).unwrap(), scen.occurs(&s).unwrap());
        }
    }

    #[test]
    fn gluing_at_a_single_scale_is_the_open_column() {
        let sp = ScaleParams::new(2, 2).unwrap();
        let land = Landscape::flat(sp, 1, 1).unwrap();
        let inst = GluingInstance::new(land, 1, 1).unwrap();
        let v = exact_probability(&inst, 0.7).unwrap();
        assert!((v - 0.49).abs() < 1e-12);
    }

    #[test]
    fn recovery_extremes() {
        let sp = ScaleParams::new(4, 2).unwrap();
        let land = Landscape::flat(sp, 1, 1).unwrap();
        let spec = RecoverySpec {
            k: 0,
            i0: 0,
            i1: 4,
            starts: None,
            allow_short_block: false,
        };
        let inst =
            RecoveryInstance::new(land.clone(), spec.clone(), FractalParams::desk(4)).unwrap();
        assert_eq!(
            estimate_recovery(&inst, 1.0, 50, 1, None).unwrap().mean,
            0.0
        );
        assert_eq!(
            estimate_recovery(&inst, 0.0, 50, 1, None).unwrap().mean,
            1.0
        );
        let short = RecoverySpec { i1: 2, ..spec };
        assert!(matches!(
            RecoveryInstance::new(land, short, FractalParams::desk(4)),
            Err(Error::Precondition(_))
        ));
    }
}
