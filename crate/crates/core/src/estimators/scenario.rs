use std::ops::Range;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::EventInstance;
use crate::env::{Environment, GapDistribution, GapSampler, GapSequence};
use crate::error::{param, Error, Result};
use crate::fractal::{
    build_grouped_fractal, contains_grouped_fractal, count_ordered_fractals, FractalParams,
};
use crate::perc::{sliced_remainder, PercSample, Rectangle};
use crate::renorm::{compute_labels, IntervalIndex, LabelTable, ScaleParams};
use crate::rng;
use crate::sites::SiteSet;

/// Rejection-sampling attempts before giving up on a conditioned environment.
pub const CONDITIONING_BUDGET: u64 = 1_000_000;

const TAG_COLUMN: u64 = rng::tag("scenario/column");
const TAG_ROWS: u64 = rng::tag("scenario/rows");

/// How the crossed column `I^x_{(k,0)}` gets its defect intensity `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DefectPolicy {
    /// All gaps zero; only valid for `h = 0`.
    None,
    /// A single gap `h + k` in the first column.
    Left,
    /// A single gap `h + k` in the last column.
    Right,
    /// Gaps at the listed offsets; their labels must produce `h`.
    Multi { gaps: Vec<(i64, u64)> },
    /// Gaps drawn from `dist`, rejected until the label equals `h`.
    Sampled { dist: GapDistribution },
}

impl DefectPolicy {
    fn name(&self) -> &'static str {
        match self {
            DefectPolicy::None => "none",
            DefectPolicy::Left => "left",
            DefectPolicy::Right => "right",
            DefectPolicy::Multi { .. } => "multi",
            DefectPolicy::Sampled { .. } => "sampled",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartPolicy {
    /// One `k`-fractal inside a single `k`-interval.
    Grouped,
    /// One `k`-fractal whose pieces sit in distinct `k`-intervals.
    Spread,
    /// `2^(loss·(h−1))` grouped fractals in distinct `k`-intervals.
    Family,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RowPolicy {
    Flat,
    /// Row gaps drawn from `dist`, rejected until the start set can be built.
    Sampled {
        dist: GapDistribution,
    },
}

/// One member of the scenario family that stands in for the supremum over environments
/// and start sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    pub l: u64,
    pub k: u32,
    pub h: u64,
    pub fractal: FractalParams,
    pub defect: DefectPolicy,
    pub start: StartPolicy,
    pub rows: RowPolicy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    /// The sliced remainder holds no grouped `k`-fractal.
    NoGroupedFractal,
    /// The sliced remainder holds no `k`-fractal.
    NoFractal,
}

impl ScenarioSpec {
    pub fn new(
        l: u64,
        k: u32,
        h: u64,
        fractal: FractalParams,
        defect: DefectPolicy,
        start: StartPolicy,
    ) -> Self {
        let name = format!(
            "{}-{}-h{h}",
            match start {
                StartPolicy::Grouped => "grouped",
                StartPolicy::Spread => "spread",
                StartPolicy::Family => "family",
            },
            defect.name()
        );
        ScenarioSpec {
            name,
            l,
            k,
            h,
            fractal,
            defect,
            start,
            rows: RowPolicy::Flat,
        }
    }

    pub fn scale_params(&self) -> Result<ScaleParams> {
        ScaleParams::new(self.l, self.k + 1)
    }

    pub fn event(&self) -> Event {
        if self.h == 0 {
            Event::NoGroupedFractal
        } else {
            Event::NoFractal
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sp = self.scale_params()?;
        self.fractal.validate(&sp)?;
        match (self.h, self.start) {
            (0, StartPolicy::Family) => {
                return param("a family start needs a defective column (h ≥ 1)")
            }
            (h, StartPolicy::Grouped | StartPolicy::Spread) if h > 0 => {
                return param("a defective column needs a family start")
            }
            _ => {}
        }
        if self.h > 0 && self.fractal.family_size(self.h).is_none() {
            return param(format!("family size for h = {} overflows", self.h));
        }
        if self.h > 0 && self.defect == DefectPolicy::None {
            return param("policy `none` cannot produce a defect");
        }
        Ok(())
    }

    /// Number of start pieces, each needing its own good `k`-interval.
    fn pieces(&self) -> u64 {
        match self.start {
            StartPolicy::Grouped => 1,
            StartPolicy::Spread if self.k == 0 => 1,
            StartPolicy::Spread => self.fractal.branching,
            StartPolicy::Family => self.fractal.family_size(self.h).unwrap_or(u64::MAX),
        }
    }

    fn column(&self, sp: &ScaleParams, seed: u64) -> Result<(GapSequence, &'static str)> {
        let width = sp.len(self.k);
        let csp = ScaleParams::new(self.l, self.k)?;
        let label = |xi: &GapSequence| -> Result<u64> { compute_labels(xi, csp)?.h(self.k, 0) };
        let mut xi = GapSequence::new(0, vec![0; width as usize])?;
        match &self.defect {
            DefectPolicy::None => {}
            DefectPolicy::Left => xi.set(0, self.h + self.k as u64)?,
            DefectPolicy::Right => xi.set(width - 1, self.h + self.k as u64)?,
            DefectPolicy::Multi { gaps } => {
                for &(at, g) in gaps {
                    xi.set(at, g)?;
                }
            }
            DefectPolicy::Sampled { dist } => {
                let sampler = GapSampler::new(dist)?;
                for attempt in 0..CONDITIONING_BUDGET {
                    let cand = GapSequence::sample(
                        &sampler,
                        0..=width - 1,
                        rng::derive(seed, TAG_COLUMN, attempt),
                        TAG_COLUMN,
                    )?;
                    if label(&cand)? == self.h {
                        return Ok((cand, "rejection"));
                    }
                }
                return Err(Error::Conditioning(format!(
                    "no column with H = {} in {CONDITIONING_BUDGET} draws",
                    self.h
                )));
            }
        }
        let got = label(&xi)?;
        if got != self.h {
            return Err(Error::Conditioning(format!(
                "placed defect has H = {got}, wanted {}",
                self.h
            )));
        }
        Ok((xi, "placed"))
    }

    fn row_window(&self, sp: &ScaleParams) -> i64 {
        let top = sp.len(self.k + 1);
        let per = self.l as i64;
        let need = self.pieces() as i64;
        let blocks = (need + per - 1) / per;
        match self.rows {
            RowPolicy::Flat => blocks * top,
            RowPolicy::Sampled { .. } => 2 * blocks * top,
        }
    }

    fn build_start(&self, labels: &LabelTable, sp: &ScaleParams) -> Result<Option<Vec<SiteSet>>> {
        let k = self.k;
        let fp = &self.fractal;
        let range = labels.index_range(k);
        let mut pieces = Vec::new();
        let want = self.pieces() as usize;
        for n in range {
            if pieces.len() == want {
                break;
            }
            if !labels.is_good(k, n)? {
                continue;
            }
            let piece = match self.start {
                StartPolicy::Spread if k > 0 => {
                    let children: Vec<IntervalIndex> =
                        IntervalIndex::new(k, n).children(sp).collect();
                    let mut found = None;
                    for c in children {
                        if labels.is_good(c.k, c.i)? {
                            if let Some(s) = build_grouped_fractal(labels, c, fp, sp)? {
                                found = Some(s);
                                break;
                            }
                        }
                    }
                    found
                }
                _ => build_grouped_fractal(labels, IntervalIndex::new(k, n), fp, sp)?,
            };
            if let Some(s) = piece {
                pieces.push(s);
            }
        }
        if pieces.len() < want {
            return Ok(None);
        }
        Ok(Some(match self.start {
            StartPolicy::Family => pieces,
            _ => vec![pieces.iter().flat_map(|s| s.iter()).collect()],
        }))
    }

    /// Builds the concrete environment and start set; `seed` drives any rejection sampling.
    pub fn instantiate(&self, seed: u64) -> Result<ScenarioInstance> {
        self.validate()?;
        let sp = self.scale_params()?;
        let (xi_x, construction) = self.column(&sp, seed)?;
        let height = self.row_window(&sp);
        let (xi_y, labels_y, start) = match &self.rows {
            RowPolicy::Flat => {
                let xi = GapSequence::new(0, vec![0; height as usize])?;
                let labels = compute_labels(&xi, sp)?;
                let start = self.build_start(&labels, &sp)?.ok_or_else(|| {
                    Error::Conditioning("flat rows cannot host the start set".into())
                })?;
                (xi, labels, start)
            }
            RowPolicy::Sampled { dist } => {
                let sampler = GapSampler::new(dist)?;
                let mut found = None;
                for attempt in 0..CONDITIONING_BUDGET {
                    let xi = GapSequence::sample(
                        &sampler,
                        0..=height - 1,
                        rng::derive(seed, TAG_ROWS, attempt),
                        TAG_ROWS,
                    )?;
                    let labels = compute_labels(&xi, sp)?;
                    if let Some(start) = self.build_start(&labels, &sp)? {
                        found = Some((xi, labels, start));
                        break;
                    }
                }
                found.ok_or_else(|| {
                    Error::Conditioning(format!(
                        "no row environment hosts the start set in {CONDITIONING_BUDGET} draws"
                    ))
                })?
            }
        };
        let width = sp.len(self.k);
        let slice = sp.len(self.k);
        let union: SiteSet = start.iter().flat_map(|s| s.iter()).collect();
        let first = union.min().unwrap().div_euclid(slice);
        let last = union.max().unwrap().div_euclid(slice);
        let rect = Rectangle::new(0, width, first * slice, (last + 1) * slice)?;
        Ok(ScenarioInstance {
            spec: self.clone(),
            env: Environment::from_parts(xi_x, xi_y, seed),
            sp,
            labels_y,
            start,
            union,
            column: 0..width,
            rect,
            construction,
        })
    }

    pub(crate) fn params(&self) -> Map<String, Value> {
        crate::params! {
            "scenario" => self.name,
            "L" => self.l,
            "k" => self.k,
            "h" => self.h,
            "branching" => self.fractal.branching,
            "start" => self.start,
            "defect" => self.defect.name(),
        }
    }
}

/// A scenario with its environment fixed.
#[derive(Debug, Clone)]
pub struct ScenarioInstance {
    pub spec: ScenarioSpec,
    pub env: Environment,
    pub sp: ScaleParams,
    pub labels_y: LabelTable,
    /// One set for grouped and spread starts, the whole family otherwise.
    pub start: Vec<SiteSet>,
    pub union: SiteSet,
    pub column: Range<i64>,
    pub rect: Rectangle,
    /// `placed` or `rejection`.
    pub construction: &'static str,
}

impl EventInstance for ScenarioInstance {
    fn env(&self) -> &Environment {
        &self.env
    }

    fn rect(&self) -> Rectangle {
        self.rect
    }

    fn occurs(&self, sample: &PercSample) -> Result<bool> {
        let k = self.spec.k;
        let fp = &self.spec.fractal;
        let r = sliced_remainder(sample, &self.union, self.column.clone(), k, &self.sp)?;
        Ok(match self.spec.event() {
            Event::NoGroupedFractal => {
                !contains_grouped_fractal(&r, k, &self.labels_y, fp, &self.sp)?
            }
            Event::NoFractal => count_ordered_fractals(&r, k, &self.labels_y, fp, &self.sp)? == 0,
        })
    }
}

/// Scenario lists for the two failure probabilities at one scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFamily {
    pub u: Vec<ScenarioSpec>,
    pub v: Vec<ScenarioSpec>,
}

impl ScenarioFamily {
    /// Grouped and spread starts against clean and internally defective good columns, and
    /// families against single left or right defects with `h = 1..=h_max`.
    pub fn standard(l: u64, k: u32, fractal: FractalParams, h_max: u64) -> Self {
        let mut u = vec![ScenarioSpec::new(
            l,
            k,
            0,
            fractal,
            DefectPolicy::None,
            StartPolicy::Grouped,
        )];
        if k > 0 {
            u.push(ScenarioSpec::new(
                l,
                k,
                0,
                fractal,
                DefectPolicy::Left,
                StartPolicy::Grouped,
            ));
            u.push(ScenarioSpec::new(
                l,
                k,
                0,
                fractal,
                DefectPolicy::Right,
                StartPolicy::Grouped,
            ));
            u.push(ScenarioSpec::new(
                l,
                k,
                0,
                fractal,
                DefectPolicy::None,
                StartPolicy::Spread,
            ));
        }
        let mut v = Vec::new();
        for h in 1..=h_max {
            v.push(ScenarioSpec::new(
                l,
                k,
                h,
                fractal,
                DefectPolicy::Left,
                StartPolicy::Family,
            ));
            if k > 0 {
                v.push(ScenarioSpec::new(
                    l,
                    k,
                    h,
                    fractal,
                    DefectPolicy::Right,
                    StartPolicy::Family,
                ));
            }
        }
        ScenarioFamily { u, v }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractal::is_k_fractal;

    #[test]
    fn placed_defects_have_the_requested_label() {
        let fp = FractalParams::desk(4);
        for k in 0..3 {
            for h in 1..4 {
                for d in [DefectPolicy::Left, DefectPolicy::Right] {
                    let inst = ScenarioSpec::new(4, k, h, fp, d, StartPolicy::Family)
                        .instantiate(1)
                        .unwrap();
                    let csp = ScaleParams::new(4, k).unwrap();
                    let t = compute_labels(&inst.env.xi_x, csp).unwrap();
                    assert_eq!(t.h(k, 0).unwrap(), h);
                    assert_eq!(inst.start.len() as u64, fp.family_size(h).unwrap());
                    for s in &inst.start {
                        assert!(is_k_fractal(s, k, &inst.labels_y, &fp, &inst.sp).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn spread_start_is_a_fractal_over_several_intervals() {
        let fp = FractalParams::desk(4);
        let inst = ScenarioSpec::new(4, 2, 0, fp, DefectPolicy::None, StartPolicy::Spread)
            .instantiate(0)
            .unwrap();
        let s = &inst.start[0];
        assert!(is_k_fractal(s, 2, &inst.labels_y, &fp, &inst.sp).unwrap());
        assert_eq!(s.as_slice(), &[0, 1, 16, 17]);
        assert_eq!(inst.rect, Rectangle::new(0, 16, 0, 32).unwrap());
    }

    #[test]
    fn inconsistent_policies_are_rejected() {
        let fp = FractalParams::desk(4);
        assert!(
            ScenarioSpec::new(4, 1, 0, fp, DefectPolicy::None, StartPolicy::Family)
                .validate()
                .is_err()
        );
        assert!(
            ScenarioSpec::new(4, 1, 2, fp, DefectPolicy::Left, StartPolicy::Grouped)
                .validate()
                .is_err()
        );
        let multi = DefectPolicy::Multi { gaps: vec![(0, 1)] };
        assert!(matches!(
            ScenarioSpec::new(4, 1, 1, fp, multi, StartPolicy::Family).instantiate(0),
            Err(Error::Conditioning(_))
        ));
    }

    #[test]
    fn sampled_rows_and_columns() {
        let fp = FractalParams::desk(4);
        let mut spec = ScenarioSpec::new(
            4,
            1,
            1,
            fp,
            DefectPolicy::Sampled {
                dist: GapDistribution::geometric(0.3),
            },
            StartPolicy::Family,
        );
        spec.rows = RowPolicy::Sampled {
            dist: GapDistribution::geometric(0.1),
        };
        let inst = spec.instantiate(5).unwrap();
        assert_eq!(inst.construction, "rejection");
        let again = spec.instantiate(5).unwrap();
        assert_eq!(inst.env, again.env);
    }
}
