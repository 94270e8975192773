//! Acceptance groups. Each criterion runs at fixed seeds and reports every check it makes.

use serde::Serialize;

use crate::env::{Environment, GapDistribution, GapSampler, GapSequence};
use crate::error::{Error, Result};
use crate::estimators::{
    binomial_tail_check, estimate_corridor_crossing, estimate_recovery,
    estimate_u_k, estimate_v_k, exact_probability, exact_scale0, gluing_diagnostic,
    percolation_probability, sample_good_origin, scenario_instances, sharpness_experiment,
    significant_decrease, CorridorInstance, CorridorStart, DefectPolicy, EventInstance,
    GluingInstance, Landscape, RecoveryInstance, RecoverySpec, RowPolicy, ScenarioSpec,
    SharpnessConfig, StartPolicy,
};
use crate::fractal::{Corridor, FractalParams};
use crate::oracle;
use crate::oriented::{
    is_admissible, is_vertex, ksv_block_exploration, oriented_percolation_probability,
    oriented_reachable, sample_ksv, Confinement, KSVParams, OrientedBox, OrientedEdge,
    OrientedGeometry, OrientedRegion, OrientedSample,
};
use crate::renorm::{check_certificate, compute_labels, estimate_pkhb, LabelTable, Rho, ScaleParams};
use crate::rng;
use crate::sites::SiteSet;
use crate::stats::{within_sigmas, EstimateRecord};

pub const DEFAULT_SEED: u64 = 20_240_917;

pub const SUITES: [&str; 6] = ["unit", "oracle", "smoke", "sharpness", "oriented", "certificate"];

/// Result of one criterion.
#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub id: u32,
    pub title: &'static str,
    pub checks: usize,
    pub failures: Vec<String>,
    pub records: Vec<EstimateRecord>,
}

impl Outcome {
    fn new(id: u32, title: &'static str) -> Self {
        Outcome {
            id,
            title,
            checks: 0,
            failures: Vec::new(),
            records: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks > 0 && self.failures.is_empty()
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    /// `criterion N <title>: PASS|FAIL (...)`.
    pub fn line(&self) -> String {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let mut s = format!(
            "criterion {:>2} {}: {verdict} ({} checks",
            self.id, self.title, self.checks
        );
        if let Some(f) = self.failures.first() {
            s.push_str(&format!(", {} failed; first: {f}", self.failures.len()));
        }
        s.push(')');
        s
    }
}

/// Criteria run by a named suite.
pub fn suite_criteria(name: &str) -> Result<&'static [u32]> {
    Ok(match name {
        "unit" => &[1, 4],
        "oracle" => &[2, 3, 5],
        "smoke" => &[7],
        "sharpness" => &[8, 9],
        "oriented" => &[10],
        "certificate" => &[6],
        _ => {
            return Err(Error::Parameter(format!(
                "unknown suite `{name}`; expected one of {}",
                SUITES.join(", ")
            )))
        }
    })
}

pub fn run_suite(name: &str, seed: u64) -> Result<Vec<Outcome>> {
    suite_criteria(name)?
        .iter()
        .map(|&id| run_criterion(id, seed))
        .collect()
}

pub fn run_criterion(id: u32, seed: u64) -> Result<Outcome> {
    let s = rng::derive(seed, rng::tag("suite/criterion"), id as u64);
    match id {
        1 => scale0_exactness(s),
        2 => label_oracle(s),
        3 => structural(s),
        4 => base_distribution(s),
        5 => enumeration_oracle(s),
        6 => certificate(),
        7 => phase_transition(s),
        8 => sharpness(s),
        9 => concentration(s),
        10 => oriented(s),
        _ => Err(Error::Parameter(format!("no criterion {id}"))),
    }
}

/// Canonical text of a set of outcomes, for rerun comparisons.
pub fn fingerprint(outcomes: &[Outcome]) -> String {
    serde_json::to_string(outcomes).expect("plain data serializes")
}

fn scale0_exactness(seed: u64) -> Result<Outcome> {
    let mut out = Outcome::new(1, "scale-0 exactness");
    let trials = 100_000;
    let fp = FractalParams::desk(4);
    for (n, &p) in [0.5, 0.9, 0.99].iter().enumerate() {
        let s = rng::derive(seed, 0, n as u64);
        let u = ScenarioSpec::new(4, 0, 0, fp, DefectPolicy::None, StartPolicy::Grouped);
        let est = estimate_u_k(&[u], p, trials, s)?.max;
        let (u0, _) = exact_scale0(p, 1, fp.loss_exponent)?;
        out.check(est.agrees_with(u0, 3.0), || {
            format!("u_0({p}) = {} vs {u0}", est.mean)
        });
        out.records.push(est);
        for h in 1..=3 {
            let v = ScenarioSpec::new(4, 0, h, fp, DefectPolicy::Left, StartPolicy::Family);
            let est = estimate_v_k(&[v], p, trials, rng::derive(s, 1, h))?.max;
            let (_, v0) = exact_scale0(p, h, fp.loss_exponent)?;
            out.check(est.agrees_with(v0, 3.0), || {
                format!("v_0({p}, {h}) = {} vs {v0}", est.mean)
            });
            out.records.push(est);
        }
    }
    Ok(out)
}

/// Random gap sequences over aligned windows for `L ∈ {3, 4, 10}`, `K = 3`.
fn label_corpus(seed: u64) -> Result<Vec<(GapSequence, LabelTable)>> {
    let dists = [
        GapDistribution::geometric(0.3),
        GapDistribution::geometric(0.6),
        GapDistribution::polynomial(1.5),
        GapDistribution::BoundedUniform { max: 3 },
    ];
    let samplers = dists
        .iter()
        .map(GapSampler::new)
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(1000);
    for n in 0..1000u64 {
        let l = [3u64, 4, 10][(n % 3) as usize];
        let sp = ScaleParams::new(l, 3)?;
        let top = sp.len(3);
        let blocks = (1000 / top).max(1);
        let lo = -top * (n as i64 % 2);
        let sampler = &samplers[(n / 3 % 4) as usize];
        let xi = GapSequence::sample(sampler, lo..=lo + blocks * top - 1, seed, n)?;
        let table = compute_labels(&xi, sp)?;
        out.push((xi, table));
    }
    Ok(out)
}

fn label_oracle(seed: u64) -> Result<Outcome> {
    let mut out = Outcome::new(2, "label-recursion oracle");
    for (n, (xi, table)) in label_corpus(seed)?.iter().enumerate() {
        let diff = oracle::check_labels(xi, table)?;
        out.check(diff.is_none(), || format!("environment {n}: {}", diff.unwrap()));
    }
    Ok(out)
}

fn structural(seed: u64) -> Result<Outcome> {
    let mut out = Outcome::new(3, "structural invariants");
    let corpus = label_corpus(rng::derive(seed, 0, 0))?;
    let corpus2 = label_corpus(seed)?;
    for (n, (_, table)) in corpus.iter().chain(&corpus2).enumerate() {
        let rep = oracle::structural_violations(table)?;
        out.check(rep.good_single_bad.is_empty(), || {
            format!("environment {n}: good parent {:?}", rep.good_single_bad)
        });
        out.check(rep.merged.is_empty(), || {
            format!("environment {n}: merged {:?}", rep.merged)
        });
        out.check(rep.inherited.is_empty(), || {
            format!("environment {n}: inherited {:?}", rep.inherited)
        });
    }
    Ok(out)
}

fn base_distribution(seed: u64) -> Result<Outcome> {
    let mut out = Outcome::new(4, "base distribution");
    let trials = 1_000_000;
    let sp = ScaleParams::new(4, 1)?;
    for (n, rho) in [0.1, 0.01].into_iter().enumerate() {
        let table = estimate_pkhb(
            &GapDistribution::geometric(rho),
            sp,
            trials,
            rng::derive(seed, 0, n as u64),
            8,
        )?;
        for h in 1..=3u64 {
            let rec = table.get(0, h, 0).expect("bin inside the table").clone();
            let exact = rho.powi(h as i32) * (1.0 - rho);
            out.check(rec.agrees_with(exact, 3.0), || {
                format!("rho = {rho}, h = {h}: {} vs {exact}", rec.mean)
            });
            out.records.push(rec);
        }
    }
    Ok(out)
}

struct Enumerated<'a> {
    name: String,
    inst: &'a dyn EventInstance,
    record: EstimateRecord,
    p: f64,
}

fn compare(out: &mut Outcome, e: Enumerated<'_>) -> Result<()> {
    let edges = e.inst.rect().edge_count();
    if edges > 20 {
        out.check(false, || format!("{}: {edges} edges", e.name));
        return Ok(());
    }
    let exact = exact_probability(e.inst, e.p)?;
    let r = &e.record;
    out.check(within_sigmas(r.mean, exact, r.trials, 3.0), || {
        format!("{}: estimate {} vs exact {exact}", e.name, r.mean)
    });
    let mut rec = e.record;
    rec.params.insert("exact".into(), exact.into());
    rec.params.insert("instance".into(), e.name.into());
    out.records.push(rec);
    Ok(())
}

fn enumeration_oracle(seed: u64) -> Result<Outcome> {
    let mut out = Outcome::new(5, "enumeration-oracle equivalence");
    let trials = 20_000;
    let ps = [0.6, 0.85];
    let mut counter = 0u64;
    let mut next = || {
        counter += 1;
        (rng::derive(seed, 0, counter), ps[(counter % 2) as usize])
    };

    let geo = GapDistribution::geometric(0.4);
    let poly = GapDistribution::polynomial(2.0);
    let with_rows = |mut s: ScenarioSpec, d: GapDistribution| {
        s.rows = RowPolicy::Sampled { dist: d };
        s
    };
    let u = |l: u64, k: u32, start: StartPolicy| {
        ScenarioSpec::new(l, k, 0, FractalParams::desk(l), DefectPolicy::None, start)
    };
    let u_specs = vec![
        u(2, 0, StartPolicy::Grouped),
        u(2, 1, StartPolicy::Grouped),
        u(3, 1, StartPolicy::Grouped),
        u(2, 1, StartPolicy::Spread),
        with_rows(u(2, 1, StartPolicy::Grouped), geo),
        with_rows(u(2, 1, StartPolicy::Grouped), geo),
        with_rows(u(2, 1, StartPolicy::Grouped), geo),
        with_rows(u(2, 1, StartPolicy::Grouped), geo),
        with_rows(u(3, 1, StartPolicy::Grouped), geo),
        with_rows(u(3, 1, StartPolicy::Grouped), geo),
        with_rows(u(2, 0, StartPolicy::Grouped), poly),
        with_rows(u(2, 0, StartPolicy::Grouped), poly),
    ];
    for (n, spec) in u_specs.into_iter().enumerate() {
        let (s, p) = next();
        let est = estimate_u_k(std::slice::from_ref(&spec), p, trials, s)?.max;
        let inst = scenario_instances(&[spec], s)?.remove(0);
        compare(
            &mut out,
            Enumerated {
                name: format!("u_k #{n} {}", inst.spec.name),
                inst: &inst,
                record: est,
                p,
            },
        )?;
    }

    let v = |l: u64, k: u32, h: u64, d: DefectPolicy| {
        ScenarioSpec::new(l, k, h, FractalParams::desk(l), d, StartPolicy::Family)
    };
    let v_specs = vec![
        v(2, 0, 1, DefectPolicy::Left),
        v(2, 0, 2, DefectPolicy::Left),
        v(2, 0, 3, DefectPolicy::Left),
        v(2, 0, 2, DefectPolicy::Sampled { dist: GapDistribution::geometric(0.5) }),
        v(2, 1, 1, DefectPolicy::Left),
        v(2, 1, 1, DefectPolicy::Right),
        v(2, 1, 2, DefectPolicy::Left),
        v(2, 1, 2, DefectPolicy::Right),
        v(3, 1, 1, DefectPolicy::Left),
        with_rows(v(2, 0, 1, DefectPolicy::Left), geo),
        with_rows(v(2, 1, 1, DefectPolicy::Left), geo),
        with_rows(v(2, 0, 2, DefectPolicy::Right), poly),
    ];
    for (n, spec) in v_specs.into_iter().enumerate() {
        let (s, p) = next();
        let est = estimate_v_k(std::slice::from_ref(&spec), p, trials, s)?.max;
        let inst = scenario_instances(&[spec], s)?.remove(0);
        compare(
            &mut out,
            Enumerated {
                name: format!("v_k #{n} {}", inst.spec.name),
                inst: &inst,
                record: est,
                p,
            },
        )?;
    }

    let sp2 = ScaleParams::new(2, 2)?;
    let flat = Landscape::flat(sp2, 2, 2)?;
    let mut gx = vec![0; 8];
    gx[2] = 1;
    let mut gy = vec![0; 8];
    gy[5] = 1;
    let bumped = Landscape::new(
        Environment::from_parts(GapSequence::new(0, gx)?, GapSequence::new(0, gy)?, 0),
        sp2,
    )?;
    let flat3 = Landscape::flat(ScaleParams::new(3, 1)?, 2, 2)?;
    let corridors = [
        (&flat, Corridor::horizontal(0, 0, 0, 0)),
        (&flat, Corridor::horizontal(0, 0, 3, 1)),
        (&flat, Corridor::horizontal(0, 0, 7, 2)),
        (&flat, Corridor::vertical(0, 0, 4, 1)),
        (&flat, Corridor::horizontal(1, 0, 0, 0)),
        (&flat, Corridor::horizontal(1, 0, 1, 1)),
        (&flat, Corridor::vertical(1, 0, 1, 0)),
        (&bumped, Corridor::horizontal(0, 0, 5, 0)),
        (&bumped, Corridor::horizontal(1, 0, 1, 0)),
        (&bumped, Corridor::vertical(0, 2, 7, 0)),
        (&bumped, Corridor::horizontal(0, 2, 6, 3)),
        (&flat3, Corridor::horizontal(1, 0, 0, 0)),
    ];
    for (n, (land, c)) in corridors.into_iter().enumerate() {
        let (s, p) = next();
        let l = land.sp.l;
        let inst =
            CorridorInstance::new(land.clone(), c, CorridorStart::Grouped, FractalParams::desk(l))?;
        let est = estimate_corridor_crossing(&inst, p, trials, s, None)?;
        compare(
            &mut out,
            Enumerated {
                name: format!("corridor #{n} {c:?}"),
                inst: &inst,
                record: est,
                p,
            },
        )?;
    }

    let l2 = Landscape::flat(ScaleParams::new(2, 1)?, 2, 3)?;
    let l3 = Landscape::flat(ScaleParams::new(3, 1)?, 1, 2)?;
    let l2b = Landscape::new(
        Environment::from_parts(
            GapSequence::new(0, vec![1, 0, 0, 0])?,
            GapSequence::new(0, vec![0; 6])?,
            0,
        ),
        ScaleParams::new(2, 1)?,
    )?;
    let l3b = Landscape::new(
        Environment::from_parts(
            GapSequence::new(0, vec![0, 1, 0])?,
            GapSequence::new(0, vec![0; 6])?,
            0,
        ),
        ScaleParams::new(3, 1)?,
    )?;
    let pts = |v: [i64; 3]| Some(v.iter().map(|&y| SiteSet::singleton(y)).collect::<Vec<_>>());
    let recoveries = [
        (&l2, None, 0, 0),
        (&l2, pts([0, 1, 2]), 0, 0),
        (&l2, pts([0, 1, 2]), 0, 1),
        (&l2, pts([0, 2, 3]), 0, 1),
        (&l2, pts([1, 2, 3]), 1, 1),
        (&l3, pts([0, 1, 2]), 0, 0),
        (&l3, pts([0, 1, 2]), 0, 1),
        (&l3, pts([0, 1, 2]), 0, 2),
        (&l3, pts([0, 2, 3]), 0, 0),
        (&l3, pts([1, 2, 4]), 1, 1),
        (&l2b, pts([0, 1, 2]), 0, 1),
        (&l3b, pts([0, 1, 2]), 0, 2),
    ];
    for (n, (land, starts, i0, i1)) in recoveries.into_iter().enumerate() {
        let (s, p) = next();
        let spec = RecoverySpec {
            k: 0,
            i0,
            i1,
            starts,
            allow_short_block: true,
        };
        let inst = RecoveryInstance::new(land.clone(), spec, FractalParams::desk(land.sp.l))?;
        let est = estimate_recovery(&inst, p, trials, s, None)?;
        compare(
            &mut out,
            Enumerated {
                name: format!("recovery #{n}"),
                inst: &inst,
                record: est,
                p,
            },
        )?;
    }

    let mut n = 0;
    for l in [2u64, 3] {
        for k0 in [0u32, 1] {
            for (t, d) in [geo, poly, geo].into_iter().enumerate() {
                let (s, p) = next();
                let land = sample_good_origin(d, d, ScaleParams::new(l, 1)?, s ^ t as u64)?;
                let inst = GluingInstance::new(land, k0, 1)?;
                let est = gluing_diagnostic(&inst, p, trials, s)?;
                compare(
                    &mut out,
                    Enumerated {
                        name: format!("gluing #{n} L={l} k0={k0}"),
                        inst: &inst,
                        record: est,
                        p,
                    },
                )?;
                n += 1;
            }
        }
    }
    Ok(out)
}

fn certificate() -> Result<Outcome> {
    let mut out = Outcome::new(6, "certificate suite");
    let big = check_certificate(1_000_000, Rho::PowerOfL(-16.0), 100, 10_000, 100, 100)?;
    out.check(big.passed(), || {
        format!(
            "L = 10^6: {} violations, first {:?}",
            big.violation_count,
            big.violations.first()
        )
    });
    let small = check_certificate(2, Rho::PowerOfL(-16.0), 100, 10_000, 100, 100)?;
    out.check(!small.passed(), || "L = 2 reported no violation".into());
    Ok(out)
}

fn phase_transition(seed: u64) -> Result<Outcome> {
    let mut out = Outcome::new(7, "phase-transition smoke");
    let g = GapDistribution::geometric(0.01);
    let hi = percolation_probability(g, g, 0.95, 256, 500, rng::derive(seed, 0, 0))?;
    out.check(hi.mean >= 0.5, || format!("p = 0.95: {}", hi.mean));
    let lo = percolation_probability(g, g, 0.45, 256, 500, rng::derive(seed, 0, 1))?;
    out.check(lo.mean <= 0.05, || format!("p = 0.45: {}", lo.mean));
    out.records.extend([hi, lo]);
    Ok(out)
}

fn sharpness(seed: u64) -> Result<Outcome> {
    let mut out = Outcome::new(8, "sharpness trend");
    let arm = |dist_x, dist_y, s| SharpnessConfig {
        dist_x,
        dist_y,
        p: 0.9,
        n_list: vec![3, 4, 5],
        delta: 1.0,
        beta: None,
        a: None,
        trials: 2000,
        seed: s,
    };
    let heavy = sharpness_experiment(&arm(
        GapDistribution::polynomial(1.5),
        GapDistribution::polynomial(3.0),
        rng::derive(seed, 0, 0),
    ))?;
    for w in heavy.windows(2) {
        let (a, b) = (&w[0].connection, &w[1].connection);
        out.check(b.mean < a.mean && significant_decrease(a, b, 0.01), || {
            format!("heavy arm n = {} → {}: {} → {}", w[0].n, w[1].n, a.mean, b.mean)
        });
    }
    let g = GapDistribution::geometric(0.01);
    let control = sharpness_experiment(&arm(g, g, rng::derive(seed, 0, 1)))?;
    for w in control.windows(2) {
        let (a, b) = (&w[0].connection, &w[1].connection);
        out.check(!significant_decrease(a, b, 0.01), || {
            format!("control arm n = {} → {}: {} → {}", w[0].n, w[1].n, a.mean, b.mean)
        });
    }
    out.records
        .extend(heavy.into_iter().chain(control).map(|r| r.connection));
    Ok(out)
}

fn concentration(seed: u64) -> Result<Outcome> {
    let mut out = Outcome::new(9, "concentration check");
    for (n, alpha) in [0.9, 0.95, 0.99].into_iter().enumerate() {
        for row in binomial_tail_check(alpha, &[1, 10, 100], 100_000, rng::derive(seed, 0, n as u64))? {
            let direct = oracle::binomial_lower_tail(alpha, row.n);
            out.check(row.passed(), || {
                format!(
                    "alpha = {alpha}, n = {}: {} vs exact {} and bound {}",
                    row.n, row.estimate.mean, row.exact, row.bound
                )
            });
            out.check((row.exact - direct).abs() <= 1e-12 + 1e-9 * direct, || {
                format!("alpha = {alpha}, n = {}: cdf {} vs sum {direct}", row.n, row.exact)
            });
            out.records.push(row.estimate);
        }
    }
    Ok(out)
}

fn oriented(seed: u64) -> Result<Outcome> {
    let mut out = Outcome::new(10, "oriented suite");
    for (l, c) in [(4u64, 2u64), (10, 10)] {
        let g = OrientedGeometry::new(l, c, 2)?;
        for k in 0..=2 {
            let mut edges = Vec::new();
            for i in -1..3 {
                for j in -4..5 {
                    if is_vertex(i, j) {
                        edges.push(OrientedEdge { i, j, up: true });
                        edges.push(OrientedEdge { i, j, up: false });
                    }
                }
            }
            for a in &edges {
                for b in &edges {
                    if a == b || a.shares_endpoint(b) {
                        continue;
                    }
                    let meet = OrientedBox::new(k, *a).meets(&OrientedBox::new(k, *b), &g);
                    out.check(!meet, || format!("L = {l}, k = {k}: boxes of {a:?}, {b:?} meet"));
                }
            }
            let (lx, ly) = (g.len_x(k), g.len_y(k));
            for i in -2..3 {
                let x = i * lx;
                for j in -4..4 {
                    let ys = j * ly..(j + 1) * ly;
                    let adm = ys.clone().any(|y| is_admissible(x, y, k, &g));
                    let even = (i + j).rem_euclid(2) == 0;
                    let has_vertex = ys.clone().any(|y| is_vertex(x, y));
                    out.check(adm == (even && has_vertex), || {
                        format!("L = {l}, k = {k}: interval {j} at x = {x} admissible = {adm}")
                    });
                    for y in ys {
                        let want = even && is_vertex(x, y);
                        out.check(is_admissible(x, y, k, &g) == want, || {
                            format!("({x}, {y}) admissible at k = {k} should be {want}")
                        });
                    }
                }
            }
        }
    }

    let g = OrientedGeometry::new(4, 2, 1)?;
    let boxes = [
        OrientedRegion::new(0, 4, -2, 2)?,
        OrientedRegion::new(0, 3, 0, 4)?,
        OrientedRegion::new(1, 3, -3, 3)?,
        OrientedRegion::new(0, 6, 0, 2)?,
        OrientedRegion::new(0, 2, -4, 4)?,
    ];
    for r in boxes {
        let edges = r.edges();
        if edges.len() > 20 {
            out.check(false, || format!("{r:?}: {} edges", edges.len()));
            continue;
        }
        let s: SiteSet = (r.y0..=r.y1).filter(|&y| is_vertex(r.x0, y)).collect();
        let mut agree = true;
        for mask in 0u32..1 << edges.len() {
            let states: Vec<bool> = (0..edges.len()).map(|t| mask >> t & 1 == 1).collect();
            let sample = OrientedSample::from_states(r, &edges, &states)?;
            agree &= oriented_reachable(&sample, &s, Confinement::Region(r), &g)?
                == oracle::oriented_paths_reach(&sample, &s, r);
        }
        out.check(agree, || format!("{r:?}: reachability differs from path enumeration"));
    }

    for ell in [5u64, 10] {
        for q in [0.0, 1.0] {
            let k = KSVParams {
                p_g: q,
                p_b: q,
                rho: 0.3,
                ell,
                m: 1,
            };
            let layers = 3;
            let region = crate::oriented::exploration_region(&k, layers);
            let eta = crate::env::ColumnIndicator::bernoulli(
                region.x1 as usize + 1,
                k.rho,
                rng::derive(seed, 1, ell),
            )?;
            let field = sample_ksv(&eta, q, q, region, rng::derive(seed, 2, ell))?;
            let sizes = ksv_block_exploration(&field, &k, layers)?.sizes();
            let want: Vec<usize> = if q == 1.0 {
                vec![1, 2, 3, 4]
            } else {
                vec![1, 0, 0, 0]
            };
            out.check(sizes == want, || format!("ell = {ell}, p = {q}: sizes {sizes:?}"));
        }
    }

    let homogeneous = oriented_percolation_probability(
        GapDistribution::PointMass { value: 0 },
        0.3,
        128,
        2000,
        rng::derive(seed, 3, 0),
    )?;
    out.check(homogeneous.mean <= 0.02, || {
        format!("homogeneous p = 0.3: {}", homogeneous.mean)
    });
    let geometric = oriented_percolation_probability(
        GapDistribution::geometric(0.01),
        0.95,
        128,
        2000,
        rng::derive(seed, 3, 1),
    )?;
    out.check(geometric.mean >= 0.3, || {
        format!("geometric p = 0.95: {}", geometric.mean)
    });
    out.records.extend([homogeneous, geometric]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names() {
        assert!(suite_criteria("nope").is_err());
        let mut all: Vec<u32> = SUITES
            .iter()
            .flat_map(|s| suite_criteria(s).unwrap().iter().copied())
            .collect();
        all.sort_unstable();
        assert_eq!(all, (1..=10).collect::<Vec<_>>());
    }

    #[test]
    fn line_format() {
        let mut o = Outcome::new(3, "x");
        assert!(!o.passed());
        o.check(true, String::new);
        assert_eq!(o.line(), "criterion  3 x: PASS (1 checks)");
        o.check(false, || "bad".into());
        assert!(o.line().ends_with("FAIL (2 checks, 1 failed; first: bad)"));
    }
}
