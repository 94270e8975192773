//! Registered experiments: each declares its keys and turns resolved values into records.

use serde_json::{json, Value};
use stretchperc::estimators::{
    binomial_tail_check, contraction_report, estimate_u_k, estimate_v_k, exact_scale0,
    percolation_probability, sharpness_experiment, ScenarioFamily, SharpnessConfig,
};
use stretchperc::fractal::FractalParams;
use stretchperc::oriented::{ksv_survival_probability, oriented_percolation_probability, KSVParams};
use stretchperc::params;
use stretchperc::renorm::{check_certificate, estimate_pk, estimate_pkhb, Rho, ScaleParams};
use stretchperc::stats::{bernoulli_se, EstimateRecord};

use crate::config::{key, Key, Kind, Resolved};
use crate::Failure;

/// What a run produced: CSV rows, a nested report and the checks it asserted.
pub struct RunOutput {
    pub records: Vec<EstimateRecord>,
    pub report: Value,
    pub checks: Vec<(String, bool)>,
}

impl RunOutput {
    fn records(records: Vec<EstimateRecord>) -> Self {
        let report = json!({ "records": records });
        RunOutput {
            records,
            report,
            checks: Vec::new(),
        }
    }
}

pub struct Experiment {
    pub name: &'static str,
    pub about: &'static str,
    pub keys: &'static [Key],
    pub run: fn(&Resolved) -> Result<RunOutput, Failure>,
}

use Kind::*;

pub const REGISTRY: &[Experiment] = &[
    Experiment {
        name: "exact_scale0",
        about: "closed-form u_0 and v_0(h)",
        keys: &[key("p", Float, "0.9"), key("h", Uint, "1"), key("loss", Uint, "1")],
        run: run_exact_scale0,
    },
    Experiment {
        name: "estimate_pk",
        about: "P(H_k > 0) at the origin for k up to k_max",
        keys: &[
            key("dist", Dist, "geometric:0.1"),
            key("l", Uint, "4"),
            key("k_max", Uint, "2"),
            key("trials", Uint, "100000"),
        ],
        run: run_estimate_pk,
    },
    Experiment {
        name: "estimate_pkhb",
        about: "joint law of (H_k, B_k) at the origin",
        keys: &[
            key("dist", Dist, "geometric:0.1"),
            key("l", Uint, "4"),
            key("k_max", Uint, "1"),
            key("h_max", Uint, "8"),
            key("trials", Uint, "100000"),
        ],
        run: run_estimate_pkhb,
    },
    Experiment {
        name: "check_certificate",
        about: "inequality grid for the environment recursion",
        keys: &[
            key("l", Uint, "1000000"),
            key("rho_exp", Float, "-16"),
            key("rho", Float, "0"),
            key("r_max", Uint, "100"),
            key("h_max", Uint, "10000"),
            key("k_max", Uint, "100"),
            key("b_max", Uint, "100"),
        ],
        run: run_certificate,
    },
    Experiment {
        name: "estimate_u_k",
        about: "clean-column crossing failure over the standard scenario family",
        keys: &[
            key("l", Uint, "4"),
            key("k", Uint, "0"),
            key("p", Float, "0.9"),
            key("h_max", Uint, "3"),
            key("trials", Uint, "10000"),
        ],
        run: run_u_k,
    },
    Experiment {
        name: "estimate_v_k",
        about: "defective-column crossing failure over the standard scenario family",
        keys: &[
            key("l", Uint, "4"),
            key("k", Uint, "0"),
            key("p", Float, "0.9"),
            key("h_max", Uint, "3"),
            key("trials", Uint, "10000"),
        ],
        run: run_v_k,
    },
    Experiment {
        name: "contraction",
        about: "u and v at consecutive scales against constant * max(u_k, v_k)^2",
        keys: &[
            key("l", Uint, "4"),
            key("ks", UintList, "0"),
            key("p", Float, "0.98"),
            key("branching", Uint, "2"),
            key("h_max", Uint, "2"),
            key("constant", Float, "1"),
            key("trials", Uint, "2000"),
        ],
        run: run_contraction,
    },
    Experiment {
        name: "percolation_probability",
        about: "origin connected to the boundary of the box of radius n",
        keys: &[
            key("dist_x", Dist, "geometric:0.01"),
            key("dist_y", Dist, "geometric:0.01"),
            key("p", Float, "0.95"),
            key("n", Uint, "64"),
            key("trials", Uint, "500"),
        ],
        run: run_percolation,
    },
    Experiment {
        name: "sharpness",
        about: "connection probabilities across growing scales",
        keys: &[
            key("dist_x", Dist, "poly:1.5"),
            key("dist_y", Dist, "poly:3"),
            key("p", Float, "0.9"),
            key("n_list", UintList, "3,4,5"),
            key("delta", Float, "1"),
            key("trials", Uint, "2000"),
        ],
        run: run_sharpness,
    },
    Experiment {
        name: "binomial_tail",
        about: "Binomial lower tail against its exponential bound",
        keys: &[
            key("alpha", Float, "0.95"),
            key("n_list", UintList, "1,10,100"),
            key("trials", Uint, "100000"),
        ],
        run: run_binomial,
    },
    Experiment {
        name: "oriented_percolation",
        about: "oriented path from the origin to a given depth",
        keys: &[
            key("dist", Dist, "geometric:0.01"),
            key("p", Float, "0.95"),
            key("depth", Uint, "128"),
            key("trials", Uint, "2000"),
        ],
        run: run_oriented,
    },
    Experiment {
        name: "ksv_survival",
        about: "block exploration of the good/bad column site model",
        keys: &[
            key("p_g", Float, "0.9"),
            key("p_b", Float, "0.5"),
            key("rho", Float, "0.1"),
            key("ell", Uint, "10"),
            key("layers", Uint, "4"),
            key("trials", Uint, "1000"),
        ],
        run: run_ksv,
    },
];

pub fn find(name: &str) -> Option<&'static Experiment> {
    REGISTRY.iter().find(|e| e.name == name)
}

fn scale(c: &Resolved, k_key: &str) -> Result<ScaleParams, Failure> {
    Ok(ScaleParams::new(c.u64("l"), c.u32(k_key)?)?)
}

fn exact_record(quantity: &str, value: f64, c: &Resolved) -> EstimateRecord {
    EstimateRecord {
        experiment: "exact_scale0".into(),
        params: params! {
            "quantity" => quantity,
            "p" => c.f64("p"),
            "h" => c.u64("h"),
            "loss" => c.u64("loss"),
        },
        mean: value,
        stderr: 0.0,
        trials: 0,
        seed: c.u64("seed"),
    }
}

fn run_exact_scale0(c: &Resolved) -> Result<RunOutput, Failure> {
    let (u, v) = exact_scale0(c.f64("p"), c.u64("h"), c.u32("loss")?)?;
    Ok(RunOutput::records(vec![
        exact_record("u_0", u, c),
        exact_record("v_0", v, c),
    ]))
}

fn run_estimate_pk(c: &Resolved) -> Result<RunOutput, Failure> {
    let recs = estimate_pk(&c.dist("dist"), scale(c, "k_max")?, c.u64("trials"), c.u64("seed"))?;
    Ok(RunOutput::records(recs))
}

fn run_estimate_pkhb(c: &Resolved) -> Result<RunOutput, Failure> {
    let t = estimate_pkhb(
        &c.dist("dist"),
        scale(c, "k_max")?,
        c.u64("trials"),
        c.u64("seed"),
        c.u64("h_max"),
    )?;
    let report = serde_json::to_value(&t).expect("plain data");
    Ok(RunOutput {
        records: t.records,
        report,
        checks: Vec::new(),
    })
}

fn run_certificate(c: &Resolved) -> Result<RunOutput, Failure> {
    let rho = if c.f64("rho") > 0.0 {
        Rho::Value(c.f64("rho"))
    } else {
        Rho::PowerOfL(c.f64("rho_exp"))
    };
    let rep = check_certificate(
        c.u64("l"),
        rho,
        c.u64("r_max"),
        c.u64("h_max"),
        c.u64("k_max"),
        c.u64("b_max"),
    )?;
    let rec = EstimateRecord {
        experiment: "check_certificate".into(),
        params: params! { "l" => rep.l, "rho" => format!("{:?}", rep.rho), "quantity" => "violations" },
        mean: rep.violation_count as f64,
        stderr: 0.0,
        trials: 0,
        seed: c.u64("seed"),
    };
    Ok(RunOutput {
        records: vec![rec],
        checks: vec![("certificate holds on the grid".into(), rep.passed())],
        report: serde_json::to_value(&rep).expect("plain data"),
    })
}

fn family(c: &Resolved) -> Result<ScenarioFamily, Failure> {
    let l = c.u64("l");
    Ok(ScenarioFamily::standard(l, c.u32("k")?, FractalParams::desk(l), c.u64("h_max")))
}

fn run_u_k(c: &Resolved) -> Result<RunOutput, Failure> {
    let f = estimate_u_k(&family(c)?.u, c.f64("p"), c.u64("trials"), c.u64("seed"))?;
    Ok(RunOutput::records(f.per_scenario.into_iter().chain([f.max]).collect()))
}

fn run_v_k(c: &Resolved) -> Result<RunOutput, Failure> {
    let f = estimate_v_k(&family(c)?.v, c.f64("p"), c.u64("trials"), c.u64("seed"))?;
    Ok(RunOutput::records(f.per_scenario.into_iter().chain([f.max]).collect()))
}

fn run_contraction(c: &Resolved) -> Result<RunOutput, Failure> {
    let l = c.u64("l");
    let mut fp = FractalParams::desk(l);
    fp.branching = c.u64("branching");
    let h_max = c.u64("h_max");
    let trials = c.u64("trials");
    let rows = contraction_report(
        &c.list("ks"),
        c.f64("p"),
        |k| ScenarioFamily::standard(l, k, fp, h_max),
        trials,
        c.u64("seed"),
        c.f64("constant"),
    )?;
    let mut records = Vec::new();
    for r in &rows {
        for (q, k, v) in [("u", r.k, r.u_k), ("v", r.k, r.v_k), ("u", r.k + 1, r.u_next), ("v", r.k + 1, r.v_next)] {
            records.push(EstimateRecord {
                experiment: "contraction".into(),
                params: params! { "l" => l, "p" => c.f64("p"), "quantity" => q, "k" => k, "branching" => fp.branching },
                mean: v,
                stderr: bernoulli_se(v, trials),
                trials,
                seed: c.u64("seed"),
            });
        }
    }
    Ok(RunOutput {
        records,
        report: json!({ "rows": rows }),
        checks: Vec::new(),
    })
}

fn run_percolation(c: &Resolved) -> Result<RunOutput, Failure> {
    let r = percolation_probability(
        c.dist("dist_x"),
        c.dist("dist_y"),
        c.f64("p"),
        c.i64("n"),
        c.u64("trials"),
        c.u64("seed"),
    )?;
    Ok(RunOutput::records(vec![r]))
}

fn run_sharpness(c: &Resolved) -> Result<RunOutput, Failure> {
    let rows = sharpness_experiment(&SharpnessConfig {
        dist_x: c.dist("dist_x"),
        dist_y: c.dist("dist_y"),
        p: c.f64("p"),
        n_list: c.list("n_list"),
        delta: c.f64("delta"),
        beta: None,
        a: None,
        trials: c.u64("trials"),
        seed: c.u64("seed"),
    })?;
    Ok(RunOutput {
        records: rows.iter().map(|r| r.connection.clone()).collect(),
        report: json!({ "rows": rows }),
        checks: Vec::new(),
    })
}

fn run_binomial(c: &Resolved) -> Result<RunOutput, Failure> {
    let ns: Vec<u64> = c.list("n_list").into_iter().map(u64::from).collect();
    let rows = binomial_tail_check(c.f64("alpha"), &ns, c.u64("trials"), c.u64("seed"))?;
    Ok(RunOutput {
        records: rows.iter().map(|r| r.estimate.clone()).collect(),
        checks: rows
            .iter()
            .map(|r| (format!("n = {}: below bound and matches exact", r.n), r.passed()))
            .collect(),
        report: json!({ "rows": rows }),
    })
}

fn run_oriented(c: &Resolved) -> Result<RunOutput, Failure> {
    let r = oriented_percolation_probability(
        c.dist("dist"),
        c.f64("p"),
        c.i64("depth"),
        c.u64("trials"),
        c.u64("seed"),
    )?;
    Ok(RunOutput::records(vec![r]))
}

fn run_ksv(c: &Resolved) -> Result<RunOutput, Failure> {
    let k = KSVParams {
        p_g: c.f64("p_g"),
        p_b: c.f64("p_b"),
        rho: c.f64("rho"),
        ell: c.u64("ell"),
        m: 1,
    };
    let r = ksv_survival_probability(&k, c.u32("layers")?, c.u64("trials"), c.u64("seed"))?;
    Ok(RunOutput::records(vec![r]))
}
