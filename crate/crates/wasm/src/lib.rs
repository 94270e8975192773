//! Browser bindings. Every function returns a JSON string or throws the error text.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use stretchperc::env::{sample_environment, Axis, GapDistribution, GapSequence};
use stretchperc::estimators::exact_scale0;
use stretchperc::perc::{sample_configuration, Components, Rectangle};
use stretchperc::renorm::{compute_labels, ScaleParams};

fn fail(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn dist(s: &str) -> Result<GapDistribution, JsValue> {
    s.parse().map_err(fail)
}

fn cluster_json(dist_x: &str, dist_y: &str, p: f64, n: i64, seed: u64) -> stretchperc::Result<Value> {
    let (dx, dy) = (dist_x.parse()?, dist_y.parse()?);
    let env = sample_environment(dx, dy, -n..=n, -n..=n, seed)?;
    let rect = Rectangle::new(-n, n, -n, n)?;
    let sample = sample_configuration(&env, p, rect, seed)?;
    let mut comp = Components::new(&sample, rect)?;
    let origin = comp.root(0, 0);
    let mut reached = Vec::new();
    let mut boundary = false;
    for y in -n..=n {
        for x in -n..=n {
            let hit = comp.root(x, y) == origin;
            boundary |= hit && (x.abs() == n || y.abs() == n);
            reached.push(hit);
        }
    }
    let open: Vec<[i64; 3]> = rect
        .edges()
        .filter(|&e| sample.is_open(e) == Some(true))
        .map(|e| [e.x, e.y, matches!(e.axis, Axis::Vertical) as i64])
        .collect();
    Ok(json!({
        "n": n,
        "xi_x": env.xi_x.values(),
        "xi_y": env.xi_y.values(),
        "open": open,
        "reached": reached,
        "boundary": boundary,
    }))
}

/// Open edges of `[-n, n]²` and the cluster of the origin.
#[wasm_bindgen]
pub fn cluster(dist_x: &str, dist_y: &str, p: f64, n: u32, seed: u64) -> Result<String, JsValue> {
    if n == 0 || n > 200 {
        return Err(fail("n must lie in 1..=200"));
    }
    cluster_json(dist_x, dist_y, p, n as i64, seed)
        .map(|v| v.to_string())
        .map_err(fail)
}

/// Labels `(H, B)` at every scale for `len` gaps drawn from `law`, `len` rounded up to `L^k_max`.
#[wasm_bindgen]
pub fn labels(law: &str, l: u32, k_max: u32, len: u32, seed: u64) -> Result<String, JsValue> {
    let d = dist(law)?;
    let sp = ScaleParams::new(l as u64, k_max).map_err(fail)?;
    let top = sp.len(k_max);
    let blocks = (len as u64).div_ceil(top as u64).max(1) as i64;
    if blocks * top > 4096 {
        return Err(fail("at most 4096 gaps"));
    }
    let sampler = stretchperc::env::GapSampler::new(&d).map_err(fail)?;
    let xi = GapSequence::sample(&sampler, 0..=blocks * top - 1, seed, 0).map_err(fail)?;
    let t = compute_labels(&xi, sp).map_err(fail)?;
    let rows: Vec<Value> = (0..=k_max)
        .map(|k| json!({ "k": k, "h": t.h_row(k), "b": t.b_row(k) }))
        .collect();
    Ok(json!({ "xi": xi.values(), "rows": rows }).to_string())
}

/// Closed-form `u_0` and `v_0(h)`.
#[wasm_bindgen]
pub fn scale0(p: f64, h: u32, loss: u32) -> Result<String, JsValue> {
    let (u, v) = exact_scale0(p, h as u64, loss).map_err(fail)?;
    Ok(json!({ "u0": u, "v0": v }).to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cluster_at_p_one_reaches_boundary() {
        let v = cluster_json("geometric:0.1", "geometric:0.1", 1.0, 3, 1).unwrap();
        assert_eq!(v["boundary"], true);
        let reached = v["reached"].as_array().unwrap();
        assert_eq!(reached.iter().filter(|b| **b == true).count(), 7 * 7 - 1);
        assert_eq!(reached[7 * 7 - 1], false);
        let v = cluster_json("geometric:0.1", "geometric:0.1", 0.0, 3, 1).unwrap();
        assert_eq!(v["open"].as_array().unwrap().len(), 0);
        assert_eq!(v["boundary"], false);
    }
}
