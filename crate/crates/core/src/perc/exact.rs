use super::{PercSample, Rectangle};
use crate::env::{check_probability, stretched_probability, Environment};
use crate::error::{Error, Result};

pub const MAX_ENUMERATED_EDGES: usize = 24;

/// `Σ_ω P(ω) · [predicate(ω)]` over every configuration of `rect`.
pub fn exact_event_probability(
    env: &Environment,
    p: f64,
    rect: Rectangle,
    predicate: impl Fn(&PercSample) -> bool,
) -> Result<f64> {
    check_probability(p, "p")?;
    let n = rect.edge_count();
    if n > MAX_ENUMERATED_EDGES {
        return Err(Error::Resource(format!(
            "{n} edges exceed the enumeration limit of {MAX_ENUMERATED_EDGES}"
        )));
    }
    let q = rect
        .edges()
        .map(|e| Ok(stretched_probability(p, env.gap_of(e)?)))
        .collect::<Result<Vec<f64>>>()?;
    let mut sample = PercSample::all(rect, false);
    let mut total = 0.0;
    for mask in 0u32..(1u32 << n) {
        let mut w = 1.0;
        let states = sample.states_mut();
        for (i, (s, &qi)) in states.iter_mut().zip(&q).enumerate() {
            *s = mask >> i & 1 == 1;
            w *= if *s { qi } else { 1.0 - qi };
        }
        if w > 0.0 && predicate(&sample) {
            total += w;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Edge;

    #[test]
    fn total_mass_is_one() {
        let env = Environment::flat(0..=2, 0..=1).unwrap();
        let r = Rectangle::new(0, 3, 0, 2).unwrap();
        let v = exact_event_probability(&env, 0.37, r, |_| true).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_edge() {
        let env = Environment::flat(0..=0, 0..=0).unwrap();
        let r = Rectangle::new(0, 1, 0, 1).unwrap();
        let v =
            exact_event_probability(&env, 0.3, r, |s| s.is_open(Edge::horizontal(0, 0)).unwrap())
                .unwrap();
        assert!((v - 0.3).abs() < 1e-15);
    }

    #[test]
    fn too_many_edges() {
        let env = Environment::flat(0..=9, 0..=9).unwrap();
        let r = Rectangle::new(0, 4, 0, 4).unwrap();
        assert!(matches!(
            exact_event_probability(&env, 0.5, r, |_| true),
            Err(Error::Resource(_))
        ));
    }
}
