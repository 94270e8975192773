//! Random environments: gap laws, windowed gap sequences and the edge-probability field.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::rng;

/// Default truncation point for [`GapDistribution::PolynomialTail`].
pub const DEFAULT_POLY_CUTOFF: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum GapDistribution {
    /// `P(ξ ≥ n) = rho^n`.
    Geometric {
        rho: f64,
    },
    /// `P(ξ = t) ∝ (t+1)^(-s)` on `[0, cutoff]`, the mass beyond `cutoff` folded into `cutoff`.
    PolynomialTail {
        s: f64,
        cutoff: u64,
    },
    /// Uniform on `{0, ..., max}`.
    BoundedUniform {
        max: u64,
    },
    PointMass {
        value: u64,
    },
}

impl GapDistribution {
    pub fn geometric(rho: f64) -> Self {
        GapDistribution::Geometric { rho }
    }

    pub fn polynomial(s: f64) -> Self {
        GapDistribution::PolynomialTail {
            s,
            cutoff: DEFAULT_POLY_CUTOFF,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            GapDistribution::Geometric { rho } => {
                if !(0.0..1.0).contains(&rho) {
                    return param(format!("geometric rho must lie in [0,1), got {rho}"));
                }
            }
            GapDistribution::PolynomialTail { s, cutoff } => {
                if !(s > 1.0) || !s.is_finite() {
                    return param(format!("polynomial exponent must exceed 1, got {s}"));
                }
                if cutoff == 0 || cutoff > 100_000_000 {
                    return param(format!(
                        "polynomial cutoff must lie in [1, 1e8], got {cutoff}"
                    ));
                }
            }
            GapDistribution::BoundedUniform { .. } | GapDistribution::PointMass { .. } => {}
        }
        Ok(())
    }

    /// `P(ξ = t)`.
    pub fn pmf(&self, t: u64) -> f64 {
        match *self {
            GapDistribution::Geometric { rho } => {
                if rho == 0.0 {
                    if t == 0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    rho.powf(t as f64) * (1.0 - rho)
                }
            }
            GapDistribution::PolynomialTail { s, cutoff } => {
                if t > cutoff {
                    return 0.0;
                }
                let z = zeta(s);
                if t < cutoff {
                    ((t + 1) as f64).powf(-s) / z
                } else {
                    hurwitz_tail(s, cutoff + 1) / z
                }
            }
            GapDistribution::BoundedUniform { max } => {
                if t <= max {
                    1.0 / (max + 1) as f64
                } else {
                    0.0
                }
            }
            GapDistribution::PointMass { value } => {
                if t == value {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `P(ξ ≥ n)`.
    pub fn survival(&self, n: u64) -> f64 {
        match *self {
            GapDistribution::Geometric { rho } => {
                if n == 0 {
                    1.0
                } else {
                    rho.powf(n as f64)
                }
            }
            GapDistribution::PolynomialTail { s, cutoff } => {
                if n == 0 {
                    1.0
                } else if n > cutoff {
                    0.0
                } else {
                    hurwitz_tail(s, n + 1) / zeta(s)
                }
            }
            GapDistribution::BoundedUniform { max } => {
                if n > max {
                    0.0
                } else {
                    (max + 1 - n) as f64 / (max + 1) as f64
                }
            }
            GapDistribution::PointMass { value } => {
                if n <= value {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// True when the law puts mass on arbitrarily large values (up to truncation).
    pub fn has_unbounded_support(&self) -> bool {
        match *self {
            GapDistribution::Geometric { rho } => rho > 0.0,
            GapDistribution::PolynomialTail { .. } => true,
            _ => false,
        }
    }
}

/// `Σ_{n ≥ m} n^{-s}` for `m ≥ 1`, summed directly up to a point and closed with Euler–Maclaurin.
fn hurwitz_tail(s: f64, m: u64) -> f64 {
    const DIRECT: u64 = 64;
    let mut sum = 0.0;
    let mut n = m;
    while n < m + DIRECT {
        sum += (n as f64).powf(-s);
        n += 1;
    }
    let x = n as f64;
    sum + x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s) + s * x.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * x.powf(-s - 3.0) / 720.0
}

fn zeta(s: f64) -> f64 {
    hurwitz_tail(s, 1)
}

impl fmt::Display for GapDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GapDistribution::Geometric { rho } => write!(f, "geometric:{rho}"),
            GapDistribution::PolynomialTail { s, cutoff } => {
                if cutoff == DEFAULT_POLY_CUTOFF {
                    write!(f, "poly:{s}")
                } else {
                    write!(f, "poly:{s}:{cutoff}")
                }
            }
            GapDistribution::BoundedUniform { max } => write!(f, "uniform:{max}"),
            GapDistribution::PointMass { value } => write!(f, "point:{value}"),
        }
    }
}

impl FromStr for GapDistribution {
    type Err = Error;

    /// Accepts `geometric:<rho>`, `poly:<s>[:<cutoff>]`, `uniform:<max>`, `point:<value>`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let bad = || Error::Parse(format!("unrecognised gap law `{s}`"));
        let num = |x: &str| x.parse::<f64>().map_err(|_| bad());
        let int = |x: &str| x.parse::<u64>().map_err(|_| bad());
        let d = match parts.as_slice() {
            ["geometric", rho] => GapDistribution::Geometric { rho: num(rho)? },
            ["poly", e] => GapDistribution::polynomial(num(e)?),
            ["poly", e, c] => GapDistribution::PolynomialTail {
                s: num(e)?,
                cutoff: int(c)?,
            },
            ["uniform", m] => GapDistribution::BoundedUniform { max: int(m)? },
            ["point", v] => GapDistribution::PointMass { value: int(v)? },
            _ => return Err(bad()),
        };
        d.validate()?;
        Ok(d)
    }
}

/// Prepared sampler; building a polynomial table is the expensive part, so reuse it across draws.
#[derive(Debug, Clone)]
pub struct GapSampler {
    inner: SamplerKind,
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Geometric(rand_distr::Geometric),
    Table(Vec<f64>),
    Uniform(u64),
    Point(u64),
}

impl GapSampler {
    pub fn new(dist: &GapDistribution) -> Result<Self> {
        dist.validate()?;
        let inner = match *dist {
            GapDistribution::Geometric { rho } if rho == 0.0 => SamplerKind::Point(0),
            GapDistribution::Geometric { rho } => SamplerKind::Geometric(
                rand_distr::Geometric::new(1.0 - rho)
                    .map_err(|e| Error::Parameter(e.to_string()))?,
            ),
            GapDistribution::PolynomialTail { s, cutoff } => {
                let z = zeta(s);
                let mut cdf = Vec::with_capacity(cutoff as usize + 1);
                let mut acc = 0.0;
                for t in 0..cutoff {
                    acc += ((t + 1) as f64).powf(-s) / z;
                    cdf.push(acc);
                }
                cdf.push(1.0);
                SamplerKind::Table(cdf)
            }
            GapDistribution::BoundedUniform { max } => SamplerKind::Uniform(max),
            GapDistribution::PointMass { value } => SamplerKind::Point(value),
        };
        Ok(GapSampler { inner })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match &self.inner {
            SamplerKind::Geometric(g) => g.sample(rng),
            SamplerKind::Table(cdf) => {
                let u: f64 = rng.random();
                cdf.partition_point(|&c| c <= u) as u64
            }
            SamplerKind::Uniform(max) => rng.random_range(0..=*max),
            SamplerKind::Point(v) => *v,
        }
    }
}

/// Gap values over an inclusive index window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapSequence {
    lo: i64,
    values: Vec<u64>,
}

impl GapSequence {
    pub fn new(lo: i64, values: Vec<u64>) -> Result<Self> {
        if values.is_empty() {
            return param("gap window must be non-empty");
        }
        Ok(GapSequence { lo, values })
    }

    /// Constant sequence over `window`.
    pub fn constant(window: RangeInclusive<i64>, value: u64) -> Result<Self> {
        let (lo, hi) = (*window.start(), *window.end());
        if hi < lo {
            return param("gap window must be non-empty");
        }
        Ok(GapSequence {
            lo,
            values: vec![value; (hi - lo + 1) as usize],
        })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn contains(&self, i: i64) -> bool {
        i >= self.lo && i <= self.hi()
    }

    pub fn get(&self, i: i64) -> Result<u64> {
        if !self.contains(i) {
            return Err(Error::Window {
                what: "gap",
                index: i,
                lo: self.lo,
                hi: self.hi(),
            });
        }
        Ok(self.values[(i - self.lo) as usize])
    }

    pub fn set(&mut self, i: i64, v: u64) -> Result<()> {
        self.get(i)?;
        self.values[(i - self.lo) as usize] = v;
        Ok(())
    }

    pub fn sample(
        sampler: &GapSampler,
        window: RangeInclusive<i64>,
        seed: u64,
        purpose: u64,
    ) -> Result<Self> {
        let (lo, hi) = (*window.start(), *window.end());
        if hi < lo {
            return param("gap window must be non-empty");
        }
        let mut rng = rng::stream(seed, purpose, 0);
        let values = (lo..=hi).map(|_| sampler.sample(&mut rng)).collect();
        Ok(GapSequence { lo, values })
    }
}

const TAG_X: u64 = rng::tag("env/xi_x");
const TAG_Y: u64 = rng::tag("env/xi_y");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub xi_x: GapSequence,
    pub xi_y: GapSequence,
    pub dist_x: Option<GapDistribution>,
    pub dist_y: Option<GapDistribution>,
    pub seed: u64,
}

pub fn sample_environment(
    dist_x: GapDistribution,
    dist_y: GapDistribution,
    window_x: RangeInclusive<i64>,
    window_y: RangeInclusive<i64>,
    seed: u64,
) -> Result<Environment> {
    let sx = GapSampler::new(&dist_x)?;
    let sy = GapSampler::new(&dist_y)?;
    Environment::sample_with(&sx, &sy, dist_x, dist_y, window_x, window_y, seed)
}

impl Environment {
    /// Sampling with prepared samplers, for loops that draw many environments.
    pub fn sample_with(
        sx: &GapSampler,
        sy: &GapSampler,
        dist_x: GapDistribution,
        dist_y: GapDistribution,
        window_x: RangeInclusive<i64>,
        window_y: RangeInclusive<i64>,
        seed: u64,
    ) -> Result<Self> {
        Ok(Environment {
            xi_x: GapSequence::sample(sx, window_x, seed, TAG_X)?,
            xi_y: GapSequence::sample(sy, window_y, seed, TAG_Y)?,
            dist_x: Some(dist_x),
            dist_y: Some(dist_y),
            seed,
        })
    }

    /// Hand-built environment with no generating law.
    pub fn from_parts(xi_x: GapSequence, xi_y: GapSequence, seed: u64) -> Self {
        Environment {
            xi_x,
            xi_y,
            dist_x: None,
            dist_y: None,
            seed,
        }
    }

    /// All gaps zero over the two windows: the plain lattice.
    pub fn flat(window_x: RangeInclusive<i64>, window_y: RangeInclusive<i64>) -> Result<Self> {
        Ok(Environment::from_parts(
            GapSequence::constant(window_x, 0)?,
            GapSequence::constant(window_y, 0)?,
            0,
        ))
    }

    /// Gap governing `edge`: the column for horizontal edges, the row for vertical ones.
    #[inline]
    pub fn gap_of(&self, edge: Edge) -> Result<u64> {
        match edge.axis {
            Axis::Horizontal => self.xi_x.get(edge.x),
            Axis::Vertical => self.xi_y.get(edge.y),
        }
    }

    pub fn to_text(&self) -> String {
        let join = |v: &[u64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        format!(
            "window_x={}..{} window_y={}..{} seed={}\nxi_x: {}\nxi_y: {}\n",
            self.xi_x.lo(),
            self.xi_x.hi(),
            self.xi_y.lo(),
            self.xi_y.hi(),
            self.seed,
            join(self.xi_x.values()),
            join(self.xi_y.values())
        )
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let perr = |m: &str| Error::Parse(m.to_string());
        let header = lines.next().ok_or_else(|| perr("missing header"))?;
        let mut wx = None;
        let mut wy = None;
        let mut seed = None;
        for field in header.split_whitespace() {
            let (k, v) = field
                .split_once('=')
                .ok_or_else(|| perr("malformed header field"))?;
            match k {
                "window_x" => wx = Some(parse_window(v)?),
                "window_y" => wy = Some(parse_window(v)?),
                "seed" => seed = Some(v.parse::<u64>().map_err(|_| perr("bad seed"))?),
                _ => return Err(perr("unknown header field")),
            }
        }
        let (wx, wy, seed) = (
            wx.ok_or_else(|| perr("missing window_x"))?,
            wy.ok_or_else(|| perr("missing window_y"))?,
            seed.ok_or_else(|| perr("missing seed"))?,
        );
        let row = |line: Option<&str>, name: &str, w: (i64, i64)| -> Result<GapSequence> {
            let line = line.ok_or_else(|| perr("missing gap row"))?;
            let rest = line
                .strip_prefix(name)
                .and_then(|r| r.strip_prefix(':'))
                .ok_or_else(|| perr("unexpected row label"))?;
            let values = rest
                .split_whitespace()
                .map(|t| t.parse::<u64>().map_err(|_| perr("bad gap value")))
                .collect::<Result<Vec<_>>>()?;
            if values.len() as i64 != w.1 - w.0 + 1 {
                return Err(perr("row length does not match window"));
            }
            GapSequence::new(w.0, values)
        };
        let xi_x = row(lines.next(), "xi_x", wx)?;
        let xi_y = row(lines.next(), "xi_y", wy)?;
        Ok(Environment::from_parts(xi_x, xi_y, seed))
    }
}

fn parse_window(v: &str) -> Result<(i64, i64)> {
    let (a, b) = v
        .split_once("..")
        .ok_or_else(|| Error::Parse(format!("bad window `{v}`")))?;
    let a = a
        .parse()
        .map_err(|_| Error::Parse(format!("bad window `{v}`")))?;
    let b = b
        .parse()
        .map_err(|_| Error::Parse(format!("bad window `{v}`")))?;
    if b < a {
        return Err(Error::Parse(format!("empty window `{v}`")));
    }
    Ok((a, b))
}

/// Column indicators: `1` keeps a column, `0` deletes it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnIndicator {
    eta: Vec<u8>,
}

impl ColumnIndicator {
    pub fn new(eta: Vec<u8>) -> Result<Self> {
        if let Some(v) = eta.iter().find(|&&v| v > 1) {
            return param(format!("column indicator entries must be 0 or 1, got {v}"));
        }
        Ok(ColumnIndicator { eta })
    }

    pub fn values(&self) -> &[u8] {
        &self.eta
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    /// The part between the first and last kept column, inclusive.
    pub fn interior(&self) -> &[u8] {
        match (
            self.eta.iter().position(|&v| v == 1),
            self.eta.iter().rposition(|&v| v == 1),
        ) {
            (Some(a), Some(b)) => &self.eta[a..=b],
            _ => &[],
        }
    }

    pub fn bernoulli(len: usize, density: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&density) {
            return param("density must lie in [0,1]");
        }
        let mut rng = rng::stream(seed, rng::tag("env/eta"), 0);
        let eta = (0..len).map(|_| rng.random_bool(density) as u8).collect();
        Ok(ColumnIndicator { eta })
    }
}

pub fn eta_to_xi(eta: &ColumnIndicator) -> Result<Vec<u64>> {
    let ones: Vec<usize> = eta
        .values()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v == 1)
        .map(|(i, _)| i)
        .collect();
    if ones.len() < 2 {
        return Err(Error::InsufficientData(
            "need at least two kept columns".into(),
        ));
    }
    Ok(ones.windows(2).map(|w| (w[1] - w[0] - 1) as u64).collect())
}

pub fn xi_to_eta(xi: &[u64]) -> ColumnIndicator {
    let mut eta = vec![1u8];
    for &g in xi {
        eta.extend(std::iter::repeat_n(0u8, g as usize));
        eta.push(1);
    }
    ColumnIndicator { eta }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    Horizontal,
    Vertical,
}

/// Nearest-neighbour edge named by its lower/left endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub x: i64,
    pub y: i64,
    pub axis: Axis,
}

impl Edge {
    pub fn horizontal(x: i64, y: i64) -> Self {
        Edge {
            x,
            y,
            axis: Axis::Horizontal,
        }
    }

    pub fn vertical(x: i64, y: i64) -> Self {
        Edge {
            x,
            y,
            axis: Axis::Vertical,
        }
    }

    pub fn between(z: (i64, i64), w: (i64, i64)) -> Result<Self> {
        let (a, b) = if z <= w { (z, w) } else { (w, z) };
        match (b.0 - a.0, b.1 - a.1) {
            (1, 0) => Ok(Edge::horizontal(a.0, a.1)),
            (0, 1) => Ok(Edge::vertical(a.0, a.1)),
            _ => Err(Error::Geometry(format!(
                "{z:?} and {w:?} are not nearest neighbours"
            ))),
        }
    }

    pub fn endpoints(&self) -> ((i64, i64), (i64, i64)) {
        match self.axis {
            Axis::Horizontal => ((self.x, self.y), (self.x + 1, self.y)),
            Axis::Vertical => ((self.x, self.y), (self.x, self.y + 1)),
        }
    }
}

/// `p^(ξ+1)`.
#[inline]
pub fn stretched_probability(p: f64, xi: u64) -> f64 {
    p.powf(xi as f64 + 1.0)
}

pub(crate) fn check_probability(p: f64, name: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return param(format!("{name} must lie in [0,1], got {p}"));
    }
    Ok(())
}

pub fn edge_open_probability(env: &Environment, edge: Edge, p: f64) -> Result<f64> {
    check_probability(p, "p")?;
    Ok(stretched_probability(p, env.gap_of(edge)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_zero_is_degenerate() {
        let env = sample_environment(
            GapDistribution::geometric(0.0),
            GapDistribution::geometric(0.0),
            0..=99,
            0..=9,
            3,
        )
        .unwrap();
        assert!(env.xi_x.values().iter().all(|&v| v == 0));
    }

    #[test]
    fn geometric_tail_frequency() {
        let s = GapSampler::new(&GapDistribution::geometric(0.1)).unwrap();
        let n = 1_000_000;
        let seq = GapSequence::sample(&s, 0..=(n - 1), 11, 0).unwrap();
        let hits = seq.values().iter().filter(|&&v| v >= 3).count() as f64;
        let p0 = 0.001;
        let se = (p0 * (1.0 - p0) / n as f64).sqrt();
        assert!((hits / n as f64 - p0).abs() <= 3.0 * se);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(GapSampler::new(&GapDistribution::geometric(1.0)).is_err());
        assert!(GapSampler::new(&GapDistribution::geometric(-0.1)).is_err());
        assert!(GapSampler::new(&GapDistribution::polynomial(1.0)).is_err());
    }

    #[test]
    fn polynomial_masses_sum_to_one() {
        let d = GapDistribution::PolynomialTail { s: 3.0, cutoff: 50 };
        let total: f64 = (0..=50).map(|t| d.pmf(t)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let z: f64 = (1..200_000u64).map(|n| (n as f64).powi(-3)).sum();
        assert!((zeta(3.0) - 1.202_056_903_159_594).abs() < 1e-12);
        assert!((z - 1.202_056_903_159_594).abs() < 1e-9);
    }

    #[test]
    fn eta_examples() {
        let e = ColumnIndicator::new(vec![1, 1, 1, 1]).unwrap();
        assert_eq!(eta_to_xi(&e).unwrap(), vec![0, 0, 0]);
        let e = ColumnIndicator::new(vec![1, 0, 0, 1, 0, 1]).unwrap();
        assert_eq!(eta_to_xi(&e).unwrap(), vec![2, 1]);
        let e = ColumnIndicator::new(vec![0, 1, 0]).unwrap();
        assert!(matches!(eta_to_xi(&e), Err(Error::InsufficientData(_))));
        assert!(ColumnIndicator::new(vec![2]).is_err());
    }

    #[test]
    fn edge_probability_examples() {
        let env = Environment::from_parts(
            GapSequence::new(0, vec![0, 3]).unwrap(),
            GapSequence::new(0, vec![1, 2]).unwrap(),
            0,
        );
        assert_eq!(
            edge_open_probability(&env, Edge::horizontal(0, 0), 0.9).unwrap(),
            0.9
        );
        assert_eq!(
            edge_open_probability(&env, Edge::vertical(0, 1), 0.5).unwrap(),
            0.125
        );
        assert_eq!(
            edge_open_probability(&env, Edge::vertical(1, 1), 1.0).unwrap(),
            1.0
        );
        assert!(matches!(
            edge_open_probability(&env, Edge::horizontal(2, 0), 0.5),
            Err(Error::Window { .. })
        ));
        assert!(matches!(
            Edge::between((0, 0), (1, 1)),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn text_round_trip() {
        let env = sample_environment(
            GapDistribution::geometric(0.3),
            GapDistribution::polynomial(2.5),
            -3..=4,
            0..=5,
            9,
        )
        .unwrap();
        let back = Environment::from_text(&env.to_text()).unwrap();
        assert_eq!(back.xi_x, env.xi_x);
        assert_eq!(back.xi_y, env.xi_y);
        assert_eq!(back.to_text(), env.to_text());
    }

    #[test]
    fn law_strings_parse() {
        for s in [
            "geometric:0.25",
            "poly:3",
            "poly:2.5:100",
            "uniform:4",
            "point:2",
        ] {
            let d: GapDistribution = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
        assert!("poly:0.5".parse::<GapDistribution>().is_err());
    }
}
