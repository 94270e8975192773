use super::edge_uniform;
use crate::env::{check_probability, stretched_probability, Axis, Edge, Environment};
use crate::error::Result;

/// Whether the open cluster of the origin touches the boundary of `[-n, n]^2`.
pub fn reaches_boundary(env: &Environment, p: f64, n: i64, seed: u64) -> Result<bool> {
    reaches_rect_boundary(env, p, n, n, seed)
}

/// Whether the open cluster of the origin touches the boundary of `[-nx, nx] × [-ny, ny]`.
pub fn reaches_rect_boundary(
    env: &Environment,
    p: f64,
    nx: i64,
    ny: i64,
    seed: u64,
) -> Result<bool> {
    check_probability(p, "p")?;
    if nx < 0 || ny < 0 {
        return Err(crate::Error::Parameter(
            "box radius must be non-negative".into(),
        ));
    }
    if nx == 0 || ny == 0 {
        return Ok(true);
    }
    env.xi_x.get(-nx)?;
    env.xi_x.get(nx - 1)?;
    env.xi_y.get(-ny)?;
    env.xi_y.get(ny - 1)?;
    let qx: Vec<f64> = (-nx..nx)
        .map(|i| stretched_probability(p, env.xi_x.get(i).unwrap()))
        .collect();
    let qy: Vec<f64> = (-ny..ny)
        .map(|j| stretched_probability(p, env.xi_y.get(j).unwrap()))
        .collect();
    Ok(reaches_rect_boundary_in(nx, ny, |e| {
        let q = match e.axis {
            Axis::Horizontal => qx[(e.x + nx) as usize],
            Axis::Vertical => qy[(e.y + ny) as usize],
        };
        edge_uniform(seed, e) < q
    }))
}

/// Depth-first search from the origin inside `[-n, n]^2`, querying edge states lazily.
pub fn reaches_boundary_in(n: i64, is_open: impl FnMut(Edge) -> bool) -> bool {
    reaches_rect_boundary_in(n, n, is_open)
}

pub fn reaches_rect_boundary_in(nx: i64, ny: i64, mut is_open: impl FnMut(Edge) -> bool) -> bool {
    if nx == 0 || ny == 0 {
        return true;
    }
    let side = (2 * nx + 1) as usize;
    let idx = |x: i64, y: i64| (y + ny) as usize * side + (x + nx) as usize;
    let mut seen = vec![false; side * (2 * ny + 1) as usize];
    let mut stack = vec![(0i64, 0i64)];
    seen[idx(0, 0)] = true;
    while let Some((x, y)) = stack.pop() {
        if x.abs() == nx || y.abs() == ny {
            return true;
        }
        // Pushed last is explored first: rightwards, then up, down, left.
        let moves = [
            ((x - 1, y), Edge::horizontal(x - 1, y)),
            ((x, y - 1), Edge::vertical(x, y - 1)),
            ((x, y + 1), Edge::vertical(x, y)),
            ((x + 1, y), Edge::horizontal(x, y)),
        ];
        for ((mx, my), e) in moves {
            let i = idx(mx, my);
            if !seen[i] && is_open(e) {
                seen[i] = true;
                stack.push((mx, my));
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_cases() {
        let env = Environment::flat(-5..=5, -5..=5).unwrap();
        assert!(reaches_boundary(&env, 1.0, 5, 0).unwrap());
        assert!(!reaches_boundary(&env, 0.0, 5, 0).unwrap());
        assert!(reaches_boundary(&env, 0.5, 6, 0).is_err());
    }

    #[test]
    fn thin_box_reaches_top() {
        assert!(reaches_rect_boundary_in(5, 1, |e| e.axis == Axis::Vertical));
        assert!(!reaches_rect_boundary_in(5, 2, |e| e.axis
            == Axis::Horizontal
            && e.y != 0));
    }
}
