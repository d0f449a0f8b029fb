//! Quadrature over a finite interval whose integrand behaves like a square
//! root (or its reciprocal) at both ends.
//!
//! With `x = a + (b - a)(1 - cos t)/2` the endpoint behaviour is absorbed by
//! the Jacobian and the integrand in `t` is smooth, so a composite
//! Gauss-Legendre rule converges quickly. Nodes never touch the endpoints.

use crate::error::{numerical, Result};

const GL_X: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL_W: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

pub const DEFAULT_RTOL: f64 = 1e-10;
pub const MAX_PANELS: usize = 1 << 15;
const START_PANELS: usize = 16;

/// Nodes `x` and weights (Jacobian included) for `panels` panels in `t`.
pub fn cosine_nodes(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let half = 0.5 * (b - a);
    let h = std::f64::consts::PI / panels as f64;
    let mut out = Vec::with_capacity(5 * panels);
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for (xi, wi) in GL_X.iter().zip(GL_W.iter()) {
            let t = mid + 0.5 * h * xi;
            let x = a + half * (1.0 - t.cos());
            out.push((x, 0.5 * h * wi * half * t.sin()));
        }
    }
    out
}

/// Integrate a vector-valued `f` over `[a, b]`, doubling panels until the
/// max-norm change is below `rtol` times the max-norm of the result.
pub fn integrate_vec<F>(a: f64, b: f64, dim: usize, rtol: f64, f: F) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    use rayon::prelude::*;
    let eval = |panels: usize| -> Result<Vec<f64>> {
        let nodes = cosine_nodes(a, b, panels);
        let parts: Result<Vec<Vec<f64>>> = nodes
            .par_chunks(64)
            .map(|chunk| {
                let mut acc = vec![0.0; dim];
                for &(x, w) in chunk {
                    let v = f(x)?;
                    for (s, vi) in acc.iter_mut().zip(v) {
                        *s += w * vi;
                    }
                }
                Ok(acc)
            })
            .collect();
        let mut total = vec![0.0; dim];
        for p in parts? {
            for (s, v) in total.iter_mut().zip(p) {
                *s += v;
            }
        }
        Ok(total)
    };
    let mut panels = START_PANELS;
    let mut prev = eval(panels)?;
    loop {
        panels *= 2;
        let cur = eval(panels)?;
        let scale = cur.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let diff = cur
            .iter()
            .zip(&prev)
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        if diff <= rtol * scale || scale == 0.0 {
            return Ok(cur);
        }
        if panels >= MAX_PANELS {
            return numerical(format!(
                "cluster quadrature not converged at {panels} panels: last estimates differ by {diff:e} (scale {scale:e})"
            ));
        }
        prev = cur;
    }
}

pub fn integrate<F>(a: f64, b: f64, rtol: f64, f: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    integrate_vec(a, b, 1, rtol, |x| Ok(vec![f(x)?])).map(|v| v[0])
}
