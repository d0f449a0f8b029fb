//! Dense polynomials (ascending coefficients) and their roots.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{numerical, Result};

/// Coefficients of `prod_i (r_i - x)`, ascending in powers of `x`.
pub fn from_roots(roots: &[f64]) -> Vec<f64> {
    let mut p = vec![1.0];
    for &r in roots {
        p = mul(&p, &[r, -1.0]);
    }
    p
}

pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or(0.0) + b.get(i).copied().unwrap_or(0.0))
        .collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// Multiply by `x`.
pub fn shift(a: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + 1);
    out.push(0.0);
    out.extend_from_slice(a);
    out
}

pub fn eval(c: &[Complex64], x: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &ci| acc * x + ci)
}

fn eval_with_derivative(c: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    let mut p = zero;
    let mut dp = zero;
    for &ci in c.iter().rev() {
        dp = dp * x + p;
        p = p * x + ci;
    }
    (p, dp)
}

/// All complex roots via the eigenvalues of the companion matrix, then a
/// few Newton steps on the original coefficients.
pub fn roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let scale_ref = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale_ref == 0.0 {
        return numerical("zero polynomial has no isolated roots");
    }
    let mut deg = coeffs.len() - 1;
    while deg > 0 && coeffs[deg].norm() <= 1e-300 * scale_ref.max(1.0) {
        deg -= 1;
    }
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[deg];
    let mut comp = DMatrix::<Complex64>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -coeffs[i] / lead;
    }
    let schur = match Schur::try_new(comp, f64::EPSILON, 10_000) {
        Some(s) => s,
        None => return numerical("companion eigenvalue iteration did not converge"),
    };
    let Some(ev) = schur.eigenvalues() else {
        return numerical("companion eigenvalues unavailable");
    };
    let c = &coeffs[..=deg];
    let mut out = Vec::with_capacity(deg);
    for &r0 in ev.iter() {
        let mut r = r0;
        for _ in 0..4 {
            let (p, dp) = eval_with_derivative(c, r);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            let next = r - step;
            if !next.re.is_finite() || !next.im.is_finite() {
                break;
            }
            if eval(c, next).norm() > p.norm() {
                break;
            }
            r = next;
            if step.norm() <= 1e-16 * r.norm().max(1.0) {
                break;
            }
        }
        out.push(r);
    }
    Ok(out)
}

pub fn roots_real_coeffs(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let c: Vec<Complex64> = coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    roots(&c)
}

/// Root of a monotone function on `(lo, hi)` where the values at the ends
/// have opposite signs. Newton steps are accepted only while they stay
/// inside the current bracket.
pub fn bracketed_root<F>(f: F, mut lo: f64, mut hi: f64, rtol: f64) -> Result<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return numerical(format!(
            "no sign change on [{lo:e}, {hi:e}] (f = {flo:e}, {fhi:e})"
        ));
    }
    let increasing = fhi > flo;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..400 {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx > 0.0) == increasing {
            hi = x;
        } else {
            lo = x;
        }
        let newton = x - fx / dfx;
        let next = if dfx != 0.0 && newton > lo && newton < hi && newton.is_finite() {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let tol = rtol * next.abs().max(f64::MIN_POSITIVE);
        if (next - x).abs() <= tol || (hi - lo) <= tol {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}
