//! Sample covariance, MUSIC and g-MUSIC cost functions, and the mid-angle
//! resolution test.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::array_model::{hermitian_eigen, hermitian_part, steering_vector, ScenarioConfig};
use crate::error::{numerical, Error, Result};
use crate::poly;

#[derive(Debug, Clone)]
pub struct SampleEigen {
    pub lambdas: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
    pub n: usize,
}

impl SampleEigen {
    pub fn m(&self) -> usize {
        self.lambdas.len()
    }

    /// `|e_m^H a(theta)|^2` for every eigenvector.
    pub fn projections(&self, theta: f64, cfg: &ScenarioConfig) -> Vec<f64> {
        let a = steering_vector(theta, cfg);
        let c = self.vectors.adjoint() * a;
        c.iter().map(|z| z.norm_sqr()).collect()
    }
}

pub fn sample_covariance(y: &DMatrix<Complex64>) -> SampleEigen {
    let (m, n) = y.shape();
    let r = hermitian_part(&((y * y.adjoint()) / Complex64::new(n as f64, 0.0)));
    let (mut lambdas, vectors) = hermitian_eigen(&r);
    let zeros = m.saturating_sub(n);
    for l in lambdas.iter_mut().take(zeros) {
        *l = 0.0;
    }
    for l in lambdas.iter_mut().skip(zeros) {
        *l = l.max(0.0);
    }
    SampleEigen { lambdas, vectors, n }
}

pub fn music_cost(se: &SampleEigen, k: usize, thetas: &[f64], cfg: &ScenarioConfig) -> Vec<f64> {
    thetas
        .iter()
        .map(|&t| se.projections(t, cfg)[..se.m() - k].iter().sum())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GMusicWeights {
    pub phis: Vec<f64>,
    pub mu_hats: Vec<f64>,
}

/// Roots of `(1/N) sum_k lambda_k / (lambda_k - mu) = 1`, one per sample
/// eigenvalue, padded with zeros for the null space when `M > N`.
pub fn mu_hat_values(lambdas: &[f64], n: usize) -> Result<Vec<f64>> {
    let nf = n as f64;
    let m = lambdas.len();
    let nz: Vec<f64> = lambdas.iter().copied().filter(|&l| l > 0.0).collect();
    for w in nz.windows(2) {
        if w[1] - w[0] <= 1e-14 * w[1] {
            return numerical(format!("tied sample eigenvalues {:e}, {:e}", w[0], w[1]));
        }
    }
    let f = |mu: f64| {
        let mut v = 0.0;
        let mut dv = 0.0;
        for &l in &nz {
            let d = l - mu;
            v += l / d;
            dv += l / (d * d);
        }
        (v / nf - 1.0, dv / nf)
    };
    let eps = 1e-15;
    let mut out = vec![0.0; m - nz.len()];
    for (i, &l) in nz.iter().enumerate() {
        let hi = l - eps * l;
        let mu = if i == 0 {
            if nz.len() >= n {
                0.0
            } else {
                poly::bracketed_root(f, 0.0, hi, 1e-14)?
            }
        } else {
            let prev = nz[i - 1];
            poly::bracketed_root(f, prev + eps * prev, hi, 1e-14)?
        };
        out.push(mu);
    }
    Ok(out)
}

pub fn gmusic_weights(se: &SampleEigen, k: usize, n: usize) -> Result<GMusicWeights> {
    let m = se.m();
    if k >= m {
        return Err(Error::InvalidConfig(format!("need K < M, got K = {k}, M = {m}")));
    }
    let l = &se.lambdas;
    let mu = mu_hat_values(l, n)?;
    let term = |lm: f64, kk: usize| {
        let a = if l[kk] == 0.0 { 0.0 } else { l[kk] / (lm - l[kk]) };
        let b = if mu[kk] == 0.0 { 0.0 } else { mu[kk] / (lm - mu[kk]) };
        a - b
    };
    let split = m - k;
    let phis = (0..m)
        .map(|i| {
            if l[i] == 0.0 && i < split {
                1.0
            } else if i < split {
                1.0 + (split..m).map(|kk| term(l[i], kk)).sum::<f64>()
            } else {
                -(0..split).map(|kk| term(l[i], kk)).sum::<f64>()
            }
        })
        .collect();
    Ok(GMusicWeights { phis, mu_hats: mu })
}

pub fn gmusic_cost(se: &SampleEigen, w: &GMusicWeights, thetas: &[f64], cfg: &ScenarioConfig) -> Vec<f64> {
    thetas
        .iter()
        .map(|&t| se.projections(t, cfg).iter().zip(&w.phis).map(|(p, f)| p * f).sum())
        .collect()
}

fn golden_section<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// The `k` deepest strict local minima of `cost` sampled on a uniform grid
/// over `fov`, each refined by golden section, returned ascending by angle.
pub fn find_k_deepest_minima<F>(cost: F, k: usize, fov: (f64, f64), grid_step: f64) -> Result<Vec<f64>>
where
    F: Fn(f64) -> f64,
{
    if !(grid_step > 0.0) || !(fov.1 > fov.0) {
        return Err(Error::InvalidConfig("grid step and field of view must be positive".into()));
    }
    let count = ((fov.1 - fov.0) / grid_step).floor() as usize + 1;
    let grid: Vec<f64> = (0..count).map(|i| fov.0 + i as f64 * grid_step).collect();
    let vals: Vec<f64> = grid.iter().map(|&t| cost(t)).collect();
    let mut minima: Vec<(f64, f64)> = Vec::new();
    for i in 1..count.saturating_sub(1) {
        if vals[i] < vals[i - 1] && vals[i] < vals[i + 1] {
            let t = golden_section(&cost, grid[i - 1], grid[i + 1], 1e-6);
            minima.push((t, cost(t)));
        }
    }
    if minima.len() < k {
        return numerical(format!("found {} local minima, need {k}", minima.len()));
    }
    minima.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut out: Vec<f64> = minima[..k].iter().map(|m| m.0).collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

pub const U: [f64; 3] = [0.5, 0.5, -1.0];

pub fn resolution_statistic(eta: &[f64; 3]) -> f64 {
    U.iter().zip(eta).map(|(u, e)| u * e).sum()
}

/// Resolved iff the mid-angle cost exceeds the mean cost at the two DoAs.
pub fn resolution_test(eta: &[f64; 3]) -> bool {
    resolution_statistic(eta) < 0.0
}
