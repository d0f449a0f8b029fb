//! Brute-force contour evaluations used to cross-check the closed forms.
//!
//! Every contour is a clockwise ellipse sampled with the trapezoid rule,
//! which converges geometrically for periodic analytic integrands.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::array_model::{true_spectrum, ScenarioConfig, TrueSpectrum};
use crate::asymptotics::{gamma_matrix, probe_projections};
use crate::error::{numerical, Error, Result};
use crate::estimators::{mu_hat_values, SampleEigen};
use crate::resolution::Estimator;
use crate::rmt_support::{omega_of_z, solve_support, SupportProfile};

const J: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub centre: f64,
    pub a: f64,
    pub b: f64,
}

impl Ellipse {
    /// `(z_i, dz_i)` for `z(t) = c + a cos t - j b sin t`.
    pub fn nodes(&self, n: usize) -> Vec<(Complex64, Complex64)> {
        let h = 2.0 * std::f64::consts::PI / n as f64;
        (0..n)
            .map(|i| {
                let (s, c) = (h * i as f64).sin_cos();
                let z = Complex64::new(self.centre + self.a * c, -self.b * s);
                let dz = Complex64::new(-self.a * s, -self.b * c) * h;
                (z, dz)
            })
            .collect()
    }
}

/// A contour enclosing the noise cluster and nothing else of the support.
pub fn noise_cluster_contour(support: &SupportProfile, sp: &TrueSpectrum) -> Result<Ellipse> {
    support.require_isolated()?;
    let gmax = sp.gamma_max();
    let (x1m, x1p) = support.noise_cluster();
    let right = match support.intervals.get(1) {
        Some(&(x2m, _)) => 0.5 * (x1p + x2m),
        None => x1p + 0.5 * gmax,
    };
    let left = (-0.05 * gmax).min(x1m - 0.05 * gmax);
    Ok(Ellipse { centre: 0.5 * (right + left), a: 0.5 * (right - left), b: 0.5 * (x1p - x1m) })
}

fn omega_nodes(
    e: &Ellipse,
    sp: &TrueSpectrum,
    n: usize,
    nodes: usize,
) -> Result<Vec<(Complex64, Complex64, Complex64, Complex64)>> {
    e.nodes(nodes)
        .into_par_iter()
        .map(|(z, dz)| {
            let (w, dw) = omega_of_z(z, sp, n)?;
            Ok((z, dz, w, dw))
        })
        .collect()
}

/// `(1/2 pi j) oint (omega/z) sum_m P_m(theta)/(gamma_m - omega) dz`
pub fn det_equiv_music_contour(
    sp: &TrueSpectrum,
    support: &SupportProfile,
    n: usize,
    probes: &[f64],
    cfg: &ScenarioConfig,
    nodes: usize,
) -> Result<Vec<f64>> {
    let e = noise_cluster_contour(support, sp)?;
    let pts = omega_nodes(&e, sp, n, nodes)?;
    let proj = probe_projections(sp, probes, cfg);
    Ok((0..probes.len())
        .map(|l| {
            let s: Complex64 = pts
                .iter()
                .map(|&(z, dz, w, _)| {
                    let q: Complex64 = sp
                        .gammas
                        .iter()
                        .zip(&proj)
                        .map(|(&g, p)| p[(l, l)].re / (g - w))
                        .sum();
                    w / z * q * dz
                })
                .sum();
            (s / (2.0 * std::f64::consts::PI * J)).re
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct DoubleContour {
    pub xi: DMatrix<f64>,
    /// Largest imaginary part discarded from `xi`.
    pub max_imag: f64,
}

/// The weight matrix of the fluctuation covariance by direct evaluation of
/// the double contour integral over the noise cluster.
pub fn xi_double_contour(
    sp: &TrueSpectrum,
    support: &SupportProfile,
    n: usize,
    kind: Estimator,
    nodes: usize,
) -> Result<DoubleContour> {
    let e = noise_cluster_contour(support, sp)?;
    let pts = omega_nodes(&e, sp, n, nodes)?;
    let mb = sp.m_bar();
    let nf = n as f64;
    let weights: Vec<f64> = sp.gammas.iter().zip(&sp.mults).map(|(&g, &k)| k as f64 * g * g / nf).collect();
    let c: Vec<Vec<Complex64>> = pts.iter().map(|p| sp.gammas.iter().map(|&g| 1.0 / (g - p.2)).collect()).collect();
    let pairs: Vec<(usize, usize)> = (0..mb).flat_map(|r| (r..mb).map(move |k| (r, k))).collect();
    let v: Vec<Vec<Complex64>> = pts
        .iter()
        .zip(&c)
        .map(|(&(z, dz, w, dw), ci)| {
            let f = match kind {
                Estimator::Music => w / z,
                Estimator::GMusic => dw,
            };
            pairs.iter().map(|&(r, k)| f * ci[r] * ci[k] * dz).collect()
        })
        .collect();
    let np = pairs.len();
    let sums: Vec<Vec<Complex64>> = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = vec![Complex64::new(0.0, 0.0); np];
            for j in 0..pts.len() {
                let om: Complex64 = (0..mb).map(|m| weights[m] * c[i][m] * c[j][m]).sum();
                let d = 1.0 - om;
                if d.norm() < 1e-6 {
                    return numerical(format!("double contour nearly singular at nodes {i}, {j}"));
                }
                let inv = 1.0 / d;
                for (p, a) in acc.iter_mut().enumerate() {
                    *a += inv * v[j][p];
                }
            }
            Ok(acc.iter().zip(&v[i]).map(|(a, vi)| a * vi).collect())
        })
        .collect::<Result<_>>()?;
    let norm = (2.0 * std::f64::consts::PI * J).powi(2);
    let mut xi = DMatrix::zeros(mb, mb);
    let mut max_imag = 0.0f64;
    for (p, &(r, k)) in pairs.iter().enumerate() {
        let s: Complex64 = sums.iter().map(|row| row[p]).sum();
        let val = sp.gammas[r] * sp.gammas[k] * s / norm;
        max_imag = max_imag.max(val.im.abs());
        xi[(r, k)] = val.re;
        xi[(k, r)] = val.re;
    }
    Ok(DoubleContour { xi, max_imag })
}

/// The fluctuation covariance built from double-contour weights.
pub fn gamma_double_contour(cfg: &ScenarioConfig, probes: &[f64], kind: Estimator, nodes: usize) -> Result<DMatrix<f64>> {
    let sp = true_spectrum(cfg)?;
    let support = solve_support(&sp, cfg.n)?;
    let dc = xi_double_contour(&sp, &support, cfg.n, kind, nodes)?;
    gamma_matrix(&dc.xi, &probe_projections(&sp, probes, cfg))
}

/// The g-MUSIC sample cost at `theta` as a contour integral of the sample
/// resolvent around the smallest `M - K` sample eigenvalues.
pub fn gmusic_cost_contour(se: &SampleEigen, k: usize, theta: f64, cfg: &ScenarioConfig, nodes: usize) -> Result<f64> {
    let m = se.m();
    if k == 0 || k >= m {
        return Err(Error::InvalidConfig(format!("need 0 < K < M, got K = {k}")));
    }
    let l = &se.lambdas;
    let mu = mu_hat_values(l, se.n)?;
    let split = m - k;
    let lmax = l[m - 1];
    let lo = -0.1 * lmax;
    let hi = 0.5 * (l[split - 1].max(0.0) + mu[split]);
    if !(hi > l[split - 1] && hi < mu[split]) {
        return numerical("sample noise eigenvalues are not separated from the signal ones");
    }
    let e = Ellipse { centre: 0.5 * (lo + hi), a: 0.5 * (hi - lo), b: 0.5 * (hi - lo) };
    let q = se.projections(theta, cfg);
    let nz: Vec<f64> = l.iter().copied().filter(|&x| x > 0.0).collect();
    let nf = se.n as f64;
    let s: Complex64 = e
        .nodes(nodes)
        .into_iter()
        .map(|(z, dz)| {
            let g: Complex64 = nz.iter().map(|&x| x / (x - z)).sum::<Complex64>() / nf;
            let g2: Complex64 = nz.iter().map(|&x| x / ((x - z) * (x - z))).sum::<Complex64>() / nf;
            let wh = z / (1.0 - g);
            let h = 1.0 + wh * g2;
            let res: Complex64 = q.iter().zip(l).map(|(&qm, &x)| qm / (x - z)).sum();
            res * h * dz
        })
        .sum();
    Ok((s / (2.0 * std::f64::consts::PI * J)).re)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ellipse_perimeter_and_orientation() {
        let e = Ellipse { centre: 1.0, a: 2.0, b: 2.0 };
        let pts = e.nodes(512);
        let len: f64 = pts.iter().map(|p| p.1.norm()).sum();
        assert!((len - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        // clockwise: winding of 1/(z - c) integrates to -2 pi j
        let w: Complex64 = pts.iter().map(|&(z, dz)| dz / (z - 1.0)).sum();
        assert!((w + 2.0 * std::f64::consts::PI * J).norm() < 1e-12);
    }

    #[test]
    fn contour_excludes_signal_clusters() {
        let cfg = ScenarioConfig::new(15, 15, vec![45.0, 50.0], 0.0);
        let sp = true_spectrum(&cfg).unwrap();
        let support = solve_support(&sp, 15).unwrap();
        let e = noise_cluster_contour(&support, &sp).unwrap();
        let (x1m, x1p) = support.noise_cluster();
        assert!(e.centre - e.a < x1m.min(0.0) && e.centre + e.a > x1p);
        assert!(e.centre + e.a < support.intervals[1].0);
    }
}
