//! Deterministic equivalents of the MUSIC and g-MUSIC costs and the
//! covariance of their Gaussian fluctuations.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::array_model::{steering_matrix, true_spectrum, ScenarioConfig, TrueSpectrum};
use crate::error::{numerical, Result};
use crate::quad;
use crate::rmt_support::{
    mu_values, omega_on_cluster, psi_unchecked, solve_support, stieltjes_sum, MuSet, SupportProfile,
};

#[derive(Debug, Clone)]
pub struct CostStatistics {
    pub probe_thetas: Vec<f64>,
    pub eta_bar_c: Vec<f64>,
    pub eta_bar_g: Vec<f64>,
    pub gamma_c: DMatrix<f64>,
    pub gamma_g: DMatrix<f64>,
}

pub fn psi_weights(sp: &TrueSpectrum, mus: &MuSet) -> Vec<f64> {
    let g = &sp.gammas;
    let k = &sp.mults;
    let mu1 = mus.mus[0];
    let tail = |m: usize| g[0] / (g[m] - g[0]) - mu1 / (g[m] - mu1);
    let mut out = Vec::with_capacity(g.len());
    out.push(1.0 - (1..g.len()).map(|m| k[m] as f64 * tail(m)).sum::<f64>() / k[0] as f64);
    out.extend((1..g.len()).map(tail));
    out
}

/// `P_r = A^H E_r E_r^H A` over the probe steering vectors.
pub fn probe_projections(sp: &TrueSpectrum, probes: &[f64], cfg: &ScenarioConfig) -> Vec<DMatrix<Complex64>> {
    let a = steering_matrix(probes, cfg);
    sp.bases
        .iter()
        .map(|e| {
            let c = e.adjoint() * &a;
            c.adjoint() * c
        })
        .collect()
}

fn diag_forms(proj: &[DMatrix<Complex64>]) -> Vec<Vec<f64>> {
    proj.iter().map(|p| p.diagonal().iter().map(|z| z.re).collect()).collect()
}

pub fn det_equiv_music(sp: &TrueSpectrum, mus: &MuSet, probes: &[f64], cfg: &ScenarioConfig) -> Vec<f64> {
    let w = psi_weights(sp, mus);
    let d = diag_forms(&probe_projections(sp, probes, cfg));
    (0..probes.len()).map(|l| w.iter().zip(&d).map(|(wm, dm)| wm * dm[l]).sum()).collect()
}

pub fn det_equiv_gmusic(sp: &TrueSpectrum, probes: &[f64], cfg: &ScenarioConfig) -> Vec<f64> {
    diag_forms(&probe_projections(sp, probes, cfg))[0].clone()
}

/// `int f(x, omega(x)) dx` over the noise cluster.
pub fn cluster_integral<F>(f: F, support: &SupportProfile, sp: &TrueSpectrum, n: usize) -> Result<f64>
where
    F: Fn(f64, Complex64) -> f64 + Sync,
{
    support.require_isolated()?;
    let (lo, hi) = support.noise_cluster();
    quad::integrate(lo, hi, quad::DEFAULT_RTOL, |x| Ok(f(x, omega_on_cluster(x, sp, n)?)))
}

/// Both weight matrices from a single pass over the cluster.
pub fn xi_matrices(
    sp: &TrueSpectrum,
    mus: &MuSet,
    support: &SupportProfile,
    n: usize,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    support.require_isolated()?;
    let mb = sp.m_bar();
    let g = &sp.gammas;
    let (lo, hi) = support.noise_cluster();
    let pairs: Vec<(usize, usize)> = (0..mb).flat_map(|r| (r..mb).map(move |k| (r, k))).collect();
    let np = pairs.len();
    let ints = quad::integrate_vec(lo, hi, 2 * np, quad::DEFAULT_RTOL, |x| {
        let w = omega_on_cluster(x, sp, n)?;
        let inv_c: Vec<f64> = g.iter().map(|&gm| 1.0 / (gm - w).norm_sqr()).collect();
        let a = 1.0 / (1.0 - stieltjes_sum(w, sp, n)).norm_sqr();
        let b = 1.0 / (1.0 - psi_unchecked(w, sp, n)).norm_sqr();
        let mut out = Vec::with_capacity(2 * np);
        for &(r, k) in &pairs {
            out.push(g[r] * g[k] * a * w.im * inv_c[r] * inv_c[k]);
        }
        for &(r, k) in &pairs {
            out.push(g[r] * g[k] * b * w.im * inv_c[r] * inv_c[k]);
        }
        Ok(out)
    })?;

    let nf = n as f64;
    let m = sp.dim() as f64;
    let kk = &sp.mults;
    let k1 = kk[0] as f64;
    let g1 = g[0];
    let mu1 = mus.mus[0];
    let s = k1 * g1 / nf;
    let sum_tail = |f: &dyn Fn(usize) -> f64| (1..mb).map(|j| kk[j] as f64 * f(j)).sum::<f64>() / nf;
    let a1 = 1.0 - sum_tail(&|j| g[j] / (g[j] - g1));
    let b1 = 1.0 - sum_tail(&|j| g[j] * g[j] / ((g[j] - g1) * (g[j] - g1)));
    let c1 = 1.0 - sum_tail(&|j| g[j] * g[j] / ((g[j] - g1) * (g[j] - mu1)));
    let d = 1.0 - (0..mb).map(|j| kk[j] as f64 * g[j] * g[j] / (g[j] - mu1).powi(2)).sum::<f64>() / nf;
    let inv_stieltjes_mu = (0..mb).map(|j| kk[j] as f64 / (g[j] - mu1)).sum::<f64>() / nf;

    let two_pi = 2.0 / std::f64::consts::PI;
    let mut xc = DMatrix::zeros(mb, mb);
    let mut xg = DMatrix::zeros(mb, mb);
    for (i, &(r, k)) in pairs.iter().enumerate() {
        let mut v = 0.0;
        if r == 0 && k == 0 {
            v += (-(nf / k1) * a1 * a1 - b1 + 2.0 * mu1 / g1 * c1 + 2.0 * mu1 / (g1 - mu1) * a1) / (s * s);
        } else if r == 0 || k == 0 {
            let o = r.max(k);
            v += -(nf / k1) / (g[o] - g1).powi(2)
                + 2.0 * (nf / k1) * mu1 / ((g[o] - g1) * g1 * (g[o] - mu1));
        }
        if mu1 != 0.0 {
            v += mu1 * mu1 / ((g[r] - mu1).powi(2) * (g[k] - mu1).powi(2)) / d;
        }
        if m > nf {
            let pr = mu1 / ((g[r] - mu1) * (g[k] - mu1)) / (g[r] * g[k]);
            v += -pr / inv_stieltjes_mu - pr * mu1 * nf / (nf - m);
        }
        let c = two_pi * ints[i] + g[r] * g[k] * v;
        let gg = two_pi * ints[np + i] - if r == 0 && k == 0 { nf / k1 } else { 0.0 };
        xc[(r, k)] = c;
        xc[(k, r)] = c;
        xg[(r, k)] = gg;
        xg[(k, r)] = gg;
    }
    Ok((xc, xg))
}

pub fn xi_c(r: usize, k: usize, sp: &TrueSpectrum, mus: &MuSet, support: &SupportProfile, n: usize) -> Result<f64> {
    Ok(xi_matrices(sp, mus, support, n)?.0[(r, k)])
}

pub fn xi_g(r: usize, k: usize, sp: &TrueSpectrum, support: &SupportProfile, n: usize) -> Result<f64> {
    let mus = mu_values(sp, n)?;
    Ok(xi_matrices(sp, &mus, support, n)?.1[(r, k)])
}

/// `sum_{r,k} xi(r,k) P_r (.) P_k^T`
pub fn gamma_matrix(xis: &DMatrix<f64>, proj: &[DMatrix<Complex64>]) -> Result<DMatrix<f64>> {
    let l = proj[0].nrows();
    let mut g = DMatrix::<Complex64>::zeros(l, l);
    for (r, pr) in proj.iter().enumerate() {
        for (k, pk) in proj.iter().enumerate() {
            let x = xis[(r, k)];
            if x == 0.0 {
                continue;
            }
            for p in 0..l {
                for q in 0..l {
                    g[(p, q)] += pr[(p, q)] * pk[(q, p)] * x;
                }
            }
        }
    }
    let re_max = g.iter().fold(0.0f64, |m, z| m.max(z.re.abs()));
    let im_max = g.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    if im_max > 1e-8 * re_max.max(f64::MIN_POSITIVE) {
        return numerical(format!("covariance has imaginary residue {im_max:e} (scale {re_max:e})"));
    }
    let re = g.map(|z| z.re);
    Ok((&re + re.transpose()) * 0.5)
}

/// Everything the resolution predictor needs at the given probe angles.
pub fn cost_statistics(cfg: &ScenarioConfig, probes: &[f64]) -> Result<CostStatistics> {
    let sp = true_spectrum(cfg)?;
    let support = solve_support(&sp, cfg.n)?;
    support.require_isolated()?;
    let mus = mu_values(&sp, cfg.n)?;
    let proj = probe_projections(&sp, probes, cfg);
    let (xc, xg) = xi_matrices(&sp, &mus, &support, cfg.n)?;
    let d = diag_forms(&proj);
    let w = psi_weights(&sp, &mus);
    let eta_bar_c = (0..probes.len()).map(|l| w.iter().zip(&d).map(|(wm, dm)| wm * dm[l]).sum()).collect();
    Ok(CostStatistics {
        probe_thetas: probes.to_vec(),
        eta_bar_c,
        eta_bar_g: d[0].clone(),
        gamma_c: gamma_matrix(&xc, &proj)?,
        gamma_g: gamma_matrix(&xg, &proj)?,
    })
}
