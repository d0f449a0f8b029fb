//! Asymptotic support of the sample eigenvalues and the functions `psi`,
//! `z(omega)` and `omega(z)` built from a discrete population spectrum.
//!
//! Internally everything is evaluated on the spectrum scaled by its largest
//! eigenvalue; `psi` is scale invariant and `z`, `omega` scale linearly.

use num_complex::{Complex64, ComplexFloat};

use crate::array_model::TrueSpectrum;
use crate::error::{numerical, Error, Result};
use crate::poly;

const POLE_TOL: f64 = 1e-12;
const RESIDUAL_TOL: f64 = 1e-8;
const SEPARATION_RTOL: f64 = 1e-6;

fn lift<T: From<f64>>(x: f64) -> T {
    x.into()
}

fn check_poles<T>(omega: T, sp: &TrueSpectrum) -> Result<()>
where
    T: ComplexFloat<Real = f64> + From<f64>,
{
    let gmax = sp.gamma_max();
    for &g in &sp.gammas {
        if (lift::<T>(g) - omega).abs() < POLE_TOL * gmax {
            return Err(Error::Singular(format!("omega too close to eigenvalue {g:e}")));
        }
    }
    Ok(())
}

/// `(1/N) sum_m K_m gamma_m^2 / (gamma_m - omega)^2`
pub fn psi<T>(omega: T, sp: &TrueSpectrum, n: usize) -> Result<T>
where
    T: ComplexFloat<Real = f64> + From<f64>,
{
    check_poles(omega, sp)?;
    Ok(psi_unchecked(omega, sp, n))
}

pub(crate) fn psi_unchecked<T>(omega: T, sp: &TrueSpectrum, n: usize) -> T
where
    T: ComplexFloat<Real = f64> + From<f64>,
{
    let mut s = lift::<T>(0.0);
    for (&g, &k) in sp.gammas.iter().zip(&sp.mults) {
        let d = lift::<T>(g) - omega;
        s = s + lift::<T>(k as f64 * g * g) / (d * d);
    }
    s / lift::<T>(n as f64)
}

/// `(1/N) sum_m K_m gamma_m / (gamma_m - omega)`
pub(crate) fn stieltjes_sum<T>(omega: T, sp: &TrueSpectrum, n: usize) -> T
where
    T: ComplexFloat<Real = f64> + From<f64>,
{
    let mut s = lift::<T>(0.0);
    for (&g, &k) in sp.gammas.iter().zip(&sp.mults) {
        s = s + lift::<T>(k as f64 * g) / (lift::<T>(g) - omega);
    }
    s / lift::<T>(n as f64)
}

/// `z(omega)` together with its derivative `1 - psi(omega)`.
pub fn z_of_omega<T>(omega: T, sp: &TrueSpectrum, n: usize) -> Result<(T, T)>
where
    T: ComplexFloat<Real = f64> + From<f64>,
{
    check_poles(omega, sp)?;
    let z = omega * (lift::<T>(1.0) - stieltjes_sum(omega, sp, n));
    Ok((z, lift::<T>(1.0) - psi_unchecked(omega, sp, n)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportProfile {
    pub intervals: Vec<(f64, f64)>,
    pub omega_roots: Vec<(f64, f64)>,
    pub includes_zero: bool,
    pub cluster_of_eigenvalue: Vec<usize>,
    pub noise_cluster_isolated: bool,
}

impl SupportProfile {
    pub fn noise_cluster(&self) -> (f64, f64) {
        self.intervals[0]
    }

    /// Midpoint of the gap between the noise cluster and the next one.
    pub fn gap_midpoint(&self) -> Option<f64> {
        (self.intervals.len() >= 2).then(|| 0.5 * (self.intervals[0].1 + self.intervals[1].0))
    }

    pub fn require_isolated(&self) -> Result<()> {
        if self.noise_cluster_isolated {
            Ok(())
        } else {
            Err(Error::NotSeparable(
                "the noise eigenvalue cluster is not isolated from the signal clusters".into(),
            ))
        }
    }
}

fn scaled(sp: &TrueSpectrum) -> TrueSpectrum {
    let gmax = sp.gamma_max();
    TrueSpectrum {
        gammas: sp.gammas.iter().map(|g| g / gmax).collect(),
        mults: sp.mults.clone(),
        bases: Vec::new(),
    }
}

/// Which gap between consecutive poles holds `x`: 0 is left of `gamma_1`,
/// `gammas.len()` is right of the largest.
fn pole_interval(x: f64, gammas: &[f64]) -> usize {
    gammas.iter().take_while(|&&g| g < x).count()
}

pub fn solve_support(sp: &TrueSpectrum, n: usize) -> Result<SupportProfile> {
    let s = scaled(sp);
    let gmax = sp.gamma_max();
    let mb = s.m_bar();
    let nf = n as f64;

    // N prod (g - w)^2 - sum_m K_m g_m^2 prod_{s != m} (g_s - w)^2
    let sq: Vec<Vec<f64>> = s.gammas.iter().map(|&g| poly::from_roots(&[g, g])).collect();
    let mut full = vec![1.0];
    for q in &sq {
        full = poly::mul(&full, q);
    }
    let mut p = poly::scale(&full, nf);
    for m in 0..mb {
        let mut term = vec![s.mults[m] as f64 * s.gammas[m] * s.gammas[m]];
        for (j, q) in sq.iter().enumerate() {
            if j != m {
                term = poly::mul(&term, q);
            }
        }
        p = poly::add(&p, &poly::scale(&term, -1.0));
    }

    let f = |w: f64| {
        let mut v = 0.0;
        let mut dv = 0.0;
        for (&g, &k) in s.gammas.iter().zip(&s.mults) {
            let d = g - w;
            v += k as f64 * g * g / (d * d);
            dv += 2.0 * k as f64 * g * g / (d * d * d);
        }
        (v / nf - 1.0, dv / nf)
    };

    let mut per_interval: Vec<Vec<f64>> = vec![Vec::new(); mb + 1];
    for r in poly::roots_real_coeffs(&p)? {
        if r.im.abs() > 1e-4 * (1.0 + r.re.abs()) {
            continue;
        }
        let iv = pole_interval(r.re, &s.gammas);
        let lo = if iv == 0 { f64::NEG_INFINITY } else { s.gammas[iv - 1] };
        let hi = if iv == mb { f64::INFINITY } else { s.gammas[iv] };
        let mut w = r.re;
        for _ in 0..60 {
            let (v, dv) = f(w);
            if v == 0.0 || dv == 0.0 {
                break;
            }
            let next = w - v / dv;
            if !(next > lo && next < hi) {
                break;
            }
            let done = (next - w).abs() <= 1e-15 * w.abs().max(1e-300);
            w = next;
            if done {
                break;
            }
        }
        if f(w).0.abs() < RESIDUAL_TOL
            && !per_interval[iv].iter().any(|&u| (u - w).abs() <= 1e-11 * (1.0 + w.abs()))
        {
            per_interval[iv].push(w);
        }
    }

    let mut roots = Vec::new();
    for (iv, mut rs) in per_interval.into_iter().enumerate() {
        rs.sort_by(f64::total_cmp);
        let outer = iv == 0 || iv == mb;
        match (outer, rs.len()) {
            (true, 1) | (false, 2) | (false, 0) => roots.extend(rs),
            // a tangent double root: the two clusters touch
            (false, 1) => {}
            (_, c) => {
                return numerical(format!(
                    "support equation: {c} real roots between poles {iv} and {}",
                    iv + 1
                ))
            }
        }
    }
    if roots.len() % 2 != 0 {
        return numerical(format!("support equation has an odd number ({}) of real roots", roots.len()));
    }

    let n_clusters = roots.len() / 2;
    let mut omega_roots = Vec::with_capacity(n_clusters);
    let mut intervals = Vec::with_capacity(n_clusters);
    for c in 0..n_clusters {
        let (a, b) = (roots[2 * c], roots[2 * c + 1]);
        omega_roots.push((a * gmax, b * gmax));
        let za = z_of_omega(a, &s, n)?.0 * gmax;
        let zb = z_of_omega(b, &s, n)?.0 * gmax;
        intervals.push((za, zb));
    }
    let mut cluster_of_eigenvalue = Vec::with_capacity(mb);
    for &g in &s.gammas {
        let c = (0..n_clusters).find(|&c| roots[2 * c] < g && g < roots[2 * c + 1]);
        match c {
            Some(c) => cluster_of_eigenvalue.push(c),
            None => return numerical(format!("eigenvalue {:e} not inside any cluster", g * gmax)),
        }
    }

    let noise_cluster_isolated = if mb == 1 {
        true
    } else {
        let only_noise = cluster_of_eigenvalue.iter().filter(|&&c| c == 0).count() == 1;
        only_noise
            && n_clusters >= 2
            && (intervals[1].0 - intervals[0].1) > SEPARATION_RTOL * intervals[1].0.abs()
    };

    Ok(SupportProfile {
        intervals,
        omega_roots,
        includes_zero: sp.dim() > n,
        cluster_of_eigenvalue,
        noise_cluster_isolated,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MuSet {
    pub mus: Vec<f64>,
}

/// Roots of `(1/N) sum_r K_r gamma_r / (gamma_r - mu) = 1`, one per pole.
pub fn mu_values(sp: &TrueSpectrum, n: usize) -> Result<MuSet> {
    let nf = n as f64;
    let m = sp.dim();
    let gmax = sp.gamma_max();
    let f = |mu: f64| {
        let mut v = 0.0;
        let mut dv = 0.0;
        for (&g, &k) in sp.gammas.iter().zip(&sp.mults) {
            let d = g - mu;
            v += k as f64 * g / d;
            dv += k as f64 * g / (d * d);
        }
        (v / nf - 1.0, dv / nf)
    };
    let eps = 1e-14;
    let mut mus = Vec::with_capacity(sp.m_bar());
    for (r, &g) in sp.gammas.iter().enumerate() {
        let hi = g - eps * g;
        let mu = if r == 0 {
            if m == n {
                0.0
            } else {
                let lo = g - gmax * (1.0 + 2.0 * m as f64 / nf);
                poly::bracketed_root(f, lo, hi, 1e-15)?
            }
        } else {
            let prev = sp.gammas[r - 1];
            poly::bracketed_root(f, prev + eps * prev, hi, 1e-15)?
        };
        mus.push(mu);
    }
    Ok(MuSet { mus })
}

fn omega_polynomial(z: Complex64, s: &TrueSpectrum, n: usize) -> Vec<Complex64> {
    // z prod (g - w) - w [prod (g - w) - (1/N) sum_r K_r g_r prod_{s != r} (g_s - w)]
    let full = poly::from_roots(&s.gammas);
    let mut q = vec![0.0];
    for r in 0..s.m_bar() {
        let others: Vec<f64> = s.gammas.iter().enumerate().filter(|(j, _)| *j != r).map(|(_, &g)| g).collect();
        let term = poly::scale(&poly::from_roots(&others), s.mults[r] as f64 * s.gammas[r] / n as f64);
        q = poly::add(&q, &term);
    }
    let w_part = poly::shift(&poly::add(&full, &poly::scale(&q, -1.0)));
    let len = full.len().max(w_part.len());
    (0..len)
        .map(|i| {
            let a = full.get(i).copied().unwrap_or(0.0);
            let b = w_part.get(i).copied().unwrap_or(0.0);
            z * a - b
        })
        .collect()
}

fn polish_omega(mut w: Complex64, z: Complex64, s: &TrueSpectrum, n: usize) -> Complex64 {
    let resid = |w: Complex64| w * (1.0 - stieltjes_sum(w, s, n)) - z;
    let mut r = resid(w);
    for _ in 0..4 {
        let d = 1.0 - psi_unchecked(w, s, n);
        if d.norm() < 1e-8 {
            break;
        }
        let next = w - r / d;
        let rn = resid(next);
        if !(rn.norm() < r.norm()) {
            break;
        }
        w = next;
        r = rn;
    }
    w
}

/// `omega(z)` off the support together with `omega'(z) = 1 / (1 - psi(omega))`.
pub fn omega_of_z(z: Complex64, sp: &TrueSpectrum, n: usize) -> Result<(Complex64, Complex64)> {
    let s = scaled(sp);
    let gmax = sp.gamma_max();
    let zs = z / gmax;
    let roots = poly::roots(&omega_polynomial(zs, &s, n))?;
    let w = if zs.im.abs() > 1e-13 * (1.0 + zs.norm()) {
        let sign = zs.im.signum();
        let best = roots
            .iter()
            .copied()
            .max_by(|a, b| (a.im * sign).total_cmp(&(b.im * sign)))
            .ok_or_else(|| Error::Numerical("no omega root".into()))?;
        if best.im * sign <= 0.0 {
            return numerical(format!("no omega root in the half plane of z = {z}"));
        }
        polish_omega(best, zs, &s, n)
    } else {
        let mut best: Option<(f64, f64)> = None;
        for r in &roots {
            if r.im.abs() > 1e-7 * (1.0 + r.re.abs()) {
                continue;
            }
            let w = r.re;
            if s.gammas.iter().any(|&g| (g - w).abs() < POLE_TOL) {
                continue;
            }
            let ps: f64 = psi_unchecked(w, &s, n);
            if ps <= 1.0 + 1e-9 && best.is_none_or(|(_, b)| ps < b) {
                best = Some((w, ps));
            }
        }
        match best {
            Some((w, _)) => {
                let p = polish_omega(Complex64::new(w, 0.0), Complex64::new(zs.re, 0.0), &s, n);
                Complex64::new(p.re, 0.0)
            }
            None => {
                return Err(Error::InvalidConfig(format!(
                    "real z = {} lies inside the support",
                    z.re
                )))
            }
        }
    };
    let dw = 1.0 / (1.0 - psi_unchecked(w, &s, n));
    Ok((w * gmax, dw))
}

/// The root `omega(x)` with nonnegative imaginary part for `x` on the noise
/// cluster.
pub fn omega_on_cluster(x: f64, sp: &TrueSpectrum, n: usize) -> Result<Complex64> {
    let s = scaled(sp);
    let gmax = sp.gamma_max();
    let zs = Complex64::new(x / gmax, 0.0);
    let roots = poly::roots(&omega_polynomial(zs, &s, n))?;
    let best = roots
        .iter()
        .copied()
        .max_by(|a, b| a.im.total_cmp(&b.im))
        .ok_or_else(|| Error::Numerical("no omega root".into()))?;
    let w = if best.im > 1e-9 { polish_omega(best, zs, &s, n) } else { best };
    Ok(Complex64::new(w.re, w.im.max(0.0)) * gmax)
}

/// `omega_on_cluster` along an ordered grid, rejecting discontinuous jumps.
pub fn omega_on_cluster_grid(xs: &[f64], sp: &TrueSpectrum, n: usize) -> Result<Vec<Complex64>> {
    let mut out: Vec<Complex64> = Vec::with_capacity(xs.len());
    let width = xs.last().zip(xs.first()).map(|(a, b)| (a - b).abs()).unwrap_or(0.0);
    for (i, &x) in xs.iter().enumerate() {
        let w = omega_on_cluster(x, sp, n)?;
        if i > 0 {
            let step = (xs[i] - xs[i - 1]).abs();
            let jump = (w - out[i - 1]).norm();
            // omega(x) is Hoelder-1/2 at the edges and smooth inside
            if jump > 4.0 * (step * width).sqrt() + 20.0 * step {
                return numerical(format!("omega(x) jumped by {jump:e} at x = {x:e}"));
            }
        }
        out.push(w);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array_model::{true_spectrum, ScenarioConfig};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn mp(m: usize, sigma2: f64) -> TrueSpectrum {
        TrueSpectrum::from_atoms(vec![sigma2], vec![m])
    }

    fn three_atom(g: [f64; 3], k: [usize; 3]) -> TrueSpectrum {
        TrueSpectrum::from_atoms(g.to_vec(), k.to_vec())
    }

    fn scenario(n: usize, snr: f64, rho: f64) -> TrueSpectrum {
        true_spectrum(&ScenarioConfig::new(15, n, vec![45.0, 50.0], snr).with_rho(rho)).unwrap()
    }

    fn isolated(n: usize, snr: f64, rho: f64) -> bool {
        solve_support(&scenario(n, snr, rho), n).unwrap().noise_cluster_isolated
    }

    #[test]
    fn psi_single_atom() {
        let sp = mp(10, 1.0);
        assert_relative_eq!(psi(0.0, &sp, 20).unwrap(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(psi(3.0, &sp, 20).unwrap(), 0.5 / 4.0, epsilon = 1e-15);
        assert!(psi(1e9, &sp, 20).unwrap() < 1e-15);
        assert!(psi(-1e9, &sp, 20).unwrap() < 1e-15);
        assert!(matches!(psi(1.0, &sp, 20), Err(Error::Singular(_))));
    }

    #[test]
    fn psi_matches_compensated_sum() {
        let sp = three_atom([0.3, 1.7, 9.1], [5, 2, 1]);
        let w = Complex64::new(0.9, 0.4);
        let got = psi(w, &sp, 13).unwrap();
        // pairwise terms accumulated with Kahan compensation
        let mut sum = Complex64::new(0.0, 0.0);
        let mut comp = Complex64::new(0.0, 0.0);
        for (&g, &k) in sp.gammas.iter().zip(&sp.mults) {
            for _ in 0..k {
                let t = g * g / ((g - w) * (g - w)) / 13.0 - comp;
                let nxt = sum + t;
                comp = (nxt - sum) - t;
                sum = nxt;
            }
        }
        assert!((got - sum).norm() < 1e-14);
    }

    #[test]
    fn z_fixed_point_and_mp_edge() {
        let sp = mp(6, 1.0);
        let (z0, _) = z_of_omega(Complex64::new(0.0, 0.0), &sp, 24).unwrap();
        assert_eq!(z0, Complex64::new(0.0, 0.0));
        let c: f64 = 6.0 / 24.0;
        let w = 1.0 - c.sqrt();
        let (z, dz) = z_of_omega(w, &sp, 24).unwrap();
        assert_relative_eq!(z, (1.0 - c.sqrt()).powi(2), epsilon = 1e-14);
        assert!(dz.abs() < 1e-14);
        let u = Complex64::new(0.3, 0.7);
        let a = z_of_omega(u, &sp, 24).unwrap().0;
        let b = z_of_omega(u.conj(), &sp, 24).unwrap().0;
        assert!((a.conj() - b).norm() < 1e-15);
    }

    #[test]
    fn mp_edges() {
        for &(m, n, s2) in &[(10usize, 10usize, 1.0), (5, 20, 2.0), (30, 12, 0.5), (15, 100, 3.0)] {
            let sp = mp(m, s2);
            let prof = solve_support(&sp, n).unwrap();
            let c = m as f64 / n as f64;
            assert_eq!(prof.intervals.len(), 1);
            let (lo, hi) = prof.intervals[0];
            let elo = s2 * (1.0 - c.sqrt()).powi(2);
            let ehi = s2 * (1.0 + c.sqrt()).powi(2);
            assert!((lo - elo).abs() <= 1e-10 * ehi, "{lo} vs {elo}");
            assert!((hi - ehi).abs() <= 1e-10 * ehi, "{hi} vs {ehi}");
            assert_eq!(prof.includes_zero, m > n);
        }
    }

    #[test]
    fn boundaries_n15() {
        assert!(isolated(15, -1.0, 0.0));
        assert!(!isolated(15, -2.0, 0.0));
        assert!(isolated(15, 10.0, 0.95));
        assert!(!isolated(15, 9.0, 0.95));
    }

    #[test]
    fn boundaries_n100() {
        assert!(isolated(100, -7.0, 0.0));
        assert!(!isolated(100, -8.0, 0.0));
        assert!(isolated(100, 4.0, 0.95));
        assert!(!isolated(100, 3.0, 0.95));
    }

    #[test]
    fn mu_single_atom() {
        let mu = mu_values(&mp(5, 2.0), 20).unwrap();
        assert_relative_eq!(mu.mus[0], 2.0 * (1.0 - 0.25), epsilon = 1e-14);
        let mu = mu_values(&mp(30, 2.0), 20).unwrap();
        assert_relative_eq!(mu.mus[0], 2.0 * (1.0 - 1.5), epsilon = 1e-14);
    }

    #[test]
    fn mu_is_zero_when_square() {
        let mu = mu_values(&scenario(15, 3.0, 0.0), 15).unwrap();
        assert_eq!(mu.mus[0], 0.0);
    }

    #[test]
    fn mu_matches_companion_roots() {
        let sp = three_atom([0.4, 2.5, 7.0], [6, 3, 2]);
        let n = 17;
        let mu = mu_values(&sp, n).unwrap();
        // prod (g - x) - (1/N) sum_r K_r g_r prod_{s != r} (g_s - x)
        let mut p = poly::from_roots(&sp.gammas);
        for r in 0..3 {
            let others: Vec<f64> = (0..3).filter(|&j| j != r).map(|j| sp.gammas[j]).collect();
            let t = poly::scale(&poly::from_roots(&others), sp.mults[r] as f64 * sp.gammas[r] / n as f64);
            p = poly::add(&p, &poly::scale(&t, -1.0));
        }
        let mut rs: Vec<f64> = poly::roots_real_coeffs(&p).unwrap().iter().map(|z| z.re).collect();
        rs.sort_by(f64::total_cmp);
        for (a, b) in mu.mus.iter().zip(&rs) {
            assert!((a - b).abs() < 1e-10 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn omega_mp_quadratic() {
        let (m, n) = (8usize, 20usize);
        let c = m as f64 / n as f64;
        let sp = mp(m, 1.0);
        for &z in &[Complex64::new(0.7, 0.3), Complex64::new(3.0, 1.0), Complex64::new(-0.5, 0.2)] {
            let (w, _) = omega_of_z(z, &sp, n).unwrap();
            let b = 1.0 + z - c;
            let disc = (b * b - 4.0 * z).sqrt();
            let r1 = 0.5 * (b + disc);
            let r2 = 0.5 * (b - disc);
            let expect = if r1.im > 0.0 { r1 } else { r2 };
            assert!((w - expect).norm() < 1e-10, "{w} vs {expect}");
        }
        let prof = solve_support(&sp, n).unwrap();
        let (lo, hi) = prof.noise_cluster();
        for i in 1..20 {
            let x = lo + (hi - lo) * i as f64 / 20.0;
            let w = omega_on_cluster(x, &sp, n).unwrap();
            let b = 1.0 + x - c;
            let im = 0.5 * (4.0 * x - b * b).sqrt();
            assert!((w.re - 0.5 * b).abs() < 1e-10);
            assert!((w.im - im).abs() < 1e-10);
        }
    }

    #[test]
    fn omega_cluster_identity_and_edges() {
        let sp = scenario(15, 0.0, 0.0);
        let n = 15;
        let prof = solve_support(&sp, n).unwrap();
        let (lo, hi) = prof.noise_cluster();
        let xs: Vec<f64> = (1..=100).map(|i| lo + (hi - lo) * i as f64 / 101.0).collect();
        let ws = omega_on_cluster_grid(&xs, &sp, n).unwrap();
        for w in &ws {
            assert!(w.im > 0.0);
            let id: f64 = sp
                .gammas
                .iter()
                .zip(&sp.mults)
                .map(|(&g, &k)| k as f64 * g * g / (g - w).norm_sqr())
                .sum::<f64>()
                / n as f64;
            assert!((id - 1.0).abs() < 1e-8, "identity {id}");
        }
        assert!(omega_on_cluster(lo, &sp, n).unwrap().im < 1e-6 * sp.gamma_max());
        assert!(omega_on_cluster(hi, &sp, n).unwrap().im < 1e-6 * sp.gamma_max());
    }

    #[test]
    fn real_z_inside_support_rejected() {
        let sp = mp(8, 1.0);
        assert!(omega_of_z(Complex64::new(1.0, 0.0), &sp, 20).is_err());
        let (w, _) = omega_of_z(Complex64::new(5.0, 0.0), &sp, 20).unwrap();
        assert!(psi(w.re, &sp, 20).unwrap() <= 1.0);
    }

    #[test]
    fn contour_image_winds_once_around_noise_eigenvalue() {
        let sp = scenario(100, 0.0, 0.0);
        let n = 100;
        let prof = solve_support(&sp, n).unwrap();
        let (lo, hi) = prof.noise_cluster();
        let right = prof.gap_midpoint().unwrap();
        let left = lo - 0.05 * sp.gamma_max();
        let h = 0.5 * (hi - lo);
        let pts = 2000;
        let mut ws = Vec::with_capacity(pts);
        for i in 0..pts {
            let t = 2.0 * std::f64::consts::PI * i as f64 / pts as f64;
            let z = Complex64::new(0.5 * (left + right) + 0.5 * (right - left) * t.cos(), h * t.sin());
            ws.push(omega_of_z(z, &sp, n).unwrap().0);
        }
        for (m, &g) in sp.gammas.iter().enumerate() {
            let mut wind = 0.0;
            for i in 0..pts {
                let a = ws[i] - g;
                let b = ws[(i + 1) % pts] - g;
                wind += (b / a).arg();
            }
            let turns = (wind / (2.0 * std::f64::consts::PI)).round() as i64;
            assert_eq!(turns, if m == 0 { 1 } else { 0 });
        }
    }

    #[test]
    fn clusters_never_appear_when_n_shrinks() {
        let sp = scenario(100, 5.0, 0.0);
        let mut prev = usize::MAX;
        for n in (2..=400).rev().step_by(7) {
            let s = solve_support(&sp, n).unwrap().intervals.len();
            assert!(s <= prev, "S grew from {prev} to {s} at N = {n}");
            prev = s;
        }
    }

    fn arb_spectrum() -> impl Strategy<Value = (TrueSpectrum, usize)> {
        (
            0.05f64..2.0,
            1.05f64..8.0,
            1.05f64..8.0,
            1usize..12,
            1usize..4,
            1usize..4,
            2usize..200,
        )
            .prop_map(|(g1, r2, r3, k1, k2, k3, n)| {
                let g2 = g1 * r2;
                let g3 = g2 * r3;
                (three_atom([g1, g2, g3], [k1, k2, k3]), n)
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn mu_interlacing((sp, n) in arb_spectrum()) {
            let mu = mu_values(&sp, n).unwrap();
            let m = sp.dim();
            for (r, &g) in sp.gammas.iter().enumerate() {
                prop_assert!(mu.mus[r] < g);
                if r > 0 {
                    prop_assert!(mu.mus[r] > sp.gammas[r - 1]);
                }
            }
            match m.cmp(&n) {
                std::cmp::Ordering::Less => prop_assert!(mu.mus[0] > 0.0),
                std::cmp::Ordering::Equal => prop_assert_eq!(mu.mus[0], 0.0),
                std::cmp::Ordering::Greater => prop_assert!(mu.mus[0] < 0.0),
            }
        }

        #[test]
        fn support_invariants((sp, n) in arb_spectrum()) {
            let prof = solve_support(&sp, n).unwrap();
            for (c, &(a, b)) in prof.omega_roots.iter().enumerate() {
                prop_assert!(a < b);
                prop_assert!((psi(a, &sp, n).unwrap() - 1.0).abs() < 1e-8);
                prop_assert!((psi(b, &sp, n).unwrap() - 1.0).abs() < 1e-8);
                if c + 1 < prof.intervals.len() {
                    prop_assert!(prof.intervals[c].1 < prof.intervals[c + 1].0);
                }
            }
            prop_assert_eq!(prof.cluster_of_eigenvalue.len(), sp.m_bar());
        }

        #[test]
        fn psi_convex_between_poles((sp, n) in arb_spectrum(), t in 0.01f64..0.99) {
            for w in sp.gammas.windows(2) {
                let x = w[0] + t * (w[1] - w[0]);
                let h = 1e-4 * (w[1] - w[0]);
                let f = |x: f64| psi(x, &sp, n).unwrap();
                prop_assert!(f(x - h) + f(x + h) - 2.0 * f(x) > 0.0);
            }
        }

        #[test]
        fn omega_round_trip((sp, n) in arb_spectrum(), re in -1.0f64..3.0, im in 0.05f64..2.0) {
            let z = Complex64::new(re * sp.gamma_max(), im * sp.gamma_max());
            let (w, _) = omega_of_z(z, &sp, n).unwrap();
            let (back, _) = z_of_omega(w, &sp, n).unwrap();
            prop_assert!((back - z).norm() < 1e-10 * z.norm().max(1.0));
            let (wc, _) = omega_of_z(z.conj(), &sp, n).unwrap();
            prop_assert!((wc - w.conj()).norm() < 1e-10 * w.norm().max(1.0));
        }
    }
}
