//! Monte-Carlo validation with reproducible per-trial random streams.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::array_model::{source_covariance, steering_matrix, ScenarioConfig};
use crate::asymptotics::cost_statistics;
use crate::error::{Error, Result};
use crate::estimators::{gmusic_cost, gmusic_weights, music_cost, resolution_statistic, sample_covariance};
use crate::resolution::{Estimator, ResolutionQuery};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialPlan {
    pub n_trials: usize,
    pub seed: u64,
    pub parallel_chunks: usize,
}

impl TrialPlan {
    pub fn new(n_trials: usize, seed: u64) -> Self {
        TrialPlan { n_trials, seed, parallel_chunks: rayon::current_num_threads().max(1) * 4 }
    }
}

/// Trial `t` draws from stream `t` of the generator keyed by `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// `Y = A L S + sigma W` with `L L^T = R_s` and i.i.d. CN(0, 1) `S`, `W`.
#[derive(Debug, Clone)]
pub struct SnapshotGenerator {
    mixing: DMatrix<Complex64>,
    sigma: f64,
    m: usize,
    n: usize,
}

fn psd_factor(rs: &DMatrix<f64>) -> DMatrix<f64> {
    if let Some(ch) = Cholesky::new(rs.clone()) {
        return ch.l();
    }
    let eig = SymmetricEigen::new(rs.clone());
    let d = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&d)
}

impl SnapshotGenerator {
    pub fn new(cfg: &ScenarioConfig) -> Result<Self> {
        if cfg.sigma2 < 0.0 || cfg.m == 0 || cfg.n == 0 {
            return Err(Error::InvalidConfig("invalid snapshot scenario".into()));
        }
        let a = steering_matrix(&cfg.thetas, cfg);
        let l = psd_factor(&source_covariance(cfg)).map(|x| Complex64::new(x, 0.0));
        Ok(SnapshotGenerator { mixing: a * l, sigma: cfg.sigma2.sqrt(), m: cfg.m, n: cfg.n })
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> DMatrix<Complex64> {
        let k = self.mixing.ncols();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let cn = |r: &mut R| {
            let re: f64 = r.sample(StandardNormal);
            let im: f64 = r.sample(StandardNormal);
            Complex64::new(re * s, im * s)
        };
        let src = DMatrix::from_fn(k, self.n, |_, _| cn(rng));
        let noise = DMatrix::from_fn(self.m, self.n, |_, _| cn(rng));
        &self.mixing * src + noise * Complex64::new(self.sigma, 0.0)
    }
}

pub fn generate_snapshots<R: Rng>(cfg: &ScenarioConfig, rng: &mut R) -> Result<DMatrix<Complex64>> {
    Ok(SnapshotGenerator::new(cfg)?.sample(rng))
}

/// Cost vectors of both estimators at the probe angles for one trial.
pub fn trial_costs(
    gen: &SnapshotGenerator,
    cfg: &ScenarioConfig,
    probes: &[f64; 3],
    seed: u64,
    t: u64,
) -> Result<([f64; 3], [f64; 3])> {
    let mut rng = trial_rng(seed, t);
    let se = sample_covariance(&gen.sample(&mut rng));
    let k = cfg.k();
    let c = music_cost(&se, k, probes, cfg);
    let w = gmusic_weights(&se, k, cfg.n)?;
    let g = gmusic_cost(&se, &w, probes, cfg);
    Ok(([c[0], c[1], c[2]], [g[0], g[1], g[2]]))
}

fn run_trials<T, F>(plan: &TrialPlan, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    let chunks = plan.parallel_chunks.max(1);
    let size = plan.n_trials.div_ceil(chunks).max(1);
    let ranges: Vec<(usize, usize)> = (0..plan.n_trials)
        .step_by(size)
        .map(|s| (s, (s + size).min(plan.n_trials)))
        .collect();
    let parts: Result<Vec<Vec<T>>> = ranges
        .into_par_iter()
        .map(|(a, b)| (a..b).map(|t| f(t as u64)).collect())
        .collect();
    Ok(parts?.into_iter().flatten().collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalRate {
    pub successes: usize,
    pub trials: usize,
    pub p: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Wilson score interval at 95 %.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

impl EmpiricalRate {
    pub fn from_counts(successes: usize, trials: usize) -> Self {
        let (ci_low, ci_high) = wilson_interval(successes, trials);
        let p = if trials == 0 { f64::NAN } else { successes as f64 / trials as f64 };
        EmpiricalRate { successes, trials, p, ci_low, ci_high }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloReport {
    pub music: EmpiricalRate,
    pub gmusic: EmpiricalRate,
}

impl MonteCarloReport {
    pub fn get(&self, e: Estimator) -> EmpiricalRate {
        match e {
            Estimator::Music => self.music,
            Estimator::GMusic => self.gmusic,
        }
    }
}

/// Resolution rates of both estimators on shared trials.
pub fn empirical_resolution(cfg: &ScenarioConfig, theta1: f64, theta2: f64, plan: &TrialPlan) -> Result<MonteCarloReport> {
    cfg.validate()?;
    let q = ResolutionQuery::new(theta1, theta2, Estimator::GMusic)?;
    let probes = q.probes();
    let gen = SnapshotGenerator::new(cfg)?;
    let hits = run_trials(plan, |t| {
        let (c, g) = trial_costs(&gen, cfg, &probes, plan.seed, t)?;
        Ok((resolution_statistic(&c) < 0.0, resolution_statistic(&g) < 0.0))
    })?;
    let music = hits.iter().filter(|h| h.0).count();
    let gmusic = hits.iter().filter(|h| h.1).count();
    Ok(MonteCarloReport {
        music: EmpiricalRate::from_counts(music, plan.n_trials),
        gmusic: EmpiricalRate::from_counts(gmusic, plan.n_trials),
    })
}

pub fn empirical_resolution_probability(cfg: &ScenarioConfig, q: &ResolutionQuery, plan: &TrialPlan) -> Result<EmpiricalRate> {
    Ok(empirical_resolution(cfg, q.theta1, q.theta2, plan)?.get(q.estimator))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluctuationSummary {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub predicted_variance: f64,
    pub variance_ratio: f64,
    /// `mean * sqrt(trials) / std`
    pub centering_t: f64,
}

fn summarize(xs: &[f64], predicted_variance: f64) -> FluctuationSummary {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &x in xs {
        let d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let variance = m2 * n / (n - 1.0);
    FluctuationSummary {
        mean,
        variance,
        skewness: m3 / m2.powf(1.5),
        excess_kurtosis: m4 / (m2 * m2) - 3.0,
        predicted_variance,
        variance_ratio: variance / predicted_variance,
        centering_t: mean * n.sqrt() / variance.sqrt(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CltReport {
    pub music: FluctuationSummary,
    pub gmusic: FluctuationSummary,
}

/// Moments of `sqrt(N) u^T (eta_hat - eta_bar)` compared with `u^T Gamma u`.
pub fn clt_fluctuation_check(cfg: &ScenarioConfig, probes: &[f64; 3], plan: &TrialPlan) -> Result<CltReport> {
    let stats = cost_statistics(cfg, probes)?;
    let gen = SnapshotGenerator::new(cfg)?;
    let sqrt_n = (cfg.n as f64).sqrt();
    let ubar_c = resolution_statistic(&[stats.eta_bar_c[0], stats.eta_bar_c[1], stats.eta_bar_c[2]]);
    let ubar_g = resolution_statistic(&[stats.eta_bar_g[0], stats.eta_bar_g[1], stats.eta_bar_g[2]]);
    let samples = run_trials(plan, |t| {
        let (c, g) = trial_costs(&gen, cfg, probes, plan.seed, t)?;
        Ok((
            sqrt_n * (resolution_statistic(&c) - ubar_c),
            sqrt_n * (resolution_statistic(&g) - ubar_g),
        ))
    })?;
    let quad = |g: &DMatrix<f64>| {
        let u = crate::estimators::U;
        (0..3).flat_map(|p| (0..3).map(move |r| (p, r))).map(|(p, r)| u[p] * g[(p, r)] * u[r]).sum::<f64>()
    };
    let c: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let g: Vec<f64> = samples.iter().map(|s| s.1).collect();
    Ok(CltReport { music: summarize(&c, quad(&stats.gamma_c)), gmusic: summarize(&g, quad(&stats.gamma_g)) })
}
