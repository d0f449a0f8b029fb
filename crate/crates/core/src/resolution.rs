//! Asymptotic probability that the mid-angle test declares two sources
//! resolved.

use std::fmt;
use std::str::FromStr;

use crate::array_model::{true_spectrum, ScenarioConfig};
use crate::asymptotics::{cost_statistics, CostStatistics};
use crate::error::{Error, Result};
use crate::estimators::U;
use crate::rmt_support::{solve_support, SupportProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Estimator {
    GMusic,
    Music,
}

impl Estimator {
    pub const ALL: [Estimator; 2] = [Estimator::GMusic, Estimator::Music];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Music => "music",
            Estimator::GMusic => "gmusic",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Estimator::Music => "MUSIC",
            Estimator::GMusic => "g-MUSIC",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "music" => Ok(Estimator::Music),
            "gmusic" | "g-music" => Ok(Estimator::GMusic),
            other => Err(Error::InvalidConfig(format!("unknown estimator `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolutionQuery {
    pub theta1: f64,
    pub theta2: f64,
    pub estimator: Estimator,
}

impl ResolutionQuery {
    pub fn new(theta1: f64, theta2: f64, estimator: Estimator) -> Result<Self> {
        if theta1 == theta2 {
            return Err(Error::InvalidConfig("the two DoAs must differ".into()));
        }
        Ok(ResolutionQuery { theta1, theta2, estimator })
    }

    /// The first two DoAs of the scenario.
    pub fn for_scenario(cfg: &ScenarioConfig, estimator: Estimator) -> Result<Self> {
        if cfg.k() < 2 {
            return Err(Error::InvalidConfig("resolution needs at least two sources".into()));
        }
        Self::new(cfg.thetas[0], cfg.thetas[1], estimator)
    }

    /// `[theta_1, theta_2, (theta_1 + theta_2) / 2]`
    pub fn probes(&self) -> [f64; 3] {
        [self.theta1, self.theta2, 0.5 * (self.theta1 + self.theta2)]
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

pub fn predict_resolution_probability(q: &ResolutionQuery, stats: &CostStatistics, n: usize) -> Result<f64> {
    let probes = q.probes();
    if stats.probe_thetas.len() != 3 || stats.probe_thetas.iter().zip(&probes).any(|(a, b)| a != b) {
        return Err(Error::InvalidConfig("statistics were computed at different probe angles".into()));
    }
    let (eta, gamma) = match q.estimator {
        Estimator::Music => (&stats.eta_bar_c, &stats.gamma_c),
        Estimator::GMusic => (&stats.eta_bar_g, &stats.gamma_g),
    };
    let mean: f64 = U.iter().zip(eta).map(|(u, e)| u * e).sum();
    let mut var = 0.0;
    for p in 0..3 {
        for r in 0..3 {
            var += U[p] * gamma[(p, r)] * U[r];
        }
    }
    var /= n as f64;
    if var < 1e-30 {
        return Ok(if mean < 0.0 { 1.0 } else { 0.0 });
    }
    Ok(normal_cdf(-mean / var.sqrt()))
}

#[derive(Debug, Clone)]
pub struct Prediction {
    pub support: SupportProfile,
    /// `None` when the noise cluster is not isolated.
    pub stats: Option<CostStatistics>,
    pub music: Option<f64>,
    pub gmusic: Option<f64>,
}

impl Prediction {
    pub fn separable(&self) -> bool {
        self.support.noise_cluster_isolated
    }

    pub fn get(&self, e: Estimator) -> Option<f64> {
        match e {
            Estimator::Music => self.music,
            Estimator::GMusic => self.gmusic,
        }
    }
}

/// Predict both estimators for the first two DoAs of `cfg`. A scenario
/// outside the model's validity yields a prediction with empty values.
pub fn predict(cfg: &ScenarioConfig) -> Result<Prediction> {
    let qg = ResolutionQuery::for_scenario(cfg, Estimator::GMusic)?;
    let sp = true_spectrum(cfg)?;
    let support = solve_support(&sp, cfg.n)?;
    if !support.noise_cluster_isolated {
        return Ok(Prediction { support, stats: None, music: None, gmusic: None });
    }
    let stats = cost_statistics(cfg, &qg.probes())?;
    let qm = ResolutionQuery { estimator: Estimator::Music, ..qg };
    let gmusic = predict_resolution_probability(&qg, &stats, cfg.n)?;
    let music = predict_resolution_probability(&qm, &stats, cfg.n)?;
    Ok(Prediction { support, stats: Some(stats), music: Some(music), gmusic: Some(gmusic) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn cfg(n: usize, snr: f64) -> ScenarioConfig {
        ScenarioConfig::new(15, n, vec![45.0, 50.0], snr)
    }

    #[test]
    fn figure_points() {
        let p = predict(&cfg(15, 0.0)).unwrap();
        assert!((p.gmusic.unwrap() - 0.6368).abs() < 1e-3);
        assert!((p.music.unwrap() - 0.0641).abs() < 1e-3);
        let p = predict(&cfg(100, -7.0)).unwrap();
        assert!((p.gmusic.unwrap() - 0.5883).abs() < 1e-3);
        let p = predict(&cfg(100, 0.0)).unwrap();
        assert!((p.music.unwrap() - 0.6412).abs() < 1e-3);
    }

    #[test]
    fn refuses_below_boundary() {
        let p = predict(&cfg(15, -5.0)).unwrap();
        assert!(!p.separable());
        assert!(p.music.is_none() && p.gmusic.is_none());
    }

    #[test]
    fn zero_mean_is_half() {
        let stats = CostStatistics {
            probe_thetas: vec![1.0, 2.0, 1.5],
            eta_bar_c: vec![1.0, 1.0, 1.0],
            eta_bar_g: vec![0.0, 0.0, 0.0],
            gamma_c: DMatrix::identity(3, 3),
            gamma_g: DMatrix::identity(3, 3),
        };
        for e in Estimator::ALL {
            let q = ResolutionQuery::new(1.0, 2.0, e).unwrap();
            assert_eq!(predict_resolution_probability(&q, &stats, 10).unwrap(), 0.5);
        }
    }

    #[test]
    fn degenerate_variance_is_indicator() {
        let stats = CostStatistics {
            probe_thetas: vec![1.0, 2.0, 1.5],
            eta_bar_c: vec![0.0, 0.0, 1.0],
            eta_bar_g: vec![1.0, 1.0, 0.0],
            gamma_c: DMatrix::zeros(3, 3),
            gamma_g: DMatrix::zeros(3, 3),
        };
        let q = ResolutionQuery::new(1.0, 2.0, Estimator::Music).unwrap();
        assert_eq!(predict_resolution_probability(&q, &stats, 10).unwrap(), 1.0);
        let q = ResolutionQuery::new(1.0, 2.0, Estimator::GMusic).unwrap();
        assert_eq!(predict_resolution_probability(&q, &stats, 10).unwrap(), 0.0);
    }

    #[test]
    fn normal_cdf_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((normal_cdf(-1.959_963_984_540_054) - 0.025).abs() < 1e-15);
        // deep tail keeps relative accuracy
        let t = normal_cdf(-30.0);
        assert!((t / 4.906_713_927_148_187e-198 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn steering_normalization_invariant() {
        let a = predict(&cfg(15, 5.0)).unwrap();
        // unit-norm steering with M-fold source powers is the same model
        let mut c = cfg(15, 5.0);
        c.normalize_steering = true;
        c.powers = c.powers.iter().map(|p| p * 15.0).collect();
        let b = predict(&c).unwrap();
        assert!((a.gmusic.unwrap() - b.gmusic.unwrap()).abs() < 1e-10);
        assert!((a.music.unwrap() - b.music.unwrap()).abs() < 1e-10);
    }

    #[test]
    fn gmusic_dominates_on_figure_grid() {
        for &(n, snr) in &[(15, 0.0), (15, 5.0), (15, 10.0), (100, -5.0), (100, 0.0), (10, 6.0)] {
            let p = predict(&cfg(n, snr)).unwrap();
            assert!(p.gmusic.unwrap() >= p.music.unwrap());
        }
    }

    #[test]
    fn rejects_equal_doas() {
        assert!(ResolutionQuery::new(3.0, 3.0, Estimator::Music).is_err());
    }

    proptest! {
        #[test]
        fn output_in_unit_interval(snr in -1.0f64..25.0) {
            let p = predict(&cfg(15, snr)).unwrap();
            for v in [p.music.unwrap(), p.gmusic.unwrap()] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }
}
