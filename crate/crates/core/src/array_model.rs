//! Uniform linear array scenario: steering vectors, true covariance and its
//! distinct-eigenvalue decomposition.

use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{numerical, Error, Result};

pub const DEFAULT_GROUPING_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Sensors.
    pub m: usize,
    /// Snapshots.
    pub n: usize,
    /// Source directions in degrees.
    pub thetas: Vec<f64>,
    pub powers: Vec<f64>,
    pub rho: f64,
    pub sigma2: f64,
    pub spacing_wavelengths: f64,
    pub normalize_steering: bool,
}

impl ScenarioConfig {
    /// Unit-power sources, half-wavelength spacing, unnormalized steering.
    pub fn new(m: usize, n: usize, thetas: Vec<f64>, snr_db: f64) -> Self {
        let k = thetas.len();
        ScenarioConfig {
            m,
            n,
            thetas,
            powers: vec![1.0; k],
            rho: 0.0,
            sigma2: snr_db_to_sigma2(snr_db),
            spacing_wavelengths: 0.5,
            normalize_steering: false,
        }
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn k(&self) -> usize {
        self.thetas.len()
    }

    pub fn snr_db(&self) -> f64 {
        -10.0 * self.sigma2.log10()
    }

    pub fn set_snr_db(&mut self, snr_db: f64) {
        self.sigma2 = snr_db_to_sigma2(snr_db);
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        let k = self.k();
        if self.m == 0 || self.n == 0 {
            return bad("M and N must be positive".into());
        }
        if k >= self.m {
            return bad(format!("need K < M, got K = {k}, M = {}", self.m));
        }
        if self.powers.len() != k {
            return bad(format!("{} powers given for {k} sources", self.powers.len()));
        }
        if self.powers.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return bad("powers must be finite and nonnegative".into());
        }
        for (i, t) in self.thetas.iter().enumerate() {
            if !(t.is_finite() && *t > -90.0 && *t < 90.0) {
                return bad(format!("DoA {t} outside (-90, 90) degrees"));
            }
            if self.thetas[..i].contains(t) {
                return bad(format!("duplicate DoA {t}"));
            }
        }
        if !(self.rho.is_finite() && self.rho.abs() <= 1.0) || (k >= 2 && self.rho.abs() >= 1.0) {
            return bad(format!("correlation {} makes R_s singular or invalid", self.rho));
        }
        if !(self.sigma2.is_finite() && self.sigma2 > 0.0) {
            return bad("sigma2 must be positive".into());
        }
        if !(self.spacing_wavelengths.is_finite() && self.spacing_wavelengths > 0.0) {
            return bad("spacing_wavelengths must be positive".into());
        }
        Ok(())
    }

    /// Parse the flat `key = value` scenario format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut m = None;
        let mut n = None;
        let mut thetas = None;
        let mut powers = None;
        let mut rho = 0.0;
        let mut sigma2 = None;
        let mut spacing = 0.5;
        let mut normalize = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |msg: String| Error::Parse { line: line_no, msg };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim();
            let value = value.trim();
            let num = |v: &str| -> Result<f64> {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| err(format!("`{v}` is not a number")))
            };
            let list = |v: &str| -> Result<Vec<f64>> {
                v.split(',').filter(|s| !s.trim().is_empty()).map(num).collect()
            };
            let count = |v: &str| -> Result<usize> {
                v.parse::<usize>()
                    .map_err(|_| err(format!("`{v}` is not a positive integer")))
            };
            match key {
                "M" | "m" => m = Some(count(value)?),
                "N" | "n" => n = Some(count(value)?),
                "thetas" => thetas = Some(list(value)?),
                "powers" => powers = Some(list(value)?),
                "rho" => rho = num(value)?,
                "sigma2" => sigma2 = Some(num(value)?),
                "spacing_wavelengths" => spacing = num(value)?,
                "normalize_steering" => {
                    normalize = match value {
                        "true" | "1" | "yes" => true,
                        "false" | "0" | "no" => false,
                        other => return Err(err(format!("`{other}` is not a boolean"))),
                    }
                }
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        let missing = |k: &str| Error::InvalidConfig(format!("scenario is missing key `{k}`"));
        let thetas = thetas.ok_or_else(|| missing("thetas"))?;
        let cfg = ScenarioConfig {
            m: m.ok_or_else(|| missing("M"))?,
            n: n.ok_or_else(|| missing("N"))?,
            powers: powers.unwrap_or_else(|| vec![1.0; thetas.len()]),
            thetas,
            rho,
            sigma2: sigma2.ok_or_else(|| missing("sigma2"))?,
            spacing_wavelengths: spacing,
            normalize_steering: normalize,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        format!(
            "M = {}\nN = {}\nthetas = {}\npowers = {}\nrho = {}\nsigma2 = {}\nspacing_wavelengths = {}\nnormalize_steering = {}\n",
            self.m,
            self.n,
            join(&self.thetas),
            join(&self.powers),
            self.rho,
            self.sigma2,
            self.spacing_wavelengths,
            self.normalize_steering
        )
    }
}

pub fn snr_db_to_sigma2(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

pub fn steering_vector(theta_deg: f64, cfg: &ScenarioConfig) -> DVector<Complex64> {
    let phase = 2.0 * std::f64::consts::PI * cfg.spacing_wavelengths * theta_deg.to_radians().sin();
    let norm = if cfg.normalize_steering { 1.0 / (cfg.m as f64).sqrt() } else { 1.0 };
    DVector::from_fn(cfg.m, |i, _| Complex64::from_polar(norm, phase * i as f64))
}

/// Steering vectors stacked as columns.
pub fn steering_matrix(thetas: &[f64], cfg: &ScenarioConfig) -> DMatrix<Complex64> {
    let cols: Vec<_> = thetas.iter().map(|&t| steering_vector(t, cfg)).collect();
    DMatrix::from_columns(&cols)
}

/// `R_s = D^{1/2} C D^{1/2}` with unit-diagonal correlation `C`.
pub fn source_covariance(cfg: &ScenarioConfig) -> DMatrix<f64> {
    let k = cfg.k();
    DMatrix::from_fn(k, k, |i, j| {
        let c = if i == j { 1.0 } else { cfg.rho };
        c * (cfg.powers[i] * cfg.powers[j]).sqrt()
    })
}

pub fn build_true_covariance(cfg: &ScenarioConfig) -> Result<DMatrix<Complex64>> {
    cfg.validate()?;
    let a = steering_matrix(&cfg.thetas, cfg);
    let rs = source_covariance(cfg).map(|x| Complex64::new(x, 0.0));
    let mut r = &a * rs * a.adjoint();
    for i in 0..cfg.m {
        r[(i, i)] += cfg.sigma2;
    }
    Ok(hermitian_part(&r))
}

pub(crate) fn hermitian_part(r: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (r + r.adjoint()).scale(0.5)
}

#[derive(Debug, Clone)]
pub struct TrueSpectrum {
    pub gammas: Vec<f64>,
    pub mults: Vec<usize>,
    pub bases: Vec<DMatrix<Complex64>>,
}

impl TrueSpectrum {
    pub fn m_bar(&self) -> usize {
        self.gammas.len()
    }

    pub fn dim(&self) -> usize {
        self.mults.iter().sum()
    }

    pub fn gamma_max(&self) -> f64 {
        *self.gammas.last().expect("non-empty spectrum")
    }

    pub fn projector(&self, m: usize) -> DMatrix<Complex64> {
        &self.bases[m] * self.bases[m].adjoint()
    }

    /// Spectrum without eigenvectors, for the purely spectral routines.
    pub fn from_atoms(gammas: Vec<f64>, mults: Vec<usize>) -> Self {
        let dim: usize = mults.iter().sum();
        let mut bases = Vec::with_capacity(mults.len());
        let mut col = 0;
        for &k in &mults {
            bases.push(DMatrix::from_fn(dim, k, |i, j| {
                if i == col + j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }
            }));
            col += k;
        }
        TrueSpectrum { gammas, mults, bases }
    }
}

/// Ascending eigenpairs of a Hermitian matrix.
pub fn hermitian_eigen(r: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let eig = SymmetricEigen::new(r.clone());
    let mut idx: Vec<usize> = (0..r.nrows()).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let cols: Vec<_> = idx.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
    (vals, DMatrix::from_columns(&cols))
}

pub fn distinct_eigendecomposition(r: &DMatrix<Complex64>, rel_tol: f64) -> Result<TrueSpectrum> {
    if !(rel_tol > 0.0) {
        return Err(Error::InvalidConfig("grouping tolerance must be positive".into()));
    }
    let (vals, vecs) = hermitian_eigen(r);
    let vmax = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = rel_tol * vmax;
    let mut groups: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=vals.len() {
        if i < vals.len() {
            let gap = vals[i] - vals[i - 1];
            if gap < tol {
                continue;
            }
            if gap < 2.0 * tol {
                return numerical(format!(
                    "ambiguous eigenvalue grouping: gap {gap:e} within 2x of tolerance {tol:e}"
                ));
            }
        }
        groups.push((start, i));
        start = i;
    }
    let mut gammas = Vec::new();
    let mut mults = Vec::new();
    let mut bases = Vec::new();
    for (s, e) in groups {
        gammas.push(vals[s..e].iter().sum::<f64>() / (e - s) as f64);
        mults.push(e - s);
        bases.push(vecs.columns(s, e - s).into_owned());
    }
    Ok(TrueSpectrum { gammas, mults, bases })
}

/// Decompose the scenario covariance and cross-check `gamma_1 = sigma^2`.
pub fn true_spectrum(cfg: &ScenarioConfig) -> Result<TrueSpectrum> {
    let r = build_true_covariance(cfg)?;
    let sp = distinct_eigendecomposition(&r, DEFAULT_GROUPING_TOL)?;
    let g1 = sp.gammas[0];
    if (g1 - cfg.sigma2).abs() > 1e-8 * sp.gamma_max() {
        return numerical(format!(
            "smallest eigenvalue {g1:e} does not match the noise power {:e}",
            cfg.sigma2
        ));
    }
    Ok(sp)
}
