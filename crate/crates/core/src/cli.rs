//! Command-line runner: predict, simulate, sweep and check a scenario file.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::array_model::{true_spectrum, ScenarioConfig};
use crate::asymptotics::{cost_statistics, det_equiv_gmusic, xi_matrices};
use crate::error::{Error, Result};
use crate::estimators::{gmusic_cost, gmusic_weights, mu_hat_values, sample_covariance};
use crate::montecarlo::{empirical_resolution, trial_rng, SnapshotGenerator, TrialPlan};
use crate::oracle::{gmusic_cost_contour, xi_double_contour};
use crate::resolution::{predict, Estimator, ResolutionQuery};
use crate::rmt_support::{mu_values, omega_on_cluster, psi, solve_support};

#[derive(Parser, Debug)]
#[command(name = "doa-resolution", version, about = "Probability of resolution of MUSIC and g-MUSIC")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Scenario file (`key = value` lines).
    #[arg(long)]
    scenario: PathBuf,
    /// Override the scenario SNR in dB.
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Asymptotic probability of resolution for both estimators.
    Predict {
        #[command(flatten)]
        common: Common,
    },
    /// Empirical resolution rates with 95% Wilson intervals.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sweep one variable and write a CSV file.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        var: SweepVar,
        /// `start..stop[:step]` (inclusive) or a comma-separated list.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(long, value_delimiter = ',', default_value = "gmusic,music")]
        estimators: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "predict")]
        modes: Vec<String>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the invariant and oracle checks on the scenario.
    Check {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum SweepVar {
    SnrDb,
    Snapshots,
    SeparationDeg,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::SnrDb => "snr_db",
            SweepVar::Snapshots => "snapshots",
            SweepVar::SeparationDeg => "separation_deg",
        }
    }

    /// A copy of `cfg` with this variable set to `v`.
    pub fn apply(self, cfg: &ScenarioConfig, v: f64) -> Result<ScenarioConfig> {
        let mut c = cfg.clone();
        match self {
            SweepVar::SnrDb => c.set_snr_db(v),
            SweepVar::Snapshots => {
                if !(v >= 1.0 && v.fract() == 0.0) {
                    return Err(Error::InvalidConfig(format!("snapshot count must be a positive integer, got {v}")));
                }
                c.n = v as usize;
            }
            SweepVar::SeparationDeg => {
                if c.k() < 2 {
                    return Err(Error::InvalidConfig("separation sweep needs two sources".into()));
                }
                c.thetas[1] = c.thetas[0] + v;
            }
        }
        c.validate()?;
        Ok(c)
    }
}

impl FromStr for SweepVar {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        <SweepVar as ValueEnum>::from_str(s, false).map_err(|_| Error::InvalidConfig(format!("unknown sweep variable `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    Predict,
    Simulate,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Predict => "predict",
            Mode::Simulate => "simulate",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "predict" => Ok(Mode::Predict),
            "simulate" => Ok(Mode::Simulate),
            other => Err(Error::InvalidConfig(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub variable: SweepVar,
    pub values: Vec<f64>,
    pub estimators: Vec<Estimator>,
    pub modes: Vec<Mode>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidConfig("sweep needs at least one value".into()));
        }
        if self.values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidConfig("sweep values must be strictly ascending".into()));
        }
        if self.variable == SweepVar::Snapshots && self.values.iter().any(|&v| !(v >= 1.0 && v.fract() == 0.0)) {
            return Err(Error::InvalidConfig("snapshot values must be positive integers".into()));
        }
        if self.estimators.is_empty() || self.modes.is_empty() {
            return Err(Error::InvalidConfig("sweep needs at least one estimator and one mode".into()));
        }
        Ok(())
    }
}

/// `start..stop[:step]` with inclusive stop, or `a,b,c`.
pub fn parse_values(s: &str) -> Result<Vec<f64>> {
    let bad = |what: &str| Error::InvalidConfig(format!("bad value list `{s}`: {what}"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad("not a number"));
    if let Some((start, rest)) = s.split_once("..") {
        let (stop, step) = match rest.split_once(':') {
            Some((a, b)) => (num(a)?, num(b)?),
            None => (num(rest)?, 1.0),
        };
        let start = num(start)?;
        if !(step > 0.0) || stop < start {
            return Err(bad("range must ascend with a positive step"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        return Ok((0..count).map(|i| start + i as f64 * step).collect());
    }
    s.split(',').filter(|t| !t.trim().is_empty()).map(num).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub variable: String,
    pub value: f64,
    pub estimator: Estimator,
    pub mode: Mode,
    pub p_res: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub separable: bool,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
}

pub const CSV_HEADER: &str = "variable,value,estimator,mode,p_res,ci_low,ci_high,separable,trials,seed";

/// Seventeen significant digits, positional when that stays readable.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-5..=16).contains(&mag) {
        format!("{:.*}", (16 - mag).max(0) as usize, x)
    } else {
        format!("{x:.16e}")
    }
}

fn sort_rows(rows: &mut [CsvRow]) {
    rows.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then(a.estimator.name().cmp(b.estimator.name()))
            .then(a.mode.cmp(&b.mode))
    });
}

pub fn emit_csv(rows: &[CsvRow]) -> String {
    let mut rows = rows.to_vec();
    sort_rows(&mut rows);
    let opt = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.variable,
            r.value,
            r.estimator.name(),
            r.mode.name(),
            opt(r.p_res),
            opt(r.ci_low),
            opt(r.ci_high),
            r.separable,
            r.trials.map(|t| t.to_string()).unwrap_or_default(),
            r.seed.map(|t| t.to_string()).unwrap_or_default(),
        );
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => return Err(Error::Parse { line: 1, msg: "missing CSV header".into() }),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let err = |msg: &str| Error::Parse { line: i + 1, msg: msg.to_string() };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 10 {
            return Err(err("expected 10 fields"));
        }
        let opt_f = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() { Ok(None) } else { s.parse().map(Some).map_err(|_| err("bad number")) }
        };
        rows.push(CsvRow {
            variable: f[0].to_string(),
            value: f[1].parse().map_err(|_| err("bad value"))?,
            estimator: f[2].parse()?,
            mode: f[3].parse()?,
            p_res: opt_f(f[4])?,
            ci_low: opt_f(f[5])?,
            ci_high: opt_f(f[6])?,
            separable: f[7].parse().map_err(|_| err("bad separable flag"))?,
            trials: if f[8].is_empty() { None } else { Some(f[8].parse().map_err(|_| err("bad trials"))?) },
            seed: if f[9].is_empty() { None } else { Some(f[9].parse().map_err(|_| err("bad seed"))?) },
        });
    }
    Ok(rows)
}

/// Evaluate every point of a sweep. Points run in parallel; every simulated
/// point uses the same seed.
pub fn run_sweep(cfg: &ScenarioConfig, spec: &SweepSpec, trials: usize, seed: u64) -> Result<Vec<CsvRow>> {
    spec.validate()?;
    let per_point: Vec<Vec<CsvRow>> = spec
        .values
        .par_iter()
        .map(|&v| {
            let c = spec.variable.apply(cfg, v)?;
            let sp = true_spectrum(&c)?;
            let separable = solve_support(&sp, c.n)?.noise_cluster_isolated;
            let mut rows = Vec::new();
            let row = |estimator, mode| CsvRow {
                variable: spec.variable.name().to_string(),
                value: v,
                estimator,
                mode,
                p_res: None,
                ci_low: None,
                ci_high: None,
                separable,
                trials: None,
                seed: None,
            };
            if spec.modes.contains(&Mode::Predict) {
                let p = if separable { Some(predict(&c)?) } else { None };
                for &e in &spec.estimators {
                    rows.push(CsvRow { p_res: p.as_ref().and_then(|p| p.get(e)), ..row(e, Mode::Predict) });
                }
            }
            if spec.modes.contains(&Mode::Simulate) {
                let mc = empirical_resolution(&c, c.thetas[0], c.thetas[1], &TrialPlan::new(trials, seed))?;
                for &e in &spec.estimators {
                    let r = mc.get(e);
                    rows.push(CsvRow {
                        p_res: Some(r.p),
                        ci_low: Some(r.ci_low),
                        ci_high: Some(r.ci_high),
                        trials: Some(trials),
                        seed: Some(seed),
                        ..row(e, Mode::Simulate)
                    });
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<CsvRow> = per_point.into_iter().flatten().collect();
    sort_rows(&mut rows);
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

/// Invariant and oracle checks on one scenario.
pub fn run_checks(cfg: &ScenarioConfig) -> Result<Vec<CheckOutcome>> {
    let sp = true_spectrum(cfg)?;
    let n = cfg.n;
    let support = solve_support(&sp, n)?;
    support.require_isolated()?;
    let mus = mu_values(&sp, n)?;
    let mut out = Vec::new();
    let mut push = |name, pass, detail: String| out.push(CheckOutcome { name, pass, detail });

    let g = &sp.gammas;
    let inter = (1..g.len()).all(|i| mus.mus[i] > g[i - 1] && mus.mus[i] < g[i]) && mus.mus[0] < g[0];
    push("mu interlacing", inter, format!("{:?}", mus.mus));

    let (lo, hi) = support.noise_cluster();
    let mut worst = 0.0f64;
    for i in 1..100 {
        let x = lo + (hi - lo) * i as f64 / 100.0;
        let w = omega_on_cluster(x, &sp, n)?;
        let s: f64 = g.iter().zip(&sp.mults).map(|(&gm, &k)| k as f64 * gm * gm / (gm - w).norm_sqr()).sum::<f64>()
            / n as f64;
        worst = worst.max((s - 1.0).abs());
    }
    push("omega identity on cluster", worst < 1e-8, format!("max deviation {worst:.3e}"));

    let edge_psi = psi(support.omega_roots[0].1, &sp, n)?;
    push("psi = 1 at cluster edge", (edge_psi - 1.0).abs() < 1e-8, format!("{edge_psi}"));

    let q = ResolutionQuery::for_scenario(cfg, Estimator::GMusic)?;
    let probes = q.probes();
    let eta = det_equiv_gmusic(&sp, &probes, cfg);
    let at_doa = eta[0].abs().max(eta[1].abs());
    push("g-MUSIC equivalent vanishes at DoAs", at_doa <= 1e-10, format!("{at_doa:.3e}"));

    let (xc, xg) = xi_matrices(&sp, &mus, &support, n)?;
    for (kind, closed) in [(Estimator::Music, &xc), (Estimator::GMusic, &xg)] {
        let sym = closed == &closed.transpose();
        let nonneg = closed.iter().all(|&v| v >= -1e-9 * closed.amax());
        push(
            if kind == Estimator::Music { "MUSIC weights symmetric nonnegative" } else { "g-MUSIC weights symmetric nonnegative" },
            sym && nonneg,
            String::new(),
        );
        let orc = xi_double_contour(&sp, &support, n, kind, 2000)?;
        let err = (closed - &orc.xi).amax() / closed.amax();
        push(
            if kind == Estimator::Music { "MUSIC weights vs double contour" } else { "g-MUSIC weights vs double contour" },
            err < 1e-4,
            format!("relative error {err:.3e}"),
        );
    }

    let st = cost_statistics(cfg, &probes)?;
    for (name, gm) in [("MUSIC covariance PSD", &st.gamma_c), ("g-MUSIC covariance PSD", &st.gamma_g)] {
        let ev = nalgebra::SymmetricEigen::new(gm.clone()).eigenvalues;
        let min = ev.min();
        push(name, min >= -1e-8 * gm.amax() && gm == &gm.transpose(), format!("min eigenvalue {min:.3e}"));
    }

    let gen = SnapshotGenerator::new(cfg)?;
    let mut worst = 0.0f64;
    let mut inter_ok = true;
    let mut skipped = 0;
    for t in 0..5 {
        let se = sample_covariance(&gen.sample(&mut trial_rng(0x5eed, t)));
        let mh = mu_hat_values(&se.lambdas, n)?;
        let zeros = cfg.m.saturating_sub(n);
        inter_ok &= ((zeros + 1)..cfg.m).all(|i| mh[i] > se.lambdas[i - 1] && mh[i] < se.lambdas[i]);
        let w = gmusic_weights(&se, cfg.k(), n)?;
        let closed = gmusic_cost(&se, &w, &[probes[2]], cfg)[0];
        match gmusic_cost_contour(&se, cfg.k(), probes[2], cfg, 8000) {
            Ok(orc) => worst = worst.max((closed - orc).abs() / closed.abs().max(1e-3 * cfg.m as f64)),
            Err(_) => skipped += 1,
        }
    }
    push("sample mu interlacing", inter_ok, String::new());
    push(
        "g-MUSIC cost vs contour",
        worst < 1e-6 && skipped < 5,
        format!("relative error {worst:.3e}, {skipped} unseparated draws skipped"),
    );
    Ok(out)
}

fn load(common: &Common) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::from_file(&common.scenario)?;
    if let Some(s) = common.snr_db {
        cfg.set_snr_db(s);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Predict { common } => {
            let cfg = load(&common)?;
            let p = predict(&cfg)?;
            let (lo, hi) = p.support.noise_cluster();
            println!("noise cluster: [{lo:.6e}, {hi:.6e}]");
            p.support.require_isolated()?;
            println!("separable: true");
            for e in Estimator::ALL {
                println!("{:<8} P_res = {:.4}", e.label(), p.get(e).unwrap_or(f64::NAN));
            }
            Ok(true)
        }
        Command::Simulate { common, trials, seed } => {
            let cfg = load(&common)?;
            let q = ResolutionQuery::for_scenario(&cfg, Estimator::GMusic)?;
            let sp = true_spectrum(&cfg)?;
            let separable = solve_support(&sp, cfg.n)?.noise_cluster_isolated;
            println!("separable: {separable}");
            let r = empirical_resolution(&cfg, q.theta1, q.theta2, &TrialPlan::new(trials, seed))?;
            for e in Estimator::ALL {
                let x = r.get(e);
                println!(
                    "{:<8} rate = {:.4}  95% CI [{:.4}, {:.4}]  ({}/{})",
                    e.label(),
                    x.p,
                    x.ci_low,
                    x.ci_high,
                    x.successes,
                    x.trials
                );
            }
            Ok(true)
        }
        Command::Sweep { common, var, values, estimators, modes, trials, seed, out } => {
            let cfg = load(&common)?;
            let spec = SweepSpec {
                variable: var,
                values: parse_values(&values)?,
                estimators: estimators.iter().map(|s| s.parse()).collect::<Result<_>>()?,
                modes: modes.iter().map(|s| s.parse()).collect::<Result<_>>()?,
            };
            let rows = run_sweep(&cfg, &spec, trials, seed)?;
            fs::write(&out, emit_csv(&rows))?;
            println!("wrote {} rows to {}", rows.len(), out.display());
            Ok(true)
        }
        Command::Check { common } => {
            let cfg = load(&common)?;
            let checks = run_checks(&cfg)?;
            let mut all = true;
            for c in &checks {
                all &= c.pass;
                println!("{} {}  {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(all)
        }
    }
}

/// Exit code 0 on success, 2 when the scenario is outside the model's
/// validity, 1 otherwise.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e @ Error::NotSeparable(_)) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn scenario_file(name: &str, snr: f64) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("doa-cli-{}-{name}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("s.txt");
        fs::write(&p, ScenarioConfig::new(15, 15, vec![45.0, 50.0], snr).to_text()).unwrap();
        p
    }

    #[test]
    fn values_range_and_list() {
        assert_eq!(parse_values("-1..3").unwrap(), vec![-1.0, 0.0, 1.0, 2.0, 3.0]);
        assert_eq!(parse_values("0..1:0.5").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_values("-1..26").unwrap().len(), 28);
        assert_eq!(parse_values("4, 8,16").unwrap(), vec![4.0, 8.0, 16.0]);
        assert!(parse_values("3..1").is_err());
        assert!(parse_values("a,b").is_err());
    }

    #[test]
    fn fmt17_round_trips() {
        for &x in &[0.6368123456789012, 1.0, 1e-7, 0.1 + 0.2, 0.0, 12345.678] {
            assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt17(0.5), "0.50000000000000000");
    }

    #[test]
    fn predict_exit_codes() {
        let ok = scenario_file("ok", 0.0);
        assert_eq!(run(["doa-resolution", "predict", "--scenario", ok.to_str().unwrap()]), 0);
        assert_eq!(
            run(["doa-resolution", "predict", "--scenario", ok.to_str().unwrap(), "--snr-db", "-5"]),
            2
        );
        assert_eq!(run(["doa-resolution", "predict", "--scenario", "/nonexistent/file"]), 1);
        assert_eq!(run(["doa-resolution", "frobnicate"]), 1);
    }

    #[test]
    fn malformed_scenario_reports_line() {
        let err = ScenarioConfig::parse("M = 15\nN = 15\nthetas = 45, x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn sweep_cardinality_and_refusals() {
        let p = scenario_file("sweep", 0.0);
        let out = p.with_file_name("o.csv");
        let code = run([
            "doa-resolution",
            "sweep",
            "--scenario",
            p.to_str().unwrap(),
            "--var",
            "snr_db",
            "--values",
            "-3..26",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let text = fs::read_to_string(&out).unwrap();
        let rows = parse_csv(&text).unwrap();
        assert_eq!(rows.len(), 30 * 2);
        let low = rows.iter().find(|r| r.value == -3.0).unwrap();
        assert!(!low.separable && low.p_res.is_none());
        assert!(text.contains("\nsnr_db,0,gmusic,predict,0.6367"));
        assert!(text.lines().any(|l| l.starts_with("snr_db,0,gmusic,predict,") && l.ends_with(",,,true,,")));
        assert_eq!(emit_csv(&rows), text);
    }

    #[test]
    fn sweep_is_deterministic() {
        let cfg = ScenarioConfig::new(8, 20, vec![40.0, 48.0], 4.0);
        let spec = SweepSpec {
            variable: SweepVar::Snapshots,
            values: vec![10.0, 20.0, 40.0],
            estimators: vec![Estimator::Music, Estimator::GMusic],
            modes: vec![Mode::Simulate, Mode::Predict],
        };
        let a = emit_csv(&run_sweep(&cfg, &spec, 300, 17).unwrap());
        let b = emit_csv(&run_sweep(&cfg, &spec, 300, 17).unwrap());
        assert_eq!(a, b);
        assert_eq!(a.lines().count(), 1 + 3 * 2 * 2);
        let bad = SweepSpec { values: vec![1.5], ..spec };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn check_passes_on_reference_scenario() {
        let cfg = ScenarioConfig::new(15, 15, vec![45.0, 50.0], 5.0);
        for c in run_checks(&cfg).unwrap() {
            assert!(c.pass, "{} {}", c.name, c.detail);
        }
    }

    fn row(value: f64, e: Estimator, mode: Mode, p: Option<f64>) -> CsvRow {
        let sim = mode == Mode::Simulate;
        CsvRow {
            variable: "separation_deg".into(),
            value,
            estimator: e,
            mode,
            p_res: p,
            ci_low: p.filter(|_| sim).map(|x| x * 0.9),
            ci_high: p.filter(|_| sim).map(|x| (x * 1.1).min(1.0)),
            separable: p.is_some(),
            trials: sim.then_some(100),
            seed: sim.then_some(3),
        }
    }

    proptest! {
        #[test]
        fn csv_round_trip_sorted(
            pts in proptest::collection::vec((-50.0f64..50.0, any::<bool>(), any::<bool>(), proptest::option::of(0.0f64..1.0)), 1..20)
        ) {
            let rows: Vec<CsvRow> = pts
                .iter()
                .map(|&(v, e, m, p)| {
                    let mode = if m { Mode::Simulate } else { Mode::Predict };
                    row(v, if e { Estimator::Music } else { Estimator::GMusic }, mode, if m { p.or(Some(0.5)) } else { p })
                })
                .collect();
            let text = emit_csv(&rows);
            let back = parse_csv(&text).unwrap();
            let mut sorted = rows.clone();
            sort_rows(&mut sorted);
            prop_assert_eq!(&back, &sorted);
            let mut rev = rows;
            rev.reverse();
            prop_assert_eq!(emit_csv(&rev), text);
        }
    }
}
