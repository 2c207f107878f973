//! Monte Carlo witness for exit probabilities.
//!
//! Paths follow Euler–Maruyama between jump epochs. Each jump stream runs its
//! own exponential clock, and the diffusion takes a partial step up to the
//! next epoch, so jump counts are exact. Every path owns a ChaCha8 stream
//! selected by its index, which makes results independent of scheduling.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, FppError, Result};
use crate::model::{DensitySpec, ProcessSpec};

/// Largest censored fraction for which an estimate counts as reliable.
pub const MAX_CENSORED_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Safety horizon; `None` picks one from the coefficients.
    pub max_time: Option<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            n_paths: 100_000,
            seed: 0,
            max_time: None,
        }
    }
}

impl SimConfig {
    pub fn new(dt: f64, n_paths: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            dt,
            n_paths,
            seed,
            max_time: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.n_paths == 0 {
            return Err(invalid("n_paths must be >= 1"));
        }
        if let Some(t) = self.max_time {
            if !(t > 0.0) {
                return Err(invalid(format!("max_time must be > 0, got {t}")));
            }
        }
        Ok(())
    }

    /// `100·(b − a)² / min σ²` over the interval, kept within `[10, 10⁴]`.
    pub fn horizon(&self, spec: &ProcessSpec) -> f64 {
        if let Some(t) = self.max_time {
            return t;
        }
        let iv = spec.interval;
        let min_s2 = iv
            .interior_nodes(255)
            .into_iter()
            .map(|x| spec.variance(x))
            .fold(f64::INFINITY, f64::min);
        (100.0 * iv.length().powi(2) / min_s2).clamp(10.0, 1e4)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitSide {
    Left,
    Right,
    Censored,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExitSample {
    pub start: f64,
    pub side: ExitSide,
    pub time: f64,
    /// `X(τ)`; the state at the horizon for censored paths.
    pub place: f64,
}

/// Starting point of the simulated paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Start {
    Fixed(f64),
    Density(DensitySpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateWithError {
    pub p_hat: f64,
    pub std_error: f64,
    /// Paths simulated, censored ones included.
    pub n: usize,
    pub censored_count: usize,
    pub reliable: bool,
}

impl EstimateWithError {
    fn from_counts(left: usize, right: usize, censored: usize) -> Self {
        let n = left + right + censored;
        let used = left + right;
        let (p_hat, std_error) = if used == 0 {
            (f64::NAN, f64::NAN)
        } else {
            let p = left as f64 / used as f64;
            (p, (p * (1.0 - p) / used as f64).sqrt())
        };
        Self {
            p_hat,
            std_error,
            n,
            censored_count: censored,
            reliable: used > 0 && censored as f64 <= MAX_CENSORED_FRACTION * n as f64,
        }
    }

    /// The estimate, or [`FppError::Censored`] when too many paths hit the horizon.
    pub fn checked(self) -> Result<Self> {
        if self.reliable {
            Ok(self)
        } else {
            Err(FppError::Censored {
                censored: self.censored_count,
                total: self.n,
            })
        }
    }

    pub fn within(&self, target: f64, n_se: f64) -> bool {
        (self.p_hat - target).abs() <= n_se * self.std_error
    }
}

/// JSON report of one estimate with its configuration echoed.
#[derive(Debug, Clone, Serialize)]
pub struct McReport {
    pub p_hat: f64,
    pub se: f64,
    pub n: usize,
    pub censored: usize,
    pub reliable: bool,
    pub start: Start,
    pub config: SimConfig,
    pub max_time: f64,
}

impl McReport {
    pub fn new(est: &EstimateWithError, start: Start, cfg: SimConfig, spec: &ProcessSpec) -> Self {
        Self {
            p_hat: est.p_hat,
            se: est.std_error,
            n: est.n,
            censored: est.censored_count,
            reliable: est.reliable,
            start,
            config: cfg,
            max_time: cfg.horizon(spec),
        }
    }
}

fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

fn next_epoch<R: Rng>(rng: &mut R, t: f64, rate: f64) -> f64 {
    if rate > 0.0 {
        let e: f64 = rng.sample(Exp1);
        t + e / rate
    } else {
        f64::INFINITY
    }
}

fn run_path<R: Rng>(spec: &ProcessSpec, x0: f64, dt: f64, horizon: f64, rng: &mut R) -> ExitSample {
    let (a, b) = (spec.interval.a(), spec.interval.b());
    let classify = |x: f64| {
        if x <= a {
            Some(ExitSide::Left)
        } else if x >= b {
            Some(ExitSide::Right)
        } else {
            None
        }
    };
    let done = |side, time, place| ExitSample {
        start: x0,
        side,
        time,
        place,
    };
    if let Some(side) = classify(x0) {
        return done(side, 0.0, x0);
    }
    let up = spec.up_jumps.active();
    let down = spec.down_jumps.active();
    let mut t_up = next_epoch(rng, 0.0, up.map_or(0.0, |s| s.0));
    let mut t_down = next_epoch(rng, 0.0, down.map_or(0.0, |s| s.0));
    let (mut t, mut x) = (0.0_f64, x0);
    while t < horizon {
        let epoch = t_up.min(t_down);
        let jump_now = epoch - t <= dt;
        let step = if jump_now { epoch - t } else { dt }.min(horizon - t);
        if step > 0.0 {
            let z: f64 = rng.sample(StandardNormal);
            x += spec.drift(x) * step + spec.sigma(x) * step.sqrt() * z;
            t += step;
            if let Some(side) = classify(x) {
                return done(side, t, x);
            }
        }
        if jump_now && epoch <= horizon {
            t = epoch;
            let u: f64 = rng.random();
            // the jump size depends on the pre-jump state X(t⁻)
            if t_up <= t_down {
                let (rate, kernel) = up.unwrap();
                x += kernel.sample(x, u);
                t_up = next_epoch(rng, t, rate);
            } else {
                let (rate, kernel) = down.unwrap();
                x += kernel.sample(x, u);
                t_down = next_epoch(rng, t, rate);
            }
            if let Some(side) = classify(x) {
                return done(side, t, x);
            }
        }
    }
    done(ExitSide::Censored, t, x)
}

fn sample_start<R: Rng>(g: &DensitySpec, rng: &mut R) -> f64 {
    match g {
        DensitySpec::Tabulated(t) => t.quantile(rng.random()),
        _ => {
            let (alpha, beta, lo, hi) = g.beta_shape().unwrap();
            let u = if alpha == 1.0 && beta == 1.0 {
                rng.random()
            } else {
                let ga: f64 = rng.sample(Gamma::new(alpha, 1.0).unwrap());
                let gb: f64 = rng.sample(Gamma::new(beta, 1.0).unwrap());
                ga / (ga + gb)
            };
            lo + (hi - lo) * u
        }
    }
}

fn check_start(spec: &ProcessSpec, start: &Start) -> Result<()> {
    let iv = spec.interval;
    match start {
        Start::Fixed(x) => {
            if !(*x >= iv.a() && *x <= iv.b()) {
                return Err(invalid(format!("start {x} outside [{}, {}]", iv.a(), iv.b())));
            }
        }
        Start::Density(g) => {
            g.validate()?;
            let (lo, hi) = g.support();
            if lo < iv.a() || hi > iv.b() {
                return Err(invalid(format!(
                    "density support [{lo}, {hi}] not inside [{}, {}]",
                    iv.a(),
                    iv.b()
                )));
            }
        }
    }
    Ok(())
}

/// Simulates path `path_index` from `x0` until it leaves `(a, b)`.
pub fn simulate_exit(spec: &ProcessSpec, x0: f64, cfg: &SimConfig, path_index: u64) -> ExitSample {
    let mut rng = path_rng(cfg.seed, path_index);
    run_path(spec, x0, cfg.dt, cfg.horizon(spec), &mut rng)
}

fn simulate_one(spec: &ProcessSpec, start: &Start, dt: f64, horizon: f64, seed: u64, i: u64) -> ExitSample {
    let mut rng = path_rng(seed, i);
    let x0 = match start {
        Start::Fixed(x) => *x,
        Start::Density(g) => sample_start(g, &mut rng),
    };
    run_path(spec, x0, dt, horizon, &mut rng)
}

/// Worker count from `FPP_THREADS`, if set to a positive integer.
pub fn env_threads() -> Option<usize> {
    std::env::var("FPP_THREADS")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .filter(|&n: &usize| n > 0)
}

fn with_workers<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| invalid(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
        None => Ok(job()),
    }
}

/// Estimates `P(X(τ) ≤ a)` using the worker cap from `FPP_THREADS`.
///
/// The estimate is returned even when more than 1% of paths are censored;
/// `reliable` is then false and [`EstimateWithError::checked`] turns it into
/// an error.
pub fn estimate_pia(spec: &ProcessSpec, start: &Start, cfg: &SimConfig) -> Result<EstimateWithError> {
    estimate_pia_with_workers(spec, start, cfg, env_threads())
}

/// As [`estimate_pia`] on a dedicated pool of `workers` threads.
pub fn estimate_pia_with_workers(
    spec: &ProcessSpec,
    start: &Start,
    cfg: &SimConfig,
    workers: Option<usize>,
) -> Result<EstimateWithError> {
    cfg.validate()?;
    check_start(spec, start)?;
    let horizon = cfg.horizon(spec);
    let (l, r, c) = with_workers(workers, || {
        (0..cfg.n_paths as u64)
            .into_par_iter()
            .map(|i| match simulate_one(spec, start, cfg.dt, horizon, cfg.seed, i).side {
                ExitSide::Left => (1usize, 0usize, 0usize),
                ExitSide::Right => (0, 1, 0),
                ExitSide::Censored => (0, 0, 1),
            })
            .reduce(|| (0, 0, 0), |x, y| (x.0 + y.0, x.1 + y.1, x.2 + y.2))
    })?;
    Ok(EstimateWithError::from_counts(l, r, c))
}

/// Every path's exit sample, in path order.
pub fn simulate_samples(spec: &ProcessSpec, start: &Start, cfg: &SimConfig) -> Result<Vec<ExitSample>> {
    cfg.validate()?;
    check_start(spec, start)?;
    let horizon = cfg.horizon(spec);
    with_workers(env_threads(), || {
        (0..cfg.n_paths as u64)
            .into_par_iter()
            .map(|i| simulate_one(spec, start, cfg.dt, horizon, cfg.seed, i))
            .collect()
    })
}

/// CSV with columns `path,start,side,time,place`.
pub fn write_samples_csv<W: Write>(samples: &[ExitSample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["path", "start", "side", "time", "place"])?;
    for (i, s) in samples.iter().enumerate() {
        let side = match s.side {
            ExitSide::Left => "left",
            ExitSide::Right => "right",
            ExitSide::Censored => "censored",
        };
        w.write_record([
            i.to_string(),
            s.start.to_string(),
            side.to_string(),
            s.time.to_string(),
            s.place.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_example, ExampleParams, Interval};

    fn cfg(n: usize, seed: u64) -> SimConfig {
        SimConfig::new(1e-3, n, seed).unwrap()
    }

    #[test]
    fn config_rejects_bad_values() {
        assert!(SimConfig::new(0.0, 10, 1).is_err());
        assert!(SimConfig::new(1e-3, 0, 1).is_err());
    }

    #[test]
    fn horizon_heuristic_is_capped() {
        let c = SimConfig::default();
        let bm = ProcessSpec::brownian(Interval::unit());
        assert_eq!(c.horizon(&bm), 100.0);
        assert_eq!(c.horizon(&ProcessSpec::jump_free_cir()), 1e4);
        let fixed = SimConfig {
            max_time: Some(3.0),
            ..c
        };
        assert_eq!(fixed.horizon(&bm), 3.0);
    }

    #[test]
    fn single_path_is_degenerate() {
        let spec = ProcessSpec::brownian(Interval::unit());
        let e = estimate_pia(&spec, &Start::Fixed(0.5), &cfg(1, 3)).unwrap();
        assert!(e.p_hat == 0.0 || e.p_hat == 1.0);
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn starting_outside_exits_immediately() {
        let spec = ProcessSpec::brownian(Interval::unit());
        let s = simulate_exit(&spec, 0.0, &cfg(1, 0), 0);
        assert_eq!((s.side, s.time), (ExitSide::Left, 0.0));
        let s = simulate_exit(&spec, 1.0, &cfg(1, 0), 0);
        assert_eq!(s.side, ExitSide::Right);
        assert!(estimate_pia(&spec, &Start::Fixed(1.5), &cfg(1, 0)).is_err());
    }

    #[test]
    fn same_path_index_same_sample() {
        let spec = build_example(1, &ExampleParams::default()).unwrap();
        let c = cfg(1, 11);
        assert_eq!(simulate_exit(&spec, 0.4, &c, 17), simulate_exit(&spec, 0.4, &c, 17));
        assert_ne!(simulate_exit(&spec, 0.4, &c, 17), simulate_exit(&spec, 0.4, &c, 18));
    }

    #[test]
    fn counts_do_not_depend_on_workers() {
        let spec = build_example(7, &ExampleParams::default()).unwrap();
        let c = cfg(2000, 5);
        let start = Start::Fixed(0.5);
        let one = estimate_pia_with_workers(&spec, &start, &c, Some(1)).unwrap();
        let three = estimate_pia_with_workers(&spec, &start, &c, Some(3)).unwrap();
        assert_eq!(one, three);
    }

    #[test]
    fn exit_places_are_legal() {
        let spec = build_example(2, &ExampleParams::default()).unwrap();
        let samples = simulate_samples(&spec, &Start::Fixed(0.3), &cfg(500, 2)).unwrap();
        for s in samples {
            match s.side {
                ExitSide::Left => assert!(s.place <= 0.0),
                ExitSide::Right => assert!(s.place >= 1.0),
                ExitSide::Censored => panic!("censored path"),
            }
        }
    }

    #[test]
    fn example6_jump_forces_right_exit() {
        let p = ExampleParams {
            lambda1: 1e6,
            ..Default::default()
        };
        let spec = build_example(6, &p).unwrap();
        for i in 0..50 {
            let s = simulate_exit(&spec, 0.3, &cfg(1, 9), i);
            assert_eq!(s.side, ExitSide::Right);
            assert!(s.place > 4.0 && s.place < 5.0, "{}", s.place);
        }
    }

    #[test]
    fn beta_starts_have_the_right_mean() {
        let g = DensitySpec::ModifiedBeta {
            alpha: 2.0,
            beta: 5.0,
            a: 1.0,
            b: 3.0,
        };
        let mut rng = path_rng(1, 0);
        let n = 40_000;
        let xs: Vec<f64> = (0..n).map(|_| sample_start(&g, &mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        // mean 1 + 2·2/7, sd of the draw ≈ 0.32
        assert!((mean - (1.0 + 4.0 / 7.0)).abs() < 4.0 * 0.32 / (n as f64).sqrt());
        assert!(xs.iter().all(|&x| x > 1.0 && x < 3.0));
    }

    #[test]
    fn brownian_midpoint_is_fair() {
        let spec = ProcessSpec::brownian(Interval::unit());
        let e = estimate_pia(&spec, &Start::Fixed(0.5), &cfg(20_000, 1)).unwrap();
        assert!(e.within(0.5, 4.0), "{e:?}");
        assert!(e.reliable);
    }

    #[test]
    fn censoring_is_flagged() {
        let spec = ProcessSpec::brownian(Interval::new(0.0, 100.0).unwrap());
        let c = SimConfig {
            max_time: Some(0.01),
            ..cfg(20, 0)
        };
        let e = estimate_pia(&spec, &Start::Fixed(50.0), &c).unwrap();
        assert_eq!(e.censored_count, 20);
        assert!(!e.reliable);
        assert!(matches!(e.checked(), Err(FppError::Censored { .. })));
    }

    #[test]
    fn samples_csv_header() {
        let spec = ProcessSpec::brownian(Interval::unit());
        let s = simulate_samples(&spec, &Start::Fixed(0.5), &cfg(3, 0)).unwrap();
        let mut buf = Vec::new();
        write_samples_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("path,start,side,time,place\n"));
        assert_eq!(text.lines().count(), 4);
    }
}
