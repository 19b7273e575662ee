//! Monte Carlo simulation of the spot/variance pair.
//!
//! Every path (or antithetic pair) draws from its own ChaCha stream selected
//! by its index, so results do not depend on how rayon splits the work.
//! Uniforms live on a symmetric 2^-53 lattice and normals come from the
//! inverse CDF, which makes the `u -> 1 - u` antithetic flip exact.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::black::norm_inv;
use crate::error::{Error, Result};
use crate::params::{validate_inputs, HestonParams, MarketEnv, VanillaOption};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum VarianceScheme {
    /// Euler step with `max(v, 0)` inside the square root and after the step.
    EulerAbsorbing,
    /// Euler step followed by `|v|`.
    EulerReflecting,
    /// Andersen's quadratic-exponential scheme.
    #[default]
    QuadraticExponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepCount {
    PerYear(usize),
    Total(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub scheme: VarianceScheme,
    pub n_paths: usize,
    pub steps: StepCount,
    pub horizon: f64,
    pub seed: u64,
    pub antithetic: bool,
    /// Draw `v0` from the stationary gamma law instead of using `p.v0`.
    #[serde(default)]
    pub stationary_start: bool,
}

impl SimConfig {
    /// QE, 100 steps per year, antithetic, seed 0.
    pub fn new(horizon: f64, n_paths: usize) -> Self {
        SimConfig {
            scheme: VarianceScheme::QuadraticExponential,
            n_paths,
            steps: StepCount::PerYear(100),
            horizon,
            seed: 0,
            antithetic: true,
            stationary_start: false,
        }
    }

    pub fn with_scheme(mut self, scheme: VarianceScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_steps(mut self, steps: StepCount) -> Self {
        self.steps = steps;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_antithetic(mut self, antithetic: bool) -> Self {
        self.antithetic = antithetic;
        self
    }

    pub fn with_stationary_start(mut self, on: bool) -> Self {
        self.stationary_start = on;
        self
    }

    pub fn n_steps(&self) -> usize {
        match self.steps {
            StepCount::PerYear(n) => ((n as f64 * self.horizon).ceil() as usize).max(1),
            StepCount::Total(n) => n,
        }
    }

    pub fn validate(self) -> Result<Self> {
        if self.n_paths < 2 {
            return Err(Error::InvalidConfig(format!("n_paths {} < 2", self.n_paths)));
        }
        if self.antithetic && self.n_paths % 2 != 0 {
            return Err(Error::InvalidConfig(format!(
                "antithetic sampling needs an even path count, got {}",
                self.n_paths
            )));
        }
        let steps = match self.steps {
            StepCount::PerYear(n) | StepCount::Total(n) => n,
        };
        if steps < 1 {
            return Err(Error::InvalidConfig("at least one time step is required".into()));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::InvalidConfig(format!("horizon {} must be positive", self.horizon)));
        }
        Ok(self)
    }

    fn paths_per_unit(&self) -> usize {
        if self.antithetic {
            2
        } else {
            1
        }
    }
}

/// Full trajectories, row-major with `n_steps + 1` columns per path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub spot_paths: Vec<f64>,
    pub var_paths: Vec<f64>,
    pub time_grid: Vec<f64>,
    pub n_paths: usize,
    pub config: SimConfig,
}

impl PathSet {
    pub fn n_cols(&self) -> usize {
        self.time_grid.len()
    }

    pub fn spot(&self, path: usize) -> &[f64] {
        let n = self.n_cols();
        &self.spot_paths[path * n..(path + 1) * n]
    }

    pub fn var(&self, path: usize) -> &[f64] {
        let n = self.n_cols();
        &self.var_paths[path * n..(path + 1) * n]
    }

    /// Terminal values and boundary statistics of the same paths.
    pub fn summary(&self) -> SimSummary {
        let n = self.n_cols();
        let mut out = SimSummary::with_capacity(self.config, self.n_paths);
        for i in 0..self.n_paths {
            let v = self.var(i);
            out.terminal_spot.push(self.spot(i)[n - 1]);
            out.terminal_var.push(v[n - 1]);
            out.min_var.push(v[1..].iter().copied().fold(f64::INFINITY, f64::min));
            out.zero_hits += v[1..].iter().filter(|&&x| x == 0.0).count();
        }
        out.observations = self.n_paths * (n - 1);
        out
    }
}

/// What survives of a simulation when the trajectories are not kept.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSummary {
    pub terminal_spot: Vec<f64>,
    pub terminal_var: Vec<f64>,
    /// Smallest variance seen after the start, per path.
    pub min_var: Vec<f64>,
    pub zero_hits: usize,
    pub observations: usize,
    pub config: SimConfig,
}

impl SimSummary {
    fn with_capacity(config: SimConfig, n: usize) -> Self {
        SimSummary {
            terminal_spot: Vec::with_capacity(n),
            terminal_var: Vec::with_capacity(n),
            min_var: Vec::with_capacity(n),
            zero_hits: 0,
            observations: 0,
            config,
        }
    }

    pub fn boundary_stats(&self) -> BoundaryStats {
        BoundaryStats {
            zero_fraction: self.zero_hits as f64 / self.observations as f64,
            min_var: self.min_var.clone(),
        }
    }

    /// Sample mean and standard error of `f` over terminal `(S, v)`, with
    /// antithetic pairs averaged first.
    pub fn estimate<F: Fn(f64, f64) -> f64>(&self, f: F) -> (f64, f64) {
        let vals: Vec<f64> = self
            .terminal_spot
            .iter()
            .zip(&self.terminal_var)
            .map(|(&s, &v)| f(s, v))
            .collect();
        mean_stderr(&vals, self.config.antithetic)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryStats {
    pub zero_fraction: f64,
    pub min_var: Vec<f64>,
}

pub fn boundary_stats(paths: &PathSet) -> BoundaryStats {
    paths.summary().boundary_stats()
}

/// Mean and its standard error; with `paired` the samples are averaged in
/// consecutive pairs before the variance is taken.
pub fn mean_stderr(vals: &[f64], paired: bool) -> (f64, f64) {
    let samples: Vec<f64> = if paired {
        vals.chunks_exact(2).map(|c| 0.5 * (c[0] + c[1])).collect()
    } else {
        vals.to_vec()
    };
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Uniform on `{(2k + 1) 2^-53}`, closed under `u -> 1 - u`.
fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    let k = rng.next_u64() >> 12;
    (2 * k + 1) as f64 * f64::EPSILON / 2.0
}

/// Risk-neutral variance drift `kappa* (theta* - v)` with the volatility
/// risk premium folded in.
fn effective_mean_reversion(p: &HestonParams) -> (f64, f64) {
    let k = p.kappa + p.lambda;
    (k, p.kappa * p.theta / k)
}

/// Independent uniforms for one step: spot driver and the orthogonal
/// variance driver.
fn draw_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    (uniform(rng), uniform(rng))
}

/// `(Z_s, Z_v)` with correlation `rho`, built as `Z_v = rho Z_s + sqrt(1 - rho^2) Z_perp`.
pub(crate) fn correlate(z_s: f64, z_perp: f64, rho: f64) -> f64 {
    rho * z_s + (1.0 - rho * rho).sqrt() * z_perp
}

struct Stepper {
    scheme: VarianceScheme,
    dt: f64,
    kappa: f64,
    theta: f64,
    sigma: f64,
    rho: f64,
    mu: f64,
    // QE constants
    ekd: f64,
    k0: f64,
    k1: f64,
    k2: f64,
    k3: f64,
    k4: f64,
}

const PSI_C: f64 = 1.5;

impl Stepper {
    fn new(p: &HestonParams, env: &MarketEnv, scheme: VarianceScheme, dt: f64) -> Self {
        let (kappa, theta) = effective_mean_reversion(p);
        let (sigma, rho) = (p.sigma, p.rho);
        let (g1, g2) = (0.5, 0.5);
        let c = kappa * rho / sigma - 0.5;
        Stepper {
            scheme,
            dt,
            kappa,
            theta,
            sigma,
            rho,
            mu: env.drift(),
            ekd: (-kappa * dt).exp(),
            k0: -rho * kappa * theta * dt / sigma,
            k1: g1 * dt * c - rho / sigma,
            k2: g2 * dt * c + rho / sigma,
            k3: g1 * dt * (1.0 - rho * rho),
            k4: g2 * dt * (1.0 - rho * rho),
        }
    }

    /// Advances `(log S, v)` by one step.
    fn step(&self, x: f64, v: f64, u_s: f64, u_v: f64) -> (f64, f64) {
        match self.scheme {
            VarianceScheme::EulerAbsorbing | VarianceScheme::EulerReflecting => {
                let z_s = norm_inv(u_s);
                let z_v = correlate(z_s, norm_inv(u_v), self.rho);
                let vp = v.max(0.0);
                let sq = (vp * self.dt).sqrt();
                let x1 = x + (self.mu - 0.5 * vp) * self.dt + sq * z_s;
                let raw = v + self.kappa * (self.theta - vp) * self.dt + self.sigma * sq * z_v;
                let v1 = if self.scheme == VarianceScheme::EulerAbsorbing {
                    raw.max(0.0)
                } else {
                    raw.abs()
                };
                (x1, v1)
            }
            VarianceScheme::QuadraticExponential => self.qe_step(x, v, u_s, u_v),
        }
    }

    fn qe_step(&self, x: f64, v: f64, u_s: f64, u_v: f64) -> (f64, f64) {
        let (kappa, theta, s2) = (self.kappa, self.theta, self.sigma * self.sigma);
        let e = self.ekd;
        let m = theta + (v - theta) * e;
        let s2v = v * s2 * e / kappa * (1.0 - e) + theta * s2 / (2.0 * kappa) * (1.0 - e) * (1.0 - e);
        let psi = s2v / (m * m);
        let big_a = self.k2 + 0.5 * self.k4;
        let (v1, log_m) = if psi <= PSI_C {
            let r = 2.0 / psi;
            let b2 = r - 1.0 + r.sqrt() * (r - 1.0).sqrt();
            let a = m / (1.0 + b2);
            let zv = norm_inv(u_v);
            let b = b2.sqrt();
            let v1 = a * (b + zv) * (b + zv);
            let log_m = if big_a * a < 0.5 {
                Some(big_a * b2 * a / (1.0 - 2.0 * big_a * a) - 0.5 * (1.0 - 2.0 * big_a * a).ln())
            } else {
                None
            };
            (v1, log_m)
        } else {
            let pz = (psi - 1.0) / (psi + 1.0);
            let beta = (1.0 - pz) / m;
            let v1 = if u_v <= pz {
                0.0
            } else {
                ((1.0 - pz) / (1.0 - u_v)).ln() / beta
            };
            let log_m = if big_a < beta {
                Some((pz + beta * (1.0 - pz) / (beta - big_a)).ln())
            } else {
                None
            };
            (v1, log_m)
        };
        // Martingale correction replaces K0 whenever the moment exists.
        let k0 = match log_m {
            Some(lm) => -lm - (self.k1 + 0.5 * self.k3) * v,
            None => self.k0,
        };
        let z = norm_inv(u_s);
        let x1 = x
            + self.mu * self.dt
            + k0
            + self.k1 * v
            + self.k2 * v1
            + (self.k3 * v + self.k4 * v1).max(0.0).sqrt() * z;
        (x1, v1)
    }
}

fn unit_rng(seed: u64, unit: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(unit as u64);
    rng
}

fn start_variance(p: &HestonParams, cfg: &SimConfig, rng: &mut ChaCha8Rng) -> f64 {
    if cfg.stationary_start {
        let (kappa, theta) = effective_mean_reversion(p);
        let s2 = p.sigma * p.sigma;
        Gamma::new(2.0 * kappa * theta / s2, s2 / (2.0 * kappa))
            .expect("validated parameters give a valid gamma law")
            .sample(rng)
    } else {
        p.v0
    }
}

/// Runs one work unit (a single path or an antithetic pair), handing every
/// state to `record(path_in_unit, step, spot, var)`.
fn run_unit<F: FnMut(usize, usize, f64, f64)>(
    p: &HestonParams,
    env: &MarketEnv,
    cfg: &SimConfig,
    stepper: &Stepper,
    unit: usize,
    mut record: F,
) {
    let n_steps = cfg.n_steps();
    let per = cfg.paths_per_unit();
    let mut rng = unit_rng(cfg.seed, unit);
    let v0 = start_variance(p, cfg, &mut rng);
    let x0 = env.spot.ln();
    let mut xs = [x0; 2];
    let mut vs = [v0; 2];
    for k in 0..per {
        record(k, 0, env.spot, v0);
    }
    for step in 1..=n_steps {
        let (u_s, u_v) = draw_pair(&mut rng);
        for k in 0..per {
            let (a, b) = if k == 0 { (u_s, u_v) } else { (1.0 - u_s, 1.0 - u_v) };
            let (x1, v1) = stepper.step(xs[k], vs[k], a, b);
            debug_assert!(v1 >= 0.0);
            xs[k] = x1;
            vs[k] = v1;
            record(k, step, x1.exp(), v1);
        }
    }
}

fn prepare(p: &HestonParams, env: &MarketEnv, cfg: &SimConfig) -> Result<(SimConfig, Stepper)> {
    validate_inputs(p, env)?;
    let cfg = cfg.validate()?;
    let stepper = Stepper::new(p, env, cfg.scheme, cfg.horizon / cfg.n_steps() as f64);
    Ok((cfg, stepper))
}

/// Simulates and keeps every trajectory.
pub fn simulate(p: &HestonParams, env: &MarketEnv, cfg: &SimConfig) -> Result<PathSet> {
    let (cfg, stepper) = prepare(p, env, cfg)?;
    let n_steps = cfg.n_steps();
    let cols = n_steps + 1;
    let per = cfg.paths_per_unit();
    let mut spot = vec![0.0; cfg.n_paths * cols];
    let mut var = vec![0.0; cfg.n_paths * cols];
    spot.par_chunks_mut(per * cols)
        .zip(var.par_chunks_mut(per * cols))
        .enumerate()
        .for_each(|(unit, (s, v))| {
            run_unit(p, env, &cfg, &stepper, unit, |k, step, si, vi| {
                s[k * cols + step] = si;
                v[k * cols + step] = vi;
            });
        });
    let dt = cfg.horizon / n_steps as f64;
    Ok(PathSet {
        spot_paths: spot,
        var_paths: var,
        time_grid: (0..cols).map(|i| i as f64 * dt).collect(),
        n_paths: cfg.n_paths,
        config: cfg,
    })
}

/// Simulates without storing trajectories; memory is linear in the path
/// count only. Gives the same numbers as `simulate(..).summary()`.
pub fn simulate_summary(p: &HestonParams, env: &MarketEnv, cfg: &SimConfig) -> Result<SimSummary> {
    let (cfg, stepper) = prepare(p, env, cfg)?;
    let n_steps = cfg.n_steps();
    let per = cfg.paths_per_unit();
    let n_units = cfg.n_paths / per;
    // (terminal spot, terminal var, min var, zero hits) per path
    let rows: Vec<[(f64, f64, f64, usize); 2]> = (0..n_units)
        .into_par_iter()
        .map(|unit| {
            let mut acc = [(0.0, 0.0, f64::INFINITY, 0usize); 2];
            run_unit(p, env, &cfg, &stepper, unit, |k, step, s, v| {
                if step == 0 {
                    return;
                }
                let a = &mut acc[k];
                a.2 = a.2.min(v);
                if v == 0.0 {
                    a.3 += 1;
                }
                if step == n_steps {
                    a.0 = s;
                    a.1 = v;
                }
            });
            acc
        })
        .collect();
    let mut out = SimSummary::with_capacity(cfg, cfg.n_paths);
    for row in &rows {
        for &(s, v, m, z) in &row[..per] {
            out.terminal_spot.push(s);
            out.terminal_var.push(v);
            out.min_var.push(m);
            out.zero_hits += z;
        }
    }
    out.observations = cfg.n_paths * n_steps;
    Ok(out)
}

/// Discounted payoff average and its standard error.
pub fn mc_price_summary(sum: &SimSummary, opt: &VanillaOption, env: &MarketEnv) -> Result<(f64, f64)> {
    let opt = opt.validate()?;
    let horizon = sum.config.horizon;
    if (opt.tau - horizon).abs() > 1e-12 * horizon.max(1.0) {
        return Err(Error::HorizonMismatch {
            tau: opt.tau,
            horizon,
        });
    }
    let df = (-env.rd * opt.tau).exp();
    let phi = opt.phi();
    let (m, se) = sum.estimate(|s, _| (phi * (s - opt.strike)).max(0.0));
    Ok((df * m, df * se))
}

pub fn mc_price(paths: &PathSet, opt: &VanillaOption, env: &MarketEnv) -> Result<(f64, f64)> {
    mc_price_summary(&paths.summary(), opt, env)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{vanilla_price, CfFormulation};
    use crate::quadrature::QuadratureConfig;

    fn fig1() -> (HestonParams, MarketEnv) {
        (
            HestonParams::new(2.0, 0.04, 0.3, -0.05, 0.04).unwrap(),
            MarketEnv::new(4.0, 0.05, 0.03).unwrap(),
        )
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(1.0, 1).validate().is_err());
        assert!(SimConfig::new(1.0, 3).validate().is_err());
        assert!(SimConfig::new(1.0, 3).with_antithetic(false).validate().is_ok());
        assert!(SimConfig::new(0.0, 4).validate().is_err());
        assert!(SimConfig::new(1.0, 4).with_steps(StepCount::Total(0)).validate().is_err());
        assert_eq!(SimConfig::new(0.5, 4).n_steps(), 50);
        assert_eq!(SimConfig::new(0.001, 4).n_steps(), 1);
    }

    #[test]
    fn uniforms_flip_exactly() {
        let mut rng = unit_rng(7, 3);
        for _ in 0..1000 {
            let u = uniform(&mut rng);
            assert!(u > 0.0 && u < 1.0);
            assert_eq!(1.0 - (1.0 - u), u);
            assert_eq!(norm_inv(1.0 - u), -norm_inv(u));
        }
    }

    #[test]
    fn same_seed_same_paths() {
        let (p, env) = fig1();
        let cfg = SimConfig::new(0.5, 200).with_seed(11);
        let a = simulate(&p, &env, &cfg).unwrap();
        let b = simulate(&p, &env, &cfg).unwrap();
        assert_eq!(a, b);
        let c = simulate(&p, &env, &cfg.with_seed(12)).unwrap();
        assert_ne!(a.spot_paths, c.spot_paths);
    }

    #[test]
    fn summary_matches_full_paths() {
        let (p, env) = fig1();
        for scheme in [
            VarianceScheme::EulerAbsorbing,
            VarianceScheme::EulerReflecting,
            VarianceScheme::QuadraticExponential,
        ] {
            for anti in [true, false] {
                let cfg = SimConfig::new(0.3, 64).with_scheme(scheme).with_antithetic(anti);
                let full = simulate(&p, &env, &cfg).unwrap().summary();
                assert_eq!(full, simulate_summary(&p, &env, &cfg).unwrap());
            }
        }
    }

    #[test]
    fn thread_count_does_not_matter() {
        let (p, env) = fig1();
        let cfg = SimConfig::new(0.5, 500);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| simulate_summary(&p, &env, &cfg).unwrap());
        let b = four.install(|| simulate_summary(&p, &env, &cfg).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn variance_stays_non_negative() {
        let p = HestonParams::new(0.5, 0.01, 0.3, -0.7, 0.01).unwrap();
        let env = MarketEnv::new(1.0, 0.0, 0.0).unwrap();
        for scheme in [
            VarianceScheme::EulerAbsorbing,
            VarianceScheme::EulerReflecting,
            VarianceScheme::QuadraticExponential,
        ] {
            let paths = simulate(&p, &env, &SimConfig::new(1.0, 400).with_scheme(scheme)).unwrap();
            assert!(paths.var_paths.iter().all(|&v| v >= 0.0));
            assert!(paths.spot_paths.iter().all(|&s| s > 0.0));
        }
    }

    #[test]
    fn drivers_have_target_correlation() {
        let rho = -0.6;
        let mut rng = unit_rng(1, 0);
        let n = 200_000;
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let (u1, u2) = draw_pair(&mut rng);
            let zs = norm_inv(u1);
            let zv = correlate(zs, norm_inv(u2), rho);
            sxy += zs * zv;
            sxx += zs * zs;
            syy += zv * zv;
        }
        let r = sxy / (sxx * syy).sqrt();
        assert!((r - rho).abs() < 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn deterministic_variance_limit() {
        let p = HestonParams::new(2.0, 0.04, 1e-12, 0.3, 0.04).unwrap();
        let env = MarketEnv::new(4.0, 0.05, 0.03).unwrap();
        let cfg = SimConfig::new(1.0, 20_000).with_antithetic(false);
        let paths = simulate(&p, &env, &cfg).unwrap();
        assert!(paths.var_paths.iter().all(|v| (v - 0.04).abs() < 1e-8));
        let sum = paths.summary();
        let n = sum.terminal_spot.len() as f64;
        let r: Vec<f64> = sum.terminal_spot.iter().map(|s| (s / 4.0).ln()).collect();
        let m = r.iter().sum::<f64>() / n;
        let var = r.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        // sd of the sample variance of a normal is var sqrt(2/(n-1))
        assert!((var - 0.04).abs() < 3.0 * 0.04 * (2.0 / (n - 1.0)).sqrt());
        assert_eq!(sum.boundary_stats().zero_fraction, 0.0);
    }

    #[test]
    fn discounted_forward_is_martingale() {
        let (p, env) = fig1();
        for scheme in [VarianceScheme::QuadraticExponential, VarianceScheme::EulerAbsorbing] {
            let cfg = SimConfig::new(1.0, 100_000).with_scheme(scheme);
            let sum = simulate_summary(&p, &env, &cfg).unwrap();
            let (m, se) = sum.estimate(|s, _| s * (-env.drift()).exp());
            assert!((m - 4.0).abs() < 3.0 * se, "{scheme:?}: {m} +- {se}");
        }
    }

    #[test]
    fn atm_price_and_parity() {
        let (p, env) = fig1();
        let sum = simulate_summary(&p, &env, &SimConfig::new(0.5, 200_000)).unwrap();
        let call = VanillaOption::call(4.0, 0.5);
        let (c, se) = mc_price_summary(&sum, &call, &env).unwrap();
        let exact = vanilla_price(&p, &env, &call, &QuadratureConfig::default(), CfFormulation::Transformed)
            .unwrap();
        assert!((c - exact).abs() < 3.0 * se, "{c} +- {se} vs {exact}");

        let df = (-env.rd * 0.5).exp();
        let (d, dse) = sum.estimate(|s, _| df * ((s - 4.0).max(0.0) - (4.0 - s).max(0.0)));
        let fwd = 4.0 * (-env.rf * 0.5f64).exp() - 4.0 * df;
        assert!((d - fwd).abs() < 3.0 * dse.max(1e-12));

        let zero = VanillaOption::call(1e-9, 0.5);
        let (z, zse) = mc_price_summary(&sum, &zero, &env).unwrap();
        assert!((z - 4.0 * (-env.rf * 0.5f64).exp()).abs() < 3.0 * zse);

        assert!(matches!(
            mc_price_summary(&sum, &VanillaOption::call(4.0, 1.0), &env),
            Err(Error::HorizonMismatch { .. })
        ));
    }

    #[test]
    fn terminal_variance_mean() {
        let (p, env) = fig1();
        let p = p.with_v0(0.02);
        let sum = simulate_summary(&p, &env, &SimConfig::new(1.0, 100_000)).unwrap();
        let (m, se) = sum.estimate(|_, v| v);
        let exact = 0.04 - 0.02 * (-2.0f64).exp();
        assert!((m - exact).abs() < 3.0 * se, "{m} +- {se} vs {exact}");
    }

    #[test]
    fn stationary_start_keeps_mean() {
        let (p, env) = fig1();
        let p = p.with_v0(0.5);
        let cfg = SimConfig::new(0.25, 100_000).with_stationary_start(true);
        let sum = simulate_summary(&p, &env, &cfg).unwrap();
        let (m, se) = sum.estimate(|_, v| v);
        assert!((m - 0.04).abs() < 3.0 * se);
    }

    #[test]
    fn feller_regimes_separate() {
        let env = MarketEnv::new(1.0, 0.0, 0.0).unwrap();
        let good = HestonParams::new(2.0, 0.04, 0.3, -0.05, 0.04).unwrap();
        let bad = HestonParams::new(0.5, 0.01, 0.3, -0.05, 0.01).unwrap();
        let euler = SimConfig::new(1.0, 20_000).with_scheme(VarianceScheme::EulerAbsorbing);
        let zg = simulate_summary(&good, &env, &euler).unwrap().boundary_stats().zero_fraction;
        let zb = simulate_summary(&bad, &env, &euler).unwrap().boundary_stats().zero_fraction;
        assert!(zb > 1e-3, "{zb}");
        assert!(zg < zb / 50.0, "{zg} vs {zb}");
        let qe = SimConfig::new(1.0, 20_000);
        assert!(simulate_summary(&good, &env, &qe).unwrap().boundary_stats().zero_fraction < 1e-4);
        assert!(simulate_summary(&bad, &env, &qe).unwrap().boundary_stats().zero_fraction > 1e-3);
    }
}
