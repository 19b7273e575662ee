//! Fit of `(sigma, theta, rho)` to one expiry of a delta-quoted smile with
//! `v0` and `kappa` held fixed.
//!
//! Pillar strikes are retrieved once from the market vols. The objective is
//! the sum of squared differences between market and model implied vols at
//! those strikes, minimized by a Nelder-Mead simplex in the unconstrained
//! coordinates `(ln sigma, ln theta, atanh rho)`.

use serde::{Deserialize, Serialize};

use crate::analytic::{vanilla_price, CfFormulation};
use crate::black::{gk_price, norm_inv};
use crate::error::{Error, Result};
use crate::params::{HestonParams, MarketEnv, OptionKind, VanillaOption};
use crate::quadrature::QuadratureConfig;
use crate::variance::{feller_check, forward_correlation, forward_vol_of_vol, FellerReport};

pub const DEFAULT_PILLARS: [f64; 5] = [-0.10, -0.25, 0.50, 0.25, 0.10];
pub const DEFAULT_KAPPA: f64 = 1.5;
/// Mean reversion suggested for a second fit when the first one breaks the
/// Feller condition.
pub const RERUN_KAPPA: f64 = 3.0;

const VOL_LO: f64 = 1e-4;
const VOL_HI: f64 = 5.0;
const MAX_BISECTIONS: usize = 200;
/// Objective value for parameter sets the pricer cannot handle.
const PENALTY: f64 = 1e6;

/// Signed spot delta (calls positive) and its quoted vol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmileQuote {
    pub delta_pillar: f64,
    pub implied_vol: f64,
}

impl SmileQuote {
    pub fn kind(&self) -> OptionKind {
        if self.delta_pillar > 0.0 {
            OptionKind::Call
        } else {
            OptionKind::Put
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmileSlice {
    pub tau: f64,
    pub quotes: Vec<SmileQuote>,
}

impl SmileSlice {
    pub fn new(tau: f64, quotes: Vec<SmileQuote>) -> Result<Self> {
        let s = SmileSlice { tau, quotes };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::InvalidConfig(format!("slice tenor {} must be positive", self.tau)));
        }
        if self.quotes.is_empty() {
            return Err(Error::InvalidConfig("slice has no quotes".into()));
        }
        for (i, q) in self.quotes.iter().enumerate() {
            if !(q.delta_pillar.abs() > 0.0 && q.delta_pillar.abs() < 1.0) {
                return Err(Error::InvalidConfig(format!("delta {} not in (0, 1)", q.delta_pillar)));
            }
            if !(q.implied_vol > 0.0) || !q.implied_vol.is_finite() {
                return Err(Error::InvalidConfig(format!("quote vol {} must be positive", q.implied_vol)));
            }
            if self.quotes[..i].iter().any(|o| o.delta_pillar == q.delta_pillar) {
                return Err(Error::InvalidConfig(format!("duplicate delta pillar {}", q.delta_pillar)));
            }
        }
        Ok(())
    }

    /// Vol of the pillar closest to 50 delta.
    pub fn atm_vol(&self) -> f64 {
        self.quotes
            .iter()
            .min_by(|a, b| {
                let da = (a.delta_pillar.abs() - 0.5).abs();
                let db = (b.delta_pillar.abs() - 0.5).abs();
                da.total_cmp(&db)
            })
            .map(|q| q.implied_vol)
            .unwrap_or(f64::NAN)
    }
}

/// `K = S exp(-phi N^-1(phi delta e^{rf tau}) vol sqrt(tau) + (rd - rf + vol^2/2) tau)`.
pub fn strike_from_delta(env: &MarketEnv, tau: f64, delta: f64, vol: f64) -> Result<f64> {
    let bound = (-env.rf * tau).exp();
    if !(delta.abs() > 0.0 && delta.abs() < bound) {
        return Err(Error::DeltaOutOfRange { delta, bound });
    }
    if !(vol > 0.0) {
        return Err(Error::InvalidConfig(format!("vol {vol} must be positive")));
    }
    let phi = delta.signum();
    let d1 = phi * norm_inv(phi * delta / bound);
    Ok(env.spot * (-d1 * vol * tau.sqrt() + (env.drift() + 0.5 * vol * vol) * tau).exp())
}

/// Garman-Kohlhagen implied vol by bisection on `[1e-4, 5]`.
pub fn implied_vol(env: &MarketEnv, opt: &VanillaOption, price: f64) -> Result<f64> {
    let opt = opt.validate()?;
    let fwd_s = env.spot * (-env.rf * opt.tau).exp();
    let fwd_k = opt.strike * (-env.rd * opt.tau).exp();
    let (lo, hi) = match opt.kind {
        OptionKind::Call => ((fwd_s - fwd_k).max(0.0), fwd_s),
        OptionKind::Put => ((fwd_k - fwd_s).max(0.0), fwd_k),
    };
    if !(price > lo && price < hi) {
        return Err(Error::PriceOutOfBand { price, lo, hi });
    }
    let f = |v: f64| gk_price(env, opt.strike, opt.tau, v, opt.kind) - price;
    let (mut a, mut b) = (VOL_LO, VOL_HI);
    if f(a) > 0.0 || f(b) < 0.0 {
        return Err(Error::PriceOutOfBand {
            price,
            lo: f(a) + price,
            hi: f(b) + price,
        });
    }
    for _ in 0..MAX_BISECTIONS {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            return Ok(m);
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Err(Error::BracketExhausted(MAX_BISECTIONS))
}

/// Pillar strikes from the market vols, with the option type of each pillar.
pub fn pillar_strikes(env: &MarketEnv, slice: &SmileSlice) -> Result<Vec<VanillaOption>> {
    slice
        .quotes
        .iter()
        .map(|q| {
            let k = strike_from_delta(env, slice.tau, q.delta_pillar, q.implied_vol)?;
            Ok(VanillaOption {
                strike: k,
                tau: slice.tau,
                kind: q.kind(),
            })
        })
        .collect()
}

/// Model implied vols at fixed options.
pub fn model_vols(
    p: &HestonParams,
    env: &MarketEnv,
    options: &[VanillaOption],
    quad: &QuadratureConfig,
) -> Result<Vec<f64>> {
    options
        .iter()
        .map(|opt| {
            let price = vanilla_price(p, env, opt, quad, CfFormulation::Transformed)?;
            implied_vol(env, opt, price)
        })
        .collect()
}

/// Model smile at the strikes implied by the slice's market quotes.
pub fn model_smile(
    p: &HestonParams,
    env: &MarketEnv,
    slice: &SmileSlice,
    quad: &QuadratureConfig,
) -> Result<Vec<f64>> {
    slice.validate()?;
    model_vols(p, env, &pillar_strikes(env, slice)?, quad)
}

/// Quotes generated by a parameter set at the given delta pillars. Each
/// pillar's strike is consistent with its own model vol.
pub fn synthetic_slice(
    p: &HestonParams,
    env: &MarketEnv,
    tau: f64,
    deltas: &[f64],
    quad: &QuadratureConfig,
) -> Result<SmileSlice> {
    let quotes = deltas
        .iter()
        .map(|&delta| {
            // Fixed point vol -> strike -> model vol; contracts quickly since
            // the smile is flat to first order in the strike.
            let kind = if delta > 0.0 { OptionKind::Call } else { OptionKind::Put };
            let mut vol = p.v0.sqrt().max(0.05);
            for _ in 0..100 {
                let k = strike_from_delta(env, tau, delta, vol)?;
                let opt = VanillaOption { strike: k, tau, kind };
                let price = vanilla_price(p, env, &opt, quad, CfFormulation::Transformed)?;
                let next = implied_vol(env, &opt, price)?;
                let done = (next - vol).abs() < 1e-15;
                vol = next;
                if done {
                    break;
                }
            }
            Ok(SmileQuote {
                delta_pillar: delta,
                implied_vol: vol,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SmileSlice::new(tau, quotes)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialGuess {
    pub sigma: f64,
    pub theta: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOptions {
    pub max_evals: usize,
    /// Simplex diameter in transformed coordinates.
    pub x_tol: f64,
    /// Spread of objective values over the simplex.
    pub f_tol: f64,
    /// Per-pillar weights; equal weights when absent.
    pub weights: Option<Vec<f64>>,
    pub quad: QuadratureConfig,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions {
            max_evals: 2000,
            x_tol: 1e-8,
            f_tol: 1e-12,
            weights: None,
            quad: QuadratureConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub tau: f64,
    pub sigma: f64,
    pub theta: f64,
    pub rho: f64,
    pub v0: f64,
    pub kappa: f64,
    /// Sum of the squared `per_pillar_errors`.
    pub sse: f64,
    /// `sqrt(w_i) (market vol - model vol)` per pillar.
    pub per_pillar_errors: Vec<f64>,
    pub strikes: Vec<f64>,
    pub market_vols: Vec<f64>,
    pub model_vols: Vec<f64>,
    pub feller: FellerReport,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Set to the suggested `kappa` for a re-run when the fit breaks the
    /// Feller condition.
    pub recommended_kappa: Option<f64>,
    /// Best objective value after each simplex iteration.
    pub trace: Vec<f64>,
}

impl CalibrationResult {
    pub fn params(&self) -> HestonParams {
        HestonParams {
            kappa: self.kappa,
            theta: self.theta,
            sigma: self.sigma,
            rho: self.rho,
            v0: self.v0,
            lambda: 0.0,
        }
    }
}

fn to_params(x: &[f64; 3], v0: f64, kappa: f64) -> HestonParams {
    HestonParams {
        kappa,
        theta: x[1].exp(),
        sigma: x[0].exp(),
        rho: x[2].tanh(),
        v0,
        lambda: 0.0,
    }
}

struct Objective<'a> {
    env: &'a MarketEnv,
    options: Vec<VanillaOption>,
    market: Vec<f64>,
    weights: Vec<f64>,
    quad: &'a QuadratureConfig,
    v0: f64,
    kappa: f64,
    evals: usize,
}

impl Objective<'_> {
    fn errors(&self, p: &HestonParams) -> Result<(Vec<f64>, Vec<f64>)> {
        let model = model_vols(p, self.env, &self.options, self.quad)?;
        let errs = self
            .market
            .iter()
            .zip(&model)
            .zip(&self.weights)
            .map(|((m, v), w)| w.sqrt() * (m - v))
            .collect();
        Ok((errs, model))
    }

    fn value(&mut self, x: &[f64; 3]) -> f64 {
        self.evals += 1;
        let p = to_params(x, self.v0, self.kappa);
        if p.validate().is_err() {
            return PENALTY;
        }
        match self.errors(&p) {
            Ok((e, _)) => e.iter().map(|e| e * e).sum(),
            Err(_) => PENALTY,
        }
    }
}

/// Minimizer state reported back to the caller.
pub struct SimplexOutcome {
    pub x: [f64; 3],
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<f64>,
}

/// Nelder-Mead with the usual coefficients (1, 2, 1/2, 1/2).
pub fn nelder_mead<F: FnMut(&[f64; 3]) -> f64>(
    mut f: F,
    x0: [f64; 3],
    step: f64,
    max_evals: usize,
    x_tol: f64,
    f_tol: f64,
) -> SimplexOutcome {
    let mut evals = 0;
    let mut eval = |x: &[f64; 3], evals: &mut usize| {
        *evals += 1;
        f(x)
    };
    let mut simplex: Vec<([f64; 3], f64)> = Vec::with_capacity(4);
    simplex.push((x0, eval(&x0, &mut evals)));
    for i in 0..3 {
        let mut x = x0;
        x[i] += step;
        simplex.push((x, eval(&x, &mut evals)));
    }
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0];
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| (0..3).map(|i| (x[i] - best.0[i]).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if diameter < x_tol && simplex[3].1 - best.1 < f_tol {
            converged = true;
            break;
        }
        if evals >= max_evals {
            break;
        }
        iterations += 1;
        let mut c = [0.0; 3];
        for (x, _) in &simplex[..3] {
            for i in 0..3 {
                c[i] += x[i] / 3.0;
            }
        }
        let worst = simplex[3];
        let along = |t: f64| -> [f64; 3] { std::array::from_fn(|i| c[i] + t * (worst.0[i] - c[i])) };
        let xr = along(-1.0);
        let fr = eval(&xr, &mut evals);
        if fr < best.1 {
            let xe = along(-2.0);
            let fe = eval(&xe, &mut evals);
            simplex[3] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[2].1 {
            simplex[3] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let x = along(-0.5);
                (x, eval(&x, &mut evals))
            } else {
                let x = along(0.5);
                (x, eval(&x, &mut evals))
            };
            if fc < worst.1.min(fr) {
                simplex[3] = (xc, fc);
            } else {
                for k in 1..4 {
                    let x: [f64; 3] = std::array::from_fn(|i| best.0[i] + 0.5 * (simplex[k].0[i] - best.0[i]));
                    simplex[k] = (x, eval(&x, &mut evals));
                }
            }
        }
        trace.push(simplex.iter().map(|s| s.1).fold(f64::INFINITY, f64::min));
    }
    SimplexOutcome {
        x: simplex[0].0,
        f: simplex[0].1,
        iterations,
        converged,
        trace,
    }
}

/// Fits `(sigma, theta, rho)`. `fixed_v0` defaults to the squared ATM vol,
/// `fixed_kappa` to 1.5 and the start to `(0.3, atm^2, 0)`.
pub fn calibrate_slice(
    slice: &SmileSlice,
    env: &MarketEnv,
    fixed_v0: Option<f64>,
    fixed_kappa: Option<f64>,
    initial_guess: Option<InitialGuess>,
    options: &CalibrationOptions,
) -> Result<CalibrationResult> {
    slice.validate()?;
    env.validate()?;
    if slice.quotes.len() < 3 {
        return Err(Error::DegenerateSlice(slice.quotes.len()));
    }
    options.quad.validate()?;
    let n = slice.quotes.len();
    let weights = match &options.weights {
        Some(w) if w.len() != n || w.iter().any(|x| !(*x > 0.0) || !x.is_finite()) => {
            return Err(Error::InvalidConfig(format!(
                "expected {n} positive weights, got {w:?}"
            )));
        }
        Some(w) => w.clone(),
        None => vec![1.0; n],
    };
    let atm = slice.atm_vol();
    let v0 = fixed_v0.unwrap_or(atm * atm);
    let kappa = fixed_kappa.unwrap_or(DEFAULT_KAPPA);
    let guess = initial_guess.unwrap_or(InitialGuess {
        sigma: 0.3,
        theta: atm * atm,
        rho: 0.0,
    });
    HestonParams::new(kappa, guess.theta, guess.sigma, guess.rho, v0)?;

    let strikes = pillar_strikes(env, slice)?;
    let mut obj = Objective {
        env,
        options: strikes.clone(),
        market: slice.quotes.iter().map(|q| q.implied_vol).collect(),
        weights,
        quad: &options.quad,
        v0,
        kappa,
        evals: 0,
    };
    let x0 = [guess.sigma.ln(), guess.theta.ln(), guess.rho.atanh()];
    let out = nelder_mead(
        |x| obj.value(x),
        x0,
        0.25,
        options.max_evals,
        options.x_tol,
        options.f_tol,
    );
    let p = to_params(&out.x, v0, kappa);
    let (errs, model) = obj.errors(&p)?;
    let feller = feller_check(&p);
    Ok(CalibrationResult {
        tau: slice.tau,
        sigma: p.sigma,
        theta: p.theta,
        rho: p.rho,
        v0,
        kappa,
        sse: errs.iter().map(|e| e * e).sum(),
        per_pillar_errors: errs,
        strikes: strikes.iter().map(|o| o.strike).collect(),
        market_vols: obj.market.clone(),
        model_vols: model,
        recommended_kappa: if feller.satisfied { None } else { Some(RERUN_KAPPA) },
        feller,
        iterations: out.iterations,
        evaluations: obj.evals,
        converged: out.converged,
        trace: out.trace,
    })
}

/// Forward parameters on `(t1, t2]` between consecutive fitted tenors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardEntry {
    pub t1: f64,
    pub t2: f64,
    /// `Err` carries the error name when the term inputs are inconsistent.
    pub forward_sigma: std::result::Result<f64, String>,
    pub forward_rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceResult {
    pub slices: Vec<std::result::Result<CalibrationResult, String>>,
    pub forwards: Vec<ForwardEntry>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SurfaceOptions {
    pub fixed_v0: Option<f64>,
    pub fixed_kappa: Option<f64>,
    pub calibration: CalibrationOptions,
}

/// Independent slice fits, plus forward vol-of-vol and correlation between
/// consecutive tenors that both fitted. The forward formula takes the
/// spot variance from the shortest slice and the long-run variance of the
/// later tenor.
pub fn calibrate_surface(
    slices: &[SmileSlice],
    env: &MarketEnv,
    opts: &SurfaceOptions,
) -> Result<SurfaceResult> {
    if slices.windows(2).any(|w| !(w[0].tau < w[1].tau)) {
        return Err(Error::InvalidConfig("slice tenors must be strictly increasing".into()));
    }
    let fits: Vec<_> = slices
        .iter()
        .map(|s| {
            calibrate_slice(s, env, opts.fixed_v0, opts.fixed_kappa, None, &opts.calibration)
                .map_err(|e| e.name().to_string())
        })
        .collect();
    let mut forwards = Vec::new();
    let spot_var = fits.iter().find_map(|f| f.as_ref().ok().map(|r| r.v0));
    for w in fits.windows(2) {
        if let (Ok(a), Ok(b), Some(v0)) = (&w[0], &w[1], spot_var) {
            let forward_sigma = forward_vol_of_vol(a.sigma, b.sigma, a.tau, b.tau, b.kappa, b.theta, v0)
                .map_err(|e| e.name().to_string());
            forwards.push(ForwardEntry {
                t1: a.tau,
                t2: b.tau,
                forward_sigma,
                forward_rho: forward_correlation(a.rho, b.rho, a.tau, b.tau)?,
            });
        }
    }
    Ok(SurfaceResult { slices: fits, forwards })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::black::gk_spot_delta;

    fn fig1_env() -> MarketEnv {
        MarketEnv::new(4.0, 0.05, 0.03).unwrap()
    }

    #[test]
    fn strike_from_delta_examples() {
        let env = MarketEnv::new(1.0, 0.0, 0.0).unwrap();
        let k = strike_from_delta(&env, 1.0, 0.5, 0.2).unwrap();
        assert!((k - 0.02f64.exp()).abs() < 1e-15);
        let bound = (-0.03f64 * 0.5).exp();
        // Saturating delta pushes the strike towards zero.
        let ks: Vec<f64> = [1e-2, 1e-6, 1e-12]
            .iter()
            .map(|e| strike_from_delta(&fig1_env(), 0.5, bound * (1.0 - e), 1.0).unwrap())
            .collect();
        assert!(ks[0] > ks[1] && ks[1] > ks[2] && ks[2] < 0.05);
        assert!(matches!(
            strike_from_delta(&fig1_env(), 0.5, bound, 0.1),
            Err(Error::DeltaOutOfRange { .. })
        ));
    }

    #[test]
    fn strike_from_delta_round_trip() {
        let env = fig1_env();
        for &(d, v) in &[(-0.25, 0.1), (0.25, 0.1), (-0.1, 0.3), (0.5, 0.15), (0.9, 0.2)] {
            let k = strike_from_delta(&env, 0.5, d, v).unwrap();
            let kind = if d > 0.0 { OptionKind::Call } else { OptionKind::Put };
            assert!((gk_spot_delta(&env, k, 0.5, v, kind) - d).abs() < 1e-12);
        }
    }

    #[test]
    fn implied_vol_round_trip_and_band() {
        let env = fig1_env();
        for kind in [OptionKind::Call, OptionKind::Put] {
            for k in [3.0, 4.0, 5.0] {
                let opt = VanillaOption { strike: k, tau: 0.5, kind };
                let price = gk_price(&env, k, 0.5, 0.2, kind);
                let v = implied_vol(&env, &opt, price).unwrap();
                assert!((v - 0.2).abs() < 1e-8);
                assert!((gk_price(&env, k, 0.5, v, kind) - price).abs() < 1e-10);
            }
        }
        let opt = VanillaOption::call(3.0, 0.5);
        let intrinsic = 4.0 * (-0.03f64 * 0.5).exp() - 3.0 * (-0.05f64 * 0.5).exp();
        assert!(matches!(
            implied_vol(&env, &opt, intrinsic - 1e-3),
            Err(Error::PriceOutOfBand { .. })
        ));
    }

    #[test]
    fn heston_atm_vol_near_long_run() {
        let env = fig1_env();
        let p = HestonParams::new(2.0, 0.04, 0.3, -0.05, 0.04).unwrap();
        let opt = VanillaOption::call(4.0, 0.5);
        let price = vanilla_price(&p, &env, &opt, &QuadratureConfig::default(), CfFormulation::Transformed)
            .unwrap();
        assert!((implied_vol(&env, &opt, price).unwrap() - 0.2).abs() < 0.02);
    }

    #[test]
    fn flat_smile_when_variance_is_deterministic() {
        let env = fig1_env();
        let p = HestonParams::new(1.5, 0.04, 1e-6, 0.0, 0.04).unwrap();
        let quad = QuadratureConfig::default();
        let slice = SmileSlice::new(
            0.5,
            DEFAULT_PILLARS.iter().map(|&d| SmileQuote { delta_pillar: d, implied_vol: 0.2 }).collect(),
        )
        .unwrap();
        for v in model_smile(&p, &env, &slice, &quad).unwrap() {
            assert!((v - 0.2).abs() < 1e-4);
        }
    }

    #[test]
    fn slice_validation() {
        let q = |d: f64| SmileQuote { delta_pillar: d, implied_vol: 0.1 };
        assert!(SmileSlice::new(0.5, vec![]).is_err());
        assert!(SmileSlice::new(0.5, vec![q(0.25), q(0.25)]).is_err());
        assert!(SmileSlice::new(0.5, vec![q(1.0)]).is_err());
        assert!(SmileSlice::new(0.0, vec![q(0.25)]).is_err());
        let two = SmileSlice::new(0.5, vec![q(0.25), q(-0.25)]).unwrap();
        assert!(matches!(
            calibrate_slice(&two, &fig1_env(), None, None, None, &CalibrationOptions::default()),
            Err(Error::DegenerateSlice(2))
        ));
    }

    #[test]
    fn simplex_minimizes_quadratic() {
        let out = nelder_mead(
            |x| (x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2) + 0.1 * (x[2] - 0.5).powi(2),
            [0.0; 3],
            0.5,
            5000,
            1e-10,
            1e-20,
        );
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-8 && (out.x[1] + 2.0).abs() < 1e-8);
        assert!(out.trace.windows(2).all(|w| w[1] <= w[0]));
    }
}
