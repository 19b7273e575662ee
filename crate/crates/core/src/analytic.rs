//! Semi-analytical valuation of FX vanillas.
//!
//! Prices are `phi (e^{-rf tau} S P_+ - K e^{-rd tau} P_-)` where the
//! probabilities `P_1`, `P_2` come from Fourier inversion of the closed-form
//! characteristic functions `f_j = exp(C_j + D_j v + i phi x)`. Two algebraic
//! forms of `C_j`, `D_j` are provided. The original form takes the principal
//! branch of a complex logarithm whose argument can wind around the origin
//! for long maturities; the transformed form (`g~ = 1/g`, flipped signs in
//! front of `d_j`) stays on a continuous branch and is the default.
//!
//! Greeks use their own integral representations; finite differences are
//! only used by the tests.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{validate_inputs, HestonParams, MarketEnv, VanillaOption};
use crate::quadrature::{integrate_half_line, QuadratureConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CfFormulation {
    Original,
    #[default]
    Transformed,
}

/// Selects `(u_j, b_j)`: `P_1` is the probability under the measure with the
/// foreign-discounted spot as numeraire, `P_2` the risk-neutral one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CfIndex {
    One,
    Two,
}

impl CfIndex {
    pub fn from_index(j: u8) -> Result<Self> {
        match j {
            1 => Ok(CfIndex::One),
            2 => Ok(CfIndex::Two),
            _ => Err(Error::InvalidConfig(format!("characteristic function index {j} not in {{1, 2}}"))),
        }
    }

    fn u(self) -> f64 {
        match self {
            CfIndex::One => 0.5,
            CfIndex::Two => -0.5,
        }
    }

    fn b(self, p: &HestonParams) -> f64 {
        match self {
            CfIndex::One => p.kappa + p.lambda - p.sigma * p.rho,
            CfIndex::Two => p.kappa + p.lambda,
        }
    }
}

/// Building blocks of `f_j` at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfTerms {
    /// `d_j`, principal square root.
    pub d: Complex64,
    /// `g_j` in the original form, `1/g_j` in the transformed one.
    pub g: Complex64,
    /// `C_j(tau, phi)`, including the `(rd - rf) i phi tau` carry term.
    pub c: Complex64,
    /// `D_j(tau, phi)`, the coefficient of the variance.
    pub dv: Complex64,
}

/// `cf_terms` at a complex frequency, as needed by the damped transform of
/// the FFT pricer.
pub fn cf_terms_complex(
    p: &HestonParams,
    env: &MarketEnv,
    tau: f64,
    w: Complex64,
    j: CfIndex,
    form: CfFormulation,
) -> CfTerms {
    let i = Complex64::i();
    let b = j.b(p);
    let u = j.u();
    let sigma2 = p.sigma * p.sigma;
    let rsi = p.rho * p.sigma * w * i;
    let a = b - rsi;
    // a^2 - d^2 = sigma^2 (2 u w i - w^2), which gives a - d without
    // cancellation when sigma is small.
    let spread = 2.0 * u * w * i - w * w;
    let d = (a * a - sigma2 * spread).sqrt();
    let a_plus_d = a + d;
    let zero = Complex64::new(0.0, 0.0);
    if w == zero {
        // f_j(0) = 1: both terms vanish in the zero-frequency limit.
        let g = match form {
            CfFormulation::Original => a_plus_d / (a - d),
            CfFormulation::Transformed => (a - d) / a_plus_d,
        };
        return CfTerms { d, g, c: zero, dv: zero };
    }
    // (a - d) / sigma^2
    let q = spread / a_plus_d;
    let carry = env.drift() * w * i * tau;
    let kt = p.kappa * p.theta;
    match form {
        CfFormulation::Original => {
            let a_minus_d = sigma2 * q;
            let g = a_plus_d / a_minus_d;
            let e = (d * tau).exp();
            let (log_term, dv) = if (d * tau).re < 300.0 {
                (
                    ((1.0 - g * e) / (1.0 - g)).ln(),
                    a_plus_d / sigma2 * (1.0 - e) / (1.0 - g * e),
                )
            } else {
                // e^{d tau} dominates; the leading-order terms are exact to rounding.
                ((-g / (1.0 - g)).ln() + d * tau, q)
            };
            CfTerms {
                d,
                g,
                c: carry + kt / sigma2 * (a_plus_d * tau - 2.0 * log_term),
                dv,
            }
        }
        CfFormulation::Transformed => {
            let g = q * sigma2 / a_plus_d;
            let one_minus_e = -exp_m1(-d * tau);
            let e = 1.0 - one_minus_e;
            // (1 - g e) / (1 - g) = 1 + z with z = g (1 - e) / (1 - g); z is
            // O(sigma^2) so the logarithm is taken through log(1+z)/z.
            let z_over_s2 = q / a_plus_d * one_minus_e / (1.0 - g);
            let z = z_over_s2 * sigma2;
            CfTerms {
                d,
                g,
                c: carry + kt * (q * tau - 2.0 * z_over_s2 * ln_1p_ratio(z)),
                dv: q * one_minus_e / (1.0 - g * e),
            }
        }
    }
}

/// `e^w - 1` without cancellation for small `|w|`.
fn exp_m1(w: Complex64) -> Complex64 {
    let (s, c) = w.im.sin_cos();
    let half = (0.5 * w.im).sin();
    Complex64::new(
        w.re.exp_m1() * c - 2.0 * half * half,
        w.re.exp() * s,
    )
}

/// `log(1 + z) / z` on the principal branch, `1` at `z = 0`.
fn ln_1p_ratio(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        // 1 - z/2 + z^2/3 - ...; 8 terms reach double precision.
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(0.0, 0.0);
        for k in 1..=8 {
            sum += term / k as f64;
            term *= -z;
        }
        sum
    } else {
        (1.0 + z).ln() / z
    }
}

pub fn cf_terms(
    p: &HestonParams,
    env: &MarketEnv,
    tau: f64,
    phi: f64,
    j: CfIndex,
    form: CfFormulation,
) -> CfTerms {
    cf_terms_complex(p, env, tau, Complex64::new(phi, 0.0), j, form)
}

/// `f_j(x, v, tau, w) = exp(C_j + D_j v + i w x)` at a complex frequency.
pub fn characteristic_fn_complex(
    p: &HestonParams,
    env: &MarketEnv,
    x: f64,
    v: f64,
    tau: f64,
    w: Complex64,
    j: CfIndex,
    form: CfFormulation,
) -> Complex64 {
    let t = cf_terms_complex(p, env, tau, w, j, form);
    (t.c + t.dv * v + Complex64::i() * w * x).exp()
}

/// `f_j(x, v, tau, phi)`; `f_2` is the risk-neutral characteristic function
/// of `log S_T` when `x = log S_t`.
#[allow(clippy::too_many_arguments)]
pub fn characteristic_fn(
    p: &HestonParams,
    env: &MarketEnv,
    x: f64,
    v: f64,
    tau: f64,
    phi: f64,
    j: CfIndex,
    form: CfFormulation,
) -> Complex64 {
    characteristic_fn_complex(p, env, x, v, tau, Complex64::new(phi, 0.0), j, form)
}

/// A discontinuity of `Im C_j` found by [`scan_c_continuity`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchJump {
    pub phi: f64,
    pub jump: f64,
}

/// Walks `phi` over `(0, phi_max]` in steps of `step` and reports every
/// increment of `Im C_j` larger than `pi kappa theta / sigma^2`. A principal
/// branch switch of the logarithm moves `C_j` by `4 pi kappa theta / sigma^2`.
pub fn scan_c_continuity(
    p: &HestonParams,
    env: &MarketEnv,
    tau: f64,
    j: CfIndex,
    form: CfFormulation,
    phi_max: f64,
    step: f64,
) -> Vec<BranchJump> {
    let threshold = PI * p.kappa * p.theta / (p.sigma * p.sigma);
    let n = (phi_max / step).round() as usize;
    let mut jumps = Vec::new();
    let mut prev = cf_terms(p, env, tau, step, j, form).c.im;
    for k in 2..=n {
        let phi = k as f64 * step;
        let cur = cf_terms(p, env, tau, phi, j, form).c.im;
        let delta = cur - prev;
        if !delta.is_finite() || delta.abs() > threshold {
            jumps.push(BranchJump { phi, jump: delta });
        }
        prev = cur;
    }
    jumps
}

// Step for the zero-frequency patch of the `1/(i phi)` integrands.
const ZERO_FREQ_STEP: f64 = 1e-3;

/// Integrates a set of even real spectral integrands over `[0, inf)`. The
/// value at `phi = 0` is replaced by the Richardson extrapolation
/// `(4 F(h) - F(2h)) / 3`, exact to `O(h^4)` for even functions.
fn integrate_spectral<const N: usize, F>(f: F, quad: &QuadratureConfig) -> Result<[f64; N]>
where
    F: Fn(f64) -> [f64; N],
{
    let g = |phi: f64| -> [f64; N] {
        if phi == 0.0 {
            let a = f(ZERO_FREQ_STEP);
            let b = f(2.0 * ZERO_FREQ_STEP);
            let mut out = [0.0; N];
            for k in 0..N {
                out[k] = (4.0 * a[k] - b[k]) / 3.0;
            }
            out
        } else {
            f(phi)
        }
    };
    integrate_half_line(g, quad)
}

/// `e^{-i phi y} f_j(x, v, tau, phi)` together with `D_j`. Underflow of the
/// exponential beyond the numerically relevant band returns exact zeros.
#[allow(clippy::too_many_arguments)]
fn shifted_cf(
    p: &HestonParams,
    env: &MarketEnv,
    x: f64,
    v: f64,
    tau: f64,
    y: f64,
    phi: f64,
    j: CfIndex,
    form: CfFormulation,
) -> (Complex64, Complex64) {
    let t = cf_terms(p, env, tau, phi, j, form);
    let z = t.c + t.dv * v + Complex64::new(0.0, phi * (x - y));
    if z.re < -745.0 {
        return (Complex64::new(0.0, 0.0), t.dv);
    }
    (z.exp(), t.dv)
}

fn check_common(p: &HestonParams, env: &MarketEnv, tau: f64) -> Result<()> {
    validate_inputs(p, env)?;
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::Invalid(crate::error::Violations(vec![
            crate::error::Violation::NonPositiveTau,
        ])));
    }
    Ok(())
}

/// `P_j(x, v, tau, y)`, the probability that `log S_T > y` under measure `j`.
#[allow(clippy::too_many_arguments)]
pub fn prob_p(
    p: &HestonParams,
    env: &MarketEnv,
    x: f64,
    v: f64,
    tau: f64,
    y: f64,
    j: CfIndex,
    quad: &QuadratureConfig,
    form: CfFormulation,
) -> Result<f64> {
    check_common(p, env, tau)?;
    let [val] = integrate_spectral(
        |phi| {
            let (f, _) = shifted_cf(p, env, x, v, tau, y, phi, j, form);
            [f.im / phi]
        },
        quad,
    )?;
    Ok(0.5 + val / PI)
}

/// `p_j(x, v, tau, y) = -dP_j/dy`, the density of `log S_T` under measure `j`.
#[allow(clippy::too_many_arguments)]
pub fn density_p(
    p: &HestonParams,
    env: &MarketEnv,
    x: f64,
    v: f64,
    tau: f64,
    y: f64,
    j: CfIndex,
    quad: &QuadratureConfig,
    form: CfFormulation,
) -> Result<f64> {
    check_common(p, env, tau)?;
    let [val] = integrate_spectral(
        |phi| {
            let (f, _) = shifted_cf(p, env, x, v, tau, y, phi, j, form);
            [f.re]
        },
        quad,
    )?;
    Ok(val / PI)
}

fn check_option(p: &HestonParams, env: &MarketEnv, opt: &VanillaOption) -> Result<()> {
    validate_inputs(p, env)?;
    opt.validate()?;
    Ok(())
}

/// `(P_1, P_2)` for the option's strike and maturity.
fn probabilities(
    p: &HestonParams,
    env: &MarketEnv,
    opt: &VanillaOption,
    quad: &QuadratureConfig,
    form: CfFormulation,
) -> Result<(f64, f64)> {
    let x = env.spot.ln();
    let y = opt.strike.ln();
    let [i1, i2] = integrate_spectral(
        |phi| {
            let (f1, _) = shifted_cf(p, env, x, p.v0, opt.tau, y, phi, CfIndex::One, form);
            let (f2, _) = shifted_cf(p, env, x, p.v0, opt.tau, y, phi, CfIndex::Two, form);
            [f1.im / phi, f2.im / phi]
        },
        quad,
    )?;
    Ok((0.5 + i1 / PI, 0.5 + i2 / PI))
}

fn p_plus_minus(phi: f64, p1: f64, p2: f64) -> (f64, f64) {
    let base = 0.5 * (1.0 - phi);
    (base + phi * p1, base + phi * p2)
}

/// Domestic-currency premium of a European FX vanilla.
pub fn vanilla_price(
    p: &HestonParams,
    env: &MarketEnv,
    opt: &VanillaOption,
    quad: &QuadratureConfig,
    form: CfFormulation,
) -> Result<f64> {
    check_option(p, env, opt)?;
    let (p1, p2) = probabilities(p, env, opt, quad, form)?;
    Ok(price_from_probabilities(env, opt, p1, p2))
}

fn price_from_probabilities(env: &MarketEnv, opt: &VanillaOption, p1: f64, p2: f64) -> f64 {
    let phi = opt.phi();
    let (pp, pm) = p_plus_minus(phi, p1, p2);
    let df_d = (-env.rd * opt.tau).exp();
    let df_f = (-env.rf * opt.tau).exp();
    phi * (df_f * env.spot * pp - opt.strike * df_d * pm)
}

/// Spot delta `phi e^{-rf tau} P_+`.
pub fn delta(
    p: &HestonParams,
    env: &MarketEnv,
    opt: &VanillaOption,
    quad: &QuadratureConfig,
    form: CfFormulation,
) -> Result<f64> {
    check_option(p, env, opt)?;
    let (p1, p2) = probabilities(p, env, opt, quad, form)?;
    let (pp, _) = p_plus_minus(opt.phi(), p1, p2);
    Ok(opt.phi() * (-env.rf * opt.tau).exp() * pp)
}

/// Dual delta `dh/dK = -phi e^{-rd tau} P_-`.
pub fn dual_delta(
    p: &HestonParams,
    env: &MarketEnv,
    opt: &VanillaOption,
    quad: &QuadratureConfig,
    form: CfFormulation,
) -> Result<f64> {
    check_option(p, env, opt)?;
    let (p1, p2) = probabilities(p, env, opt, quad, form)?;
    let (_, pm) = p_plus_minus(opt.phi(), p1, p2);
    Ok(-opt.phi() * (-env.rd * opt.tau).exp() * pm)
}

/// `e^{-rf tau} p_1 / S`, identical for calls and puts.
pub fn gamma(
    p: &HestonParams,
    env: &MarketEnv,
    opt: &VanillaOption,
    quad: &QuadratureConfig,
    form: CfFormulation,
) -> Result<f64> {
    check_option(p, env, opt)?;
    let dens = density_p(
        p,
        env,
        env.spot.ln(),
        p.v0,
        opt.tau,
        opt.strike.ln(),
        CfIndex::One,
        quad,
        form,
    )?;
    Ok((-env.rf * opt.tau).exp() / env.spot * dens)
}

/// `(dh/drd, dh/drf)`.
pub fn rhos(
    p: &HestonParams,
    env: &MarketEnv,
    opt: &VanillaOption,
    quad: &QuadratureConfig,
    form: CfFormulation,
) -> Result<(f64, f64)> {
    check_option(p, env, opt)?;
    let (p1, p2) = probabilities(p, env, opt, quad, form)?;
    Ok(rhos_from(env, opt, p1, p2))
}

fn rhos_from(env: &MarketEnv, opt: &VanillaOption, p1: f64, p2: f64) -> (f64, f64) {
    let phi = opt.phi();
    let tau = opt.tau;
    let (pp, pm) = p_plus_minus(phi, p1, p2);
    (
        phi * opt.strike * (-env.rd * tau).exp() * tau * pm,
        -phi * env.spot * (-env.rf * tau).exp() * tau * pp,
    )
}

/// First and second derivative of the premium with respect to the initial
/// variance `v0`.
pub fn vega_volga(
    p: &HestonParams,
    env: &MarketEnv,
    opt: &VanillaOption,
    quad: &QuadratureConfig,
    form: CfFormulation,
) -> Result<(f64, f64)> {
    let g = greeks(p, env, opt, quad, form)?;
    Ok((g.vega, g.volga))
}

/// Every sensitivity from one pass over the spectral integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Greeks {
    pub price: f64,
    pub delta: f64,
    pub dual_delta: f64,
    pub gamma: f64,
    pub rho_d: f64,
    pub rho_f: f64,
    /// `dh/dv0`.
    pub vega: f64,
    /// `d^2h/dv0^2`.
    pub volga: f64,
    /// `d^2h/dS dv0`.
    pub vanna: f64,
    /// `dh/dt` in calendar time.
    pub theta: f64,
}

pub fn greeks(
    p: &HestonParams,
    env: &MarketEnv,
    opt: &VanillaOption,
    quad: &QuadratureConfig,
    form: CfFormulation,
) -> Result<Greeks> {
    check_option(p, env, opt)?;
    let x = env.spot.ln();
    let y = opt.strike.ln();
    let v = p.v0;
    let tau = opt.tau;
    // [P_1, P_2, p_1, dP_1/dv, dP_2/dv, d2P_1/dv2, d2P_2/dv2], before the
    // 1/pi factor and the 1/2 offsets.
    let ints = integrate_spectral(
        |phi| {
            let (f1, d1) = shifted_cf(p, env, x, v, tau, y, phi, CfIndex::One, form);
            let (f2, d2) = shifted_cf(p, env, x, v, tau, y, phi, CfIndex::Two, form);
            let ip = Complex64::new(0.0, phi);
            [
                f1.im / phi,
                f2.im / phi,
                f1.re,
                (d1 * f1 / ip).re,
                (d2 * f2 / ip).re,
                (d1 * d1 * f1 / ip).re,
                (d2 * d2 * f2 / ip).re,
            ]
        },
        quad,
    )?;
    let p1 = 0.5 + ints[0] / PI;
    let p2 = 0.5 + ints[1] / PI;
    let dens1 = ints[2] / PI;
    let [dp1, dp2, d2p1, d2p2] = [ints[3] / PI, ints[4] / PI, ints[5] / PI, ints[6] / PI];

    let phi = opt.phi();
    let s = env.spot;
    let k = opt.strike;
    let df_d = (-env.rd * tau).exp();
    let df_f = (-env.rf * tau).exp();
    let (pp, pm) = p_plus_minus(phi, p1, p2);

    let price = phi * (df_f * s * pp - k * df_d * pm);
    let delta = phi * df_f * pp;
    let gamma = df_f / s * dens1;
    let (rho_d, rho_f) = rhos_from(env, opt, p1, p2);
    let vega = df_f * s * dp1 - k * df_d * dp2;
    let volga = df_f * s * d2p1 - k * df_d * d2p2;
    let vanna = df_f * dp1;

    // Theta from the pricing PDE with every other term known.
    let spatial = 0.5 * v * s * s * gamma
        + p.rho * p.sigma * v * s * vanna
        + 0.5 * p.sigma * p.sigma * v * volga
        + env.drift() * s * delta
        + (p.kappa * (p.theta - v) - p.lambda * v) * vega
        - env.rd * price;

    Ok(Greeks {
        price,
        delta,
        dual_delta: -phi * df_d * pm,
        gamma,
        rho_d,
        rho_f,
        vega,
        volga,
        vanna,
        theta: -spatial,
    })
}

/// Exponent `F_t(xi)` of the characteristic function of the centered return
/// `log(S_t/S_0) - (rd - rf) t` with the initial variance drawn from the
/// stationary law of the variance process. The logarithm is expanded around
/// its growing exponential so no branch switch occurs.
pub fn centered_return_exponent(p: &HestonParams, t: f64, xi: f64) -> Complex64 {
    let i = Complex64::i();
    let s2 = p.sigma * p.sigma;
    let gamma = p.kappa + i * p.rho * p.sigma * xi;
    let omega = (gamma * gamma + s2 * (xi * xi - i * xi)).sqrt();
    let a = (omega * omega - gamma * gamma + 2.0 * p.kappa * gamma) / (2.0 * p.kappa * omega);
    let log_term = omega * t / 2.0 + ((1.0 + a) / 2.0 + (1.0 - a) / 2.0 * (-omega * t).exp()).ln();
    let kt = p.kappa * p.theta / s2;
    kt * gamma * t - 2.0 * kt * log_term
}

/// Density of the centered log-return over a time lag, evaluated on a grid.
pub fn marginal_density(
    p: &HestonParams,
    time_lag: f64,
    x_grid: &[f64],
    quad: &QuadratureConfig,
) -> Result<Vec<f64>> {
    p.validate()?;
    if !(time_lag > 0.0) {
        return Err(Error::Invalid(crate::error::Violations(vec![
            crate::error::Violation::NonPositiveTau,
        ])));
    }
    x_grid
        .iter()
        .map(|&x| {
            let [v] = integrate_half_line(
                |xi| {
                    let z = Complex64::new(0.0, xi * x) + centered_return_exponent(p, time_lag, xi);
                    if z.re < -745.0 {
                        [0.0]
                    } else {
                        [z.exp().re]
                    }
                },
                quad,
            )?;
            Ok(v / PI)
        })
        .collect()
}
