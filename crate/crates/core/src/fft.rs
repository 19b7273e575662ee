//! Carr-Madan FFT valuation: one transform gives call prices on a whole
//! log-strike ladder.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::analytic::{cf_terms_complex, CfFormulation, CfIndex};
use crate::error::{Error, Result};
use crate::params::{validate_inputs, HestonParams, MarketEnv, OptionKind, VanillaOption};

/// Frequency grid `v_j = eta (j - 1)` and its dual log-strike grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FftGrid {
    pub n_points: usize,
    pub eta: f64,
    pub alpha_damp: f64,
}

impl Default for FftGrid {
    fn default() -> Self {
        FftGrid {
            n_points: 4096,
            eta: 0.25,
            alpha_damp: 0.75,
        }
    }
}

impl FftGrid {
    pub fn new(n_points: usize, eta: f64, alpha_damp: f64) -> Result<Self> {
        FftGrid {
            n_points,
            eta,
            alpha_damp,
        }
        .validate()
    }

    pub fn validate(self) -> Result<Self> {
        if self.n_points < 2 || !self.n_points.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "FFT size {} is not a power of two",
                self.n_points
            )));
        }
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(Error::InvalidConfig(format!("eta {} must be positive", self.eta)));
        }
        if !(self.alpha_damp > 0.0) || !self.alpha_damp.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "damping {} must be positive",
                self.alpha_damp
            )));
        }
        Ok(self)
    }

    /// Log-strike spacing `2 pi / (N eta)`.
    pub fn strike_spacing(&self) -> f64 {
        2.0 * PI / (self.n_points as f64 * self.eta)
    }

    /// `k_u = (-pi + 2 pi (u - 1) / N) / eta` for `u = 1..N`.
    pub fn log_strikes(&self) -> Vec<f64> {
        let b = PI / self.eta;
        let lambda = self.strike_spacing();
        (0..self.n_points).map(|u| -b + lambda * u as f64).collect()
    }
}

/// Simpson weight of the `j`-th node (1-based): `eta/3 (3 + (-1)^j - delta_{j-1})`.
pub fn simpson_weight(j: usize, eta: f64) -> f64 {
    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
    let kron = if j == 1 { 1.0 } else { 0.0 };
    eta / 3.0 * (3.0 + sign - kron)
}

/// Fourier transform of the damped call price,
/// `e^{-rd T} f_2(v - (alpha + 1) i) / (alpha^2 + alpha - v^2 + i (2 alpha + 1) v)`.
pub fn psi_transform(
    p: &HestonParams,
    env: &MarketEnv,
    tau: f64,
    v_freq: f64,
    alpha_damp: f64,
) -> Result<Complex64> {
    let i = Complex64::i();
    let w = Complex64::new(v_freq, -(alpha_damp + 1.0));
    let t = cf_terms_complex(p, env, tau, w, CfIndex::Two, CfFormulation::Transformed);
    let f2 = (t.c + t.dv * p.v0 + i * w * env.spot.ln()).exp();
    let denom = Complex64::new(
        alpha_damp * alpha_damp + alpha_damp - v_freq * v_freq,
        (2.0 * alpha_damp + 1.0) * v_freq,
    );
    let psi = (-env.rd * tau).exp() * f2 / denom;
    if !psi.re.is_finite() || !psi.im.is_finite() {
        return Err(Error::MomentConditionViolated { alpha: alpha_damp });
    }
    Ok(psi)
}

/// Call ladder on the grid's log strikes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FftResult {
    pub log_strikes: Vec<f64>,
    pub call_prices: Vec<f64>,
    /// Number of grid prices that came out negative and were set to zero.
    pub clamped: usize,
    pub tau: f64,
    pub env: MarketEnv,
}

impl FftResult {
    pub fn strikes(&self) -> Vec<f64> {
        self.log_strikes.iter().map(|k| k.exp()).collect()
    }

    /// Put ladder from the call ladder through parity.
    pub fn put_prices(&self) -> Vec<f64> {
        self.log_strikes
            .iter()
            .zip(&self.call_prices)
            .map(|(k, c)| self.put_from_call(*c, k.exp()))
            .collect()
    }

    fn put_from_call(&self, call: f64, strike: f64) -> f64 {
        call - self.env.spot * (-self.env.rf * self.tau).exp()
            + strike * (-self.env.rd * self.tau).exp()
    }

    /// Linear interpolation in log strike.
    pub fn price_at(&self, strike: f64, kind: OptionKind) -> Result<f64> {
        let lo = self.log_strikes[0];
        let hi = self.log_strikes[self.log_strikes.len() - 1];
        let k = strike.ln();
        if !(k >= lo && k <= hi) {
            return Err(Error::StrikeOutOfRange {
                strike,
                lo: lo.exp(),
                hi: hi.exp(),
            });
        }
        let h = self.log_strikes[1] - lo;
        let pos = ((k - lo) / h).floor() as usize;
        let u = pos.min(self.log_strikes.len() - 2);
        let w = (k - self.log_strikes[u]) / h;
        let call = if w == 0.0 {
            self.call_prices[u]
        } else {
            (1.0 - w) * self.call_prices[u] + w * self.call_prices[u + 1]
        };
        Ok(match kind {
            OptionKind::Call => call,
            OptionKind::Put => self.put_from_call(call, strike),
        })
    }
}

pub fn fft_price_ladder(
    p: &HestonParams,
    env: &MarketEnv,
    tau: f64,
    grid: &FftGrid,
) -> Result<FftResult> {
    validate_inputs(p, env)?;
    VanillaOption::call(1.0, tau).validate()?;
    let grid = grid.validate()?;
    let n = grid.n_points;
    let b = PI / grid.eta;
    let mut buf = Vec::with_capacity(n);
    for j in 1..=n {
        let v = grid.eta * (j - 1) as f64;
        let psi = psi_transform(p, env, tau, v, grid.alpha_damp)?;
        let phase = Complex64::from_polar(1.0, b * v);
        buf.push(phase * psi * simpson_weight(j, grid.eta));
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let log_strikes = grid.log_strikes();
    let mut clamped = 0;
    let call_prices = log_strikes
        .iter()
        .zip(&buf)
        .map(|(k, z)| {
            let c = (-grid.alpha_damp * k).exp() / PI * z.re;
            if c < 0.0 {
                clamped += 1;
                0.0
            } else {
                c
            }
        })
        .collect();
    Ok(FftResult {
        log_strikes,
        call_prices,
        clamped,
        tau,
        env: *env,
    })
}

/// Interpolated call price.
pub fn fft_price_at(result: &FftResult, strike: f64) -> Result<f64> {
    result.price_at(strike, OptionKind::Call)
}
