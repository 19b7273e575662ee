//! Diagnostics of the square-root variance process: the Feller condition,
//! its squared-Bessel representation, moments under piecewise-constant
//! parameters, and forward vol-of-vol / correlation between two tenors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::HestonParams;

/// Boundary behaviour of a squared Bessel process of dimension `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FellerRegime {
    /// `0 < alpha < 2`: zero is hit recurrently, time spent there is zero.
    HitsZeroRecurrent,
    /// `alpha = 2`: strictly positive but comes arbitrarily close to zero.
    StrictlyPositiveBoundary,
    /// `alpha > 2`: strictly positive.
    StrictlyPositive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FellerReport {
    /// `4 kappa theta / sigma^2`.
    pub alpha_dim: f64,
    /// `alpha_dim >= 2`.
    pub satisfied: bool,
    /// Convection at `v = 0` points outwards: `sigma^2 / 2 - kappa theta < 0`.
    /// False on the `alpha_dim = 2` boundary even though `satisfied` holds.
    pub outflowing: bool,
    pub regime: FellerRegime,
}

pub fn feller_check(p: &HestonParams) -> FellerReport {
    feller_report(p.kappa, p.theta, p.sigma)
}

pub fn feller_report(kappa: f64, theta: f64, sigma: f64) -> FellerReport {
    let (_, alpha_dim) = bessel_transform_check(kappa, sigma, theta);
    let regime = if alpha_dim > 2.0 {
        FellerRegime::StrictlyPositive
    } else if alpha_dim == 2.0 {
        FellerRegime::StrictlyPositiveBoundary
    } else {
        FellerRegime::HitsZeroRecurrent
    };
    FellerReport {
        alpha_dim,
        satisfied: alpha_dim >= 2.0,
        outflowing: 0.5 * sigma * sigma - kappa * theta < 0.0,
        regime,
    }
}

/// Parameters `(beta, alpha)` of the space-time change that maps a squared
/// Bessel process of dimension `alpha` onto the CIR process:
/// `beta = sigma^2 / (4 kappa)`, `alpha = theta / beta`.
pub fn bessel_transform_check(kappa: f64, sigma: f64, theta: f64) -> (f64, f64) {
    let beta = sigma * sigma / (4.0 * kappa);
    (beta, theta / beta)
}

/// `Y_t = e^{-kappa t} X_{beta (e^{kappa t} - 1)}` for a squared Bessel
/// process `X` of dimension `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselMapping {
    pub kappa: f64,
    pub beta: f64,
    pub alpha: f64,
}

impl BesselMapping {
    pub fn new(kappa: f64, theta: f64, sigma: f64) -> Self {
        let (beta, alpha) = bessel_transform_check(kappa, sigma, theta);
        BesselMapping { kappa, beta, alpha }
    }

    /// Bessel clock corresponding to CIR time `t`.
    pub fn bessel_time(&self, t: f64) -> f64 {
        self.beta * (self.kappa * t).exp_m1()
    }

    /// CIR value at time `t` given the Bessel value at the mapped time.
    pub fn cir_value(&self, bessel_value: f64, t: f64) -> f64 {
        (-self.kappa * t).exp() * bessel_value
    }

    /// Long-run CIR level `alpha beta`.
    pub fn mean_level(&self) -> f64 {
        self.alpha * self.beta
    }

    /// CIR diffusion coefficient `2 sqrt(kappa beta)`, equal to `sigma`.
    pub fn diffusion(&self) -> f64 {
        2.0 * (self.kappa * self.beta).sqrt()
    }
}

/// One right-continuous piece of a term structure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermSegment {
    /// End of the segment in years; the segment starts where the previous
    /// one ends (or at 0).
    pub end: f64,
    pub kappa: f64,
    pub theta: f64,
    pub sigma: f64,
}

/// Piecewise-constant `kappa(t)`, `theta(t)`, `sigma(t)`. The last segment
/// continues past its end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermParams {
    segments: Vec<TermSegment>,
}

impl TermParams {
    pub fn new(segments: Vec<TermSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidConfig("term structure needs a segment".into()));
        }
        let mut prev = 0.0;
        for s in &segments {
            if !(s.end > prev) {
                return Err(Error::InvalidConfig(
                    "tenor ends must be strictly increasing and positive".into(),
                ));
            }
            if !(s.kappa > 0.0 && s.theta > 0.0 && s.sigma > 0.0) {
                return Err(Error::InvalidConfig("term values must be positive".into()));
            }
            prev = s.end;
        }
        Ok(TermParams { segments })
    }

    /// Flat parameters for all times.
    pub fn constant(kappa: f64, theta: f64, sigma: f64) -> Self {
        TermParams {
            segments: vec![TermSegment {
                end: 1.0,
                kappa,
                theta,
                sigma,
            }],
        }
    }

    pub fn segments(&self) -> &[TermSegment] {
        &self.segments
    }

    /// Pieces `(start, end, segment)` clipped to `[0, t]`.
    fn pieces(&self, t: f64) -> impl Iterator<Item = (f64, f64, &TermSegment)> + '_ {
        let last = self.segments.len() - 1;
        let mut start = 0.0;
        self.segments
            .iter()
            .enumerate()
            .filter_map(move |(i, s)| {
                let a = start;
                let b = if i == last { t } else { s.end.min(t) };
                start = s.end;
                (b > a).then_some((a, b, s))
            })
    }

    /// Parameter values in force at time `t`.
    pub fn at(&self, t: f64) -> &TermSegment {
        self.segments
            .iter()
            .find(|s| t < s.end)
            .unwrap_or_else(|| self.segments.last().unwrap())
    }

    /// `K(t) = int_0^t kappa(s) ds`.
    pub fn integrated_kappa(&self, t: f64) -> f64 {
        self.pieces(t).map(|(a, b, s)| s.kappa * (b - a)).sum()
    }
}

/// Mean and variance of `v_t`, propagated exactly across each constant piece.
fn cir_moments(tp: &TermParams, v0: f64, t: f64) -> (f64, f64) {
    let mut mean = v0;
    let mut var = 0.0;
    for (a, b, s) in tp.pieces(t) {
        let len = b - a;
        let e1 = (-s.kappa * len).exp();
        let one_minus_e1 = -(-s.kappa * len).exp_m1();
        let one_minus_e2 = -(-2.0 * s.kappa * len).exp_m1();
        let excess = mean - s.theta;
        var = var * e1 * e1
            + s.sigma * s.sigma
                * (s.theta * one_minus_e2 / (2.0 * s.kappa) + excess * e1 * one_minus_e1 / s.kappa);
        mean = s.theta + excess * e1;
    }
    (mean, var)
}

/// `E(v_t)` for piecewise-constant parameters.
pub fn cir_mean(tp: &TermParams, v0: f64, t: f64) -> f64 {
    cir_moments(tp, v0, t).0
}

/// `Var(v_t)` for piecewise-constant parameters.
pub fn cir_variance(tp: &TermParams, v0: f64, t: f64) -> f64 {
    cir_moments(tp, v0, t).1
}

/// `H(t) = int_0^t E(v_s) e^{2 kappa s} ds` for constant `kappa`, `theta`.
pub fn variance_weight(kappa: f64, theta: f64, v0: f64, t: f64) -> f64 {
    theta / (2.0 * kappa) * (2.0 * kappa * t).exp()
        + (v0 - theta) / kappa * (kappa * t).exp()
        + (theta / 2.0 - v0) / kappa
}

/// Vol-of-vol on `(T1, T2]` that, combined with `sigma_t1` on `[0, T1]`,
/// reproduces the variance of `v_{T2}` implied by `sigma_t2` on `[0, T2]`.
pub fn forward_vol_of_vol(
    sigma_t1: f64,
    sigma_t2: f64,
    t1: f64,
    t2: f64,
    kappa: f64,
    theta: f64,
    v0: f64,
) -> Result<f64> {
    if !(t1 > 0.0 && t2 > t1) {
        return Err(Error::InvalidConfig("forward vol-of-vol needs 0 < T1 < T2".into()));
    }
    if !(sigma_t1 >= 0.0 && sigma_t2 >= 0.0) {
        return Err(Error::InvalidConfig("vol-of-vol inputs must be non-negative".into()));
    }
    if sigma_t1 == sigma_t2 {
        return Ok(sigma_t2);
    }
    let h1 = variance_weight(kappa, theta, v0, t1);
    let h2 = variance_weight(kappa, theta, v0, t2);
    let num = sigma_t2 * sigma_t2 * h2 - sigma_t1 * sigma_t1 * h1;
    if num < 0.0 {
        return Err(Error::NegativeForwardVariance(num));
    }
    Ok((num / (h2 - h1)).sqrt())
}

/// Correlation on `(T1, T2]` consistent with `rho_t1` and `rho_t2`: the
/// later tenor's value.
pub fn forward_correlation(rho_t1: f64, rho_t2: f64, t1: f64, t2: f64) -> Result<f64> {
    if !(t1 > 0.0 && t2 > t1) {
        return Err(Error::InvalidConfig("forward correlation needs 0 < T1 < T2".into()));
    }
    let in_range = |r: f64| r > -1.0 && r < 1.0;
    if !in_range(rho_t1) || !in_range(rho_t2) {
        return Err(Error::Invalid(crate::error::Violations(vec![
            crate::error::Violation::CorrelationOutOfRange,
        ])));
    }
    Ok(rho_t2)
}
