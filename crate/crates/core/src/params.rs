//! Model parameters, market environment and option contract.
//!
//! All three are plain immutable values. Variances (`v0`, `theta`) are
//! annualized squared volatilities, rates and `kappa` are annualized.

use serde::{Deserialize, Serialize};

use crate::error::{Violation, Violations};

/// Heston parameters for the variance process and its link to the spot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HestonParams {
    /// Mean reversion speed.
    pub kappa: f64,
    /// Long-run variance.
    pub theta: f64,
    /// Volatility of variance.
    pub sigma: f64,
    /// Spot/variance correlation, open interval (-1, 1).
    pub rho: f64,
    /// Initial variance. Zero is allowed.
    pub v0: f64,
    /// Market price of volatility risk.
    #[serde(default)]
    pub lambda: f64,
}

impl HestonParams {
    /// Parameters with `lambda = 0`, validated.
    pub fn new(kappa: f64, theta: f64, sigma: f64, rho: f64, v0: f64) -> Result<Self, Violations> {
        HestonParams {
            kappa,
            theta,
            sigma,
            rho,
            v0,
            lambda: 0.0,
        }
        .validate()
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_v0(mut self, v0: f64) -> Self {
        self.v0 = v0;
        self
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    /// Returns `self` unchanged when every invariant holds, otherwise the
    /// full list of violations.
    pub fn validate(self) -> Result<Self, Violations> {
        let mut errs = Vec::new();
        // `!(x > 0)` also rejects NaN.
        if !(self.kappa > 0.0) || !self.kappa.is_finite() {
            errs.push(Violation::NonPositiveKappa);
        }
        if !(self.theta > 0.0) || !self.theta.is_finite() {
            errs.push(Violation::NonPositiveTheta);
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            errs.push(Violation::NonPositiveSigma);
        }
        if !(self.v0 >= 0.0) || !self.v0.is_finite() {
            errs.push(Violation::NegativeV0);
        }
        if !(self.rho > -1.0 && self.rho < 1.0) {
            errs.push(Violation::CorrelationOutOfRange);
        }
        if !self.lambda.is_finite() {
            errs.push(Violation::NonFiniteLambda);
        }
        if errs.is_empty() {
            Ok(self)
        } else {
            Err(Violations(errs))
        }
    }

    /// Squared-Bessel dimensionality `4 kappa theta / sigma^2`.
    pub fn feller_alpha(&self) -> f64 {
        4.0 * self.kappa * self.theta / (self.sigma * self.sigma)
    }
}

/// FX market context: spot in domestic units per foreign unit and the two
/// continuously compounded rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketEnv {
    pub spot: f64,
    pub rd: f64,
    pub rf: f64,
}

impl MarketEnv {
    pub fn new(spot: f64, rd: f64, rf: f64) -> Result<Self, Violations> {
        MarketEnv { spot, rd, rf }.validate()
    }

    pub fn validate(self) -> Result<Self, Violations> {
        let mut errs = Vec::new();
        if !(self.spot > 0.0) || !self.spot.is_finite() {
            errs.push(Violation::NonPositiveSpot);
        }
        if !self.rd.is_finite() || !self.rf.is_finite() {
            errs.push(Violation::NonFiniteRate);
        }
        if errs.is_empty() {
            Ok(self)
        } else {
            Err(Violations(errs))
        }
    }

    /// Risk-neutral drift of the spot, `rd - rf`.
    pub fn drift(&self) -> f64 {
        self.rd - self.rf
    }

    pub fn with_spot(mut self, spot: f64) -> Self {
        self.spot = spot;
        self
    }

    pub fn with_rates(mut self, rd: f64, rf: f64) -> Self {
        self.rd = rd;
        self.rf = rf;
        self
    }

    pub fn forward(&self, tau: f64) -> f64 {
        self.spot * (self.drift() * tau).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptionKind {
    Call,
    Put,
}

impl OptionKind {
    /// `+1` for calls, `-1` for puts.
    pub fn sign(self) -> f64 {
        match self {
            OptionKind::Call => 1.0,
            OptionKind::Put => -1.0,
        }
    }

    /// Accepts exactly `+1` or `-1`.
    pub fn from_sign(phi: f64) -> Result<Self, Violations> {
        if phi == 1.0 {
            Ok(OptionKind::Call)
        } else if phi == -1.0 {
            Ok(OptionKind::Put)
        } else {
            Err(Violations(vec![Violation::InvalidOptionSign]))
        }
    }
}

/// European vanilla: strike in domestic units, time to maturity in years.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VanillaOption {
    pub strike: f64,
    pub tau: f64,
    pub kind: OptionKind,
}

impl VanillaOption {
    pub fn new(strike: f64, tau: f64, kind: OptionKind) -> Result<Self, Violations> {
        VanillaOption { strike, tau, kind }.validate()
    }

    pub fn call(strike: f64, tau: f64) -> Self {
        VanillaOption {
            strike,
            tau,
            kind: OptionKind::Call,
        }
    }

    pub fn put(strike: f64, tau: f64) -> Self {
        VanillaOption {
            strike,
            tau,
            kind: OptionKind::Put,
        }
    }

    pub fn validate(self) -> Result<Self, Violations> {
        let mut errs = Vec::new();
        if !(self.strike > 0.0) || !self.strike.is_finite() {
            errs.push(Violation::NonPositiveStrike);
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            errs.push(Violation::NonPositiveTau);
        }
        if errs.is_empty() {
            Ok(self)
        } else {
            Err(Violations(errs))
        }
    }

    pub fn phi(&self) -> f64 {
        self.kind.sign()
    }

    pub fn with_strike(mut self, strike: f64) -> Self {
        self.strike = strike;
        self
    }

    pub fn with_kind(mut self, kind: OptionKind) -> Self {
        self.kind = kind;
        self
    }
}

/// Validates a parameter set and environment together, merging their
/// violation lists.
pub fn validate_inputs(p: &HestonParams, env: &MarketEnv) -> Result<(), Violations> {
    let mut errs = Vec::new();
    if let Err(Violations(v)) = p.validate() {
        errs.extend(v);
    }
    if let Err(Violations(v)) = env.validate() {
        errs.extend(v);
    }
    if errs.is_empty() {
        Ok(())
    } else {
        Err(Violations(errs))
    }
}

/// Flat key-value form of the parameters plus market context, the JSON
/// document read and written by the command line tool.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsDocument {
    pub kappa: f64,
    pub theta: f64,
    pub sigma: f64,
    pub rho: f64,
    pub v0: f64,
    #[serde(default)]
    pub lambda: f64,
    pub spot: f64,
    pub rd: f64,
    pub rf: f64,
}

impl ParamsDocument {
    pub fn new(p: &HestonParams, env: &MarketEnv) -> Self {
        ParamsDocument {
            kappa: p.kappa,
            theta: p.theta,
            sigma: p.sigma,
            rho: p.rho,
            v0: p.v0,
            lambda: p.lambda,
            spot: env.spot,
            rd: env.rd,
            rf: env.rf,
        }
    }

    /// Splits into validated model parameters and market environment.
    pub fn split(&self) -> Result<(HestonParams, MarketEnv), Violations> {
        let p = HestonParams {
            kappa: self.kappa,
            theta: self.theta,
            sigma: self.sigma,
            rho: self.rho,
            v0: self.v0,
            lambda: self.lambda,
        };
        let env = MarketEnv {
            spot: self.spot,
            rd: self.rd,
            rf: self.rf,
        };
        validate_inputs(&p, &env)?;
        Ok((p, env))
    }
}
