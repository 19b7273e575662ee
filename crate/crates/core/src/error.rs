use std::fmt;

use thiserror::Error;

/// A single violated invariant on an input value object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Violation {
    NonPositiveKappa,
    NonPositiveTheta,
    NonPositiveSigma,
    NegativeV0,
    CorrelationOutOfRange,
    NonFiniteLambda,
    NonPositiveSpot,
    NonFiniteRate,
    NonPositiveStrike,
    NonPositiveTau,
    InvalidOptionSign,
}

impl Violation {
    pub fn name(self) -> &'static str {
        match self {
            Violation::NonPositiveKappa => "NonPositiveKappa",
            Violation::NonPositiveTheta => "NonPositiveTheta",
            Violation::NonPositiveSigma => "NonPositiveSigma",
            Violation::NegativeV0 => "NegativeV0",
            Violation::CorrelationOutOfRange => "CorrelationOutOfRange",
            Violation::NonFiniteLambda => "NonFiniteLambda",
            Violation::NonPositiveSpot => "NonPositiveSpot",
            Violation::NonFiniteRate => "NonFiniteRate",
            Violation::NonPositiveStrike => "NonPositiveStrike",
            Violation::NonPositiveTau => "NonPositiveTau",
            Violation::InvalidOptionSign => "InvalidOptionSign",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The complete list of invariants an input failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violations(pub Vec<Violation>);

impl Violations {
    pub fn contains(&self, v: Violation) -> bool {
        self.0.contains(&v)
    }
}

impl fmt::Display for Violations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.0.iter().map(|v| v.name()).collect();
        write!(f, "{}", names.join(", "))
    }
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(Violations),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("quadrature did not converge after {evals} evaluations (error estimate {error:e})")]
    QuadratureNotConverged { evals: usize, error: f64 },

    #[error("moment condition E[S_T^(alpha+1)] violated for damping alpha = {alpha}")]
    MomentConditionViolated { alpha: f64 },

    #[error("strike {strike} outside the grid range [{lo}, {hi}]")]
    StrikeOutOfRange { strike: f64, lo: f64, hi: f64 },

    #[error("option maturity {tau} does not match path horizon {horizon}")]
    HorizonMismatch { tau: f64, horizon: f64 },

    #[error("delta {delta} outside the attainable spot-delta range (|delta| < {bound})")]
    DeltaOutOfRange { delta: f64, bound: f64 },

    #[error("price {price} outside the no-arbitrage band ({lo}, {hi})")]
    PriceOutOfBand { price: f64, lo: f64, hi: f64 },

    #[error("implied volatility bracket exhausted after {0} iterations")]
    BracketExhausted(usize),

    #[error("smile slice has {0} pillars, at least 3 are needed to fit three parameters")]
    DegenerateSlice(usize),

    #[error("forward variance is negative ({0:e}); term inputs are inconsistent")]
    NegativeForwardVariance(f64),
}

impl Error {
    /// Stable identifier used by the command line error report.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Invalid(_) => "ValidationFailed",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::QuadratureNotConverged { .. } => "QuadratureNotConverged",
            Error::MomentConditionViolated { .. } => "MomentConditionViolated",
            Error::StrikeOutOfRange { .. } => "StrikeOutOfRange",
            Error::HorizonMismatch { .. } => "HorizonMismatch",
            Error::DeltaOutOfRange { .. } => "DeltaOutOfRange",
            Error::PriceOutOfBand { .. } => "PriceOutOfBand",
            Error::BracketExhausted(_) => "BracketExhausted",
            Error::DegenerateSlice(_) => "DegenerateSlice",
            Error::NegativeForwardVariance(_) => "NegativeForwardVariance",
        }
    }

    /// Input validation failures, as opposed to numerical failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Invalid(_) | Error::InvalidConfig(_) | Error::DegenerateSlice(_)
        )
    }
}

impl From<Violations> for Error {
    fn from(v: Violations) -> Self {
        Error::Invalid(v)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
