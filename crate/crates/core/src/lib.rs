//! Heston stochastic volatility toolkit for FX vanilla options.
//!
//! Three independent pricing routes (Fourier inversion, Carr-Madan FFT and
//! Monte Carlo), Greeks, the marginal return density, variance process
//! diagnostics and calibration of `(sigma, theta, rho)` to a delta-quoted
//! volatility smile.

pub mod analytic;
pub mod black;
pub mod calibration;
pub mod error;
pub mod fft;
pub mod mc;
pub mod params;
pub mod quadrature;
pub mod variance;

pub use error::{Error, Result, Violation, Violations};
pub use params::{HestonParams, MarketEnv, OptionKind, ParamsDocument, VanillaOption};
