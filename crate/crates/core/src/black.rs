//! Garman-Kohlhagen (Black-Scholes for FX) closed forms and the standard
//! normal helpers they need.

use statrs::distribution::{Continuous, Normal};


use crate::params::{MarketEnv, OptionKind};

fn std_normal() -> Normal {
    Normal::standard()
}

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

pub fn norm_pdf(x: f64) -> f64 {
    std_normal().pdf(x)
}

/// Inverse standard normal CDF, Wichura's AS241 (relative accuracy about
/// 1e-16). Returns the infinities at 0 and 1.
pub fn norm_inv(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q
            * (((((((2509.080_928_730_122_7 * r + 33430.575_583_588_128) * r
                + 67265.770_927_008_700)
                * r
                + 45921.953_931_549_871)
                * r
                + 13731.693_765_509_461)
                * r
                + 1971.590_950_306_551_3)
                * r
                + 133.141_667_891_784_38)
                * r
                + 3.387_132_872_796_366_5)
            / (((((((5226.495_278_852_545_4 * r + 28729.085_735_721_943) * r
                + 39307.895_800_092_710)
                * r
                + 21213.794_301_586_595)
                * r
                + 5394.196_021_424_751_1)
                * r
                + 687.187_007_492_057_91)
                * r
                + 42.313_330_701_600_911)
                * r
                + 1.0);
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let x = if r <= 5.0 {
        let r = r - 1.6;
        (((((((7.745_450_142_783_414_1e-4 * r + 0.022_723_844_989_269_184) * r
            + 0.241_780_725_177_450_61)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_6)
            * r
            + 5.769_497_221_460_691_4)
            * r
            + 4.630_337_846_156_545_3)
            * r
            + 1.423_437_110_749_683_5)
            / (((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_344_9e-4) * r
                + 0.015_198_666_563_616_457)
                * r
                + 0.148_103_976_427_480_07)
                * r
                + 0.689_767_334_985_100_05)
                * r
                + 1.676_384_830_183_803_8)
                * r
                + 2.053_191_626_637_759)
                * r
                + 1.0)
    } else {
        let r = r - 5.0;
        (((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 0.001_242_660_947_388_078_4)
            * r
            + 0.026_532_189_526_576_124)
            * r
            + 0.296_560_571_828_504_89)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114_4)
            * r
            + 6.657_904_643_501_103_8)
            / (((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_446e-7) * r
                + 1.846_318_317_510_054_8e-5)
                * r
                + 7.868_691_311_456_132_6e-4)
                * r
                + 0.014_875_361_290_850_615)
                * r
                + 0.136_929_880_922_735_8)
                * r
                + 0.599_832_206_555_888)
                * r
                + 1.0)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

fn d1_d2(env: &MarketEnv, strike: f64, tau: f64, vol: f64) -> (f64, f64) {
    let sd = vol * tau.sqrt();
    let d1 = ((env.spot / strike).ln() + (env.rd - env.rf + 0.5 * vol * vol) * tau) / sd;
    (d1, d1 - sd)
}

/// Garman-Kohlhagen premium in domestic currency.
pub fn gk_price(env: &MarketEnv, strike: f64, tau: f64, vol: f64, kind: OptionKind) -> f64 {
    let phi = kind.sign();
    let df_d = (-env.rd * tau).exp();
    let df_f = (-env.rf * tau).exp();
    if vol <= 0.0 {
        let fwd_value = env.spot * df_f - strike * df_d;
        return (phi * fwd_value).max(0.0);
    }
    let (d1, d2) = d1_d2(env, strike, tau, vol);
    phi * (env.spot * df_f * norm_cdf(phi * d1) - strike * df_d * norm_cdf(phi * d2))
}

/// Spot delta without premium adjustment, `phi e^{-rf tau} N(phi d1)`.
pub fn gk_spot_delta(env: &MarketEnv, strike: f64, tau: f64, vol: f64, kind: OptionKind) -> f64 {
    let phi = kind.sign();
    let (d1, _) = d1_d2(env, strike, tau, vol);
    phi * (-env.rf * tau).exp() * norm_cdf(phi * d1)
}

/// Sensitivity of the premium to the volatility.
pub fn gk_vega(env: &MarketEnv, strike: f64, tau: f64, vol: f64) -> f64 {
    let (d1, _) = d1_d2(env, strike, tau, vol);
    env.spot * (-env.rf * tau).exp() * norm_pdf(d1) * tau.sqrt()
}
