//! Numerical integration for the Fourier inversion integrals.
//!
//! The default rule is an adaptive Gauss-Lobatto scheme (4-point Lobatto
//! with a 7-point Kronrod extension, after Gander and Gautschi) applied on
//! `[0, 1]` after mapping `phi = (1 - u) / u`. A fixed Gauss-Laguerre rule
//! is kept for benchmarking.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which integration rule evaluates the `[0, inf)` integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadratureRule {
    AdaptiveLobatto,
    /// Fixed 100-point Gauss-Laguerre rule whose largest abscissa is
    /// stretched onto `truncation`.
    GaussLaguerre,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evals: usize,
    /// Upper integration bound for fixed rules.
    pub truncation: f64,
    pub rule: QuadratureRule,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_evals: 200_000,
            truncation: 100.0,
            rule: QuadratureRule::AdaptiveLobatto,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::InvalidConfig(
                "quadrature tolerances must be positive".into(),
            ));
        }
        if self.max_evals < 100 {
            return Err(Error::InvalidConfig("max_evals must be at least 100".into()));
        }
        if self.rule == QuadratureRule::GaussLaguerre && !(self.truncation > 0.0) {
            return Err(Error::InvalidConfig("truncation must be positive".into()));
        }
        Ok(())
    }

    pub fn laguerre() -> Self {
        QuadratureConfig {
            rule: QuadratureRule::GaussLaguerre,
            ..Default::default()
        }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral<const N: usize> {
    pub value: [f64; N],
    pub error: f64,
    pub evals: usize,
}

const ALPHA: f64 = 0.816_496_580_927_726; // sqrt(2/3)
const BETA: f64 = 0.447_213_595_499_958; // 1/sqrt(5)
const X1: f64 = 0.942_882_415_695_480;
const X2: f64 = 0.641_853_342_345_781;
const X3: f64 = 0.236_383_199_662_150;

/// Adaptive Gauss-Lobatto integration of a vector-valued integrand on
/// `[a, b]`. Every component must meet `max(abs_tol, rel_tol * |I_k|)`.
pub fn adaptive_lobatto<const N: usize, F>(
    f: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<Integral<N>>
where
    F: Fn(f64) -> [f64; N],
{
    let m = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let nodes = [
        a,
        m - X1 * h,
        m - ALPHA * h,
        m - X2 * h,
        m - BETA * h,
        m - X3 * h,
        m,
        m + X3 * h,
        m + BETA * h,
        m + X2 * h,
        m + ALPHA * h,
        m + X1 * h,
        b,
    ];
    let y: Vec<[f64; N]> = nodes.iter().map(|&x| f(x)).collect();
    let mut evals = 13;

    // 13-point Kronrod estimate sets the global scale for the tolerance.
    let mut scale = [0.0; N];
    for k in 0..N {
        let is = h
            * (0.015_827_191_973_480_2 * (y[0][k] + y[12][k])
                + 0.094_273_840_218_850_0 * (y[1][k] + y[11][k])
                + 0.155_071_987_336_585 * (y[2][k] + y[10][k])
                + 0.188_821_573_960_182 * (y[3][k] + y[9][k])
                + 0.199_773_405_226_859 * (y[4][k] + y[8][k])
                + 0.224_926_465_333_340 * (y[5][k] + y[7][k])
                + 0.242_611_071_901_408 * y[6][k]);
        scale[k] = is.abs();
    }
    let tol_for = |scale: &[f64; N], k: usize| (cfg.rel_tol * scale[k]).max(cfg.abs_tol);

    struct Segment<const N: usize> {
        a: f64,
        b: f64,
        fa: [f64; N],
        fb: [f64; N],
    }

    let mut total = [0.0; N];
    let mut error = 0.0;
    let mut stack = vec![Segment {
        a,
        b,
        fa: y[0],
        fb: y[12],
    }];
    while let Some(seg) = stack.pop() {
        let h = 0.5 * (seg.b - seg.a);
        let m = 0.5 * (seg.a + seg.b);
        let mll = m - ALPHA * h;
        let ml = m - BETA * h;
        let mr = m + BETA * h;
        let mrr = m + ALPHA * h;
        let fmll = f(mll);
        let fml = f(ml);
        let fm = f(m);
        let fmr = f(mr);
        let fmrr = f(mrr);
        evals += 5;

        let mut i1 = [0.0; N];
        let mut converged = true;
        let mut seg_err: f64 = 0.0;
        for k in 0..N {
            let i2 = (h / 6.0) * (seg.fa[k] + seg.fb[k] + 5.0 * (fml[k] + fmr[k]));
            i1[k] = (h / 1470.0)
                * (77.0 * (seg.fa[k] + seg.fb[k])
                    + 432.0 * (fmll[k] + fmrr[k])
                    + 625.0 * (fml[k] + fmr[k])
                    + 672.0 * fm[k]);
            let e = (i1[k] - i2).abs();
            seg_err = seg_err.max(e);
            if !(e <= tol_for(&scale, k)) {
                converged = false;
            }
        }
        let too_small = mll <= seg.a || seg.b <= mrr;
        if converged || too_small {
            for k in 0..N {
                total[k] += i1[k];
            }
            error += seg_err;
            continue;
        }
        if evals > cfg.max_evals {
            return Err(Error::QuadratureNotConverged { evals, error: seg_err });
        }
        let pts = [seg.a, mll, ml, m, mr, mrr, seg.b];
        let vals = [seg.fa, fmll, fml, fm, fmr, fmrr, seg.fb];
        for i in (0..6).rev() {
            stack.push(Segment {
                a: pts[i],
                b: pts[i + 1],
                fa: vals[i],
                fb: vals[i + 1],
            });
        }
    }
    if total.iter().any(|v| !v.is_finite()) {
        return Err(Error::QuadratureNotConverged { evals, error: f64::NAN });
    }
    Ok(Integral {
        value: total,
        error,
        evals,
    })
}

/// Integrates `f` over `[0, inf)` under the configured rule.
pub fn integrate_half_line<const N: usize, F>(f: F, cfg: &QuadratureConfig) -> Result<[f64; N]>
where
    F: Fn(f64) -> [f64; N],
{
    cfg.validate()?;
    match cfg.rule {
        QuadratureRule::AdaptiveLobatto => {
            // phi = (1 - u) / u maps (0, 1] onto [0, inf). The integrand is
            // taken to vanish at infinity.
            let g = |u: f64| -> [f64; N] {
                if u <= 1e-100 {
                    return [0.0; N];
                }
                let phi = (1.0 - u) / u;
                let jac = 1.0 / (u * u);
                let mut v = f(phi);
                for x in v.iter_mut() {
                    *x *= jac;
                }
                v
            };
            Ok(adaptive_lobatto(g, 0.0, 1.0, cfg)?.value)
        }
        QuadratureRule::GaussLaguerre => {
            let rule = laguerre_100();
            let s = cfg.truncation / rule.nodes[rule.nodes.len() - 1];
            let mut total = [0.0; N];
            for (&x, &w) in rule.nodes.iter().zip(&rule.scaled_weights) {
                let v = f(s * x);
                for k in 0..N {
                    total[k] += s * w * v[k];
                }
            }
            if total.iter().any(|v| !v.is_finite()) {
                return Err(Error::QuadratureNotConverged {
                    evals: rule.nodes.len(),
                    error: f64::NAN,
                });
            }
            Ok(total)
        }
    }
}

/// Gauss-Laguerre abscissas with weights multiplied by `exp(x)`, so that
/// `int_0^inf f(x) dx ~ sum w_i f(x_i)`.
#[derive(Debug, Clone)]
pub struct LaguerreRule {
    pub nodes: Vec<f64>,
    pub scaled_weights: Vec<f64>,
}

/// Values of `L_n(x) e^{-x/2}` and `L_{n-1}(x) e^{-x/2}`; the scaling keeps
/// the recurrence in range for the large abscissas of high-order rules.
fn scaled_laguerre(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 0.0;
    let mut p = (-0.5 * x).exp();
    for k in 0..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = next;
    }
    (p, p_prev)
}

pub fn gauss_laguerre(n: usize) -> LaguerreRule {
    let nf = n as f64;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut z: f64 = 0.0;
    for i in 0..n {
        // Initial guesses from the asymptotic root spacing.
        z = match i {
            0 => 3.0 / (1.0 + 2.4 * nf),
            1 => z + 15.0 / (1.0 + 2.5 * nf),
            _ => {
                let ai = (i - 1) as f64;
                z + ((1.0 + 2.55 * ai) / (1.9 * ai)) * (z - nodes[i - 2])
            }
        };
        for _ in 0..100 {
            let (p, pm) = scaled_laguerre(n, z);
            // L_n' = n (L_n - L_{n-1}) / x, same scaling as p.
            let step = p / (nf * (p - pm) / z);
            z -= step;
            if step.abs() <= 1e-15 * z.abs() {
                break;
            }
        }
        let (_, pm) = scaled_laguerre(n, z);
        nodes.push(z);
        weights.push(z / (nf * nf * pm * pm));
    }
    LaguerreRule {
        nodes,
        scaled_weights: weights,
    }
}

pub fn laguerre_100() -> &'static LaguerreRule {
    static RULE: OnceLock<LaguerreRule> = OnceLock::new();
    RULE.get_or_init(|| gauss_laguerre(100))
}
