use std::collections::BTreeMap;
use std::fs;

use heston_fx::analytic::{greeks, marginal_density, vanilla_price, CfFormulation};
use heston_fx::calibration::{
    calibrate_surface, model_smile, pillar_strikes, synthetic_slice, CalibrationOptions, SmileQuote,
    SmileSlice, SurfaceOptions,
};
use heston_fx::fft::{fft_price_ladder, FftGrid};
use heston_fx::mc::{mc_price_summary, simulate, simulate_summary, SimConfig, SimSummary, StepCount, VarianceScheme};
use heston_fx::quadrature::QuadratureConfig;
use heston_fx::variance::{bessel_transform_check, feller_report, forward_correlation, forward_vol_of_vol};
use heston_fx::{HestonParams, MarketEnv, OptionKind, VanillaOption};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::args::*;
use crate::config::Merged;
use crate::error::{CliError, CliResult};
use crate::output::{to_value, Report, Table};

fn kind(k: Kind) -> OptionKind {
    match k {
        Kind::Call => OptionKind::Call,
        Kind::Put => OptionKind::Put,
    }
}

fn kind_label(k: OptionKind) -> String {
    match k {
        OptionKind::Call => "call".into(),
        OptionKind::Put => "put".into(),
    }
}

fn formulation(f: Formulation) -> CfFormulation {
    match f {
        Formulation::Original => CfFormulation::Original,
        Formulation::Transformed => CfFormulation::Transformed,
    }
}

fn config<T: Serialize>(name: &str, merged: &Merged, options: &T) -> Value {
    json!({ "subcommand": name, "params": merged, "options": options })
}

fn num(x: f64) -> String {
    x.to_string()
}

/// Option grid ordered by tenor, then strike.
fn option_grid(a: &OptionArgs) -> Vec<VanillaOption> {
    let mut taus = a.tau.clone();
    let mut strikes = a.strike.clone();
    taus.sort_by(f64::total_cmp);
    strikes.sort_by(f64::total_cmp);
    taus.iter()
        .flat_map(|&tau| strikes.iter().map(move |&strike| VanillaOption { strike, tau, kind: kind(a.kind) }))
        .collect()
}

pub fn price(merged: &Merged, a: &OptionArgs) -> CliResult<Report> {
    let (p, env) = (merged.model()?, merged.market()?);
    let quad = QuadratureConfig::default();
    let opts = option_grid(a);
    let prices = opts
        .par_iter()
        .map(|o| vanilla_price(&p, &env, &o.validate()?, &quad, formulation(a.formulation)))
        .collect::<heston_fx::Result<Vec<f64>>>()?;
    let mut table = Table::new(&["tau", "strike", "kind", "price"]);
    let mut rows = Vec::new();
    for (o, v) in opts.iter().zip(&prices) {
        table.push([num(o.tau), num(o.strike), kind_label(o.kind), num(*v)]);
        rows.push(json!({ "tau": o.tau, "strike": o.strike, "kind": kind_label(o.kind), "price": v }));
    }
    Ok(Report {
        config: config("price", merged, a),
        result: Value::Array(rows),
        table,
    })
}

pub fn greeks_cmd(merged: &Merged, a: &OptionArgs) -> CliResult<Report> {
    let (p, env) = (merged.model()?, merged.market()?);
    let quad = QuadratureConfig::default();
    let opts = option_grid(a);
    let all = opts
        .par_iter()
        .map(|o| greeks(&p, &env, &o.validate()?, &quad, formulation(a.formulation)))
        .collect::<heston_fx::Result<Vec<_>>>()?;
    let mut table = Table::new(&[
        "tau", "strike", "kind", "price", "delta", "dual_delta", "gamma", "rho_d", "rho_f", "vega", "volga", "vanna",
        "theta",
    ]);
    let mut rows = Vec::new();
    for (o, g) in opts.iter().zip(&all) {
        table.push([
            num(o.tau),
            num(o.strike),
            kind_label(o.kind),
            num(g.price),
            num(g.delta),
            num(g.dual_delta),
            num(g.gamma),
            num(g.rho_d),
            num(g.rho_f),
            num(g.vega),
            num(g.volga),
            num(g.vanna),
            num(g.theta),
        ]);
        let mut row = json!({ "tau": o.tau, "strike": o.strike, "kind": kind_label(o.kind) });
        if let (Value::Object(m), Value::Object(g)) = (&mut row, to_value(g)) {
            m.extend(g);
        }
        rows.push(row);
    }
    Ok(Report {
        config: config("greeks", merged, a),
        result: Value::Array(rows),
        table,
    })
}

pub fn density(merged: &Merged, a: &DensityArgs) -> CliResult<Report> {
    let p = merged.model()?;
    if a.n_points < 2 || !(a.x_max > a.x_min) {
        return Err(CliError::Usage("density needs --n-points >= 2 and --x-max > --x-min".into()));
    }
    let h = (a.x_max - a.x_min) / (a.n_points - 1) as f64;
    let xs: Vec<f64> = (0..a.n_points).map(|i| a.x_min + h * i as f64).collect();
    let ys = marginal_density(&p, a.time_lag, &xs, &QuadratureConfig::default())?;
    let mut table = Table::new(&["x", "density"]);
    for (x, y) in xs.iter().zip(&ys) {
        table.push([num(*x), num(*y)]);
    }
    Ok(Report {
        config: config("density", merged, a),
        result: json!({ "x": xs, "density": ys }),
        table,
    })
}

pub fn fft(merged: &Merged, a: &FftArgs) -> CliResult<Report> {
    let (p, env) = (merged.model()?, merged.market()?);
    let grid = FftGrid::new(a.n_points, a.eta, a.alpha)?;
    let res = fft_price_ladder(&p, &env, a.tau, &grid)?;
    let lo = a.strike_min.unwrap_or(0.0);
    let hi = a.strike_max.unwrap_or(f64::INFINITY);
    let mut table = Table::new(&["strike", "call_price", "put_price"]);
    let mut rows = Vec::new();
    for ((k, c), q) in res.strikes().iter().zip(&res.call_prices).zip(res.put_prices()) {
        if *k >= lo && *k <= hi {
            table.push([num(*k), num(*c), num(q)]);
            rows.push(json!({ "strike": k, "call_price": c, "put_price": q }));
        }
    }
    Ok(Report {
        config: config("fft", merged, a),
        result: json!({
            "tau": a.tau,
            "log_strike_spacing": grid.strike_spacing(),
            "clamped": res.clamped,
            "ladder": rows,
        }),
        table,
    })
}

fn summary_stats(sum: &SimSummary, env: &MarketEnv, a: &SimulateArgs) -> CliResult<Value> {
    let (spot, spot_se) = sum.estimate(|s, _| s);
    let (var, var_se) = sum.estimate(|_, v| v);
    let stats = sum.boundary_stats();
    let min_var = stats.min_var.iter().copied().fold(f64::INFINITY, f64::min);
    let mut options = Vec::new();
    for &k in &a.strike {
        let opt = VanillaOption { strike: k, tau: a.horizon, kind: kind(a.kind) };
        let (price, se) = mc_price_summary(sum, &opt, env)?;
        options.push(json!({ "strike": k, "kind": kind_label(opt.kind), "price": price, "std_error": se }));
    }
    Ok(json!({
        "n_paths": sum.terminal_spot.len(),
        "n_steps": sum.config.n_steps(),
        "terminal_spot": { "mean": spot, "std_error": spot_se },
        "terminal_var": { "mean": var, "std_error": var_se },
        "zero_fraction": stats.zero_fraction,
        "min_var": min_var,
        "options": options,
    }))
}

pub fn simulate_cmd(merged: &Merged, a: &SimulateArgs) -> CliResult<Report> {
    let (p, env) = (merged.model()?, merged.market()?);
    let scheme = match a.scheme {
        Scheme::EulerAbsorbing => VarianceScheme::EulerAbsorbing,
        Scheme::EulerReflecting => VarianceScheme::EulerReflecting,
        Scheme::Qe => VarianceScheme::QuadraticExponential,
    };
    let cfg = SimConfig::new(a.horizon, a.paths)
        .with_scheme(scheme)
        .with_steps(StepCount::PerYear(a.steps_per_year))
        .with_seed(a.seed)
        .with_antithetic(!a.no_antithetic)
        .with_stationary_start(a.stationary_start);
    let name = "simulate";
    match a.mode {
        SimMode::Summary => {
            let sum = simulate_summary(&p, &env, &cfg)?;
            let result = summary_stats(&sum, &env, a)?;
            let table = if a.strike.is_empty() {
                let mut t = Table::new(&["path", "terminal_spot", "terminal_var", "min_var"]);
                for i in 0..sum.terminal_spot.len() {
                    t.push([i.to_string(), num(sum.terminal_spot[i]), num(sum.terminal_var[i]), num(sum.min_var[i])]);
                }
                t
            } else {
                let mut t = Table::new(&["strike", "kind", "price", "std_error"]);
                for o in result["options"].as_array().into_iter().flatten() {
                    t.push([
                        num(o["strike"].as_f64().unwrap_or(f64::NAN)),
                        o["kind"].as_str().unwrap_or_default().to_string(),
                        num(o["price"].as_f64().unwrap_or(f64::NAN)),
                        num(o["std_error"].as_f64().unwrap_or(f64::NAN)),
                    ]);
                }
                t
            };
            Ok(Report { config: config(name, merged, a), result, table })
        }
        SimMode::Paths => {
            let paths = simulate(&p, &env, &cfg)?;
            let mut result = summary_stats(&paths.summary(), &env, a)?;
            let mut t = Table::new(&["path", "t", "spot", "var"]);
            let mut traj = Vec::with_capacity(paths.n_paths);
            for i in 0..paths.n_paths {
                for (j, &time) in paths.time_grid.iter().enumerate() {
                    t.push([i.to_string(), num(time), num(paths.spot(i)[j]), num(paths.var(i)[j])]);
                }
                traj.push(json!({ "spot": paths.spot(i), "var": paths.var(i) }));
            }
            result["time_grid"] = to_value(&paths.time_grid);
            result["paths"] = Value::Array(traj);
            Ok(Report { config: config(name, merged, a), result, table: t })
        }
    }
}

pub fn feller(merged: &Merged) -> CliResult<Report> {
    let kappa = Merged::get(merged.kappa, "kappa")?;
    let theta = Merged::get(merged.theta, "theta")?;
    let sigma = Merged::get(merged.sigma, "sigma")?;
    if !(kappa > 0.0 && theta > 0.0 && sigma > 0.0) {
        return Err(CliError::Usage("feller needs positive kappa, theta and sigma".into()));
    }
    let r = feller_report(kappa, theta, sigma);
    let (beta, _) = bessel_transform_check(kappa, sigma, theta);
    let mut table = Table::new(&["alpha_dim", "beta", "satisfied", "outflowing", "regime"]);
    table.push([
        num(r.alpha_dim),
        num(beta),
        r.satisfied.to_string(),
        r.outflowing.to_string(),
        format!("{:?}", r.regime),
    ]);
    let mut result = to_value(&r);
    result["beta"] = json!(beta);
    Ok(Report {
        config: config("feller", merged, &json!({})),
        result,
        table,
    })
}

pub fn forward_vol(merged: &Merged, a: &ForwardVolArgs) -> CliResult<Report> {
    let kappa = Merged::get(merged.kappa, "kappa")?;
    let theta = Merged::get(merged.theta, "theta")?;
    let v0 = Merged::get(merged.v0, "v0")?;
    let sigma = forward_vol_of_vol(a.sigma_t1, a.sigma_t2, a.t1, a.t2, kappa, theta, v0)?;
    let rho = match (a.rho_t1, a.rho_t2) {
        (Some(r1), Some(r2)) => Some(forward_correlation(r1, r2, a.t1, a.t2)?),
        (None, None) => None,
        _ => return Err(CliError::Usage("give both --rho-t1 and --rho-t2 or neither".into())),
    };
    let mut table = Table::new(&["t1", "t2", "forward_sigma", "forward_rho"]);
    table.push([num(a.t1), num(a.t2), num(sigma), rho.map(num).unwrap_or_default()]);
    Ok(Report {
        config: config("forward-vol", merged, a),
        result: json!({ "t1": a.t1, "t2": a.t2, "forward_sigma": sigma, "forward_rho": rho }),
        table,
    })
}

#[derive(Debug, Deserialize)]
struct SmileRow {
    tenor_years: f64,
    delta: f64,
    quote_vol: f64,
}

pub fn read_smile(path: &std::path::Path) -> CliResult<Vec<SmileSlice>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut by_tenor: BTreeMap<u64, (f64, Vec<SmileQuote>)> = BTreeMap::new();
    for row in rdr.deserialize::<SmileRow>() {
        let row = row.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        if !(row.tenor_years > 0.0) {
            return Err(CliError::Input(format!("{}: tenor {} must be positive", path.display(), row.tenor_years)));
        }
        // positive floats order like their bit patterns
        by_tenor
            .entry(row.tenor_years.to_bits())
            .or_insert_with(|| (row.tenor_years, Vec::new()))
            .1
            .push(SmileQuote { delta_pillar: row.delta, implied_vol: row.quote_vol });
    }
    if by_tenor.is_empty() {
        return Err(CliError::Input(format!("{}: no quotes", path.display())));
    }
    by_tenor
        .into_values()
        .map(|(tau, quotes)| SmileSlice::new(tau, quotes).map_err(CliError::from))
        .collect()
}

pub fn calibrate(merged: &Merged, a: &CalibrateArgs) -> CliResult<(Report, Option<CliError>)> {
    let env = merged.market()?;
    let slices = read_smile(&a.smile)?;
    let opts = SurfaceOptions {
        fixed_v0: a.fixed_v0,
        fixed_kappa: a.fixed_kappa,
        calibration: CalibrationOptions { max_evals: a.max_evals, ..Default::default() },
    };
    let surface = calibrate_surface(&slices, &env, &opts)?;
    let mut table = Table::new(&["tenor_years", "delta", "strike", "market_vol", "model_vol"]);
    let mut failure = None;
    for (slice, fit) in slices.iter().zip(&surface.slices) {
        match fit {
            Ok(r) => {
                for (i, q) in slice.quotes.iter().enumerate() {
                    table.push([
                        num(r.tau),
                        num(q.delta_pillar),
                        num(r.strikes[i]),
                        num(r.market_vols[i]),
                        num(r.model_vols[i]),
                    ]);
                }
            }
            Err(name) => {
                failure.get_or_insert(CliError::Slice { name: name.clone(), tau: slice.tau });
            }
        }
    }
    let report = Report {
        config: config("calibrate", merged, a),
        result: to_value(&surface),
        table,
    };
    Ok((report, failure))
}

fn with_param(p: &HestonParams, which: SweepParam, value: f64) -> HestonParams {
    let mut q = *p;
    match which {
        SweepParam::Kappa => q.kappa = value,
        SweepParam::Theta => q.theta = value,
        SweepParam::Sigma => q.sigma = value,
        SweepParam::Rho => q.rho = value,
        SweepParam::V0 => q.v0 = value,
    }
    q
}

pub fn smile_sweep(merged: &Merged, a: &SweepArgs) -> CliResult<Report> {
    let (p, env) = (merged.model()?, merged.market()?);
    let quad = QuadratureConfig::default();
    let base = synthetic_slice(&p, &env, a.tau, &a.deltas, &quad)?;
    let strikes = pillar_strikes(&env, &base)?;
    let smiles = a
        .values
        .par_iter()
        .map(|&v| {
            let q = with_param(&p, a.param, v).validate()?;
            model_smile(&q, &env, &base, &quad)
        })
        .collect::<heston_fx::Result<Vec<_>>>()?;
    let label = to_value(&a.param);
    let mut table = Table::new(&["param", "value", "delta", "strike", "implied_vol"]);
    let mut rows = Vec::new();
    for (v, vols) in a.values.iter().zip(&smiles) {
        for ((q, o), vol) in base.quotes.iter().zip(&strikes).zip(vols) {
            table.push([
                label.as_str().unwrap_or_default().to_string(),
                num(*v),
                num(q.delta_pillar),
                num(o.strike),
                num(*vol),
            ]);
        }
        let convexity = if vols.len() >= 3 {
            let atm = base.quotes.iter().position(|q| q.delta_pillar == 0.5);
            let put = base.quotes.iter().position(|q| q.delta_pillar == -0.25);
            let call = base.quotes.iter().position(|q| q.delta_pillar == 0.25);
            match (put, atm, call) {
                (Some(i), Some(j), Some(k)) => Some(vols[i] + vols[k] - 2.0 * vols[j]),
                _ => None,
            }
        } else {
            None
        };
        rows.push(json!({
            "value": v,
            "strikes": strikes.iter().map(|o| o.strike).collect::<Vec<_>>(),
            "implied_vols": vols,
            "convexity_25d": convexity,
        }));
    }
    Ok(Report {
        config: config("smile-sweep", merged, a),
        result: json!({ "param": label, "base_smile": base, "smiles": rows }),
        table,
    })
}
