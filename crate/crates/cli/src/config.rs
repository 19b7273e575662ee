use std::fs;

use heston_fx::{HestonParams, MarketEnv};
use serde::{Deserialize, Serialize};

use crate::args::ParamArgs;
use crate::error::{CliError, CliResult};

/// Parameter document after flags have been laid over the file. Fields a
/// subcommand does not need may stay empty.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Merged {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spot: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rd: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rf: Option<f64>,
}

impl Merged {
    pub fn load(args: &ParamArgs) -> CliResult<Self> {
        let mut m = match &args.params {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
            }
            None => Merged::default(),
        };
        let over = |slot: &mut Option<f64>, flag: Option<f64>| {
            if flag.is_some() {
                *slot = flag;
            }
        };
        over(&mut m.kappa, args.kappa);
        over(&mut m.theta, args.theta);
        over(&mut m.sigma, args.sigma);
        over(&mut m.rho, args.rho);
        over(&mut m.v0, args.v0);
        over(&mut m.lambda, args.lambda);
        over(&mut m.spot, args.spot);
        over(&mut m.rd, args.rd);
        over(&mut m.rf, args.rf);
        Ok(m)
    }

    pub fn get(value: Option<f64>, name: &str) -> CliResult<f64> {
        value.ok_or_else(|| CliError::Usage(format!("missing parameter {name}: set it in --params or with --{name}")))
    }

    pub fn model(&self) -> CliResult<HestonParams> {
        let p = HestonParams {
            kappa: Self::get(self.kappa, "kappa")?,
            theta: Self::get(self.theta, "theta")?,
            sigma: Self::get(self.sigma, "sigma")?,
            rho: Self::get(self.rho, "rho")?,
            v0: Self::get(self.v0, "v0")?,
            lambda: self.lambda.unwrap_or(0.0),
        };
        Ok(p.validate()?)
    }

    pub fn market(&self) -> CliResult<MarketEnv> {
        let env = MarketEnv {
            spot: Self::get(self.spot, "spot")?,
            rd: Self::get(self.rd, "rd")?,
            rf: Self::get(self.rf, "rf")?,
        };
        Ok(env.validate()?)
    }
}
