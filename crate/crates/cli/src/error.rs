use std::fmt;

use serde::Serialize;

/// Everything that ends a run early. Library errors keep their own names.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
    Output(String),
    Lib(heston_fx::Error),
    /// A calibration slice failed; carries the library error name.
    Slice { name: String, tau: f64 },
}

impl CliError {
    pub fn name(&self) -> &str {
        match self {
            CliError::Usage(_) => "UsageError",
            CliError::Input(_) => "InputError",
            CliError::Output(_) => "OutputError",
            CliError::Lib(e) => e.name(),
            CliError::Slice { name, .. } => name,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Input(_) => 2,
            CliError::Slice { name, .. }
                if matches!(name.as_str(), "ValidationFailed" | "InvalidConfig" | "DegenerateSlice") =>
            {
                2
            }
            CliError::Output(_) | CliError::Slice { .. } => 1,
            CliError::Lib(e) if e.is_validation() => 2,
            CliError::Lib(_) => 1,
        }
    }

    pub fn report(&self) -> String {
        #[derive(Serialize)]
        struct Report<'a> {
            error: &'a str,
            message: String,
            exit_code: u8,
        }
        serde_json::to_string(&Report {
            error: self.name(),
            message: self.to_string(),
            exit_code: self.exit_code(),
        })
        .expect("error report serializes")
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Input(m) | CliError::Output(m) => f.write_str(m),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Slice { name, tau } => write!(f, "calibration of the {tau}y slice failed: {name}"),
        }
    }
}

impl From<heston_fx::Error> for CliError {
    fn from(e: heston_fx::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<heston_fx::Violations> for CliError {
    fn from(v: heston_fx::Violations) -> Self {
        CliError::Lib(heston_fx::Error::Invalid(v))
    }
}

pub type CliResult<T> = Result<T, CliError>;
