use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::args::Format;
use crate::error::{CliError, CliResult};

/// Tabular view of a result for CSV output.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push<I: IntoIterator<Item = String>>(&mut self, row: I) {
        self.rows.push(row.into_iter().collect());
    }
}

pub struct Report {
    pub config: Value,
    pub result: Value,
    pub table: Table,
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result serializes")
}

fn render(report: &Report, format: Format) -> CliResult<Vec<u8>> {
    match format {
        Format::Json => {
            let doc = serde_json::json!({ "config": report.config, "result": report.result });
            let mut out = serde_json::to_vec_pretty(&doc).expect("document serializes");
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut out = format!("# config: {}\n", report.config).into_bytes();
            {
                let mut w = csv::Writer::from_writer(&mut out);
                let fail = |e: csv::Error| CliError::Output(e.to_string());
                w.write_record(&report.table.header).map_err(fail)?;
                for row in &report.table.rows {
                    w.write_record(row).map_err(fail)?;
                }
                w.flush().map_err(|e| CliError::Output(e.to_string()))?;
            }
            Ok(out)
        }
    }
}

pub fn emit(report: &Report, format: Format, path: Option<&Path>) -> CliResult<()> {
    let bytes = render(report, format)?;
    let result = match path {
        Some(p) => File::create(p).and_then(|mut f| f.write_all(&bytes)),
        None => io::stdout().lock().write_all(&bytes),
    };
    result.map_err(|e| CliError::Output(e.to_string()))
}
