use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

use super::{SweepRecord, SweepResult};

pub const RESULT_HEADER: [&str; 7] = ["dataset", "algorithm", "sparsity", "loss", "wall_time_ms", "seed", "flags"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(invalid(format!("unknown format '{s}', expected csv or json"))),
        }
    }
}

/// 17 significant digits, enough to reproduce every `f64` exactly.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "NaN".to_string()
    }
}

pub fn write_csv<W: Write>(res: &SweepResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULT_HEADER)?;
    for r in &res.records {
        w.write_record([
            r.dataset.clone(),
            r.algorithm.clone(),
            r.sparsity.to_string(),
            format_float(r.loss),
            r.wall_time_ms.to_string(),
            r.seed.to_string(),
            r.flags.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(res: &SweepResult, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, res)?;
    writeln!(out)?;
    Ok(())
}

pub fn emit_results(res: &SweepResult, format: Format, path: impl AsRef<Path>) -> Result<()> {
    let out = BufWriter::new(File::create(path)?);
    match format {
        Format::Csv => write_csv(res, out),
        Format::Json => write_json(res, out),
    }
}

pub fn read_csv_results<R: Read>(input: R) -> Result<SweepResult> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != RESULT_HEADER {
        return Err(Error::Schema(format!("unexpected result header {header:?}")));
    }
    let mut records = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |j: usize| rec.get(j).unwrap_or_default();
        let num = |j: usize| -> Result<u64> {
            field(j).parse().map_err(|_| Error::Parse {
                row: line + 1,
                column: RESULT_HEADER[j].into(),
                message: format!("'{}' is not an integer", field(j)),
            })
        };
        let loss = field(3).parse::<f64>().map_err(|_| Error::Parse {
            row: line + 1,
            column: "loss".into(),
            message: format!("'{}' is not a number", field(3)),
        })?;
        records.push(SweepRecord {
            dataset: field(0).to_string(),
            algorithm: field(1).to_string(),
            sparsity: num(2)? as usize,
            loss,
            wall_time_ms: num(4)?,
            seed: num(5)?,
            flags: field(6).to_string(),
        });
    }
    Ok(SweepResult { records })
}

pub fn read_json_results<R: Read>(input: R) -> Result<SweepResult> {
    Ok(serde_json::from_reader(input)?)
}
