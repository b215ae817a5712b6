use std::fs::OpenOptions;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

/// One CSV row per (instance, algorithm). Exact quantities are rendered as
/// terminating decimals or `p/q` fractions; `lp_value` is a float printed
/// with nine fractional digits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub instance_id: String,
    pub n: usize,
    pub k: Option<usize>,
    pub epsilon: String,
    pub algorithm: String,
    pub cost: String,
    pub bins: usize,
    pub rejected_cost: String,
    pub lp_value: Option<String>,
    pub opt_exact: Option<String>,
    pub guarantee_mult: Option<String>,
    pub guarantee_add: Option<String>,
    pub runtime_ms: String,
}

pub const HEADER: [&str; 13] = [
    "instance_id",
    "n",
    "k",
    "epsilon",
    "algorithm",
    "cost",
    "bins",
    "rejected_cost",
    "lp_value",
    "opt_exact",
    "guarantee_mult",
    "guarantee_add",
    "runtime_ms",
];

fn write_rows<W: Write>(sink: W, records: &[RunRecord], header: bool) -> anyhow::Result<()> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(sink);
    if header {
        writer.write_record(HEADER)?;
    }
    for record in records {
        writer.serialize(record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Appends rows to `path`, writing the header first when the file is new or empty.
pub fn append(path: Option<&Path>, records: &[RunRecord]) -> anyhow::Result<()> {
    match path {
        None => write_rows(io::stdout().lock(), records, true),
        Some(path) => {
            let file = OpenOptions::new().create(true).append(true).open(path)?;
            let empty = file.metadata()?.len() == 0;
            write_rows(file, records, empty)
        }
    }
}

pub fn to_string(records: &[RunRecord]) -> anyhow::Result<String> {
    let mut buf = Vec::new();
    write_rows(&mut buf, records, true)?;
    Ok(String::from_utf8(buf)?)
}
