//! Text form of measurement records.
//!
//! A record is written as its outcome indices separated by single spaces, so
//! it fits in one CSV cell. A record dump is the CSV emitted by the `records`
//! subcommand: columns `index,label,record`.

use weakmeas_core::MeasurementRecord;

use crate::csv::parse_header;
use crate::error::{config_err, CliError};

pub fn encode(record: &MeasurementRecord) -> String {
    let parts: Vec<String> = record.as_slice().iter().map(u8::to_string).collect();
    parts.join(" ")
}

pub fn decode(text: &str, alphabet: usize) -> Result<MeasurementRecord, CliError> {
    let mut out = Vec::new();
    for tok in text.split_whitespace() {
        let v: u8 = tok.parse().map_err(|_| config_err(format!("bad outcome `{tok}`")))?;
        out.push(v);
    }
    let record = MeasurementRecord::new(out);
    record.validate(alphabet)?;
    Ok(record)
}

/// A parsed record dump.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordDump {
    pub header: Vec<(String, String)>,
    pub labels: Vec<i8>,
    pub records: Vec<MeasurementRecord>,
}

impl RecordDump {
    pub fn header_value(&self, key: &str) -> Option<&str> {
        self.header.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

pub fn parse_dump(text: &str, alphabet: usize) -> Result<RecordDump, CliError> {
    let header = parse_header(text);
    let mut lines = text.lines().skip_while(|l| l.starts_with('#'));
    match lines.next() {
        Some("index,label,record") => {}
        other => return Err(config_err(format!("not a record dump (columns {other:?})"))),
    }
    let mut labels = Vec::new();
    let mut records = Vec::new();
    for line in lines.filter(|l| !l.is_empty()) {
        let mut cells = line.splitn(3, ',');
        let (_, label, rec) = match (cells.next(), cells.next(), cells.next()) {
            (Some(i), Some(l), Some(r)) => (i, l, r),
            _ => return Err(config_err(format!("malformed dump line `{line}`"))),
        };
        labels.push(label.parse().map_err(|_| config_err(format!("bad label `{label}`")))?);
        records.push(decode(rec, alphabet)?);
    }
    Ok(RecordDump { header, labels, records })
}
