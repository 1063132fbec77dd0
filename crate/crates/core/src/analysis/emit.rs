use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use super::{AnalysisError, ComparisonReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!("unknown report format `{other}` (expected json or csv)")),
        }
    }
}

/// Fixed 4-decimal rendering, rounding half away from zero on the shortest
/// decimal representation of `x` (so 6.15075 renders as 6.1508).
pub fn format_fixed4(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{}", x.abs());
    let (int_part, frac_part) = s.split_once('.').unwrap_or((&s, ""));
    let mut digits: Vec<u8> = int_part.bytes().map(|b| b - b'0').collect();
    let int_len = digits.len();
    let frac: Vec<u8> = frac_part.bytes().map(|b| b - b'0').collect();
    digits.extend((0..4).map(|i| frac.get(i).copied().unwrap_or(0)));
    if frac.get(4).is_some_and(|&d| d >= 5) {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, 1);
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    let split = digits.len() - 4;
    debug_assert!(split >= int_len);
    let render = |ds: &[u8]| ds.iter().map(|d| char::from(b'0' + d)).collect::<String>();
    let body = format!("{}.{}", render(&digits[..split]), render(&digits[split..]));
    if x < 0.0 && body.bytes().any(|b| b != b'0' && b != b'.') {
        format!("-{body}")
    } else {
        body
    }
}

pub(crate) mod opt_fixed4 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) if x.is_finite() => super::format_fixed4(*x)
                .parse::<serde_json::Number>()
                .map_err(serde::ser::Error::custom)?
                .serialize(s),
            _ => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Option::<f64>::deserialize(d)
    }
}

fn to_pretty_json<T: Serialize>(value: &T) -> String {
    // through Value so object keys come out sorted
    let v = serde_json::to_value(value).expect("report serializes");
    let mut out = serde_json::to_string_pretty(&v).expect("value serializes");
    out.push('\n');
    out
}

pub const CSV_HEADER: [&str; 12] = [
    "substation_id",
    "bay_id",
    "method",
    "n_assets",
    "n_valid",
    "n_invalid",
    "score",
    "band",
    "capped",
    "indeterminate",
    "raw",
    "error",
];

fn to_csv(report: &ComparisonReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for sub in &report.substations {
        for bay in &sub.bays {
            for r in &bay.results {
                w.write_record([
                    sub.substation_id.as_str(),
                    bay.bay_id.as_str(),
                    r.method.as_str(),
                    &bay.n_assets.to_string(),
                    &r.n_valid.to_string(),
                    &r.n_invalid.to_string(),
                    &r.score.map(format_fixed4).unwrap_or_default(),
                    r.band.as_str(),
                    &r.capped.to_string(),
                    &r.indeterminate.to_string(),
                    &r.raw.to_string(),
                    r.error.as_deref().unwrap_or(""),
                ])
                .expect("in-memory write");
            }
        }
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8")
}

/// Render the report. Output is a pure function of the report: keys sorted,
/// scores fixed to 4 decimals, no timestamps.
pub fn emit_report(report: &ComparisonReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => to_pretty_json(report),
        ReportFormat::Csv => to_csv(report),
    }
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn emit_json_value<T: Serialize>(value: &T) -> String {
    to_pretty_json(value)
}

pub fn write_output(path: &Path, contents: &str) -> Result<(), AnalysisError> {
    std::fs::write(path, contents).map_err(|source| AnalysisError::UnwritableOutput {
        path: path.display().to_string(),
        source,
    })
}
