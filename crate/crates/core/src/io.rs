//! File formats: count tables and threshold curves as CSV, configs and reports as JSON.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::analysis::{BoundParams, SignificanceMode, SteeringReport, WernerThreshold};
use crate::apparatus::DeadTimeModel;
use crate::error::{Error, Result};
use crate::montecarlo::{CountTable, ExperimentConfig};
use crate::outcome::{AliceOutcome, Sign};

pub const COUNT_TABLE_HEADER: [&str; 4] = ["setting", "a", "b", "count"];
pub const THRESHOLD_HEADER: [&str; 2] = ["eta", "v_min"];
pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

fn format_outcome(v: i8) -> &'static str {
    match v {
        1 => "+1",
        -1 => "-1",
        _ => "0",
    }
}

fn parse_outcome(field: &str, line: u64, column: &str) -> Result<i8> {
    match field {
        "+1" | "1" => Ok(1),
        "-1" => Ok(-1),
        "0" | "+0" | "-0" => Ok(0),
        other => Err(Error::Parse { line, message: format!("column '{column}': '{other}' is not +1, -1 or 0") }),
    }
}

fn parse_count(field: &str, line: u64) -> Result<u64> {
    if let Ok(n) = field.parse::<u64>() {
        return Ok(n);
    }
    match field.parse::<f64>() {
        Ok(x) if x.is_finite() => {
            Err(Error::Validation { line, message: format!("count must be a nonnegative integer, got {field}") })
        }
        _ => Err(Error::Parse { line, message: format!("count '{field}' is not a number") }),
    }
}

/// Parse `setting,a,b,count` CSV. Cells absent from the file are zero; tables come
/// back ordered by setting index.
pub fn read_count_tables<R: Read>(reader: R) -> Result<Vec<CountTable>> {
    let mut csv = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let mut records = csv.records();
    match records.next() {
        Some(header) => {
            let header = header?;
            if header.iter().ne(COUNT_TABLE_HEADER) {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("expected header '{}'", COUNT_TABLE_HEADER.join(",")),
                });
            }
        }
        None => return Err(Error::Parse { line: 1, message: "empty file".into() }),
    }

    let mut tables: BTreeMap<usize, CountTable> = BTreeMap::new();
    let mut seen = std::collections::HashSet::new();
    for record in records {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != 4 {
            return Err(Error::Parse { line, message: format!("expected 4 fields, found {}", record.len()) });
        }
        let setting: usize = record[0]
            .parse()
            .map_err(|_| Error::Parse { line, message: format!("setting '{}' is not an index", &record[0]) })?;
        let a = AliceOutcome::try_from(parse_outcome(&record[1], line, "a")?).expect("value in range");
        let b = match parse_outcome(&record[2], line, "b")? {
            0 => return Err(Error::Parse { line, message: "column 'b' must be +1 or -1".into() }),
            v => Sign::try_from(v).expect("value in range"),
        };
        let count = parse_count(&record[3], line)?;
        if !seen.insert((setting, a, b)) {
            return Err(Error::Validation { line, message: format!("duplicate cell (setting {setting}, a {}, b {})", a.value(), b.value()) });
        }
        tables.entry(setting).or_insert_with(|| CountTable::new(setting)).set(a, b, count);
    }
    Ok(tables.into_values().collect())
}

pub fn write_count_tables<W: Write>(writer: W, tables: &[CountTable]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(COUNT_TABLE_HEADER)?;
    for t in tables {
        for a in AliceOutcome::ALL {
            for b in Sign::ALL {
                let setting = t.setting.to_string();
                let count = t.get(a, b).to_string();
                csv.write_record([setting.as_str(), format_outcome(a.value()), format_outcome(b.value()), count.as_str()])?;
            }
        }
    }
    csv.flush()?;
    Ok(())
}

pub fn load_count_tables(path: impl AsRef<Path>) -> Result<Vec<CountTable>> {
    read_count_tables(BufReader::new(File::open(path)?))
}

pub fn save_count_tables(path: impl AsRef<Path>, tables: &[CountTable]) -> Result<()> {
    write_count_tables(BufWriter::new(File::create(path)?), tables)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let config: ExperimentConfig = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    config.validate()?;
    Ok(config)
}

pub fn save_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// One `(eta, V_min)` point of a violation-threshold curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdRow {
    pub eta: f64,
    pub threshold: WernerThreshold,
}

/// `eta,v_min` CSV; `v_min` is left empty where no visibility suffices.
pub fn write_threshold_csv<W: Write>(writer: W, rows: &[ThresholdRow]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(THRESHOLD_HEADER)?;
    for row in rows {
        let v = row.threshold.visibility().map(|v| v.to_string()).unwrap_or_default();
        csv.write_record([row.eta.to_string(), v])?;
    }
    csv.flush()?;
    Ok(())
}

/// Wall-clock data, kept apart from everything covered by the determinism guarantee.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timestamps {
    pub created_unix_s: u64,
}

impl Timestamps {
    pub fn now() -> Self {
        let created_unix_s = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        Timestamps { created_unix_s }
    }
}

/// Provenance of a run. Every report carries the manifest that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<ExperimentConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tables_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameters: Option<BoundParams>,
    pub significance_mode: SignificanceMode,
    pub dead_time_model: DeadTimeModel,
    pub timestamps: Timestamps,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            tool_version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            seed: None,
            config: None,
            tables_path: None,
            parameters: None,
            significance_mode: SignificanceMode::default(),
            dead_time_model: DeadTimeModel::default(),
            timestamps: Timestamps::now(),
        }
    }
}

/// The JSON document emitted by `analyze`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    #[serde(flatten)]
    pub report: SteeringReport,
    pub manifest: RunManifest,
}

/// Compact JSON of `value` with every `timestamps` field removed: the part of a
/// payload that must be byte-identical across runs with the same inputs.
pub fn deterministic_payload<T: Serialize>(value: &T) -> Result<String> {
    fn strip(v: &mut serde_json::Value) {
        match v {
            serde_json::Value::Object(map) => {
                map.remove("timestamps");
                map.values_mut().for_each(strip);
            }
            serde_json::Value::Array(items) => items.iter_mut().for_each(strip),
            _ => {}
        }
    }
    let mut v = serde_json::to_value(value)?;
    strip(&mut v);
    Ok(serde_json::to_string(&v)?)
}

/// Structured error document for failed runs.
pub fn error_json(err: &Error) -> serde_json::Value {
    let mut doc = serde_json::json!({ "error": { "kind": err.kind(), "message": err.to_string() } });
    if let Error::Parse { line, .. } | Error::Validation { line, .. } = err {
        doc["error"]["line"] = serde_json::json!(line);
    }
    doc
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(s: &str) -> Result<Vec<CountTable>> {
        read_count_tables(s.as_bytes())
    }

    #[test]
    fn reads_one_full_setting() {
        let csv = "setting,a,b,count\n0,+1,+1,5\n0,+1,-1,95\n0,-1,+1,90\n0,-1,-1,4\n0,0,+1,30\n0,0,-1,31\n";
        let tables = parse(csv).unwrap();
        assert_eq!(tables.len(), 1);
        assert_eq!(tables[0].counts, [[5, 95], [90, 4], [30, 31]]);
    }

    #[test]
    fn missing_cells_default_to_zero() {
        let tables = parse("setting,a,b,count\n1,+1,+1,7\n1,1,-1,3\n").unwrap();
        assert_eq!(tables[0].setting, 1);
        assert_eq!(tables[0].counts, [[7, 3], [0, 0], [0, 0]]);
    }

    #[test]
    fn malformed_rows_report_line_numbers() {
        let err = parse("setting,a,b,count\n0,+1,+1,5\n0,+2,+1,5\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let err = parse("setting,a,b,count\n0,+1,+1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
        let err = parse("setting,a,b,count\n0,+1,0,5\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
        let err = parse("setting,a,b,count\n0,+1,+1,lots\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
        assert!(matches!(parse("s,a,b,c\n").unwrap_err(), Error::Parse { line: 1, .. }));
        assert!(matches!(parse("").unwrap_err(), Error::Parse { line: 1, .. }));
    }

    #[test]
    fn rejects_negative_fractional_and_duplicate_counts() {
        let err = parse("setting,a,b,count\n0,+1,+1,-3\n").unwrap_err();
        assert!(matches!(err, Error::Validation { line: 2, .. }), "{err:?}");
        let err = parse("setting,a,b,count\n0,+1,+1,2.5\n").unwrap_err();
        assert!(matches!(err, Error::Validation { line: 2, .. }), "{err:?}");
        let err = parse("setting,a,b,count\n0,+1,+1,2\n0,1,+1,2\n").unwrap_err();
        assert!(matches!(err, Error::Validation { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn error_document_carries_kind_and_line() {
        let err = parse("setting,a,b,count\n0,+1,+1,-3\n").unwrap_err();
        let doc = error_json(&err);
        assert_eq!(doc["error"]["kind"], "validation");
        assert_eq!(doc["error"]["line"], 2);
    }

    #[test]
    fn threshold_csv_leaves_unreachable_blank() {
        let rows = [
            ThresholdRow { eta: 0.4, threshold: WernerThreshold::Unreachable },
            ThresholdRow { eta: 0.5, threshold: WernerThreshold::Reachable(1.0) },
        ];
        let mut out = Vec::new();
        write_threshold_csv(&mut out, &rows).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "eta,v_min\n0.4,\n0.5,1\n");
    }

    #[test]
    fn payload_drops_timestamps() {
        let a = RunManifest::new("analyze");
        let mut b = a.clone();
        b.timestamps.created_unix_s += 100;
        assert_eq!(deterministic_payload(&a).unwrap(), deterministic_payload(&b).unwrap());
        assert!(!deterministic_payload(&a).unwrap().contains("created_unix_s"));
    }

    fn arb_tables() -> impl Strategy<Value = Vec<CountTable>> {
        prop::collection::btree_map(0usize..10, prop::array::uniform3(prop::array::uniform2(0u64..u64::MAX)), 1..4)
            .prop_map(|m| m.into_iter().map(|(setting, counts)| CountTable { setting, counts }).collect())
    }

    proptest! {
        #[test]
        fn count_tables_round_trip(tables in arb_tables()) {
            let mut buf = Vec::new();
            write_count_tables(&mut buf, &tables).unwrap();
            prop_assert_eq!(read_count_tables(buf.as_slice()).unwrap(), tables);
        }
    }
}
