//! Reading and writing parameter scans.
//!
//! Three formats:
//!
//! * **long-CSV**: `run_id,<param_1>..<param_n>,observable,t,value`, one row
//!   per sample. Parameter values repeat on every row of a run and must agree.
//!   Runs are returned sorted by `run_id`, so row order never matters.
//! * **wide-CSV**: `run_id,<params...>,<observable>_<t>...`, one row per run.
//!   The time suffix must parse as a number; the observable is everything
//!   before the last `_`.
//! * **json**: the data model, serialized field by field.
//!
//! Both CSV variants may start with a `# tempo {...}` comment line carrying
//! units, parameter kinds, observable order and the time grid as JSON. The
//! emitters always write it, which is what makes CSV round trips lossless.
//! Without it, units are empty, parameters continuous, and long-CSV
//! observables sorted by name.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data_model::{
    Observable, ObservableSchema, Parameter, ParameterKind, ParameterScan, ParameterSchema,
    SimulationRun,
};
use crate::error::IngestError;

const META_PREFIX: &str = "# tempo ";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanFileFormat {
    LongCsv,
    WideCsv,
    Json,
}

impl FromStr for ScanFileFormat {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "long-csv" => Ok(Self::LongCsv),
            "wide-csv" => Ok(Self::WideCsv),
            "json" => Ok(Self::Json),
            other => Err(IngestError::UnknownFormat(other.to_string())),
        }
    }
}

impl fmt::Display for ScanFileFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::LongCsv => "long-csv",
            Self::WideCsv => "wide-csv",
            Self::Json => "json",
        })
    }
}

impl ScanFileFormat {
    /// Guess from a file extension: `.json`, otherwise long-CSV.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::Json,
            _ => Self::LongCsv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CsvMeta {
    scan_id: String,
    parameters: Vec<Parameter>,
    observables: Vec<Observable>,
    time_grid: Vec<f64>,
}

impl CsvMeta {
    fn of(scan: &ParameterScan) -> Self {
        Self {
            scan_id: scan.scan_id.clone(),
            parameters: scan.parameter_schema.parameters.clone(),
            observables: scan.observable_schema.observables.clone(),
            time_grid: scan.observable_schema.time_grid.clone(),
        }
    }
}

pub fn parse_scan(bytes: &[u8], format: ScanFileFormat) -> Result<ParameterScan, IngestError> {
    let text = std::str::from_utf8(bytes)?;
    let scan = match format {
        ScanFileFormat::Json => serde_json::from_str::<ParameterScan>(text)?,
        ScanFileFormat::LongCsv => parse_long(text)?,
        ScanFileFormat::WideCsv => parse_wide(text)?,
    };
    Ok(scan.checked()?)
}

/// Deterministic serialization; `parse_scan` with the same format inverts it.
pub fn emit_scan(scan: &ParameterScan, format: ScanFileFormat) -> Vec<u8> {
    match format {
        ScanFileFormat::Json => {
            let mut out = serde_json::to_vec_pretty(scan).expect("scan serializes");
            out.push(b'\n');
            out
        }
        ScanFileFormat::LongCsv => emit_long(scan),
        ScanFileFormat::WideCsv => emit_wide(scan),
    }
}

fn read_meta(text: &str) -> Result<Option<CsvMeta>, IngestError> {
    for line in text.lines() {
        if !line.starts_with('#') {
            break;
        }
        if let Some(json) = line.strip_prefix(META_PREFIX) {
            let meta: CsvMeta = serde_json::from_str(json)
                .map_err(|e| IngestError::Header(format!("bad metadata line: {e}")))?;
            return Ok(Some(meta));
        }
    }
    Ok(None)
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn parse_number(cell: &str, row: usize, column: usize) -> Result<f64, IngestError> {
    let err = |message: String| IngestError::Cell {
        row,
        column,
        message,
    };
    let v: f64 = cell
        .parse()
        .map_err(|_| err(format!("'{cell}' is not a number")))?;
    if !v.is_finite() {
        return Err(err(format!("'{cell}' is not a finite number")));
    }
    // Normalize -0.0 so that time keys compare by value.
    Ok(v + 0.0)
}

fn line_of(record: &csv::StringRecord) -> usize {
    record.position().map_or(0, |p| p.line() as usize)
}

fn check_param_header(names: &[String], meta: Option<&CsvMeta>) -> Result<(), IngestError> {
    if let Some(meta) = meta {
        let declared: Vec<&str> = meta.parameters.iter().map(|p| p.name.as_str()).collect();
        let found: Vec<&str> = names.iter().map(String::as_str).collect();
        if declared != found {
            return Err(IngestError::Header(format!(
                "parameter columns {found:?} do not match metadata {declared:?}"
            )));
        }
    }
    Ok(())
}

fn parameter_schema(names: &[String], meta: Option<&CsvMeta>) -> ParameterSchema {
    match meta {
        Some(m) => ParameterSchema::new(m.parameters.clone()),
        None => ParameterSchema::new(
            names
                .iter()
                .map(|n| Parameter::new(n.clone(), "", ParameterKind::Continuous))
                .collect(),
        ),
    }
}

fn check_grid(derived: &[f64], meta: Option<&CsvMeta>) -> Result<(), IngestError> {
    if let Some(meta) = meta {
        if !derived.is_empty() && derived != meta.time_grid.as_slice() {
            return Err(IngestError::TimeGrid(format!(
                "time points {derived:?} differ from declared grid {:?}",
                meta.time_grid
            )));
        }
    }
    Ok(())
}

fn parse_long(text: &str) -> Result<ParameterScan, IngestError> {
    let meta = read_meta(text)?;
    let mut rdr = reader(text);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let w = header.len();
    if w < 4
        || header[0] != "run_id"
        || header[w - 3] != "observable"
        || header[w - 2] != "t"
        || header[w - 1] != "value"
    {
        return Err(IngestError::Header(format!(
            "expected 'run_id,<params...>,observable,t,value', found '{}'",
            header.join(",")
        )));
    }
    let param_names = header[1..w - 3].to_vec();
    check_param_header(&param_names, meta.as_ref())?;
    let n = param_names.len();

    struct Partial {
        config: Vec<f64>,
        cells: BTreeMap<String, Vec<(f64, f64)>>,
    }
    let mut runs: BTreeMap<String, Partial> = BTreeMap::new();
    let mut seen: HashMap<(String, String, u64), usize> = HashMap::new();
    let mut times: Vec<f64> = Vec::new();

    for record in rdr.records() {
        let record = record?;
        let row = line_of(&record);
        let run_id = record[0].to_string();
        if run_id.is_empty() {
            return Err(IngestError::Cell {
                row,
                column: 1,
                message: "empty run_id".into(),
            });
        }
        let config = (0..n)
            .map(|k| parse_number(&record[k + 1], row, k + 2))
            .collect::<Result<Vec<_>, _>>()?;
        let observable = record[n + 1].to_string();
        if observable.is_empty() {
            return Err(IngestError::Cell {
                row,
                column: n + 2,
                message: "empty observable name".into(),
            });
        }
        if let Some(meta) = &meta {
            if !meta.observables.iter().any(|o| o.name == observable) {
                return Err(IngestError::Cell {
                    row,
                    column: n + 2,
                    message: format!("observable '{observable}' not declared in metadata"),
                });
            }
        }
        let t = parse_number(&record[n + 2], row, n + 3)?;
        let value = parse_number(&record[n + 3], row, n + 4)?;

        if seen
            .insert((run_id.clone(), observable.clone(), t.to_bits()), row)
            .is_some()
        {
            return Err(IngestError::DuplicateCell {
                run_id,
                observable,
                t,
            });
        }
        let entry = runs.entry(run_id.clone()).or_insert_with(|| Partial {
            config: config.clone(),
            cells: BTreeMap::new(),
        });
        if let Some(k) = (0..n).find(|&k| entry.config[k].to_bits() != config[k].to_bits()) {
            return Err(IngestError::Cell {
                row,
                column: k + 2,
                message: format!(
                    "value of '{}' differs from an earlier row of run '{run_id}'",
                    param_names[k]
                ),
            });
        }
        entry.cells.entry(observable).or_default().push((t, value));
        times.push(t);
    }

    times.sort_by(f64::total_cmp);
    times.dedup();
    check_grid(&times, meta.as_ref())?;
    let grid = match &meta {
        Some(m) => m.time_grid.clone(),
        None => times,
    };

    let observables: Vec<Observable> = match &meta {
        Some(m) => m.observables.clone(),
        None => {
            let mut names: Vec<&String> = runs.values().flat_map(|p| p.cells.keys()).collect();
            names.sort();
            names.dedup();
            names.into_iter().map(|n| Observable::new(n.clone(), "")).collect()
        }
    };

    let mut out = Vec::with_capacity(runs.len());
    for (run_id, partial) in runs {
        let mut series = BTreeMap::new();
        for obs in &observables {
            let mut cells = partial.cells.get(&obs.name).cloned().unwrap_or_default();
            cells.sort_by(|a, b| a.0.total_cmp(&b.0));
            let ts: Vec<f64> = cells.iter().map(|c| c.0).collect();
            if ts != grid {
                let missing: Vec<f64> = grid.iter().copied().filter(|t| !ts.contains(t)).collect();
                return Err(IngestError::TimeGrid(format!(
                    "run '{run_id}', observable '{}' lacks time points {missing:?}",
                    obs.name
                )));
            }
            series.insert(obs.name.clone(), cells.into_iter().map(|c| c.1).collect());
        }
        out.push(SimulationRun {
            run_id,
            config: partial.config,
            series,
        });
    }

    Ok(ParameterScan::new(
        meta.as_ref().map_or_else(|| "scan".to_string(), |m| m.scan_id.clone()),
        parameter_schema(&param_names, meta.as_ref()),
        ObservableSchema::new(observables, grid),
        out,
    ))
}

/// Splits `<observable>_<time>`; `None` if the suffix is not a number.
fn split_wide_column(col: &str) -> Option<(&str, f64)> {
    let (name, t) = col.rsplit_once('_')?;
    if name.is_empty() {
        return None;
    }
    let t: f64 = t.parse().ok()?;
    t.is_finite().then_some((name, t + 0.0))
}

fn parse_wide(text: &str) -> Result<ParameterScan, IngestError> {
    let meta = read_meta(text)?;
    let mut rdr = reader(text);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.first().map(String::as_str) != Some("run_id") {
        return Err(IngestError::Header("first column must be 'run_id'".into()));
    }

    let n = match &meta {
        Some(m) => m.parameters.len(),
        None => header[1..]
            .iter()
            .take_while(|c| split_wide_column(c).is_none())
            .count(),
    };
    if header.len() < 1 + n {
        return Err(IngestError::Header("missing parameter columns".into()));
    }
    let param_names = header[1..1 + n].to_vec();
    check_param_header(&param_names, meta.as_ref())?;

    // (observable, time) per value column, observables in first-appearance order.
    let mut columns = Vec::new();
    let mut obs_order: Vec<String> = Vec::new();
    let mut obs_times: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for col in &header[1 + n..] {
        let (name, t) = split_wide_column(col).ok_or_else(|| {
            IngestError::Header(format!("column '{col}' is not of the form <observable>_<time>"))
        })?;
        if !obs_order.iter().any(|o| o == name) {
            obs_order.push(name.to_string());
        }
        let ts = obs_times.entry(name.to_string()).or_default();
        if ts.contains(&t) {
            return Err(IngestError::Header(format!("duplicate column '{col}'")));
        }
        ts.push(t);
        columns.push((name.to_string(), t));
    }

    let mut grid: Vec<f64> = obs_times.values().next().cloned().unwrap_or_default();
    grid.sort_by(f64::total_cmp);
    for (name, ts) in &obs_times {
        let mut ts = ts.clone();
        ts.sort_by(f64::total_cmp);
        if ts != grid {
            return Err(IngestError::TimeGrid(format!(
                "observable '{name}' has time points {ts:?}, expected {grid:?}"
            )));
        }
    }
    check_grid(&grid, meta.as_ref())?;

    let observables: Vec<Observable> = match &meta {
        Some(m) => {
            let declared: Vec<&str> = m.observables.iter().map(|o| o.name.as_str()).collect();
            let mut found: Vec<&str> = obs_order.iter().map(String::as_str).collect();
            let mut sorted_declared = declared.clone();
            sorted_declared.sort();
            found.sort();
            if !obs_order.is_empty() && found != sorted_declared {
                return Err(IngestError::Header(format!(
                    "observable columns {found:?} do not match metadata {declared:?}"
                )));
            }
            m.observables.clone()
        }
        None => obs_order.iter().map(|n| Observable::new(n.clone(), "")).collect(),
    };
    let grid = match &meta {
        Some(m) => m.time_grid.clone(),
        None => grid,
    };

    let mut runs = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let row = line_of(&record);
        let run_id = record[0].to_string();
        if run_id.is_empty() {
            return Err(IngestError::Cell {
                row,
                column: 1,
                message: "empty run_id".into(),
            });
        }
        let config = (0..n)
            .map(|k| parse_number(&record[k + 1], row, k + 2))
            .collect::<Result<Vec<_>, _>>()?;
        let mut cells: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
        for (c, (name, t)) in columns.iter().enumerate() {
            let v = parse_number(&record[1 + n + c], row, 2 + n + c)?;
            cells.entry(name.as_str()).or_default().push((*t, v));
        }
        let series = cells
            .into_iter()
            .map(|(name, mut tv)| {
                tv.sort_by(|a, b| a.0.total_cmp(&b.0));
                (name.to_string(), tv.into_iter().map(|x| x.1).collect())
            })
            .collect();
        runs.push(SimulationRun {
            run_id,
            config,
            series,
        });
    }

    Ok(ParameterScan::new(
        meta.as_ref().map_or_else(|| "scan".to_string(), |m| m.scan_id.clone()),
        parameter_schema(&param_names, meta.as_ref()),
        ObservableSchema::new(observables, grid),
        runs,
    ))
}

fn meta_line(scan: &ParameterScan) -> Vec<u8> {
    let json = serde_json::to_string(&CsvMeta::of(scan)).expect("metadata serializes");
    format!("{META_PREFIX}{json}\n").into_bytes()
}

fn emit_long(scan: &ParameterScan) -> Vec<u8> {
    let mut out = meta_line(scan);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["run_id".to_string()];
    header.extend(scan.parameter_schema.names().map(str::to_string));
    header.extend(["observable", "t", "value"].map(str::to_string));
    w.write_record(&header).expect("write to memory");

    let grid = scan.time_grid();
    for run in &scan.runs {
        let params: Vec<String> = run.config.iter().map(|v| v.to_string()).collect();
        for obs in scan.observable_schema.names() {
            let values = run.series(obs).unwrap_or(&[]);
            for (t, v) in grid.iter().zip(values) {
                let mut rec = Vec::with_capacity(header.len());
                rec.push(run.run_id.clone());
                rec.extend(params.iter().cloned());
                rec.push(obs.to_string());
                rec.push(t.to_string());
                rec.push(v.to_string());
                w.write_record(&rec).expect("write to memory");
            }
        }
    }
    out.extend(w.into_inner().expect("flush to memory"));
    out
}

fn emit_wide(scan: &ParameterScan) -> Vec<u8> {
    let mut out = meta_line(scan);
    let mut w = csv::Writer::from_writer(Vec::new());
    let grid = scan.time_grid();
    let mut header = vec!["run_id".to_string()];
    header.extend(scan.parameter_schema.names().map(str::to_string));
    for obs in scan.observable_schema.names() {
        header.extend(grid.iter().map(|t| format!("{obs}_{t}")));
    }
    w.write_record(&header).expect("write to memory");
    for run in &scan.runs {
        let mut rec = vec![run.run_id.clone()];
        rec.extend(run.config.iter().map(|v| v.to_string()));
        for obs in scan.observable_schema.names() {
            rec.extend(run.series(obs).unwrap_or(&[]).iter().map(|v| v.to_string()));
        }
        w.write_record(&rec).expect("write to memory");
    }
    out.extend(w.into_inner().expect("flush to memory"));
    out
}
