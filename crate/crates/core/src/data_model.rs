//! Typed containers for parameter scans: model parameters, time-dependent
//! observables on a shared time grid, and the simulation runs that pair them.
//!
//! A [`ParameterScan`] can be built with invalid contents (for example from a
//! hand-edited file); [`validate_scan`] reports every broken invariant as data.
//! Everything downstream assumes a scan with an empty validation report.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::DataError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ParameterKind {
    #[default]
    Continuous,
    /// Values come from a small grid; only changes the tick policy of the axis.
    Discrete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameter {
    pub name: String,
    #[serde(default)]
    pub unit: String,
    #[serde(default)]
    pub kind: ParameterKind,
}

impl Parameter {
    pub fn new(name: impl Into<String>, unit: impl Into<String>, kind: ParameterKind) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
            kind,
        }
    }
}

/// Ordered model parameters. The order is the default axis order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ParameterSchema {
    pub parameters: Vec<Parameter>,
}

impl ParameterSchema {
    pub fn new(parameters: Vec<Parameter>) -> Self {
        Self { parameters }
    }

    pub fn len(&self) -> usize {
        self.parameters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parameters.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.parameters.iter().position(|p| p.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.parameters.iter().map(|p| p.name.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    pub name: String,
    #[serde(default)]
    pub unit: String,
}

impl Observable {
    pub fn new(name: impl Into<String>, unit: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
        }
    }
}

/// Ordered observables plus the one time grid (minutes) they all share.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ObservableSchema {
    pub observables: Vec<Observable>,
    pub time_grid: Vec<f64>,
}

impl ObservableSchema {
    pub fn new(observables: Vec<Observable>, time_grid: Vec<f64>) -> Self {
        Self {
            observables,
            time_grid,
        }
    }

    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.observables.iter().position(|o| o.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.observables.iter().map(|o| o.name.as_str())
    }
}

/// One configuration together with its simulated time series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRun {
    pub run_id: String,
    /// One value per parameter, in schema order.
    pub config: Vec<f64>,
    /// Observable name to values aligned with the scan's time grid.
    pub series: BTreeMap<String, Vec<f64>>,
}

impl SimulationRun {
    pub fn series(&self, observable: &str) -> Option<&[f64]> {
        self.series.get(observable).map(Vec::as_slice)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterScan {
    pub scan_id: String,
    pub parameter_schema: ParameterSchema,
    pub observable_schema: ObservableSchema,
    pub runs: Vec<SimulationRun>,
}

/// Whether an axis name refers to a parameter or an observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisKind {
    Scalar,
    Temporal,
}

impl ParameterScan {
    pub fn new(
        scan_id: impl Into<String>,
        parameter_schema: ParameterSchema,
        observable_schema: ObservableSchema,
        runs: Vec<SimulationRun>,
    ) -> Self {
        Self {
            scan_id: scan_id.into(),
            parameter_schema,
            observable_schema,
            runs,
        }
    }

    /// Returns the scan if it validates, otherwise all violations.
    pub fn checked(self) -> Result<Self, DataError> {
        let report = validate_scan(&self);
        if report.is_empty() {
            Ok(self)
        } else {
            Err(DataError::Invalid(report))
        }
    }

    pub fn time_grid(&self) -> &[f64] {
        &self.observable_schema.time_grid
    }

    pub fn run(&self, run_id: &str) -> Option<&SimulationRun> {
        self.runs.iter().find(|r| r.run_id == run_id)
    }

    pub fn run_ids(&self) -> impl Iterator<Item = &str> {
        self.runs.iter().map(|r| r.run_id.as_str())
    }

    pub fn axis_kind(&self, name: &str) -> Option<AxisKind> {
        if self.parameter_schema.index_of(name).is_some() {
            Some(AxisKind::Scalar)
        } else if self.observable_schema.index_of(name).is_some() {
            Some(AxisKind::Temporal)
        } else {
            None
        }
    }

    /// Values of one parameter across runs, in run order.
    pub fn parameter_values(&self, name: &str) -> Result<Vec<f64>, DataError> {
        let idx = self
            .parameter_schema
            .index_of(name)
            .ok_or_else(|| DataError::UnknownParameter(name.to_string()))?;
        Ok(self.runs.iter().map(|r| r.config[idx]).collect())
    }

    /// `(run_id, series)` for one observable, in run order.
    pub fn observable_series<'a>(
        &'a self,
        name: &str,
    ) -> Result<Vec<(&'a str, &'a [f64])>, DataError> {
        if self.observable_schema.index_of(name).is_none() {
            return Err(DataError::UnknownObservable(name.to_string()));
        }
        self.runs
            .iter()
            .map(|r| {
                r.series(name)
                    .map(|s| (r.run_id.as_str(), s))
                    .ok_or_else(|| DataError::MissingSeries {
                        run_id: r.run_id.clone(),
                        observable: name.to_string(),
                    })
            })
            .collect()
    }

    /// Extrema of an observable over all runs and time points.
    pub fn min_max(&self, observable: &str) -> Result<(f64, f64), DataError> {
        let series = self.observable_series(observable)?;
        series
            .iter()
            .flat_map(|(_, s)| s.iter().copied())
            .fold(None, |acc: Option<(f64, f64)>, v| match acc {
                None => Some((v, v)),
                Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
            })
            .ok_or_else(|| DataError::NoValues(observable.to_string()))
    }
}

/// One broken invariant. `run_id` is `None` for schema-level problems.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub run_id: Option<String>,
    pub field: String,
    pub rule: String,
}

impl Violation {
    fn schema(field: impl Into<String>, rule: impl Into<String>) -> Self {
        Self {
            run_id: None,
            field: field.into(),
            rule: rule.into(),
        }
    }

    fn run(run_id: &str, field: impl Into<String>, rule: impl Into<String>) -> Self {
        Self {
            run_id: Some(run_id.to_string()),
            field: field.into(),
            rule: rule.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.run_id {
            Some(id) => write!(f, "run {id}: {}: {}", self.field, self.rule),
            None => write!(f, "{}: {}", self.field, self.rule),
        }
    }
}

/// `[A-Za-z_][A-Za-z0-9_]*`
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Checks every scan invariant. An empty report means the scan is usable.
pub fn validate_scan(scan: &ParameterScan) -> Vec<Violation> {
    let mut report = Vec::new();

    let mut names = BTreeSet::new();
    for p in &scan.parameter_schema.parameters {
        if !is_identifier(&p.name) {
            report.push(Violation::schema(
                format!("parameter '{}'", p.name),
                "name must be a non-empty identifier",
            ));
        }
        if !names.insert(p.name.as_str()) {
            report.push(Violation::schema(
                format!("parameter '{}'", p.name),
                "duplicate name",
            ));
        }
    }
    for o in &scan.observable_schema.observables {
        if !is_identifier(&o.name) {
            report.push(Violation::schema(
                format!("observable '{}'", o.name),
                "name must be a non-empty identifier",
            ));
        }
        if !names.insert(o.name.as_str()) {
            report.push(Violation::schema(
                format!("observable '{}'", o.name),
                "duplicate name (observable names must also differ from parameter names)",
            ));
        }
    }

    let grid = &scan.observable_schema.time_grid;
    if grid.len() < 2 {
        report.push(Violation::schema("time_grid", "needs at least 2 time points"));
    }
    if grid.iter().any(|t| !t.is_finite()) {
        report.push(Violation::schema("time_grid", "time points must be finite"));
    }
    if grid.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        report.push(Violation::schema("time_grid", "must be strictly increasing"));
    }

    let n = scan.parameter_schema.len();
    let mut seen = BTreeSet::new();
    for run in &scan.runs {
        let id = run.run_id.as_str();
        if id.is_empty() {
            report.push(Violation::run(id, "run_id", "must be non-empty"));
        }
        if !seen.insert(id) {
            report.push(Violation::run(id, "run_id", "duplicate run_id"));
        }
        if run.config.len() != n {
            report.push(Violation::run(
                id,
                "config",
                format!("expected {n} parameter values, found {}", run.config.len()),
            ));
        }
        for (p, v) in scan.parameter_schema.parameters.iter().zip(&run.config) {
            if !v.is_finite() {
                report.push(Violation::run(
                    id,
                    format!("config.{}", p.name),
                    "value must be finite",
                ));
            }
        }
        for o in &scan.observable_schema.observables {
            match run.series.get(&o.name) {
                None => report.push(Violation::run(
                    id,
                    format!("series.{}", o.name),
                    "missing series",
                )),
                Some(values) => {
                    if values.len() != grid.len() {
                        report.push(Violation::run(
                            id,
                            format!("series.{}", o.name),
                            format!(
                                "length {} does not match time grid length {}",
                                values.len(),
                                grid.len()
                            ),
                        ));
                    }
                    if values.iter().any(|v| !v.is_finite()) {
                        report.push(Violation::run(
                            id,
                            format!("series.{}", o.name),
                            "values must be finite",
                        ));
                    }
                }
            }
        }
        for key in run.series.keys() {
            if scan.observable_schema.index_of(key).is_none() {
                report.push(Violation::run(
                    id,
                    format!("series.{key}"),
                    "series for an observable not in the schema",
                ));
            }
        }
    }
    report
}


#[cfg(test)]
mod tests {
    use super::fixtures::small_scan;
    use super::*;

    #[test]
    fn consistent_scan_validates() {
        assert!(validate_scan(&small_scan(5)).is_empty());
    }

    #[test]
    fn short_series_is_reported_once() {
        let mut scan = small_scan(3);
        scan.runs[1].series.get_mut("y").unwrap().pop();
        let report = validate_scan(&scan);
        assert_eq!(report.len(), 1, "{report:?}");
        assert_eq!(report[0].run_id.as_deref(), Some("r01"));
        assert_eq!(report[0].field, "series.y");
    }

    #[test]
    fn duplicate_run_id_is_reported() {
        let mut scan = small_scan(3);
        scan.runs[2].run_id = "r00".into();
        let report = validate_scan(&scan);
        assert_eq!(report.len(), 1);
        assert_eq!(report[0].rule, "duplicate run_id");
    }

    #[test]
    fn schema_rules() {
        let mut scan = small_scan(1);
        scan.observable_schema.observables[0].name = "a".into();
        scan.observable_schema.time_grid = vec![5.0];
        let report = validate_scan(&scan);
        assert!(report.iter().any(|v| v.rule.starts_with("duplicate name")));
        assert!(report.iter().any(|v| v.field == "time_grid"));

        let mut scan = small_scan(1);
        scan.observable_schema.time_grid = vec![0.0, 10.0, 10.0];
        assert_eq!(validate_scan(&scan).len(), 1);
    }

    #[test]
    fn non_finite_values_are_reported() {
        let mut scan = small_scan(2);
        scan.runs[0].config[0] = f64::NAN;
        scan.runs[1].series.get_mut("y").unwrap()[2] = f64::INFINITY;
        assert_eq!(validate_scan(&scan).len(), 2);
    }

    #[test]
    fn min_max_constant_and_mixed() {
        let mut scan = small_scan(2);
        for r in &mut scan.runs {
            r.series.insert("y".into(), vec![0.0; 3]);
        }
        assert_eq!(scan.min_max("y").unwrap(), (0.0, 0.0));

        scan.runs[0].series.insert("y".into(), vec![0.0, 1.0, 2.0]);
        scan.runs[1].series.insert("y".into(), vec![-1.0, 0.0, 5.0]);
        assert_eq!(scan.min_max("y").unwrap(), (-1.0, 5.0));
        scan.runs.reverse();
        assert_eq!(scan.min_max("y").unwrap(), (-1.0, 5.0));
    }

    #[test]
    fn min_max_errors() {
        let scan = small_scan(2);
        assert!(matches!(scan.min_max("nope"), Err(DataError::UnknownObservable(_))));
        let empty = small_scan(0);
        assert!(matches!(empty.min_max("y"), Err(DataError::NoValues(_))));
    }

    #[test]
    fn identifiers() {
        assert!(is_identifier("bCat_nuc"));
        assert!(is_identifier("_x1"));
        assert!(!is_identifier(""));
        assert!(!is_identifier("1x"));
        assert!(!is_identifier("a-b"));
    }
}
