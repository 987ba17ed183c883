use thiserror::Error;

use crate::data_model::Violation;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DataError {
    #[error("unknown observable '{0}'")]
    UnknownObservable(String),
    #[error("unknown parameter '{0}'")]
    UnknownParameter(String),
    #[error("run '{run_id}' has no series for '{observable}'")]
    MissingSeries { run_id: String, observable: String },
    #[error("observable '{0}' has no values (scan has no runs)")]
    NoValues(String),
    #[error("scan fails validation: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
}

fn format_violations(v: &[Violation]) -> String {
    let shown: Vec<String> = v.iter().take(5).map(ToString::to_string).collect();
    let more = v.len().saturating_sub(5);
    if more > 0 {
        format!("{} (+{more} more)", shown.join("; "))
    } else {
        shown.join("; ")
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("input is not valid UTF-8")]
    Utf8(#[from] std::str::Utf8Error),
    #[error("malformed header: {0}")]
    Header(String),
    #[error("row {row}, column {column}: {message}")]
    Cell {
        row: usize,
        column: usize,
        message: String,
    },
    #[error("inconsistent time grid: {0}")]
    TimeGrid(String),
    #[error("duplicate cell for run '{run_id}', observable '{observable}', t = {t}")]
    DuplicateCell {
        run_id: String,
        observable: String,
        t: f64,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("unknown format '{0}' (expected long-csv, wide-csv or json)")]
    UnknownFormat(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DtwError {
    #[error("DTW needs non-empty series")]
    Empty,
    #[error("window {window} cannot align lengths {len_a} and {len_b}")]
    InfeasibleWindow {
        window: usize,
        len_a: usize,
        len_b: usize,
    },
    #[error("series {i} vs {j}: {source}")]
    Pair {
        i: usize,
        j: usize,
        #[source]
        source: Box<DtwError>,
    },
    #[error("brute-force oracle limited to 64 cells, got {0}")]
    TooLarge(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusterError {
    #[error("k = {k} exceeds the number of series ({n})")]
    TooManyClusters { k: usize, n: usize },
    #[error("invalid cluster config: {0}")]
    Config(String),
    #[error("unknown run '{0}'")]
    UnknownRun(String),
    #[error("unknown cluster {0}")]
    UnknownCluster(u32),
    #[error("cannot split cluster {id} of size {size} into {k} parts")]
    SplitTooLarge { id: u32, size: usize, k: usize },
    #[error("model does not match scan: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Dtw(#[from] DtwError),
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid simulator config: {0}")]
    Config(String),
    #[error("invalid grid spec: {0}")]
    Grid(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayoutError {
    #[error("cluster model does not match scan: {0}")]
    Mismatch(String),
    #[error("invalid axis order: {0}")]
    AxisOrder(String),
    #[error("invalid cluster order for '{axis}': {message}")]
    ClusterOrder { axis: String, message: String },
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SelectionError {
    #[error("unknown axis '{0}'")]
    UnknownAxis(String),
    #[error("brush on '{0}' needs a scalar axis")]
    NotScalar(String),
    #[error("cluster picks on '{0}' need a temporal axis")]
    NotTemporal(String),
    #[error("invalid interval [{lo}, {hi}]")]
    Interval { lo: f64, hi: f64 },
    #[error("stale cluster reference {cluster} on '{axis}'")]
    StaleCluster { axis: String, cluster: u32 },
    #[error("empty active set")]
    EmptyActiveSet,
    #[error("unknown run '{0}'")]
    UnknownRun(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RenderError {
    #[error("invalid render config: {0}")]
    Config(String),
}
