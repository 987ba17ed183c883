//! Temporal parallel coordinates for simulation parameter scans.
//!
//! The pipeline: a [`ParameterScan`](data_model::ParameterScan) is read by
//! [`ingest`] or produced by [`simgen`], each observable is clustered with
//! DTW k-means ([`clustering`]), [`layout`] turns scan and clusters into
//! normalized geometry, [`selection`] splits runs into active and inactive,
//! and [`render_svg`] draws the result.

pub mod clustering;
pub mod data_model;
pub mod dtw;
pub mod error;
pub mod ingest;
pub mod layout;
pub mod render_svg;
pub mod selection;
pub mod simgen;

pub use clustering::{ClusterConfig, ClusterId, ClusterModel, ObservableClusters};
pub use data_model::{
    validate_scan, AxisKind, Observable, ObservableSchema, Parameter, ParameterKind,
    ParameterScan, ParameterSchema, SimulationRun, Violation,
};
pub use dtw::{dtw_distance, dtw_distance_matrix, DtwConfig};
pub use error::{
    ClusterError, DataError, DtwError, IngestError, LayoutError, RenderError, SelectionError,
    SimError,
};
pub use ingest::{emit_scan, parse_scan, ScanFileFormat};
pub use layout::{compute_layout, LayoutModel, LayoutRequest};
pub use render_svg::{render, RenderConfig};
pub use selection::{Partition, SelectionState};
