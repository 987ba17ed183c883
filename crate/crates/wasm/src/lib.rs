//! WebAssembly bindings for a single-page workbench: generate or load a
//! scan, cluster it, brush parameters, pick clusters, reorder axes, and get
//! the resulting SVG back.
//!
//! [`Session`] holds all state and is plain Rust so it can be tested
//! natively; [`Workbench`] only converts errors for JavaScript.

use tempo_core::clustering::{cluster_scan, ClusterConfig};
use tempo_core::layout::{compute_layout, LayoutRequest};
use tempo_core::render_svg::{render, RenderConfig};
use tempo_core::selection::{evaluate, Interval, PickMode, SelectionState};
use tempo_core::simgen::{generate_scan, GridSpec};
use tempo_core::{parse_scan, ClusterId, ClusterModel, ParameterScan, ScanFileFormat};
use wasm_bindgen::prelude::*;

#[derive(Debug, Clone)]
pub struct Session {
    scan: ParameterScan,
    model: ClusterModel,
    cluster: ClusterConfig,
    layout: LayoutRequest,
    selection: SelectionState,
    render: RenderConfig,
}

impl Session {
    pub fn new(scan: ParameterScan, k: usize) -> Result<Self, String> {
        let cluster = ClusterConfig { k, ..Default::default() };
        let model = cluster_scan(&scan, &cluster).map_err(|e| e.to_string())?;
        Ok(Self {
            scan,
            model,
            cluster,
            layout: LayoutRequest::default(),
            selection: SelectionState::default(),
            render: RenderConfig::default(),
        })
    }

    pub fn demo(seed: u64, k: usize) -> Result<Self, String> {
        let scan = generate_scan(&GridSpec::demo(), seed).map_err(|e| e.to_string())?;
        Self::new(scan, k)
    }

    pub fn svg(&self) -> Result<String, String> {
        let layout = compute_layout(&self.scan, &self.model, &self.layout).map_err(|e| e.to_string())?;
        let part = evaluate(&self.selection, &self.scan, &self.model).map_err(|e| e.to_string())?;
        let bytes = render(&layout, &part, &self.render).map_err(|e| e.to_string())?;
        String::from_utf8(bytes).map_err(|e| e.to_string())
    }

    pub fn axes(&self) -> Vec<String> {
        match &self.layout.axis_order {
            Some(order) => order.clone(),
            None => self
                .scan
                .parameter_schema
                .names()
                .chain(self.scan.observable_schema.names())
                .map(str::to_string)
                .collect(),
        }
    }

    pub fn parameters(&self) -> Vec<String> {
        self.scan.parameter_schema.names().map(str::to_string).collect()
    }

    /// `[min, max]` of a parameter over all runs.
    pub fn parameter_range(&self, axis: &str) -> Result<Vec<f64>, String> {
        let values = self.scan.parameter_values(axis).map_err(|e| e.to_string())?;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(vec![min, max])
    }

    pub fn brush(&mut self, axis: &str, lo: f64, hi: f64) -> Result<(), String> {
        let interval = Interval::new(lo.min(hi), lo.max(hi)).map_err(|e| e.to_string())?;
        self.selection = self
            .selection
            .move_brush(&self.scan, axis, interval)
            .map_err(|e| e.to_string())?;
        Ok(())
    }

    pub fn clear_brush(&mut self, axis: &str) {
        self.selection = self.selection.clear_brush(axis);
    }

    pub fn pick_cluster(&mut self, axis: &str, cluster: ClusterId, exclusive: bool) -> Result<(), String> {
        let mode = if exclusive { PickMode::Exclusive } else { PickMode::Toggle };
        self.selection = self
            .selection
            .pick_cluster(&self.scan, &self.model, axis, cluster, mode)
            .map_err(|e| e.to_string())?;
        Ok(())
    }

    pub fn clear_selection(&mut self) {
        self.selection = SelectionState::default();
    }

    /// Swaps `axis` with its neighbor `offset` positions away, clamped to
    /// the ends.
    pub fn move_axis(&mut self, axis: &str, offset: i32) -> Result<(), String> {
        let mut order = self.axes();
        let from = order
            .iter()
            .position(|a| a == axis)
            .ok_or_else(|| format!("unknown axis '{axis}'"))?;
        let to = (from as i64 + offset as i64).clamp(0, order.len() as i64 - 1) as usize;
        let moved = order.remove(from);
        order.insert(to, moved);
        self.set_axis_order(order)
    }

    pub fn set_axis_order(&mut self, order: Vec<String>) -> Result<(), String> {
        let request = LayoutRequest {
            axis_order: Some(order),
            ..self.layout.clone()
        };
        compute_layout(&self.scan, &self.model, &request).map_err(|e| e.to_string())?;
        self.layout = request;
        Ok(())
    }

    /// Reclusters every observable with `k` clusters; picks and cluster
    /// orders naming vanished clusters are dropped.
    pub fn recluster(&mut self, k: usize) -> Result<(), String> {
        let cluster = ClusterConfig { k, ..self.cluster.clone() };
        self.model = cluster_scan(&self.scan, &cluster).map_err(|e| e.to_string())?;
        self.cluster = cluster;
        self.layout.cluster_order.clear();
        self.selection = self.selection.without_stale_picks(&self.model);
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.cluster.k
    }

    pub fn run_count(&self) -> usize {
        self.scan.runs.len()
    }

    pub fn active_count(&self) -> Result<usize, String> {
        evaluate(&self.selection, &self.scan, &self.model)
            .map(|p| p.active.len())
            .map_err(|e| e.to_string())
    }

    pub fn selection_json(&self) -> String {
        serde_json::to_string(&self.selection).expect("selection serializes")
    }
}

/// JavaScript handle over a [`Session`].
#[wasm_bindgen]
pub struct Workbench(Session);

fn js(e: String) -> JsError {
    JsError::new(&e)
}

#[wasm_bindgen]
impl Workbench {
    /// Simulates the 141-run demo grid with `seed` and clusters with `k`.
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u64, k: usize) -> Result<Workbench, JsError> {
        Session::demo(seed, k).map(Workbench).map_err(js)
    }

    /// Loads a scan file (`json`, `long-csv` or `wide-csv`).
    #[wasm_bindgen(js_name = fromText)]
    pub fn from_text(text: &str, format: &str, k: usize) -> Result<Workbench, JsError> {
        let format: ScanFileFormat = format.parse().map_err(|e: tempo_core::IngestError| js(e.to_string()))?;
        let scan = parse_scan(text.as_bytes(), format).map_err(|e| js(e.to_string()))?;
        Session::new(scan, k).map(Workbench).map_err(js)
    }

    pub fn svg(&self) -> Result<String, JsError> {
        self.0.svg().map_err(js)
    }

    pub fn axes(&self) -> Vec<String> {
        self.0.axes()
    }

    pub fn parameters(&self) -> Vec<String> {
        self.0.parameters()
    }

    #[wasm_bindgen(js_name = parameterRange)]
    pub fn parameter_range(&self, axis: &str) -> Result<Vec<f64>, JsError> {
        self.0.parameter_range(axis).map_err(js)
    }

    pub fn brush(&mut self, axis: &str, lo: f64, hi: f64) -> Result<(), JsError> {
        self.0.brush(axis, lo, hi).map_err(js)
    }

    #[wasm_bindgen(js_name = clearBrush)]
    pub fn clear_brush(&mut self, axis: &str) {
        self.0.clear_brush(axis)
    }

    #[wasm_bindgen(js_name = pickCluster)]
    pub fn pick_cluster(&mut self, axis: &str, cluster: u32, exclusive: bool) -> Result<(), JsError> {
        self.0.pick_cluster(axis, cluster, exclusive).map_err(js)
    }

    #[wasm_bindgen(js_name = clearSelection)]
    pub fn clear_selection(&mut self) {
        self.0.clear_selection()
    }

    #[wasm_bindgen(js_name = moveAxis)]
    pub fn move_axis(&mut self, axis: &str, offset: i32) -> Result<(), JsError> {
        self.0.move_axis(axis, offset).map_err(js)
    }

    pub fn recluster(&mut self, k: usize) -> Result<(), JsError> {
        self.0.recluster(k).map_err(js)
    }

    pub fn k(&self) -> usize {
        self.0.k()
    }

    #[wasm_bindgen(js_name = runCount)]
    pub fn run_count(&self) -> usize {
        self.0.run_count()
    }

    #[wasm_bindgen(js_name = activeCount)]
    pub fn active_count(&self) -> Result<usize, JsError> {
        self.0.active_count().map_err(js)
    }

    #[wasm_bindgen(js_name = selectionJson)]
    pub fn selection_json(&self) -> String {
        self.0.selection_json()
    }
}
