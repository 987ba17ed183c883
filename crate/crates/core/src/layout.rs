//! Resolution-independent plot geometry.
//!
//! Everything lives in the unit square with `y = 0` at the bottom of an axis.
//! Scalar axes map parameter values affinely onto `[0, 1]`. Temporal axes
//! stack one box per cluster, bottom to top, with heights proportional to
//! cluster size; each box carries the affine map that places the member
//! series inside it.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

use crate::clustering::{ClusterId, ClusterModel, ObservableClusters};
use crate::data_model::{AxisKind, ParameterKind, ParameterScan};
use crate::error::LayoutError;

pub const DEFAULT_BOX_GAP: f64 = 0.02;
pub const BASE_HUE: f64 = 210.0;
pub const MAX_SATURATION: f64 = 0.85;
pub const MIN_SATURATION: f64 = 0.25;
pub const LIGHTNESS: f64 = 0.5;
/// Total gap on one axis never exceeds this share of its height.
pub const MAX_TOTAL_GAP: f64 = 0.5;
/// Discrete parameters with more distinct values fall back to end ticks.
const MAX_DISCRETE_TICKS: usize = 12;

/// User-controlled layout state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutRequest {
    /// Visible axes left to right; `None` shows parameters then observables
    /// in schema order. Omitted names are hidden.
    pub axis_order: Option<Vec<String>>,
    /// Bottom-to-top cluster order per temporal axis.
    pub cluster_order: BTreeMap<String, Vec<ClusterId>>,
    /// Gap between neighboring boxes, as a share of axis height.
    pub box_gap: f64,
}

impl Default for LayoutRequest {
    fn default() -> Self {
        Self {
            axis_order: None,
            cluster_order: BTreeMap::new(),
            box_gap: DEFAULT_BOX_GAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    /// Equal to `source`; parameter and observable names never collide.
    pub id: String,
    pub kind: AxisKind,
    pub source: String,
    pub position: usize,
    /// Gap actually used between boxes; 0 on scalar axes.
    pub box_gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tick {
    pub value: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarScale {
    pub axis: String,
    pub min: f64,
    pub max: f64,
    pub ticks: Vec<Tick>,
}

impl ScalarScale {
    /// Affine and increasing when `min < max`; 0.5 when degenerate.
    pub fn normalize(&self, v: f64) -> f64 {
        unit(v, self.min, self.max)
    }

    pub fn is_degenerate(&self) -> bool {
        self.min >= self.max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hsl {
    /// Degrees in `[0, 360)`.
    pub h: f64,
    pub s: f64,
    pub l: f64,
}

impl Hsl {
    pub fn css(&self) -> String {
        format!(
            "hsl({}, {}%, {}%)",
            round3(self.h),
            round3(self.s * 100.0),
            round3(self.l * 100.0)
        )
    }
}

/// Maps `(t, value)` to box-local `[0, 1]^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendTransform {
    pub t_min: f64,
    pub t_max: f64,
    pub v_min: f64,
    pub v_max: f64,
}

impl TrendTransform {
    pub fn apply(&self, t: f64, v: f64) -> [f64; 2] {
        [unit(t, self.t_min, self.t_max), unit(v, self.v_min, self.v_max)]
    }

    pub fn line(&self, times: &[f64], values: &[f64]) -> Vec<[f64; 2]> {
        times.iter().zip(values).map(|(&t, &v)| self.apply(t, v)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendLine {
    pub run_id: String,
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterBox {
    pub axis: String,
    pub cluster: ClusterId,
    pub size: usize,
    pub y0: f64,
    pub y1: f64,
    pub color: Hsl,
    pub transform: TrendTransform,
    /// Centroid under `transform`.
    pub centroid: Vec<[f64; 2]>,
    /// Member series under `transform`, by run id.
    pub trends: Vec<TrendLine>,
}

impl ClusterBox {
    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    /// Where polylines meet the box.
    pub fn anchor(&self) -> f64 {
        0.5 * (self.y0 + self.y1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlPoint {
    pub axis: String,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub run_id: String,
    /// One point per visible axis, left to right.
    pub points: Vec<ControlPoint>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Palette {
    pub hues: BTreeMap<String, f64>,
    /// Rank 0 is the largest cluster of an observable.
    pub saturation_rank: BTreeMap<String, BTreeMap<ClusterId, usize>>,
}

impl Palette {
    pub fn color(&self, observable: &str, cluster: ClusterId) -> Option<Hsl> {
        let h = *self.hues.get(observable)?;
        let ranks = self.saturation_rank.get(observable)?;
        let rank = *ranks.get(&cluster)?;
        Some(Hsl {
            h,
            s: saturation(rank, ranks.len()),
            l: LIGHTNESS,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutModel {
    pub scan_id: String,
    pub axes: Vec<AxisSpec>,
    pub scales: Vec<ScalarScale>,
    /// Grouped by axis position, bottom to top within an axis.
    pub boxes: Vec<ClusterBox>,
    /// Sorted by run id.
    pub polylines: Vec<Polyline>,
    pub palette: Palette,
    /// Shared by every trend transform.
    pub time_range: [f64; 2],
    pub warnings: Vec<String>,
}

impl LayoutModel {
    pub fn axis(&self, id: &str) -> Option<&AxisSpec> {
        self.axes.iter().find(|a| a.id == id)
    }

    pub fn scale(&self, axis: &str) -> Option<&ScalarScale> {
        self.scales.iter().find(|s| s.axis == axis)
    }

    pub fn boxes_on<'a>(&'a self, axis: &'a str) -> impl Iterator<Item = &'a ClusterBox> + 'a {
        self.boxes.iter().filter(move |b| b.axis == axis)
    }

    pub fn axis_order(&self) -> Vec<String> {
        self.axes.iter().map(|a| a.id.clone()).collect()
    }
}

fn unit(v: f64, lo: f64, hi: f64) -> f64 {
    if lo < hi {
        (v - lo) / (hi - lo)
    } else {
        0.5
    }
}

pub(crate) fn round3(v: f64) -> f64 {
    let r = (v * 1000.0).round() / 1000.0;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Strictly decreasing in `rank` for `count > 1`.
pub fn saturation(rank: usize, count: usize) -> f64 {
    if count <= 1 {
        MAX_SATURATION
    } else {
        MAX_SATURATION - (MAX_SATURATION - MIN_SATURATION) * rank as f64 / (count - 1) as f64
    }
}

/// Evenly spaced hues from [`BASE_HUE`] in the given observable order, and
/// saturation ranks from each observable's size order.
pub fn assign_colors(model: &ClusterModel, observable_order: &[String]) -> Palette {
    let m = observable_order.len().max(1) as f64;
    let mut palette = Palette::default();
    for (i, name) in observable_order.iter().enumerate() {
        palette
            .hues
            .insert(name.clone(), (BASE_HUE + 360.0 * i as f64 / m) % 360.0);
        let ranks = model
            .observable(name)
            .map(|oc| oc.order.iter().enumerate().map(|(r, &id)| (id, r)).collect())
            .unwrap_or_default();
        palette.saturation_rank.insert(name.clone(), ranks);
    }
    palette
}

fn default_axis_order(scan: &ParameterScan) -> Vec<String> {
    scan.parameter_schema
        .names()
        .chain(scan.observable_schema.names())
        .map(str::to_string)
        .collect()
}

fn check_axis_order(scan: &ParameterScan, order: &[String]) -> Result<(), LayoutError> {
    let mut seen = BTreeSet::new();
    for name in order {
        if scan.axis_kind(name).is_none() {
            return Err(LayoutError::AxisOrder(format!("unknown axis '{name}'")));
        }
        if !seen.insert(name) {
            return Err(LayoutError::AxisOrder(format!("axis '{name}' listed twice")));
        }
    }
    Ok(())
}

fn cluster_order(
    oc: &ObservableClusters,
    overrides: &BTreeMap<String, Vec<ClusterId>>,
) -> Result<Vec<ClusterId>, LayoutError> {
    let Some(order) = overrides.get(&oc.observable) else {
        return Ok(oc.order.clone());
    };
    let have: BTreeSet<ClusterId> = oc.ids().collect();
    let given: BTreeSet<ClusterId> = order.iter().copied().collect();
    if given.len() != order.len() || given != have {
        return Err(LayoutError::ClusterOrder {
            axis: oc.observable.clone(),
            message: format!("{order:?} is not a permutation of {:?}", have),
        });
    }
    Ok(order.clone())
}

fn scalar_scale(scan: &ParameterScan, name: &str, warnings: &mut Vec<String>) -> Result<ScalarScale, LayoutError> {
    let values = scan.parameter_values(name)?;
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let (min, max) = if values.is_empty() { (0.0, 0.0) } else { (min, max) };
    if !values.is_empty() && min == max {
        warnings.push(format!("axis '{name}' is constant; its points sit at 0.5"));
    }
    let discrete = scan
        .parameter_schema
        .parameters
        .iter()
        .any(|p| p.name == name && p.kind == ParameterKind::Discrete);
    let mut distinct: Vec<f64> = values.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let tick_values = if values.is_empty() {
        Vec::new()
    } else if discrete && distinct.len() <= MAX_DISCRETE_TICKS {
        distinct
    } else if min == max {
        vec![min]
    } else {
        vec![min, max]
    };
    Ok(ScalarScale {
        axis: name.to_string(),
        min,
        max,
        ticks: tick_values
            .into_iter()
            .map(|value| Tick { value, y: unit(value, min, max) })
            .collect(),
    })
}

/// Builds the full geometry; deterministic and independent of run order.
pub fn compute_layout(
    scan: &ParameterScan,
    model: &ClusterModel,
    request: &LayoutRequest,
) -> Result<LayoutModel, LayoutError> {
    model.check_against(scan).map_err(LayoutError::Mismatch)?;
    if !(request.box_gap.is_finite() && request.box_gap >= 0.0) {
        return Err(LayoutError::AxisOrder(format!("box_gap {} must be >= 0", request.box_gap)));
    }
    let order = match &request.axis_order {
        Some(order) => {
            check_axis_order(scan, order)?;
            order.clone()
        }
        None => default_axis_order(scan),
    };
    for axis in request.cluster_order.keys() {
        if scan.axis_kind(axis) != Some(AxisKind::Temporal) {
            return Err(LayoutError::ClusterOrder {
                axis: axis.clone(),
                message: "not a temporal axis".into(),
            });
        }
    }

    let observable_order: Vec<String> = scan.observable_schema.names().map(str::to_string).collect();
    let palette = assign_colors(model, &observable_order);
    let grid = scan.time_grid();
    let time_range = match (grid.first(), grid.last()) {
        (Some(&a), Some(&b)) => [a, b],
        _ => [0.0, 1.0],
    };
    let n_runs = scan.runs.len();

    let mut warnings = Vec::new();
    let mut axes = Vec::new();
    let mut scales = Vec::new();
    let mut boxes = Vec::new();
    // run id -> axis id -> y
    let mut points: BTreeMap<&str, Vec<ControlPoint>> =
        scan.runs.iter().map(|r| (r.run_id.as_str(), Vec::new())).collect();

    for (position, name) in order.iter().enumerate() {
        let kind = scan.axis_kind(name).expect("checked above");
        let mut spec = AxisSpec {
            id: name.clone(),
            kind,
            source: name.clone(),
            position,
            box_gap: 0.0,
        };
        match kind {
            AxisKind::Scalar => {
                let scale = scalar_scale(scan, name, &mut warnings)?;
                let idx = scan.parameter_schema.index_of(name).expect("scalar axis");
                for run in &scan.runs {
                    points.get_mut(run.run_id.as_str()).expect("run").push(ControlPoint {
                        axis: name.clone(),
                        y: scale.normalize(run.config[idx]),
                    });
                }
                scales.push(scale);
            }
            AxisKind::Temporal => {
                let oc = model.observable(name).expect("checked by check_against");
                let ids = cluster_order(oc, &request.cluster_order)?;
                let k = ids.len();
                let mut gap = request.box_gap;
                if k > 1 && gap * (k - 1) as f64 > MAX_TOTAL_GAP {
                    gap = MAX_TOTAL_GAP / (k - 1) as f64;
                    warnings.push(format!("axis '{name}': box gap reduced to {gap} for {k} clusters"));
                }
                spec.box_gap = gap;
                let fill = 1.0 - gap * k.saturating_sub(1) as f64;
                let transform = match scan.min_max(name) {
                    Ok((v_min, v_max)) => TrendTransform {
                        t_min: time_range[0],
                        t_max: time_range[1],
                        v_min,
                        v_max,
                    },
                    Err(_) => TrendTransform {
                        t_min: time_range[0],
                        t_max: time_range[1],
                        v_min: 0.0,
                        v_max: 1.0,
                    },
                };
                let mut y = 0.0;
                for (i, &id) in ids.iter().enumerate() {
                    let cluster = oc.cluster(id).expect("ids come from the model");
                    let height = fill * cluster.size as f64 / n_runs as f64;
                    let y0 = y;
                    let y1 = if i + 1 == k { 1.0 } else { y0 + height };
                    y = y1 + gap;
                    let members = oc.members(id);
                    let trends = members
                        .iter()
                        .map(|&run_id| TrendLine {
                            run_id: run_id.to_string(),
                            points: transform.line(grid, scan.run(run_id).and_then(|r| r.series(name)).unwrap_or(&[])),
                        })
                        .collect();
                    let b = ClusterBox {
                        axis: name.clone(),
                        cluster: id,
                        size: cluster.size,
                        y0,
                        y1,
                        color: palette.color(name, id).expect("palette covers every cluster"),
                        transform,
                        centroid: transform.line(grid, &cluster.centroid),
                        trends,
                    };
                    for run_id in members {
                        points.get_mut(run_id).expect("run").push(ControlPoint {
                            axis: name.clone(),
                            y: b.anchor(),
                        });
                    }
                    boxes.push(b);
                }
            }
        }
        axes.push(spec);
    }

    let polylines = points
        .into_iter()
        .map(|(run_id, points)| Polyline {
            run_id: run_id.to_string(),
            points,
        })
        .collect();

    Ok(LayoutModel {
        scan_id: scan.scan_id.clone(),
        axes,
        scales,
        boxes,
        polylines,
        palette,
        time_range,
        warnings,
    })
}

/// Applies a permutation of the currently visible axes.
pub fn reorder_axes(
    scan: &ParameterScan,
    model: &ClusterModel,
    request: &LayoutRequest,
    new_order: &[String],
) -> Result<(LayoutRequest, LayoutModel), LayoutError> {
    let current = request.axis_order.clone().unwrap_or_else(|| default_axis_order(scan));
    let a: BTreeSet<&String> = current.iter().collect();
    let b: BTreeSet<&String> = new_order.iter().collect();
    if a != b || b.len() != new_order.len() {
        return Err(LayoutError::AxisOrder(format!(
            "{new_order:?} is not a permutation of {current:?}"
        )));
    }
    let next = LayoutRequest {
        axis_order: Some(new_order.to_vec()),
        ..request.clone()
    };
    let layout = compute_layout(scan, model, &next)?;
    Ok((next, layout))
}

/// Sets the bottom-to-top cluster order on one temporal axis.
pub fn reorder_clusters(
    scan: &ParameterScan,
    model: &ClusterModel,
    request: &LayoutRequest,
    axis: &str,
    new_order: &[ClusterId],
) -> Result<(LayoutRequest, LayoutModel), LayoutError> {
    let mut next = request.clone();
    next.cluster_order.insert(axis.to_string(), new_order.to_vec());
    let layout = compute_layout(scan, model, &next)?;
    Ok((next, layout))
}
