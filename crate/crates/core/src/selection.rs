//! Brushing, cluster picks and bookmarks.
//!
//! A run is active iff it lies inside every brush (inclusive bounds) and, on
//! every temporal axis with a non-empty pick set, belongs to one of the
//! picked clusters. Hover and bookmarks never filter.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

use crate::clustering::{ClusterId, ClusterModel};
use crate::data_model::{AxisKind, ParameterScan};
use crate::error::SelectionError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self, SelectionError> {
        let i = Self { lo, hi };
        i.check()?;
        Ok(i)
    }

    pub fn point(v: f64) -> Result<Self, SelectionError> {
        Self::new(v, v)
    }

    fn check(&self) -> Result<(), SelectionError> {
        if self.lo <= self.hi {
            Ok(())
        } else {
            Err(SelectionError::Interval { lo: self.lo, hi: self.hi })
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Hover {
    Run { run_id: String },
    Cluster { axis: String, cluster: ClusterId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PickMode {
    Toggle,
    Exclusive,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionState {
    pub brushes: BTreeMap<String, Interval>,
    pub cluster_picks: BTreeMap<String, BTreeSet<ClusterId>>,
    pub hovered: Option<Hover>,
    pub bookmarks: BTreeSet<String>,
}

/// Run ids split by selection, each sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub active: Vec<String>,
    pub inactive: Vec<String>,
}

impl Partition {
    pub fn is_active(&self, run_id: &str) -> bool {
        self.active.binary_search_by(|r| r.as_str().cmp(run_id)).is_ok()
    }
}

/// Extrema and distinct values of one parameter over a run set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterRange {
    pub min: f64,
    pub max: f64,
    /// Ascending.
    pub values: Vec<f64>,
}

fn scalar_axis(scan: &ParameterScan, axis: &str) -> Result<usize, SelectionError> {
    match scan.axis_kind(axis) {
        None => Err(SelectionError::UnknownAxis(axis.to_string())),
        Some(AxisKind::Temporal) => Err(SelectionError::NotScalar(axis.to_string())),
        Some(AxisKind::Scalar) => Ok(scan.parameter_schema.index_of(axis).expect("scalar axis")),
    }
}

fn temporal_axis(scan: &ParameterScan, axis: &str) -> Result<(), SelectionError> {
    match scan.axis_kind(axis) {
        None => Err(SelectionError::UnknownAxis(axis.to_string())),
        Some(AxisKind::Scalar) => Err(SelectionError::NotTemporal(axis.to_string())),
        Some(AxisKind::Temporal) => Ok(()),
    }
}

fn check_cluster(model: &ClusterModel, axis: &str, cluster: ClusterId) -> Result<(), SelectionError> {
    match model.observable(axis) {
        Some(oc) if oc.cluster(cluster).is_some() => Ok(()),
        _ => Err(SelectionError::StaleCluster {
            axis: axis.to_string(),
            cluster,
        }),
    }
}

impl SelectionState {
    pub fn is_empty(&self) -> bool {
        self.brushes.is_empty() && self.cluster_picks.values().all(BTreeSet::is_empty)
    }

    /// Checks every brush and pick against the scan and model.
    pub fn validate(&self, scan: &ParameterScan, model: &ClusterModel) -> Result<(), SelectionError> {
        for (axis, interval) in &self.brushes {
            scalar_axis(scan, axis)?;
            interval.check()?;
        }
        for (axis, picks) in &self.cluster_picks {
            temporal_axis(scan, axis)?;
            for &c in picks {
                check_cluster(model, axis, c)?;
            }
        }
        Ok(())
    }

    /// Replaces the brush on `axis`.
    pub fn move_brush(&self, scan: &ParameterScan, axis: &str, interval: Interval) -> Result<Self, SelectionError> {
        scalar_axis(scan, axis)?;
        interval.check()?;
        let mut next = self.clone();
        next.brushes.insert(axis.to_string(), interval);
        Ok(next)
    }

    pub fn clear_brush(&self, axis: &str) -> Self {
        let mut next = self.clone();
        next.brushes.remove(axis);
        next
    }

    pub fn pick_cluster(
        &self,
        scan: &ParameterScan,
        model: &ClusterModel,
        axis: &str,
        cluster: ClusterId,
        mode: PickMode,
    ) -> Result<Self, SelectionError> {
        temporal_axis(scan, axis)?;
        check_cluster(model, axis, cluster)?;
        let mut next = self.clone();
        let picks = next.cluster_picks.entry(axis.to_string()).or_default();
        match mode {
            PickMode::Exclusive => *picks = BTreeSet::from([cluster]),
            PickMode::Toggle => {
                if !picks.remove(&cluster) {
                    picks.insert(cluster);
                }
            }
        }
        if picks.is_empty() {
            next.cluster_picks.remove(axis);
        }
        Ok(next)
    }

    pub fn clear_picks(&self, axis: &str) -> Self {
        let mut next = self.clone();
        next.cluster_picks.remove(axis);
        next
    }

    /// Drops picks that no longer name a cluster of `model`.
    pub fn without_stale_picks(&self, model: &ClusterModel) -> Self {
        let mut next = self.clone();
        for (axis, picks) in next.cluster_picks.iter_mut() {
            picks.retain(|&c| check_cluster(model, axis, c).is_ok());
        }
        next.cluster_picks.retain(|_, picks| !picks.is_empty());
        next
    }

    pub fn toggle_bookmark(&self, scan: &ParameterScan, run_id: &str) -> Result<Self, SelectionError> {
        if scan.run(run_id).is_none() {
            return Err(SelectionError::UnknownRun(run_id.to_string()));
        }
        let mut next = self.clone();
        if !next.bookmarks.remove(run_id) {
            next.bookmarks.insert(run_id.to_string());
        }
        Ok(next)
    }

    pub fn with_hover(&self, hovered: Option<Hover>) -> Self {
        Self {
            hovered,
            ..self.clone()
        }
    }
}

/// Splits the scan's runs into active and inactive.
pub fn evaluate(
    state: &SelectionState,
    scan: &ParameterScan,
    model: &ClusterModel,
) -> Result<Partition, SelectionError> {
    state.validate(scan, model)?;
    let brushes: Vec<(usize, Interval)> = state
        .brushes
        .iter()
        .map(|(axis, &i)| (scan.parameter_schema.index_of(axis).expect("validated"), i))
        .collect();
    let picks: Vec<(&BTreeMap<String, ClusterId>, &BTreeSet<ClusterId>)> = state
        .cluster_picks
        .iter()
        .filter(|(_, p)| !p.is_empty())
        .map(|(axis, p)| (&model.observable(axis).expect("validated").assignment, p))
        .collect();

    let mut out = Partition::default();
    for run in &scan.runs {
        let in_brushes = brushes.iter().all(|(idx, i)| i.contains(run.config[*idx]));
        let in_picks = picks
            .iter()
            .all(|(assignment, p)| assignment.get(&run.run_id).is_some_and(|c| p.contains(c)));
        if in_brushes && in_picks {
            out.active.push(run.run_id.clone());
        } else {
            out.inactive.push(run.run_id.clone());
        }
    }
    out.active.sort();
    out.inactive.sort();
    Ok(out)
}

/// Per-parameter extrema and value sets over `run_ids`.
pub fn parameter_footprint<S: AsRef<str>>(
    run_ids: &[S],
    scan: &ParameterScan,
) -> Result<BTreeMap<String, ParameterRange>, SelectionError> {
    if run_ids.is_empty() {
        return Err(SelectionError::EmptyActiveSet);
    }
    let runs = run_ids
        .iter()
        .map(|id| scan.run(id.as_ref()).ok_or_else(|| SelectionError::UnknownRun(id.as_ref().to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(scan
        .parameter_schema
        .parameters
        .iter()
        .enumerate()
        .map(|(idx, p)| {
            let mut values: Vec<f64> = runs.iter().map(|r| r.config[idx]).collect();
            values.sort_by(f64::total_cmp);
            values.dedup();
            let range = ParameterRange {
                min: values[0],
                max: values[values.len() - 1],
                values,
            };
            (p.name.clone(), range)
        })
        .collect())
}
