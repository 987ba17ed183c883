//! k-means under DTW, one partition per observable, plus the user-driven
//! refinements (move, merge, split).
//!
//! Lloyd iterations alternate nearest-centroid assignment with a DTW
//! barycenter update. With the absolute-difference local cost the
//! per-position update is the median of the aligned values, which never
//! raises a cluster's summed DTW cost; the update also starts from whichever
//! of the previous centroid and the member medoid is cheaper. Together this
//! makes the inertia trace of every restart non-increasing.
//!
//! Series are processed in `run_id` order, so the order of runs inside a scan
//! has no influence on the result.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data_model::ParameterScan;
use crate::dtw::{dtw_distance, dtw_path, DtwConfig};
use crate::error::{ClusterError, DtwError};

pub type ClusterId = u32;

/// Barycenter refinement passes per centroid update.
pub const DBA_ITERATIONS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CentroidRule {
    /// DTW barycenter averaging.
    #[default]
    Dba,
    /// The member (or previous centroid) with the smallest summed distance.
    Medoid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterConfig {
    /// Clusters for observables not listed in `k_for`.
    pub k: usize,
    pub k_for: BTreeMap<String, usize>,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
    pub dtw: DtwConfig,
    pub centroid: CentroidRule,
    /// Compare series after min-max scaling by the observable's global range.
    pub normalize: bool,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            k: 3,
            k_for: BTreeMap::new(),
            max_iter: 50,
            restarts: 5,
            seed: 0,
            dtw: DtwConfig::default(),
            centroid: CentroidRule::Dba,
            normalize: false,
        }
    }
}

impl ClusterConfig {
    pub fn k_for(&self, observable: &str) -> usize {
        self.k_for.get(observable).copied().unwrap_or(self.k)
    }

    pub fn validate(&self) -> Result<(), ClusterError> {
        if self.k == 0 || self.k_for.values().any(|&k| k == 0) {
            return Err(ClusterError::Config("k must be at least 1".into()));
        }
        if self.max_iter == 0 {
            return Err(ClusterError::Config("max_iter must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(ClusterError::Config("restarts must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: ClusterId,
    pub size: usize,
    /// Representative series on the scan's time grid, in data units.
    pub centroid: Vec<f64>,
}

/// Partition of one observable's series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableClusters {
    pub observable: String,
    pub assignment: BTreeMap<String, ClusterId>,
    /// Sorted by id.
    pub clusters: Vec<Cluster>,
    /// Cluster ids by size, largest first; ties by id.
    pub order: Vec<ClusterId>,
    /// Summed DTW distance of members to their centroid (normalized units
    /// when the config asks for normalization).
    pub inertia: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl ObservableClusters {
    pub fn cluster(&self, id: ClusterId) -> Option<&Cluster> {
        self.clusters.iter().find(|c| c.id == id)
    }

    pub fn members(&self, id: ClusterId) -> Vec<&str> {
        self.assignment
            .iter()
            .filter(|(_, &c)| c == id)
            .map(|(r, _)| r.as_str())
            .collect()
    }

    pub fn ids(&self) -> impl Iterator<Item = ClusterId> + '_ {
        self.clusters.iter().map(|c| c.id)
    }

    fn next_id(&self) -> ClusterId {
        self.ids().max().map_or(0, |m| m + 1)
    }

    /// Checks the partition invariants against a list of run ids.
    pub fn check_partition<'a>(&self, run_ids: impl IntoIterator<Item = &'a str>) -> Result<(), String> {
        let runs: BTreeSet<&str> = run_ids.into_iter().collect();
        let assigned: BTreeSet<&str> = self.assignment.keys().map(String::as_str).collect();
        if runs != assigned {
            return Err(format!(
                "'{}': assignment covers {} runs, scan has {}",
                self.observable,
                assigned.len(),
                runs.len()
            ));
        }
        let mut counts: BTreeMap<ClusterId, usize> = BTreeMap::new();
        for &c in self.assignment.values() {
            *counts.entry(c).or_default() += 1;
        }
        let sizes: BTreeMap<ClusterId, usize> = self.clusters.iter().map(|c| (c.id, c.size)).collect();
        if counts != sizes {
            return Err(format!("'{}': cluster sizes disagree with assignment", self.observable));
        }
        let mut ordered = self.order.clone();
        ordered.sort_unstable();
        if ordered != sizes.keys().copied().collect::<Vec<_>>() {
            return Err(format!("'{}': order is not a permutation of cluster ids", self.observable));
        }
        if self
            .order
            .windows(2)
            .any(|w| sizes[&w[0]] < sizes[&w[1]])
        {
            return Err(format!("'{}': order is not by decreasing size", self.observable));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub scan_id: String,
    pub config: ClusterConfig,
    /// In observable-schema order.
    pub observables: Vec<ObservableClusters>,
}

impl ClusterModel {
    pub fn observable(&self, name: &str) -> Option<&ObservableClusters> {
        self.observables.iter().find(|o| o.observable == name)
    }

    /// Model without clusters, for scans that have no runs.
    pub fn unclustered(scan: &ParameterScan) -> Self {
        Self {
            scan_id: scan.scan_id.clone(),
            config: ClusterConfig::default(),
            observables: scan
                .observable_schema
                .names()
                .map(|name| ObservableClusters {
                    observable: name.to_string(),
                    assignment: BTreeMap::new(),
                    clusters: Vec::new(),
                    order: Vec::new(),
                    inertia: 0.0,
                    warnings: Vec::new(),
                })
                .collect(),
        }
    }

    pub fn check_against(&self, scan: &ParameterScan) -> Result<(), String> {
        let names: Vec<&str> = scan.observable_schema.names().collect();
        let mine: Vec<&str> = self.observables.iter().map(|o| o.observable.as_str()).collect();
        if names != mine {
            return Err(format!("observables {mine:?} do not match scan {names:?}"));
        }
        for o in &self.observables {
            o.check_partition(scan.run_ids())?;
            if let Some(c) = o.clusters.iter().find(|c| c.centroid.len() != scan.time_grid().len()) {
                return Err(format!("'{}': centroid {} has wrong length", o.observable, c.id));
            }
        }
        Ok(())
    }

    fn with(&self, updated: ObservableClusters) -> Self {
        let mut out = self.clone();
        if let Some(slot) = out
            .observables
            .iter_mut()
            .find(|o| o.observable == updated.observable)
        {
            *slot = updated;
        }
        out
    }

    fn get(&self, observable: &str) -> Result<&ObservableClusters, ClusterError> {
        self.observable(observable)
            .ok_or_else(|| crate::error::DataError::UnknownObservable(observable.to_string()).into())
    }

    /// Reassigns `run_ids` to `target`, creating it if the id is unused.
    /// Clusters left empty are removed; touched centroids are recomputed.
    pub fn move_runs(
        &self,
        scan: &ParameterScan,
        observable: &str,
        run_ids: &[String],
        target: ClusterId,
    ) -> Result<ClusterModel, ClusterError> {
        let current = self.get(observable)?;
        if run_ids.is_empty() {
            return Ok(self.clone());
        }
        let mut assignment = current.assignment.clone();
        let mut touched = BTreeSet::from([target]);
        for id in run_ids {
            let slot = assignment
                .get_mut(id)
                .ok_or_else(|| ClusterError::UnknownRun(id.clone()))?;
            touched.insert(*slot);
            *slot = target;
        }
        let work = Working::new(scan, observable, self.config.normalize)?;
        let updated = rebuild(current, &work, assignment, &touched, &self.config)?;
        Ok(self.with(updated))
    }

    /// Unites the given clusters under the smallest of their ids.
    pub fn merge_clusters(
        &self,
        scan: &ParameterScan,
        observable: &str,
        ids: &[ClusterId],
    ) -> Result<ClusterModel, ClusterError> {
        let current = self.get(observable)?;
        if let Some(&bad) = ids.iter().find(|&&id| current.cluster(id).is_none()) {
            return Err(ClusterError::UnknownCluster(bad));
        }
        let Some(&into) = ids.iter().min() else {
            return Err(ClusterError::Config("merge needs at least one cluster id".into()));
        };
        let movers: Vec<String> = current
            .assignment
            .iter()
            .filter(|(_, c)| ids.contains(c) && **c != into)
            .map(|(r, _)| r.clone())
            .collect();
        self.move_runs(scan, observable, &movers, into)
    }

    /// Re-clusters the members of `id` into `k` parts. The largest part keeps
    /// `id`, the others get fresh ids.
    pub fn split_cluster(
        &self,
        scan: &ParameterScan,
        observable: &str,
        id: ClusterId,
        k: usize,
        cfg: &ClusterConfig,
    ) -> Result<ClusterModel, ClusterError> {
        let current = self.get(observable)?;
        let cluster = current.cluster(id).ok_or(ClusterError::UnknownCluster(id))?;
        if k < 2 {
            return Err(ClusterError::Config("split needs k >= 2".into()));
        }
        if cluster.size < k {
            return Err(ClusterError::SplitTooLarge {
                id,
                size: cluster.size,
                k,
            });
        }
        let work = Working::new(scan, observable, self.config.normalize)?;
        let members: Vec<usize> = work
            .run_ids
            .iter()
            .enumerate()
            .filter(|(_, r)| current.assignment[*r] == id)
            .map(|(i, _)| i)
            .collect();
        let sub: Vec<Vec<f64>> = members.iter().map(|&i| work.series[i].clone()).collect();
        let fit = fit_kmeans(&sub, k, &KMeansOptions::from_config(cfg))?;
        let labels = canonical_labels(&fit.labels, fit.k());
        let fresh = current.next_id();
        let new_ids: Vec<ClusterId> = std::iter::once(id)
            .chain((1..fit.k() as ClusterId).map(|j| fresh + j - 1))
            .collect();
        let mut assignment = current.assignment.clone();
        for (pos, &i) in members.iter().enumerate() {
            assignment.insert(work.run_ids[i].clone(), new_ids[labels[pos]]);
        }
        let touched: BTreeSet<ClusterId> = new_ids.iter().copied().collect();
        let updated = rebuild(current, &work, assignment, &touched, &self.config)?;
        Ok(self.with(updated))
    }
}

/// Series of one observable in `run_id` order, optionally min-max scaled.
struct Working {
    run_ids: Vec<String>,
    series: Vec<Vec<f64>>,
    scale: Option<(f64, f64)>,
}

impl Working {
    fn new(scan: &ParameterScan, observable: &str, normalize: bool) -> Result<Self, ClusterError> {
        let mut pairs = scan.observable_series(observable)?;
        pairs.sort_by(|a, b| a.0.cmp(b.0));
        let scale = if normalize && !pairs.is_empty() {
            let (lo, hi) = scan.min_max(observable)?;
            let span = if hi > lo { hi - lo } else { 1.0 };
            Some((lo, span))
        } else {
            None
        };
        let series = pairs
            .iter()
            .map(|(_, s)| match scale {
                Some((lo, span)) => s.iter().map(|v| (v - lo) / span).collect(),
                None => s.to_vec(),
            })
            .collect();
        Ok(Self {
            run_ids: pairs.iter().map(|(r, _)| r.to_string()).collect(),
            series,
            scale,
        })
    }

    fn to_data_units(&self, c: &[f64]) -> Vec<f64> {
        match self.scale {
            Some((lo, span)) => c.iter().map(|v| v * span + lo).collect(),
            None => c.to_vec(),
        }
    }

    fn index(&self) -> BTreeMap<&str, usize> {
        self.run_ids.iter().enumerate().map(|(i, r)| (r.as_str(), i)).collect()
    }
}

fn ordered_ids(clusters: &[Cluster]) -> Vec<ClusterId> {
    let mut order: Vec<&Cluster> = clusters.iter().collect();
    order.sort_by(|a, b| b.size.cmp(&a.size).then(a.id.cmp(&b.id)));
    order.into_iter().map(|c| c.id).collect()
}

/// New partition from an edited assignment. Centroids of `touched` clusters
/// are recomputed from their members; empty clusters disappear.
fn rebuild(
    current: &ObservableClusters,
    work: &Working,
    assignment: BTreeMap<String, ClusterId>,
    touched: &BTreeSet<ClusterId>,
    cfg: &ClusterConfig,
) -> Result<ObservableClusters, ClusterError> {
    let index = work.index();
    let mut members: BTreeMap<ClusterId, Vec<usize>> = BTreeMap::new();
    for (run, &c) in &assignment {
        members.entry(c).or_default().push(index[run.as_str()]);
    }
    let mut clusters = Vec::new();
    let mut inertia = 0.0;
    for (&id, idx) in &members {
        let refs: Vec<&[f64]> = idx.iter().map(|&i| work.series[i].as_slice()).collect();
        let working_centroid = match current.cluster(id) {
            Some(c) if !touched.contains(&id) => match work.scale {
                Some((lo, span)) => c.centroid.iter().map(|v| (v - lo) / span).collect(),
                None => c.centroid.clone(),
            },
            _ => barycenter(&refs, None, cfg.centroid, &cfg.dtw)?,
        };
        inertia += summed_cost(&refs, &working_centroid, &cfg.dtw)?;
        clusters.push(Cluster {
            id,
            size: idx.len(),
            centroid: work.to_data_units(&working_centroid),
        });
    }
    Ok(ObservableClusters {
        observable: current.observable.clone(),
        assignment,
        order: ordered_ids(&clusters),
        clusters,
        inertia,
        warnings: current.warnings.clone(),
    })
}

/// Tuning of a single k-means fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansOptions {
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
    pub dtw: DtwConfig,
    pub centroid: CentroidRule,
}

impl KMeansOptions {
    pub fn from_config(cfg: &ClusterConfig) -> Self {
        Self {
            max_iter: cfg.max_iter,
            restarts: cfg.restarts,
            seed: cfg.seed,
            dtw: cfg.dtw,
            centroid: cfg.centroid,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestartReport {
    /// Inertia after each assignment + update iteration.
    pub inertia_trace: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    /// Cluster index per input series, in `0..k`.
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    pub best_restart: usize,
    pub restarts: Vec<RestartReport>,
    pub warnings: Vec<String>,
}

impl KMeansFit {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }
}

fn summed_cost(members: &[&[f64]], centroid: &[f64], dtw: &DtwConfig) -> Result<f64, DtwError> {
    members.iter().map(|m| dtw_distance(m, centroid, dtw)).sum()
}

fn medoid<'a>(members: &[&'a [f64]], dtw: &DtwConfig) -> Result<(&'a [f64], f64), DtwError> {
    let mut best: Option<(&[f64], f64)> = None;
    for &candidate in members {
        let cost = summed_cost(members, candidate, dtw)?;
        if best.is_none_or(|(_, b)| cost < b) {
            best = Some((candidate, cost));
        }
    }
    Ok(best.expect("non-empty member set"))
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Centroid of `members`. Starts at the medoid, or at `previous` when that is
/// at least as cheap, and never returns anything costlier than its start.
fn barycenter(
    members: &[&[f64]],
    previous: Option<&[f64]>,
    rule: CentroidRule,
    dtw: &DtwConfig,
) -> Result<Vec<f64>, DtwError> {
    let (med, med_cost) = medoid(members, dtw)?;
    let (mut centroid, mut cost) = (med.to_vec(), med_cost);
    if let Some(prev) = previous {
        let prev_cost = summed_cost(members, prev, dtw)?;
        if prev_cost <= cost {
            centroid = prev.to_vec();
            cost = prev_cost;
        }
    }
    if rule == CentroidRule::Medoid {
        return Ok(centroid);
    }
    for _ in 0..DBA_ITERATIONS {
        let mut aligned: Vec<Vec<f64>> = vec![Vec::new(); centroid.len()];
        for m in members {
            let (_, path) = dtw_path(&centroid, m, dtw)?;
            for (ci, mj) in path {
                aligned[ci].push(m[mj]);
            }
        }
        let next: Vec<f64> = aligned.iter_mut().map(|v| median(v)).collect();
        let next_cost = summed_cost(members, &next, dtw)?;
        if next_cost >= cost {
            break;
        }
        centroid = next;
        cost = next_cost;
    }
    Ok(centroid)
}

/// Deterministic index stream per (seed, restart).
fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

/// k-means++ seeding with squared DTW distances.
fn seed_centroids(series: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng, dtw: &DtwConfig) -> Result<Vec<usize>, DtwError> {
    let n = series.len();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut nearest: Vec<f64> = series
        .iter()
        .map(|s| dtw_distance(s, &series[chosen[0]], dtw))
        .collect::<Result<_, _>>()?;
    while chosen.len() < k {
        let weights: Vec<f64> = nearest.iter().map(|d| d * d).collect();
        let total: f64 = weights.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, w) in weights.iter().enumerate() {
                if *w > 0.0 {
                    pick = Some(i);
                    if target < *w {
                        break;
                    }
                    target -= w;
                }
            }
            pick.expect("positive total weight")
        } else {
            // Only duplicates of chosen series remain.
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(pick);
        for (i, s) in series.iter().enumerate() {
            let d = dtw_distance(s, &series[pick], dtw)?;
            if d < nearest[i] {
                nearest[i] = d;
            }
        }
    }
    Ok(chosen)
}

/// Nearest centroid per series; equal distances go to the lowest index.
fn assign(series: &[Vec<f64>], centroids: &[Vec<f64>], dtw: &DtwConfig) -> Result<Vec<(usize, f64)>, DtwError> {
    let nearest = |s: &Vec<f64>| -> Result<(usize, f64), DtwError> {
        let mut best = (0, f64::INFINITY);
        for (c, centroid) in centroids.iter().enumerate() {
            let d = dtw_distance(s, centroid, dtw)?;
            if d < best.1 {
                best = (c, d);
            }
        }
        Ok(best)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        series.par_iter().map(nearest).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        series.iter().map(nearest).collect()
    }
}

/// Gives every empty cluster the member farthest from its own centroid,
/// taken from a cluster with at least two members.
fn repair_empty(
    series: &[Vec<f64>],
    labels: &mut [usize],
    dists: &mut [f64],
    centroids: &mut [Vec<f64>],
) {
    let k = centroids.len();
    for c in 0..k {
        let mut sizes = vec![0usize; k];
        for &l in labels.iter() {
            sizes[l] += 1;
        }
        if sizes[c] > 0 {
            continue;
        }
        let donor = (0..labels.len())
            .filter(|&i| sizes[labels[i]] >= 2)
            .fold(None, |best: Option<usize>, i| match best {
                Some(b) if dists[b] >= dists[i] => Some(b),
                _ => Some(i),
            });
        if let Some(i) = donor {
            labels[i] = c;
            dists[i] = 0.0;
            centroids[c] = series[i].clone();
        }
    }
}

struct RestartOutcome {
    labels: Vec<usize>,
    centroids: Vec<Vec<f64>>,
    inertia: f64,
    report: RestartReport,
}

fn run_restart(
    series: &[Vec<f64>],
    k: usize,
    opts: &KMeansOptions,
    restart: usize,
) -> Result<RestartOutcome, DtwError> {
    let mut rng = restart_rng(opts.seed, restart);
    let mut centroids: Vec<Vec<f64>> = seed_centroids(series, k, &mut rng, &opts.dtw)?
        .into_iter()
        .map(|i| series[i].clone())
        .collect();
    let mut labels: Vec<usize> = Vec::new();
    let mut trace = Vec::new();
    let mut converged = false;
    let mut inertia = f64::INFINITY;

    for _ in 0..opts.max_iter {
        let nearest = assign(series, &centroids, &opts.dtw)?;
        let mut next: Vec<usize> = nearest.iter().map(|x| x.0).collect();
        let mut dists: Vec<f64> = nearest.iter().map(|x| x.1).collect();
        repair_empty(series, &mut next, &mut dists, &mut centroids);

        let stable = next == labels;
        labels = next;

        inertia = 0.0;
        for (c, centroid) in centroids.iter_mut().enumerate() {
            let members: Vec<&[f64]> = labels
                .iter()
                .zip(series)
                .filter(|(l, _)| **l == c)
                .map(|(_, s)| s.as_slice())
                .collect();
            if members.is_empty() {
                continue;
            }
            *centroid = barycenter(&members, Some(centroid), opts.centroid, &opts.dtw)?;
            inertia += summed_cost(&members, centroid, &opts.dtw)?;
        }
        trace.push(inertia);
        if stable {
            converged = true;
            break;
        }
    }
    Ok(RestartOutcome {
        labels,
        centroids,
        inertia,
        report: RestartReport {
            inertia_trace: trace,
            converged,
        },
    })
}

/// k-means under DTW over `opts.restarts` seeded restarts; the restart with
/// the lowest inertia wins (ties go to the earlier restart).
pub fn fit_kmeans(series: &[Vec<f64>], k: usize, opts: &KMeansOptions) -> Result<KMeansFit, ClusterError> {
    let n = series.len();
    if k == 0 {
        return Err(ClusterError::Config("k must be at least 1".into()));
    }
    if k > n {
        return Err(ClusterError::TooManyClusters { k, n });
    }
    if opts.restarts == 0 || opts.max_iter == 0 {
        return Err(ClusterError::Config("restarts and max_iter must be at least 1".into()));
    }
    let mut warnings = Vec::new();
    let mut k = k;
    if k > 1 && series.iter().all(|s| s == &series[0]) {
        warnings.push(format!("all {n} series are identical; using k = 1 instead of k = {k}"));
        k = 1;
    }

    let mut best: Option<(RestartOutcome, usize)> = None;
    let mut reports = Vec::with_capacity(opts.restarts);
    for r in 0..opts.restarts {
        let outcome = run_restart(series, k, opts, r)?;
        reports.push(outcome.report.clone());
        if best.as_ref().is_none_or(|(b, _)| outcome.inertia < b.inertia) {
            best = Some((outcome, r));
        }
    }
    let (best, best_restart) = best.expect("at least one restart");
    Ok(KMeansFit {
        labels: best.labels,
        centroids: best.centroids,
        inertia: best.inertia,
        best_restart,
        restarts: reports,
        warnings,
    })
}

/// Relabels `0..k` so that label 0 is the largest cluster; equal sizes are
/// ordered by their first member.
fn canonical_labels(labels: &[usize], k: usize) -> Vec<usize> {
    let mut stats: Vec<(usize, usize, usize)> = (0..k)
        .map(|c| {
            let size = labels.iter().filter(|&&l| l == c).count();
            let first = labels.iter().position(|&l| l == c).unwrap_or(usize::MAX);
            (c, size, first)
        })
        .collect();
    stats.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
    let mut map = vec![0; k];
    for (new, (old, _, _)) in stats.iter().enumerate() {
        map[*old] = new;
    }
    labels.iter().map(|&l| map[l]).collect()
}

pub fn cluster_observable(
    scan: &ParameterScan,
    observable: &str,
    cfg: &ClusterConfig,
) -> Result<ObservableClusters, ClusterError> {
    cluster_observable_with_fit(scan, observable, cfg).map(|(c, _)| c)
}

/// Like [`cluster_observable`], also returning the raw fit with its traces.
/// Fit labels index the runs in `run_id` order.
pub fn cluster_observable_with_fit(
    scan: &ParameterScan,
    observable: &str,
    cfg: &ClusterConfig,
) -> Result<(ObservableClusters, KMeansFit), ClusterError> {
    cfg.validate()?;
    let work = Working::new(scan, observable, cfg.normalize)?;
    let k = cfg.k_for(observable);
    let fit = fit_kmeans(&work.series, k, &KMeansOptions::from_config(cfg))?;

    let labels = canonical_labels(&fit.labels, fit.k());
    let mut remapped = vec![Vec::new(); fit.k()];
    for (old, centroid) in fit.centroids.iter().enumerate() {
        let new = labels[fit.labels.iter().position(|&l| l == old).expect("no empty cluster")];
        remapped[new] = work.to_data_units(centroid);
    }
    let assignment: BTreeMap<String, ClusterId> = work
        .run_ids
        .iter()
        .zip(&labels)
        .map(|(r, &l)| (r.clone(), l as ClusterId))
        .collect();
    let clusters: Vec<Cluster> = remapped
        .into_iter()
        .enumerate()
        .map(|(c, centroid)| Cluster {
            id: c as ClusterId,
            size: labels.iter().filter(|&&l| l == c).count(),
            centroid,
        })
        .collect();
    let result = ObservableClusters {
        observable: observable.to_string(),
        assignment,
        order: ordered_ids(&clusters),
        clusters,
        inertia: fit.inertia,
        warnings: fit.warnings.clone(),
    };
    Ok((result, fit))
}

/// Clusters every observable independently.
pub fn cluster_scan(scan: &ParameterScan, cfg: &ClusterConfig) -> Result<ClusterModel, ClusterError> {
    cfg.validate()?;
    let names: Vec<&str> = scan.observable_schema.names().collect();
    let one = |name: &&str| cluster_observable(scan, name, cfg);
    #[cfg(feature = "parallel")]
    let observables = {
        use rayon::prelude::*;
        names.par_iter().map(one).collect::<Result<Vec<_>, _>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let observables = names.iter().map(one).collect::<Result<Vec<_>, _>>()?;
    Ok(ClusterModel {
        scan_id: scan.scan_id.clone(),
        config: cfg.clone(),
        observables,
    })
}

/// Best inertia for each requested k. Reported only; k stays the user's choice.
pub fn inertia_profile(
    scan: &ParameterScan,
    observable: &str,
    ks: &[usize],
    cfg: &ClusterConfig,
) -> Result<Vec<(usize, f64)>, ClusterError> {
    ks.iter()
        .map(|&k| {
            let mut c = cfg.clone();
            c.k_for.insert(observable.to_string(), k);
            cluster_observable(scan, observable, &c).map(|r| (k, r.inertia))
        })
        .collect()
}
