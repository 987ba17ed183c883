//! Acceptance gate. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero when any criterion fails.
//!
//! Arguments not starting with `-` filter criteria by substring. Set
//! `TEMPO_UPDATE_GOLDEN=1` to rewrite the SVG golden file.

// `!(a <= b)` is deliberate: a NaN must fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use axum::http::StatusCode;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use tempo_core::clustering::{cluster_scan, fit_kmeans, Cluster, ClusterConfig, KMeansOptions};
use tempo_core::data_model::{Observable, ObservableSchema, Parameter, ParameterKind, ParameterSchema};
use tempo_core::layout::{compute_layout, LayoutRequest};
use tempo_core::render_svg::{coordinates, count_elements, render, RenderConfig};
use tempo_core::selection::{evaluate, Hover, Interval, PickMode, SelectionState};
use tempo_core::simgen::{derive_seed, generate_scan, simulate_states, GridSpec, WntConfig, DEFAULT_TIME_GRID};
use tempo_core::{
    dtw_distance, ClusterId, ClusterModel, DtwConfig, ObservableClusters, ParameterScan, SimulationRun,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

// ---------------------------------------------------------------- oracles

/// Minimum L1 cost over every monotone warping path, by exhaustive search.
fn all_paths_dtw(a: &[f64], b: &[f64]) -> f64 {
    fn walk(a: &[f64], b: &[f64], i: usize, j: usize, acc: f64, best: &mut f64) {
        let acc = acc + (a[i] - b[j]).abs();
        if i + 1 == a.len() && j + 1 == b.len() {
            *best = best.min(acc);
            return;
        }
        if i + 1 < a.len() {
            walk(a, b, i + 1, j, acc, best);
        }
        if j + 1 < b.len() {
            walk(a, b, i, j + 1, acc, best);
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            walk(a, b, i + 1, j + 1, acc, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(a, b, 0, 0, 0.0, &mut best);
    best
}

fn choose2(n: usize) -> f64 {
    (n * n.saturating_sub(1)) as f64 / 2.0
}

/// Adjusted Rand Index from the contingency table.
fn adjusted_rand_index(truth: &[usize], pred: &[usize]) -> f64 {
    let mut table: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut rows: BTreeMap<usize, usize> = BTreeMap::new();
    let mut cols: BTreeMap<usize, usize> = BTreeMap::new();
    for (&t, &p) in truth.iter().zip(pred) {
        *table.entry((t, p)).or_default() += 1;
        *rows.entry(t).or_default() += 1;
        *cols.entry(p).or_default() += 1;
    }
    let index: f64 = table.values().map(|&n| choose2(n)).sum();
    let a: f64 = rows.values().map(|&n| choose2(n)).sum();
    let b: f64 = cols.values().map(|&n| choose2(n)).sum();
    let expected = a * b / choose2(truth.len());
    let max = 0.5 * (a + b);
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

/// Two-sample Kolmogorov-Smirnov statistic; handles ties.
fn ks_statistic(x: &[f64], y: &[f64]) -> f64 {
    let mut x = x.to_vec();
    let mut y = y.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / x.len() as f64 - j as f64 / y.len() as f64).abs());
    }
    d
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// 60 series from three templates on [0, 1] (flat, rise, pulse) with random
/// time shifts and Gaussian noise of 5% of the template range.
fn three_templates(seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    const LEN: usize = 16;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = 0.05;
    let mut series = Vec::new();
    let mut truth = Vec::new();
    for i in 0..60 {
        let class = i % 3;
        let shift = rng.random_range(-1.5..1.5);
        let s: Vec<f64> = (0..LEN)
            .map(|t| {
                let t = t as f64;
                let clean = match class {
                    0 => 0.15,
                    1 => 1.0 / (1.0 + (-(t - 7.0 - shift)).exp()),
                    _ => (-(t - 5.0 - shift).powi(2) / 4.5).exp(),
                };
                clean + sigma * normal(&mut rng)
            })
            .collect();
        series.push(s);
        truth.push(class);
    }
    (series, truth)
}

// ---------------------------------------------------------------- fixtures

/// The 141-run demo scan (seed 42) and its default clustering.
fn demo() -> &'static (ParameterScan, ClusterModel) {
    static DEMO: OnceLock<(ParameterScan, ClusterModel)> = OnceLock::new();
    DEMO.get_or_init(|| {
        let scan = generate_scan(&GridSpec::demo(), 42).expect("demo scan");
        let model = cluster_scan(&scan, &ClusterConfig::default()).expect("demo clusters");
        (scan, model)
    })
}

fn demo_selection() -> SelectionState {
    let mut s = SelectionState::default();
    s.brushes.insert("nLRP6_lr".into(), Interval::new(0.75, 1.0).unwrap());
    s
}

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/demo.svg")
}

fn param(scan: &ParameterScan, run: &SimulationRun, name: &str) -> f64 {
    run.config[scan.parameter_schema.index_of(name).unwrap()]
}

fn end_and_peak(oc: &ObservableClusters, id: ClusterId) -> (f64, f64) {
    let c = &oc.cluster(id).unwrap().centroid;
    (*c.last().unwrap(), c.iter().copied().fold(f64::MIN, f64::max))
}

/// Random scan with one scalar axis and `observables` temporal axes.
fn random_scan(rng: &mut ChaCha8Rng, runs: usize, observables: usize) -> ParameterScan {
    let params = ParameterSchema::new(vec![Parameter::new("p", "", ParameterKind::Continuous)]);
    let names: Vec<String> = (0..observables).map(|i| format!("o{i}")).collect();
    let obs = ObservableSchema::new(
        names.iter().map(|n| Observable::new(n.as_str(), "")).collect(),
        vec![0.0, 1.0, 2.0],
    );
    let runs = (0..runs)
        .map(|i| SimulationRun {
            run_id: format!("r{i:03}"),
            config: vec![rng.random_range(0.0..10.0)],
            series: names
                .iter()
                .map(|n| (n.clone(), (0..3).map(|_| rng.random_range(0.0..5.0)).collect()))
                .collect(),
        })
        .collect();
    ParameterScan::new("random", params, obs, runs)
}

/// Random non-empty partition of the scan's runs on every observable.
fn random_model(rng: &mut ChaCha8Rng, scan: &ParameterScan) -> ClusterModel {
    let ids: Vec<String> = scan.run_ids().map(str::to_string).collect();
    let observables = scan
        .observable_schema
        .names()
        .map(|name| {
            let k = rng.random_range(1..=ids.len().min(6));
            let mut labels: Vec<ClusterId> = (0..ids.len()).map(|i| (i % k) as ClusterId).collect();
            for l in labels.iter_mut().skip(k) {
                *l = rng.random_range(0..k) as ClusterId;
            }
            labels.shuffle(rng);
            let assignment: BTreeMap<String, ClusterId> = ids.iter().cloned().zip(labels.iter().copied()).collect();
            let sizes: Vec<usize> = (0..k).map(|c| labels.iter().filter(|&&l| l == c as ClusterId).count()).collect();
            let clusters = (0..k)
                .map(|c| Cluster {
                    id: c as ClusterId,
                    size: sizes[c],
                    centroid: vec![1.0, 2.0, 1.5],
                })
                .collect();
            let mut order: Vec<ClusterId> = (0..k as ClusterId).collect();
            order.sort_by_key(|&c| (std::cmp::Reverse(sizes[c as usize]), c));
            ObservableClusters {
                observable: name.to_string(),
                assignment,
                clusters,
                order,
                inertia: 0.0,
                warnings: vec![],
            }
        })
        .collect();
    ClusterModel {
        scan_id: scan.scan_id.clone(),
        config: ClusterConfig::default(),
        observables,
    }
}

// ---------------------------------------------------------------- criteria

fn dtw_oracle() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for case in 0..500 {
        let integer = case % 2 == 0;
        let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            let n = rng.random_range(1..=6);
            (0..n)
                .map(|_| {
                    if integer {
                        rng.random_range(-20i32..=20) as f64
                    } else {
                        rng.random_range(-10.0..10.0)
                    }
                })
                .collect()
        };
        let a = draw(&mut rng);
        let b = draw(&mut rng);
        let got = dtw_distance(&a, &b, &DtwConfig::exact()).map_err(|e| e.to_string())?;
        let want = all_paths_dtw(&a, &b);
        if integer {
            ensure!(got == want, "case {case}: {got} != {want} for {a:?} / {b:?}");
        } else {
            ensure!((got - want).abs() <= 1e-12, "case {case}: |{got} - {want}| > 1e-12");
            worst = worst.max((got - want).abs());
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!("500 pairs, max float error {worst:.1e}, {:.2} s", elapsed.as_secs_f64()))
}

fn dtw_window_zero() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for case in 0..200 {
        let n = rng.random_range(1..=30);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(-100.0..100.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-100.0..100.0)).collect();
        let got = dtw_distance(&a, &b, &DtwConfig::with_window(0)).map_err(|e| e.to_string())?;
        let want = a.iter().zip(&b).fold(0.0, |acc, (x, y)| acc + (x - y).abs());
        ensure!(got == want, "case {case}: {got} != {want}");
    }
    Ok("200 cases exact".into())
}

fn clustering_recovery() -> Check {
    let start = Instant::now();
    let mut good = 0;
    let mut worst = 1.0f64;
    for seed in 0..100 {
        let (series, truth) = three_templates(1000 + seed);
        let opts = KMeansOptions {
            max_iter: 50,
            restarts: 5,
            seed,
            dtw: DtwConfig::exact(),
            centroid: Default::default(),
        };
        let fit = fit_kmeans(&series, 3, &opts).map_err(|e| e.to_string())?;
        let ari = adjusted_rand_index(&truth, &fit.labels);
        worst = worst.min(ari);
        if ari >= 0.9 {
            good += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure!(good >= 95, "ARI >= 0.9 on only {good}/100 seeds");
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!("ARI >= 0.9 on {good}/100 seeds, min {worst:.3}, {:.2} s", elapsed.as_secs_f64()))
}

fn clustering_determinism() -> Check {
    let mut traces = 0;
    for seed in 0..20u64 {
        let (series, _) = three_templates(5000 + seed);
        let opts = KMeansOptions {
            max_iter: 50,
            restarts: 5,
            seed,
            dtw: DtwConfig::exact(),
            centroid: Default::default(),
        };
        let a = fit_kmeans(&series, 3, &opts).map_err(|e| e.to_string())?;
        let b = fit_kmeans(&series, 3, &opts).map_err(|e| e.to_string())?;
        ensure!(a == b, "seed {seed}: refit differs");
        for (r, report) in a.restarts.iter().enumerate() {
            ensure!(
                report.inertia_trace.windows(2).all(|w| w[1] <= w[0]),
                "seed {seed} restart {r}: trace {:?}",
                report.inertia_trace
            );
            traces += 1;
        }
    }
    let (scan, model) = demo();
    let again = cluster_scan(scan, &ClusterConfig::default()).map_err(|e| e.to_string())?;
    ensure!(&again == model, "demo scan clusters differently on refit");
    let mut shuffled = scan.clone();
    shuffled.runs.reverse();
    let reordered = cluster_scan(&shuffled, &ClusterConfig::default()).map_err(|e| e.to_string())?;
    ensure!(&reordered == model, "demo clusters depend on run order");
    Ok(format!("{traces} inertia traces non-increasing; demo model reproducible"))
}

fn simulator_conservation() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut events = 0u64;
    let log_uniform = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| (rng.random_range(lo.ln()..hi.ln())).exp();
    for case in 0..1000 {
        let lr = match case % 10 {
            0 => 0.0,
            1 => 1.0,
            _ => rng.random_range(0.0..1.0),
        };
        let cfg = WntConfig::new(
            rng.random_range(0..=300),
            lr,
            log_uniform(&mut rng, 1e-3, 1.0),
            log_uniform(&mut rng, 1e-3, 0.2),
        )
        .with_seed(rng.random());
        let total = cfg.internals.receptors_total as i64;
        let mut last_int = 0;
        let mut broken = None;
        let states = simulate_states(&cfg, &DEFAULT_TIME_GRID, |s| {
            events += 1;
            if broken.is_none() {
                if s.receptor_total() != total {
                    broken = Some(format!("receptors {} != {total} at t = {}", s.receptor_total(), s.clock));
                } else if s.lrp6_int() < last_int {
                    broken = Some(format!("lrp6Int fell to {} at t = {}", s.lrp6_int(), s.clock));
                } else if !s.all_non_negative() {
                    broken = Some(format!("negative count at t = {}", s.clock));
                }
                last_int = s.lrp6_int();
            }
        })
        .map_err(|e| e.to_string())?;
        if let Some(msg) = broken {
            return Err(format!("config {case} ({cfg:?}): {msg}"));
        }
        ensure!(states.len() == DEFAULT_TIME_GRID.len(), "config {case}: {} samples", states.len());
        for w in states.windows(2) {
            ensure!(w[1].lrp6_int() >= w[0].lrp6_int(), "config {case}: sampled lrp6Int decreases");
        }
        ensure!(
            states.iter().all(|s| s.receptor_total() == total),
            "config {case}: sampled receptor total drifts"
        );
    }
    Ok(format!("1000 configs, {events} events checked"))
}

fn lrp6_int_at_end(lr: f64, k_lrp_endo: f64, group: u64, seeds: u64) -> Result<Vec<f64>, String> {
    (0..seeds)
        .map(|i| {
            let cfg = WntConfig::new(100, lr, 0.03, k_lrp_endo).with_seed(derive_seed(0xA2, group * 1000 + i));
            let states = simulate_states(&cfg, &DEFAULT_TIME_GRID, |_| {}).map_err(|e| e.to_string())?;
            Ok(states.last().unwrap().lrp6_int() as f64)
        })
        .collect()
}

/// Demo-grid kLrpEndo values.
const K_LRP_ENDO: [f64; 3] = [0.005, 0.02, 0.08];
/// Below saturation: at kLrpEndo >= 0.02 nearly every receptor is
/// internalized by t = 360 and the means differ by less than their error.
const K_LRP_ENDO_UNSATURATED: [f64; 3] = [0.002, 0.005, 0.01];

fn internalization_grows_with_endocytosis() -> Check {
    let mut means = Vec::new();
    for (g, &k) in K_LRP_ENDO_UNSATURATED.iter().enumerate() {
        let v = lrp6_int_at_end(0.0, k, g as u64, 50)?;
        means.push(v.iter().sum::<f64>() / v.len() as f64);
    }
    ensure!(means.windows(2).all(|w| w[0] < w[1]), "means {means:?} not strictly increasing");
    Ok(format!("mean lrp6Int(360) = {means:.1?}"))
}

fn raft_only_ignores_endocytosis() -> Check {
    let samples: Vec<Vec<f64>> = K_LRP_ENDO
        .iter()
        .enumerate()
        .map(|(g, &k)| lrp6_int_at_end(1.0, k, 10 + g as u64, 100))
        .collect::<Result<_, _>>()?;
    let critical = 1.628 * (2.0f64 / 100.0).sqrt();
    let mut ds = Vec::new();
    for i in 0..samples.len() {
        for j in i + 1..samples.len() {
            let d = ks_statistic(&samples[i], &samples[j]);
            ensure!(d <= critical, "kLrpEndo {} vs {}: D = {d:.3} > {critical:.3}", K_LRP_ENDO[i], K_LRP_ENDO[j]);
            ds.push(d);
        }
    }
    Ok(format!("KS D = {ds:.3?} <= {critical:.3}"))
}

fn signal_activation_clusters() -> Check {
    let (scan, model) = demo();
    ensure!(scan.runs.len() == 141, "{} runs", scan.runs.len());
    let oc = model.observable("bCat_nuc").ok_or("no bCat_nuc clusters")?;
    ensure!(oc.clusters.len() == 3, "k = {}", oc.clusters.len());
    let ids: Vec<ClusterId> = oc.ids().collect();
    let low = *ids
        .iter()
        .min_by(|&&a, &&b| end_and_peak(oc, a).0.total_cmp(&end_and_peak(oc, b).0))
        .unwrap();

    let lr = |r: &SimulationRun| param(scan, r, "nLRP6_lr");
    let min_lr = scan.runs.iter().map(lr).fold(f64::INFINITY, f64::min);
    let max_lr = scan.runs.iter().map(lr).fold(f64::NEG_INFINITY, f64::max);
    let lowest: Vec<&SimulationRun> = scan.runs.iter().filter(|r| lr(r) == min_lr).collect();
    let strays: Vec<&str> = lowest
        .iter()
        .filter(|r| oc.assignment[&r.run_id] != low)
        .map(|r| r.run_id.as_str())
        .collect();
    ensure!(strays.is_empty(), "(i) min-nLRP6_lr runs outside the low cluster: {strays:?}");

    let high: BTreeSet<ClusterId> = scan
        .runs
        .iter()
        .filter(|r| lr(r) == max_lr)
        .map(|r| oc.assignment[&r.run_id])
        .collect();
    let low_end = end_and_peak(oc, low).0;
    let stable = high.iter().find(|&&c| {
        let (e, p) = end_and_peak(oc, c);
        c != low && e > low_end && e >= 0.8 * p
    });
    let transient = high.iter().find(|&&c| {
        let (e, p) = end_and_peak(oc, c);
        e <= 0.3 * p
    });
    let (Some(&s), Some(&t)) = (stable, transient) else {
        let shapes: Vec<(f64, f64)> = high.iter().map(|&c| end_and_peak(oc, c)).collect();
        return Err(format!("(ii) high-nLRP6_lr clusters (end, peak) = {shapes:?}"));
    };
    ensure!(s != low && t != low && s != t, "(ii) roles collide: low {low}, stable {s}, transient {t}");
    let ratio = |c| {
        let (e, p) = end_and_peak(oc, c);
        e / p
    };
    Ok(format!(
        "{} min-nLRP6_lr runs in low cluster; stable end/peak {:.2}, transient {:.2}",
        lowest.len(),
        ratio(s),
        ratio(t)
    ))
}

fn layout_geometry() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut axes = 0;
    for case in 0..200 {
        let runs = rng.random_range(1..=60);
        let observables = rng.random_range(1..=3);
        let scan = random_scan(&mut rng, runs, observables);
        let model = random_model(&mut rng, &scan);
        let request = LayoutRequest {
            box_gap: if case % 4 == 0 { rng.random_range(0.0..0.3) } else { LayoutRequest::default().box_gap },
            ..Default::default()
        };
        let layout = compute_layout(&scan, &model, &request).map_err(|e| e.to_string())?;
        for oc in &model.observables {
            let gap = layout.axis(&oc.observable).ok_or("missing axis")?.box_gap;
            let mut boxes: Vec<_> = layout.boxes_on(&oc.observable).collect();
            boxes.sort_by(|a, b| a.y0.total_cmp(&b.y0));
            ensure!(boxes.len() == oc.clusters.len(), "case {case}: {} boxes", boxes.len());
            let heights: f64 = boxes.iter().map(|b| b.height()).sum();
            let total = heights + gap * (boxes.len() - 1) as f64;
            ensure!((total - 1.0).abs() <= 1e-9, "case {case}: heights + gaps = {total}");
            for b in &boxes {
                let want = heights * b.size as f64 / runs as f64;
                ensure!((b.height() - want).abs() <= 1e-9, "case {case}: height {} vs {want}", b.height());
            }
            ensure!(
                boxes.windows(2).all(|w| w[0].size >= w[1].size),
                "case {case}: default order not non-increasing bottom to top"
            );
            ensure!(
                boxes.windows(2).all(|w| w[1].y0 >= w[0].y1 - 1e-12),
                "case {case}: boxes overlap"
            );
            axes += 1;
        }
    }
    Ok(format!("200 models, {axes} temporal axes"))
}

fn selection_algebra() -> Check {
    let mut grid = GridSpec::demo();
    grid.n_wnt = vec![100];
    grid.k_lrp_endo = vec![0.005, 0.08];
    grid.extra.clear();
    let scan = generate_scan(&grid, 7).map_err(|e| e.to_string())?;
    let model = cluster_scan(&scan, &ClusterConfig::default()).map_err(|e| e.to_string())?;
    let params: Vec<String> = scan.parameter_schema.names().map(str::to_string).collect();
    let observables: Vec<String> = scan.observable_schema.names().map(str::to_string).collect();
    let values: BTreeMap<&str, Vec<f64>> = params
        .iter()
        .map(|p| (p.as_str(), scan.parameter_values(p).unwrap()))
        .collect();
    let all: Vec<String> = scan.run_ids().map(str::to_string).collect();
    let active = |s: &SelectionState| evaluate(s, &scan, &model).map(|p| p.active).map_err(|e| e.to_string());

    ensure!(active(&SelectionState::default())? == all, "empty state is not all-active");

    #[derive(Clone)]
    enum Op {
        Brush(String, Interval),
        Pick(String, ClusterId),
    }
    let apply = |s: &SelectionState, op: &Op| -> Result<SelectionState, String> {
        match op {
            Op::Brush(axis, i) => s.move_brush(&scan, axis, *i),
            Op::Pick(axis, c) => s.pick_cluster(&scan, &model, axis, *c, PickMode::Toggle),
        }
        .map_err(|e| e.to_string())
    };

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let draw_interval = |rng: &mut ChaCha8Rng, axis: &str| {
        let v = &values[axis];
        let lo = v[rng.random_range(0..v.len())];
        let hi = v[rng.random_range(0..v.len())];
        Interval::new(lo.min(hi), lo.max(hi)).unwrap()
    };
    for case in 0..1000 {
        let mut ops = Vec::new();
        for p in &params {
            if rng.random_bool(0.4) {
                ops.push(Op::Brush(p.clone(), draw_interval(&mut rng, p)));
            }
        }
        for o in &observables {
            for c in model.observable(o).unwrap().ids() {
                if rng.random_bool(0.25) {
                    ops.push(Op::Pick(o.clone(), c));
                }
            }
        }
        let mut state = SelectionState::default();
        for op in &ops {
            state = apply(&state, op)?;
        }
        let base = active(&state)?;

        let mut shuffled = ops.clone();
        shuffled.shuffle(&mut rng);
        let mut other = SelectionState::default();
        for op in &shuffled {
            other = apply(&other, op)?;
        }
        ensure!(active(&other)? == base, "case {case}: result depends on operation order");

        let decorated = state
            .with_hover(Some(Hover::Run { run_id: all[case % all.len()].clone() }))
            .toggle_bookmark(&scan, &all[(case * 7) % all.len()])
            .map_err(|e| e.to_string())?;
        ensure!(active(&decorated)? == base, "case {case}: hover or bookmark filtered runs");

        let tighter = if rng.random_bool(0.5) {
            let p = &params[rng.random_range(0..params.len())];
            let i = draw_interval(&mut rng, p);
            let i = match state.brushes.get(p) {
                Some(old) => {
                    let (lo, hi) = (old.lo.max(i.lo), old.hi.min(i.hi));
                    if lo <= hi { Interval::new(lo, hi).unwrap() } else { Interval::new(old.lo, old.lo).unwrap() }
                }
                None => i,
            };
            state.move_brush(&scan, p, i).map_err(|e| e.to_string())?
        } else {
            let o = &observables[rng.random_range(0..observables.len())];
            let ids: Vec<ClusterId> = model.observable(o).unwrap().ids().collect();
            match state.cluster_picks.get(o) {
                Some(picks) if picks.len() > 1 => {
                    let drop = *picks.iter().next().unwrap();
                    apply(&state, &Op::Pick(o.clone(), drop))?
                }
                Some(_) => state.clone(),
                None => apply(&state, &Op::Pick(o.clone(), ids[rng.random_range(0..ids.len())]))?,
            }
        };
        let narrowed = active(&tighter)?;
        ensure!(
            narrowed.iter().all(|r| base.binary_search(r).is_ok()),
            "case {case}: adding a constraint grew the active set"
        );
    }
    Ok("1000 states: empty, commutativity, monotonicity, hover/bookmark".into())
}

fn demo_svg() -> Result<Vec<u8>, String> {
    let (scan, model) = demo();
    let layout = compute_layout(scan, model, &LayoutRequest::default()).map_err(|e| e.to_string())?;
    let part = evaluate(&demo_selection(), scan, model).map_err(|e| e.to_string())?;
    render(&layout, &part, &RenderConfig::default()).map_err(|e| e.to_string())
}

fn svg_golden() -> Check {
    let first = demo_svg()?;
    let second = demo_svg()?;
    ensure!(first == second, "two renders differ");

    let text = String::from_utf8(first.clone()).map_err(|e| e.to_string())?;
    let (scan, model) = demo();
    let (runs, boxes, trends) = count_elements(&text);
    let clusters: usize = model.observables.iter().map(|o| o.clusters.len()).sum();
    let n = scan.runs.len();
    ensure!(runs == n, "{runs} run polylines, want {n}");
    ensure!(boxes == clusters, "{boxes} cluster boxes, want {clusters}");
    ensure!(trends == n * model.observables.len(), "{trends} trend paths");
    let active = evaluate(&demo_selection(), scan, model).unwrap().active.len();
    ensure!(
        text.matches("<polyline class=\"run active\"").count() == active,
        "active polylines disagree with the selection"
    );
    let cfg = RenderConfig::default();
    let outside = coordinates(&text)
        .into_iter()
        .filter(|&(is_x, v)| !(0.0..=if is_x { cfg.width } else { cfg.height }).contains(&v))
        .count();
    ensure!(outside == 0, "{outside} coordinates outside the canvas");

    let path = golden_path();
    if std::env::var_os("TEMPO_UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).map_err(|e| e.to_string())?;
        std::fs::write(&path, &first).map_err(|e| e.to_string())?;
        return Ok(format!("golden rewritten ({} bytes)", first.len()));
    }
    let golden = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if golden != first {
        let at = golden.iter().zip(&first).position(|(a, b)| a != b).unwrap_or(golden.len().min(first.len()));
        return Err(format!("differs from golden at byte {at} ({} vs {} bytes)", first.len(), golden.len()));
    }
    Ok(format!("{} bytes match golden; {runs} runs, {boxes} boxes, {trends} trends", first.len()))
}

fn has_keys(v: &Value, keys: &[&str]) -> Result<(), String> {
    for k in keys {
        ensure!(v.get(k).is_some(), "missing '{k}' in {}", truncate(v));
    }
    Ok(())
}

fn truncate(v: &Value) -> String {
    let s = v.to_string();
    s.chars().take(200).collect()
}

/// Runs the scripted session against a fresh server; returns every body.
async fn api_session() -> Result<Vec<Vec<u8>>, String> {
    use common::call;
    let app = common::app();
    let selection = serde_json::to_string(&demo_selection()).unwrap();
    let mut bodies = Vec::new();

    let r = call(&app, "POST", "/scans/generate", json!({ "seed": 42 }).to_string()).await;
    ensure!(r.status == StatusCode::CREATED, "generate: {}", r.status);
    let v = r.json();
    has_keys(&v, &["scan_id", "source_id", "runs", "parameters", "observables", "time_grid"])?;
    ensure!(v["runs"] == 141, "generate: {} runs", v["runs"]);
    ensure!(v["time_grid"].as_array().map(Vec::len) == Some(7), "generate: time grid");
    let id = v["scan_id"].as_str().ok_or("scan_id not a string")?.to_string();
    bodies.push(r.body);

    let r = call(&app, "POST", &format!("/scans/{id}/cluster"), "{}").await;
    ensure!(r.status == StatusCode::OK, "cluster: {}", r.status);
    let v = r.json();
    has_keys(&v, &["scan_id", "config", "observables"])?;
    let observables = v["observables"].as_array().ok_or("observables not an array")?;
    ensure!(observables.len() == 4, "cluster: {} observables", observables.len());
    for oc in observables {
        has_keys(oc, &["observable", "assignment", "clusters", "order", "inertia"])?;
        ensure!(oc["assignment"].as_object().map(|m| m.len()) == Some(141), "cluster: assignment size");
        for c in oc["clusters"].as_array().ok_or("clusters not an array")? {
            has_keys(c, &["id", "size", "centroid"])?;
        }
    }
    let model: ClusterModel = serde_json::from_slice(&r.body).map_err(|e| format!("cluster schema: {e}"))?;
    ensure!(model == demo().1, "served model differs from the library model");
    bodies.push(r.body);

    let r = call(&app, "POST", &format!("/scans/{id}/layout"), "{}").await;
    ensure!(r.status == StatusCode::OK, "layout: {}", r.status);
    let v = r.json();
    has_keys(&v, &["scan_id", "axes", "scales", "boxes", "polylines", "palette", "time_range", "warnings"])?;
    ensure!(v["axes"].as_array().map(Vec::len) == Some(8), "layout: axes");
    ensure!(v["polylines"].as_array().map(Vec::len) == Some(141), "layout: polylines");
    serde_json::from_slice::<tempo_core::LayoutModel>(&r.body).map_err(|e| format!("layout schema: {e}"))?;
    bodies.push(r.body);

    let r = call(&app, "POST", &format!("/scans/{id}/selection/evaluate"), selection.clone()).await;
    ensure!(r.status == StatusCode::OK, "evaluate: {}", r.status);
    let v = r.json();
    has_keys(&v, &["active", "inactive", "footprint"])?;
    let active = v["active"].as_array().ok_or("active not an array")?.len();
    let inactive = v["inactive"].as_array().ok_or("inactive not an array")?.len();
    ensure!(active + inactive == 141 && active > 0, "evaluate: {active} + {inactive}");
    let lr = &v["footprint"]["nLRP6_lr"];
    ensure!(lr["min"].as_f64() >= Some(0.75) && lr["max"].as_f64() <= Some(1.0), "evaluate footprint {lr}");
    bodies.push(r.body);

    let r = call(
        &app,
        "POST",
        &format!("/scans/{id}/render"),
        format!("{{\"selection\":{selection}}}"),
    )
    .await;
    ensure!(r.status == StatusCode::OK, "render: {}", r.status);
    ensure!(r.content_type == "image/svg+xml", "render content type {}", r.content_type);
    ensure!(r.body.starts_with(b"<svg") || r.body.starts_with(b"<?xml"), "render: not SVG");
    ensure!(r.body == demo_svg()?, "served SVG differs from the library render");
    bodies.push(r.body);

    let r = call(&app, "GET", &format!("/scans/{id}"), "").await;
    ensure!(r.status == StatusCode::OK, "get scan: {}", r.status);
    bodies.push(r.body);
    Ok(bodies)
}

fn api_contract() -> Check {
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    let first = rt.block_on(api_session())?;
    let second = rt.block_on(api_session())?;
    ensure!(first.len() == second.len(), "session lengths differ");
    for (i, (a, b)) in first.iter().zip(&second).enumerate() {
        ensure!(a == b, "response {i} differs between fresh stores");
    }
    let bytes: usize = first.iter().map(Vec::len).sum();
    Ok(format!("{} responses schema-valid, replay byte-identical ({bytes} bytes)", first.len()))
}

// ---------------------------------------------------------------- runner

fn main() {
    let criteria: [Criterion; 12] = [
        ("dtw_oracle_equivalence", dtw_oracle),
        ("dtw_window_zero_is_l1", dtw_window_zero),
        ("clustering_recovery", clustering_recovery),
        ("clustering_determinism_and_inertia", clustering_determinism),
        ("simulator_conservation", simulator_conservation),
        ("nonraft_internalization_grows_with_endocytosis", internalization_grows_with_endocytosis),
        ("raft_only_ignores_endocytosis", raft_only_ignores_endocytosis),
        ("signal_activation_clusters", signal_activation_clusters),
        ("layout_geometry", layout_geometry),
        ("selection_algebra", selection_algebra),
        ("svg_golden", svg_golden),
        ("api_contract", api_contract),
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (name, check) in criteria {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check)
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name} [{secs:.2} s] {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name} [{secs:.2} s] {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
