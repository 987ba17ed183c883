//! Surrogate stochastic simulator of receptor trafficking during early Wnt
//! signaling, used to produce demo and test scans.
//!
//! Receptors start free, split between raft and non-raft membrane by
//! `nLRP6_lr`. Per compartment they bind Wnt, couple into dimers and get
//! phosphorylated. Ligand-bound non-raft receptors are internalized at
//! `kLrpEndo` and degraded together with their ligand. Phosphorylated raft
//! receptors are internalized at `kRaftInternal` into signalosomes, which
//! sequester a finite destruction-complex pool until they are spent; spent
//! raft receptors keep a weak residual hold on it.
//! Nuclear beta-catenin is produced at a basal rate and degraded by the
//! active destruction complex plus a slow first-order loss. Internalized
//! receptors never return.
//!
//! Fast raft internalization makes one early wave of signalosomes and
//! beta-catenin falls back to its basal level once they are spent (transient
//! activation); slow raft internalization keeps the destruction complex
//! sequestered for the whole window (stable activation).

pub mod ssa;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::data_model::{
    Observable, ObservableSchema, Parameter, ParameterKind, ParameterScan, ParameterSchema,
    SimulationRun,
};
use crate::error::SimError;
use ssa::{Reaction, ReactionNetwork};

pub const PARAMETERS: [&str; 4] = ["nWnt", "nLRP6_lr", "kRaftInternal", "kLrpEndo"];
pub const OBSERVABLES: [&str; 4] = ["lrp6Dim", "lrp6Int", "lrp6Phos", "bCat_nuc"];
/// Minutes after stimulation.
pub const DEFAULT_TIME_GRID: [f64; 7] = [0.0, 10.0, 20.0, 30.0, 60.0, 120.0, 360.0];

const DEFAULT_GRID_JSON: &str = include_str!("../../data/default_grid.json");

/// Rate constants and counts that are not scanned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WntInternals {
    pub receptors_total: u32,
    /// Per Wnt-receptor pair, 1/min.
    pub k_bind: f64,
    /// Per pair of bound receptors, 1/min.
    pub k_dim: f64,
    pub k_phos: f64,
    /// Signalosome exhaustion, 1/min.
    pub k_signal_off: f64,
    pub destruction_total: u32,
    /// Per signalosome-complex pair, 1/min.
    pub k_dc_inactivate: f64,
    /// Residual hold of spent raft receptors, per pair, 1/min.
    pub k_dc_residual: f64,
    pub k_dc_recover: f64,
    pub k_bcat_basal: f64,
    /// Per beta-catenin-complex pair, 1/min.
    pub k_bcat_degrade: f64,
    pub k_bcat_decay: f64,
}

impl Default for WntInternals {
    fn default() -> Self {
        Self {
            receptors_total: 100,
            k_bind: 0.002,
            k_dim: 0.01,
            k_phos: 0.1,
            k_signal_off: 0.04,
            destruction_total: 20,
            k_dc_inactivate: 0.5,
            k_dc_residual: 0.0005,
            k_dc_recover: 0.05,
            k_bcat_basal: 2.0,
            k_bcat_degrade: 0.005,
            k_bcat_decay: 0.003,
        }
    }
}

impl WntInternals {
    /// Basal steady state with a fully active destruction complex; the
    /// initial beta-catenin count.
    pub fn bcat_baseline(&self) -> i64 {
        let loss = self.k_bcat_degrade * self.destruction_total as f64 + self.k_bcat_decay;
        if loss > 0.0 {
            (self.k_bcat_basal / loss).round() as i64
        } else {
            0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WntConfig {
    pub n_wnt: u32,
    pub n_lrp6_lr: f64,
    pub k_raft_internal: f64,
    pub k_lrp_endo: f64,
    #[serde(default)]
    pub internals: WntInternals,
    #[serde(default)]
    pub seed: u64,
}

impl WntConfig {
    pub fn new(n_wnt: u32, n_lrp6_lr: f64, k_raft_internal: f64, k_lrp_endo: f64) -> Self {
        Self {
            n_wnt,
            n_lrp6_lr,
            k_raft_internal,
            k_lrp_endo,
            internals: WntInternals::default(),
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let i = &self.internals;
        if !(0.0..=1.0).contains(&self.n_lrp6_lr) {
            return Err(SimError::Config(format!("nLRP6_lr = {} outside [0, 1]", self.n_lrp6_lr)));
        }
        let rates = [
            ("kRaftInternal", self.k_raft_internal),
            ("kLrpEndo", self.k_lrp_endo),
            ("k_bind", i.k_bind),
            ("k_dim", i.k_dim),
            ("k_phos", i.k_phos),
            ("k_signal_off", i.k_signal_off),
            ("k_dc_inactivate", i.k_dc_inactivate),
            ("k_dc_residual", i.k_dc_residual),
            ("k_dc_recover", i.k_dc_recover),
            ("k_bcat_basal", i.k_bcat_basal),
            ("k_bcat_degrade", i.k_bcat_degrade),
            ("k_bcat_decay", i.k_bcat_decay),
        ];
        if let Some((name, v)) = rates.iter().find(|(_, v)| !v.is_finite() || *v < 0.0) {
            return Err(SimError::Config(format!("{name} = {v} must be a finite rate >= 0")));
        }
        Ok(())
    }

    fn raft_receptors(&self) -> i64 {
        (self.n_lrp6_lr * self.internals.receptors_total as f64).round() as i64
    }
}

// Species indices.
const W: usize = 0;
const R_RAFT: usize = 1;
const R_NR: usize = 2;
const B_RAFT: usize = 3;
const B_NR: usize = 4;
const D_RAFT: usize = 5;
const D_NR: usize = 6;
const P_RAFT: usize = 7;
const P_NR: usize = 8;
const I_RAFT: usize = 9;
const I_NR: usize = 10;
const BCAT: usize = 11;
const SIG: usize = 12;
const DC: usize = 13;
const DC_OFF: usize = 14;
const N_SPECIES: usize = 15;

/// Species counts of the surrogate network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WntState {
    pub free_wnt: i64,
    pub free: [i64; 2],
    pub bound: [i64; 2],
    pub dimerized: [i64; 2],
    pub phosphorylated: [i64; 2],
    /// Internalized receptors by origin, `[raft, non-raft]`.
    pub internalized: [i64; 2],
    /// Internalized raft receptors still sequestering the destruction complex.
    pub signalosomes: i64,
    /// Destruction complex, `[active, sequestered]`.
    pub destruction: [i64; 2],
    pub bcat_nuc: i64,
    /// Simulated minutes.
    pub clock: f64,
}

impl WntState {
    fn from_counts(x: &[i64], clock: f64) -> Self {
        Self {
            free_wnt: x[W],
            free: [x[R_RAFT], x[R_NR]],
            bound: [x[B_RAFT], x[B_NR]],
            dimerized: [x[D_RAFT], x[D_NR]],
            phosphorylated: [x[P_RAFT], x[P_NR]],
            internalized: [x[I_RAFT], x[I_NR]],
            signalosomes: x[SIG],
            destruction: [x[DC], x[DC_OFF]],
            bcat_nuc: x[BCAT],
            clock,
        }
    }

    /// All receptor species in both compartments, internalized included.
    pub fn receptor_total(&self) -> i64 {
        let s = |a: [i64; 2]| a[0] + a[1];
        s(self.free)
            + s(self.bound)
            + s(self.dimerized)
            + s(self.phosphorylated)
            + s(self.internalized)
            + self.signalosomes
    }

    pub fn all_non_negative(&self) -> bool {
        let arrays = [
            self.free,
            self.bound,
            self.dimerized,
            self.phosphorylated,
            self.internalized,
            self.destruction,
        ];
        self.free_wnt >= 0
            && self.signalosomes >= 0
            && self.bcat_nuc >= 0
            && arrays.iter().flatten().all(|&v| v >= 0)
    }

    pub fn lrp6_dim(&self) -> i64 {
        self.dimerized[0] + self.dimerized[1]
    }

    pub fn lrp6_phos(&self) -> i64 {
        self.phosphorylated[0] + self.phosphorylated[1]
    }

    /// Signalosomes included.
    pub fn lrp6_int(&self) -> i64 {
        self.internalized[0] + self.internalized[1] + self.signalosomes
    }
}

fn network(cfg: &WntConfig) -> ReactionNetwork {
    let i = &cfg.internals;
    let r = |name, rate, reactants: &[(usize, u32)], delta: &[(usize, i64)]| Reaction {
        name,
        rate,
        reactants: reactants.to_vec(),
        delta: delta.to_vec(),
    };
    ReactionNetwork {
        species: vec![
            "Wnt", "R_raft", "R_nonraft", "B_raft", "B_nonraft", "D_raft", "D_nonraft", "P_raft",
            "P_nonraft", "I_raft", "I_nonraft", "bCat_nuc", "Signalosome", "DC", "DC_sequestered",
        ],
        reactions: vec![
            r("bind_raft", i.k_bind, &[(W, 1), (R_RAFT, 1)], &[(W, -1), (R_RAFT, -1), (B_RAFT, 1)]),
            r("bind_nonraft", i.k_bind, &[(W, 1), (R_NR, 1)], &[(W, -1), (R_NR, -1), (B_NR, 1)]),
            r("dimerize_raft", i.k_dim, &[(B_RAFT, 2)], &[(B_RAFT, -2), (D_RAFT, 2)]),
            r("dimerize_nonraft", i.k_dim, &[(B_NR, 2)], &[(B_NR, -2), (D_NR, 2)]),
            r("phosphorylate_raft", i.k_phos, &[(D_RAFT, 1)], &[(D_RAFT, -1), (P_RAFT, 1)]),
            r("phosphorylate_nonraft", i.k_phos, &[(D_NR, 1)], &[(D_NR, -1), (P_NR, 1)]),
            r("endocytose_bound", cfg.k_lrp_endo, &[(B_NR, 1)], &[(B_NR, -1), (I_NR, 1)]),
            r("endocytose_dimer", cfg.k_lrp_endo, &[(D_NR, 1)], &[(D_NR, -1), (I_NR, 1)]),
            r("endocytose_active", cfg.k_lrp_endo, &[(P_NR, 1)], &[(P_NR, -1), (I_NR, 1)]),
            r("raft_internalize", cfg.k_raft_internal, &[(P_RAFT, 1)], &[(P_RAFT, -1), (SIG, 1)]),
            r("signal_off", i.k_signal_off, &[(SIG, 1)], &[(SIG, -1), (I_RAFT, 1)]),
            r("dc_sequester", i.k_dc_inactivate, &[(SIG, 1), (DC, 1)], &[(DC, -1), (DC_OFF, 1)]),
            r("dc_residual", i.k_dc_residual, &[(I_RAFT, 1), (DC, 1)], &[(DC, -1), (DC_OFF, 1)]),
            r("dc_recover", i.k_dc_recover, &[(DC_OFF, 1)], &[(DC_OFF, -1), (DC, 1)]),
            r("bcat_basal", i.k_bcat_basal, &[], &[(BCAT, 1)]),
            r("bcat_degrade", i.k_bcat_degrade, &[(BCAT, 1), (DC, 1)], &[(BCAT, -1)]),
            r("bcat_decay", i.k_bcat_decay, &[(BCAT, 1)], &[(BCAT, -1)]),
        ],
    }
}

fn initial_counts(cfg: &WntConfig) -> Vec<i64> {
    let mut x = vec![0i64; N_SPECIES];
    let raft = cfg.raft_receptors();
    x[W] = cfg.n_wnt as i64;
    x[R_RAFT] = raft;
    x[R_NR] = cfg.internals.receptors_total as i64 - raft;
    x[DC] = cfg.internals.destruction_total as i64;
    x[BCAT] = cfg.internals.bcat_baseline();
    x
}

fn check_grid(time_grid: &[f64]) -> Result<(), SimError> {
    if time_grid.is_empty()
        || time_grid[0] < 0.0
        || time_grid.iter().any(|t| !t.is_finite())
        || time_grid.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(SimError::Config("time grid must be finite, non-negative and increasing".into()));
    }
    Ok(())
}

/// Simulates one trajectory, calling `observer` after every reaction event.
pub fn simulate_states<F: FnMut(&WntState)>(
    cfg: &WntConfig,
    time_grid: &[f64],
    mut observer: F,
) -> Result<Vec<WntState>, SimError> {
    cfg.validate()?;
    check_grid(time_grid)?;
    let net = network(cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let samples = ssa::simulate(&net, &initial_counts(cfg), time_grid, &mut rng, |x, t| {
        observer(&WntState::from_counts(x, t))
    });
    Ok(samples
        .iter()
        .zip(time_grid)
        .map(|(x, &t)| WntState::from_counts(x, t))
        .collect())
}

/// One run with the four observables sampled on `time_grid`.
pub fn simulate_run(cfg: &WntConfig, time_grid: &[f64], run_id: impl Into<String>) -> Result<SimulationRun, SimError> {
    let states = simulate_states(cfg, time_grid, |_| {})?;
    let pick = |f: fn(&WntState) -> i64| states.iter().map(|s| f(s) as f64).collect::<Vec<_>>();
    let series = BTreeMap::from([
        ("lrp6Dim".to_string(), pick(WntState::lrp6_dim)),
        ("lrp6Int".to_string(), pick(WntState::lrp6_int)),
        ("lrp6Phos".to_string(), pick(WntState::lrp6_phos)),
        ("bCat_nuc".to_string(), pick(|s| s.bcat_nuc)),
    ]);
    Ok(SimulationRun {
        run_id: run_id.into(),
        config: vec![
            cfg.n_wnt as f64,
            cfg.n_lrp6_lr,
            cfg.k_raft_internal,
            cfg.k_lrp_endo,
        ],
        series,
    })
}

/// One explicit configuration in a grid spec.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    #[serde(rename = "nWnt")]
    pub n_wnt: u32,
    #[serde(rename = "nLRP6_lr")]
    pub n_lrp6_lr: f64,
    #[serde(rename = "kRaftInternal")]
    pub k_raft_internal: f64,
    #[serde(rename = "kLrpEndo")]
    pub k_lrp_endo: f64,
}

/// Full-factorial value lists plus explicit extra points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(rename = "nWnt", default)]
    pub n_wnt: Vec<u32>,
    #[serde(rename = "nLRP6_lr", default)]
    pub n_lrp6_lr: Vec<f64>,
    #[serde(rename = "kRaftInternal", default)]
    pub k_raft_internal: Vec<f64>,
    #[serde(rename = "kLrpEndo", default)]
    pub k_lrp_endo: Vec<f64>,
    #[serde(default)]
    pub extra: Vec<GridPoint>,
    #[serde(default = "default_time_grid")]
    pub time_grid: Vec<f64>,
    #[serde(default)]
    pub internals: WntInternals,
}

fn default_time_grid() -> Vec<f64> {
    DEFAULT_TIME_GRID.to_vec()
}

impl GridSpec {
    /// The shipped 141-configuration demo grid: 3 x 5 x 3 x 3 factorial
    /// points plus six refinements around the center.
    pub fn demo() -> Self {
        serde_json::from_str(DEFAULT_GRID_JSON).expect("bundled grid parses")
    }

    pub fn single(point: GridPoint) -> Self {
        Self {
            n_wnt: vec![],
            n_lrp6_lr: vec![],
            k_raft_internal: vec![],
            k_lrp_endo: vec![],
            extra: vec![point],
            time_grid: default_time_grid(),
            internals: WntInternals::default(),
        }
    }

    /// Factorial points (last parameter varying fastest), then extras.
    pub fn points(&self) -> Result<Vec<GridPoint>, SimError> {
        let lists = [
            self.n_wnt.len(),
            self.n_lrp6_lr.len(),
            self.k_raft_internal.len(),
            self.k_lrp_endo.len(),
        ];
        let any = lists.iter().any(|&l| l > 0);
        if any && lists.contains(&0) {
            return Err(SimError::Grid(
                "factorial value lists must be all empty or all non-empty".into(),
            ));
        }
        let mut out = Vec::new();
        for &n_wnt in &self.n_wnt {
            for &n_lrp6_lr in &self.n_lrp6_lr {
                for &k_raft_internal in &self.k_raft_internal {
                    for &k_lrp_endo in &self.k_lrp_endo {
                        out.push(GridPoint {
                            n_wnt,
                            n_lrp6_lr,
                            k_raft_internal,
                            k_lrp_endo,
                        });
                    }
                }
            }
        }
        out.extend(self.extra.iter().copied());
        if out.is_empty() {
            return Err(SimError::Grid("grid has no configurations".into()));
        }
        Ok(out)
    }
}

/// SplitMix64 finalizer; spreads `(seed, index)` into independent run seeds.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn parameter_schema() -> ParameterSchema {
    ParameterSchema::new(vec![
        Parameter::new("nWnt", "molecules", ParameterKind::Discrete),
        Parameter::new("nLRP6_lr", "fraction", ParameterKind::Discrete),
        Parameter::new("kRaftInternal", "1/min", ParameterKind::Discrete),
        Parameter::new("kLrpEndo", "1/min", ParameterKind::Discrete),
    ])
}

pub fn observable_schema(time_grid: Vec<f64>) -> ObservableSchema {
    ObservableSchema::new(
        vec![
            Observable::new("lrp6Dim", "receptors"),
            Observable::new("lrp6Int", "receptors"),
            Observable::new("lrp6Phos", "receptors"),
            Observable::new("bCat_nuc", "molecules"),
        ],
        time_grid,
    )
}

/// Simulates every configuration of `grid`; run `i` uses `derive_seed(seed, i)`.
pub fn generate_scan(grid: &GridSpec, seed: u64) -> Result<ParameterScan, SimError> {
    check_grid(&grid.time_grid)?;
    let points = grid.points()?;
    let width = points.len().saturating_sub(1).to_string().len().max(3);
    let one = |(i, p): (usize, &GridPoint)| {
        let cfg = WntConfig {
            n_wnt: p.n_wnt,
            n_lrp6_lr: p.n_lrp6_lr,
            k_raft_internal: p.k_raft_internal,
            k_lrp_endo: p.k_lrp_endo,
            internals: grid.internals.clone(),
            seed: derive_seed(seed, i as u64),
        };
        simulate_run(&cfg, &grid.time_grid, format!("run-{i:0width$}"))
    };
    #[cfg(feature = "parallel")]
    let runs = {
        use rayon::prelude::*;
        points.par_iter().enumerate().map(one).collect::<Result<Vec<_>, _>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let runs = points.iter().enumerate().map(one).collect::<Result<Vec<_>, _>>()?;

    Ok(ParameterScan::new(
        format!("wnt-surrogate-{seed}"),
        parameter_schema(),
        observable_schema(grid.time_grid.clone()),
        runs,
    ))
}
