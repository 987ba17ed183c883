//! The `tempo` command line.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use tempo_core::clustering::{cluster_scan, CentroidRule, ClusterConfig, ClusterModel};
use tempo_core::dtw::DtwConfig;
use tempo_core::layout::{compute_layout, LayoutRequest};
use tempo_core::render_svg::{render, RenderConfig};
use tempo_core::selection::{evaluate, SelectionState};
use tempo_core::simgen::{generate_scan, GridSpec};
use tempo_core::{emit_scan, parse_scan, validate_scan, ParameterScan, ScanFileFormat};

use crate::api::{router, ServerConfig, DEFAULT_BODY_LIMIT};
use crate::store::SessionStore;

#[derive(Debug, Parser)]
#[command(name = "tempo", version, about = "Temporal parallel coordinates for simulation parameter scans")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a scan between long-CSV, wide-CSV and JSON.
    Convert(ConvertArgs),
    /// Check a scan file and list every violation.
    Validate(ValidateArgs),
    /// Simulate a parameter grid with the surrogate model.
    Simulate(SimulateArgs),
    /// Cluster every observable with DTW k-means.
    Cluster(ClusterArgs),
    /// Render a scan, its clusters and a selection to SVG.
    Render(RenderArgs),
    /// Run the HTTP server.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Input format; guessed from the extension when omitted.
    #[arg(long)]
    pub format: Option<ScanFileFormat>,
    #[arg(long)]
    pub output: PathBuf,
    /// Output format; guessed from the extension when omitted.
    #[arg(long)]
    pub to: Option<ScanFileFormat>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub format: Option<ScanFileFormat>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Grid spec JSON; the bundled 141-point demo grid when omitted.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub format: Option<ScanFileFormat>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[arg(long)]
    pub scan: PathBuf,
    #[arg(long)]
    pub scan_format: Option<ScanFileFormat>,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Per-observable k as `name=k`; repeatable.
    #[arg(long = "k-for", value_parser = parse_k_for)]
    pub k_for: Vec<(String, usize)>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
    #[arg(long, default_value_t = 50)]
    pub max_iter: usize,
    /// Sakoe-Chiba band half-width in time points.
    #[arg(long)]
    pub window: Option<usize>,
    /// Use cluster medoids instead of DTW barycenters.
    #[arg(long)]
    pub medoid: bool,
    /// Min-max normalize each observable before clustering.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub scan: PathBuf,
    #[arg(long)]
    pub scan_format: Option<ScanFileFormat>,
    /// Cluster model JSON from `tempo cluster`.
    #[arg(long)]
    pub clusters: PathBuf,
    /// Selection state JSON; nothing selected when omitted.
    #[arg(long)]
    pub selection: Option<PathBuf>,
    /// Layout request JSON (axis order, cluster order, gap).
    #[arg(long)]
    pub layout: Option<PathBuf>,
    /// Comma-separated visible axes, overriding the layout file.
    #[arg(long, value_delimiter = ',')]
    pub axis_order: Option<Vec<String>>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1600.0)]
    pub width: f64,
    #[arg(long, default_value_t = 900.0)]
    pub height: f64,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Write-through persistence directory.
    #[arg(long, env = "TEMPO_DATA_DIR")]
    pub data_dir: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_BODY_LIMIT / (1024 * 1024))]
    pub body_limit_mib: usize,
    #[arg(long, default_value_t = 120)]
    pub cluster_timeout_secs: u64,
}

fn parse_k_for(s: &str) -> Result<(String, usize), String> {
    let (name, k) = s.split_once('=').ok_or_else(|| format!("expected name=k, got '{s}'"))?;
    let k = k.parse().map_err(|_| format!("'{k}' is not a cluster count"))?;
    Ok((name.to_string(), k))
}

fn read_scan(path: &Path, format: Option<ScanFileFormat>) -> Result<ParameterScan> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let format = format.unwrap_or_else(|| ScanFileFormat::from_path(path));
    parse_scan(&bytes, format).with_context(|| format!("parsing {} as {format}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

impl ClusterArgs {
    pub fn config(&self) -> ClusterConfig {
        ClusterConfig {
            k: self.k,
            k_for: self.k_for.iter().cloned().collect(),
            max_iter: self.max_iter,
            restarts: self.restarts,
            seed: self.seed,
            dtw: DtwConfig { window: self.window },
            centroid: if self.medoid { CentroidRule::Medoid } else { CentroidRule::Dba },
            normalize: self.normalize,
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Convert(a) => {
            let scan = read_scan(&a.input, a.format)?;
            let to = a.to.unwrap_or_else(|| ScanFileFormat::from_path(&a.output));
            write(&a.output, &emit_scan(&scan, to))
        }
        Command::Validate(a) => {
            let bytes = std::fs::read(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
            let format = a.format.unwrap_or_else(|| ScanFileFormat::from_path(&a.input));
            match parse_scan(&bytes, format) {
                Ok(scan) => {
                    println!(
                        "ok: {} runs, {} parameters, {} observables, {} time points",
                        scan.runs.len(),
                        scan.parameter_schema.len(),
                        scan.observable_schema.len(),
                        scan.time_grid().len()
                    );
                    debug_assert!(validate_scan(&scan).is_empty());
                    Ok(())
                }
                Err(tempo_core::IngestError::Data(tempo_core::DataError::Invalid(violations))) => {
                    for v in &violations {
                        println!("{}", serde_json::to_string(v)?);
                    }
                    bail!("{} violation(s)", violations.len())
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Simulate(a) => {
            let grid = match &a.grid {
                Some(path) => read_json::<GridSpec>(path)?,
                None => GridSpec::demo(),
            };
            let scan = generate_scan(&grid, a.seed)?;
            let format = a.format.unwrap_or_else(|| ScanFileFormat::from_path(&a.out));
            write(&a.out, &emit_scan(&scan, format))
        }
        Command::Cluster(a) => {
            let scan = read_scan(&a.scan, a.scan_format)?;
            let model = cluster_scan(&scan, &a.config())?;
            for oc in &model.observables {
                for w in &oc.warnings {
                    eprintln!("warning: {}: {w}", oc.observable);
                }
            }
            write(&a.out, &serde_json::to_vec(&model)?)
        }
        Command::Render(a) => {
            let scan = read_scan(&a.scan, a.scan_format)?;
            let model: ClusterModel = read_json(&a.clusters)?;
            let selection: SelectionState = match &a.selection {
                Some(p) => read_json(p)?,
                None => SelectionState::default(),
            };
            let mut request: LayoutRequest = match &a.layout {
                Some(p) => read_json(p)?,
                None => LayoutRequest::default(),
            };
            if a.axis_order.is_some() {
                request.axis_order = a.axis_order.clone();
            }
            let layout = compute_layout(&scan, &model, &request)?;
            let part = evaluate(&selection, &scan, &model)?;
            let cfg = RenderConfig {
                width: a.width,
                height: a.height,
                ..Default::default()
            };
            write(&a.out, &render(&layout, &part, &cfg)?)
        }
        Command::Serve(a) => serve(a),
    }
}

fn serve(a: ServeArgs) -> Result<()> {
    let store = match &a.data_dir {
        Some(dir) => SessionStore::persistent(dir)?,
        None => SessionStore::in_memory(),
    };
    let config = ServerConfig {
        body_limit: a.body_limit_mib * 1024 * 1024,
        cluster_timeout: Duration::from_secs(a.cluster_timeout_secs),
    };
    let addr: SocketAddr = format!("{}:{}", a.host, a.port)
        .parse()
        .with_context(|| format!("bad address {}:{}", a.host, a.port))?;
    let app = router(Arc::new(store), config);
    tokio::runtime::Runtime::new()?.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        tracing::info!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}
