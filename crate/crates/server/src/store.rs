//! In-memory sessions keyed by server-assigned scan ids, with optional
//! write-through persistence to a directory of canonical-JSON files.
//!
//! Readers clone `Arc`s under a short read lock and never wait for a
//! computation. Writers of one scan serialize on that scan's writer mutex,
//! compute without holding the read lock, then swap the result in.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use anyhow::Context;
use tempo_core::clustering::ClusterModel;
use tempo_core::layout::LayoutRequest;
use tempo_core::{emit_scan, parse_scan, ParameterScan, ScanFileFormat};

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub scan: Arc<ParameterScan>,
    pub model: Option<Arc<ClusterModel>>,
    pub layout: LayoutRequest,
}

#[derive(Debug)]
pub struct Session {
    state: RwLock<Snapshot>,
    /// Held for the whole read-compute-write cycle of a mutation.
    pub writer: tokio::sync::Mutex<()>,
}

impl Session {
    fn new(scan: ParameterScan, model: Option<ClusterModel>) -> Self {
        Self {
            state: RwLock::new(Snapshot {
                scan: Arc::new(scan),
                model: model.map(Arc::new),
                layout: LayoutRequest::default(),
            }),
            writer: tokio::sync::Mutex::new(()),
        }
    }

    pub fn snapshot(&self) -> Snapshot {
        self.state.read().expect("session lock").clone()
    }

    fn update(&self, f: impl FnOnce(&mut Snapshot)) {
        f(&mut self.state.write().expect("session lock"));
    }
}

#[derive(Debug, Default)]
struct Index {
    next: u64,
    sessions: BTreeMap<String, Arc<Session>>,
}

#[derive(Debug, Default)]
pub struct SessionStore {
    index: RwLock<Index>,
    data_dir: Option<PathBuf>,
}

fn scan_file(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("{id}.scan.json"))
}

fn model_file(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("{id}.clusters.json"))
}

impl SessionStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens `dir`, creating it if needed, and loads every stored scan.
    pub fn persistent(dir: impl Into<PathBuf>) -> anyhow::Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut index = Index { next: 1, ..Default::default() };
        let mut names: Vec<PathBuf> = std::fs::read_dir(&dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.to_string_lossy().ends_with(".scan.json"))
            .collect();
        names.sort();
        for path in names {
            let file = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
            let id = file.trim_end_matches(".scan.json").to_string();
            let bytes = std::fs::read(&path)?;
            let scan = parse_scan(&bytes, ScanFileFormat::Json)
                .with_context(|| format!("loading {}", path.display()))?;
            let model = match std::fs::read(model_file(&dir, &id)) {
                Ok(b) => Some(serde_json::from_slice::<ClusterModel>(&b)?),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
                Err(e) => return Err(e.into()),
            };
            if let Some(n) = id.strip_prefix("scan-").and_then(|n| n.parse::<u64>().ok()) {
                index.next = index.next.max(n + 1);
            }
            index.sessions.insert(id, Arc::new(Session::new(scan, model)));
        }
        Ok(Self {
            index: RwLock::new(index),
            data_dir: Some(dir),
        })
    }

    pub fn ids(&self) -> Vec<String> {
        self.index.read().expect("index lock").sessions.keys().cloned().collect()
    }

    pub fn get(&self, id: &str) -> Option<Arc<Session>> {
        self.index.read().expect("index lock").sessions.get(id).cloned()
    }

    /// Stores `scan` under the next id (`scan-1`, `scan-2`, ...).
    pub fn insert(&self, scan: ParameterScan) -> anyhow::Result<String> {
        let mut index = self.index.write().expect("index lock");
        index.next = index.next.max(1);
        let id = format!("scan-{}", index.next);
        if let Some(dir) = &self.data_dir {
            std::fs::write(scan_file(dir, &id), emit_scan(&scan, ScanFileFormat::Json))?;
        }
        index.next += 1;
        index.sessions.insert(id.clone(), Arc::new(Session::new(scan, None)));
        Ok(id)
    }

    pub fn set_model(&self, id: &str, session: &Session, model: ClusterModel) -> anyhow::Result<Arc<ClusterModel>> {
        if let Some(dir) = &self.data_dir {
            std::fs::write(model_file(dir, id), serde_json::to_vec(&model)?)?;
        }
        let model = Arc::new(model);
        session.update(|s| s.model = Some(model.clone()));
        Ok(model)
    }

    pub fn set_layout(&self, session: &Session, layout: LayoutRequest) {
        session.update(|s| s.layout = layout);
    }
}
