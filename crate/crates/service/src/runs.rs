use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use revis_core::dsl::to_value;
use revis_core::pipeline::{
    ChatTransport, FixtureTransport, ImageInput, LiveTransport, Pipeline, PipelineError, Recorder, RunStatus,
};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use tokio::sync::Semaphore;

use crate::config::PipelineMode;

/// Pipeline runs by id, executed on a bounded pool of blocking workers.
#[derive(Debug)]
pub struct Runs {
    mode: PipelineMode,
    dir: Option<PathBuf>,
    workers: Arc<Semaphore>,
    runs: RwLock<HashMap<String, Arc<Recorder>>>,
}

fn sha(bytes: &[u8]) -> [u8; 32] {
    Sha256::digest(bytes).into()
}

/// The fixture case recorded for `image`: the one named, or else the only
/// case whose `image.png` has the same bytes.
pub fn pick_fixture(root: &Path, name: Option<&str>, image: &[u8]) -> Result<PathBuf, String> {
    if let Some(name) = name {
        let dir = root.join(name);
        if name.contains(['/', '\\']) || name.starts_with('.') || !dir.is_dir() {
            return Err(format!("no fixture case `{name}`"));
        }
        return Ok(dir);
    }
    let want = sha(image);
    let mut hits = Vec::new();
    for e in std::fs::read_dir(root).map_err(|e| format!("{}: {e}", root.display()))? {
        let dir = e.map_err(|e| e.to_string())?.path();
        if std::fs::read(dir.join("image.png")).is_ok_and(|b| sha(&b) == want) {
            hits.push(dir);
        }
    }
    match hits.len() {
        1 => Ok(hits.pop().expect("one hit")),
        0 => Err("no fixture case was recorded for this image".into()),
        n => Err(format!("{n} fixture cases share this image; name one with ?fixture=")),
    }
}

impl Runs {
    pub fn new(mode: PipelineMode, dir: Option<&Path>, workers: usize) -> Self {
        Runs {
            mode,
            dir: dir.map(|d| d.join("runs")),
            workers: Arc::new(Semaphore::new(workers.max(1))),
            runs: RwLock::new(HashMap::new()),
        }
    }

    pub fn get(&self, id: &str) -> Option<Arc<Recorder>> {
        self.runs.read().unwrap_or_else(|p| p.into_inner()).get(id).cloned()
    }

    /// Checks the request against the configured mode; returns the fixture
    /// directory to replay in fixture mode.
    pub fn prepare(&self, fixture: Option<&str>, image: &[u8]) -> Result<Option<PathBuf>, String> {
        match &self.mode {
            PipelineMode::Fixtures(root) => pick_fixture(root, fixture, image).map(Some),
            PipelineMode::Live(_) if fixture.is_some() => Err("the service is not in fixture mode".into()),
            PipelineMode::Live(_) => Ok(None),
        }
    }

    /// Registers a pending run and starts it in the background.
    pub fn start(self: &Arc<Self>, image: ImageInput, fixture: Option<PathBuf>) -> String {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let mut rec = Recorder::new(id.clone(), Some(image.clone()));
        if let Some(dir) = &self.dir {
            rec = rec.persist_to(dir.join(&id));
        }
        let rec = Arc::new(rec);
        self.runs.write().unwrap_or_else(|p| p.into_inner()).insert(id.clone(), rec.clone());
        let this = self.clone();
        tokio::spawn(async move {
            let Ok(_permit) = this.workers.clone().acquire_owned().await else { return };
            let mode = this.mode.clone();
            let job = tokio::task::spawn_blocking(move || {
                let (transport, parallel): (Box<dyn ChatTransport>, usize) = match (mode, fixture) {
                    (PipelineMode::Fixtures(_), Some(dir)) => (Box::new(FixtureTransport::new(dir)), 4),
                    (PipelineMode::Live(cfg), _) => {
                        let parallel = cfg.max_parallel;
                        match LiveTransport::new(cfg) {
                            Ok(t) => (Box::new(t), parallel),
                            Err(e) => {
                                rec.fail(&PipelineError::Config(e.to_string()));
                                return;
                            }
                        }
                    }
                    (PipelineMode::Fixtures(_), None) => {
                        rec.fail(&PipelineError::Config("no fixture case selected".into()));
                        return;
                    }
                };
                // Failures are recorded on the run.
                let _ = Pipeline::new(transport.as_ref(), parallel).run(&image, &rec);
            });
            let _ = job.await;
        });
        id
    }
}

/// Run status as returned by `GET /runs/{id}`.
pub fn run_json(rec: &Recorder) -> Value {
    let run = rec.snapshot();
    let mut v = json!({
        "id": run.id,
        "status": run.status,
        "media_type": run.media_type,
        "calls": run.transcripts.keys().collect::<Vec<_>>(),
        "warnings": run.warnings,
        "failure": run.failure,
    });
    if run.status == RunStatus::Done {
        v["document"] = run.document.as_ref().map(to_value).unwrap_or(Value::Null);
        v["report"] = serde_json::to_value(&run.report).expect("reports serialize");
    }
    v
}
