use std::path::PathBuf;

use revis_core::pipeline::{MllmEndpointConfig, PipelineError};

/// Where pipeline runs get their model responses.
#[derive(Debug, Clone)]
pub enum PipelineMode {
    /// Replay recorded responses from `<dir>/<case>/`.
    Fixtures(PathBuf),
    Live(MllmEndpointConfig),
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub port: u16,
    /// Session and run persistence. `None` keeps everything in memory.
    pub storage: Option<PathBuf>,
    pub max_upload_bytes: usize,
    pub history_depth: usize,
    /// Largest accepted render width or height, in pixels.
    pub max_render_side: f64,
    /// Allowed CORS origin; any origin when unset.
    pub cors_origin: Option<String>,
    /// Pipeline runs executing at once.
    pub run_workers: usize,
    pub pipeline: PipelineMode,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            port: 8080,
            storage: None,
            max_upload_bytes: 20 * 1024 * 1024,
            history_depth: 100,
            max_render_side: 4096.0,
            cors_origin: None,
            run_workers: 2,
            pipeline: PipelineMode::Live(MllmEndpointConfig::default()),
        }
    }
}

impl ServiceConfig {
    /// Reads `REVIS_PORT`, `REVIS_STORAGE`, `REVIS_MAX_UPLOAD_BYTES`,
    /// `REVIS_HISTORY_DEPTH`, `REVIS_CORS_ORIGIN`, `REVIS_RUN_WORKERS` and
    /// `REVIS_FIXTURES`, falling back to the `REVIS_MLLM_*` endpoint
    /// settings when no fixture directory is given.
    pub fn from_env() -> Result<Self, PipelineError> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, PipelineError> {
        let mut cfg = ServiceConfig::default();
        let num = |key: &str| -> Result<Option<u64>, PipelineError> {
            get(key)
                .map(|v| v.trim().parse().map_err(|_| PipelineError::Config(format!("{key} must be a non-negative integer, got `{v}`"))))
                .transpose()
        };
        if let Some(p) = num("REVIS_PORT")? {
            cfg.port = u16::try_from(p).map_err(|_| PipelineError::Config(format!("REVIS_PORT {p} is out of range")))?;
        }
        if let Some(n) = num("REVIS_MAX_UPLOAD_BYTES")? {
            cfg.max_upload_bytes = n as usize;
        }
        if let Some(n) = num("REVIS_HISTORY_DEPTH")? {
            cfg.history_depth = n as usize;
        }
        if let Some(n) = num("REVIS_RUN_WORKERS")? {
            cfg.run_workers = (n as usize).max(1);
        }
        cfg.storage = get("REVIS_STORAGE").filter(|s| !s.is_empty()).map(PathBuf::from);
        cfg.cors_origin = get("REVIS_CORS_ORIGIN").filter(|s| !s.is_empty());
        cfg.pipeline = match get("REVIS_FIXTURES").filter(|s| !s.is_empty()) {
            Some(dir) => PipelineMode::Fixtures(dir.into()),
            None => PipelineMode::Live(MllmEndpointConfig::from_lookup(&get)?),
        };
        Ok(cfg)
    }
}
