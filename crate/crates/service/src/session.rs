use std::collections::{BTreeMap, HashMap, VecDeque};
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use revis_core::datagen::{apply_user_tables, Seed, UserTable};
use revis_core::dsl::{parse_document, serialize, ContainerId, DslDocument};
use revis_core::render::{render_document, RenderOptions};
use serde::{Deserialize, Serialize};

use crate::ApiError;

/// What one undo step restores: the serialized document and the uploaded
/// tables, keyed by container id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub document: String,
    pub data: BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Stored {
    id: String,
    seed: Seed,
    run: Option<String>,
    current: Snapshot,
    history: Vec<Snapshot>,
}

#[derive(Debug, Clone)]
pub struct Session {
    pub id: String,
    pub seed: Seed,
    pub run: Option<String>,
    pub doc: DslDocument,
    pub tables: BTreeMap<ContainerId, UserTable>,
    current: Snapshot,
    history: VecDeque<Snapshot>,
}

fn read_tables(data: &BTreeMap<String, String>) -> Result<BTreeMap<ContainerId, UserTable>, String> {
    data.iter()
        .map(|(k, v)| {
            let id = ContainerId::parse(k).map_err(|e| e.to_string())?;
            Ok((id, UserTable::parse(v).map_err(|e| format!("{k}: {e}"))?))
        })
        .collect()
}

impl Session {
    pub fn new(id: String, doc: DslDocument, seed: Seed, run: Option<String>) -> Self {
        let current = Snapshot { document: serialize(&doc), data: BTreeMap::new() };
        Session { id, seed, run, doc, tables: BTreeMap::new(), current, history: VecDeque::new() }
    }

    pub fn document_text(&self) -> &str {
        &self.current.document
    }

    pub fn data_text(&self) -> &BTreeMap<String, String> {
        &self.current.data
    }

    pub fn undo_depth(&self) -> usize {
        self.history.len()
    }

    /// Makes `doc` plus `data` current, keeping at most `depth` earlier
    /// states.
    pub fn commit(&mut self, doc: DslDocument, data: BTreeMap<String, String>, depth: usize) -> Result<(), String> {
        let tables = read_tables(&data)?;
        let next = Snapshot { document: serialize(&doc), data };
        let prev = std::mem::replace(&mut self.current, next);
        self.history.push_back(prev);
        while self.history.len() > depth {
            self.history.pop_front();
        }
        self.doc = doc;
        self.tables = tables;
        Ok(())
    }

    /// Returns false when there is nothing to undo.
    pub fn undo(&mut self) -> bool {
        let Some(prev) = self.history.pop_back() else { return false };
        self.doc = parse_document(&prev.document).expect("history holds serialized documents");
        self.tables = read_tables(&prev.data).expect("history holds accepted tables");
        self.current = prev;
        true
    }

    pub fn render(&self, opts: &RenderOptions) -> Result<String, ApiError> {
        render_with(&self.doc, &self.tables, opts)
    }

    fn to_stored(&self) -> Stored {
        Stored {
            id: self.id.clone(),
            seed: self.seed,
            run: self.run.clone(),
            current: self.current.clone(),
            history: self.history.iter().cloned().collect(),
        }
    }

    fn from_stored(s: Stored) -> Result<Self, String> {
        let doc = parse_document(&s.current.document).map_err(|e| e.to_string())?;
        let tables = read_tables(&s.current.data)?;
        Ok(Session {
            id: s.id,
            seed: s.seed,
            run: s.run,
            doc,
            tables,
            current: s.current,
            history: s.history.into(),
        })
    }
}

/// Renders `doc` with every uploaded table applied.
pub fn render_with(doc: &DslDocument, tables: &BTreeMap<ContainerId, UserTable>, opts: &RenderOptions) -> Result<String, ApiError> {
    let (doc, overrides) = apply_user_tables(doc, tables, opts.seed).map_err(|e| ApiError::unprocessable(e.to_string()))?;
    render_document(&doc, opts, &overrides).map_err(|e| ApiError::unprocessable(e.to_string()))
}

pub type SessionHandle = Arc<tokio::sync::RwLock<Session>>;

/// Sessions by id, written through to `<dir>/sessions/<id>.json`.
#[derive(Debug, Default)]
pub struct Store {
    dir: Option<PathBuf>,
    sessions: RwLock<HashMap<String, SessionHandle>>,
}

impl Store {
    pub fn open(dir: Option<&Path>) -> std::io::Result<Self> {
        let mut sessions = HashMap::new();
        if let Some(dir) = dir {
            let dir = dir.join("sessions");
            std::fs::create_dir_all(&dir)?;
            for e in std::fs::read_dir(&dir)? {
                let p = e?.path();
                if p.extension().is_none_or(|x| x != "json") {
                    continue;
                }
                let text = std::fs::read_to_string(&p)?;
                let stored: Stored = serde_json::from_str(&text)
                    .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{}: {e}", p.display())))?;
                let s = Session::from_stored(stored)
                    .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{}: {e}", p.display())))?;
                sessions.insert(s.id.clone(), Arc::new(tokio::sync::RwLock::new(s)));
            }
        }
        Ok(Store { dir: dir.map(|d| d.join("sessions")), sessions: RwLock::new(sessions) })
    }

    pub fn get(&self, id: &str) -> Option<SessionHandle> {
        self.sessions.read().unwrap_or_else(|p| p.into_inner()).get(id).cloned()
    }

    pub fn insert(&self, s: Session) -> Result<SessionHandle, ApiError> {
        self.persist(&s)?;
        let id = s.id.clone();
        let h = Arc::new(tokio::sync::RwLock::new(s));
        self.sessions.write().unwrap_or_else(|p| p.into_inner()).insert(id, h.clone());
        Ok(h)
    }

    /// Writes the session file atomically (temporary file, then rename).
    pub fn persist(&self, s: &Session) -> Result<(), ApiError> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let text = serde_json::to_string(&s.to_stored()).expect("sessions serialize");
        let tmp = dir.join(format!("{}.json.tmp", s.id));
        std::fs::write(&tmp, text)
            .and_then(|_| std::fs::rename(&tmp, dir.join(format!("{}.json", s.id))))
            .map_err(|e| ApiError::internal(format!("persisting session {}: {e}", s.id)))
    }
}
