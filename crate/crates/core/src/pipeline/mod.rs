//! Image to DSL in three model-assisted steps: container structure,
//! template extraction, then one data specification per leaf.

pub mod prompts;
pub mod repair;
pub mod transport;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::dsl::{
    document_from_value, frame_from_value, node_to_value, serialize, spec_from_value, validate, ContainerId,
    ContainerNode, CoordinateFrame, DataSpecification, DslDocument, Severity, ValidationReport,
};
pub use repair::{parse_payload, repair_structured_output, strip_framing};
pub use transport::{ChatMessage, ChatRequest, ChatTransport, FixtureTransport, LiveTransport, Role, TransportError};

pub const DEFAULT_BASE_URL: &str = "https://api.openai.com/v1";
pub const DEFAULT_MODEL: &str = "gpt-5";

/// Endpoint settings, read from `REVIS_MLLM_*` environment variables.
#[derive(Clone, PartialEq, Eq)]
pub struct MllmEndpointConfig {
    pub base_url: String,
    pub model: String,
    pub api_key: Option<String>,
    pub timeout_secs: u64,
    pub max_retries: u32,
    /// Concurrent step-3 calls.
    pub max_parallel: usize,
}

impl fmt::Debug for MllmEndpointConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MllmEndpointConfig")
            .field("base_url", &self.base_url)
            .field("model", &self.model)
            .field("api_key", &self.api_key.as_ref().map(|_| "<set>"))
            .field("timeout_secs", &self.timeout_secs)
            .field("max_retries", &self.max_retries)
            .field("max_parallel", &self.max_parallel)
            .finish()
    }
}

impl Default for MllmEndpointConfig {
    fn default() -> Self {
        MllmEndpointConfig {
            base_url: DEFAULT_BASE_URL.into(),
            model: DEFAULT_MODEL.into(),
            api_key: None,
            timeout_secs: 300,
            max_retries: 2,
            max_parallel: 4,
        }
    }
}

impl MllmEndpointConfig {
    pub fn from_env() -> Result<Self, PipelineError> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, PipelineError> {
        let mut cfg = MllmEndpointConfig::default();
        if let Some(v) = get("REVIS_MLLM_BASE_URL") {
            cfg.base_url = v;
        }
        if let Some(v) = get("REVIS_MLLM_MODEL") {
            cfg.model = v;
        }
        cfg.api_key = get("REVIS_MLLM_API_KEY").filter(|k| !k.is_empty());
        let num = |key: &str, dflt: u64| -> Result<u64, PipelineError> {
            match get(key) {
                None => Ok(dflt),
                Some(v) => v.trim().parse().map_err(|_| PipelineError::Config(format!("{key} must be a non-negative integer, got `{v}`"))),
            }
        };
        cfg.timeout_secs = num("REVIS_MLLM_TIMEOUT_SECS", cfg.timeout_secs)?;
        cfg.max_retries = num("REVIS_MLLM_MAX_RETRIES", cfg.max_retries.into())? as u32;
        cfg.max_parallel = num("REVIS_MLLM_MAX_PARALLEL", cfg.max_parallel as u64)? as usize;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<(), PipelineError> {
        if self.timeout_secs == 0 {
            return Err(PipelineError::Config("timeout must be positive".into()));
        }
        if self.max_parallel == 0 {
            return Err(PipelineError::Config("max parallel requests must be at least 1".into()));
        }
        Ok(())
    }
}

/// Image bytes with a sniffed media type. Construction decodes the image,
/// so corrupt input fails before any call is made. Pixels are forwarded
/// unmodified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageInput {
    pub bytes: Vec<u8>,
    pub media_type: &'static str,
}

impl ImageInput {
    pub fn from_bytes(bytes: Vec<u8>) -> Result<Self, PipelineError> {
        let format = image::guess_format(&bytes).map_err(|e| PipelineError::Input(format!("unrecognised image: {e}")))?;
        let media_type = match format {
            image::ImageFormat::Png => "image/png",
            image::ImageFormat::Jpeg => "image/jpeg",
            image::ImageFormat::Gif => "image/gif",
            image::ImageFormat::WebP => "image/webp",
            other => return Err(PipelineError::Input(format!("unsupported image format {other:?}"))),
        };
        image::load_from_memory_with_format(&bytes, format)
            .map_err(|e| PipelineError::Input(format!("image does not decode: {e}")))?;
        Ok(ImageInput { bytes, media_type })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemplateIndexEntry {
    pub template_id: ContainerId,
    pub instance_ids: Vec<ContainerId>,
    pub instance_bboxes: Vec<CoordinateFrame>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Pending,
    Step1,
    Step2,
    Step3,
    Assembling,
    Done,
    Failed,
}

/// Everything one image-to-DSL run produced, including raw responses keyed
/// by call label.
#[derive(Debug, Clone, Serialize)]
pub struct PipelineRun {
    pub id: String,
    #[serde(skip)]
    pub image: Option<ImageInput>,
    pub media_type: Option<&'static str>,
    pub status: RunStatus,
    pub transcripts: BTreeMap<String, String>,
    pub artifacts: BTreeMap<String, Value>,
    pub warnings: Vec<String>,
    pub failure: Option<String>,
    #[serde(skip)]
    pub document: Option<DslDocument>,
    pub report: Option<ValidationReport>,
}

/// Shared, lock-protected run record. With a directory set, each raw
/// response is written to `<dir>/<label>.txt` (the fixture layout) before
/// it is parsed.
#[derive(Debug)]
pub struct Recorder {
    run: Mutex<PipelineRun>,
    dir: Option<PathBuf>,
}

impl Recorder {
    pub fn new(id: impl Into<String>, image: Option<ImageInput>) -> Self {
        let media_type = image.as_ref().map(|i| i.media_type);
        Recorder {
            run: Mutex::new(PipelineRun {
                id: id.into(),
                image,
                media_type,
                status: RunStatus::Pending,
                transcripts: BTreeMap::new(),
                artifacts: BTreeMap::new(),
                warnings: Vec::new(),
                failure: None,
                document: None,
                report: None,
            }),
            dir: None,
        }
    }

    pub fn persist_to(mut self, dir: impl Into<PathBuf>) -> Self {
        self.dir = Some(dir.into());
        self
    }

    pub fn snapshot(&self) -> PipelineRun {
        self.lock().clone()
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, PipelineRun> {
        self.run.lock().unwrap_or_else(|p| p.into_inner())
    }

    pub fn record(&self, label: &str, raw: &str) -> Result<(), PipelineError> {
        if let Some(dir) = &self.dir {
            std::fs::create_dir_all(dir).map_err(|e| PipelineError::Io(format!("{}: {e}", dir.display())))?;
            let path = dir.join(format!("{label}.txt"));
            std::fs::write(&path, raw).map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))?;
        }
        self.lock().transcripts.insert(label.to_string(), raw.to_string());
        Ok(())
    }

    pub fn set_status(&self, status: RunStatus) {
        self.lock().status = status;
    }

    fn artifact(&self, label: &str, value: Value) {
        self.lock().artifacts.insert(label.to_string(), value);
    }

    fn warn(&self, message: String) {
        self.lock().warnings.push(message);
    }

    pub fn fail(&self, e: &PipelineError) {
        let mut run = self.lock();
        run.status = RunStatus::Failed;
        run.failure = Some(e.to_string());
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PipelineError {
    #[error("input: {0}")]
    Input(String),
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("call `{label}` failed: {source}")]
    Transport { label: String, source: TransportError },
    #[error("call `{label}` returned an unusable response after one repair round: {}", errors.join("; "))]
    Schema { label: String, errors: Vec<String>, transcripts: Vec<String> },
    #[error("assembly: {0}")]
    Assembly(String),
    #[error("i/o: {0}")]
    Io(String),
}

/// Output of step 2.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateStage {
    pub cleaned: ContainerNode,
    pub index: Vec<TemplateIndexEntry>,
    pub specs: BTreeMap<ContainerId, DataSpecification>,
}

/// Fills in what models commonly leave implicit: a missing `if_leaf` is
/// inferred from `components`, and `components: null` is dropped.
fn normalize_tree(v: &mut Value) {
    let Some(obj) = v.as_object_mut() else { return };
    if obj.get("components").is_some_and(Value::is_null) {
        obj.remove("components");
    }
    if !obj.contains_key("if_leaf") {
        let has_children = obj.get("components").and_then(Value::as_array).is_some_and(|a| !a.is_empty());
        obj.insert("if_leaf".into(), Value::Bool(!has_children));
    }
    if let Some(children) = obj.get_mut("components").and_then(Value::as_array_mut) {
        children.iter_mut().for_each(normalize_tree);
    }
}

fn issue_messages(report: &ValidationReport, only: Option<&ContainerId>) -> Vec<String> {
    report
        .issues
        .iter()
        .filter(|i| i.severity == Severity::Error && i.rule != "spec.missing")
        .filter(|i| only.is_none_or(|id| &i.container == id))
        .map(|i| i.to_string())
        .collect()
}

/// Parses and structurally validates a container tree without specs.
pub fn check_tree(mut v: Value) -> Result<ContainerNode, Vec<String>> {
    normalize_tree(&mut v);
    if let Some(obj) = v.as_object_mut() {
        obj.remove("data_specification");
    }
    let doc = document_from_value(v).map_err(|e| vec![e.to_string()])?;
    let errs = issue_messages(&validate(&doc), None);
    if errs.is_empty() {
        Ok(doc.root)
    } else {
        Err(errs)
    }
}

fn check_index(
    v: &Value,
    structure: &ContainerNode,
    cleaned: &ContainerNode,
) -> Result<Vec<TemplateIndexEntry>, Vec<String>> {
    let arr = v.as_array().ok_or_else(|| vec!["template_index must be an array".to_string()])?;
    let mut errs = Vec::new();
    let mut out = Vec::new();
    let id_of = |x: &Value, what: &str, errs: &mut Vec<String>| -> Option<ContainerId> {
        match x.as_str().map(ContainerId::parse) {
            Some(Ok(id)) => Some(id),
            _ => {
                errs.push(format!("{what}: `{x}` is not a container id"));
                None
            }
        }
    };
    for (i, e) in arr.iter().enumerate() {
        let at = format!("template_index[{i}]");
        let Some(tid) = e.get("template_id").and_then(|x| id_of(x, &format!("{at}.template_id"), &mut errs)) else {
            continue;
        };
        match cleaned.find(&tid) {
            None => errs.push(format!("{at}: template `{tid}` is not in cleaned_dsl")),
            Some(_) if !tid.is_template() => errs.push(format!("{at}: `{tid}` has no template letter")),
            Some(_) => {}
        }
        let ids: Vec<ContainerId> = e
            .get("instance_ids")
            .and_then(Value::as_array)
            .map(|a| a.iter().filter_map(|x| id_of(x, &format!("{at}.instance_ids"), &mut errs)).collect())
            .unwrap_or_default();
        let mut boxes = Vec::new();
        for (j, b) in e.get("instance_bboxes").and_then(Value::as_array).into_iter().flatten().enumerate() {
            match frame_from_value(b) {
                Ok(f) if f.is_valid() => boxes.push(f),
                Ok(_) => errs.push(format!("{at}.instance_bboxes[{j}]: degenerate frame")),
                Err(e) => errs.push(format!("{at}.instance_bboxes[{j}]: {}", e.reason)),
            }
        }
        if ids.len() < 2 || ids.len() != boxes.len() {
            errs.push(format!(
                "{at}: needs at least two instance_ids and one bbox per id (got {} ids, {} bboxes)",
                ids.len(),
                boxes.len()
            ));
        }
        for id in &ids {
            if structure.find(id).is_none() {
                errs.push(format!("{at}: instance `{id}` is not in the original DSL"));
            }
            if cleaned.find(id).is_some() {
                errs.push(format!("{at}: instance `{id}` was merged but is still in cleaned_dsl"));
            }
        }
        out.push(TemplateIndexEntry { template_id: tid, instance_ids: ids, instance_bboxes: boxes });
    }
    for t in cleaned.preorder().into_iter().filter(|n| n.is_template()) {
        if !out.iter().any(|e| e.template_id == t.id) {
            errs.push(format!("template `{}` has no template_index entry", t.id));
        }
    }
    if errs.is_empty() {
        Ok(out)
    } else {
        Err(errs)
    }
}

/// Validates `spec` as the specification of `id` within `tree`.
fn check_spec_in(tree: &ContainerNode, id: &ContainerId, spec: DataSpecification) -> Result<DataSpecification, Vec<String>> {
    let doc = DslDocument { root: tree.clone(), data_specifications: BTreeMap::from([(id.clone(), spec)]) };
    let errs = issue_messages(&validate(&doc), Some(id));
    if errs.is_empty() {
        Ok(doc.data_specifications.into_values().next().expect("one spec"))
    } else {
        Err(errs)
    }
}

fn pretty(v: &impl Serialize) -> String {
    serde_json::to_string_pretty(v).expect("artifacts serialize")
}

fn user(text: String) -> Vec<ChatMessage> {
    vec![ChatMessage { role: Role::User, text }]
}

/// Drives the three steps against one transport.
pub struct Pipeline<'t> {
    pub transport: &'t dyn ChatTransport,
    pub max_parallel: usize,
}

impl<'t> Pipeline<'t> {
    pub fn new(transport: &'t dyn ChatTransport, max_parallel: usize) -> Self {
        Pipeline { transport, max_parallel: max_parallel.max(1) }
    }

    pub fn step1_parse_structure(&self, image: &ImageInput, rec: &Recorder) -> Result<ContainerNode, PipelineError> {
        let req = ChatRequest { label: "step1".into(), messages: user(prompts::STRUCTURE.render(&[])), image: Some(image) };
        let tree = repair_structured_output(self.transport, rec, req, &check_tree)?;
        rec.artifact("step1", node_to_value(&tree));
        Ok(tree)
    }

    pub fn step2_extract_templates(
        &self,
        structure: &ContainerNode,
        image: &ImageInput,
        rec: &Recorder,
    ) -> Result<TemplateStage, PipelineError> {
        let structure_text = pretty(&node_to_value(structure));
        let req = ChatRequest {
            label: "step2a".into(),
            messages: user(prompts::TEMPLATE_MERGE.render(&[("structure_result", &structure_text)])),
            image: Some(image),
        };
        let check = |v: Value| -> Result<(ContainerNode, Vec<TemplateIndexEntry>), Vec<String>> {
            let mut obj = match v {
                Value::Object(o) => o,
                _ => return Err(vec!["expected an object with cleaned_dsl and template_index".into()]),
            };
            let cleaned = obj.remove("cleaned_dsl").ok_or_else(|| vec!["missing field `cleaned_dsl`".to_string()])?;
            let cleaned = check_tree(cleaned).map_err(|e| e.into_iter().map(|m| format!("cleaned_dsl: {m}")).collect::<Vec<_>>())?;
            let index = obj.remove("template_index").unwrap_or(Value::Array(Vec::new()));
            let index = check_index(&index, structure, &cleaned)?;
            Ok((cleaned, index))
        };
        let (mut cleaned, index) = repair_structured_output(self.transport, rec, req, &check)?;

        for entry in &index {
            let bbox = entry.instance_bboxes.iter().skip(1).try_fold(entry.instance_bboxes[0], |acc, b| acc.union(b));
            let node = cleaned.find_mut(&entry.template_id).expect("checked above");
            match bbox {
                Some(b) if b != node.frame => {
                    rec.warn(format!("template `{}` frame replaced by the bounding box of its instances", entry.template_id));
                    node.frame = b;
                }
                Some(_) => {}
                None => rec.warn(format!("template `{}` mixes cartesian and polar instance boxes", entry.template_id)),
            }
        }
        rec.artifact("step2a", serde_json::json!({"cleaned_dsl": node_to_value(&cleaned), "template_index": index}));

        let cleaned_text = pretty(&node_to_value(&cleaned));
        let mut specs = BTreeMap::new();
        for entry in &index {
            let tid = &entry.template_id;
            let label = format!("step2b-{tid}");
            let req = ChatRequest {
                label: label.clone(),
                messages: user(prompts::TEMPLATE_SPEC.render(&[
                    ("structure_result", &structure_text),
                    ("cleaned_dsl", &cleaned_text),
                    ("template_index", &pretty(entry)),
                ])),
                image: Some(image),
            };
            let check = |v: Value| -> Result<(DataSpecification, Option<String>), Vec<String>> {
                let Value::Object(mut obj) = v else {
                    return Err(vec!["expected a template data specification object".into()]);
                };
                let note = match obj.remove("container_id") {
                    Some(Value::String(s)) if s != tid.to_string() => {
                        Some(format!("{label}: response names container `{s}`, used for `{tid}`"))
                    }
                    _ => None,
                };
                let spec = spec_from_value(Value::Object(obj)).map_err(|e| vec![e.to_string()])?;
                Ok((check_spec_in(&cleaned, tid, spec)?, note))
            };
            let (spec, note) = repair_structured_output(self.transport, rec, req, &check)?;
            if let Some(n) = note {
                rec.warn(n);
            }
            rec.artifact(&label, serde_json::to_value(&spec).expect("specs serialize"));
            specs.insert(tid.clone(), spec);
        }
        Ok(TemplateStage { cleaned, index, specs })
    }

    /// `context` is the cleaned tree with the template specifications.
    pub fn step3_parse_leaf(
        &self,
        context: &DslDocument,
        leaf: &ContainerId,
        image: &ImageInput,
        rec: &Recorder,
    ) -> Result<DataSpecification, PipelineError> {
        let node = context
            .find(leaf)
            .filter(|n| n.is_leaf)
            .ok_or_else(|| PipelineError::Precondition(format!("`{leaf}` is not a leaf of the cleaned tree")))?;
        let tree_mark = node.mark_type.expect("validated leaves carry a mark type");
        let label = format!("step3-{leaf}");
        let req = ChatRequest {
            label: label.clone(),
            messages: user(prompts::LEAF_ENCODING.render(&[
                ("dsl", &serialize(context)),
                ("mark_type", tree_mark.as_str()),
                ("container_id", &leaf.to_string()),
            ])),
            image: Some(image),
        };
        let check = |v: Value| -> Result<(DataSpecification, Option<String>), Vec<String>> {
            let mut spec = spec_from_value(v).map_err(|e| vec![e.to_string()])?;
            let mut note = None;
            if let Some(m) = spec.mark_specification.as_mut() {
                if m.mark_type != tree_mark {
                    note = Some(format!("{label}: mark_type `{}` replaced by the tree's `{tree_mark}`", m.mark_type));
                    m.mark_type = tree_mark;
                }
            }
            Ok((check_spec_in(&context.root, leaf, spec)?, note))
        };
        let (spec, note) = repair_structured_output(self.transport, rec, req, &check)?;
        if let Some(n) = note {
            rec.warn(n);
        }
        rec.artifact(&label, serde_json::to_value(&spec).expect("specs serialize"));
        Ok(spec)
    }

    /// Step 3 for every leaf, at most `max_parallel` at a time. Results are
    /// merged in leaf id order; the first failure in that order is returned.
    pub fn step3_all(
        &self,
        context: &DslDocument,
        image: &ImageInput,
        rec: &Recorder,
    ) -> Result<BTreeMap<ContainerId, DataSpecification>, PipelineError> {
        let mut leaves: Vec<ContainerId> = context.leaves().into_iter().map(|n| n.id.clone()).collect();
        leaves.sort();
        let next = AtomicUsize::new(0);
        let slots: Vec<Mutex<Option<Result<DataSpecification, PipelineError>>>> =
            leaves.iter().map(|_| Mutex::new(None)).collect();
        std::thread::scope(|s| {
            for _ in 0..self.max_parallel.min(leaves.len()) {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    if i >= leaves.len() {
                        break;
                    }
                    let r = self.step3_parse_leaf(context, &leaves[i], image, rec);
                    *slots[i].lock().expect("slot") = Some(r);
                });
            }
        });
        let mut out = BTreeMap::new();
        for (id, slot) in leaves.into_iter().zip(slots) {
            out.insert(id, slot.into_inner().expect("slot").expect("every leaf ran")?);
        }
        Ok(out)
    }

    /// The whole procedure. Status, transcripts, artifacts and the final
    /// document land in `rec`.
    pub fn run(&self, image: &ImageInput, rec: &Recorder) -> Result<DslDocument, PipelineError> {
        let r = self.run_inner(image, rec);
        if let Err(e) = &r {
            rec.fail(e);
        }
        r
    }

    fn run_inner(&self, image: &ImageInput, rec: &Recorder) -> Result<DslDocument, PipelineError> {
        rec.set_status(RunStatus::Step1);
        let structure = self.step1_parse_structure(image, rec)?;
        rec.set_status(RunStatus::Step2);
        let stage = self.step2_extract_templates(&structure, image, rec)?;
        rec.set_status(RunStatus::Step3);
        let context = DslDocument { root: stage.cleaned.clone(), data_specifications: stage.specs.clone() };
        let leaf_specs = self.step3_all(&context, image, rec)?;
        rec.set_status(RunStatus::Assembling);
        let doc = assemble(stage.cleaned, stage.specs, leaf_specs)?;
        let report = validate(&doc);
        let mut run = rec.lock();
        run.report = Some(report);
        run.document = Some(doc.clone());
        run.status = RunStatus::Done;
        Ok(doc)
    }
}

/// Joins the cleaned tree with every template and leaf specification.
pub fn assemble(
    cleaned: ContainerNode,
    template_specs: BTreeMap<ContainerId, DataSpecification>,
    leaf_specs: BTreeMap<ContainerId, DataSpecification>,
) -> Result<DslDocument, PipelineError> {
    let mut doc = DslDocument::new(cleaned);
    for n in doc.root.preorder() {
        let specs = if n.is_template() {
            &template_specs
        } else if n.is_leaf {
            &leaf_specs
        } else {
            continue;
        };
        if !specs.contains_key(&n.id) {
            let what = if n.is_template() { "template" } else { "leaf" };
            return Err(PipelineError::Assembly(format!("no specification for {what} `{}`", n.id)));
        }
    }
    for (id, spec) in template_specs.into_iter().chain(leaf_specs) {
        if doc.find(&id).is_none() {
            return Err(PipelineError::Assembly(format!("specification for unknown container `{id}`")));
        }
        doc.data_specifications.insert(id, spec);
    }
    Ok(doc)
}
