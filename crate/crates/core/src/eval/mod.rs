//! Attribute accuracy of generated documents against ground truths.

pub mod rubric;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::dsl::{parse_document, to_value, DslDocument};
use crate::pipeline::{FixtureTransport, ImageInput, Pipeline, Recorder};
pub use rubric::{applicable_attributes, AttributePath, RUBRIC_VERSION};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mismatch {
    pub attribute: AttributePath,
    pub expected: Value,
    /// `null` when the generated document lacks the attribute.
    pub actual: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseReport {
    pub name: String,
    pub matched: usize,
    pub mismatched: usize,
    pub total: usize,
    pub mismatches: Vec<Mismatch>,
}

impl CaseReport {
    pub fn from_counts(name: impl Into<String>, matched: usize, mismatched: usize) -> Self {
        CaseReport { name: name.into(), matched, mismatched, total: matched + mismatched, mismatches: Vec::new() }
    }

    /// Percent; `None` when nothing was scored.
    pub fn accuracy(&self) -> Option<f64> {
        (self.total > 0).then(|| 100.0 * self.matched as f64 / self.total as f64)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AccuracyReport {
    pub cases: Vec<CaseReport>,
}

impl AccuracyReport {
    pub fn overall(&self) -> CaseReport {
        let matched = self.cases.iter().map(|c| c.matched).sum();
        let mismatched = self.cases.iter().map(|c| c.mismatched).sum();
        CaseReport::from_counts("Overall", matched, mismatched)
    }

    fn pct(c: &CaseReport) -> String {
        c.accuracy().map_or_else(|| "-".to_string(), |a| format!("{a:.1}"))
    }

    /// Human table: `name  Acc. (%)  Match  Mismatch  Total`.
    pub fn to_table(&self) -> String {
        let width = self.cases.iter().map(|c| c.name.len()).chain([7]).max().unwrap_or(7);
        let mut s = String::new();
        let _ = writeln!(s, "{:<width$}  {:>8}  {:>5}  {:>8}  {:>5}", "case", "Acc. (%)", "Match", "Mismatch", "Total");
        for c in self.cases.iter().chain([&self.overall()]) {
            let _ = writeln!(s, "{:<width$}  {:>8}  {:>5}  {:>8}  {:>5}", c.name, Self::pct(c), c.matched, c.mismatched, c.total);
        }
        s
    }

    /// One row per case plus an `Overall` row.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["case", "accuracy", "match", "mismatch", "total"]).expect("in-memory csv");
        for c in self.cases.iter().chain([&self.overall()]) {
            w.write_record([c.name.clone(), Self::pct(c), c.matched.to_string(), c.mismatched.to_string(), c.total.to_string()])
                .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
    }

    pub fn to_json(&self) -> String {
        let v = serde_json::json!({
            "rubric_version": RUBRIC_VERSION,
            "cases": self.cases,
            "overall": self.overall(),
        });
        let mut s = serde_json::to_string_pretty(&v).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// Numbers compare by value, so `6` equals `6.0`.
fn same(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => x.as_f64() == y.as_f64(),
        (Value::Array(x), Value::Array(y)) => x.len() == y.len() && x.iter().zip(y).all(|(p, q)| same(p, q)),
        (Value::Object(x), Value::Object(y)) => {
            x.len() == y.len() && x.iter().all(|(k, v)| y.get(k).is_some_and(|w| same(v, w)))
        }
        _ => a == b,
    }
}

fn find_node<'a>(node: &'a Value, id: &str) -> Option<&'a Value> {
    if node.get("container_id").and_then(Value::as_str) == Some(id) {
        return Some(node);
    }
    node.get("components")?.as_array()?.iter().find_map(|c| find_node(c, id))
}

fn dig<'a>(mut v: &'a Value, path: &str) -> Option<&'a Value> {
    for part in path.split('.') {
        v = v.get(part)?;
    }
    Some(v)
}

/// Reads an attribute. Compound attributes keep only their scored keys;
/// style encodings keep `scale` plus the payload key of `payload_for`.
fn extract(doc: &Value, a: &AttributePath, payload_for: Option<&str>) -> Option<Value> {
    let id = a.container.to_string();
    let base = if a.on_node() {
        find_node(doc, &id)?
    } else {
        doc.get("data_specification")?.get(&id)?
    };
    let v = dig(base, &a.path)?;
    let pick = |keys: &[&str]| -> Value {
        let mut m = Map::new();
        for k in keys {
            if let Some(x) = v.get(*k) {
                m.insert((*k).to_string(), x.clone());
            }
        }
        Value::Object(m)
    };
    if a.path.starts_with("data_structure.data_size.") {
        return Some(pick(&["number", "dimension"]));
    }
    if a.path.starts_with("non_layout_specification.") && v.is_object() {
        return Some(pick(&["scale", payload_for.unwrap_or("fix")]));
    }
    Some(v.clone())
}

fn payload_of(enc: &Value) -> Option<&'static str> {
    match enc.get("scale")?.as_str()? {
        "fix" => Some("fix"),
        "linear" => Some("linear"),
        _ => Some("options"),
    }
}

/// Exact comparison of every applicable attribute; containers are matched
/// by id and anything missing from `generated` is a mismatch.
pub fn score(name: &str, gt: &DslDocument, generated: &DslDocument) -> CaseReport {
    let g = to_value(gt);
    let d = to_value(generated);
    let mut report = CaseReport::from_counts(name, 0, 0);
    for a in applicable_attributes(gt) {
        let gt_raw = extract(&g, &a, None);
        let payload = gt_raw.as_ref().and_then(|v| if a.path.starts_with("non_layout_specification.") { payload_of(v) } else { None });
        let expected = extract(&g, &a, payload).unwrap_or_else(|| panic!("{a} does not resolve in the ground truth"));
        let actual = extract(&d, &a, payload);
        report.total += 1;
        match actual {
            Some(v) if same(&expected, &v) => report.matched += 1,
            other => {
                report.mismatched += 1;
                report.mismatches.push(Mismatch { attribute: a, expected, actual: other.unwrap_or(Value::Null) });
            }
        }
    }
    report
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GalleryError {
    #[error("{0}: {1}")]
    Io(PathBuf, String),
    #[error("case `{case}`: {reason}")]
    Case { case: String, reason: String },
}

fn load_doc(case: &str, path: &Path) -> Result<DslDocument, GalleryError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| GalleryError::Case { case: case.into(), reason: format!("{}: {e}", path.display()) })?;
    parse_document(&text).map_err(|e| GalleryError::Case { case: case.into(), reason: format!("{}: {e}", path.display()) })
}

/// The generated document of a case: `generated.revis.json`, or a replay of
/// the recorded pipeline responses in the case folder.
fn generated_doc(case: &str, dir: &Path) -> Result<DslDocument, GalleryError> {
    let path = dir.join("generated.revis.json");
    if path.exists() || !dir.join("step1.txt").exists() {
        return load_doc(case, &path);
    }
    let err = |reason: String| GalleryError::Case { case: case.into(), reason };
    let bytes = std::fs::read(dir.join("image.png")).map_err(|e| err(format!("image.png: {e}")))?;
    let image = ImageInput::from_bytes(bytes).map_err(|e| err(e.to_string()))?;
    let transport = FixtureTransport::new(dir);
    let rec = Recorder::new(case, None);
    Pipeline::new(&transport, 1).run(&image, &rec).map_err(|e| err(e.to_string()))
}

/// Scores every `cases/<name>/` folder holding `ground_truth.revis.json`.
/// Cases are scored in parallel and reported in name order.
pub fn run_gallery(dir: &Path) -> Result<AccuracyReport, GalleryError> {
    let entries = std::fs::read_dir(dir).map_err(|e| GalleryError::Io(dir.to_path_buf(), e.to_string()))?;
    let mut cases: Vec<(String, PathBuf)> = Vec::new();
    for e in entries {
        let e = e.map_err(|e| GalleryError::Io(dir.to_path_buf(), e.to_string()))?;
        if e.path().is_dir() {
            cases.push((e.file_name().to_string_lossy().into_owned(), e.path()));
        }
    }
    cases.sort();
    let reports: Vec<Result<CaseReport, GalleryError>> = cases
        .par_iter()
        .map(|(name, path)| {
            let gt = load_doc(name, &path.join("ground_truth.revis.json"))?;
            let generated = generated_doc(name, path)?;
            Ok(score(name, &gt, &generated))
        })
        .collect();
    Ok(AccuracyReport { cases: reports.into_iter().collect::<Result<_, _>>()? })
}
