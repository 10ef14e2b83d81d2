//! Reading and writing the JSON document format.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::{Map, Value};

use super::frame::{CartesianFrame, CoordinateFrame, CoordinateKind, PolarFrame};
use super::id::ContainerId;
use super::node::{ContainerNode, DslDocument};
use super::num::Num;
use super::spec::{DataSpecification, MarkType};
use crate::error::ParseError;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    container_id: String,
    #[serde(default)]
    description: Option<String>,
    coordinate: CoordinateKind,
    coordinate_system: Map<String, Value>,
    if_leaf: bool,
    #[serde(default)]
    mark_type: Option<MarkType>,
    #[serde(default)]
    components: Option<Vec<RawNode>>,
    #[serde(default)]
    data_specification: Option<BTreeMap<String, DataSpecification>>,
}

const CARTESIAN_KEYS: [&str; 4] = ["x1", "y1", "x2", "y2"];
const POLAR_KEYS: [&str; 6] = ["cx", "cy", "r1", "r2", "a1", "a2"];

fn join(prefix: &str, field: &str) -> String {
    if prefix.is_empty() {
        field.to_string()
    } else {
        format!("{prefix}.{field}")
    }
}

fn typed<T: DeserializeOwned>(value: Value) -> Result<T, ParseError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { String::new() } else { path };
        ParseError::new(path, e.into_inner().to_string())
    })
}

fn read_frame(kind: CoordinateKind, map: &Map<String, Value>, path: &str) -> Result<CoordinateFrame, ParseError> {
    let keys: &[&str] = match kind {
        CoordinateKind::Cartesian => &CARTESIAN_KEYS,
        CoordinateKind::Polar => &POLAR_KEYS,
    };
    for k in map.keys() {
        if !keys.contains(&k.as_str()) {
            return Err(ParseError::new(
                join(path, k),
                format!("unknown field `{k}` for a {} coordinate system, expected one of {}", kind.as_str(), keys.join(", ")),
            ));
        }
    }
    let mut vals = Vec::with_capacity(keys.len());
    for k in keys {
        let v = map
            .get(*k)
            .ok_or_else(|| ParseError::new(path, format!("missing field `{k}`")))?;
        let n = v
            .as_f64()
            .ok_or_else(|| ParseError::new(join(path, k), format!("invalid type: expected a number, found {v}")))?;
        vals.push(n);
    }
    Ok(match kind {
        CoordinateKind::Cartesian => CoordinateFrame::cartesian(vals[0], vals[1], vals[2], vals[3]),
        CoordinateKind::Polar => CoordinateFrame::polar(vals[0], vals[1], vals[2], vals[3], vals[4], vals[5]),
    })
}

fn convert(
    raw: RawNode,
    path: &str,
    parent_kind: Option<CoordinateKind>,
    specs: &mut Option<BTreeMap<ContainerId, DataSpecification>>,
) -> Result<ContainerNode, ParseError> {
    let id = ContainerId::parse(&raw.container_id)
        .map_err(|e| ParseError::new(join(path, "container_id"), e.to_string()))?;
    if parent_kind.is_none() && !id.is_root() {
        return Err(ParseError::new(join(path, "container_id"), format!("the root container must have id `0`, found `{id}`")));
    }
    let frame = read_frame(raw.coordinate, &raw.coordinate_system, &join(path, "coordinate_system"))?;
    if parent_kind == Some(CoordinateKind::Polar) && raw.coordinate == CoordinateKind::Cartesian {
        return Err(ParseError::new(
            join(path, "coordinate"),
            format!("container `{id}` is cartesian but its parent is polar; polar containers may only hold polar sub-containers"),
        ));
    }
    if let Some(map) = raw.data_specification {
        if parent_kind.is_some() {
            return Err(ParseError::new(
                join(path, "data_specification"),
                "data_specification is only allowed on the root container",
            ));
        }
        let mut out = BTreeMap::new();
        for (key, spec) in map {
            let key_id = ContainerId::parse(&key)
                .map_err(|e| ParseError::new(format!("data_specification.{key}"), e.to_string()))?;
            if out.insert(key_id, spec).is_some() {
                return Err(ParseError::new(format!("data_specification.{key}"), "duplicate key"));
            }
        }
        *specs = Some(out);
    }
    let mut children = Vec::new();
    for (i, c) in raw.components.unwrap_or_default().into_iter().enumerate() {
        let child_path = join(path, &format!("components[{i}]"));
        children.push(convert(c, &child_path, Some(raw.coordinate), specs)?);
    }
    Ok(ContainerNode {
        id,
        description: raw.description.unwrap_or_default(),
        frame,
        is_leaf: raw.if_leaf,
        mark_type: raw.mark_type,
        children,
    })
}

/// Builds a document from an already-decoded JSON value.
pub fn document_from_value(value: Value) -> Result<DslDocument, ParseError> {
    let raw: RawNode = typed(value)?;
    let mut specs = None;
    let root = convert(raw, "", None, &mut specs)?;
    Ok(DslDocument { root, data_specifications: specs.unwrap_or_default() })
}

/// Parses the canonical JSON format. Syntax, schema, id syntax and frame
/// nesting problems are errors here; every other rule is checked by
/// [`validate`](super::validate).
pub fn parse_document(text: &str) -> Result<DslDocument, ParseError> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| ParseError::new("", format!("malformed JSON: {e}")))?;
    document_from_value(value)
}

/// Reads a bare `coordinate_system` object, taking the kind from its keys.
pub fn frame_from_value(value: &Value) -> Result<CoordinateFrame, ParseError> {
    let map = value.as_object().ok_or_else(|| ParseError::new("", "a coordinate_system must be an object"))?;
    let kind = if map.contains_key("x1") { CoordinateKind::Cartesian } else { CoordinateKind::Polar };
    read_frame(kind, map, "")
}

/// Reads one container subtree that will sit under a parent of kind
/// `parent_kind`. Specifications are not allowed inside it.
pub fn node_from_value(value: Value, parent_kind: CoordinateKind) -> Result<ContainerNode, ParseError> {
    let raw: RawNode = typed(value)?;
    let mut specs = None;
    convert(raw, "", Some(parent_kind), &mut specs)
}

/// Parses a standalone data specification.
pub fn spec_from_value(value: Value) -> Result<DataSpecification, ParseError> {
    typed(value)
}

impl Serialize for CoordinateFrame {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            CoordinateFrame::Cartesian(CartesianFrame { x1, y1, x2, y2 }) => {
                let mut m = s.serialize_map(Some(4))?;
                for (k, v) in CARTESIAN_KEYS.iter().zip([x1, y1, x2, y2]) {
                    m.serialize_entry(k, &Num(*v))?;
                }
                m.end()
            }
            CoordinateFrame::Polar(PolarFrame { cx, cy, r1, r2, a1, a2 }) => {
                let mut m = s.serialize_map(Some(6))?;
                for (k, v) in POLAR_KEYS.iter().zip([cx, cy, r1, r2, a1, a2]) {
                    m.serialize_entry(k, &Num(*v))?;
                }
                m.end()
            }
        }
    }
}

#[derive(Serialize)]
struct OutNode<'a> {
    container_id: &'a ContainerId,
    description: &'a str,
    coordinate: CoordinateKind,
    coordinate_system: &'a CoordinateFrame,
    if_leaf: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    mark_type: Option<MarkType>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    components: Vec<OutNode<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    data_specification: Option<&'a BTreeMap<ContainerId, DataSpecification>>,
}

fn out_node<'a>(n: &'a ContainerNode) -> OutNode<'a> {
    OutNode {
        container_id: &n.id,
        description: &n.description,
        coordinate: n.frame.kind(),
        coordinate_system: &n.frame,
        if_leaf: n.is_leaf,
        mark_type: n.mark_type,
        components: n.children.iter().map(out_node).collect(),
        data_specification: None,
    }
}

/// Serializes a container subtree without data specifications.
pub fn node_to_value(node: &ContainerNode) -> Value {
    serde_json::to_value(out_node(node)).expect("container trees always serialize")
}

pub fn to_value(doc: &DslDocument) -> Value {
    let mut root = out_node(&doc.root);
    root.data_specification = Some(&doc.data_specifications);
    serde_json::to_value(root).expect("documents always serialize")
}

/// Canonical text: schema key order, two-space indentation, integral
/// numbers without a fractional part, trailing newline.
pub fn serialize(doc: &DslDocument) -> String {
    let mut root = out_node(&doc.root);
    root.data_specification = Some(&doc.data_specifications);
    let mut s = serde_json::to_string_pretty(&root).expect("documents always serialize");
    s.push('\n');
    s
}

/// `serialize(parse_document(text))`.
pub fn canonicalize(text: &str) -> Result<String, ParseError> {
    parse_document(text).map(|d| serialize(&d))
}
