//! Structural and semantic checks over a parsed document.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::frame::CoordinateFrame;
use super::id::ContainerId;
use super::node::{ContainerNode, DslDocument};
use super::spec::{
    Anchor, AnchorDistribute, AttrValue, DataSpecification, DataType, Dimension, LinkMarkType, MarkType,
    NonLayoutAttribute, Scale, SecondaryNumber, StyleAttr,
};

/// Containment slack for frames expressed in parent units.
const FRAME_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Issue {
    pub severity: Severity,
    pub container: ContainerId,
    pub rule: &'static str,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev} [{}] {}: {}", self.rule, self.container, self.message)
    }
}

/// Validation findings ordered by container id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    /// No error-level entries. Warnings do not make a document dirty.
    pub fn is_clean(&self) -> bool {
        self.errors().next().is_none()
    }

    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Warning)
    }

    pub fn has_rule(&self, rule: &str) -> bool {
        self.issues.iter().any(|i| i.rule == rule)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in &self.issues {
            writeln!(f, "{i}")?;
        }
        Ok(())
    }
}

struct Checker {
    issues: Vec<Issue>,
}

impl Checker {
    fn error(&mut self, id: &ContainerId, rule: &'static str, message: impl Into<String>) {
        self.issues.push(Issue { severity: Severity::Error, container: id.clone(), rule, message: message.into() });
    }

    fn warn(&mut self, id: &ContainerId, rule: &'static str, message: impl Into<String>) {
        self.issues.push(Issue { severity: Severity::Warning, container: id.clone(), rule, message: message.into() });
    }
}

/// Checks every invariant of the container tree and data specifications.
/// Problems are reported, never raised.
pub fn validate(doc: &DslDocument) -> ValidationReport {
    let mut c = Checker { issues: Vec::new() };
    if !doc.root.id.is_root() {
        c.error(&doc.root.id, "id.root", "the root container must have id `0`");
    }
    let mut seen = BTreeSet::new();
    let mut letters: BTreeMap<char, ContainerId> = BTreeMap::new();
    check_node(&mut c, &doc.root, None, &mut seen, &mut letters);

    let nodes: BTreeMap<&ContainerId, &ContainerNode> = doc.containers().into_iter().map(|n| (&n.id, n)).collect();
    for n in doc.containers() {
        if (n.is_leaf || n.is_template()) && !doc.data_specifications.contains_key(&n.id) {
            c.error(&n.id, "spec.missing", "container has no data specification");
        }
    }
    for (id, spec) in &doc.data_specifications {
        match nodes.get(id) {
            None => c.error(id, "spec.orphan", "data specification for a container that does not exist"),
            Some(n) if !(n.is_leaf || n.is_template()) => {
                c.error(id, "spec.orphan", "data specification for a container that is neither a leaf nor a template")
            }
            Some(n) => check_spec(&mut c, n, spec, &nodes),
        }
    }
    c.issues.sort_by(|a, b| a.container.cmp(&b.container));
    ValidationReport { issues: c.issues }
}

fn check_node(
    c: &mut Checker,
    n: &ContainerNode,
    parent: Option<&ContainerNode>,
    seen: &mut BTreeSet<ContainerId>,
    letters: &mut BTreeMap<char, ContainerId>,
) {
    let id = &n.id;
    if !seen.insert(id.clone()) {
        c.error(id, "id.duplicate", "container id is used more than once");
    }
    if let Some(letter) = id.template_letter() {
        match letters.get(&letter) {
            Some(other) if other != id => c.warn(
                id,
                "id.template_letter",
                format!("template letter `{letter}` is also used by `{other}`; distinct patterns should use distinct letters"),
            ),
            _ => {
                letters.insert(letter, id.clone());
            }
        }
    }
    for v in n.frame.violations() {
        c.error(id, "frame.invalid", v);
    }
    if let Some(p) = parent {
        if !p.id.is_parent_of(id) {
            c.error(id, "id.child_prefix", format!("child of `{}` must extend its id by one segment", p.id));
        }
        match (&p.frame, &n.frame) {
            (CoordinateFrame::Polar(_), CoordinateFrame::Cartesian(_)) => c.error(
                id,
                "frame.polar_nesting",
                format!("cartesian container inside polar container `{}`", p.id),
            ),
            (pf, cf) => {
                if pf.is_valid() && cf.is_valid() && !pf.contains(cf, FRAME_TOL) {
                    c.warn(id, "frame.containment", format!("frame extends beyond its parent `{}`", p.id));
                }
            }
        }
    }
    if n.is_leaf {
        if !n.children.is_empty() {
            c.error(id, "node.leaf_children", "leaf container has sub-containers");
        }
        if n.mark_type.is_none() {
            c.error(id, "node.leaf_mark", "leaf container has no mark_type");
        }
        if n.is_template() {
            c.error(id, "node.template_leaf", "template containers must hold sub-containers");
        }
    } else {
        if n.children.is_empty() {
            c.error(id, "node.branch_children", "non-leaf container has no sub-containers");
        }
        if n.mark_type.is_some() {
            c.error(id, "node.branch_mark", "non-leaf container carries a mark_type");
        }
    }
    for child in &n.children {
        check_node(c, child, Some(n), seen, letters);
    }
}

fn check_spec(
    c: &mut Checker,
    n: &ContainerNode,
    spec: &DataSpecification,
    nodes: &BTreeMap<&ContainerId, &ContainerNode>,
) {
    let id = &n.id;
    let kind = n.frame.kind();
    if n.is_template() {
        if spec.mark_specification.is_some() || spec.non_layout_specification.is_some() {
            c.error(id, "spec.template_extra", "template specifications hold only data_structure and layout_specification");
        }
    } else if spec.mark_specification.is_none() {
        c.error(id, "spec.leaf_mark_missing", "leaf specification has no mark_specification");
    }

    let mark = spec.mark_specification.as_ref();
    let mark_type = mark.map(|m| m.mark_type).or(n.mark_type);
    if let (Some(m), Some(t)) = (mark, n.mark_type) {
        if m.mark_type != t {
            c.warn(
                id,
                "spec.mark_type_mismatch",
                format!("specification declares `{}` but the container declares `{}`; the container wins", m.mark_type, t),
            );
        }
    }
    let link = spec.link_type();
    let ds = &spec.data_structure;

    if let Some(m) = mark {
        if (m.link_mark_type == LinkMarkType::NoLink) == m.is_link_mark {
            c.error(id, "mark.link_consistency", "is_link_mark must be false exactly when link_mark_type is no_link");
        }
        if m.link_mark_type != LinkMarkType::NoLink && !m.mark_type.is_path() {
            c.error(id, "mark.link_mark_type", format!("`{}` cannot be a link mark; use line, band or area", m.mark_type));
        }
        match m.link_mark_type {
            LinkMarkType::NodeLink => match m.link_number {
                None => c.error(id, "mark.node_link_number", "node_link marks need link_number"),
                Some(0) => c.warn(id, "mark.node_link_number", "link_number is 0; no links will be drawn"),
                Some(_) => {}
            },
            LinkMarkType::GroupType => {
                match m.group_link_direction {
                    None => c.error(id, "mark.group_direction", "group_type marks need group_link_direction"),
                    Some(d) if d.frame_kind() != kind => c.error(
                        id,
                        "mark.group_direction",
                        format!("group_link_direction `{d}` is not a dimension of a {} frame", kind.as_str()),
                    ),
                    Some(_) => {}
                }
                if ds.data_type == DataType::List1D || ds.secondary().is_none() {
                    c.error(id, "mark.group_needs_2d", "group_type marks need a 2D data structure with a secondary size");
                }
            }
            LinkMarkType::NoLink => {}
        }
    }

    // data structure
    let primary = ds.primary();
    if primary.number == 0 {
        c.error(id, "data.number_zero", "primary.number must be positive");
    }
    for d in primary.dimension.dims() {
        if d.frame_kind() != kind {
            c.error(id, "data.dimension_kind", format!("dimension `{d}` does not belong to a {} frame", kind.as_str()));
        }
    }
    match (ds.data_type, ds.secondary()) {
        (DataType::List1D, Some(_)) => c.error(id, "data.list1d_secondary", "1D_list structures have no secondary size"),
        (DataType::List1D, None) => {}
        (_, None) => c.error(id, "data.secondary_missing", "2D structures need a secondary size"),
        (dt, Some(sec)) => {
            if primary.dimension.dims().len() != 1 {
                c.error(id, "data.primary_pair", "a pair of primary dimensions is only allowed for 1D_list");
            }
            if sec.dimension.frame_kind() != kind {
                c.error(
                    id,
                    "data.dimension_kind",
                    format!("dimension `{}` does not belong to a {} frame", sec.dimension, kind.as_str()),
                );
            }
            match (dt, &sec.number) {
                (DataType::Matrix2D, SecondaryNumber::Scalar(0)) => {
                    c.error(id, "data.number_zero", "secondary.number must be positive")
                }
                (DataType::Matrix2D, SecondaryNumber::Scalar(_)) => {}
                (DataType::Matrix2D, SecondaryNumber::PerGroup(_)) => {
                    c.error(id, "data.matrix_scalar", "2D_matrix needs a scalar secondary.number")
                }
                (_, SecondaryNumber::Scalar(_)) => {
                    c.error(id, "data.list_array", "2D_list needs an array secondary.number")
                }
                (_, SecondaryNumber::PerGroup(v)) => {
                    if v.len() != primary.number as usize {
                        c.error(
                            id,
                            "data.list_length",
                            format!("secondary.number has {} entries but primary.number is {}", v.len(), primary.number),
                        );
                    }
                    if v.contains(&0) {
                        c.error(id, "data.list_entry", "every group needs at least one item");
                    }
                }
            }
        }
    }

    // layout
    let layout = &spec.layout_specification;
    for (d, dim) in layout.dims() {
        if d.frame_kind() != kind {
            c.error(id, "layout.dimension_kind", format!("layout dimension `{d}` does not belong to a {} frame", kind.as_str()));
        }
        let [lo, hi] = dim.size_range;
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi && hi <= 100.0) {
            c.error(id, "layout.size_range", format!("{d}: size_range must satisfy 0 <= min <= max <= 100"));
        }
        if dim.size_uniform && lo != hi {
            c.error(id, "layout.size_uniform", format!("{d}: size_uniform requires equal size_range bounds"));
        }
        if dim.stacking && dim.anchor != Anchor::StackingDecided {
            c.error(id, "layout.stacking_anchor", format!("{d}: stacked elements must use anchor stacking_decided"));
        }
        if !dim.stacking && dim.anchor == Anchor::StackingDecided {
            c.warn(id, "layout.anchor_without_stacking", format!("{d}: anchor stacking_decided without stacking is placed as min"));
        }
        if let Some(s) = dim.anchor_start {
            if !(0.0..=100.0).contains(&s) {
                c.error(id, "layout.anchor_range", format!("{d}: anchor_start must lie in [0, 100]"));
            }
        }
        if let Some(i) = dim.anchor_interval {
            if !(i.is_finite() && i >= 0.0) {
                c.error(id, "layout.anchor_range", format!("{d}: anchor_interval must be non-negative"));
            }
        }
        if dim.stacking {
            continue;
        }
        match dim.anchor_distribute {
            AnchorDistribute::FixedValue if dim.anchor_start.is_none() => {
                c.error(id, "layout.uniform_interval_fields", format!("{d}: fixed_value needs anchor_start"))
            }
            AnchorDistribute::UniformInterval => match (dim.anchor_start, dim.anchor_interval) {
                (Some(s), Some(i)) => {
                    let n = ds.elements_along(d);
                    if s + n as f64 * i > 100.0 + FRAME_TOL {
                        c.error(
                            id,
                            "layout.uniform_interval_bound",
                            format!("{d}: anchor_start + n * anchor_interval = {s} + {n} * {i} exceeds 100"),
                        );
                    }
                }
                _ => c.error(
                    id,
                    "layout.uniform_interval_fields",
                    format!("{d}: uniform_interval needs anchor_start and anchor_interval"),
                ),
            },
            _ => {}
        }
    }
    if link != LinkMarkType::NodeLink {
        let mut data_dims: Vec<Dimension> = primary.dimension.dims().to_vec();
        if let (false, Some(sec)) = (ds.data_type == DataType::List1D, ds.secondary()) {
            data_dims.push(sec.dimension);
        }
        for d in data_dims {
            if d.frame_kind() == kind && layout.get(d).is_none() {
                c.error(id, "layout.missing_dimension", format!("data structure uses `{d}` but the layout has no entry for it"));
            }
        }
    }
    let endpoints = [("source", &layout.source), ("target", &layout.target)];
    if link == LinkMarkType::NodeLink {
        if layout.source.as_ref().is_none_or(|v| v.is_empty()) {
            c.error(id, "layout.link_endpoints", "node_link marks need a non-empty source list");
        }
        for (name, refs) in endpoints {
            for r in refs.iter().flatten() {
                match nodes.get(r) {
                    Some(t) if t.is_leaf || t.is_template() => {
                        if &t.id == id {
                            c.error(id, "layout.link_endpoints", format!("{name} `{r}` refers to the link container itself"));
                        }
                    }
                    Some(_) => c.error(id, "layout.link_endpoints", format!("{name} `{r}` is neither a leaf nor a template")),
                    None => c.error(id, "layout.link_endpoints", format!("{name} `{r}` does not exist")),
                }
            }
        }
    } else {
        for (name, refs) in endpoints {
            if refs.is_some() {
                c.error(id, "layout.link_endpoints", format!("{name} is only allowed for node_link marks"));
            }
        }
    }

    // styles
    if let Some(style) = &spec.non_layout_specification {
        if style.line_type.is_some() && !mark_type.is_some_and(MarkType::is_path) {
            c.error(id, "style.line_type_mark", "line_type applies only to line, band and area marks");
        }
        for (attr, enc) in style.attrs() {
            if matches!(attr, StyleAttr::Rx | StyleAttr::Ry) && mark_type != Some(MarkType::Rectangle) {
                c.error(id, "style.corner_mark", format!("{} applies only to rectangle marks", attr.as_str()));
            }
            check_attr(c, id, attr, enc);
        }
    }
}

fn is_hex_color(s: &str) -> bool {
    s.len() == 7 && s.starts_with('#') && s[1..].chars().all(|ch| ch.is_ascii_hexdigit())
}

fn check_attr(c: &mut Checker, id: &ContainerId, attr: StyleAttr, enc: &NonLayoutAttribute) {
    let name = attr.as_str();
    let payload_ok = match enc.scale {
        Scale::Fix => enc.fix.is_some() && enc.linear.is_none() && enc.options.is_none(),
        Scale::Linear => enc.linear.is_some() && enc.fix.is_none() && enc.options.is_none(),
        _ => enc.options.is_some() && enc.fix.is_none() && enc.linear.is_none(),
    };
    if !payload_ok {
        c.error(id, "style.payload", format!("{name}: exactly the payload of the chosen scale must be present"));
    }
    if enc.options.as_ref().is_some_and(|o| o.is_empty()) {
        c.error(id, "style.options_empty", format!("{name}: options must not be empty"));
    }
    let values = enc.fix.iter().chain(enc.linear.iter().flatten()).chain(enc.options.iter().flatten());
    for v in values {
        match (attr.is_color(), v) {
            (true, AttrValue::Text(s)) if is_hex_color(s) => {}
            (true, _) => c.error(id, "style.color", format!("{name}: `{v}` is not a #RRGGBB color")),
            (false, AttrValue::Number(x)) => {
                let ok = match attr {
                    StyleAttr::Opacity => (0.0..=1.0).contains(x),
                    _ => x.is_finite() && *x >= 0.0,
                };
                if !ok {
                    let range = if attr == StyleAttr::Opacity { "in [0, 1]" } else { "non-negative" };
                    c.error(id, "style.range", format!("{name}: {x} must be {range}"));
                }
            }
            (false, AttrValue::Text(_)) => c.error(id, "style.numeric", format!("{name}: `{v}` is not a number")),
        }
    }
}
