//! Which attributes of a ground-truth document are scored.
//!
//! Rubric version 1:
//!
//! | part | attributes | condition |
//! |---|---|---|
//! | frame | `coordinate`, every `coordinate_system` field | non-root containers only; the root frame is the canvas |
//! | mark | `mark_type`, `link_mark_type` | leaves |
//! | mark | `group_link_direction` | `group_type` |
//! | mark | `link_number` | `node_link` |
//! | data | `data_type`, `data_size.primary` | always |
//! | data | `data_size.secondary` | present |
//! | layout, per used dimension | `stacking`, `size_uniform`, `size_range`, `anchor_distribute` | always |
//! | | `subdividing` | stacking |
//! | | `stacking_direction` | stacking and not subdividing |
//! | | `anchor` | not stacking |
//! | | `anchor_start` | `fixed_value` or `uniform_interval` |
//! | | `anchor_interval` | `uniform_interval` |
//! | layout | `source`, `target` | `node_link`, each when present |
//! | style | each encoded attribute: its `scale` with the payload of that scale | present |
//! | style | `line_type` | present |
//!
//! `data_size.primary` and `.secondary` compare `number` and `dimension`
//! together; explanations and descriptions are free text and never scored.
//! `is_link_mark` repeats `link_mark_type` and `2d_flatten` is not scored.

use std::fmt;

use serde::Serialize;

use crate::dsl::{AnchorDistribute, ContainerId, CoordinateFrame, DslDocument, LinkMarkType};

pub const RUBRIC_VERSION: u32 = 1;

/// One scored attribute: a container and a dotted path. Paths starting
/// with `coordinate` address the container node, all others its data
/// specification.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct AttributePath {
    pub container: ContainerId,
    pub path: String,
}

impl fmt::Display for AttributePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.container, self.path)
    }
}

impl AttributePath {
    pub fn on_node(&self) -> bool {
        self.path.starts_with("coordinate")
    }
}

/// The rubric applied to `gt`. Depends on the ground truth only.
pub fn applicable_attributes(gt: &DslDocument) -> Vec<AttributePath> {
    let mut out = Vec::new();
    for n in gt.containers() {
        let mut push = |p: String| out.push(AttributePath { container: n.id.clone(), path: p });
        if !n.id.is_root() {
            push("coordinate".into());
            let keys: &[&str] = match n.frame {
                CoordinateFrame::Cartesian(_) => &["x1", "y1", "x2", "y2"],
                CoordinateFrame::Polar(_) => &["cx", "cy", "r1", "r2", "a1", "a2"],
            };
            for k in keys {
                push(format!("coordinate_system.{k}"));
            }
        }
        let Some(spec) = gt.spec(&n.id) else { continue };
        if let Some(m) = &spec.mark_specification {
            push("mark_specification.mark_type".into());
            push("mark_specification.link_mark_type".into());
            match m.link_mark_type {
                LinkMarkType::GroupType => push("mark_specification.group_link_direction".into()),
                LinkMarkType::NodeLink => push("mark_specification.link_number".into()),
                LinkMarkType::NoLink => {}
            }
        }
        push("data_structure.data_type".into());
        push("data_structure.data_size.primary".into());
        if spec.data_structure.secondary().is_some() {
            push("data_structure.data_size.secondary".into());
        }
        for (dim, l) in spec.layout_specification.dims() {
            let at = |f: &str| format!("layout_specification.{dim}.{f}");
            push(at("stacking"));
            push(at("size_uniform"));
            push(at("size_range"));
            push(at("anchor_distribute"));
            if l.stacking {
                push(at("subdividing"));
                if !l.subdividing {
                    push(at("stacking_direction"));
                }
            } else {
                push(at("anchor"));
            }
            match l.anchor_distribute {
                AnchorDistribute::FixedValue => push(at("anchor_start")),
                AnchorDistribute::UniformInterval => {
                    push(at("anchor_start"));
                    push(at("anchor_interval"));
                }
                AnchorDistribute::Flexible => {}
            }
        }
        if spec.link_type() == LinkMarkType::NodeLink {
            if spec.layout_specification.source.is_some() {
                push("layout_specification.source".into());
            }
            if spec.layout_specification.target.is_some() {
                push("layout_specification.target".into());
            }
        }
        if let Some(style) = &spec.non_layout_specification {
            for (attr, _) in style.attrs() {
                push(format!("non_layout_specification.{}", attr.as_str()));
            }
            if style.line_type.is_some() {
                push("non_layout_specification.line_type".into());
            }
        }
    }
    out
}

