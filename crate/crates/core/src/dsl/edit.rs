//! Structural edits. Every edit returns a new document and leaves the input
//! untouched.

use serde_json::Value;

use super::codec::spec_from_value;
use super::frame::{CoordinateFrame, CoordinateKind};
use super::id::{ContainerId, Segment};
use super::node::{ContainerNode, DslDocument};
use super::spec::DataSpecification;
use crate::error::EditError;

fn check_frame(frame: &CoordinateFrame) -> Result<(), EditError> {
    let v = frame.violations();
    if v.is_empty() {
        Ok(())
    } else {
        Err(EditError::InvalidFrame(v.join("; ")))
    }
}

/// Rejects `frame` for `node` when it would put a cartesian frame inside a
/// polar one, either under `parent` or above the node's own children.
fn check_nesting(
    node: &ContainerNode,
    frame: &CoordinateFrame,
    parent: Option<&ContainerNode>,
) -> Result<(), EditError> {
    if frame.kind() == CoordinateKind::Cartesian && parent.is_some_and(|p| p.frame.is_polar()) {
        return Err(EditError::PolarNesting(node.id.clone()));
    }
    if frame.is_polar() && node.children.iter().any(|c| !c.frame.is_polar()) {
        return Err(EditError::PolarNesting(node.id.clone()));
    }
    Ok(())
}

fn parent_of<'a>(doc: &'a DslDocument, id: &ContainerId) -> Option<&'a ContainerNode> {
    id.parent().and_then(|p| doc.find(&p))
}

/// Replaces the frame of one container. Children keep their frames: they
/// are positioned relative to this container and follow it.
pub fn edit_frame(doc: &DslDocument, id: &ContainerId, frame: CoordinateFrame) -> Result<DslDocument, EditError> {
    let node = doc.find(id).ok_or_else(|| EditError::NotFound(id.clone()))?;
    check_frame(&frame)?;
    let parent = parent_of(doc, id);
    if frame.kind() != node.frame.kind() && !parent.is_some_and(|p| !p.frame.is_polar()) {
        return Err(EditError::KindChange(id.clone()));
    }
    check_nesting(node, &frame, parent)?;
    let mut out = doc.clone();
    out.root.find_mut(id).expect("node exists").frame = frame;
    Ok(out)
}

pub fn set_description(doc: &DslDocument, id: &ContainerId, description: &str) -> Result<DslDocument, EditError> {
    let mut out = doc.clone();
    let node = out.root.find_mut(id).ok_or_else(|| EditError::NotFound(id.clone()))?;
    node.description = description.to_string();
    Ok(out)
}

/// The smallest unused sibling segment under `parent`: an integer for
/// concrete containers, a letter for templates.
pub fn next_child_id(parent: &ContainerNode, template: bool) -> ContainerId {
    let used: Vec<&Segment> = parent.children.iter().map(|c| c.id.last()).collect();
    let seg = if template {
        let letter = ('a'..='z')
            .find(|l| !used.contains(&&Segment::Template(*l)))
            .expect("fewer than 26 templates under one parent");
        Segment::Template(letter)
    } else {
        let n = (0u32..).find(|i| !used.contains(&&Segment::Index(*i))).expect("free index");
        Segment::Index(n)
    };
    parent.id.child(seg)
}

fn remap_refs(spec: &mut DataSpecification, from: &ContainerId, to: &ContainerId) {
    let layout = &mut spec.layout_specification;
    for refs in [&mut layout.source, &mut layout.target].into_iter().flatten() {
        for r in refs.iter_mut() {
            if let Some(n) = r.rebase(from, to) {
                *r = n;
            }
        }
    }
}

/// Deep-copies the subtree at `id` into a fresh sibling and gives the copy
/// `frame`. Specifications inside the subtree are copied under the new ids,
/// and link endpoints pointing into the subtree follow the copy.
pub fn duplicate_container(
    doc: &DslDocument,
    id: &ContainerId,
    frame: CoordinateFrame,
) -> Result<(DslDocument, ContainerId), EditError> {
    if id.is_root() {
        return Err(EditError::Root("duplicated"));
    }
    let node = doc.find(id).ok_or_else(|| EditError::NotFound(id.clone()))?;
    check_frame(&frame)?;
    if frame.kind() != node.frame.kind() {
        return Err(EditError::KindChange(id.clone()));
    }
    let parent = parent_of(doc, id).expect("non-root nodes have a parent");
    check_nesting(node, &frame, Some(parent))?;
    let new_id = next_child_id(parent, id.is_template());

    let mut copy = node.clone();
    copy.rebase(id, &new_id);
    copy.frame = frame;
    let mut out = doc.clone();
    let index = parent.children.iter().position(|c| &c.id == id).expect("child present");
    let parent_mut = out.root.find_mut(&parent.id).expect("parent exists");
    parent_mut.children.insert(index + 1, copy);

    let copied: Vec<(ContainerId, DataSpecification)> = doc
        .data_specifications
        .iter()
        .filter(|(k, _)| id.contains(k))
        .map(|(k, s)| {
            let mut s = s.clone();
            remap_refs(&mut s, id, &new_id);
            (k.rebase(id, &new_id).expect("key inside subtree"), s)
        })
        .collect();
    out.data_specifications.extend(copied);
    Ok((out, new_id))
}

/// Removes the subtree at `id` together with its specifications. Link
/// endpoints that pointed into the subtree are dropped.
pub fn remove_container(doc: &DslDocument, id: &ContainerId) -> Result<DslDocument, EditError> {
    if id.is_root() {
        return Err(EditError::Root("removed"));
    }
    doc.find(id).ok_or_else(|| EditError::NotFound(id.clone()))?;
    let parent = parent_of(doc, id).expect("non-root nodes have a parent");
    if parent.children.len() == 1 {
        return Err(EditError::OnlyChild(id.clone()));
    }
    let mut out = doc.clone();
    out.root.find_mut(&parent.id).expect("parent exists").children.retain(|c| &c.id != id);
    out.data_specifications.retain(|k, _| !id.contains(k));
    for spec in out.data_specifications.values_mut() {
        let layout = &mut spec.layout_specification;
        for refs in [&mut layout.source, &mut layout.target].into_iter().flatten() {
            refs.retain(|r| !id.contains(r));
        }
    }
    Ok(out)
}

/// Inserts `node` as a direct child of `parent_id`, optionally with a
/// specification for it.
pub fn add_subcontainer(
    doc: &DslDocument,
    parent_id: &ContainerId,
    node: ContainerNode,
    spec: Option<DataSpecification>,
) -> Result<DslDocument, EditError> {
    let parent = doc.find(parent_id).ok_or_else(|| EditError::NotFound(parent_id.clone()))?;
    if parent.is_leaf {
        return Err(EditError::LeafParent(parent_id.clone()));
    }
    if !parent_id.is_parent_of(&node.id) {
        return Err(EditError::NotAChild { parent: parent_id.clone(), child: node.id.clone() });
    }
    if doc.find(&node.id).is_some() {
        return Err(EditError::Duplicate(node.id.clone()));
    }
    check_frame(&node.frame)?;
    check_nesting(&node, &node.frame, Some(parent))?;
    let mut out = doc.clone();
    let id = node.id.clone();
    let p = out.root.find_mut(parent_id).expect("parent exists");
    p.children.push(node);
    p.children.sort_by(|a, b| a.id.cmp(&b.id));
    if let Some(spec) = spec {
        out.data_specifications.insert(id, spec);
    }
    Ok(out)
}

/// Replaces (or installs) the specification of one container.
pub fn replace_spec(doc: &DslDocument, id: &ContainerId, spec: DataSpecification) -> Result<DslDocument, EditError> {
    doc.find(id).ok_or_else(|| EditError::NotFound(id.clone()))?;
    let mut out = doc.clone();
    out.data_specifications.insert(id.clone(), spec);
    Ok(out)
}

/// Sets one field of a specification addressed by a dotted path such as
/// `layout_specification.x.stacking`. `null` removes the field.
pub fn set_spec_field(doc: &DslDocument, id: &ContainerId, path: &str, value: Value) -> Result<DslDocument, EditError> {
    doc.find(id).ok_or_else(|| EditError::NotFound(id.clone()))?;
    let spec = doc.spec(id).ok_or_else(|| EditError::NoSpec(id.clone()))?;
    let mut tree = serde_json::to_value(spec).expect("specifications serialize");
    let keys: Vec<&str> = path.split('.').filter(|k| !k.is_empty()).collect();
    let (last, parents) = keys.split_last().ok_or_else(|| EditError::InvalidSpec("empty field path".into()))?;
    let mut cursor = &mut tree;
    for k in parents {
        let obj = cursor
            .as_object_mut()
            .ok_or_else(|| EditError::InvalidSpec(format!("`{k}` is not inside an object")))?;
        cursor = obj.entry(k.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    let obj = cursor
        .as_object_mut()
        .ok_or_else(|| EditError::InvalidSpec(format!("cannot set `{path}`")))?;
    if value.is_null() {
        obj.remove(*last);
    } else {
        obj.insert(last.to_string(), value);
    }
    let spec = spec_from_value(tree).map_err(|e| EditError::InvalidSpec(e.to_string()))?;
    replace_spec(doc, id, spec)
}
