//! The container tree and the document that owns it.

use std::collections::BTreeMap;

use super::frame::CoordinateFrame;
use super::id::ContainerId;
use super::spec::{DataSpecification, MarkType};
use crate::error::EditError;

/// One container: either a leaf holding a single mark type or a branch
/// holding sub-containers.
#[derive(Debug, Clone, PartialEq)]
pub struct ContainerNode {
    pub id: ContainerId,
    pub description: String,
    pub frame: CoordinateFrame,
    pub is_leaf: bool,
    pub mark_type: Option<MarkType>,
    pub children: Vec<ContainerNode>,
}

impl ContainerNode {
    pub fn leaf(id: ContainerId, frame: CoordinateFrame, mark_type: MarkType) -> Self {
        ContainerNode {
            id,
            description: String::new(),
            frame,
            is_leaf: true,
            mark_type: Some(mark_type),
            children: Vec::new(),
        }
    }

    pub fn branch(id: ContainerId, frame: CoordinateFrame, children: Vec<ContainerNode>) -> Self {
        ContainerNode { id, description: String::new(), frame, is_leaf: false, mark_type: None, children }
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = description.into();
        self
    }

    pub fn is_template(&self) -> bool {
        self.id.is_template()
    }

    pub fn find(&self, id: &ContainerId) -> Option<&ContainerNode> {
        if &self.id == id {
            return Some(self);
        }
        if !self.id.contains(id) {
            return None;
        }
        self.children.iter().find_map(|c| c.find(id))
    }

    pub fn find_mut(&mut self, id: &ContainerId) -> Option<&mut ContainerNode> {
        if &self.id == id {
            return Some(self);
        }
        if !self.id.contains(id) {
            return None;
        }
        self.children.iter_mut().find_map(|c| c.find_mut(id))
    }

    /// Pre-order traversal: parents before children, children in order.
    pub fn preorder(&self) -> Vec<&ContainerNode> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(n.children.iter().rev());
        }
        out
    }

    /// Rewrites every id in the subtree from prefix `from` to prefix `to`.
    pub(crate) fn rebase(&mut self, from: &ContainerId, to: &ContainerId) {
        if let Some(id) = self.id.rebase(from, to) {
            self.id = id;
        }
        for c in &mut self.children {
            c.rebase(from, to);
        }
    }
}

/// A container tree plus the data specifications of its leaf and template
/// containers.
#[derive(Debug, Clone, PartialEq)]
pub struct DslDocument {
    pub root: ContainerNode,
    pub data_specifications: BTreeMap<ContainerId, DataSpecification>,
}

impl DslDocument {
    pub fn new(root: ContainerNode) -> Self {
        DslDocument { root, data_specifications: BTreeMap::new() }
    }

    pub fn with_spec(mut self, id: &str, spec: DataSpecification) -> Self {
        let id = ContainerId::parse(id).expect("valid container id");
        self.data_specifications.insert(id, spec);
        self
    }

    pub fn find(&self, id: &ContainerId) -> Option<&ContainerNode> {
        self.root.find(id)
    }

    pub fn spec(&self, id: &ContainerId) -> Option<&DataSpecification> {
        self.data_specifications.get(id)
    }

    pub fn containers(&self) -> Vec<&ContainerNode> {
        self.root.preorder()
    }

    pub fn leaves(&self) -> Vec<&ContainerNode> {
        self.containers().into_iter().filter(|n| n.is_leaf).collect()
    }

    pub fn templates(&self) -> Vec<&ContainerNode> {
        self.containers().into_iter().filter(|n| n.is_template()).collect()
    }

    /// Ids that require a data specification: every leaf and every template.
    pub fn spec_owner_ids(&self) -> Vec<ContainerId> {
        self.containers()
            .into_iter()
            .filter(|n| n.is_leaf || n.is_template())
            .map(|n| n.id.clone())
            .collect()
    }

    /// The template containers enclosing `id`, outermost first.
    pub fn enclosing_templates(&self, id: &ContainerId) -> Vec<ContainerId> {
        id.ancestors().filter(|a| a.is_template()).collect()
    }
}

/// Looks up a container by id.
pub fn find_container<'a>(doc: &'a DslDocument, id: &ContainerId) -> Result<&'a ContainerNode, EditError> {
    doc.find(id).ok_or_else(|| EditError::NotFound(id.clone()))
}
