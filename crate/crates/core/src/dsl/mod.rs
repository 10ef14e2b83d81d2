//! The container DSL: identifiers, frames, data specifications, the JSON
//! codec, validation and structural edits.

mod codec;
mod edit;
mod frame;
mod id;
mod node;
pub(crate) mod num;
mod spec;
mod validate;

pub use codec::{
    canonicalize, document_from_value, frame_from_value, node_from_value, node_to_value, parse_document, serialize, spec_from_value, to_value,
};
pub use edit::{
    add_subcontainer, duplicate_container, edit_frame, next_child_id, remove_container, replace_spec, set_description,
    set_spec_field,
};
pub use frame::{CartesianFrame, CoordinateFrame, CoordinateKind, PolarFrame};
pub use id::{ContainerId, ScopedId, Segment};
pub use node::{find_container, ContainerNode, DslDocument};
pub use spec::*;
pub use validate::{validate, Issue, Severity, ValidationReport};
