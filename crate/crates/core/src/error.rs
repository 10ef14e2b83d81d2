use thiserror::Error;

use crate::dsl::{ContainerId, ScopedId};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum IdError {
    #[error("malformed container id `{0}`")]
    Malformed(String),
    #[error("container id `{0}` does not start at the root segment `0`")]
    NotRooted(String),
}

/// Failure to read a DSL document.
#[derive(Debug, Clone, Error, PartialEq)]
#[error("{path}: {reason}")]
pub struct ParseError {
    /// Location inside the document, e.g. `components[1].coordinate_system.a1`.
    pub path: String,
    pub reason: String,
}

impl ParseError {
    pub fn new(path: impl Into<String>, reason: impl Into<String>) -> Self {
        ParseError { path: path.into(), reason: reason.into() }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EditError {
    #[error("unknown container `{0}`")]
    NotFound(ContainerId),
    #[error("the root container cannot be {0}")]
    Root(&'static str),
    #[error("container `{0}` is the only child of its parent")]
    OnlyChild(ContainerId),
    #[error("container `{0}` already exists")]
    Duplicate(ContainerId),
    #[error("container `{child}` is not a direct child of `{parent}`")]
    NotAChild { parent: ContainerId, child: ContainerId },
    #[error("container `{0}` is a leaf and cannot hold sub-containers")]
    LeafParent(ContainerId),
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("cartesian frames cannot be placed inside a polar container (`{0}`)")]
    PolarNesting(ContainerId),
    #[error("frame kind of `{0}` cannot change")]
    KindChange(ContainerId),
    #[error("container `{0}` has no data specification")]
    NoSpec(ContainerId),
    #[error("invalid data specification: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LayoutError {
    #[error("element count must be at least 1")]
    EmptyCount,
    #[error("expected {expected} element values, got {actual}")]
    CountMismatch { expected: usize, actual: usize },
    #[error("invalid layout specification: {0}")]
    InvalidSpec(String),
    #[error("data structure uses dimension `{0}` but the layout has no entry for it")]
    MissingDimension(String),
    #[error("template specification has no data structure layout for frame kind")]
    FrameMismatch,
}

/// Failure to read or apply a user data table.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum DataError {
    #[error("malformed table: {0}")]
    Malformed(String),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("table shape does not fit the container: {0}")]
    Shape(String),
    #[error("link reference `{0}` does not resolve to a mark or template instance")]
    UnresolvedRef(String),
    #[error("unknown container `{0}`")]
    NotFound(ContainerId),
    #[error("container `{0}` has no data specification")]
    NoSpec(ContainerId),
    #[error("cannot draw {0} links: no candidate endpoints")]
    EmptyUniverse(u32),
}

/// Failure to turn a document into a scene.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum RenderError {
    #[error("canvas size must be positive, got {0}x{1}")]
    Canvas(f64, f64),
    #[error("container `{0}` has a degenerate frame")]
    DegenerateFrame(ScopedId),
    #[error("container `{0}` uses a cartesian frame inside a polar one")]
    PolarNesting(ContainerId),
    #[error("container `{0}` has no data specification")]
    MissingSpec(ContainerId),
    #[error("layout of `{container}`: {source}")]
    Layout { container: ScopedId, source: LayoutError },
    #[error("data of `{container}`: {source}")]
    Data { container: ScopedId, source: DataError },
    #[error("link of `{container}` points at `{link}`, which is not on the canvas")]
    UnresolvedLink { container: ScopedId, link: String },
    #[error("thread pool: {0}")]
    Threads(String),
}
