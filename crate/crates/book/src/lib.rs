//! The chapters of `book/src`, included so their code blocks run as
//! doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/containers.md")]
pub mod containers {}

#[doc = include_str!("../../../book/src/data-specification.md")]
pub mod data_specification {}

#[doc = include_str!("../../../book/src/layout.md")]
pub mod layout {}

#[doc = include_str!("../../../book/src/data.md")]
pub mod data {}

#[doc = include_str!("../../../book/src/rendering.md")]
pub mod rendering {}

#[doc = include_str!("../../../book/src/pipeline.md")]
pub mod pipeline {}

#[doc = include_str!("../../../book/src/scoring.md")]
pub mod scoring {}

#[doc = include_str!("../../../book/src/service-cli.md")]
pub mod service_cli {}
