//! A DSL for charts built from nested containers.
//!
//! A [`dsl::DslDocument`] is a tree of containers with cartesian or polar
//! frames. Leaves carry a data specification: what marks they draw, how
//! much data there is and how it is laid out. From there:
//!
//! - [`layout`] turns layout rules into extents and expands templates,
//! - [`datagen`] makes seeded mock data or applies user tables,
//! - [`render`] emits SVG,
//! - [`pipeline`] builds documents from chart images with a multimodal model,
//! - [`eval`] scores a generated document against a ground truth.
//!
//! ```
//! use revis_core::dsl::{parse_document, validate};
//! use revis_core::render::{render_document, Overrides, RenderOptions};
//!
//! let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus/basic/15-donut.revis.json"))?;
//! let doc = parse_document(&text)?;
//! assert!(validate(&doc).is_clean());
//! let svg = render_document(&doc, &RenderOptions::default(), &Overrides::new())?;
//! assert!(svg.contains("data-angles"));
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod datagen;
pub mod dsl;
pub mod error;
pub mod eval;
pub mod layout;
pub mod pipeline;
pub mod render;
