//! Endpoints of node-link marks.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::{rng_for, table_shape, Seed};
use crate::dsl::{ContainerId, DslDocument, LayoutSpecification, LinkMarkType, MarkSpecification, ScopedId, Segment};
use crate::error::{DataError, IdError};

/// A link endpoint: a template instance (`0-a[3]`) or one mark of a leaf
/// (`0-4[0]`, or `0-a[1]-0[2]` inside a template instance).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinkRef {
    pub scope: ScopedId,
    /// Row index for leaf marks; `None` for template instances.
    pub mark: Option<usize>,
}

impl LinkRef {
    pub fn container(&self) -> &ContainerId {
        &self.scope.id
    }
}

impl fmt::Display for LinkRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.scope)?;
        if let Some(m) = self.mark {
            write!(f, "[{m}]")?;
        }
        Ok(())
    }
}

impl FromStr for LinkRef {
    type Err = IdError;
    fn from_str(s: &str) -> Result<Self, IdError> {
        let last = s.rsplit('-').next().unwrap_or(s);
        let is_mark = last.ends_with(']') && !last.starts_with(|c: char| c.is_ascii_lowercase());
        if is_mark {
            let open = s.rfind('[').ok_or_else(|| IdError::Malformed(s.to_string()))?;
            let mark = s[open + 1..s.len() - 1].parse().map_err(|_| IdError::Malformed(s.to_string()))?;
            let scope = ScopedId::parse(&s[..open])?;
            Ok(LinkRef { scope, mark: Some(mark) })
        } else {
            let scope = ScopedId::parse(s)?;
            if !scope.id.is_template() || scope.instances.len() != template_depth(&scope.id) {
                return Err(IdError::Malformed(s.to_string()));
            }
            Ok(LinkRef { scope, mark: None })
        }
    }
}

fn template_depth(id: &ContainerId) -> usize {
    id.segments().iter().filter(|s| matches!(s, Segment::Template(_))).count()
}

/// Number of instances of a template, or rows of a leaf, per the document.
fn count_of(doc: &DslDocument, id: &ContainerId) -> usize {
    match doc.spec(id) {
        Some(spec) if id.is_template() => spec.data_structure.item_count(),
        Some(spec) => table_shape(spec).1.iter().sum(),
        None => 0,
    }
}

/// Every endpoint a node-link mark may attach to inside container `id`.
pub fn link_universe(doc: &DslDocument, id: &ContainerId) -> Vec<LinkRef> {
    let Some(node) = doc.find(id) else { return Vec::new() };
    if !(node.is_leaf || node.is_template()) {
        return Vec::new();
    }
    let mut scopes: Vec<Vec<usize>> = vec![Vec::new()];
    for t in doc.enclosing_templates(id) {
        let n = count_of(doc, &t);
        scopes = scopes
            .into_iter()
            .flat_map(|s| {
                (0..n).map(move |k| {
                    let mut s = s.clone();
                    s.push(k);
                    s
                })
            })
            .collect();
    }
    let n = count_of(doc, id);
    let mut out = Vec::new();
    for s in scopes {
        for k in 0..n {
            out.push(if node.is_template() {
                let mut inst = s.clone();
                inst.push(k);
                LinkRef { scope: ScopedId { id: id.clone(), instances: inst }, mark: None }
            } else {
                LinkRef { scope: ScopedId { id: id.clone(), instances: s.clone() }, mark: Some(k) }
            });
        }
    }
    out
}

/// Draws `link_number` (source, target) pairs. With distinct source and
/// target containers every pair joins the two sets; with a single container
/// pairs are drawn inside it without self-loops.
pub fn generate_link_assignments(
    mark: &MarkSpecification,
    layout: &LayoutSpecification,
    sources: &[LinkRef],
    targets: &[LinkRef],
    seed: Seed,
) -> Result<Vec<(LinkRef, LinkRef)>, DataError> {
    let n = match (mark.link_mark_type, mark.link_number) {
        (LinkMarkType::NodeLink, Some(n)) => n,
        _ => return Ok(Vec::new()),
    };
    if n == 0 {
        return Ok(Vec::new());
    }
    let single = match (&layout.source, &layout.target) {
        (_, None) => true,
        (Some(s), Some(t)) => s == t,
        (None, Some(_)) => true,
    };
    let targets = if single { sources } else { targets };
    let enough = if single { sources.len() >= 2 } else { !sources.is_empty() && !targets.is_empty() };
    if !enough {
        return Err(DataError::EmptyUniverse(n));
    }
    let mut rng = rng_for(seed);
    let mut out = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let s = rng.random_range(0..sources.len());
        let t = if single {
            let t = rng.random_range(0..sources.len() - 1);
            if t >= s {
                t + 1
            } else {
                t
            }
        } else {
            rng.random_range(0..targets.len())
        };
        out.push((sources[s].clone(), targets[t].clone()));
    }
    Ok(out)
}

/// Fills the `source` and `target` columns of a node-link table where they
/// are missing, drawing endpoints from the containers named in `layout`.
pub fn attach_links(
    doc: &DslDocument,
    mark: &MarkSpecification,
    layout: &LayoutSpecification,
    table: &mut super::MockTable,
    seed: Seed,
) -> Result<(), DataError> {
    if mark.link_mark_type != LinkMarkType::NodeLink {
        return Ok(());
    }
    if table.rows.iter().all(|r| r.extra.contains_key("source") && r.extra.contains_key("target")) {
        return Ok(());
    }
    let universe = |ids: &Option<Vec<ContainerId>>| -> Vec<LinkRef> {
        ids.iter().flatten().flat_map(|id| link_universe(doc, id)).collect()
    };
    let sources = universe(&layout.source);
    let targets = universe(&layout.target);
    let mut counted = mark.clone();
    counted.link_number = Some(table.rows.len() as u32);
    let pairs = generate_link_assignments(&counted, layout, &sources, &targets, seed)?;
    for (row, (s, t)) in table.rows.iter_mut().zip(pairs) {
        row.extra.entry("source".into()).or_insert(crate::dsl::AttrValue::Text(s.to_string()));
        row.extra.entry("target".into()).or_insert(crate::dsl::AttrValue::Text(t.to_string()));
    }
    Ok(())
}
