//! Resolution of per-dimension layout rules into extents, and of template
//! containers into instance boxes.
//!
//! All extents live in normalized units `[0, 100]` along one dimension of
//! the owning frame.

use crate::dsl::{
    Anchor, AnchorDistribute, CoordinateFrame, CoordinateKind, DataSpecification, DataStructure, DataType, Dimension,
    LayoutDimensionSpec, LayoutSpecification, StackDirection,
};
use crate::error::LayoutError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extent {
    pub start: f64,
    pub end: f64,
}

impl Extent {
    pub const FULL: Extent = Extent { start: 0.0, end: 100.0 };

    pub fn new(start: f64, end: f64) -> Self {
        Extent { start, end }
    }

    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn center(&self) -> f64 {
        (self.start + self.end) / 2.0
    }

    /// Maps `inner`, given in `[0, 100]`, into this extent.
    pub fn nest(&self, inner: Extent) -> Extent {
        let k = self.len() / 100.0;
        Extent { start: self.start + inner.start * k, end: self.start + inner.end * k }
    }
}

/// Per-element data values in `[0, 1]` that drive data-decided sizes and
/// flexible positions along one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementValues {
    pub sizes: Vec<f64>,
    pub positions: Vec<f64>,
}

impl ElementValues {
    /// The same values drive sizes and positions.
    pub fn uniform(values: Vec<f64>) -> Self {
        ElementValues { positions: values.clone(), sizes: values }
    }

    pub fn new(sizes: Vec<f64>, positions: Vec<f64>) -> Self {
        ElementValues { sizes, positions }
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }
}

fn check_spec(spec: &LayoutDimensionSpec) -> Result<(), LayoutError> {
    let [lo, hi] = spec.size_range;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(LayoutError::InvalidSpec(format!("size_range [{lo}, {hi}] is not an ordered pair")));
    }
    if spec.stacking {
        return Ok(());
    }
    let start_needed = matches!(spec.anchor_distribute, AnchorDistribute::FixedValue | AnchorDistribute::UniformInterval);
    if start_needed && !spec.anchor_start.is_some_and(f64::is_finite) {
        return Err(LayoutError::InvalidSpec("anchor_start is required".into()));
    }
    if spec.anchor_distribute == AnchorDistribute::UniformInterval && !spec.anchor_interval.is_some_and(f64::is_finite) {
        return Err(LayoutError::InvalidSpec("anchor_interval is required for uniform_interval".into()));
    }
    Ok(())
}

fn clamp(v: f64) -> f64 {
    v.clamp(0.0, 100.0)
}

/// Resolves `count` elements along one dimension.
///
/// Without stacking every element gets a size from `size_range` and an
/// anchor position from `anchor_distribute`, and is placed around the anchor.
/// With stacking the elements are laid end to end: `subdividing` stacks
/// split the whole axis by value (equally when `size_uniform`), other stacks
/// start at the low end, the high end or are centered on 50.
pub fn resolve_dimension(
    spec: &LayoutDimensionSpec,
    count: usize,
    values: &ElementValues,
) -> Result<Vec<Extent>, LayoutError> {
    if count == 0 {
        return Err(LayoutError::EmptyCount);
    }
    if values.sizes.len() != count || values.positions.len() != count {
        let actual = if values.sizes.len() != count { values.sizes.len() } else { values.positions.len() };
        return Err(LayoutError::CountMismatch { expected: count, actual });
    }
    check_spec(spec)?;
    let [lo, hi] = spec.size_range;
    let size = |v: f64| if spec.size_uniform { lo } else { lo + v * (hi - lo) };

    if spec.stacking && spec.subdividing {
        let weights: Vec<f64> = if spec.size_uniform {
            vec![1.0; count]
        } else {
            values.sizes.iter().map(|v| v.max(0.0)).collect()
        };
        let total: f64 = weights.iter().sum();
        let weights = if total > 0.0 { weights } else { vec![1.0; count] };
        let total: f64 = weights.iter().sum();
        let mut out = Vec::with_capacity(count);
        let mut acc = 0.0;
        let mut start = 0.0;
        for (i, w) in weights.iter().enumerate() {
            acc += w;
            let end = if i + 1 == count { 100.0 } else { 100.0 * acc / total };
            out.push(Extent::new(start, end));
            start = end;
        }
        return Ok(out);
    }

    if spec.stacking {
        let sizes: Vec<f64> = values.sizes.iter().map(|v| size(*v)).collect();
        let total: f64 = sizes.iter().sum();
        let mut out = Vec::with_capacity(count);
        match spec.stacking_direction {
            StackDirection::Max => {
                let mut top = 100.0;
                for s in sizes {
                    out.push(Extent::new(clamp(top - s), clamp(top)));
                    top -= s;
                }
            }
            direction => {
                let mut bottom = if direction == StackDirection::Middle { 50.0 - total / 2.0 } else { 0.0 };
                for s in sizes {
                    out.push(Extent::new(clamp(bottom), clamp(bottom + s)));
                    bottom += s;
                }
            }
        }
        return Ok(out);
    }

    let start = spec.anchor_start.unwrap_or(0.0);
    let interval = spec.anchor_interval.unwrap_or(0.0);
    let out = (0..count)
        .map(|i| {
            let s = size(values.sizes[i]);
            let p = match spec.anchor_distribute {
                AnchorDistribute::FixedValue => start,
                AnchorDistribute::UniformInterval => start + i as f64 * interval,
                AnchorDistribute::Flexible => values.positions[i] * 100.0,
            };
            let (a, b) = match spec.anchor {
                Anchor::Max => (p - s, p),
                Anchor::Middle => (p - s / 2.0, p + s / 2.0),
                Anchor::Min | Anchor::StackingDecided => (p, p + s),
            };
            Extent::new(clamp(a), clamp(b))
        })
        .collect();
    Ok(out)
}

/// The coordinate along `spec`'s dimension where an element's data value
/// ends: the top of a bar growing from its anchor, or of a stack segment.
pub fn value_end(spec: Option<&LayoutDimensionSpec>, e: Extent) -> f64 {
    match spec {
        Some(s) if s.stacking => match s.stacking_direction {
            StackDirection::Max => e.start,
            _ => e.end,
        },
        Some(s) => match s.anchor {
            Anchor::Max => e.start,
            Anchor::Middle => e.center(),
            _ => e.end,
        },
        None => e.center(),
    }
}

/// One data item as seen by the layout: its indices, its value and any
/// per-dimension position values (for flexible anchors).
#[derive(Debug, Clone, PartialEq)]
pub struct DatumInput {
    pub group: usize,
    pub item: usize,
    pub value: f64,
    pub positions: [Option<f64>; 4],
}

impl DatumInput {
    pub fn new(group: usize, item: usize, value: f64) -> Self {
        DatumInput { group, item, value, positions: [None; 4] }
    }

    pub fn position(&self, dim: Dimension) -> f64 {
        self.positions[dim.index()].unwrap_or(self.value)
    }
}

/// Extents of one data item along both dimensions of its frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub group: usize,
    pub item: usize,
    /// Indexed by [`Dimension::index`]; dimensions of the other frame kind
    /// stay at the full range.
    pub extents: [Extent; 4],
}

impl Placement {
    pub fn along(&self, dim: Dimension) -> Extent {
        self.extents[dim.index()]
    }
}

/// Default item inputs for a data structure: every value equal to `value`.
pub fn constant_inputs(ds: &DataStructure, value: f64) -> Vec<DatumInput> {
    let mut out = Vec::new();
    for (g, n) in ds.group_sizes().into_iter().enumerate() {
        for i in 0..n {
            out.push(DatumInput::new(g, i, value));
        }
    }
    out
}

fn lane(spec: &LayoutDimensionSpec, dim: Dimension, items: &[&DatumInput]) -> Result<Vec<Extent>, LayoutError> {
    let values = ElementValues::new(
        items.iter().map(|d| d.value).collect(),
        items.iter().map(|d| d.position(dim)).collect(),
    );
    resolve_dimension(spec, items.len(), &values)
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// One input per group carrying the mean value and position of its items.
fn group_reps(groups: &[Vec<usize>], items: &[DatumInput], dim: Dimension) -> Vec<DatumInput> {
    groups
        .iter()
        .enumerate()
        .map(|(gi, g)| {
            let mut d = DatumInput::new(gi, 0, mean(g.iter().map(|k| items[*k].value)));
            d.positions[dim.index()] = Some(mean(g.iter().map(|k| items[*k].position(dim))));
            d
        })
        .collect()
}

/// Places every data item of a structure along the dimensions of a frame.
///
/// A dimension driven only by the primary size resolves one lane over the
/// groups for each item index (for a 2D_list, whose groups differ in length,
/// a single lane over the group means); one driven only by the secondary size
/// resolves one lane per group over its items. When both sizes share a
/// dimension, groups are resolved first and items are nested inside their
/// group's extent. Dimensions driven by neither resolve each item alone, so
/// that sizes still follow the data. Frame dimensions without a layout
/// entry span the full range.
pub fn resolve_items(
    ds: &DataStructure,
    layout: &LayoutSpecification,
    kind: CoordinateKind,
    items: &[DatumInput],
) -> Result<Vec<Placement>, LayoutError> {
    let sizes = ds.group_sizes();
    let expected: usize = sizes.iter().sum();
    if items.len() != expected {
        return Err(LayoutError::CountMismatch { expected, actual: items.len() });
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); sizes.len()];
    for (k, d) in items.iter().enumerate() {
        match groups.get_mut(d.group) {
            Some(g) => g.push(k),
            None => return Err(LayoutError::InvalidSpec(format!("item refers to missing group {}", d.group))),
        }
    }
    let mut out: Vec<Placement> = items
        .iter()
        .map(|d| Placement { group: d.group, item: d.item, extents: [Extent::FULL; 4] })
        .collect();

    for dim in Dimension::dims_for(kind) {
        let Some(spec) = layout.get(dim) else { continue };
        let is_p = ds.is_primary(dim);
        let is_s = ds.is_secondary(dim);
        match (is_p, is_s) {
            (false, false) => {
                for (k, d) in items.iter().enumerate() {
                    out[k].extents[dim.index()] = lane(spec, dim, &[d])?[0];
                }
            }
            (true, false) if ds.data_type == DataType::List2D => {
                let reps = group_reps(&groups, items, dim);
                let ext = lane(spec, dim, &reps.iter().collect::<Vec<_>>())?;
                for (gi, g) in groups.iter().enumerate() {
                    for k in g {
                        out[*k].extents[dim.index()] = ext[gi];
                    }
                }
            }
            (true, false) => {
                let max_items = sizes.iter().copied().max().unwrap_or(0);
                for i in 0..max_items {
                    let lane_items: Vec<&DatumInput> = groups
                        .iter()
                        .map(|g| {
                            let k = g.iter().copied().find(|k| items[*k].item == i).unwrap_or(g[0]);
                            &items[k]
                        })
                        .collect();
                    let ext = lane(spec, dim, &lane_items)?;
                    for (gi, g) in groups.iter().enumerate() {
                        if let Some(k) = g.iter().copied().find(|k| items[*k].item == i) {
                            out[k].extents[dim.index()] = ext[gi];
                        }
                    }
                }
            }
            (false, true) => {
                for g in &groups {
                    let lane_items: Vec<&DatumInput> = g.iter().map(|k| &items[*k]).collect();
                    let ext = lane(spec, dim, &lane_items)?;
                    for (j, k) in g.iter().enumerate() {
                        out[*k].extents[dim.index()] = ext[j];
                    }
                }
            }
            (true, true) => {
                let reps = group_reps(&groups, items, dim);
                let outer = lane(spec, dim, &reps.iter().collect::<Vec<_>>())?;
                for (gi, g) in groups.iter().enumerate() {
                    let lane_items: Vec<&DatumInput> = g.iter().map(|k| &items[*k]).collect();
                    let inner = lane(spec, dim, &lane_items)?;
                    for (j, k) in g.iter().enumerate() {
                        out[*k].extents[dim.index()] = outer[gi].nest(inner[j]);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Frame of one template instance, in the template container's parent
/// units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceBox {
    pub group: usize,
    pub item: usize,
    pub frame: CoordinateFrame,
}

/// Maps a placement into a frame of the same kind.
pub fn place_in_frame(frame: &CoordinateFrame, p: &Placement) -> CoordinateFrame {
    match frame {
        CoordinateFrame::Cartesian(f) => {
            let x = Extent::new(f.x1, f.x2).nest(p.along(Dimension::X));
            let y = Extent::new(f.y1, f.y2).nest(p.along(Dimension::Y));
            CoordinateFrame::cartesian(x.start, y.start, x.end, y.end)
        }
        CoordinateFrame::Polar(f) => {
            let r = Extent::new(f.r1, f.r2).nest(p.along(Dimension::Radius));
            let a = Extent::new(f.a1, f.a2).nest(p.along(Dimension::Angle));
            CoordinateFrame::polar(f.cx, f.cy, r.start, r.end, a.start, a.end)
        }
    }
}

/// Data dimensions of `ds` that have no entry in `layout`.
pub fn missing_dimensions(ds: &DataStructure, layout: &LayoutSpecification) -> Vec<Dimension> {
    let mut dims: Vec<Dimension> = ds.primary().dimension.dims().to_vec();
    if ds.data_type != DataType::List1D {
        if let Some(s) = ds.secondary() {
            dims.push(s.dimension);
        }
    }
    dims.into_iter().filter(|d| layout.get(*d).is_none()).collect()
}

/// One box per data item of a template specification, each resolved from
/// the layout and mapped into `template_frame`.
pub fn instantiate_template(
    spec: &DataSpecification,
    template_frame: &CoordinateFrame,
    items: &[DatumInput],
) -> Result<Vec<InstanceBox>, LayoutError> {
    if !spec.is_template_spec() {
        return Err(LayoutError::InvalidSpec("template specifications hold only data and layout".into()));
    }
    let ds = &spec.data_structure;
    let layout = &spec.layout_specification;
    let kind = template_frame.kind();
    let mut dims: Vec<Dimension> = ds.primary().dimension.dims().to_vec();
    dims.extend(ds.secondary().map(|s| s.dimension));
    dims.extend(layout.dims().map(|(d, _)| d));
    if dims.iter().any(|d| d.frame_kind() != kind) {
        return Err(LayoutError::FrameMismatch);
    }
    if let Some(d) = missing_dimensions(ds, layout).first() {
        return Err(LayoutError::MissingDimension(d.to_string()));
    }
    let placements = resolve_items(ds, layout, kind, items)?;
    Ok(placements
        .iter()
        .map(|p| InstanceBox { group: p.group, item: p.item, frame: place_in_frame(template_frame, p) })
        .collect())
}
