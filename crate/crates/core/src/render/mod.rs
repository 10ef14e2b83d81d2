//! Scene construction: container regions on a pixel canvas, the marks of
//! every leaf, and SVG output.

mod frame;
pub mod geom;
mod svg;

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

pub use frame::{CanvasFrame, Region};
pub use svg::emit_svg;

use crate::datagen::{mock_table, LinkRef, MockDatum, MockTable, Seed};
use crate::dsl::{
    AttrValue, ContainerNode, DataSpecification, Dimension, DslDocument, LineType, LinkMarkType, MarkType,
    ScopedId, StyleAttr,
};
use crate::error::RenderError;
use crate::layout::{instantiate_template, resolve_items, value_end, Placement};
use geom::{monotone_path, polar_point, sample_series, PathCmd, Point};

/// Fill used when a mark has no fill encoding.
pub const DEFAULT_FILL: &str = "#4C78A8";

/// Samples per segment for paths drawn in polar frames.
const POLAR_STEPS: usize = 16;

/// Tables that replace the mock data of some containers. Keys may be scoped
/// to one template instance (`0-a[1]-0`) or cover every instance (`0-a-0`).
pub type Overrides = BTreeMap<ScopedId, MockTable>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions {
    pub width: f64,
    pub height: f64,
    pub seed: Seed,
    /// Worker threads for per-leaf rendering; 0 lets the pool decide.
    pub threads: usize,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { width: 800.0, height: 600.0, seed: 0, threads: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Rect { x: f64, y: f64, w: f64, h: f64 },
    Circle { cx: f64, cy: f64, r: f64 },
    /// Annular sector; angles in degrees, clockwise from 12 o'clock.
    Arc { cx: f64, cy: f64, r_inner: f64, r_outer: f64, a_start: f64, a_end: f64 },
    /// `closed` paths are filled, open ones are stroked only.
    Path { cmds: Vec<PathCmd>, closed: bool },
}

impl Geometry {
    /// Point a node-link mark attaches to.
    pub fn centroid(&self) -> Point {
        match self {
            Geometry::Rect { x, y, w, h } => (x + w / 2.0, y + h / 2.0),
            Geometry::Circle { cx, cy, .. } => (*cx, *cy),
            Geometry::Arc { cx, cy, r_inner, r_outer, a_start, a_end } => {
                if *r_inner <= 0.0 && a_end - a_start >= 360.0 - 1e-9 {
                    (*cx, *cy)
                } else {
                    polar_point(*cx, *cy, (r_inner + r_outer) / 2.0, (a_start + a_end) / 2.0)
                }
            }
            Geometry::Path { cmds, .. } => {
                let pts: Vec<Point> = cmds
                    .iter()
                    .filter(|c| matches!(c, PathCmd::MoveTo(_) | PathCmd::LineTo(_)))
                    .flat_map(PathCmd::points)
                    .collect();
                let n = pts.len().max(1) as f64;
                (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n)
            }
        }
    }

    /// Points that must lie inside the mark's region: corners, circle
    /// extremes, sector corners and every path command point.
    pub fn sample_points(&self) -> Vec<Point> {
        match self {
            Geometry::Rect { x, y, w, h } => vec![(*x, *y), (x + w, *y), (*x, y + h), (x + w, y + h)],
            Geometry::Circle { cx, cy, r } => {
                vec![(cx - r, *cy), (cx + r, *cy), (*cx, cy - r), (*cx, cy + r)]
            }
            Geometry::Arc { cx, cy, r_inner, r_outer, a_start, a_end } => {
                let mut out = Vec::new();
                for k in 0..=8 {
                    let a = a_start + (a_end - a_start) * k as f64 / 8.0;
                    out.push(polar_point(*cx, *cy, *r_inner, a));
                    out.push(polar_point(*cx, *cy, *r_outer, a));
                }
                out
            }
            Geometry::Path { cmds, .. } => cmds
                .iter()
                .filter(|c| !matches!(c, PathCmd::ArcTo(..)))
                .flat_map(PathCmd::points)
                .collect(),
        }
    }

    pub fn scaled(&self, k: f64) -> Geometry {
        match self {
            Geometry::Rect { x, y, w, h } => Geometry::Rect { x: x * k, y: y * k, w: w * k, h: h * k },
            Geometry::Circle { cx, cy, r } => Geometry::Circle { cx: cx * k, cy: cy * k, r: r * k },
            Geometry::Arc { cx, cy, r_inner, r_outer, a_start, a_end } => Geometry::Arc {
                cx: cx * k,
                cy: cy * k,
                r_inner: r_inner * k,
                r_outer: r_outer * k,
                a_start: *a_start,
                a_end: *a_end,
            },
            Geometry::Path { cmds, closed } => {
                Geometry::Path { cmds: cmds.iter().map(|c| c.scaled(k)).collect(), closed: *closed }
            }
        }
    }
}

/// Resolved presentation of one mark. Missing entries use SVG defaults,
/// except fill (see [`DEFAULT_FILL`]).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Style {
    pub fill: Option<String>,
    pub stroke: Option<String>,
    pub stroke_width: Option<f64>,
    pub opacity: Option<f64>,
    pub rx: Option<f64>,
    pub ry: Option<f64>,
}

impl Style {
    fn from_datum(d: &MockDatum) -> Style {
        let text = |a: StyleAttr| d.style(a).map(AttrValue::to_string);
        let num = |a: StyleAttr| d.style(a).and_then(AttrValue::as_number);
        Style {
            fill: text(StyleAttr::Fill),
            stroke: text(StyleAttr::Stroke),
            stroke_width: num(StyleAttr::StrokeWidth),
            opacity: num(StyleAttr::Opacity),
            rx: num(StyleAttr::Rx),
            ry: num(StyleAttr::Ry),
        }
    }
}

/// One drawn mark.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkRecord {
    pub container: ScopedId,
    pub mark_type: MarkType,
    pub link: LinkMarkType,
    pub group: usize,
    pub item: usize,
    pub geometry: Geometry,
    pub style: Style,
}

/// A container region with the marks drawn in it (empty for non-leaves).
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub frame: CanvasFrame,
    pub marks: Vec<MarkRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub width: f64,
    pub height: f64,
    /// In preorder, template instances right after their template.
    pub layers: Vec<Layer>,
}

impl Scene {
    pub fn marks(&self) -> impl Iterator<Item = &MarkRecord> {
        self.layers.iter().flat_map(|l| l.marks.iter())
    }

    pub fn frame(&self, id: &str) -> Option<&CanvasFrame> {
        self.layers.iter().map(|l| &l.frame).find(|f| f.id.to_string() == id)
    }

    pub fn scaled(&self, k: f64) -> Scene {
        Scene {
            width: self.width * k,
            height: self.height * k,
            layers: self
                .layers
                .iter()
                .map(|l| Layer {
                    frame: CanvasFrame { region: l.frame.region.scaled(k), ..l.frame.clone() },
                    marks: l
                        .marks
                        .iter()
                        .map(|m| MarkRecord { geometry: m.geometry.scaled(k), ..m.clone() })
                        .collect(),
                })
                .collect(),
        }
    }
}

/// Marks of one leaf whose table is `table`, drawn in `frame`. Node-link
/// leaves yield nothing here; see [`render_links`].
pub fn render_marks(
    spec: &DataSpecification,
    mark_type: MarkType,
    table: &MockTable,
    frame: &CanvasFrame,
) -> Result<Vec<MarkRecord>, RenderError> {
    let link = spec.link_type();
    if link == LinkMarkType::NodeLink {
        return Ok(Vec::new());
    }
    let ds = table.structure_like(&spec.data_structure);
    let layout = &spec.layout_specification;
    let kind = match frame.region {
        Region::Rect { .. } => crate::dsl::CoordinateKind::Cartesian,
        Region::Sector { .. } => crate::dsl::CoordinateKind::Polar,
    };
    let placements = resolve_items(&ds, layout, kind, &table.inputs())
        .map_err(|source| RenderError::Layout { container: frame.id.clone(), source })?;
    let record = |d: &MockDatum, geometry: Geometry| MarkRecord {
        container: frame.id.clone(),
        mark_type,
        link,
        group: d.group_index,
        item: d.item_index,
        geometry,
        style: Style::from_datum(d),
    };
    let line_type = spec.non_layout_specification.as_ref().and_then(|s| s.line_type);
    if link == LinkMarkType::GroupType {
        let dir = spec
            .mark_specification
            .as_ref()
            .and_then(|m| m.group_link_direction)
            .unwrap_or(ds.secondary().map(|s| s.dimension).unwrap_or(Dimension::X));
        let mut out = Vec::new();
        let mut start = 0;
        for n in table.group_sizes() {
            let rows = &table.rows[start..start + n];
            let places = &placements[start..start + n];
            start += n;
            if rows.is_empty() {
                continue;
            }
            let geometry = group_path(spec, mark_type, dir, line_type, places, &frame.region);
            out.push(record(&rows[0], geometry));
        }
        return Ok(out);
    }
    Ok(table
        .rows
        .iter()
        .zip(&placements)
        .map(|(d, p)| record(d, node_geometry(spec, mark_type, &ds, p, &frame.region)))
        .collect())
}

fn node_geometry(
    spec: &DataSpecification,
    mark_type: MarkType,
    ds: &crate::dsl::DataStructure,
    p: &Placement,
    region: &Region,
) -> Geometry {
    let layout = &spec.layout_specification;
    match *region {
        Region::Rect { .. } => {
            let (ex, ey) = (p.along(Dimension::X), p.along(Dimension::Y));
            let (x0, x1) = (region.x_at(ex.start), region.x_at(ex.end));
            let (y0, y1) = (region.y_at(ey.end), region.y_at(ey.start));
            match mark_type {
                MarkType::Circle => {
                    let r = (x1 - x0).min(y1 - y0) / 2.0;
                    Geometry::Circle { cx: (x0 + x1) / 2.0, cy: (y0 + y1) / 2.0, r }
                }
                MarkType::Line => {
                    let vertical = ds.is_primary(Dimension::Y) && !ds.is_primary(Dimension::X);
                    let cmds = if vertical {
                        let x = region.x_at(value_end(layout.get(Dimension::X), ex));
                        vec![PathCmd::MoveTo((x, y1)), PathCmd::LineTo((x, y0))]
                    } else {
                        let y = region.y_at(value_end(layout.get(Dimension::Y), ey));
                        vec![PathCmd::MoveTo((x0, y)), PathCmd::LineTo((x1, y))]
                    };
                    Geometry::Path { cmds, closed: false }
                }
                _ => Geometry::Rect { x: x0, y: y0, w: x1 - x0, h: y1 - y0 },
            }
        }
        Region::Sector { cx, cy, .. } => {
            let (er, ea) = (p.along(Dimension::Radius), p.along(Dimension::Angle));
            let (r0, r1) = region.radius_extent(er);
            let (a0, a1) = region.angle_extent(ea);
            match mark_type {
                MarkType::Circle => {
                    let rm = (r0 + r1) / 2.0;
                    let half = ((a1 - a0) / 2.0).to_radians();
                    let chord = if a1 - a0 >= 180.0 { rm } else { rm * half.sin() };
                    let r = ((r1 - r0) / 2.0).min(chord);
                    let (x, y) = polar_point(cx, cy, rm, (a0 + a1) / 2.0);
                    if r0 <= 0.0 && a1 - a0 >= 360.0 - 1e-9 {
                        Geometry::Circle { cx, cy, r: r1 }
                    } else {
                        Geometry::Circle { cx: x, cy: y, r }
                    }
                }
                MarkType::Line => {
                    let along_angle = ds.is_primary(Dimension::Angle) && !ds.is_primary(Dimension::Radius);
                    let cmds = if along_angle {
                        let r = region.radius_at(value_end(layout.get(Dimension::Radius), er));
                        polyline((0..=POLAR_STEPS).map(|k| {
                            polar_point(cx, cy, r, a0 + (a1 - a0) * k as f64 / POLAR_STEPS as f64)
                        }))
                    } else {
                        let a = region.angle_at(value_end(layout.get(Dimension::Angle), ea));
                        vec![PathCmd::MoveTo(polar_point(cx, cy, r0, a)), PathCmd::LineTo(polar_point(cx, cy, r1, a))]
                    };
                    Geometry::Path { cmds, closed: false }
                }
                _ => Geometry::Arc { cx, cy, r_inner: r0, r_outer: r1, a_start: a0, a_end: a1 },
            }
        }
    }
}

fn polyline(points: impl Iterator<Item = Point>) -> Vec<PathCmd> {
    points
        .enumerate()
        .map(|(k, p)| if k == 0 { PathCmd::MoveTo(p) } else { PathCmd::LineTo(p) })
        .collect()
}

/// The other dimension of the frame that contains `dim`.
fn cross(dim: Dimension) -> Dimension {
    match dim {
        Dimension::X => Dimension::Y,
        Dimension::Y => Dimension::X,
        Dimension::Radius => Dimension::Angle,
        Dimension::Angle => Dimension::Radius,
    }
}

/// One connected path through the items of a group: a line through the
/// value ends, or an area or band between the extent bounds.
fn group_path(
    spec: &DataSpecification,
    mark_type: MarkType,
    dir: Dimension,
    line_type: Option<LineType>,
    places: &[Placement],
    region: &Region,
) -> Geometry {
    let layout = &spec.layout_specification;
    let other = cross(dir);
    let curve = line_type == Some(LineType::Curve);
    let t: Vec<f64> = places.iter().map(|p| p.along(dir).center()).collect();
    let filled = mark_type != MarkType::Line;
    let (upper, lower): (Vec<f64>, Vec<f64>) = places
        .iter()
        .map(|p| {
            let e = p.along(other);
            if filled {
                (e.end, e.start)
            } else {
                let v = value_end(layout.get(other), e);
                (v, v)
            }
        })
        .unzip();
    match *region {
        Region::Rect { .. } => {
            let to_px = |tt: f64, vv: f64| match dir {
                Dimension::Y => (region.x_at(vv), region.y_at(tt)),
                _ => (region.x_at(tt), region.y_at(vv)),
            };
            let along_x = dir != Dimension::Y;
            let trace = |vals: &[f64], rev: bool| -> Vec<Point> {
                let mut pts: Vec<Point> = t.iter().zip(vals).map(|(a, b)| to_px(*a, *b)).collect();
                if rev {
                    pts.reverse();
                }
                pts
            };
            let follow = |pts: &[Point]| -> Vec<PathCmd> {
                if curve {
                    monotone_path(pts, along_x)
                } else {
                    pts.iter().skip(1).map(|p| PathCmd::LineTo(*p)).collect()
                }
            };
            let top = trace(&upper, false);
            let mut cmds = vec![PathCmd::MoveTo(top[0])];
            if top.len() == 1 {
                cmds.push(PathCmd::LineTo(top[0]));
            }
            cmds.extend(follow(&top));
            if filled {
                let bottom = trace(&lower, true);
                cmds.push(PathCmd::LineTo(bottom[0]));
                cmds.extend(follow(&bottom));
                cmds.push(PathCmd::Close);
            }
            Geometry::Path { cmds, closed: filled }
        }
        Region::Sector { cx, cy, a1, a2, .. } => {
            let to_px = |tt: f64, vv: f64| match dir {
                Dimension::Radius => polar_point(cx, cy, region.radius_at(tt), region.angle_at(vv)),
                _ => polar_point(cx, cy, region.radius_at(vv), region.angle_at(tt)),
            };
            let full = a2 - a1 >= 360.0 - 1e-9;
            let ring = full && dir == Dimension::Angle && !filled && t.len() >= 3;
            let series = |vals: &[f64]| -> Vec<(f64, f64)> {
                let (mut tt, mut vv) = (t.clone(), vals.to_vec());
                if ring {
                    tt.push(t[0] + 100.0);
                    vv.push(vals[0]);
                }
                // Straight paths join the control points with chords.
                sample_series(&tt, &vv, curve, if curve { POLAR_STEPS } else { 1 })
            };
            let mut pts: Vec<Point> = series(&upper).into_iter().map(|(a, b)| to_px(a, b)).collect();
            if pts.len() == 1 {
                pts.push(pts[0]);
            }
            if filled {
                let mut bottom: Vec<Point> = series(&lower).into_iter().map(|(a, b)| to_px(a, b)).collect();
                bottom.reverse();
                pts.extend(bottom);
            }
            let mut cmds = polyline(pts.into_iter());
            if ring {
                cmds.pop();
            }
            if filled || ring {
                cmds.push(PathCmd::Close);
            }
            Geometry::Path { cmds, closed: filled }
        }
    }
}

/// Curves of a node-link leaf between the registered endpoint centroids.
pub fn render_links(
    spec: &DataSpecification,
    mark_type: MarkType,
    table: &MockTable,
    frame: &CanvasFrame,
    anchors: &HashMap<String, Point>,
) -> Result<Vec<MarkRecord>, RenderError> {
    let curve = spec.non_layout_specification.as_ref().and_then(|s| s.line_type) != Some(LineType::Straight);
    let resolve = |d: &MockDatum, col: &str| -> Result<Point, RenderError> {
        let key = d.text(col).unwrap_or_default();
        let canonical = key.parse::<LinkRef>().map(|l| l.to_string()).unwrap_or_else(|_| key.to_string());
        anchors
            .get(&canonical)
            .copied()
            .ok_or_else(|| RenderError::UnresolvedLink { container: frame.id.clone(), link: key.to_string() })
    };
    table
        .rows
        .iter()
        .map(|d| {
            let (a, b) = (resolve(d, "source")?, resolve(d, "target")?);
            let (dx, dy) = (b.0 - a.0, b.1 - a.1);
            let mut cmds = vec![PathCmd::MoveTo(a)];
            if curve {
                let mid = ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0);
                // 10% of the chord, to the left of the direction of travel.
                cmds.push(PathCmd::QuadTo((mid.0 + 0.1 * dy, mid.1 - 0.1 * dx), b));
            } else {
                cmds.push(PathCmd::LineTo(b));
            }
            Ok(MarkRecord {
                container: frame.id.clone(),
                mark_type,
                link: LinkMarkType::NodeLink,
                group: d.group_index,
                item: d.item_index,
                geometry: Geometry::Path { cmds, closed: false },
                style: Style::from_datum(d),
            })
        })
        .collect()
}

struct LeafJob<'a> {
    layer: usize,
    node: &'a ContainerNode,
    spec: &'a DataSpecification,
    table: MockTable,
}

struct Builder<'a> {
    doc: &'a DslDocument,
    seed: Seed,
    overrides: &'a Overrides,
    layers: Vec<Layer>,
    jobs: Vec<LeafJob<'a>>,
    anchors: HashMap<String, Point>,
    mocks: HashMap<crate::dsl::ContainerId, MockTable>,
}

impl<'a> Builder<'a> {
    fn table(&mut self, scope: &ScopedId) -> Result<MockTable, RenderError> {
        for n in (0..=scope.instances.len()).rev() {
            if let Some(t) = self.overrides.get(&scope.with_instances(n)) {
                return Ok(t.clone());
            }
        }
        if let Some(t) = self.mocks.get(&scope.id) {
            return Ok(t.clone());
        }
        let t = mock_table(self.doc, &scope.id, self.seed)
            .map_err(|source| RenderError::Data { container: scope.clone(), source })?;
        self.mocks.insert(scope.id.clone(), t.clone());
        Ok(t)
    }

    fn push(&mut self, id: ScopedId, region: Region, is_leaf: bool, is_instance: bool) -> Result<usize, RenderError> {
        if region.is_degenerate() {
            return Err(RenderError::DegenerateFrame(id));
        }
        self.layers.push(Layer { frame: CanvasFrame { id, region, is_leaf, is_instance }, marks: Vec::new() });
        Ok(self.layers.len() - 1)
    }

    /// `parent` is the region `region` was derived from; template instance
    /// boxes are expressed in its units.
    fn walk(
        &mut self,
        node: &'a ContainerNode,
        instances: &[usize],
        region: Region,
        parent: Region,
    ) -> Result<(), RenderError> {
        let scope = ScopedId { id: node.id.clone(), instances: instances.to_vec() };
        let layer = self.push(scope.clone(), region, node.is_leaf, false)?;
        if node.is_leaf {
            let spec = self.doc.spec(&node.id).ok_or_else(|| RenderError::MissingSpec(node.id.clone()))?;
            let table = self.table(&scope)?;
            self.jobs.push(LeafJob { layer, node, spec, table });
            return Ok(());
        }
        if node.is_template() {
            let spec = self.doc.spec(&node.id).ok_or_else(|| RenderError::MissingSpec(node.id.clone()))?;
            let table = self.table(&scope)?;
            let ds = table.structure_like(&spec.data_structure);
            let spec = DataSpecification { data_structure: ds, ..spec.clone() };
            let boxes = instantiate_template(&spec, &node.frame, &table.inputs())
                .map_err(|source| RenderError::Layout { container: scope.clone(), source })?;
            for (k, b) in boxes.iter().enumerate() {
                let mut inst = instances.to_vec();
                inst.push(k);
                let iscope = ScopedId { id: node.id.clone(), instances: inst.clone() };
                let r = parent
                    .child(&b.frame)
                    .ok_or_else(|| RenderError::PolarNesting(node.id.clone()))?
                    .with_units(&node.frame);
                self.push(iscope.clone(), r, false, true)?;
                self.anchors.insert(LinkRef { scope: iscope, mark: None }.to_string(), r.centroid());
                for c in &node.children {
                    let cr = r.child(&c.frame).ok_or_else(|| RenderError::PolarNesting(c.id.clone()))?;
                    self.walk(c, &inst, cr, r)?;
                }
            }
            return Ok(());
        }
        for c in &node.children {
            let cr = region.child(&c.frame).ok_or_else(|| RenderError::PolarNesting(c.id.clone()))?;
            self.walk(c, instances, cr, region)?;
        }
        Ok(())
    }
}

/// Lays out every container of `doc` on the canvas and draws the marks of
/// every leaf. Leaves render in parallel; node-link leaves render last,
/// once every endpoint is known.
pub fn render_scene(doc: &DslDocument, opts: &RenderOptions, overrides: &Overrides) -> Result<Scene, RenderError> {
    if !(opts.width > 0.0 && opts.height > 0.0 && opts.width.is_finite() && opts.height.is_finite()) {
        return Err(RenderError::Canvas(opts.width, opts.height));
    }
    let mut b = Builder {
        doc,
        seed: opts.seed,
        overrides,
        layers: Vec::new(),
        jobs: Vec::new(),
        anchors: HashMap::new(),
        mocks: HashMap::new(),
    };
    let canvas = Region::canvas(opts.width, opts.height, crate::dsl::CartesianFrame::new(0.0, 0.0, 100.0, 100.0));
    let root_region = canvas
        .child(&doc.root.frame)
        .ok_or_else(|| RenderError::PolarNesting(doc.root.id.clone()))?;
    b.walk(&doc.root, &[], root_region, canvas)?;
    let Builder { mut layers, jobs, mut anchors, .. } = b;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| RenderError::Threads(e.to_string()))?;
    let (nodes, links): (Vec<&LeafJob>, Vec<&LeafJob>) =
        jobs.iter().partition(|j| j.spec.link_type() != LinkMarkType::NodeLink);
    let drawn: Vec<Result<Vec<MarkRecord>, RenderError>> = pool.install(|| {
        nodes
            .par_iter()
            .map(|j| {
                let mark = j.node.mark_type.unwrap_or(MarkType::Rectangle);
                render_marks(j.spec, mark, &j.table, &layers[j.layer].frame)
            })
            .collect()
    });
    for (j, marks) in nodes.iter().zip(drawn) {
        let marks = marks?;
        let scope = &layers[j.layer].frame.id;
        for (k, m) in marks.iter().enumerate() {
            if m.link == LinkMarkType::NoLink {
                anchors.insert(LinkRef { scope: scope.clone(), mark: Some(k) }.to_string(), m.geometry.centroid());
            }
        }
        layers[j.layer].marks = marks;
    }
    let drawn: Vec<Result<Vec<MarkRecord>, RenderError>> = pool.install(|| {
        links
            .par_iter()
            .map(|j| {
                let mark = j.node.mark_type.unwrap_or(MarkType::Line);
                render_links(j.spec, mark, &j.table, &layers[j.layer].frame, &anchors)
            })
            .collect()
    });
    for (j, marks) in links.iter().zip(drawn) {
        layers[j.layer].marks = marks?;
    }
    Ok(Scene { width: opts.width, height: opts.height, layers })
}

/// [`render_scene`] followed by [`emit_svg`].
pub fn render_document(doc: &DslDocument, opts: &RenderOptions, overrides: &Overrides) -> Result<String, RenderError> {
    render_scene(doc, opts, overrides).map(|s| emit_svg(&s))
}

/// Marks whose sample points fall outside their container region by more
/// than `tol` pixels. Node-link curves are exempt: they join containers.
pub fn clipping_violations(scene: &Scene, tol: f64) -> Vec<(ScopedId, usize)> {
    let mut out = Vec::new();
    for l in &scene.layers {
        for (k, m) in l.marks.iter().enumerate() {
            if m.link == LinkMarkType::NodeLink {
                continue;
            }
            if m.geometry.sample_points().into_iter().any(|p| !l.frame.region.contains(p, tol)) {
                out.push((l.frame.id.clone(), k));
            }
        }
    }
    out
}
