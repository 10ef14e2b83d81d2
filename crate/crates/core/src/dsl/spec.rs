//! Data specifications: the per-container bundle describing which marks
//! are drawn, how many data items exist, and how those items are laid out
//! and styled.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::id::ContainerId;
use super::num::{self, Num};
use super::CoordinateKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarkType {
    Circle,
    Arc,
    Rectangle,
    Line,
    Band,
    Area,
}

impl MarkType {
    pub const ALL: [MarkType; 6] =
        [MarkType::Circle, MarkType::Arc, MarkType::Rectangle, MarkType::Line, MarkType::Band, MarkType::Area];

    pub fn as_str(self) -> &'static str {
        match self {
            MarkType::Circle => "circle",
            MarkType::Arc => "arc",
            MarkType::Rectangle => "rectangle",
            MarkType::Line => "line",
            MarkType::Band => "band",
            MarkType::Area => "area",
        }
    }

    /// Marks drawn as a polyline through control points.
    pub fn is_path(self) -> bool {
        matches!(self, MarkType::Line | MarkType::Band | MarkType::Area)
    }
}

impl fmt::Display for MarkType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    X,
    Y,
    Radius,
    Angle,
}

impl Dimension {
    pub const ALL: [Dimension; 4] = [Dimension::X, Dimension::Y, Dimension::Radius, Dimension::Angle];

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::X => "x",
            Dimension::Y => "y",
            Dimension::Radius => "radius",
            Dimension::Angle => "angle",
        }
    }

    pub fn frame_kind(self) -> CoordinateKind {
        match self {
            Dimension::X | Dimension::Y => CoordinateKind::Cartesian,
            Dimension::Radius | Dimension::Angle => CoordinateKind::Polar,
        }
    }

    pub fn dims_for(kind: CoordinateKind) -> [Dimension; 2] {
        match kind {
            CoordinateKind::Cartesian => [Dimension::X, Dimension::Y],
            CoordinateKind::Polar => [Dimension::Radius, Dimension::Angle],
        }
    }

    pub fn from_name(s: &str) -> Option<Dimension> {
        Dimension::ALL.into_iter().find(|d| d.as_str() == s)
    }

    /// Position in [`Dimension::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkMarkType {
    NoLink,
    GroupType,
    #[serde(alias = "node_link_type")]
    NodeLink,
}

/// What kind of mark a leaf draws and how link marks obtain their geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkSpecification {
    pub mark_type: MarkType,
    pub is_link_mark: bool,
    pub link_mark_type: LinkMarkType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_link_direction: Option<Dimension>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link_number: Option<u32>,
    /// Preserved but not interpreted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_use_once: Option<bool>,
    #[serde(default)]
    pub is_width_encoded_data: bool,
    /// Preserved but not interpreted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub is_fully_connected: Option<bool>,
    /// Preserved but not interpreted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub is_bipartite: Option<bool>,
}

impl MarkSpecification {
    pub fn node(mark_type: MarkType) -> Self {
        MarkSpecification {
            mark_type,
            is_link_mark: false,
            link_mark_type: LinkMarkType::NoLink,
            group_link_direction: None,
            link_number: None,
            node_use_once: None,
            is_width_encoded_data: false,
            is_fully_connected: None,
            is_bipartite: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DataType {
    #[serde(rename = "1D_list", alias = "1D_LIST", alias = "1D_List")]
    List1D,
    #[serde(rename = "2D_matrix", alias = "2D_MATRIX", alias = "2D_Matrix")]
    Matrix2D,
    #[serde(rename = "2D_list", alias = "2D_LIST", alias = "2D_List")]
    List2D,
}

/// One dimension or a pair of dimensions. A single dimension is written as
/// a bare string, a pair as an array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionSet(Vec<Dimension>);

impl DimensionSet {
    pub fn one(d: Dimension) -> Self {
        DimensionSet(vec![d])
    }

    pub fn pair(a: Dimension, b: Dimension) -> Self {
        DimensionSet(vec![a, b])
    }

    pub fn dims(&self) -> &[Dimension] {
        &self.0
    }

    pub fn contains(&self, d: Dimension) -> bool {
        self.0.contains(&d)
    }
}

impl Serialize for DimensionSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.len() == 1 {
            self.0[0].serialize(s)
        } else {
            self.0.serialize(s)
        }
    }
}

impl<'de> Deserialize<'de> for DimensionSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            One(Dimension),
            Many(Vec<Dimension>),
        }
        let dims = match Raw::deserialize(d).map_err(|_| {
            serde::de::Error::custom("expected a dimension (x, y, radius, angle) or a list of one or two dimensions")
        })? {
            Raw::One(d) => vec![d],
            Raw::Many(v) => v,
        };
        if dims.is_empty() || dims.len() > 2 || (dims.len() == 2 && dims[0] == dims[1]) {
            return Err(serde::de::Error::custom("expected one dimension or two distinct dimensions"));
        }
        Ok(DimensionSet(dims))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimarySize {
    pub number: u32,
    pub dimension: DimensionSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explanation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SecondaryNumber {
    Scalar(u32),
    PerGroup(Vec<u32>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecondarySize {
    pub number: SecondaryNumber,
    pub dimension: Dimension,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explanation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSize {
    pub primary: PrimarySize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secondary: Option<SecondarySize>,
}

/// How data items are grouped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataStructure {
    pub data_type: DataType,
    pub data_size: DataSize,
}

impl DataStructure {
    pub fn list_1d(number: u32, dimension: DimensionSet) -> Self {
        DataStructure {
            data_type: DataType::List1D,
            data_size: DataSize {
                primary: PrimarySize { number, dimension, explanation: None },
                secondary: None,
            },
        }
    }

    pub fn matrix_2d(groups: u32, primary: Dimension, items: u32, secondary: Dimension) -> Self {
        DataStructure {
            data_type: DataType::Matrix2D,
            data_size: DataSize {
                primary: PrimarySize { number: groups, dimension: DimensionSet::one(primary), explanation: None },
                secondary: Some(SecondarySize {
                    number: SecondaryNumber::Scalar(items),
                    dimension: secondary,
                    explanation: None,
                }),
            },
        }
    }

    pub fn list_2d(primary: Dimension, sizes: Vec<u32>, secondary: Dimension) -> Self {
        DataStructure {
            data_type: DataType::List2D,
            data_size: DataSize {
                primary: PrimarySize {
                    number: sizes.len() as u32,
                    dimension: DimensionSet::one(primary),
                    explanation: None,
                },
                secondary: Some(SecondarySize {
                    number: SecondaryNumber::PerGroup(sizes),
                    dimension: secondary,
                    explanation: None,
                }),
            },
        }
    }

    pub fn primary(&self) -> &PrimarySize {
        &self.data_size.primary
    }

    pub fn secondary(&self) -> Option<&SecondarySize> {
        self.data_size.secondary.as_ref()
    }

    /// Item count of every group. A 1D list has one single-item group per
    /// element.
    pub fn group_sizes(&self) -> Vec<usize> {
        let groups = self.primary().number as usize;
        match (self.data_type, self.secondary().map(|s| &s.number)) {
            (DataType::List1D, _) | (_, None) => vec![1; groups],
            (_, Some(SecondaryNumber::Scalar(n))) => vec![*n as usize; groups],
            (_, Some(SecondaryNumber::PerGroup(v))) => v.iter().map(|n| *n as usize).collect(),
        }
    }

    pub fn item_count(&self) -> usize {
        self.group_sizes().iter().sum()
    }

    /// Whether `dim` is driven by the group index.
    pub fn is_primary(&self, dim: Dimension) -> bool {
        self.primary().dimension.contains(dim)
    }

    /// Whether `dim` is driven by the item index within a group.
    pub fn is_secondary(&self, dim: Dimension) -> bool {
        self.data_type != DataType::List1D && self.secondary().is_some_and(|s| s.dimension == dim)
    }

    /// Largest number of elements resolved at once along `dim`.
    pub fn elements_along(&self, dim: Dimension) -> usize {
        let sizes = self.group_sizes();
        let groups = sizes.len();
        let items = sizes.iter().copied().max().unwrap_or(0);
        match (self.is_primary(dim), self.is_secondary(dim)) {
            (true, true) => groups.max(items),
            (true, false) => groups,
            (false, true) => items,
            (false, false) => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StackDirection {
    #[default]
    Min,
    Middle,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Anchor {
    Min,
    Middle,
    Max,
    StackingDecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorDistribute {
    #[serde(alias = "fixed")]
    FixedValue,
    UniformInterval,
    Flexible,
}

/// Position and size rules along one dimension, in percent of the axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutDimensionSpec {
    pub stacking: bool,
    #[serde(default)]
    pub stacking_direction: StackDirection,
    pub anchor: Anchor,
    #[serde(default)]
    pub subdividing: bool,
    #[serde(rename = "2d_flatten", default)]
    pub flatten_2d: bool,
    pub size_uniform: bool,
    #[serde(serialize_with = "num::ser_pair")]
    pub size_range: [f64; 2],
    #[serde(alias = "anchor_distribution")]
    pub anchor_distribute: AnchorDistribute,
    #[serde(default, serialize_with = "num::ser_opt")]
    pub anchor_interval: Option<f64>,
    #[serde(default, serialize_with = "num::ser_opt")]
    pub anchor_start: Option<f64>,
}

impl LayoutDimensionSpec {
    /// Elements at a fixed position with a constant size.
    pub fn fixed(anchor: Anchor, start: f64, size: f64) -> Self {
        LayoutDimensionSpec {
            stacking: false,
            stacking_direction: StackDirection::Min,
            anchor,
            subdividing: false,
            flatten_2d: false,
            size_uniform: true,
            size_range: [size, size],
            anchor_distribute: AnchorDistribute::FixedValue,
            anchor_interval: Some(0.0),
            anchor_start: Some(start),
        }
    }

    /// Evenly spaced anchors with a constant size.
    pub fn uniform(anchor: Anchor, start: f64, interval: f64, size: f64) -> Self {
        LayoutDimensionSpec {
            anchor_distribute: AnchorDistribute::UniformInterval,
            anchor_interval: Some(interval),
            anchor_start: Some(start),
            ..LayoutDimensionSpec::fixed(anchor, start, size)
        }
    }

    /// Data-driven anchor positions.
    pub fn flexible(anchor: Anchor, size_range: [f64; 2]) -> Self {
        LayoutDimensionSpec {
            stacking: false,
            stacking_direction: StackDirection::Min,
            anchor,
            subdividing: false,
            flatten_2d: false,
            size_uniform: size_range[0] == size_range[1],
            size_range,
            anchor_distribute: AnchorDistribute::Flexible,
            anchor_interval: None,
            anchor_start: None,
        }
    }

    /// End-to-end placement; `subdividing` fills the whole axis.
    pub fn stacked(direction: StackDirection, subdividing: bool, size_range: [f64; 2]) -> Self {
        LayoutDimensionSpec {
            stacking: true,
            stacking_direction: direction,
            anchor: Anchor::StackingDecided,
            subdividing,
            flatten_2d: false,
            size_uniform: size_range[0] == size_range[1],
            size_range,
            anchor_distribute: AnchorDistribute::Flexible,
            anchor_interval: None,
            anchor_start: None,
        }
    }

    /// Size range with data-driven sizes.
    pub fn with_sizes(mut self, size_range: [f64; 2]) -> Self {
        self.size_uniform = size_range[0] == size_range[1];
        self.size_range = size_range;
        self
    }
}

/// Layout of marks (or template instances) per dimension, plus link
/// endpoints for node-link marks.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutSpecification {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<LayoutDimensionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<LayoutDimensionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<LayoutDimensionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<LayoutDimensionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<Vec<ContainerId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec<ContainerId>>,
}

impl LayoutSpecification {
    pub fn get(&self, dim: Dimension) -> Option<&LayoutDimensionSpec> {
        match dim {
            Dimension::X => self.x.as_ref(),
            Dimension::Y => self.y.as_ref(),
            Dimension::Radius => self.radius.as_ref(),
            Dimension::Angle => self.angle.as_ref(),
        }
    }

    pub fn slot_mut(&mut self, dim: Dimension) -> &mut Option<LayoutDimensionSpec> {
        match dim {
            Dimension::X => &mut self.x,
            Dimension::Y => &mut self.y,
            Dimension::Radius => &mut self.radius,
            Dimension::Angle => &mut self.angle,
        }
    }

    pub fn with(mut self, dim: Dimension, spec: LayoutDimensionSpec) -> Self {
        *self.slot_mut(dim) = Some(spec);
        self
    }

    /// Dimensions in use, in schema order.
    pub fn dims(&self) -> impl Iterator<Item = (Dimension, &LayoutDimensionSpec)> {
        Dimension::ALL.into_iter().filter_map(move |d| self.get(d).map(|s| (d, s)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Fix,
    Linear,
    OrdinalPrimary,
    OrdinalSecondary,
    Categorical,
}

/// A style value: a number or a `#RRGGBB` color (or other text).
#[derive(Debug, Clone, PartialEq)]
pub enum AttrValue {
    Number(f64),
    Text(String),
}

impl AttrValue {
    pub fn color(hex: &str) -> Self {
        AttrValue::Text(hex.to_string())
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            AttrValue::Number(n) => Some(*n),
            AttrValue::Text(_) => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            AttrValue::Text(t) => Some(t),
            AttrValue::Number(_) => None,
        }
    }
}

impl fmt::Display for AttrValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrValue::Number(n) => write!(f, "{n}"),
            AttrValue::Text(t) => f.write_str(t),
        }
    }
}

impl Serialize for AttrValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            AttrValue::Number(n) => Num(*n).serialize(s),
            AttrValue::Text(t) => s.serialize_str(t),
        }
    }
}

impl<'de> Deserialize<'de> for AttrValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d).map_err(|_| serde::de::Error::custom("expected a number or a string"))? {
            Raw::Number(n) => Ok(AttrValue::Number(n)),
            Raw::Text(t) => Ok(AttrValue::Text(t)),
        }
    }
}

/// Encoding of one non-layout attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonLayoutAttribute {
    pub scale: Scale,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fix: Option<AttrValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear: Option<[AttrValue; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<Vec<AttrValue>>,
}

impl NonLayoutAttribute {
    pub fn fix(value: AttrValue) -> Self {
        NonLayoutAttribute { scale: Scale::Fix, fix: Some(value), linear: None, options: None }
    }

    pub fn linear(lo: AttrValue, hi: AttrValue) -> Self {
        NonLayoutAttribute { scale: Scale::Linear, fix: None, linear: Some([lo, hi]), options: None }
    }

    pub fn choice(scale: Scale, options: Vec<AttrValue>) -> Self {
        NonLayoutAttribute { scale, fix: None, linear: None, options: Some(options) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineType {
    Curve,
    Straight,
}

/// Accepts either the bare value or a `fix` encoding of it.
fn de_line_type<'de, D: Deserializer<'de>>(d: D) -> Result<Option<LineType>, D::Error> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Encoded {
        scale: Scale,
        fix: LineType,
    }
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Bare(LineType),
        Encoded(Encoded),
    }
    match Option::<Raw>::deserialize(d)
        .map_err(|_| serde::de::Error::custom("line_type must be \"curve\" or \"straight\""))?
    {
        None => Ok(None),
        Some(Raw::Bare(t)) => Ok(Some(t)),
        Some(Raw::Encoded(e)) if e.scale == Scale::Fix => Ok(Some(e.fix)),
        Some(Raw::Encoded(_)) => Err(serde::de::Error::custom("line_type only supports a fixed value")),
    }
}

/// Names of the style attributes a leaf may encode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StyleAttr {
    Fill,
    Stroke,
    StrokeWidth,
    Opacity,
    Rx,
    Ry,
}

impl StyleAttr {
    pub const ALL: [StyleAttr; 6] =
        [StyleAttr::Fill, StyleAttr::Stroke, StyleAttr::StrokeWidth, StyleAttr::Opacity, StyleAttr::Rx, StyleAttr::Ry];

    pub fn as_str(self) -> &'static str {
        match self {
            StyleAttr::Fill => "fill",
            StyleAttr::Stroke => "stroke",
            StyleAttr::StrokeWidth => "stroke_width",
            StyleAttr::Opacity => "opacity",
            StyleAttr::Rx => "rx",
            StyleAttr::Ry => "ry",
        }
    }

    pub fn from_name(s: &str) -> Option<StyleAttr> {
        StyleAttr::ALL.into_iter().find(|a| a.as_str() == s)
    }

    pub fn is_color(self) -> bool {
        matches!(self, StyleAttr::Fill | StyleAttr::Stroke)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonLayoutSpecification {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fill: Option<NonLayoutAttribute>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stroke: Option<NonLayoutAttribute>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stroke_width: Option<NonLayoutAttribute>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opacity: Option<NonLayoutAttribute>,
    #[serde(default, deserialize_with = "de_line_type", skip_serializing_if = "Option::is_none")]
    pub line_type: Option<LineType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rx: Option<NonLayoutAttribute>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ry: Option<NonLayoutAttribute>,
}

impl NonLayoutSpecification {
    pub fn get(&self, attr: StyleAttr) -> Option<&NonLayoutAttribute> {
        match attr {
            StyleAttr::Fill => self.fill.as_ref(),
            StyleAttr::Stroke => self.stroke.as_ref(),
            StyleAttr::StrokeWidth => self.stroke_width.as_ref(),
            StyleAttr::Opacity => self.opacity.as_ref(),
            StyleAttr::Rx => self.rx.as_ref(),
            StyleAttr::Ry => self.ry.as_ref(),
        }
    }

    pub fn slot_mut(&mut self, attr: StyleAttr) -> &mut Option<NonLayoutAttribute> {
        match attr {
            StyleAttr::Fill => &mut self.fill,
            StyleAttr::Stroke => &mut self.stroke,
            StyleAttr::StrokeWidth => &mut self.stroke_width,
            StyleAttr::Opacity => &mut self.opacity,
            StyleAttr::Rx => &mut self.rx,
            StyleAttr::Ry => &mut self.ry,
        }
    }

    pub fn with(mut self, attr: StyleAttr, enc: NonLayoutAttribute) -> Self {
        *self.slot_mut(attr) = Some(enc);
        self
    }

    pub fn attrs(&self) -> impl Iterator<Item = (StyleAttr, &NonLayoutAttribute)> {
        StyleAttr::ALL.into_iter().filter_map(move |a| self.get(a).map(|e| (a, e)))
    }
}

/// The data specification of a leaf container (all four parts) or of a
/// template container (data structure and layout only).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpecification {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mark_specification: Option<MarkSpecification>,
    pub data_structure: DataStructure,
    pub layout_specification: LayoutSpecification,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub non_layout_specification: Option<NonLayoutSpecification>,
}

impl DataSpecification {
    pub fn leaf(
        mark: MarkSpecification,
        data_structure: DataStructure,
        layout: LayoutSpecification,
        style: NonLayoutSpecification,
    ) -> Self {
        DataSpecification {
            mark_specification: Some(mark),
            data_structure,
            layout_specification: layout,
            non_layout_specification: Some(style),
        }
    }

    pub fn template(data_structure: DataStructure, layout: LayoutSpecification) -> Self {
        DataSpecification {
            mark_specification: None,
            data_structure,
            layout_specification: layout,
            non_layout_specification: None,
        }
    }

    pub fn is_template_spec(&self) -> bool {
        self.mark_specification.is_none() && self.non_layout_specification.is_none()
    }

    pub fn link_type(&self) -> LinkMarkType {
        self.mark_specification.as_ref().map_or(LinkMarkType::NoLink, |m| m.link_mark_type)
    }
}
