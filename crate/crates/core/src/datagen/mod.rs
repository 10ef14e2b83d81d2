//! Mock data: seeded tables shaped like a container's data structure,
//! style resolution, link assignment and user data replacement.

mod links;
mod user;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::dsl::{
    AnchorDistribute, AttrValue, ContainerId, DataSpecification, DataStructure, DataType, Dimension, DslDocument,
    LinkMarkType, NonLayoutAttribute, Scale, SecondaryNumber, StyleAttr,
};
use crate::error::DataError;
use crate::layout::DatumInput;

pub use links::{attach_links, generate_link_assignments, link_universe, LinkRef};
pub use user::{apply_user_data, apply_user_tables, UserTable};

pub type Seed = u64;

/// Range of mocked values; keeps every mark visibly non-degenerate.
pub const VALUE_RANGE: (f64, f64) = (0.2, 1.0);
/// Range of mocked flexible positions; keeps anchors off the frame edges.
pub const POSITION_RANGE: (f64, f64) = (0.1, 0.9);

/// Derives an independent stream seed for one named consumer, so that
/// changing one container never perturbs another's data.
pub fn derive_seed(seed: Seed, label: &str) -> Seed {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

pub fn container_seed(seed: Seed, id: &ContainerId) -> Seed {
    derive_seed(seed, &id.to_string())
}

pub fn rng_for(seed: Seed) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One row of a table: one node mark, one control point of a link group,
/// one node-link edge or one template instance.
#[derive(Debug, Clone, PartialEq)]
pub struct MockDatum {
    pub group_index: usize,
    pub item_index: usize,
    /// Normalized value in `[0, 1]`.
    pub value: f64,
    /// Flexible positions (`x`, `y`, `radius`, `angle`), resolved styles and
    /// link endpoints (`source`, `target`).
    pub extra: BTreeMap<String, AttrValue>,
}

impl MockDatum {
    pub fn new(group_index: usize, item_index: usize, value: f64) -> Self {
        MockDatum { group_index, item_index, value, extra: BTreeMap::new() }
    }

    pub fn style(&self, attr: StyleAttr) -> Option<&AttrValue> {
        self.extra.get(attr.as_str())
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        self.extra.get(key).and_then(AttrValue::as_text)
    }

    pub fn to_input(&self) -> DatumInput {
        let mut d = DatumInput::new(self.group_index, self.item_index, self.value);
        for dim in Dimension::ALL {
            d.positions[dim.index()] = self.extra.get(dim.as_str()).and_then(AttrValue::as_number);
        }
        d
    }
}

/// Rows in group-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct MockTable {
    pub data_type: DataType,
    pub rows: Vec<MockDatum>,
}

impl MockTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = Vec::new();
        for r in &self.rows {
            if sizes.len() <= r.group_index {
                sizes.resize(r.group_index + 1, 0);
            }
            sizes[r.group_index] += 1;
        }
        sizes
    }

    pub fn groups(&self) -> Vec<Vec<&MockDatum>> {
        let mut out: Vec<Vec<&MockDatum>> = vec![Vec::new(); self.group_sizes().len()];
        for r in &self.rows {
            out[r.group_index].push(r);
        }
        out
    }

    pub fn inputs(&self) -> Vec<DatumInput> {
        self.rows.iter().map(MockDatum::to_input).collect()
    }

    /// `ds` with its counts replaced by this table's shape.
    pub fn structure_like(&self, ds: &DataStructure) -> DataStructure {
        let sizes = self.group_sizes();
        let mut out = ds.clone();
        out.data_size.primary.number = sizes.len() as u32;
        if let Some(sec) = out.data_size.secondary.as_mut() {
            if ds.data_type != DataType::List1D {
                sec.number = match ds.data_type {
                    DataType::Matrix2D if sizes.windows(2).all(|w| w[0] == w[1]) => {
                        SecondaryNumber::Scalar(sizes.first().copied().unwrap_or(0) as u32)
                    }
                    _ => SecondaryNumber::PerGroup(sizes.iter().map(|n| *n as u32).collect()),
                };
                if matches!(sec.number, SecondaryNumber::PerGroup(_)) {
                    out.data_type = DataType::List2D;
                }
            }
        }
        out
    }

    fn row_value(r: &MockDatum) -> Value {
        let mut m = Map::new();
        m.insert("value".into(), json!(r.value));
        for (k, v) in &r.extra {
            m.insert(k.clone(), serde_json::to_value(v).expect("attribute values serialize"));
        }
        Value::Object(m)
    }

    /// The exemplar upload format: an array of row objects, nested per
    /// group for 2D structures.
    pub fn to_json(&self) -> Value {
        match self.data_type {
            DataType::List1D => Value::Array(self.rows.iter().map(Self::row_value).collect()),
            _ => Value::Array(
                self.groups()
                    .into_iter()
                    .map(|g| Value::Array(g.into_iter().map(Self::row_value).collect()))
                    .collect(),
            ),
        }
    }

    /// CSV with a header. 2D tables carry `group` and `item` columns.
    pub fn to_csv(&self) -> String {
        let mut keys: Vec<&String> = Vec::new();
        for r in &self.rows {
            for k in r.extra.keys() {
                if !keys.contains(&k) {
                    keys.push(k);
                }
            }
        }
        keys.sort();
        let grouped = self.data_type != DataType::List1D;
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<&str> = Vec::new();
        if grouped {
            header.extend(["group", "item"]);
        }
        header.push("value");
        header.extend(keys.iter().map(|k| k.as_str()));
        w.write_record(&header).expect("in-memory write");
        for r in &self.rows {
            let mut rec: Vec<String> = Vec::new();
            if grouped {
                rec.push(r.group_index.to_string());
                rec.push(r.item_index.to_string());
            }
            rec.push(r.value.to_string());
            for k in &keys {
                rec.push(r.extra.get(*k).map(|v| v.to_string()).unwrap_or_default());
            }
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

fn parse_hex(s: &str) -> Option<[u8; 3]> {
    let h = s.strip_prefix('#')?;
    if h.len() != 6 {
        return None;
    }
    let v = u32::from_str_radix(h, 16).ok()?;
    Some([(v >> 16) as u8, (v >> 8) as u8, v as u8])
}

pub fn hex_color(c: [u8; 3]) -> String {
    format!("#{:02X}{:02X}{:02X}", c[0], c[1], c[2])
}

/// Per-channel RGB interpolation, rounded to the nearest integer.
pub fn lerp_color(lo: &str, hi: &str, t: f64) -> Option<String> {
    let (a, b) = (parse_hex(lo)?, parse_hex(hi)?);
    let mut out = [0u8; 3];
    for k in 0..3 {
        let v = a[k] as f64 + t * (b[k] as f64 - a[k] as f64);
        out[k] = v.round().clamp(0.0, 255.0) as u8;
    }
    Some(hex_color(out))
}

/// Resolves one style attribute for one datum. `categorical` draws from
/// `rng`; every other scale is a pure function of the indices and value.
pub fn resolve_attribute<R: Rng + ?Sized>(
    attr: &NonLayoutAttribute,
    group_index: usize,
    item_index: usize,
    value: f64,
    rng: &mut R,
) -> AttrValue {
    let pick = |opts: &Option<Vec<AttrValue>>, i: usize| match opts {
        Some(o) if !o.is_empty() => o[i % o.len()].clone(),
        _ => AttrValue::Number(0.0),
    };
    match attr.scale {
        Scale::Fix => attr.fix.clone().unwrap_or(AttrValue::Number(0.0)),
        Scale::Linear => match &attr.linear {
            Some([AttrValue::Number(a), AttrValue::Number(b)]) => AttrValue::Number(a + value * (b - a)),
            Some([AttrValue::Text(a), AttrValue::Text(b)]) => {
                lerp_color(a, b, value).map(AttrValue::Text).unwrap_or_else(|| AttrValue::Text(a.clone()))
            }
            Some([a, _]) => a.clone(),
            None => AttrValue::Number(0.0),
        },
        Scale::OrdinalPrimary => pick(&attr.options, group_index),
        Scale::OrdinalSecondary => pick(&attr.options, item_index),
        Scale::Categorical => {
            let n = attr.options.as_ref().map_or(0, Vec::len);
            if n == 0 {
                return AttrValue::Number(0.0);
            }
            pick(&attr.options, rng.random_range(0..n))
        }
    }
}

/// Dimensions whose anchors are decided by data and therefore need a
/// position column.
fn flexible_dims(spec: &DataSpecification) -> Vec<Dimension> {
    spec.layout_specification
        .dims()
        .filter(|(_, s)| !s.stacking && s.anchor_distribute == AnchorDistribute::Flexible)
        .map(|(d, _)| d)
        .collect()
}

fn random_in<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Resolves the style columns of one row from the specification.
pub fn resolve_styles<R: Rng + ?Sized>(spec: &DataSpecification, row: &mut MockDatum, rng: &mut R) {
    if let Some(style) = &spec.non_layout_specification {
        for (attr, enc) in style.attrs() {
            let v = resolve_attribute(enc, row.group_index, row.item_index, row.value, rng);
            row.extra.insert(attr.as_str().to_string(), v);
        }
    }
}

/// Row shape of a specification: the data structure's groups, or
/// `link_number` single-row groups for node-link marks.
pub fn table_shape(spec: &DataSpecification) -> (DataType, Vec<usize>) {
    match &spec.mark_specification {
        Some(m) if m.link_mark_type == LinkMarkType::NodeLink => {
            (DataType::List1D, vec![1; m.link_number.unwrap_or(0) as usize])
        }
        _ => (spec.data_structure.data_type, spec.data_structure.group_sizes()),
    }
}

/// A seeded table shaped like the specification. For every row the draws
/// are, in order: the value, the position of each flexible dimension, and
/// each categorical style.
pub fn generate_table(spec: &DataSpecification, seed: Seed) -> MockTable {
    let mut rng = rng_for(seed);
    let (data_type, sizes) = table_shape(spec);
    let flex = flexible_dims(spec);
    let mut rows = Vec::new();
    for (g, n) in sizes.into_iter().enumerate() {
        for i in 0..n {
            let value = random_in(&mut rng, VALUE_RANGE);
            let mut row = MockDatum::new(g, i, value);
            for d in &flex {
                row.extra.insert(d.as_str().to_string(), AttrValue::Number(random_in(&mut rng, POSITION_RANGE)));
            }
            resolve_styles(spec, &mut row, &mut rng);
            rows.push(row);
        }
    }
    MockTable { data_type, rows }
}

/// The mock table of container `id`: [`generate_table`] with node-link
/// endpoints attached.
pub fn mock_table(doc: &DslDocument, id: &ContainerId, seed: Seed) -> Result<MockTable, DataError> {
    let spec = doc.spec(id).ok_or_else(|| DataError::NoSpec(id.clone()))?;
    let cseed = container_seed(seed, id);
    let mut table = generate_table(spec, cseed);
    if let Some(mark) = &spec.mark_specification {
        attach_links(doc, mark, &spec.layout_specification, &mut table, derive_seed(cseed, "links"))?;
    }
    Ok(table)
}
