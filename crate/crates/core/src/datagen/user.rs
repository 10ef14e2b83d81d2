//! User-supplied tables replacing mocked data.

use std::collections::BTreeMap;

use serde_json::Value;

use super::{attach_links, container_seed, derive_seed, generate_table, link_universe, resolve_attribute, rng_for, LinkRef, MockDatum, MockTable, Seed};
use crate::dsl::{AttrValue, ContainerId, DataType, Dimension, DslDocument, LinkMarkType, Scale, ScopedId, StyleAttr};
use crate::error::DataError;

const INDEX_COLUMNS: [&str; 2] = ["group", "item"];
const LINK_COLUMNS: [&str; 2] = ["source", "target"];

fn known_column(name: &str) -> bool {
    name == "value"
        || INDEX_COLUMNS.contains(&name)
        || LINK_COLUMNS.contains(&name)
        || Dimension::from_name(name).is_some()
        || StyleAttr::from_name(name).is_some()
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserRow {
    pub group: Option<usize>,
    pub item: Option<usize>,
    pub cells: BTreeMap<String, AttrValue>,
}

/// Rows uploaded by a user, as JSON (an array of row objects, optionally
/// nested per group) or CSV with a header.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct UserTable {
    pub rows: Vec<UserRow>,
}

fn index_of(v: &AttrValue, col: &str) -> Result<usize, DataError> {
    match v {
        AttrValue::Number(n) if *n >= 0.0 && n.fract() == 0.0 => Ok(*n as usize),
        _ => Err(DataError::Malformed(format!("`{col}` must be a non-negative integer, found `{v}`"))),
    }
}

impl UserTable {
    /// Sniffs JSON (leading `[` or `{`) or CSV.
    pub fn parse(text: &str) -> Result<UserTable, DataError> {
        let t = text.trim_start();
        if t.starts_with('[') || t.starts_with('{') {
            let v: Value = serde_json::from_str(t).map_err(|e| DataError::Malformed(e.to_string()))?;
            UserTable::from_json(&v)
        } else {
            UserTable::from_csv(text)
        }
    }

    pub fn from_json(v: &Value) -> Result<UserTable, DataError> {
        let arr = v.as_array().ok_or_else(|| DataError::Malformed("expected an array of rows".into()))?;
        let mut rows = Vec::new();
        let nested = arr.iter().any(Value::is_array);
        for (g, entry) in arr.iter().enumerate() {
            if nested {
                let group = entry
                    .as_array()
                    .ok_or_else(|| DataError::Malformed("mixed grouped and flat rows".into()))?;
                for (i, r) in group.iter().enumerate() {
                    let mut row = Self::json_row(r)?;
                    row.group.get_or_insert(g);
                    row.item.get_or_insert(i);
                    rows.push(row);
                }
            } else {
                rows.push(Self::json_row(entry)?);
            }
        }
        UserTable::finish(rows)
    }

    fn json_row(v: &Value) -> Result<UserRow, DataError> {
        let obj = v.as_object().ok_or_else(|| DataError::Malformed("each row must be an object".into()))?;
        let mut row = UserRow { group: None, item: None, cells: BTreeMap::new() };
        for (k, v) in obj {
            if !known_column(k) {
                return Err(DataError::UnknownColumn(k.clone()));
            }
            let cell = match v {
                Value::Null => continue,
                Value::Number(n) => AttrValue::Number(n.as_f64().unwrap_or(f64::NAN)),
                Value::String(s) => AttrValue::Text(s.clone()),
                other => return Err(DataError::Malformed(format!("`{k}` must be a number or a string, found {other}"))),
            };
            match k.as_str() {
                "group" => row.group = Some(index_of(&cell, k)?),
                "item" => row.item = Some(index_of(&cell, k)?),
                _ => {
                    row.cells.insert(k.clone(), cell);
                }
            }
        }
        Ok(row)
    }

    pub fn from_csv(text: &str) -> Result<UserTable, DataError> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let header: Vec<String> = r
            .headers()
            .map_err(|e| DataError::Malformed(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        if let Some(bad) = header.iter().find(|h| !known_column(h)) {
            return Err(DataError::UnknownColumn(bad.clone()));
        }
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| DataError::Malformed(e.to_string()))?;
            let mut row = UserRow { group: None, item: None, cells: BTreeMap::new() };
            for (k, cell) in header.iter().zip(rec.iter()) {
                if cell.is_empty() {
                    continue;
                }
                let v = match cell.parse::<f64>() {
                    Ok(n) => AttrValue::Number(n),
                    Err(_) => AttrValue::Text(cell.to_string()),
                };
                match k.as_str() {
                    "group" => row.group = Some(index_of(&v, k)?),
                    "item" => row.item = Some(index_of(&v, k)?),
                    _ => {
                        row.cells.insert(k.clone(), v);
                    }
                }
            }
            rows.push(row);
        }
        UserTable::finish(rows)
    }

    fn finish(rows: Vec<UserRow>) -> Result<UserTable, DataError> {
        let with_group = rows.iter().filter(|r| r.group.is_some()).count();
        if with_group != 0 && with_group != rows.len() {
            return Err(DataError::Malformed("either every row or no row has a group index".into()));
        }
        Ok(UserTable { rows })
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.rows.iter().any(|r| r.cells.contains_key(name))
    }
}

fn unit_or_normalized(col: Vec<f64>) -> Vec<f64> {
    if col.iter().all(|v| (0.0..=1.0).contains(v)) {
        col
    } else {
        normalize(&col)
    }
}

/// Min-max normalization into `[0, 1]`; a constant column maps to 1.
fn normalize(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= 0.0 {
        return vec![1.0; values.len()];
    }
    values.iter().map(|v| (v - lo) / (hi - lo)).collect()
}

fn numeric_column(rows: &[UserRow], col: &str) -> Result<Option<Vec<f64>>, DataError> {
    let present = rows.iter().filter(|r| r.cells.contains_key(col)).count();
    if present == 0 {
        return Ok(None);
    }
    if present != rows.len() {
        return Err(DataError::Malformed(format!("column `{col}` has missing cells")));
    }
    rows.iter()
        .map(|r| match &r.cells[col] {
            AttrValue::Number(n) if n.is_finite() => Ok(*n),
            other => Err(DataError::Malformed(format!("`{col}` must be numeric, found `{other}`"))),
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
}

/// Replaces the mocked table of container `id` with user rows.
///
/// Numeric columns (`value` and positions) are kept when already within
/// `[0, 1]` and min-max normalized otherwise, so a mock table fed back
/// reproduces its render; style columns are used as given. Columns that are not supplied keep their mocked values, so a
/// table holding only `fill` changes colors and nothing else. When the row
/// count or grouping differs from the data structure, the structure is
/// updated (and returned in the new document).
pub fn apply_user_data(
    doc: &DslDocument,
    id: &ContainerId,
    user: &UserTable,
    seed: Seed,
) -> Result<(DslDocument, MockTable), DataError> {
    doc.find(id).ok_or_else(|| DataError::NotFound(id.clone()))?;
    let spec = doc.spec(id).ok_or_else(|| DataError::NoSpec(id.clone()))?.clone();
    let is_node_link = spec.link_type() == LinkMarkType::NodeLink;
    let rows = &user.rows;
    if rows.is_empty() {
        return Err(DataError::Shape("the table has no rows".into()));
    }
    let cseed = container_seed(seed, id);
    let mock = generate_table(&spec, cseed);

    // Shape of the uploaded rows as (group, item) pairs in table order.
    let shape: Vec<(usize, usize)> = if rows[0].group.is_some() {
        let mut counters: BTreeMap<usize, usize> = BTreeMap::new();
        let mut pairs: Vec<(usize, usize)> = rows
            .iter()
            .map(|r| {
                let g = r.group.expect("checked");
                let c = counters.entry(g).or_insert(0);
                let i = r.item.unwrap_or(*c);
                *c += 1;
                (g, i)
            })
            .collect();
        let groups = counters.len();
        if counters.keys().copied().ne(0..groups) {
            return Err(DataError::Shape("group indices must be 0, 1, 2, ... without gaps".into()));
        }
        let mut sorted = pairs.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != pairs.len() {
            return Err(DataError::Shape("duplicate (group, item) pair".into()));
        }
        for (g, n) in &counters {
            if sorted.iter().filter(|(sg, _)| sg == g).map(|(_, i)| *i).ne(0..*n) {
                return Err(DataError::Shape(format!("item indices of group {g} must be 0, 1, 2, ...")));
            }
        }
        if spec.data_structure.data_type == DataType::List1D && counters.values().any(|n| *n != 1) {
            return Err(DataError::Shape("a 1D_list container takes one row per group".into()));
        }
        pairs.sort();
        pairs
    } else if rows.len() == mock.len() {
        mock.rows.iter().map(|r| (r.group_index, r.item_index)).collect()
    } else if is_node_link || spec.data_structure.data_type == DataType::List1D {
        (0..rows.len()).map(|g| (g, 0)).collect()
    } else {
        return Err(DataError::Shape(format!(
            "{} rows without group indices cannot be arranged into the container's groups",
            rows.len()
        )));
    };
    // Rows in table order, matched to the shape.
    let mut order: Vec<usize> = (0..rows.len()).collect();
    if rows[0].group.is_some() {
        let mut counters: BTreeMap<usize, usize> = BTreeMap::new();
        let keyed: Vec<(usize, usize)> = rows
            .iter()
            .map(|r| {
                let g = r.group.expect("checked");
                let c = counters.entry(g).or_insert(0);
                let i = r.item.unwrap_or(*c);
                *c += 1;
                (g, i)
            })
            .collect();
        order.sort_by_key(|k| keyed[*k]);
    }
    let rows: Vec<&UserRow> = order.iter().map(|k| &rows[*k]).collect();
    let owned: Vec<UserRow> = rows.iter().map(|r| (*r).clone()).collect();

    let mock_shape: Vec<(usize, usize)> = mock.rows.iter().map(|r| (r.group_index, r.item_index)).collect();
    let values = numeric_column(&owned, "value")?;
    if values.is_none() && shape != mock_shape && !is_node_link {
        return Err(DataError::Shape("a table without a `value` column must match the existing rows".into()));
    }

    // Updated document: counts follow the table.
    let mut new_doc = doc.clone();
    let new_spec = new_doc.data_specifications.get_mut(id).expect("spec exists");
    let data_type = if is_node_link {
        if let Some(m) = new_spec.mark_specification.as_mut() {
            m.link_number = Some(shape.len() as u32);
        }
        DataType::List1D
    } else {
        let table = MockTable {
            data_type: spec.data_structure.data_type,
            rows: shape.iter().map(|(g, i)| MockDatum::new(*g, *i, 0.0)).collect(),
        };
        new_spec.data_structure = table.structure_like(&spec.data_structure);
        new_spec.data_structure.data_type
    };
    let base = generate_table(new_spec, cseed);
    let base_by_index: BTreeMap<(usize, usize), &MockDatum> =
        base.rows.iter().map(|r| ((r.group_index, r.item_index), r)).collect();

    let mut out: Vec<MockDatum> = shape
        .iter()
        .map(|(g, i)| base_by_index.get(&(*g, *i)).map(|d| (*d).clone()).unwrap_or_else(|| MockDatum::new(*g, *i, 0.5)))
        .collect();
    if let Some(v) = values {
        for (d, n) in out.iter_mut().zip(unit_or_normalized(v)) {
            d.value = n;
        }
    }
    for dim in Dimension::ALL {
        if let Some(col) = numeric_column(&owned, dim.as_str())? {
            for (d, v) in out.iter_mut().zip(unit_or_normalized(col)) {
                d.extra.insert(dim.as_str().to_string(), AttrValue::Number(v));
            }
        }
    }
    // Value-driven styles follow new values unless supplied.
    if let Some(style) = &new_spec.non_layout_specification {
        let mut rng = rng_for(cseed);
        for (attr, enc) in style.attrs() {
            if enc.scale == Scale::Linear && !user.has_column(attr.as_str()) {
                for d in out.iter_mut() {
                    let v = resolve_attribute(enc, d.group_index, d.item_index, d.value, &mut rng);
                    d.extra.insert(attr.as_str().to_string(), v);
                }
            }
        }
    }
    for attr in StyleAttr::ALL {
        let name = attr.as_str();
        for (d, r) in out.iter_mut().zip(&owned) {
            if let Some(v) = r.cells.get(name) {
                match (attr.is_color(), v) {
                    (true, AttrValue::Text(_)) | (false, AttrValue::Number(_)) => {
                        d.extra.insert(name.to_string(), v.clone());
                    }
                    _ => return Err(DataError::Malformed(format!("`{name}` has an invalid value `{v}`"))),
                }
            }
        }
    }
    for col in LINK_COLUMNS {
        if !user.has_column(col) {
            continue;
        }
        if !is_node_link {
            return Err(DataError::UnknownColumn(col.to_string()));
        }
        for (d, r) in out.iter_mut().zip(&owned) {
            let Some(v) = r.cells.get(col) else { continue };
            let text = v.to_string();
            let link: LinkRef = text.parse().map_err(|_| DataError::UnresolvedRef(text.clone()))?;
            if !link_universe(&new_doc, link.container()).contains(&link) {
                return Err(DataError::UnresolvedRef(text));
            }
            d.extra.insert(col.to_string(), AttrValue::Text(link.to_string()));
        }
    }
    let mut table = MockTable { data_type, rows: out };
    let new_spec = new_doc.spec(id).expect("spec exists");
    if let Some(mark) = &new_spec.mark_specification {
        attach_links(&new_doc, mark, &new_spec.layout_specification, &mut table, derive_seed(cseed, "links"))?;
    }
    Ok((new_doc, table))
}

/// Applies several tables in container order. Returns the document with
/// every structure update and one override per table, keyed by the
/// unscoped container id so that all template instances share it.
pub fn apply_user_tables(
    doc: &DslDocument,
    tables: &BTreeMap<ContainerId, UserTable>,
    seed: Seed,
) -> Result<(DslDocument, BTreeMap<ScopedId, MockTable>), DataError> {
    let mut doc = doc.clone();
    let mut overrides = BTreeMap::new();
    for (id, table) in tables {
        let (next, mock) = apply_user_data(&doc, id, table, seed)?;
        doc = next;
        overrides.insert(ScopedId { id: id.clone(), instances: Vec::new() }, mock);
    }
    Ok((doc, overrides))
}
