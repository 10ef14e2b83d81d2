use std::path::PathBuf;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use revis_core::datagen::{
    apply_user_data, container_seed, generate_link_assignments, generate_table, lerp_color, link_universe, mock_table,
    resolve_attribute, LinkRef, UserTable, VALUE_RANGE,
};
use revis_core::dsl::{parse_document, spec_from_value, AttrValue, ContainerId, DslDocument, NonLayoutAttribute, StyleAttr};
use revis_core::render::{render_scene, Geometry, Overrides, RenderOptions};
use serde_json::json;

fn load(name: &str) -> DslDocument {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    for kind in ["basic", "composite"] {
        for e in std::fs::read_dir(root.join(kind)).unwrap() {
            let p = e.unwrap().path();
            if p.to_string_lossy().contains(name) {
                return parse_document(&std::fs::read_to_string(p).unwrap()).unwrap();
            }
        }
    }
    panic!("{name}")
}

fn id(s: &str) -> ContainerId {
    ContainerId::parse(s).unwrap()
}

fn attr(v: serde_json::Value) -> NonLayoutAttribute {
    serde_json::from_value(v).unwrap()
}

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(1)
}

#[test]
fn eighteen_bars_make_eighteen_rows() {
    let doc = load("01-simple-bar");
    let doc = revis_core::dsl::set_spec_field(&doc, &id("0"), "data_structure.data_size.primary.number", json!(18)).unwrap();
    let t = mock_table(&doc, &id("0"), 7).unwrap();
    assert_eq!(t.len(), 18);
    assert!(t.rows.iter().all(|r| (VALUE_RANGE.0..=VALUE_RANGE.1).contains(&r.value)));
    assert_eq!(t, mock_table(&doc, &id("0"), 7).unwrap());
    assert_ne!(t, mock_table(&doc, &id("0"), 8).unwrap());
}

#[test]
fn ragged_lists_keep_their_group_sizes() {
    let spec = spec_from_value(json!({
        "data_structure": {"data_type": "2D_list", "data_size": {
            "primary": {"number": 3, "dimension": "x", "explanation": ""},
            "secondary": {"number": [2, 3, 5], "dimension": "y", "explanation": ""}}},
        "layout_specification": {}
    }))
    .unwrap();
    let t = generate_table(&spec, 3);
    assert_eq!(t.group_sizes(), vec![2, 3, 5]);
    let shape: Vec<(usize, usize)> = t.rows.iter().map(|r| (r.group_index, r.item_index)).collect();
    let want: Vec<(usize, usize)> = [2, 3, 5].iter().enumerate().flat_map(|(g, n)| (0..*n).map(move |i| (g, i))).collect();
    assert_eq!(shape, want);
}

#[test]
fn scales_resolve_as_documented() {
    let fix = attr(json!({"scale": "fix", "fix": "#FF0000"}));
    for k in 0..5 {
        assert_eq!(resolve_attribute(&fix, k, k, 0.3, &mut rng()), AttrValue::Text("#FF0000".into()));
    }
    let lin = attr(json!({"scale": "linear", "linear": ["#000000", "#FFFFFF"]}));
    assert_eq!(resolve_attribute(&lin, 0, 0, 0.5, &mut rng()), AttrValue::Text("#808080".into()));
    let num = attr(json!({"scale": "linear", "linear": [1, 3]}));
    assert_eq!(resolve_attribute(&num, 0, 0, 0.25, &mut rng()), AttrValue::Number(1.5));
    let ord = attr(json!({"scale": "ordinal_secondary", "options": ["a", "b", "c"]}));
    assert_eq!(resolve_attribute(&ord, 9, 4, 0.0, &mut rng()), AttrValue::Text("b".into()));
    let ordp = attr(json!({"scale": "ordinal_primary", "options": ["a", "b", "c"]}));
    assert_eq!(resolve_attribute(&ordp, 5, 0, 0.0, &mut rng()), AttrValue::Text("c".into()));
    let cat = attr(json!({"scale": "categorical", "options": ["a", "b"]}));
    let v = resolve_attribute(&cat, 0, 0, 0.0, &mut rng());
    assert!(matches!(v, AttrValue::Text(ref s) if s == "a" || s == "b"));
}

fn channels(hex: &str) -> [u8; 3] {
    let v = u32::from_str_radix(&hex[1..], 16).unwrap();
    [(v >> 16) as u8, (v >> 8) as u8, v as u8]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn linear_colors_stay_in_the_hull(a in any::<[u8; 3]>(), b in any::<[u8; 3]>(), t in 0.0..=1.0f64) {
        let hex = |c: [u8; 3]| format!("#{:02X}{:02X}{:02X}", c[0], c[1], c[2]);
        let out = channels(&lerp_color(&hex(a), &hex(b), t).unwrap());
        for k in 0..3 {
            prop_assert!(out[k] >= a[k].min(b[k]) && out[k] <= a[k].max(b[k]));
            // Component oracle.
            let want = (a[k] as f64 + t * (b[k] as f64 - a[k] as f64)).round() as u8;
            prop_assert_eq!(out[k], want);
        }
    }

    #[test]
    fn row_count_depends_on_the_structure_only(primary in 1u32..12, secondary in 1u32..9, seed in any::<u64>()) {
        let spec = spec_from_value(json!({
            "data_structure": {"data_type": "2D_matrix", "data_size": {
                "primary": {"number": primary, "dimension": "x", "explanation": ""},
                "secondary": {"number": secondary, "dimension": "y", "explanation": ""}}},
            "layout_specification": {},
            "non_layout_specification": {"fill": {"scale": "categorical", "options": ["#111111", "#222222"]}}
        })).unwrap();
        let t = generate_table(&spec, seed);
        prop_assert_eq!(t.len(), (primary * secondary) as usize);
        prop_assert!(t.rows.iter().all(|r| r.style(StyleAttr::Fill).is_some()));
    }
}

#[test]
fn container_streams_are_independent() {
    let a = container_seed(1, &id("0-1"));
    let b = container_seed(1, &id("0-2"));
    assert_ne!(a, b);
    assert_eq!(a, container_seed(1, &id("0-1")));
    // Editing one container leaves the other's table alone.
    let doc = load("06-opinion-rings");
    let before = mock_table(&doc, &id("0-2"), 5).unwrap();
    let edited = revis_core::dsl::set_spec_field(&doc, &id("0-1"), "data_structure.data_size.primary.number", json!(9)).unwrap();
    assert_eq!(mock_table(&edited, &id("0-2"), 5).unwrap(), before);
}

#[test]
fn no_links_for_link_number_zero() {
    let doc = load("07-linked-panels");
    let spec = doc.spec(&id("0-0")).unwrap();
    let mut mark = spec.mark_specification.clone().unwrap();
    mark.link_number = Some(0);
    let sources = link_universe(&doc, &id("0-a"));
    let targets = link_universe(&doc, &id("0-4"));
    assert!(generate_link_assignments(&mark, &spec.layout_specification, &sources, &targets, 1).unwrap().is_empty());
}

#[test]
fn panel_links_all_end_at_the_circle() {
    let doc = load("07-linked-panels");
    let spec = doc.spec(&id("0-0")).unwrap();
    let mark = spec.mark_specification.as_ref().unwrap();
    let sources = link_universe(&doc, &id("0-a"));
    assert_eq!(sources.len(), 12);
    let targets = link_universe(&doc, &id("0-4"));
    let pairs = generate_link_assignments(mark, &spec.layout_specification, &sources, &targets, 11).unwrap();
    assert_eq!(pairs.len(), 5);
    assert!(pairs.iter().all(|(s, t)| s.container() == &id("0-a") && t.to_string() == "0-4[0]"));
    assert_eq!(pairs, generate_link_assignments(mark, &spec.layout_specification, &sources, &targets, 11).unwrap());
}

#[test]
fn user_values_drive_bar_heights_in_rank_order() {
    let doc = load("01-simple-bar");
    let numbers: Vec<f64> = (0..12).map(|i| ((i * 7) % 12) as f64 * 3.0 + 10.0).collect();
    let csv = std::iter::once("value".to_string()).chain(numbers.iter().map(|n| n.to_string())).collect::<Vec<_>>().join("\n");
    let user = UserTable::parse(&csv).unwrap();
    let (doc2, table) = apply_user_data(&doc, &id("0"), &user, 0).unwrap();
    assert_eq!(doc2, doc);
    let lo = numbers.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = numbers.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for (r, n) in table.rows.iter().zip(&numbers) {
        assert!((r.value - (n - lo) / (hi - lo)).abs() < 1e-12);
    }
    let overrides: Overrides = [(revis_core::dsl::ScopedId::unscoped(id("0")), table)].into_iter().collect();
    let scene = render_scene(&doc, &RenderOptions::default(), &overrides).unwrap();
    let heights: Vec<f64> = scene
        .marks()
        .map(|m| match m.geometry {
            Geometry::Rect { h, .. } => h,
            _ => panic!(),
        })
        .collect();
    let rank = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|a, b| v[*a].total_cmp(&v[*b]));
        idx
    };
    assert_eq!(rank(&heights), rank(&numbers));
}

#[test]
fn fill_only_table_keeps_the_geometry() {
    let doc = load("01-simple-bar");
    let csv = std::iter::once("fill".to_string()).chain((0..12).map(|_| "#123456".to_string())).collect::<Vec<_>>().join("\n");
    let (_, table) = apply_user_data(&doc, &id("0"), &UserTable::parse(&csv).unwrap(), 0).unwrap();
    let overrides: Overrides = [(revis_core::dsl::ScopedId::unscoped(id("0")), table)].into_iter().collect();
    let base = render_scene(&doc, &RenderOptions::default(), &Overrides::new()).unwrap();
    let user = render_scene(&doc, &RenderOptions::default(), &overrides).unwrap();
    for (a, b) in base.marks().zip(user.marks()) {
        assert_eq!(a.geometry, b.geometry);
        assert_eq!(b.style.fill.as_deref(), Some("#123456"));
    }
}

#[test]
fn user_link_pairs_name_their_endpoints() {
    let doc = load("07-linked-panels");
    let rows = json!([
        {"source": "0-a[0]", "target": "0-4[0]"},
        {"source": "0-a[11]", "target": "0-4[0]"}
    ]);
    let user = UserTable::from_json(&rows).unwrap();
    let (doc2, table) = apply_user_data(&doc, &id("0-0"), &user, 0).unwrap();
    assert_eq!(doc2.spec(&id("0-0")).unwrap().mark_specification.as_ref().unwrap().link_number, Some(2));
    assert_eq!(table.rows[1].text("source"), Some("0-a[11]"));
    let bad = UserTable::from_json(&json!([{"source": "0-a[12]", "target": "0-4[0]"}])).unwrap();
    assert!(apply_user_data(&doc, &id("0-0"), &bad, 0).is_err());
    let parsed: LinkRef = "0-a[3]-0[2]".parse().unwrap();
    assert_eq!(parsed.to_string(), "0-a[3]-0[2]");
}

#[test]
fn malformed_user_tables_are_rejected() {
    assert!(UserTable::parse("height\n1").is_err());
    assert!(UserTable::parse("[1, 2]").is_err());
    let doc = load("01-simple-bar");
    let t = UserTable::parse("value\nabc").unwrap();
    assert!(apply_user_data(&doc, &id("0"), &t, 0).is_err());
    let t = UserTable::parse("fill\n#FFFFFF").unwrap();
    assert!(apply_user_data(&doc, &id("0"), &t, 0).is_err(), "fill-only table must match the row count");
}

#[test]
fn template_instances_share_one_table() {
    let doc = load("07-linked-panels");
    let scene = render_scene(&doc, &RenderOptions::default(), &Overrides::new()).unwrap();
    let per_instance: Vec<Vec<f64>> = scene
        .layers
        .iter()
        .filter(|l| l.frame.id.id == id("0-a-0"))
        .map(|l| {
            l.marks
                .iter()
                .map(|m| match m.geometry {
                    Geometry::Rect { h, .. } => (h * 1e6).round() / 1e6,
                    _ => panic!(),
                })
                .collect()
        })
        .collect();
    assert_eq!(per_instance.len(), 12);
    assert!(per_instance.windows(2).all(|w| w[0] == w[1]));
}
