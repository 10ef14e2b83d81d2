use std::path::PathBuf;

use proptest::prelude::*;
use revis_core::dsl::{
    add_subcontainer, canonicalize, duplicate_container, edit_frame, parse_document, remove_container, serialize,
    set_spec_field, to_value, validate, ContainerId, ContainerNode, CoordinateFrame, DslDocument, MarkType, ScopedId,
    Severity,
};
use revis_core::error::EditError;
use serde_json::json;

fn corpus_files() -> Vec<PathBuf> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let mut out = Vec::new();
    for kind in ["basic", "composite"] {
        for e in std::fs::read_dir(root.join(kind)).unwrap() {
            out.push(e.unwrap().path());
        }
    }
    out.sort();
    out
}

fn load(name: &str) -> DslDocument {
    let p = corpus_files().into_iter().find(|p| p.to_string_lossy().contains(name)).unwrap();
    parse_document(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn id(s: &str) -> ContainerId {
    ContainerId::parse(s).unwrap()
}

#[test]
fn corpus_round_trips_byte_for_byte() {
    let files = corpus_files();
    assert_eq!(files.len(), 40);
    for p in files {
        let text = std::fs::read_to_string(&p).unwrap();
        let doc = parse_document(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        let report = validate(&doc);
        assert!(report.is_clean(), "{}: {:?}", p.display(), report.issues);
        let out = serialize(&doc);
        assert_eq!(out, text, "{}", p.display());
        assert_eq!(serialize(&parse_document(&out).unwrap()), out);
    }
}

#[test]
fn canonical_form_is_idempotent_on_reordered_input() {
    let text = std::fs::read_to_string(&corpus_files()[0]).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    // Reverse the key order of every object.
    fn rev(v: &serde_json::Value) -> serde_json::Value {
        match v {
            serde_json::Value::Object(m) => {
                let mut out = serde_json::Map::new();
                for (k, x) in m.iter().rev() {
                    out.insert(k.clone(), rev(x));
                }
                serde_json::Value::Object(out)
            }
            serde_json::Value::Array(a) => serde_json::Value::Array(a.iter().map(rev).collect()),
            other => other.clone(),
        }
    }
    let shuffled = serde_json::to_string(&rev(&v)).unwrap();
    assert_ne!(shuffled, text);
    assert_eq!(canonicalize(&shuffled).unwrap(), text);
}

#[test]
fn parse_errors_carry_a_path() {
    let mut v = to_value(&load("01-simple-bar"));
    v["data_specification"]["0"]["mark_specification"]["mark_type"] = json!("hexagon");
    let e = parse_document(&v.to_string()).unwrap_err();
    assert!(e.to_string().contains("mark_type"), "{e}");
    assert!(parse_document("[1, 2]").is_err());
    assert!(parse_document("").is_err());
}

#[test]
fn frame_kind_must_match_the_layout_dimensions() {
    let mut v = to_value(&load("06-opinion-rings"));
    v["components"][0]["coordinate"] = json!("cartesian");
    v["components"][0]["coordinate_system"] = json!({"x1": 0, "y1": 0, "x2": 10, "y2": 10});
    let doc = parse_document(&v.to_string()).unwrap();
    let report = validate(&doc);
    assert!(!report.is_clean(), "polar layout under a cartesian frame");
    assert!(report.errors().all(|i| i.container.to_string() == "0-0"), "{:?}", report.issues);
    let rings = load("20-radar-ring");
    let polar_parent = rings.containers().into_iter().find(|n| n.frame.is_polar() && !n.is_leaf);
    if let Some(p) = polar_parent {
        let child = &p.children[0];
        let e = edit_frame(&rings, &child.id, CoordinateFrame::cartesian(0.0, 0.0, 50.0, 50.0)).unwrap_err();
        assert!(matches!(e, EditError::PolarNesting(_) | EditError::KindChange(_)), "{e:?}");
    }
}

#[test]
fn missing_spec_is_an_error() {
    let mut doc = load("01-simple-bar");
    doc.data_specifications.clear();
    let report = validate(&doc);
    assert!(!report.is_clean());
    assert!(report.issues.iter().any(|i| i.severity == Severity::Error && i.rule == "spec.missing"));
}

#[test]
fn half_ring_edit_changes_only_the_frame() {
    let doc = load("06-opinion-rings");
    let n = doc.find(&id("0-1")).unwrap();
    let CoordinateFrame::Polar(mut f) = n.frame else { panic!() };
    f.a1 = 180.0;
    let out = edit_frame(&doc, &id("0-1"), CoordinateFrame::Polar(f)).unwrap();
    assert_eq!(out.find(&id("0-1")).unwrap().frame, CoordinateFrame::Polar(f));
    assert_eq!(out.data_specifications, doc.data_specifications);
    assert!(validate(&out).is_clean());
    let bad = CoordinateFrame::polar(0.5, 0.5, 0.35, 0.65, 200.0, 100.0);
    assert!(matches!(edit_frame(&doc, &id("0-1"), bad), Err(EditError::InvalidFrame(_))));
    assert!(edit_frame(&doc, &id("0-9"), CoordinateFrame::Polar(f)).is_err());
}

#[test]
fn duplicate_then_remove_restores_the_document() {
    let doc = load("07-linked-panels");
    let (dup, new_id) = duplicate_container(&doc, &id("0-a"), doc.find(&id("0-a")).unwrap().frame).unwrap();
    assert_eq!(new_id, id("0-b"));
    assert!(dup.spec(&id("0-b-0")).is_some());
    assert!(validate(&dup).is_clean(), "{:?}", validate(&dup).issues);
    let back = remove_container(&dup, &new_id).unwrap();
    assert_eq!(serialize(&back), serialize(&doc));
    assert!(matches!(remove_container(&doc, &ContainerId::root()), Err(EditError::Root(_))));
}

#[test]
fn add_subcontainer_checks_its_parent() {
    let doc = load("06-opinion-rings");
    let leaf = ContainerNode::leaf(id("0-0-0"), CoordinateFrame::polar(0.5, 0.5, 0.0, 1.0, 0.0, 360.0), MarkType::Arc);
    assert!(matches!(add_subcontainer(&doc, &id("0-0"), leaf, None), Err(EditError::LeafParent(_))));
    let stray = ContainerNode::leaf(id("0-1-0"), CoordinateFrame::cartesian(0.0, 0.0, 1.0, 1.0), MarkType::Arc);
    assert!(matches!(add_subcontainer(&doc, &ContainerId::root(), stray, None), Err(EditError::NotAChild { .. })));
}

#[test]
fn spec_field_edits_are_checked() {
    let doc = load("07-linked-panels");
    let out = set_spec_field(&doc, &id("0-a"), "data_structure.data_size.primary.number", json!(4)).unwrap();
    assert_eq!(out.spec(&id("0-a")).unwrap().data_structure.item_count(), 16);
    assert!(set_spec_field(&doc, &id("0-a"), "data_structure.data_type", json!("3D_cube")).is_err());
    assert!(set_spec_field(&doc, &id("0-7"), "data_structure.data_type", json!("1D_list")).is_err());
}

fn arb_id() -> impl Strategy<Value = String> {
    prop::collection::vec(prop_oneof![(0u32..30).prop_map(|n| n.to_string()), (b'a'..=b'e').prop_map(|c| (c as char).to_string())], 0..6)
        .prop_map(|segs| std::iter::once("0".to_string()).chain(segs).collect::<Vec<_>>().join("-"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn ids_round_trip(s in arb_id()) {
        let parsed = ContainerId::parse(&s).unwrap();
        prop_assert_eq!(parsed.to_string(), s.clone());
        if let Some(p) = parsed.parent() {
            prop_assert!(p.is_parent_of(&parsed));
            prop_assert!(p.contains(&parsed));
            prop_assert_eq!(p.depth() + 1, parsed.depth());
        }
        prop_assert_eq!(parsed.ancestors().count(), parsed.depth());
    }

    #[test]
    fn scoped_ids_round_trip(s in arb_id(), idx in prop::collection::vec(0usize..9, 0..6)) {
        let id = ContainerId::parse(&s).unwrap();
        let templates = id.segments().iter().filter(|g| matches!(g, revis_core::dsl::Segment::Template(_))).count();
        let n = idx.len().min(templates);
        let scoped = ScopedId { id, instances: idx[..n].to_vec() };
        let text = scoped.to_string();
        prop_assert_eq!(ScopedId::parse(&text).unwrap(), scoped);
    }

    #[test]
    fn garbage_ids_are_rejected(s in "[0-9a-z\\-\\[\\]]{0,12}") {
        if let Ok(id) = ContainerId::parse(&s) {
            prop_assert_eq!(id.to_string(), s);
        }
    }
}
