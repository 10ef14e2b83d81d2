use std::collections::BTreeMap;
use std::path::PathBuf;

use revis_core::dsl::{serialize, ContainerId, CoordinateFrame, DataSpecification};
use revis_core::pipeline::{
    assemble, prompts, FixtureTransport, ImageInput, LiveTransport, MllmEndpointConfig, Pipeline, PipelineError,
    Recorder, RunStatus, TransportError,
};

fn fixture(case: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(case)
}

fn image(case: &str) -> ImageInput {
    ImageInput::from_bytes(std::fs::read(fixture(case).join("image.png")).unwrap()).unwrap()
}

fn replay(case: &str, parallel: usize) -> (Result<revis_core::dsl::DslDocument, PipelineError>, Recorder, FixtureTransport) {
    let transport = FixtureTransport::new(fixture(case));
    let rec = Recorder::new(case, Some(image(case)));
    let r = Pipeline::new(&transport, parallel).run(&image(case), &rec);
    (r, rec, transport)
}

fn id(s: &str) -> ContainerId {
    ContainerId::parse(s).unwrap()
}

#[test]
fn prompt_hashes_are_frozen() {
    let expected = [
        ("structure", "67a8f693e6d730c350a4bef7eb77b30a61428b2719a8b464494bffdb11c1aab2"),
        ("template_merge", "5ff2e16635590c3c1e93867c8441c76682a1520306bebc135da6c632d87e39ee"),
        ("template_spec", "dc36a4d2d0b0e401c90e46ac891eebacfbbd2e0d7ad5feff81e3453b5622474a"),
        ("leaf_encoding", "295c08dd02748201b3b83c7da3e4361486078ea6d3f2b3c3121cc93946e60dd5"),
    ];
    for (t, (name, hash)) in prompts::ALL.iter().zip(expected) {
        assert_eq!(t.name, name);
        assert_eq!(t.sha256(), hash, "{name}");
    }
}

#[test]
fn prompt_slots_are_the_only_placeholders() {
    let known = ["structure_result", "cleaned_dsl", "template_index", "dsl", "mark_type", "container_id"];
    for t in prompts::ALL {
        let mut found = Vec::new();
        let text = t.text.replace("{{", "").replace("}}", "");
        let mut rest = text.as_str();
        while let Some(at) = rest.find('{') {
            let after = &rest[at + 1..];
            let end = after.find(|c: char| !(c.is_ascii_lowercase() || c == '_')).unwrap_or(after.len());
            if after[end..].starts_with('}') && end > 0 {
                found.push(&after[..end]);
            }
            rest = after;
        }
        found.sort();
        found.dedup();
        let mut slots = t.slots.to_vec();
        slots.sort();
        assert_eq!(found, slots, "{}", t.name);
        assert!(found.iter().all(|s| known.contains(s)));
    }
}

#[test]
fn fixture_cases_assemble_to_stored_documents() {
    for case in ["basic-bar", "template-merge", "opinion-rings", "linked-panels"] {
        let (r, rec, _) = replay(case, 4);
        let doc = r.unwrap_or_else(|e| panic!("{case}: {e}"));
        let stored = std::fs::read_to_string(fixture(case).join("final.revis.json")).unwrap();
        assert_eq!(serialize(&doc), stored, "{case}");
        let run = rec.snapshot();
        assert_eq!(run.status, RunStatus::Done);
        assert!(run.report.unwrap().is_clean());
        for (label, raw) in &run.transcripts {
            assert_eq!(raw, &std::fs::read_to_string(fixture(case).join(format!("{label}.txt"))).unwrap());
        }
    }
}

#[test]
fn single_leaf_chart_makes_three_calls() {
    let (r, rec, t) = replay("basic-bar", 4);
    let doc = r.unwrap();
    assert!(doc.root.is_leaf);
    assert_eq!(doc.data_specifications.len(), 1);
    assert_eq!(t.calls(), ["step1", "step2a", "step3-0"]);
    assert!(rec.snapshot().warnings.is_empty());
}

#[test]
fn template_merge_spans_its_instances_and_repairs_the_enum_typo() {
    let (r, rec, t) = replay("template-merge", 4);
    let doc = r.unwrap();
    let calls = t.calls();
    assert_eq!(&calls[..4], ["step1", "step1.repair", "step2a", "step2b-0-a"]);
    assert_eq!(calls.len(), 6);
    let tmpl = doc.find(&id("0-a")).unwrap();
    assert_eq!(tmpl.frame, CoordinateFrame::cartesian(0.0, 0.0, 60.0, 100.0));
    assert!(doc.find(&id("0-0")).is_none() && doc.find(&id("0-1")).is_none());
    let run = rec.snapshot();
    assert!(run.transcripts["step1"].contains("cartesain"));
    assert!(run.transcripts.contains_key("step1.repair"));
    let repair_prompt = &t.prompts()["step1.repair"];
    assert!(repair_prompt.contains("cartesain"), "{repair_prompt}");
    let entry = &run.artifacts["step2a"]["template_index"][0];
    assert_eq!(entry["instance_ids"], serde_json::json!(["0-0", "0-1"]));
}

#[test]
fn template_spec_prompt_carries_the_index_entry() {
    let (_, _, t) = replay("template-merge", 1);
    let p = &t.prompts()["step2b-0-a"];
    assert!(p.contains("\"template_id\": \"0-a\""));
    assert!(p.contains("\"container_id\": \"0-0\""), "original tree substituted");
    assert!(!p.contains("{structure_result}") && !p.contains("{cleaned_dsl}"));
    let leaf = &t.prompts()["step3-0-a-0"];
    assert!(leaf.contains("container_id = 0-a-0") && leaf.contains("mark_type = rectangle"));
}

#[test]
fn tree_without_repetition_passes_through_step_two() {
    let (r, rec, t) = replay("opinion-rings", 2);
    let doc = r.unwrap();
    let run = rec.snapshot();
    assert_eq!(run.artifacts["step2a"]["template_index"], serde_json::json!([]));
    assert_eq!(run.artifacts["step2a"]["cleaned_dsl"], run.artifacts["step1"]);
    assert!(!t.calls().iter().any(|c| c.starts_with("step2b")));
    assert_eq!(doc.leaves().len(), 3);
}

#[test]
fn mark_type_disagreement_warns_and_tree_wins() {
    let (r, rec, _) = replay("opinion-rings", 2);
    let doc = r.unwrap();
    let spec = doc.spec(&id("0-1")).unwrap();
    assert_eq!(spec.mark_specification.as_ref().unwrap().mark_type.as_str(), "arc");
    let warnings = rec.snapshot().warnings;
    assert_eq!(warnings.len(), 1);
    assert!(warnings[0].contains("step3-0-1") && warnings[0].contains("rectangle"));
}

#[test]
fn unused_mark_fields_are_kept() {
    let (r, _, _) = replay("linked-panels", 4);
    let doc = r.unwrap();
    let m = doc.spec(&id("0-0")).unwrap().mark_specification.clone().unwrap();
    assert_eq!((m.node_use_once, m.is_fully_connected, m.is_bipartite), (Some(false), Some(false), Some(true)));
}

#[test]
fn replay_is_bitwise_stable_across_parallelism() {
    let base = replay("linked-panels", 1);
    let a = serialize(&base.0.unwrap());
    let ta = base.1.snapshot().transcripts;
    for p in [2, 4, 16] {
        let (r, rec, _) = replay("linked-panels", p);
        assert_eq!(serialize(&r.unwrap()), a);
        assert_eq!(rec.snapshot().transcripts, ta);
    }
}

#[test]
fn cartesian_layout_on_a_polar_leaf_fails_after_one_repair() {
    let dir = tempfile::tempdir().unwrap();
    let transport = FixtureTransport::new(fixture("polar-leaf-schema"));
    let rec = Recorder::new("bad", None).persist_to(dir.path());
    let err = Pipeline::new(&transport, 1).run(&image("polar-leaf-schema"), &rec).unwrap_err();
    match &err {
        PipelineError::Schema { label, errors, transcripts } => {
            assert_eq!(label, "step3-0");
            assert!(errors.iter().any(|e| e.contains("layout.dimension_kind")), "{errors:?}");
            assert_eq!(transcripts.len(), 2);
            assert!(transcripts[1].starts_with("Apologies"));
        }
        other => panic!("unexpected {other:?}"),
    }
    assert_eq!(transport.calls(), ["step1", "step2a", "step3-0", "step3-0.repair"]);
    let run = rec.snapshot();
    assert_eq!(run.status, RunStatus::Failed);
    assert!(run.failure.unwrap().contains("step3-0"));
    for label in ["step1", "step2a", "step3-0", "step3-0.repair"] {
        assert!(dir.path().join(format!("{label}.txt")).exists(), "{label} persisted");
    }
}

#[test]
fn corrupt_image_is_rejected_before_any_call() {
    let e = ImageInput::from_bytes(b"\x89PNG\r\n\x1a\nbroken".to_vec()).unwrap_err();
    assert!(matches!(e, PipelineError::Input(_)));
    let e = ImageInput::from_bytes(b"plain text".to_vec()).unwrap_err();
    assert!(matches!(e, PipelineError::Input(_)));
    assert_eq!(image("basic-bar").media_type, "image/png");
}

#[test]
fn unknown_leaf_is_a_precondition_error_without_calls() {
    let transport = FixtureTransport::new(fixture("basic-bar"));
    let rec = Recorder::new("x", None);
    let doc = revis_core::dsl::parse_document(&std::fs::read_to_string(fixture("basic-bar").join("final.revis.json")).unwrap())
        .unwrap();
    let e = Pipeline::new(&transport, 1).step3_parse_leaf(&doc, &id("0-7"), &image("basic-bar"), &rec).unwrap_err();
    assert!(matches!(e, PipelineError::Precondition(_)));
    assert!(transport.calls().is_empty());
}

#[test]
fn missing_fixture_is_a_transport_error() {
    let dir = tempfile::tempdir().unwrap();
    let transport = FixtureTransport::new(dir.path());
    let rec = Recorder::new("x", None);
    let e = Pipeline::new(&transport, 1).run(&image("basic-bar"), &rec).unwrap_err();
    assert!(matches!(e, PipelineError::Transport { source: TransportError::MissingFixture(_), .. }));
}

#[test]
fn assembly_names_the_missing_template() {
    let doc = revis_core::dsl::parse_document(&std::fs::read_to_string(fixture("template-merge").join("final.revis.json")).unwrap())
        .unwrap();
    let mut leaves: BTreeMap<ContainerId, DataSpecification> = doc.data_specifications.clone();
    let tmpl = leaves.remove(&id("0-a")).unwrap();
    let e = assemble(doc.root.clone(), BTreeMap::new(), leaves.clone()).unwrap_err();
    assert_eq!(e, PipelineError::Assembly("no specification for template `0-a`".into()));
    let ok = assemble(doc.root.clone(), BTreeMap::from([(id("0-a"), tmpl)]), leaves).unwrap();
    assert_eq!(ok, doc);

    let single = revis_core::dsl::parse_document(&std::fs::read_to_string(fixture("basic-bar").join("final.revis.json")).unwrap())
        .unwrap();
    let again = assemble(single.root.clone(), BTreeMap::new(), single.data_specifications.clone()).unwrap();
    assert_eq!(again.data_specifications.len(), 1);
}

#[test]
fn live_transport_needs_a_key() {
    let cfg = MllmEndpointConfig::from_lookup(|_| None).unwrap();
    assert_eq!(cfg.max_parallel, 4);
    assert!(matches!(LiveTransport::new(cfg), Err(TransportError::MissingKey)));
    let e = MllmEndpointConfig::from_lookup(|k| (k == "REVIS_MLLM_TIMEOUT_SECS").then(|| "0".to_string())).unwrap_err();
    assert!(matches!(e, PipelineError::Config(_)));
    let cfg = MllmEndpointConfig::from_lookup(|k| match k {
        "REVIS_MLLM_API_KEY" => Some("secret".into()),
        "REVIS_MLLM_MAX_PARALLEL" => Some("2".into()),
        _ => None,
    })
    .unwrap();
    assert_eq!(cfg.max_parallel, 2);
    assert!(!format!("{cfg:?}").contains("secret"));
}
