//! One pass/fail line per primary acceptance criterion. Run with
//! `cargo test -p revis-core --test acceptance -- --nocapture`.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use revis_core::dsl::{
    edit_frame, parse_document, serialize, set_spec_field, validate, Anchor, AnchorDistribute, ContainerId,
    CoordinateFrame, DslDocument, LayoutDimensionSpec, StackDirection,
};
use revis_core::eval::{applicable_attributes, run_gallery, AccuracyReport, CaseReport};
use revis_core::layout::{resolve_dimension, ElementValues, Extent};
use revis_core::pipeline::{prompts, FixtureTransport, ImageInput, Pipeline, Recorder};
use revis_core::render::{clipping_violations, emit_svg, render_document, render_scene, Overrides, RenderOptions};
use serde_json::{json, Value};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn corpus() -> Vec<(String, String)> {
    let mut out = Vec::new();
    for kind in ["basic", "composite"] {
        for e in std::fs::read_dir(root().join("corpus").join(kind)).unwrap() {
            let p = e.unwrap().path();
            out.push((p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()));
        }
    }
    out.sort();
    out
}

fn id(s: &str) -> ContainerId {
    ContainerId::parse(s).unwrap()
}

struct Line {
    name: &'static str,
    limit: Option<Duration>,
    result: Result<String, String>,
    elapsed: Duration,
}

fn check(name: &'static str, limit: Option<u64>, f: impl FnOnce() -> Result<String, String>) -> Line {
    let t = Instant::now();
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f))
        .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()));
    Line { name, limit: limit.map(Duration::from_secs), result, elapsed: t.elapsed() }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn schema_round_trip() -> Result<String, String> {
    let docs = corpus();
    ensure(docs.len() == 40, || format!("{} documents", docs.len()))?;
    for (name, text) in &docs {
        let doc = parse_document(text).map_err(|e| format!("{name}: {e}"))?;
        ensure(validate(&doc).is_clean(), || format!("{name} does not validate"))?;
        ensure(&serialize(&doc) == text, || format!("{name} is not byte-stable"))?;
    }
    Ok("40 documents parse, validate clean and re-serialize byte-equal".into())
}

fn layout_properties() -> Result<String, String> {
    const CASES: u32 = 10_000;
    let strategy = (
        1usize..40,
        0usize..4,
        any::<bool>(),
        0.0..1.0f64,
        0.0..1.0f64,
        -10.0..110.0f64,
        0.0..30.0f64,
        prop::collection::vec(0.0..=1.0f64, 40),
        prop::collection::vec(0.0..=1.0f64, 40),
    );
    let mut runner = TestRunner::new(Config { cases: CASES, failure_persistence: None, ..Config::default() });
    runner
        .run(&strategy, |(n, mode, uniform, a, b, start, interval, sizes, positions)| {
            let v = ElementValues::new(sizes[..n].to_vec(), positions[..n].to_vec());
            let (lo, hi) = (a.min(b), a.max(b));
            let spec = match mode {
                // Stack that fits the axis.
                0 => LayoutDimensionSpec {
                    stacking: true,
                    stacking_direction: [StackDirection::Min, StackDirection::Middle, StackDirection::Max][n % 3],
                    anchor: Anchor::StackingDecided,
                    subdividing: false,
                    flatten_2d: false,
                    size_uniform: uniform,
                    size_range: [lo * 100.0 / n as f64, hi * 100.0 / n as f64],
                    anchor_distribute: AnchorDistribute::Flexible,
                    anchor_interval: None,
                    anchor_start: None,
                },
                1 => LayoutDimensionSpec { subdividing: true, stacking: true, size_range: [0.0, 0.0], ..LayoutDimensionSpec::fixed(Anchor::StackingDecided, 0.0, 0.0) },
                2 => LayoutDimensionSpec {
                    anchor_distribute: AnchorDistribute::UniformInterval,
                    anchor_start: Some(start),
                    anchor_interval: Some(interval),
                    size_uniform: true,
                    ..LayoutDimensionSpec::fixed(Anchor::Min, start, lo * 10.0)
                },
                _ => LayoutDimensionSpec {
                    size_uniform: uniform,
                    size_range: [lo * 50.0, hi * 50.0],
                    anchor_start: Some(start),
                    ..LayoutDimensionSpec::fixed([Anchor::Min, Anchor::Middle, Anchor::Max][n % 3], start, 0.0)
                },
            };
            let spec = LayoutDimensionSpec { subdividing: mode == 1 || (spec.subdividing && spec.stacking), ..spec };
            let out = resolve_dimension(&spec, n, &v).map_err(|e| TestCaseError::fail(e.to_string()))?;
            // Containment.
            prop_assert!(out.iter().all(|e| e.start >= 0.0 && e.end <= 100.0 && e.start <= e.end));
            match mode {
                0 => {
                    // Non-overlap: consecutive stack elements share one boundary.
                    for w in out.windows(2) {
                        let gap = if spec.stacking_direction == StackDirection::Max { w[0].start - w[1].end } else { w[1].start - w[0].end };
                        prop_assert!(gap.abs() < 1e-9);
                    }
                }
                1 => {
                    // Subdividing completeness.
                    prop_assert_eq!(out[0].start, 0.0);
                    prop_assert_eq!(out[n - 1].end, 100.0);
                    let total: f64 = out.iter().map(Extent::len).sum();
                    prop_assert!((total - 100.0).abs() < 1e-9);
                }
                2 => {
                    // Uniform-interval monotonicity where nothing is clamped.
                    let size = spec.size_range[0];
                    for (i, w) in out.windows(2).enumerate() {
                        let p = start + i as f64 * interval;
                        if interval > 0.0 && p >= 0.0 && p + interval + size <= 100.0 {
                            prop_assert!(w[1].start > w[0].start);
                        }
                    }
                }
                _ => {
                    // Anchor bound: a fixed anchor inside the axis is met exactly.
                    for e in &out {
                        let at = match spec.anchor {
                            Anchor::Max => e.end,
                            Anchor::Middle => e.center(),
                            _ => e.start,
                        };
                        let s = e.len();
                        if start - s >= 0.0 && start + s <= 100.0 {
                            prop_assert!((at - start).abs() < 1e-9);
                        }
                    }
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!("{CASES} randomized samples: containment, non-overlap, subdividing completeness, monotonicity, anchor bounds"))
}

fn items(ds: &Value) -> u64 {
    let primary = ds["data_size"]["primary"]["number"].as_u64().unwrap();
    match (ds["data_type"].as_str().unwrap(), &ds["data_size"]["secondary"]["number"]) {
        ("1D_list", _) | (_, Value::Null) => primary,
        (_, Value::Array(a)) => a.iter().map(|n| n.as_u64().unwrap()).sum(),
        (_, n) => primary * n.as_u64().unwrap(),
    }
}

fn expected_marks(node: &Value, specs: &Value, copies: u64) -> u64 {
    let cid = node["container_id"].as_str().unwrap();
    let spec = &specs[cid];
    if node["if_leaf"].as_bool().unwrap() {
        let m = &spec["mark_specification"];
        return copies
            * match m["link_mark_type"].as_str().unwrap() {
                "node_link" => m["link_number"].as_u64().unwrap(),
                "group_type" => spec["data_structure"]["data_size"]["primary"]["number"].as_u64().unwrap(),
                _ => items(&spec["data_structure"]),
            };
    }
    let template = cid.rsplit('-').next().unwrap().chars().all(|c| c.is_ascii_lowercase());
    let copies = if template { copies * items(&spec["data_structure"]) } else { copies };
    node["components"].as_array().unwrap().iter().map(|c| expected_marks(c, specs, copies)).sum()
}

fn renderer_oracles() -> Result<String, String> {
    let mut marks = 0u64;
    for (name, text) in corpus() {
        let doc = parse_document(&text).unwrap();
        let opts = RenderOptions { width: 640.0, height: 480.0, seed: 5, threads: 0 };
        let scene = render_scene(&doc, &opts, &Overrides::new()).map_err(|e| format!("{name}: {e}"))?;
        let svg = emit_svg(&scene);
        let tree = roxmltree::Document::parse(&svg).map_err(|e| format!("{name}: {e}"))?;
        let drawn = tree.descendants().filter(|n| n.attribute("data-mark").is_some()).count() as u64;
        let raw: Value = serde_json::from_str(&text).unwrap();
        let want = expected_marks(&raw, &raw["data_specification"], 1);
        ensure(drawn == want, || format!("{name}: {drawn} marks, structure implies {want}"))?;
        let bad = clipping_violations(&scene, 0.5);
        ensure(bad.is_empty(), || format!("{name}: {} marks leave their region", bad.len()))?;
        let double = render_scene(&doc, &RenderOptions { width: 1280.0, height: 960.0, ..opts }, &Overrides::new()).unwrap();
        ensure(double == scene.scaled(2.0), || format!("{name}: 2x canvas is not an exact 2x scene"))?;
        marks += drawn;
    }
    Ok(format!("40 documents, {marks} marks: well-formed, counts match, no clipping at 0.5px, exact 2x scaling"))
}

fn determinism() -> Result<String, String> {
    for (name, text) in corpus() {
        let doc = parse_document(&text).unwrap();
        let mut outputs = Vec::new();
        for threads in [1, 1, 1, 2, 4, 8] {
            let opts = RenderOptions { width: 800.0, height: 600.0, seed: 2024, threads };
            outputs.push(render_document(&doc, &opts, &Overrides::new()).unwrap());
        }
        ensure(outputs.windows(2).all(|w| w[0] == w[1]), || format!("{name} differs between runs"))?;
    }
    Ok("40 documents byte-identical over 3 runs and 1/2/4/8 threads".into())
}

const TABLE1: [(&str, usize, usize, f64); 20] = [
    ("01", 18, 0, 100.0), ("02", 17, 0, 100.0), ("03", 18, 0, 100.0), ("04", 17, 1, 94.4), ("05", 15, 3, 83.3),
    ("06", 18, 0, 100.0), ("07", 18, 0, 100.0), ("08", 17, 0, 100.0), ("09", 13, 5, 72.2), ("10", 16, 3, 84.2),
    ("11", 19, 0, 100.0), ("12", 14, 4, 77.8), ("13", 18, 1, 94.7), ("14", 17, 0, 100.0), ("15", 17, 0, 100.0),
    ("16", 18, 0, 100.0), ("17", 18, 0, 100.0), ("18", 17, 1, 94.4), ("19", 13, 0, 100.0), ("20", 13, 0, 100.0),
];

fn eval_arithmetic() -> Result<String, String> {
    let report = AccuracyReport { cases: TABLE1.iter().map(|(n, m, mm, _)| CaseReport::from_counts(*n, *m, *mm)).collect() };
    for (c, (_, _, _, printed)) in report.cases.iter().zip(TABLE1) {
        let acc = c.accuracy().unwrap();
        ensure((acc - printed).abs() <= 0.05, || format!("row {}: {acc:.2} vs {printed}", c.name))?;
    }
    let o = report.overall();
    ensure((o.matched, o.total) == (331, 349), || format!("overall {}/{}", o.matched, o.total))?;
    ensure((o.accuracy().unwrap() - 94.8).abs() <= 0.05, || format!("overall {:?}", o.accuracy()))?;

    // Injection oracle: case k gets k mod 4 known mutations.
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut ledger = Vec::new();
    for (k, (name, text)) in corpus().into_iter().filter(|(n, _)| n.starts_with(|c: char| c.is_ascii_digit())).take(20).enumerate() {
        let gt = parse_document(&text).unwrap();
        let mut v: Value = serde_json::from_str(&text).unwrap();
        let (leaf, spec) = gt.data_specifications.iter().find(|(_, s)| s.mark_specification.is_some()).unwrap();
        let key = leaf.to_string();
        let mut injected = Vec::new();
        let s = &mut v["data_specification"][&key];
        if k % 4 >= 1 {
            let mt = s["mark_specification"]["mark_type"].as_str().unwrap().to_string();
            s["mark_specification"]["mark_type"] = json!(if mt == "rectangle" { "circle" } else { "rectangle" });
            injected.push(format!("{key}:mark_specification.mark_type"));
        }
        if k % 4 >= 2 {
            let n = s["data_structure"]["data_size"]["primary"]["number"].as_u64().unwrap();
            s["data_structure"]["data_size"]["primary"]["number"] = json!(n + 1);
            injected.push(format!("{key}:data_structure.data_size.primary"));
        }
        if k % 4 >= 3 {
            let (dim, _) = spec.layout_specification.dims().next().unwrap();
            let r = &mut s["layout_specification"][dim.to_string()]["size_range"];
            let hi = r[1].as_f64().unwrap();
            r[1] = json!(if hi >= 99.0 { hi - 0.5 } else { hi + 0.5 });
            injected.push(format!("{key}:layout_specification.{dim}.size_range"));
        }
        let case = tmp.path().join(format!("{k:02}-{name}"));
        std::fs::create_dir_all(&case).unwrap();
        std::fs::write(case.join("ground_truth.revis.json"), &text).unwrap();
        std::fs::write(case.join("generated.revis.json"), v.to_string()).unwrap();
        injected.sort();
        ledger.push((injected, applicable_attributes(&gt).len()));
    }
    let got = run_gallery(tmp.path()).map_err(|e| e.to_string())?;
    ensure(got.cases.len() == 20, || format!("{} cases", got.cases.len()))?;
    let mut injected_total = 0;
    for (c, (want, total)) in got.cases.iter().zip(&ledger) {
        let mut found: Vec<String> = c.mismatches.iter().map(|m| m.attribute.to_string()).collect();
        found.sort();
        ensure(&found == want, || format!("{}: found {found:?}, injected {want:?}", c.name))?;
        ensure(c.total == *total, || format!("{}: total {}", c.name, c.total))?;
        injected_total += want.len();
    }
    Ok(format!("20 rows within ±0.05, overall 331/349 = 94.8; {injected_total} injected mismatches over 20 cases recovered exactly"))
}

fn pipeline_replay() -> Result<String, String> {
    let cases = ["basic-bar", "template-merge", "opinion-rings", "linked-panels"];
    for case in cases {
        let dir = root().join("fixtures").join(case);
        let image = ImageInput::from_bytes(std::fs::read(dir.join("image.png")).unwrap()).map_err(|e| e.to_string())?;
        let transport = FixtureTransport::new(&dir);
        let rec = Recorder::new(case, None);
        let doc = Pipeline::new(&transport, 4).run(&image, &rec).map_err(|e| format!("{case}: {e}"))?;
        let stored = std::fs::read_to_string(dir.join("final.revis.json")).unwrap();
        ensure(serialize(&doc) == stored, || format!("{case}: assembled document differs"))?;
    }
    let expected = [
        "67a8f693e6d730c350a4bef7eb77b30a61428b2719a8b464494bffdb11c1aab2",
        "5ff2e16635590c3c1e93867c8441c76682a1520306bebc135da6c632d87e39ee",
        "dc36a4d2d0b0e401c90e46ac891eebacfbbd2e0d7ad5feff81e3453b5622474a",
        "295c08dd02748201b3b83c7da3e4361486078ea6d3f2b3c3121cc93946e60dd5",
    ];
    for (t, h) in prompts::ALL.iter().zip(expected) {
        ensure(t.sha256() == h, || format!("prompt {} hash {}", t.name, t.sha256()))?;
    }
    Ok(format!("{} fixture cases byte-equal with no network; 4 prompt hashes match", cases.len()))
}

fn scenarios() -> Result<String, String> {
    let find = |n: &str| -> DslDocument {
        let (_, t) = corpus().into_iter().find(|(x, _)| x.contains(n)).unwrap();
        parse_document(&t).unwrap()
    };
    let spans = |doc: &DslDocument, c: &str| -> Vec<f64> {
        let svg = render_document(doc, &RenderOptions::default(), &Overrides::new()).unwrap();
        let tree = roxmltree::Document::parse(&svg).unwrap();
        tree.descendants()
            .filter(|n| n.attribute("data-container") == Some(c))
            .filter_map(|n| n.attribute("data-angles"))
            .map(|a| {
                let v: Vec<f64> = a.split(' ').map(|x| x.parse().unwrap()).collect();
                v[1] - v[0]
            })
            .collect()
    };
    let rings = find("opinion-rings");
    let mut edited = rings.clone();
    for c in ["0-1", "0-2"] {
        let CoordinateFrame::Polar(mut f) = edited.find(&id(c)).unwrap().frame else { return Err("not polar".into()) };
        f.a1 = 180.0;
        edited = edit_frame(&edited, &id(c), CoordinateFrame::Polar(f)).map_err(|e| e.to_string())?;
    }
    let mut sectors = 0;
    for c in ["0-1", "0-2"] {
        let (b, a) = (spans(&rings, c), spans(&edited, c));
        ensure(!b.is_empty() && a.len() == b.len(), || format!("{c}: {} vs {} sectors", b.len(), a.len()))?;
        for (x, y) in b.iter().zip(&a) {
            ensure((y - x / 2.0).abs() <= 2e-3, || format!("{c}: extent {x} became {y}"))?;
        }
        sectors += a.len();
    }
    let panels = find("linked-panels");
    let boxes = |d: &DslDocument| {
        render_scene(d, &RenderOptions::default(), &Overrides::new()).unwrap().layers.iter().filter(|l| l.frame.is_instance).count()
    };
    let grown = set_spec_field(&panels, &id("0-a"), "data_structure.data_size.primary.number", json!(4)).map_err(|e| e.to_string())?;
    let (before, after) = (boxes(&panels), boxes(&grown));
    ensure(after == before + 4, || format!("{before} -> {after} instance boxes"))?;
    Ok(format!("{sectors} sectors halved on 0-1/0-2; instance boxes {before} -> {after}"))
}

#[test]
fn primary_acceptance_criteria() {
    let lines = [
        check("schema round-trip", Some(5), schema_round_trip),
        check("layout property suite", Some(30), layout_properties),
        check("renderer oracles", Some(60), renderer_oracles),
        check("determinism", None, determinism),
        check("eval arithmetic and injection oracle", None, eval_arithmetic),
        check("pipeline fixture replay", Some(10), pipeline_replay),
        check("scenario regressions", None, scenarios),
    ];
    let mut failed = 0;
    for l in &lines {
        let slow = l.limit.is_some_and(|lim| l.elapsed > lim);
        let ok = l.result.is_ok() && !slow;
        if !ok {
            failed += 1;
        }
        let limit = l.limit.map_or(String::new(), |d| format!(", limit {}s", d.as_secs()));
        let detail = match &l.result {
            Ok(s) if slow => format!("{s}; over the time limit"),
            Ok(s) => s.clone(),
            Err(e) => e.clone(),
        };
        println!(
            "[{}] {:<38} {:>7.2}s{limit}  {detail}",
            if ok { "PASS" } else { "FAIL" },
            l.name,
            l.elapsed.as_secs_f64()
        );
    }
    assert_eq!(failed, 0, "{failed} primary criteria failed");
}
