use proptest::prelude::*;
use revis_core::dsl::{
    spec_from_value, Anchor, AnchorDistribute, CoordinateFrame, LayoutDimensionSpec, StackDirection,
};
use revis_core::error::LayoutError;
use revis_core::layout::{constant_inputs, instantiate_template, resolve_dimension, ElementValues, Extent};
use serde_json::json;

const EPS: f64 = 1e-9;

fn spec(stacking: bool, subdividing: bool, uniform: bool, range: [f64; 2]) -> LayoutDimensionSpec {
    LayoutDimensionSpec {
        stacking,
        stacking_direction: StackDirection::Min,
        anchor: if stacking { Anchor::StackingDecided } else { Anchor::Min },
        subdividing,
        flatten_2d: false,
        size_uniform: uniform,
        size_range: range,
        anchor_distribute: AnchorDistribute::Flexible,
        anchor_interval: None,
        anchor_start: None,
    }
}

fn arb_direction() -> impl Strategy<Value = StackDirection> {
    prop_oneof![Just(StackDirection::Min), Just(StackDirection::Middle), Just(StackDirection::Max)]
}

fn arb_anchor() -> impl Strategy<Value = Anchor> {
    prop_oneof![Just(Anchor::Min), Just(Anchor::Middle), Just(Anchor::Max)]
}

fn arb_values(n: usize) -> impl Strategy<Value = ElementValues> {
    (prop::collection::vec(0.0..=1.0f64, n), prop::collection::vec(0.0..=1.0f64, n))
        .prop_map(|(s, p)| ElementValues::new(s, p))
}

/// A non-stacking specification of any distribution.
fn arb_free() -> impl Strategy<Value = (LayoutDimensionSpec, usize, ElementValues)> {
    (1usize..40, arb_anchor(), 0usize..3, any::<bool>(), 0.0..60.0f64, 0.0..60.0f64, -10.0..110.0f64, 0.0..30.0f64)
        .prop_flat_map(|(n, anchor, dist, uniform, a, b, start, interval)| {
            let distribute = [AnchorDistribute::FixedValue, AnchorDistribute::UniformInterval, AnchorDistribute::Flexible][dist];
            let s = LayoutDimensionSpec {
                anchor,
                anchor_distribute: distribute,
                anchor_start: Some(start),
                anchor_interval: Some(interval),
                ..spec(false, false, uniform, [a.min(b), a.max(b)])
            };
            (Just(s), Just(n), arb_values(n))
        })
}

/// A stack whose total fits the axis, so no element is clamped.
fn arb_stack() -> impl Strategy<Value = (LayoutDimensionSpec, usize, ElementValues)> {
    (1usize..40, arb_direction(), any::<bool>(), 0.0..1.0f64, 0.0..1.0f64).prop_flat_map(|(n, dir, uniform, a, b)| {
        let cap = 100.0 / n as f64;
        let s = LayoutDimensionSpec {
            stacking_direction: dir,
            ..spec(true, false, uniform, [cap * a.min(b), cap * a.max(b)])
        };
        (Just(s), Just(n), arb_values(n))
    })
}

fn arb_subdivide() -> impl Strategy<Value = (LayoutDimensionSpec, usize, ElementValues)> {
    (1usize..60, any::<bool>()).prop_flat_map(|(n, uniform)| (Just(spec(true, true, uniform, [0.0, 0.0])), Just(n), arb_values(n)))
}

fn inside(e: &Extent) -> bool {
    e.start >= -EPS && e.end <= 100.0 + EPS && e.start <= e.end + EPS
}

// 4 properties × 2,600 cases plus 2 × 1,000 on templates: over 10,000 samples.
proptest! {
    #![proptest_config(ProptestConfig::with_cases(2600))]

    #[test]
    fn free_extents_stay_in_range_and_honor_the_anchor((s, n, v) in arb_free()) {
        let out = resolve_dimension(&s, n, &v).unwrap();
        prop_assert_eq!(out.len(), n);
        let [lo, hi] = s.size_range;
        let start = s.anchor_start.unwrap();
        let interval = s.anchor_interval.unwrap();
        let mut unclamped = Vec::new();
        for (i, e) in out.iter().enumerate() {
            prop_assert!(inside(e), "{:?}", e);
            // The unclamped oracle: anchor point and size from the spec.
            let size = if s.size_uniform { lo } else { lo + v.sizes[i] * (hi - lo) };
            let p = match s.anchor_distribute {
                AnchorDistribute::FixedValue => start,
                AnchorDistribute::UniformInterval => start + i as f64 * interval,
                AnchorDistribute::Flexible => 100.0 * v.positions[i],
            };
            let (a, b) = match s.anchor {
                Anchor::Max => (p - size, p),
                Anchor::Middle => (p - size / 2.0, p + size / 2.0),
                _ => (p, p + size),
            };
            prop_assert!((e.start - a.clamp(0.0, 100.0)).abs() < 1e-9);
            prop_assert!((e.end - b.clamp(0.0, 100.0)).abs() < 1e-9);
            unclamped.push(a >= 0.0 && b <= 100.0);
        }
        if s.anchor_distribute == AnchorDistribute::UniformInterval && interval > 0.0 && s.size_uniform {
            for (i, w) in out.windows(2).enumerate() {
                if unclamped[i] && unclamped[i + 1] {
                    prop_assert!(w[1].start > w[0].start, "{:?}", w);
                }
            }
        }
    }

    #[test]
    fn stacks_touch_without_overlap((s, n, v) in arb_stack()) {
        let out = resolve_dimension(&s, n, &v).unwrap();
        for e in &out {
            prop_assert!(inside(e));
        }
        for w in out.windows(2) {
            let (a, b) = (w[0], w[1]);
            match s.stacking_direction {
                StackDirection::Max => prop_assert!((a.start - b.end).abs() < EPS, "{:?} {:?}", a, b),
                _ => prop_assert!((a.end - b.start).abs() < EPS, "{:?} {:?}", a, b),
            }
        }
        let total: f64 = out.iter().map(Extent::len).sum();
        match s.stacking_direction {
            StackDirection::Min => prop_assert!(out[0].start.abs() < EPS),
            StackDirection::Max => prop_assert!((out[0].end - 100.0).abs() < EPS),
            StackDirection::Middle => {
                prop_assert!((out[0].start - (50.0 - total / 2.0)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn clamped_stacks_never_overlap(n in 1usize..30, lo in 0.0..50.0f64, v in prop::collection::vec(0.0..=1.0f64, 30), dir in arb_direction()) {
        let s = LayoutDimensionSpec { stacking_direction: dir, ..spec(true, false, false, [lo, lo + 20.0]) };
        let out = resolve_dimension(&s, n, &ElementValues::uniform(v[..n].to_vec())).unwrap();
        let mut sorted = out.clone();
        sorted.sort_by(|a, b| a.start.total_cmp(&b.start).then(a.end.total_cmp(&b.end)));
        for w in sorted.windows(2) {
            prop_assert!(w[0].end <= w[1].start + EPS);
        }
        prop_assert!(out.iter().all(inside));
    }

    #[test]
    fn subdividing_covers_the_axis((s, n, v) in arb_subdivide()) {
        let out = resolve_dimension(&s, n, &v).unwrap();
        prop_assert_eq!(out[0].start, 0.0);
        prop_assert_eq!(out[n - 1].end, 100.0);
        for w in out.windows(2) {
            prop_assert_eq!(w[0].end, w[1].start);
        }
        let total: f64 = out.iter().map(Extent::len).sum();
        prop_assert!((total - 100.0).abs() < 1e-9);
        if s.size_uniform {
            for e in &out {
                prop_assert!((e.len() - 100.0 / n as f64).abs() < 1e-9);
            }
        } else {
            // Proportional to the values, unless all of them are zero.
            let sum: f64 = v.sizes.iter().sum();
            if sum > 0.0 {
                for (e, x) in out.iter().zip(&v.sizes) {
                    prop_assert!((e.len() - 100.0 * x / sum).abs() < 1e-6);
                }
            }
        }
    }
}

fn grid_template(rows: u32, cols: u32) -> revis_core::dsl::DataSpecification {
    let sub = json!({"stacking": true, "stacking_direction": "min", "anchor": "stacking_decided", "subdividing": true,
        "size_uniform": true, "size_range": [0, 0], "anchor_distribute": "flexible"});
    spec_from_value(json!({
        "data_structure": {"data_type": "2D_matrix", "data_size": {
            "primary": {"number": cols, "dimension": "x", "explanation": ""},
            "secondary": {"number": rows, "dimension": "y", "explanation": ""}}},
        "layout_specification": {"x": sub, "y": sub}
    }))
    .unwrap()
}

fn area(f: &CoordinateFrame) -> f64 {
    match f {
        CoordinateFrame::Cartesian(c) => c.width() * c.height(),
        CoordinateFrame::Polar(_) => unreachable!(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn subdividing_grids_tile_the_template(rows in 1u32..7, cols in 1u32..7, x1 in 0.0..40.0f64, y1 in 0.0..40.0f64, w in 1.0..60.0f64, h in 1.0..60.0f64) {
        let spec = grid_template(rows, cols);
        let frame = CoordinateFrame::cartesian(x1, y1, x1 + w, y1 + h);
        let boxes = instantiate_template(&spec, &frame, &constant_inputs(&spec.data_structure, 0.5)).unwrap();
        prop_assert_eq!(boxes.len(), (rows * cols) as usize);
        let total: f64 = boxes.iter().map(|b| area(&b.frame)).sum();
        prop_assert!((total - w * h).abs() < 1e-6 * w * h);
        for (i, a) in boxes.iter().enumerate() {
            prop_assert!(frame.contains(&a.frame, 1e-9));
            let CoordinateFrame::Cartesian(p) = a.frame else { unreachable!() };
            for b in &boxes[i + 1..] {
                let CoordinateFrame::Cartesian(q) = b.frame else { unreachable!() };
                let ox = (p.x2.min(q.x2) - p.x1.max(q.x1)).max(0.0);
                let oy = (p.y2.min(q.y2) - p.y1.max(q.y1)).max(0.0);
                prop_assert!(ox * oy < 1e-9, "{:?} {:?}", p, q);
            }
        }
    }

    #[test]
    fn polar_templates_stay_inside(n in 1u32..12, r1 in 0.0..0.4f64, a1 in 0.0..180.0f64, span in 1.0..180.0f64) {
        let sub = json!({"stacking": true, "anchor": "stacking_decided", "subdividing": true,
            "size_uniform": true, "size_range": [0, 0], "anchor_distribute": "flexible"});
        let spec = spec_from_value(json!({
            "data_structure": {"data_type": "1D_list", "data_size": {"primary": {"number": n, "dimension": "angle", "explanation": ""}}},
            "layout_specification": {"angle": sub}
        })).unwrap();
        let frame = CoordinateFrame::polar(0.5, 0.5, r1, r1 + 0.5, a1, a1 + span);
        let boxes = instantiate_template(&spec, &frame, &constant_inputs(&spec.data_structure, 0.5)).unwrap();
        prop_assert_eq!(boxes.len(), n as usize);
        for b in &boxes {
            prop_assert!(frame.contains(&b.frame, 1e-9));
            prop_assert_eq!(b.frame.kind(), frame.kind());
        }
    }
}

#[test]
fn one_instance_is_the_template_frame() {
    let spec = grid_template(1, 1);
    let frame = CoordinateFrame::cartesian(10.0, 20.0, 30.0, 70.0);
    let boxes = instantiate_template(&spec, &frame, &constant_inputs(&spec.data_structure, 0.5)).unwrap();
    assert_eq!(boxes.len(), 1);
    assert_eq!(boxes[0].frame, frame);
}

#[test]
fn twelve_boxes_for_a_three_by_four_grid() {
    let spec = grid_template(4, 3);
    let boxes = instantiate_template(&spec, &CoordinateFrame::cartesian(0.0, 0.0, 90.0, 100.0), &constant_inputs(&spec.data_structure, 0.5))
        .unwrap();
    assert_eq!(boxes.len(), 12);
    let CoordinateFrame::Cartesian(first) = boxes[0].frame else { panic!() };
    for (got, want) in [first.x1, first.y1, first.x2, first.y2].into_iter().zip([0.0, 0.0, 30.0, 25.0]) {
        assert!((got - want).abs() < 1e-9, "{first:?}");
    }
}

#[test]
fn layout_rejects_bad_inputs() {
    let s = spec(false, false, true, [10.0, 5.0]);
    assert!(matches!(resolve_dimension(&s, 1, &ElementValues::uniform(vec![0.5])), Err(LayoutError::InvalidSpec(_))));
    let s = spec(true, true, true, [0.0, 0.0]);
    assert_eq!(resolve_dimension(&s, 0, &ElementValues::uniform(vec![])), Err(LayoutError::EmptyCount));
    assert!(matches!(
        resolve_dimension(&s, 3, &ElementValues::uniform(vec![0.5])),
        Err(LayoutError::CountMismatch { expected: 3, actual: 1 })
    ));
    let fixed = LayoutDimensionSpec { anchor_distribute: AnchorDistribute::FixedValue, ..spec(false, false, true, [1.0, 1.0]) };
    assert!(matches!(resolve_dimension(&fixed, 1, &ElementValues::uniform(vec![0.5])), Err(LayoutError::InvalidSpec(_))));
    let bad = spec_from_value(json!({
        "data_structure": {"data_type": "2D_matrix", "data_size": {
            "primary": {"number": 2, "dimension": "x", "explanation": ""},
            "secondary": {"number": 2, "dimension": "y", "explanation": ""}}},
        "layout_specification": {"x": {"stacking": true, "anchor": "stacking_decided", "subdividing": true,
            "size_uniform": true, "size_range": [0, 0], "anchor_distribute": "flexible"}}
    }))
    .unwrap();
    let e = instantiate_template(&bad, &CoordinateFrame::cartesian(0.0, 0.0, 1.0, 1.0), &constant_inputs(&bad.data_structure, 0.5));
    assert_eq!(e, Err(LayoutError::MissingDimension("y".into())));
}

#[test]
fn resolution_is_bitwise_deterministic() {
    let s = LayoutDimensionSpec { stacking_direction: StackDirection::Middle, ..spec(true, false, false, [1.0, 9.0]) };
    let v = ElementValues::uniform((0..17).map(|i| (i as f64 * 0.37).fract()).collect());
    let a = resolve_dimension(&s, 17, &v).unwrap();
    for _ in 0..3 {
        let b = resolve_dimension(&s, 17, &v).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x.start.to_bits() == y.start.to_bits() && x.end.to_bits() == y.end.to_bits()));
    }
}
