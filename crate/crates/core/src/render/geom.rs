//! Geometry helpers: polar points, monotone cubic interpolation and path
//! commands.

/// A pixel-space point.
pub type Point = (f64, f64);

/// Point at `radius` and `angle` degrees around `(cx, cy)`, with 0 degrees
/// at 12 o'clock and angles growing clockwise.
pub fn polar_point(cx: f64, cy: f64, radius: f64, angle: f64) -> Point {
    let t = angle.to_radians();
    (cx + radius * t.sin(), cy - radius * t.cos())
}

/// Angle of `p` around `(cx, cy)` in degrees within `[0, 360)`, same
/// convention as [`polar_point`].
pub fn angle_of(cx: f64, cy: f64, p: Point) -> f64 {
    let a = (p.0 - cx).atan2(-(p.1 - cy)).to_degrees();
    a.rem_euclid(360.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PathCmd {
    MoveTo(Point),
    LineTo(Point),
    QuadTo(Point, Point),
    CubicTo(Point, Point, Point),
    /// Elliptical arc with equal radii: radius, large-arc flag, sweep flag, end.
    ArcTo(f64, bool, bool, Point),
    Close,
}

impl PathCmd {
    /// Every point the command references, control points included.
    pub fn points(&self) -> Vec<Point> {
        match *self {
            PathCmd::MoveTo(p) | PathCmd::LineTo(p) | PathCmd::ArcTo(_, _, _, p) => vec![p],
            PathCmd::QuadTo(c, p) => vec![c, p],
            PathCmd::CubicTo(c1, c2, p) => vec![c1, c2, p],
            PathCmd::Close => Vec::new(),
        }
    }

    pub fn scaled(&self, k: f64) -> PathCmd {
        let s = |p: Point| (p.0 * k, p.1 * k);
        match *self {
            PathCmd::MoveTo(p) => PathCmd::MoveTo(s(p)),
            PathCmd::LineTo(p) => PathCmd::LineTo(s(p)),
            PathCmd::QuadTo(c, p) => PathCmd::QuadTo(s(c), s(p)),
            PathCmd::CubicTo(a, b, p) => PathCmd::CubicTo(s(a), s(b), s(p)),
            PathCmd::ArcTo(r, l, w, p) => PathCmd::ArcTo(r * k, l, w, s(p)),
            PathCmd::Close => PathCmd::Close,
        }
    }
}

/// Tangents of the monotone cubic (Fritsch-Carlson) through `(t, v)`
/// samples with strictly monotone `t`. Returns `None` otherwise.
pub fn monotone_tangents(t: &[f64], v: &[f64]) -> Option<Vec<f64>> {
    let n = t.len();
    if n < 2 || v.len() != n {
        return None;
    }
    let h: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    let increasing = h[0] > 0.0;
    if h.iter().any(|d| if increasing { *d <= 0.0 } else { *d >= 0.0 }) {
        return None;
    }
    let delta: Vec<f64> = (0..n - 1).map(|k| (v[k + 1] - v[k]) / h[k]).collect();
    let mut m = vec![0.0; n];
    m[0] = delta[0];
    m[n - 1] = delta[n - 2];
    for k in 1..n - 1 {
        m[k] = if delta[k - 1] * delta[k] <= 0.0 { 0.0 } else { (delta[k - 1] + delta[k]) / 2.0 };
    }
    for k in 0..n - 1 {
        if delta[k] == 0.0 {
            m[k] = 0.0;
            m[k + 1] = 0.0;
            continue;
        }
        let a = m[k] / delta[k];
        let b = m[k + 1] / delta[k];
        let s = a * a + b * b;
        if s > 9.0 {
            let tau = 3.0 / s.sqrt();
            m[k] = tau * a * delta[k];
            m[k + 1] = tau * b * delta[k];
        }
    }
    Some(m)
}

/// Evaluates the cubic Hermite segment `k` at fraction `u`.
pub fn hermite(t: &[f64], v: &[f64], m: &[f64], k: usize, u: f64) -> f64 {
    let h = t[k + 1] - t[k];
    let (u2, u3) = (u * u, u * u * u);
    let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    let h10 = u3 - 2.0 * u2 + u;
    let h01 = -2.0 * u3 + 3.0 * u2;
    let h11 = u3 - u2;
    h00 * v[k] + h10 * h * m[k] + h01 * v[k + 1] + h11 * h * m[k + 1]
}

/// Cubic Bezier segments of the monotone interpolation through `points`,
/// parameterized by the x coordinate (`along_x`) or the y coordinate.
/// Falls back to straight segments when the parameter is not strictly
/// monotone.
pub fn monotone_path(points: &[Point], along_x: bool) -> Vec<PathCmd> {
    let (t, v): (Vec<f64>, Vec<f64>) = points
        .iter()
        .map(|p| if along_x { (p.0, p.1) } else { (p.1, p.0) })
        .unzip();
    let pt = |tt: f64, vv: f64| if along_x { (tt, vv) } else { (vv, tt) };
    match monotone_tangents(&t, &v) {
        None => points.iter().skip(1).map(|p| PathCmd::LineTo(*p)).collect(),
        Some(m) => (0..points.len() - 1)
            .map(|k| {
                let h = (t[k + 1] - t[k]) / 3.0;
                PathCmd::CubicTo(
                    pt(t[k] + h, v[k] + m[k] * h),
                    pt(t[k + 1] - h, v[k + 1] - m[k + 1] * h),
                    pt(t[k + 1], v[k + 1]),
                )
            })
            .collect(),
    }
}

/// Samples the interpolation through `(t, v)` pairs: `steps` points per
/// segment, monotone cubic when `curve`, linear otherwise. Includes both
/// ends.
pub fn sample_series(t: &[f64], v: &[f64], curve: bool, steps: usize) -> Vec<(f64, f64)> {
    let tangents = if curve { monotone_tangents(t, v) } else { None };
    let mut out = vec![(t[0], v[0])];
    for k in 0..t.len() - 1 {
        for s in 1..=steps {
            let u = s as f64 / steps as f64;
            let tt = t[k] + u * (t[k + 1] - t[k]);
            let vv = match &tangents {
                Some(m) => hermite(t, v, m, k, u),
                None => v[k] + u * (v[k + 1] - v[k]),
            };
            out.push((tt, vv));
        }
    }
    out
}

/// Outline of an annular sector. Full circles are drawn as two half arcs so
/// that start and end points never coincide within one arc command.
pub fn sector_path(cx: f64, cy: f64, r_inner: f64, r_outer: f64, a_start: f64, a_end: f64) -> Vec<PathCmd> {
    let span = a_end - a_start;
    let p = |r: f64, a: f64| polar_point(cx, cy, r, a);
    let mut cmds = Vec::new();
    if span >= 360.0 - 1e-9 {
        let mid = a_start + 180.0;
        cmds.push(PathCmd::MoveTo(p(r_outer, a_start)));
        cmds.push(PathCmd::ArcTo(r_outer, false, true, p(r_outer, mid)));
        cmds.push(PathCmd::ArcTo(r_outer, false, true, p(r_outer, a_start)));
        cmds.push(PathCmd::Close);
        if r_inner > 0.0 {
            cmds.push(PathCmd::MoveTo(p(r_inner, a_start)));
            cmds.push(PathCmd::ArcTo(r_inner, false, false, p(r_inner, mid)));
            cmds.push(PathCmd::ArcTo(r_inner, false, false, p(r_inner, a_start)));
            cmds.push(PathCmd::Close);
        }
        return cmds;
    }
    let large = span > 180.0;
    cmds.push(PathCmd::MoveTo(p(r_outer, a_start)));
    cmds.push(PathCmd::ArcTo(r_outer, large, true, p(r_outer, a_end)));
    if r_inner > 0.0 {
        cmds.push(PathCmd::LineTo(p(r_inner, a_end)));
        cmds.push(PathCmd::ArcTo(r_inner, large, false, p(r_inner, a_start)));
    } else {
        cmds.push(PathCmd::LineTo((cx, cy)));
    }
    cmds.push(PathCmd::Close);
    cmds
}
