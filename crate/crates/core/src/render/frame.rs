//! Pixel regions of containers.

use super::geom::{angle_of, polar_point, Point};
use crate::dsl::{CartesianFrame, CoordinateFrame, PolarFrame, ScopedId};
use crate::layout::Extent;

/// Absolute pixel region of a container, plus the unit ranges its
/// sub-containers are expressed in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    /// `(x, y)` is the top-left corner.
    Rect { x: f64, y: f64, w: f64, h: f64, units: CartesianFrame },
    /// Annular sector around `(cx, cy)`. `unit` is the pixel length of
    /// radius 1 for sub-containers.
    Sector { cx: f64, cy: f64, unit: f64, r_inner: f64, r_outer: f64, a1: f64, a2: f64, units: PolarFrame },
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + t * (b - a)
}

impl Region {
    pub fn canvas(width: f64, height: f64, units: CartesianFrame) -> Region {
        Region::Rect { x: 0.0, y: 0.0, w: width, h: height, units }
    }

    pub fn is_degenerate(&self) -> bool {
        match *self {
            Region::Rect { w, h, units, .. } => !(w > 0.0 && h > 0.0 && units.width() > 0.0 && units.height() > 0.0),
            Region::Sector { unit, units, r_outer, .. } => {
                !(unit > 0.0 && r_outer > 0.0 && units.r2 > units.r1 && units.a2 > units.a1)
            }
        }
    }

    /// Region of a sub-container with declared frame `child`. `None` for a
    /// cartesian frame inside a sector.
    pub fn child(&self, child: &CoordinateFrame) -> Option<Region> {
        match (*self, child) {
            (Region::Rect { x, y, w, h, units }, CoordinateFrame::Cartesian(c)) => Some(Region::Rect {
                x: x + (c.x1 - units.x1) / units.width() * w,
                y: y + (units.y2 - c.y2) / units.height() * h,
                w: c.width() / units.width() * w,
                h: c.height() / units.height() * h,
                units: *c,
            }),
            (Region::Rect { x, y, w, h, .. }, CoordinateFrame::Polar(c)) => {
                let unit = w.min(h) / 2.0;
                Some(Region::Sector {
                    cx: x + c.cx * w,
                    cy: y + (1.0 - c.cy) * h,
                    unit,
                    r_inner: c.r1 * unit,
                    r_outer: c.r2 * unit,
                    a1: c.a1,
                    a2: c.a2,
                    units: *c,
                })
            }
            (Region::Sector { cx, cy, unit, r_inner, r_outer, a1, a2, units }, CoordinateFrame::Polar(c)) => {
                let r = |v: f64| lerp(r_inner, r_outer, (v - units.r1) / (units.r2 - units.r1));
                let a = |v: f64| lerp(a1, a2, (v - units.a1) / (units.a2 - units.a1));
                Some(Region::Sector {
                    cx: cx + (c.cx - 0.5) * 2.0 * unit,
                    cy: cy - (c.cy - 0.5) * 2.0 * unit,
                    unit,
                    r_inner: r(c.r1),
                    r_outer: r(c.r2),
                    a1: a(c.a1),
                    a2: a(c.a2),
                    units: *c,
                })
            }
            (Region::Sector { .. }, CoordinateFrame::Cartesian(_)) => None,
        }
    }

    /// Same region, but sub-containers are expressed in `frame`'s ranges.
    /// Used for template instances.
    pub fn with_units(self, frame: &CoordinateFrame) -> Region {
        match (self, frame) {
            (Region::Rect { x, y, w, h, .. }, CoordinateFrame::Cartesian(u)) => Region::Rect { x, y, w, h, units: *u },
            (Region::Sector { cx, cy, unit, r_inner, r_outer, a1, a2, .. }, CoordinateFrame::Polar(u)) => {
                Region::Sector { cx, cy, unit, r_inner, r_outer, a1, a2, units: *u }
            }
            (r, _) => r,
        }
    }

    /// Pixel x of a normalized position along the x dimension.
    pub fn x_at(&self, e: f64) -> f64 {
        match *self {
            Region::Rect { x, w, .. } => x + e / 100.0 * w,
            Region::Sector { cx, .. } => cx,
        }
    }

    /// Pixel y of a normalized position along the y dimension (upwards).
    pub fn y_at(&self, e: f64) -> f64 {
        match *self {
            Region::Rect { y, h, .. } => y + h - e / 100.0 * h,
            Region::Sector { cy, .. } => cy,
        }
    }

    pub fn radius_at(&self, e: f64) -> f64 {
        match *self {
            Region::Sector { r_inner, r_outer, .. } => r_inner + e / 100.0 * (r_outer - r_inner),
            Region::Rect { .. } => 0.0,
        }
    }

    pub fn angle_at(&self, e: f64) -> f64 {
        match *self {
            Region::Sector { a1, a2, .. } => a1 + e / 100.0 * (a2 - a1),
            Region::Rect { .. } => 0.0,
        }
    }

    pub fn radius_extent(&self, e: Extent) -> (f64, f64) {
        (self.radius_at(e.start), self.radius_at(e.end))
    }

    pub fn angle_extent(&self, e: Extent) -> (f64, f64) {
        (self.angle_at(e.start), self.angle_at(e.end))
    }

    pub fn center(&self) -> Point {
        match *self {
            Region::Rect { x, y, w, h, .. } => (x + w / 2.0, y + h / 2.0),
            Region::Sector { cx, cy, .. } => (cx, cy),
        }
    }

    /// Visual middle: the rectangle center, or the point at mid radius and
    /// mid angle of a sector (the center of a full disc).
    pub fn centroid(&self) -> Point {
        match *self {
            Region::Rect { .. } => self.center(),
            Region::Sector { cx, cy, r_inner, r_outer, a1, a2, .. } => {
                if r_inner <= 0.0 && a2 - a1 >= 360.0 - 1e-9 {
                    (cx, cy)
                } else {
                    polar_point(cx, cy, (r_inner + r_outer) / 2.0, (a1 + a2) / 2.0)
                }
            }
        }
    }

    /// Whether `p` lies inside the region, allowing `tol` pixels of slack.
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        match *self {
            Region::Rect { x, y, w, h, .. } => {
                p.0 >= x - tol && p.0 <= x + w + tol && p.1 >= y - tol && p.1 <= y + h + tol
            }
            Region::Sector { cx, cy, r_inner, r_outer, a1, a2, .. } => {
                let d = ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt();
                if d < r_inner - tol || d > r_outer + tol {
                    return false;
                }
                if a2 - a1 >= 360.0 - 1e-9 || d <= tol {
                    return true;
                }
                let slack = (tol / d).to_degrees();
                let a = angle_of(cx, cy, p);
                let rel = (a - a1).rem_euclid(360.0);
                let span = a2 - a1;
                rel <= span + slack || rel >= 360.0 - slack
            }
        }
    }

    pub fn scaled(&self, k: f64) -> Region {
        match *self {
            Region::Rect { x, y, w, h, units } => Region::Rect { x: x * k, y: y * k, w: w * k, h: h * k, units },
            Region::Sector { cx, cy, unit, r_inner, r_outer, a1, a2, units } => Region::Sector {
                cx: cx * k,
                cy: cy * k,
                unit: unit * k,
                r_inner: r_inner * k,
                r_outer: r_outer * k,
                a1,
                a2,
                units,
            },
        }
    }
}

/// A container (or one template instance) placed on the canvas.
#[derive(Debug, Clone, PartialEq)]
pub struct CanvasFrame {
    pub id: ScopedId,
    pub region: Region,
    pub is_leaf: bool,
    /// One instance of a template container.
    pub is_instance: bool,
}
