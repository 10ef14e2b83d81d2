//! Coordinate frames of containers.

use serde::{Deserialize, Serialize};

/// Which coordinate system a container uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoordinateKind {
    #[serde(alias = "Cartesian")]
    Cartesian,
    #[serde(alias = "Polar")]
    Polar,
}

impl CoordinateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CoordinateKind::Cartesian => "cartesian",
            CoordinateKind::Polar => "polar",
        }
    }
}

/// Rectangle with `(x1, y1)` the bottom-left and `(x2, y2)` the top-right
/// corner, in the parent's units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianFrame {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl CartesianFrame {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        CartesianFrame { x1, y1, x2, y2 }
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn contains(&self, other: &CartesianFrame, tol: f64) -> bool {
        other.x1 >= self.x1 - tol
            && other.y1 >= self.y1 - tol
            && other.x2 <= self.x2 + tol
            && other.y2 <= self.y2 + tol
    }

    pub fn union(&self, other: &CartesianFrame) -> CartesianFrame {
        CartesianFrame {
            x1: self.x1.min(other.x1),
            y1: self.y1.min(other.y1),
            x2: self.x2.max(other.x2),
            y2: self.y2.max(other.y2),
        }
    }
}

/// Annular sector. `cx`, `cy` are fractions of the parent frame, `r1`, `r2`
/// fractions of the unit radius and `a1`, `a2` degrees (0 at 12 o'clock,
/// clockwise).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarFrame {
    pub cx: f64,
    pub cy: f64,
    pub r1: f64,
    pub r2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl PolarFrame {
    pub fn full() -> Self {
        PolarFrame { cx: 0.5, cy: 0.5, r1: 0.0, r2: 1.0, a1: 0.0, a2: 360.0 }
    }

    pub fn contains(&self, other: &PolarFrame, tol: f64) -> bool {
        other.r1 >= self.r1 - tol
            && other.r2 <= self.r2 + tol
            && other.a1 >= self.a1 - tol
            && other.a2 <= self.a2 + tol
    }

    pub fn union(&self, other: &PolarFrame) -> PolarFrame {
        PolarFrame {
            cx: self.cx,
            cy: self.cy,
            r1: self.r1.min(other.r1),
            r2: self.r2.max(other.r2),
            a1: self.a1.min(other.a1),
            a2: self.a2.max(other.a2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoordinateFrame {
    Cartesian(CartesianFrame),
    Polar(PolarFrame),
}

impl CoordinateFrame {
    pub fn cartesian(x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        CoordinateFrame::Cartesian(CartesianFrame::new(x1, y1, x2, y2))
    }

    pub fn polar(cx: f64, cy: f64, r1: f64, r2: f64, a1: f64, a2: f64) -> Self {
        CoordinateFrame::Polar(PolarFrame { cx, cy, r1, r2, a1, a2 })
    }

    pub fn kind(&self) -> CoordinateKind {
        match self {
            CoordinateFrame::Cartesian(_) => CoordinateKind::Cartesian,
            CoordinateFrame::Polar(_) => CoordinateKind::Polar,
        }
    }

    pub fn is_polar(&self) -> bool {
        matches!(self, CoordinateFrame::Polar(_))
    }

    /// Checks the per-kind ordering invariants. Returns a message per
    /// violation.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        match self {
            CoordinateFrame::Cartesian(c) => {
                for v in [c.x1, c.y1, c.x2, c.y2] {
                    if !v.is_finite() {
                        out.push("coordinates must be finite".to_string());
                        return out;
                    }
                }
                if c.x1 >= c.x2 {
                    out.push(format!("x1 ({}) must be less than x2 ({})", c.x1, c.x2));
                }
                if c.y1 >= c.y2 {
                    out.push(format!("y1 ({}) must be less than y2 ({})", c.y1, c.y2));
                }
            }
            CoordinateFrame::Polar(p) => {
                for v in [p.cx, p.cy, p.r1, p.r2, p.a1, p.a2] {
                    if !v.is_finite() {
                        out.push("coordinates must be finite".to_string());
                        return out;
                    }
                }
                if !(0.0 <= p.r1 && p.r1 < p.r2 && p.r2 <= 1.0) {
                    out.push(format!("radii must satisfy 0 <= r1 < r2 <= 1 (got {}, {})", p.r1, p.r2));
                }
                if p.a1 >= p.a2 {
                    out.push(format!("a1 ({}) must be less than a2 ({})", p.a1, p.a2));
                } else if p.a2 - p.a1 > 360.0 {
                    out.push(format!("angular span {} exceeds 360 degrees", p.a2 - p.a1));
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.violations().is_empty()
    }

    /// Whether `child` lies within this frame's unit space. Only meaningful
    /// for same-kind pairs; a polar child of a cartesian parent is always
    /// positioned by fractions and therefore contained.
    pub fn contains(&self, child: &CoordinateFrame, tol: f64) -> bool {
        match (self, child) {
            (CoordinateFrame::Cartesian(p), CoordinateFrame::Cartesian(c)) => p.contains(c, tol),
            (CoordinateFrame::Polar(p), CoordinateFrame::Polar(c)) => p.contains(c, tol),
            (CoordinateFrame::Cartesian(_), CoordinateFrame::Polar(c)) => {
                (0.0..=1.0).contains(&c.cx) && (0.0..=1.0).contains(&c.cy)
            }
            (CoordinateFrame::Polar(_), CoordinateFrame::Cartesian(_)) => false,
        }
    }

    /// Smallest same-kind frame enclosing both. `None` for mixed kinds.
    pub fn union(&self, other: &CoordinateFrame) -> Option<CoordinateFrame> {
        match (self, other) {
            (CoordinateFrame::Cartesian(a), CoordinateFrame::Cartesian(b)) => Some(CoordinateFrame::Cartesian(a.union(b))),
            (CoordinateFrame::Polar(a), CoordinateFrame::Polar(b)) => Some(CoordinateFrame::Polar(a.union(b))),
            _ => None,
        }
    }
}
