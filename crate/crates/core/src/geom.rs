//! Geometric primitives shared by the tracing and analysis stages.
//!
//! All pixel coordinates are in image orientation: x grows right, y grows
//! down. Slopes are taken verbatim in that orientation; the growth classifier
//! flips the sign when it needs the mathematical reading.

use crate::fmath;

/// Integer pixel coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PointI {
    pub x: i32,
    pub y: i32,
}

impl PointI {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn to_f(self) -> PointF {
        PointF {
            x: self.x as f64,
            y: self.y as f64,
        }
    }

    pub fn dist(self, other: PointI) -> f64 {
        fmath::hypot((self.x - other.x) as f64, (self.y - other.y) as f64)
    }
}

/// Real-valued point, used for intersection locations and segment endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PointF {
    pub x: f64,
    pub y: f64,
}

impl PointF {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: PointF) -> f64 {
        fmath::hypot(self.x - other.x, self.y - other.y)
    }

    pub fn round_i(self) -> PointI {
        PointI {
            x: fmath::round(self.x) as i32,
            y: fmath::round(self.y) as i32,
        }
    }
}

/// Rise-over-run slope with a distinguished value for zero-run pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Slope {
    Finite(f64),
    Vertical,
}

impl Slope {
    pub fn finite(self) -> Option<f64> {
        match self {
            Slope::Finite(v) => Some(v),
            Slope::Vertical => None,
        }
    }

    pub fn is_vertical(self) -> bool {
        matches!(self, Slope::Vertical)
    }

    /// Absolute slope difference; any pairing with a vertical slope counts as
    /// an unbounded change of direction.
    pub fn abs_diff(self, other: Slope) -> f64 {
        match (self, other) {
            (Slope::Finite(a), Slope::Finite(b)) => fmath::abs(a - b),
            (Slope::Vertical, Slope::Vertical) => 0.0,
            _ => f64::INFINITY,
        }
    }
}

/// Slope between two points: `(y1 - y0) / (x1 - x0)`, or [`Slope::Vertical`]
/// when the run is zero. Errors on identical points.
pub fn slope_between(p0: PointI, p1: PointI) -> crate::Result<Slope> {
    if p0 == p1 {
        return Err(crate::Error::IdenticalPoints { x: p0.x, y: p0.y });
    }
    Ok(slope_between_f(p0.to_f(), p1.to_f()))
}

/// Slope of a real-valued point pair; callers guarantee the points differ.
pub fn slope_between_f(p0: PointF, p1: PointF) -> Slope {
    if p1.x == p0.x {
        Slope::Vertical
    } else {
        Slope::Finite((p1.y - p0.y) / (p1.x - p0.x))
    }
}

/// Inclusive pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Rect {
    pub x0: i32,
    pub y0: i32,
    pub x1: i32,
    pub y1: i32,
}

impl Rect {
    pub fn new(x0: i32, y0: i32, x1: i32, y1: i32) -> Self {
        debug_assert!(x0 <= x1 && y0 <= y1);
        Self { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> usize {
        (self.x1 - self.x0 + 1) as usize
    }

    pub fn height(&self) -> usize {
        (self.y1 - self.y0 + 1) as usize
    }

    pub fn contains(&self, p: PointI) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }
}

/// Segment identity: 1-based curve id, 0-based segment index. Renders as
/// `L<curve>S<index>`, the form used in sentences and graph nodes; the Kyrtos
/// language uses the 1-based `SL<curve><index+1>` spelling instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SegId {
    pub curve: u32,
    pub index: u32,
}

impl SegId {
    pub const fn new(curve: u32, index: u32) -> Self {
        Self { curve, index }
    }
}

impl core::fmt::Display for SegId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "L{}S{}", self.curve, self.index)
    }
}

/// Directed straight line-segment of a curve, ordered left to right.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LineSegment {
    pub id: SegId,
    pub start: PointF,
    pub end: PointF,
}

impl LineSegment {
    pub fn new(id: SegId, start: PointF, end: PointF) -> Self {
        debug_assert!(start.x <= end.x);
        Self { id, start, end }
    }

    pub fn slope(&self) -> Slope {
        slope_between_f(self.start, self.end)
    }

    pub fn length_px(&self) -> f64 {
        self.start.dist(self.end)
    }

    /// Direction vector (dx, dy), not normalized.
    pub fn direction(&self) -> (f64, f64) {
        (self.end.x - self.start.x, self.end.y - self.start.y)
    }

    /// Direction angle in radians, in (-pi/2, pi/2]; vertical segments map
    /// to pi/2 regardless of y direction (segments are x-ordered).
    pub fn direction_angle(&self) -> f64 {
        let (dx, dy) = self.direction();
        if dx == 0.0 {
            core::f64::consts::FRAC_PI_2
        } else {
            fmath::atan(dy / dx)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn slope_direct_substitution() {
        assert_eq!(
            slope_between(PointI::new(0, 0), PointI::new(2, 4)).unwrap(),
            Slope::Finite(2.0)
        );
        assert_eq!(
            slope_between(PointI::new(0, 0), PointI::new(4, -2)).unwrap(),
            Slope::Finite(-0.5)
        );
    }

    #[test]
    fn slope_vertical_on_zero_run() {
        assert_eq!(
            slope_between(PointI::new(1, 5), PointI::new(1, 9)).unwrap(),
            Slope::Vertical
        );
    }

    #[test]
    fn slope_identical_points_rejected() {
        assert!(matches!(
            slope_between(PointI::new(3, 3), PointI::new(3, 3)),
            Err(crate::Error::IdenticalPoints { x: 3, y: 3 })
        ));
    }

    proptest! {
        // Vertical mirror antisymmetry: negating y negates the slope.
        #[test]
        fn slope_mirror_antisymmetry(x0 in -500i32..500, y0 in -500i32..500,
                                     x1 in -500i32..500, y1 in -500i32..500) {
            prop_assume!((x0, y0) != (x1, y1));
            let s = slope_between(PointI::new(x0, y0), PointI::new(x1, y1)).unwrap();
            let m = slope_between(PointI::new(x0, -y0), PointI::new(x1, -y1)).unwrap();
            match (s, m) {
                (Slope::Finite(a), Slope::Finite(b)) => prop_assert_eq!(a, -b),
                (Slope::Vertical, Slope::Vertical) => {}
                _ => prop_assert!(false, "mirror changed verticality"),
            }
        }
    }
}
