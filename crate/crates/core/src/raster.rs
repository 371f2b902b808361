//! In-memory RGB raster, color-space helpers and stroke rasterization.
//!
//! Strokes are stamped by perpendicular distance to the segment (round caps),
//! either hard-edged or with coverage-blended edges. The synthetic generator
//! and the Petri-net reconstruction share this stroke model so a perfectly
//! recognized chart redraws onto the same pixels.

use alloc::vec;
use alloc::vec::Vec;

use crate::geom::PointF;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Rgb {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Rgb {
    pub const WHITE: Rgb = Rgb::new(255, 255, 255);
    pub const GRAY: Rgb = Rgb::new(128, 128, 128);
    pub const BLACK: Rgb = Rgb::new(0, 0, 0);

    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b }
    }

    /// Hue (degrees in [0, 360)), saturation and value, each in [0, 1].
    pub fn to_hsv(self) -> (f64, f64, f64) {
        let r = self.r as f64 / 255.0;
        let g = self.g as f64 / 255.0;
        let b = self.b as f64 / 255.0;
        let max = r.max(g).max(b);
        let min = r.min(g).min(b);
        let delta = max - min;
        let h = if delta == 0.0 {
            0.0
        } else if max == r {
            60.0 * (((g - b) / delta) % 6.0)
        } else if max == g {
            60.0 * ((b - r) / delta + 2.0)
        } else {
            60.0 * ((r - g) / delta + 4.0)
        };
        let h = if h < 0.0 { h + 360.0 } else { h };
        let s = if max == 0.0 { 0.0 } else { delta / max };
        (h, s, max)
    }

    /// Rec. 601 luma in [0, 255].
    pub fn luma(self) -> f64 {
        0.299 * self.r as f64 + 0.587 * self.g as f64 + 0.114 * self.b as f64
    }

    pub fn dist_sq(self, other: Rgb) -> u32 {
        let dr = self.r as i32 - other.r as i32;
        let dg = self.g as i32 - other.g as i32;
        let db = self.b as i32 - other.b as i32;
        (dr * dr + dg * dg + db * db) as u32
    }

    fn lerp(self, other: Rgb, t: f64) -> Rgb {
        let mix = |a: u8, b: u8| (a as f64 + (b as f64 - a as f64) * t + 0.5) as u8;
        Rgb::new(mix(self.r, other.r), mix(self.g, other.g), mix(self.b, other.b))
    }
}

/// Row-major RGB pixel grid.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RgbRaster {
    width: usize,
    height: usize,
    data: Vec<Rgb>,
}

impl RgbRaster {
    pub fn filled(width: usize, height: usize, color: Rgb) -> Self {
        Self {
            width,
            height,
            data: vec![color; width * height],
        }
    }

    pub fn from_data(width: usize, height: usize, data: Vec<Rgb>) -> Self {
        assert_eq!(data.len(), width * height);
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[Rgb] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Rgb {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, color: Rgb) {
        self.data[y * self.width + x] = color;
    }

    pub fn in_bounds(&self, x: i32, y: i32) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    /// Copy of the inclusive sub-rectangle.
    pub fn crop(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> RgbRaster {
        assert!(x0 <= x1 && y0 <= y1 && x1 < self.width && y1 < self.height);
        let w = x1 - x0 + 1;
        let h = y1 - y0 + 1;
        let mut data = Vec::with_capacity(w * h);
        for y in y0..=y1 {
            data.extend_from_slice(&self.data[y * self.width + x0..y * self.width + x1 + 1]);
        }
        RgbRaster { width: w, height: h, data }
    }

    pub fn fill_rect(&mut self, x0: i32, y0: i32, x1: i32, y1: i32, color: Rgb) {
        for y in y0.max(0)..=y1.min(self.height as i32 - 1) {
            for x in x0.max(0)..=x1.min(self.width as i32 - 1) {
                self.set(x as usize, y as usize, color);
            }
        }
    }

    /// Stamp a stroke of the given width between two points. With `antialias`
    /// the edge pixels blend toward the underlying canvas by coverage.
    pub fn draw_segment(&mut self, p0: PointF, p1: PointF, width: f64, color: Rgb, antialias: bool) {
        let half = width / 2.0;
        let pad = half + 1.5;
        let x_min = ((p0.x.min(p1.x) - pad).max(0.0)) as usize;
        let x_max = ((p0.x.max(p1.x) + pad).min(self.width as f64 - 1.0)) as usize;
        let y_min = ((p0.y.min(p1.y) - pad).max(0.0)) as usize;
        let y_max = ((p0.y.max(p1.y) + pad).min(self.height as f64 - 1.0)) as usize;
        if x_min > x_max || y_min > y_max {
            return;
        }
        for y in y_min..=y_max {
            for x in x_min..=x_max {
                let d = point_segment_distance(PointF::new(x as f64, y as f64), p0, p1);
                if antialias {
                    // Coverage ramps over one pixel at the stroke edge.
                    let coverage = (half + 0.5 - d).clamp(0.0, 1.0);
                    if coverage > 0.0 {
                        let base = self.get(x, y);
                        self.set(x, y, base.lerp(color, coverage));
                    }
                } else if d <= half {
                    self.set(x, y, color);
                }
            }
        }
    }
}

/// Distance from a point to the closed segment [a, b].
pub fn point_segment_distance(p: PointF, a: PointF, b: PointF) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len_sq = dx * dx + dy * dy;
    if len_sq == 0.0 {
        return p.dist(a);
    }
    let t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len_sq;
    let t = t.clamp(0.0, 1.0);
    p.dist(PointF::new(a.x + t * dx, a.y + t * dy))
}

/// Grayscale plane extracted from a raster, values in [0, 255].
pub fn luma_plane(img: &RgbRaster) -> Vec<f64> {
    img.data().iter().map(|p| p.luma()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hsv_primaries() {
        let (h, s, v) = Rgb::new(255, 0, 0).to_hsv();
        assert_eq!((h, s, v), (0.0, 1.0, 1.0));
        let (h, _, _) = Rgb::new(0, 255, 0).to_hsv();
        assert_eq!(h, 120.0);
        let (h, _, _) = Rgb::new(0, 0, 255).to_hsv();
        assert_eq!(h, 240.0);
        let (_, s, v) = Rgb::WHITE.to_hsv();
        assert_eq!((s, v), (0.0, 1.0));
    }

    #[test]
    fn crop_extracts_inclusive_rect() {
        let mut img = RgbRaster::filled(4, 4, Rgb::WHITE);
        img.set(2, 1, Rgb::BLACK);
        let sub = img.crop(1, 1, 3, 2);
        assert_eq!(sub.width(), 3);
        assert_eq!(sub.height(), 2);
        assert_eq!(sub.get(1, 0), Rgb::BLACK);
    }

    #[test]
    fn solid_stroke_covers_expected_thickness() {
        let mut img = RgbRaster::filled(40, 20, Rgb::WHITE);
        img.draw_segment(
            PointF::new(5.0, 10.0),
            PointF::new(35.0, 10.0),
            3.0,
            Rgb::BLACK,
            false,
        );
        // Column in the middle of the stroke: rows 9..=11 painted (|dy| <= 1.5).
        let col: Vec<bool> = (0..20).map(|y| img.get(20, y) == Rgb::BLACK).collect();
        let run: usize = col.iter().filter(|&&b| b).count();
        assert_eq!(run, 3);
    }
}
