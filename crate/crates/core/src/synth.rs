//! Synthetic chart generation: rasterized multi-curve charts with axes,
//! ticks, numeric labels, optional light grid, dash styles, per-curve ground
//! truth and a matching axis sidecar. Deterministic for a fixed seed.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fmath;
use crate::geom::{PointF, PointI, Rect};
use crate::ingest::{AxisSidecar, SidecarAxis, SidecarTick};
use crate::raster::{Rgb, RgbRaster};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum CurveClass {
    Linear,
    Quadratic,
    Asymptotic,
    Sinusoidal,
    Arbitrary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DashPattern {
    Solid,
    Dashed,
    DottedSquares,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CurveSpec {
    pub class: CurveClass,
    pub color: Rgb,
    pub stroke_width: u32,
    pub dash: DashPattern,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SyntheticSpec {
    pub curves: Vec<CurveSpec>,
    pub canvas_w: usize,
    pub canvas_h: usize,
    pub x_tick_count: u32,
    pub y_tick_count: u32,
    pub seed: u64,
    pub antialias: bool,
    pub light_grid: bool,
}

impl SyntheticSpec {
    /// Randomized spec for a class/count mix, itself deterministic in the seed.
    pub fn sample(n_curves: usize, classes: &[CurveClass], seed: u64) -> Self {
        let palette = [
            Rgb::new(214, 39, 40),   // red
            Rgb::new(31, 119, 180),  // blue
            Rgb::new(44, 160, 44),   // green
            Rgb::new(148, 30, 189),  // purple
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xC0FFEE);
        let curves = (0..n_curves)
            .map(|i| {
                let dash = match rng.gen_range(0..10) {
                    0..=6 => DashPattern::Solid,
                    7..=8 => DashPattern::Dashed,
                    _ => DashPattern::DottedSquares,
                };
                CurveSpec {
                    class: classes[i % classes.len()],
                    color: palette[i % palette.len()],
                    stroke_width: rng.gen_range(2..=4),
                    dash,
                }
            })
            .collect();
        SyntheticSpec {
            curves,
            canvas_w: 800,
            canvas_h: 600,
            x_tick_count: 6,
            y_tick_count: 5,
            seed,
            antialias: true,
            light_grid: seed % 3 == 0,
        }
    }
}

/// Ground-truth sample of one curve, in image coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruthPoint {
    /// 1-based index into the spec's curve list.
    pub curve: u32,
    pub x: i32,
    pub y: i32,
}

#[derive(Debug, Clone)]
pub struct SyntheticChart {
    pub image: RgbRaster,
    pub truth: Vec<TruthPoint>,
    pub sidecar: AxisSidecar,
    /// Interior plot rectangle (right of the vertical axis, above the
    /// horizontal one).
    pub plot_bounds: Rect,
    pub axis_origin: PointI,
}

const LEFT: i32 = 64;
const BOTTOM: i32 = 48;
const TOP: i32 = 20;
const RIGHT: i32 = 24;

/// Rasterize a chart. Curve colors must be pairwise distinct; widths 1-5.
pub fn generate_chart(spec: &SyntheticSpec) -> Result<SyntheticChart> {
    if spec.curves.is_empty() || spec.curves.len() > 4 {
        return Err(Error::InvalidSpec(format!(
            "need 1-4 curves, got {}",
            spec.curves.len()
        )));
    }
    for (i, c) in spec.curves.iter().enumerate() {
        if !(1..=5).contains(&c.stroke_width) {
            return Err(Error::InvalidSpec(format!(
                "stroke width {} outside 1-5",
                c.stroke_width
            )));
        }
        if spec.curves[..i].iter().any(|o| o.color == c.color) {
            return Err(Error::InvalidSpec(String::from("duplicate curve colors")));
        }
    }
    if spec.canvas_w < 200 || spec.canvas_h < 160 {
        return Err(Error::InvalidSpec(String::from("canvas too small")));
    }

    let w = spec.canvas_w as i32;
    let h = spec.canvas_h as i32;
    let ax = LEFT;
    let ay = h - BOTTOM;
    let mut img = RgbRaster::filled(spec.canvas_w, spec.canvas_h, Rgb::WHITE);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // Tick positions, evenly spaced.
    let x_ticks: Vec<i32> = (0..spec.x_tick_count as i32)
        .map(|i| ax + 40 + i * (w - RIGHT - ax - 60) / (spec.x_tick_count as i32 - 1).max(1))
        .collect();
    let y_ticks: Vec<i32> = (0..spec.y_tick_count as i32)
        .map(|i| TOP + 20 + i * (ay - TOP - 40) / (spec.y_tick_count as i32 - 1).max(1))
        .collect();

    // Light gray grid under everything; the homogeneity filter erases it.
    if spec.light_grid {
        for &gx in &x_ticks {
            img.fill_rect(gx, TOP, gx, ay - 1, Rgb::new(226, 226, 226));
        }
        for &gy in &y_ticks {
            img.fill_rect(ax + 1, gy, w - RIGHT, gy, Rgb::new(226, 226, 226));
        }
    }

    // Axis L-shape with outward tick marks.
    img.fill_rect(ax, TOP - 4, ax, ay, Rgb::BLACK);
    img.fill_rect(ax, ay, w - RIGHT + 4, ay, Rgb::BLACK);
    for &tx in &x_ticks {
        img.fill_rect(tx, ay + 1, tx, ay + 4, Rgb::BLACK);
    }
    for &ty in &y_ticks {
        img.fill_rect(ax - 4, ty, ax - 1, ty, Rgb::BLACK);
    }

    // Numeric labels under/left of the ticks.
    let x_step = [1i64, 2, 5, 10][rng.gen_range(0..4)];
    let x_base = rng.gen_range(0..20) as i64;
    let y_step = [1i64, 2, 5, 10][rng.gen_range(0..4)];
    let y_base = rng.gen_range(0..10) as i64;
    let x_values: Vec<i64> = (0..x_ticks.len() as i64).map(|i| x_base + i * x_step).collect();
    // y ticks run top to bottom; values decrease downward.
    let y_values: Vec<i64> = (0..y_ticks.len() as i64)
        .map(|i| y_base + (y_ticks.len() as i64 - 1 - i) * y_step)
        .collect();
    for (&tx, &v) in x_ticks.iter().zip(&x_values) {
        draw_number(&mut img, tx - 4, ay + 8, v);
    }
    for (&ty, &v) in y_ticks.iter().zip(&y_values) {
        let digits = v.to_string_width();
        draw_number(&mut img, ax - 9 - digits, ty - 3, v);
    }

    // Curve sampling area keeps clear of the axis lines.
    let cx0 = ax + 8;
    let cx1 = w - RIGHT - 4;
    let cy0 = TOP + 8;
    let cy1 = ay - 10;
    let mut truth = Vec::new();
    for (ci, curve) in spec.curves.iter().enumerate() {
        let f = sample_curve_fn(curve.class, &mut rng);
        let mut path: Vec<PointF> = Vec::new();
        for px in cx0..=cx1 {
            let t = (px - cx0) as f64 / (cx1 - cx0) as f64;
            let yn = f(t).clamp(0.0, 1.0);
            let py = cy1 as f64 - yn * (cy1 - cy0) as f64;
            path.push(PointF::new(px as f64, py));
            truth.push(TruthPoint {
                curve: ci as u32 + 1,
                x: px,
                y: fmath::round(py) as i32,
            });
        }
        draw_styled_path(&mut img, &path, curve);
    }

    let sidecar = AxisSidecar {
        x_axis: SidecarAxis {
            label: Some(String::from("Time")),
            ticks: x_values
                .iter()
                .map(|v| SidecarTick {
                    value: Some(*v as f64),
                    text: format!("{v}"),
                })
                .collect(),
        },
        y_axis: SidecarAxis {
            label: Some(String::from("Value")),
            ticks: y_values
                .iter()
                .map(|v| SidecarTick {
                    value: Some(*v as f64),
                    text: format!("{v}"),
                })
                .collect(),
        },
    };

    Ok(SyntheticChart {
        image: img,
        truth,
        sidecar,
        plot_bounds: Rect::new(ax + 1, 0, w - 1, ay - 1),
        axis_origin: PointI::new(ax, ay),
    })
}

trait IntWidth {
    fn to_string_width(&self) -> i32;
}

impl IntWidth for i64 {
    fn to_string_width(&self) -> i32 {
        format!("{self}").len() as i32 * 4
    }
}

/// Normalized curve samplers over t in [0, 1], values in [0, 1].
fn sample_curve_fn(class: CurveClass, rng: &mut ChaCha8Rng) -> alloc::boxed::Box<dyn Fn(f64) -> f64> {
    match class {
        CurveClass::Linear => {
            let slope: f64 = rng.gen_range(-0.7..0.7);
            let start = if slope >= 0.0 {
                rng.gen_range(0.1..(0.9 - slope).max(0.11))
            } else {
                rng.gen_range((0.1 - slope).min(0.89)..0.9)
            };
            alloc::boxed::Box::new(move |t| start + slope * t)
        }
        CurveClass::Quadratic => {
            let vertex = rng.gen_range(0.3..0.7);
            let open_up = rng.gen_bool(0.5);
            let span: f64 = rng.gen_range(0.45..0.75);
            let base = rng.gen_range(0.12..0.3);
            alloc::boxed::Box::new(move |t| {
                let d = t - vertex;
                let v = base + span * d * d / 0.36; // d in [-0.7,0.7] keeps v in range
                if open_up { v } else { 1.0 - v }
            })
        }
        CurveClass::Asymptotic => {
            let tau = rng.gen_range(0.12..0.3);
            let lo = rng.gen_range(0.1..0.25);
            let hi = rng.gen_range(0.65..0.9);
            let rising = rng.gen_bool(0.5);
            alloc::boxed::Box::new(move |t| {
                let v = lo + (hi - lo) * (1.0 - fmath::exp(-t / tau));
                if rising { v } else { 1.0 + lo - v }
            })
        }
        CurveClass::Sinusoidal => {
            let periods = rng.gen_range(0.8..1.6);
            let amp = rng.gen_range(0.15..0.28);
            let mid = rng.gen_range(0.38..0.62);
            let phase = rng.gen_range(0.0..core::f64::consts::TAU);
            alloc::boxed::Box::new(move |t| {
                mid + amp * fmath::sin(core::f64::consts::TAU * periods * t + phase)
            })
        }
        CurveClass::Arbitrary => {
            // Smoothstep blend through a handful of random control levels.
            let n = rng.gen_range(4..=6);
            let levels: Vec<f64> = (0..n).map(|_| rng.gen_range(0.15..0.85)).collect();
            alloc::boxed::Box::new(move |t| {
                let scaled = t * (levels.len() - 1) as f64;
                let i = (scaled as usize).min(levels.len() - 2);
                let frac = scaled - i as f64;
                let s = frac * frac * (3.0 - 2.0 * frac);
                levels[i] + (levels[i + 1] - levels[i]) * s
            })
        }
    }
}

/// Draw a sampled path with the curve's stroke width and dash style.
fn draw_styled_path(img: &mut RgbRaster, path: &[PointF], curve: &CurveSpec) {
    let width = curve.stroke_width as f64;
    match curve.dash {
        DashPattern::Solid => {
            for pair in path.windows(2) {
                img.draw_segment(pair[0], pair[1], width, curve.color, true);
            }
        }
        DashPattern::Dashed => {
            // Gaps stay under the 3x-width bridge threshold even when the
            // homogenized mask erodes to a 1-pixel estimate.
            let on = 14.0;
            let off = 3.0;
            let mut dist = 0.0;
            for pair in path.windows(2) {
                let phase = dist % (on + off);
                if phase < on {
                    img.draw_segment(pair[0], pair[1], width, curve.color, true);
                }
                dist += pair[0].dist(pair[1]);
            }
        }
        DashPattern::DottedSquares => {
            let side = curve.stroke_width as i32 + 2;
            let gap = 3.0;
            let step = side as f64 + gap;
            let mut dist = 0.0;
            let mut next_mark = 0.0;
            for pair in path.windows(2) {
                if dist >= next_mark {
                    let cx = pair[0].x as i32;
                    let cy = pair[0].y as i32;
                    img.fill_rect(
                        cx - side / 2,
                        cy - side / 2,
                        cx + side / 2,
                        cy + side / 2,
                        curve.color,
                    );
                    next_mark += step;
                }
                dist += pair[0].dist(pair[1]);
            }
        }
    }
}

// 3x5 digit glyphs, row bitmasks.
const GLYPHS: [[u8; 5]; 11] = [
    [0b111, 0b101, 0b101, 0b101, 0b111], // 0
    [0b010, 0b110, 0b010, 0b010, 0b111], // 1
    [0b111, 0b001, 0b111, 0b100, 0b111], // 2
    [0b111, 0b001, 0b111, 0b001, 0b111], // 3
    [0b101, 0b101, 0b111, 0b001, 0b001], // 4
    [0b111, 0b100, 0b111, 0b001, 0b111], // 5
    [0b111, 0b100, 0b111, 0b101, 0b111], // 6
    [0b111, 0b001, 0b010, 0b010, 0b010], // 7
    [0b111, 0b101, 0b111, 0b101, 0b111], // 8
    [0b111, 0b101, 0b111, 0b001, 0b111], // 9
    [0b000, 0b000, 0b111, 0b000, 0b000], // minus
];

fn draw_number(img: &mut RgbRaster, x: i32, y: i32, value: i64) {
    let mut cx = x;
    for ch in format!("{value}").chars() {
        let glyph = match ch {
            '-' => &GLYPHS[10],
            d => &GLYPHS[d.to_digit(10).unwrap() as usize],
        };
        for (ry, row) in glyph.iter().enumerate() {
            for rx in 0..3 {
                if row & (0b100 >> rx) != 0 {
                    let px = cx + rx;
                    let py = y + ry as i32;
                    if img.in_bounds(px, py) {
                        img.set(px as usize, py as usize, Rgb::BLACK);
                    }
                }
            }
        }
        cx += 4;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basic_spec(seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            curves: alloc::vec![
                CurveSpec {
                    class: CurveClass::Linear,
                    color: Rgb::new(214, 39, 40),
                    stroke_width: 2,
                    dash: DashPattern::Solid,
                },
                CurveSpec {
                    class: CurveClass::Sinusoidal,
                    color: Rgb::new(31, 119, 180),
                    stroke_width: 3,
                    dash: DashPattern::Dashed,
                },
            ],
            canvas_w: 640,
            canvas_h: 480,
            x_tick_count: 6,
            y_tick_count: 5,
            seed,
            antialias: true,
            light_grid: false,
        }
    }

    #[test]
    fn generates_image_truth_and_sidecar() {
        let chart = generate_chart(&basic_spec(7)).unwrap();
        assert_eq!(chart.image.width(), 640);
        assert!(!chart.truth.is_empty());
        assert_eq!(chart.sidecar.x_axis.ticks.len(), 6);
        assert_eq!(chart.sidecar.y_axis.ticks.len(), 5);
        // Both curves put pixels on the canvas.
        let reds = chart.image.data().iter().filter(|p| p.r > 180 && p.b < 120).count();
        let blues = chart.image.data().iter().filter(|p| p.b > 140 && p.r < 120).count();
        assert!(reds > 300 && blues > 300, "reds {reds} blues {blues}");
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_chart(&basic_spec(42)).unwrap();
        let b = generate_chart(&basic_spec(42)).unwrap();
        assert_eq!(a.image, b.image);
        assert_eq!(a.truth, b.truth);
        let c = generate_chart(&basic_spec(43)).unwrap();
        assert_ne!(a.image, c.image);
    }

    #[test]
    fn duplicate_colors_rejected() {
        let mut spec = basic_spec(1);
        spec.curves[1].color = spec.curves[0].color;
        assert!(matches!(generate_chart(&spec), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn truth_points_lie_inside_plot_bounds() {
        let chart = generate_chart(&basic_spec(11)).unwrap();
        for p in &chart.truth {
            assert!(chart.plot_bounds.contains(crate::geom::PointI::new(p.x, p.y)));
        }
    }

    #[test]
    fn sampled_spec_is_deterministic_and_valid() {
        let s1 = SyntheticSpec::sample(3, &[CurveClass::Arbitrary], 5);
        let s2 = SyntheticSpec::sample(3, &[CurveClass::Arbitrary], 5);
        assert_eq!(s1, s2);
        assert_eq!(s1.curves.len(), 3);
        generate_chart(&s1).unwrap();
    }
}
