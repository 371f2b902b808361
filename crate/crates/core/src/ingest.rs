//! Chart ingestion: color homogenization, plot-region separation, per-color
//! curve masks and stroke-width estimation.
//!
//! The HSV homogeneity filter sharpens, contrast-stretches, then quantizes
//! hue into fixed bins; every chromatic pixel is replaced by the dominant
//! (modal) RGB of its bin, while low-saturation pixels snap to white, gray or
//! black anchors. The result is an image whose pixels take at most a handful
//! of exact colors, so curves separate by plain color equality.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::config::HomogeneityConfig;
use crate::error::{Error, Result, Warning};
use crate::geom::{PointI, Rect};
use crate::raster::{Rgb, RgbRaster};

/// Validated input chart image (at least 64x64).
#[derive(Debug, Clone)]
pub struct ChartImage {
    raster: RgbRaster,
}

impl ChartImage {
    pub fn new(raster: RgbRaster) -> Result<Self> {
        if raster.width() < 64 || raster.height() < 64 {
            return Err(Error::ImageTooSmall {
                width: raster.width(),
                height: raster.height(),
            });
        }
        Ok(Self { raster })
    }

    pub fn raster(&self) -> &RgbRaster {
        &self.raster
    }
}

/// One palette color of a homogenized image with its pixel count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PaletteEntry {
    pub color: Rgb,
    pub count: usize,
}

/// Output of the HSV homogeneity filter: every pixel equals a palette entry.
#[derive(Debug, Clone)]
pub struct HomogenizedImage {
    pub raster: RgbRaster,
    /// Palette ordered by descending count (ties by RGB order).
    pub palette: Vec<PaletteEntry>,
    /// Palette entry with the maximal count.
    pub background: Rgb,
}

/// Interior plot rectangle of a chart plus context needed by mask extraction.
#[derive(Debug, Clone)]
pub struct PlotRegion {
    /// Bounds in original-image coordinates (inclusive).
    pub bounds: Rect,
    /// Cropped homogenized pixels.
    pub raster: RgbRaster,
    pub background: Rgb,
    /// Color of the detected axis lines, when any were found.
    pub axis_color: Option<Rgb>,
}

/// Binary mask of one curve, aligned to its plot region.
#[derive(Debug, Clone)]
pub struct CurveMask {
    pub curve_id: u32,
    pub color: Rgb,
    pub width_estimate_px: u32,
    width: usize,
    height: usize,
    grid: Vec<bool>,
}

impl CurveMask {
    pub fn from_grid(curve_id: u32, color: Rgb, width: usize, height: usize, grid: Vec<bool>) -> Self {
        assert_eq!(grid.len(), width * height);
        let mut mask = Self {
            curve_id,
            color,
            width_estimate_px: 1,
            width,
            height,
            grid,
        };
        mask.width_estimate_px = estimate_curve_width(&mask);
        mask
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn is_set(&self, x: usize, y: usize) -> bool {
        self.grid[y * self.width + x]
    }

    pub fn pixel_count(&self) -> usize {
        self.grid.iter().filter(|&&b| b).count()
    }

    /// Maximal vertical runs in a column as inclusive (y0, y1) pairs.
    pub fn column_runs(&self, x: usize) -> Vec<(usize, usize)> {
        let mut runs = Vec::new();
        let mut start = None;
        for y in 0..self.height {
            match (self.is_set(x, y), start) {
                (true, None) => start = Some(y),
                (false, Some(s)) => {
                    runs.push((s, y - 1));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            runs.push((s, self.height - 1));
        }
        runs
    }
}

/// Tick on one axis: pixel coordinate along the axis in original-image
/// coordinates, plus the numeric value and label text once a sidecar (or OCR
/// adapter) has been merged in.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AxisTick {
    pub pixel: i32,
    pub value: Option<f64>,
    pub text: Option<String>,
}

/// Axis geometry and (optionally) value mapping for a chart.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AxisModel {
    pub x_ticks: Vec<AxisTick>,
    pub y_ticks: Vec<AxisTick>,
    pub x_label: Option<String>,
    pub y_label: Option<String>,
    pub origin_px: Option<PointI>,
}

impl AxisModel {
    fn valued(ticks: &[AxisTick]) -> Vec<(f64, f64)> {
        ticks
            .iter()
            .filter_map(|t| t.value.map(|v| (t.pixel as f64, v)))
            .collect()
    }

    /// True when this axis can map pixels to numeric values (>= 2 valued ticks).
    pub fn x_has_values(&self) -> bool {
        Self::valued(&self.x_ticks).len() >= 2
    }

    pub fn y_has_values(&self) -> bool {
        Self::valued(&self.y_ticks).len() >= 2
    }

    pub fn x_value_at(&self, pixel: f64) -> Option<f64> {
        linear_map(&Self::valued(&self.x_ticks), pixel)
    }

    pub fn y_value_at(&self, pixel: f64) -> Option<f64> {
        linear_map(&Self::valued(&self.y_ticks), pixel)
    }
}

/// Least-squares linear fit through (pixel, value) pairs, evaluated at `px`.
/// Axis scales are linear, so a fit is robust to single-pixel tick jitter.
fn linear_map(pairs: &[(f64, f64)], px: f64) -> Option<f64> {
    if pairs.len() < 2 {
        return None;
    }
    let n = pairs.len() as f64;
    let sx: f64 = pairs.iter().map(|p| p.0).sum();
    let sy: f64 = pairs.iter().map(|p| p.1).sum();
    let sxx: f64 = pairs.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pairs.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return None;
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    Some(slope * px + intercept)
}

/// Axis metadata supplied out-of-band (sidecar file or an OCR adapter).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AxisSidecar {
    pub x_axis: SidecarAxis,
    pub y_axis: SidecarAxis,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SidecarAxis {
    pub label: Option<String>,
    pub ticks: Vec<SidecarTick>,
}

/// One sidecar tick: numeric value (when the label parses as a number) and
/// its verbatim text, listed in increasing pixel order.
#[derive(Debug, Clone, PartialEq)]
pub struct SidecarTick {
    pub value: Option<f64>,
    pub text: String,
}

// ---------------------------------------------------------------------------
// HSV homogeneity filter
// ---------------------------------------------------------------------------

/// Collapse shades onto dominant colors. Total over any input; idempotent.
pub fn apply_hsv_homogeneity(img: &RgbRaster, cfg: &HomogeneityConfig) -> HomogenizedImage {
    let sharpened = unsharp(img, cfg.sharpen_amount);
    let stretched = contrast_stretch(&sharpened, cfg.stretch_low_pct, cfg.stretch_high_pct);

    let w = stretched.width();
    let h = stretched.height();
    let bins = cfg.hue_bins.max(1) as f64;

    // Pass 1: classify pixels and tally exact RGB frequencies per hue bin.
    #[derive(Clone, Copy)]
    enum Class {
        Anchor(Rgb),
        Bin(u32),
    }
    let mut classes = Vec::with_capacity(w * h);
    let mut bin_counts: Vec<BTreeMap<Rgb, usize>> = vec![BTreeMap::new(); cfg.hue_bins.max(1) as usize];
    for y in 0..h {
        for x in 0..w {
            let p = stretched.get(x, y);
            let (hue, s, v) = p.to_hsv();
            let class = if v < cfg.value_black {
                Class::Anchor(Rgb::BLACK)
            } else if s < cfg.saturation_threshold {
                if v > cfg.value_white {
                    Class::Anchor(Rgb::WHITE)
                } else {
                    Class::Anchor(Rgb::GRAY)
                }
            } else {
                let bin = ((hue / 360.0 * bins) as u32).min(cfg.hue_bins.max(1) - 1);
                *bin_counts[bin as usize].entry(p).or_insert(0) += 1;
                Class::Bin(bin)
            };
            classes.push(class);
        }
    }

    // Dominant (modal) RGB per bin; ties resolve to the smallest RGB.
    let modal: Vec<Option<Rgb>> = bin_counts
        .iter()
        .map(|counts| {
            counts
                .iter()
                .fold(None::<(Rgb, usize)>, |best, (&c, &n)| match best {
                    Some((_, bn)) if bn >= n => best,
                    _ => Some((c, n)),
                })
                .map(|(c, _)| c)
        })
        .collect();

    // Pass 2: rewrite pixels.
    let mut data = Vec::with_capacity(w * h);
    for class in &classes {
        data.push(match class {
            Class::Anchor(c) => *c,
            Class::Bin(b) => modal[*b as usize].unwrap_or(Rgb::WHITE),
        });
    }
    let mut raster = RgbRaster::from_data(w, h, data);

    // Fold rare colors into their nearest palette neighbor and cap the
    // palette size, keeping every pixel equal to some surviving entry.
    let mut counts: BTreeMap<Rgb, usize> = BTreeMap::new();
    for p in raster.data() {
        *counts.entry(*p).or_insert(0) += 1;
    }

    // Shades of one color can straddle a hue-bin boundary (red sits exactly
    // on the 0/360 wraparound); reunify chromatic entries whose hues nearly
    // coincide before any count-based folding.
    let hue_dist = |a: f64, b: f64| -> f64 {
        let d = libm::fabs(a - b) % 360.0;
        d.min(360.0 - d)
    };
    let merge_span = 360.0 / cfg.hue_bins.max(1) as f64 * 0.6;
    loop {
        let chromatic: Vec<(Rgb, usize, f64)> = counts
            .iter()
            .filter_map(|(&c, &n)| {
                let (hue, s, v) = c.to_hsv();
                (s >= cfg.saturation_threshold && v >= cfg.value_black).then_some((c, n, hue))
            })
            .collect();
        let mut pair: Option<(Rgb, Rgb, f64)> = None;
        for i in 0..chromatic.len() {
            for j in i + 1..chromatic.len() {
                let d = hue_dist(chromatic[i].2, chromatic[j].2);
                if d <= merge_span && pair.map(|(_, _, pd)| d < pd).unwrap_or(true) {
                    // Smaller count folds into larger; ties by RGB order.
                    let (small, large) = if (chromatic[i].1, chromatic[i].0)
                        <= (chromatic[j].1, chromatic[j].0)
                    {
                        (chromatic[i].0, chromatic[j].0)
                    } else {
                        (chromatic[j].0, chromatic[i].0)
                    };
                    pair = Some((small, large, d));
                }
            }
        }
        let Some((victim, target, _)) = pair else { break };
        for y in 0..h {
            for x in 0..w {
                if raster.get(x, y) == victim {
                    raster.set(x, y, target);
                }
            }
        }
        let victim_count = counts.remove(&victim).unwrap_or(0);
        *counts.get_mut(&target).expect("target exists") += victim_count;
    }

    loop {
        if counts.len() <= 1 {
            break;
        }
        let over_cap = counts.len() > cfg.max_palette;
        let smallest = counts
            .iter()
            .fold(None::<(Rgb, usize)>, |best, (&c, &n)| match best {
                Some((_, bn)) if bn <= n => best,
                _ => Some((c, n)),
            })
            .expect("nonempty palette");
        if !over_cap && smallest.1 >= cfg.min_color_pixels {
            break;
        }
        let (victim, victim_count) = smallest;
        let nearest = counts
            .keys()
            .filter(|&&c| c != victim)
            .copied()
            .fold(None::<(Rgb, u32)>, |best, c| {
                let d = c.dist_sq(victim);
                match best {
                    Some((_, bd)) if bd <= d => best,
                    _ => Some((c, d)),
                }
            })
            .map(|(c, _)| c)
            .expect("palette has a second color");
        for y in 0..h {
            for x in 0..w {
                if raster.get(x, y) == victim {
                    raster.set(x, y, nearest);
                }
            }
        }
        counts.remove(&victim);
        *counts.get_mut(&nearest).expect("nearest exists") += victim_count;
    }

    let mut palette: Vec<PaletteEntry> = counts
        .iter()
        .map(|(&color, &count)| PaletteEntry { color, count })
        .collect();
    palette.sort_by(|a, b| b.count.cmp(&a.count).then(a.color.cmp(&b.color)));
    let background = palette.first().map(|e| e.color).unwrap_or(Rgb::WHITE);

    HomogenizedImage {
        raster,
        palette,
        background,
    }
}

/// 3x3 unsharp mask: `out = in + amount * (in - box3(in))`, replicated borders.
fn unsharp(img: &RgbRaster, amount: f64) -> RgbRaster {
    if amount == 0.0 {
        return img.clone();
    }
    let w = img.width() as i32;
    let h = img.height() as i32;
    let mut out = Vec::with_capacity((w * h) as usize);
    for y in 0..h {
        for x in 0..w {
            let mut sum = [0i32; 3];
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let px = (x + dx).clamp(0, w - 1) as usize;
                    let py = (y + dy).clamp(0, h - 1) as usize;
                    let p = img.get(px, py);
                    sum[0] += p.r as i32;
                    sum[1] += p.g as i32;
                    sum[2] += p.b as i32;
                }
            }
            let p = img.get(x as usize, y as usize);
            let sharpen = |c: u8, s: i32| -> u8 {
                let mean = s as f64 / 9.0;
                (c as f64 + amount * (c as f64 - mean)).clamp(0.0, 255.0) as u8
            };
            out.push(Rgb::new(
                sharpen(p.r, sum[0]),
                sharpen(p.g, sum[1]),
                sharpen(p.b, sum[2]),
            ));
        }
    }
    RgbRaster::from_data(w as usize, h as usize, out)
}

/// Percentile contrast stretch over the HSV value channel. Pixels rescale by
/// `v' / v`, which leaves hue and saturation untouched so the later binning
/// still sees the original colors. Images whose value range is already wide
/// (true darks and brights both present, as in any clean chart) pass through;
/// the stretch only activates for genuinely washed-out inputs, where the
/// percentile statistic is meaningful.
fn contrast_stretch(img: &RgbRaster, low_pct: f64, high_pct: f64) -> RgbRaster {
    let total = img.width() * img.height();
    if total == 0 {
        return img.clone();
    }
    let value_of = |p: &Rgb| p.r.max(p.g).max(p.b) as usize;
    let mut hist = [0usize; 256];
    for p in img.data() {
        hist[value_of(p)] += 1;
    }
    let percentile = |pct: f64| -> f64 {
        let target = (total as f64 * pct / 100.0) as usize;
        let mut acc = 0usize;
        for (v, &n) in hist.iter().enumerate() {
            acc += n;
            if acc > target {
                return v as f64;
            }
        }
        255.0
    };
    let lo = percentile(low_pct);
    let hi = percentile(high_pct);
    if (lo <= 64.0 && hi >= 192.0) || hi - lo < 1.0 {
        return img.clone();
    }
    let data = img
        .data()
        .iter()
        .map(|p| {
            let v = value_of(p) as f64;
            if v == 0.0 {
                return *p;
            }
            let stretched = ((v - lo) * 255.0 / (hi - lo)).clamp(0.0, 255.0);
            let scale = stretched / v;
            Rgb::new(
                (p.r as f64 * scale).clamp(0.0, 255.0) as u8,
                (p.g as f64 * scale).clamp(0.0, 255.0) as u8,
                (p.b as f64 * scale).clamp(0.0, 255.0) as u8,
            )
        })
        .collect();
    RgbRaster::from_data(img.width(), img.height(), data)
}

// ---------------------------------------------------------------------------
// Region separation
// ---------------------------------------------------------------------------

/// Separate the interior plot rectangle from the axis bands and detect tick
/// pixel positions. Axis lines are the longest horizontal and vertical runs
/// of the darkest non-background palette color; a run qualifies only when it
/// exceeds half of the corresponding image dimension.
pub fn segment_regions(h: &HomogenizedImage) -> (PlotRegion, AxisModel, Vec<Warning>) {
    let img = &h.raster;
    let (w, ht) = (img.width(), img.height());
    let mut warnings = Vec::new();

    let axis_color = h
        .palette
        .iter()
        .filter(|e| e.color != h.background)
        .map(|e| e.color)
        .fold(None::<Rgb>, |best, c| match best {
            Some(b) if (b.luma(), b) <= (c.luma(), c) => Some(b),
            _ => Some(c),
        });

    let mut x_range = (0usize, w - 1);
    let mut y_range = (0usize, ht - 1);
    let mut v_band: Option<(usize, usize)> = None;
    let mut h_band: Option<(usize, usize)> = None;

    if let Some(axis) = axis_color {
        let col_runs: Vec<usize> = (0..w)
            .map(|x| longest_run((0..ht).map(|y| img.get(x, y) == axis)))
            .collect();
        let row_runs: Vec<usize> = (0..ht)
            .map(|y| longest_run((0..w).map(|x| img.get(x, y) == axis)))
            .collect();

        if let Some((cx, run)) = arg_longest(&col_runs) {
            if run * 2 > ht {
                let band = expand_band(&col_runs, cx);
                v_band = Some(band);
                let left = band.0;
                let right = w - 1 - band.1;
                x_range = if right >= left {
                    (band.1 + 1, w - 1)
                } else {
                    (0, band.0.saturating_sub(1))
                };
            }
        }
        if let Some((ry, run)) = arg_longest(&row_runs) {
            if run * 2 > w {
                let band = expand_band(&row_runs, ry);
                h_band = Some(band);
                let above = band.0;
                let below = ht - 1 - band.1;
                y_range = if above >= below {
                    (0, band.0.saturating_sub(1))
                } else {
                    (band.1 + 1, ht - 1)
                };
            }
        }
    }

    if v_band.is_none() && h_band.is_none() {
        warnings.push(Warning::NoAxesDetected);
    }

    let bounds = Rect::new(
        x_range.0 as i32,
        y_range.0 as i32,
        x_range.1 as i32,
        y_range.1 as i32,
    );
    let raster = img.crop(x_range.0, y_range.0, x_range.1, y_range.1);

    // Tick marks live on the label side of each axis band.
    let mut axis_model = AxisModel::default();
    if let (Some(axis), Some((bx0, bx1))) = (axis_color, v_band) {
        let region_right = x_range.0 > bx0;
        let (scan0, scan1) = if region_right {
            (bx0.saturating_sub(6), bx0.saturating_sub(1))
        } else {
            ((bx1 + 1).min(w - 1), (bx1 + 6).min(w - 1))
        };
        let rows: Vec<usize> = (0..ht)
            .filter(|&y| (scan0..=scan1).any(|x| img.get(x, y) == axis))
            .collect();
        axis_model.y_ticks = group_consecutive(&rows)
            .into_iter()
            .map(|p| AxisTick { pixel: p as i32, value: None, text: None })
            .collect();
    }
    if let (Some(axis), Some((by0, by1))) = (axis_color, h_band) {
        let region_above = y_range.1 < by0;
        let (scan0, scan1) = if region_above {
            ((by1 + 1).min(ht - 1), (by1 + 6).min(ht - 1))
        } else {
            (by0.saturating_sub(6), by0.saturating_sub(1))
        };
        let cols: Vec<usize> = (0..w)
            .filter(|&x| (scan0..=scan1).any(|y| img.get(x, y) == axis))
            .collect();
        axis_model.x_ticks = group_consecutive(&cols)
            .into_iter()
            .map(|p| AxisTick { pixel: p as i32, value: None, text: None })
            .collect();
    }
    if let (Some((bx0, bx1)), Some((by0, by1))) = (v_band, h_band) {
        let ox = if x_range.0 > bx0 { bx1 } else { bx0 };
        let oy = if y_range.1 < by0 { by0 } else { by1 };
        axis_model.origin_px = Some(PointI::new(ox as i32, oy as i32));
    }

    (
        PlotRegion {
            bounds,
            raster,
            background: h.background,
            axis_color: if v_band.is_some() || h_band.is_some() {
                axis_color
            } else {
                None
            },
        },
        axis_model,
        warnings,
    )
}

fn longest_run(bits: impl Iterator<Item = bool>) -> usize {
    let mut best = 0usize;
    let mut cur = 0usize;
    for b in bits {
        if b {
            cur += 1;
            best = best.max(cur);
        } else {
            cur = 0;
        }
    }
    best
}

/// Index and length of the longest run; first index wins ties.
fn arg_longest(runs: &[usize]) -> Option<(usize, usize)> {
    runs.iter()
        .copied()
        .enumerate()
        .fold(None, |best, (i, r)| match best {
            Some((_, br)) if br >= r => best,
            _ => Some((i, r)),
        })
}

/// Expand an axis line to the band of adjacent columns/rows whose runs are
/// at least 80% as long (multi-pixel axis strokes).
fn expand_band(runs: &[usize], center: usize) -> (usize, usize) {
    let thresh = runs[center] * 4 / 5;
    let mut lo = center;
    while lo > 0 && runs[lo - 1] >= thresh {
        lo -= 1;
    }
    let mut hi = center;
    while hi + 1 < runs.len() && runs[hi + 1] >= thresh {
        hi += 1;
    }
    (lo, hi)
}

/// Collapse consecutive indices to their middle element.
fn group_consecutive(sorted: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[j] + 1 {
            j += 1;
        }
        out.push(sorted[(i + j) / 2]);
        i = j + 1;
    }
    out
}

// ---------------------------------------------------------------------------
// Curve masks
// ---------------------------------------------------------------------------

/// One mask per chromatic palette color in the region, excluding background
/// and axis colors, ordered by pixel count descending. Achromatic colors
/// (equal channels: the white/gray/black anchors and any grid residue) never
/// form curves; the homogeneity filter maps every saturated shade to a
/// chromatic bin color.
pub fn extract_curve_masks(region: &PlotRegion, min_pixels: usize) -> Result<Vec<CurveMask>> {
    let img = &region.raster;
    let (w, h) = (img.width(), img.height());
    let mut counts: BTreeMap<Rgb, usize> = BTreeMap::new();
    for p in img.data() {
        *counts.entry(*p).or_insert(0) += 1;
    }
    let mut candidates: Vec<(Rgb, usize)> = counts
        .into_iter()
        .filter(|(c, n)| {
            *n >= min_pixels
                && *c != region.background
                && Some(*c) != region.axis_color
                && !(c.r == c.g && c.g == c.b)
        })
        .collect();
    candidates.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    if candidates.is_empty() {
        return Err(Error::NoCurvesFound { min_pixels });
    }
    Ok(candidates
        .into_iter()
        .enumerate()
        .map(|(i, (color, _))| {
            let mut grid = vec![false; w * h];
            for y in 0..h {
                for x in 0..w {
                    if img.get(x, y) == color {
                        grid[y * w + x] = true;
                    }
                }
            }
            CurveMask::from_grid(i as u32 + 1, color, w, h, grid)
        })
        .collect())
}

/// Median over nonempty mask columns of the longest vertical run length
/// (lower median on even counts). Robust to dash gaps and the tall runs of
/// near-vertical excursions.
pub fn estimate_curve_width(mask: &CurveMask) -> u32 {
    let mut runs: Vec<usize> = (0..mask.width())
        .filter_map(|x| {
            mask.column_runs(x)
                .iter()
                .map(|(y0, y1)| y1 - y0 + 1)
                .max()
        })
        .collect();
    if runs.is_empty() {
        return 1;
    }
    runs.sort_unstable();
    runs[(runs.len() - 1) / 2].max(1) as u32
}

// ---------------------------------------------------------------------------
// Axis sidecar merge
// ---------------------------------------------------------------------------

/// Merge sidecar values and labels onto detected tick positions. Both sides
/// list ticks in increasing pixel order, so ranks align; a count mismatch
/// beyond 50% of the detected ticks is an error, smaller mismatches match the
/// common prefix and warn.
pub fn merge_axis_sidecar(
    sidecar: &AxisSidecar,
    mut detected: AxisModel,
) -> Result<(AxisModel, Vec<Warning>)> {
    let mut warnings = Vec::new();
    for (name, spec, ticks) in [
        ("x", &sidecar.x_axis, &mut detected.x_ticks),
        ("y", &sidecar.y_axis, &mut detected.y_ticks),
    ] {
        let ns = spec.ticks.len();
        let nd = ticks.len();
        if ns == 0 {
            continue;
        }
        let diff = ns.abs_diff(nd);
        if diff * 2 > nd.max(1) {
            return Err(Error::TickMismatch {
                axis: if name == "x" { "x" } else { "y" },
                sidecar: ns,
                detected: nd,
            });
        }
        if diff > 0 {
            warnings.push(Warning::PartialTickMatch { axis: String::from(name) });
        }
        for (tick, side) in ticks.iter_mut().zip(spec.ticks.iter()) {
            tick.value = side.value;
            tick.text = Some(side.text.clone());
        }
    }
    if sidecar.x_axis.label.is_some() {
        detected.x_label = sidecar.x_axis.label.clone();
    }
    if sidecar.y_axis.label.is_some() {
        detected.y_label = sidecar.y_axis.label.clone();
    }
    Ok((detected, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::PointF;

    fn cfg() -> HomogeneityConfig {
        HomogeneityConfig::default()
    }

    #[test]
    fn chart_image_rejects_small() {
        let img = RgbRaster::filled(10, 10, Rgb::WHITE);
        assert!(matches!(
            ChartImage::new(img),
            Err(Error::ImageTooSmall { width: 10, height: 10 })
        ));
        assert!(ChartImage::new(RgbRaster::filled(64, 64, Rgb::WHITE)).is_ok());
    }

    #[test]
    fn homogeneity_collapses_antialiased_shades() {
        let mut img = RgbRaster::filled(120, 80, Rgb::WHITE);
        img.draw_segment(
            PointF::new(10.0, 20.0),
            PointF::new(110.0, 60.0),
            3.0,
            Rgb::new(220, 30, 30),
            true,
        );
        let h = apply_hsv_homogeneity(&img, &cfg());
        assert_eq!(h.palette.len(), 2, "palette: {:?}", h.palette);
        assert_eq!(h.background, Rgb::WHITE);
        let red = h.palette.iter().find(|e| e.color != Rgb::WHITE).unwrap().color;
        let (hue, s, _) = red.to_hsv();
        assert!(s > 0.5, "dominant color should stay saturated");
        assert!(hue < 20.0 || hue > 340.0, "dominant color should stay red, hue {hue}");
    }

    #[test]
    fn homogeneity_fixed_point_on_two_color_image() {
        let mut img = RgbRaster::filled(80, 80, Rgb::WHITE);
        img.fill_rect(10, 10, 40, 20, Rgb::new(255, 0, 0));
        let h1 = apply_hsv_homogeneity(&img, &cfg());
        assert_eq!(h1.raster, img);
        let h2 = apply_hsv_homogeneity(&h1.raster, &cfg());
        assert_eq!(h2.raster, h1.raster);
    }

    #[test]
    fn homogeneity_two_curves_recoverable_by_color() {
        let mut img = RgbRaster::filled(160, 100, Rgb::WHITE);
        img.draw_segment(PointF::new(5.0, 20.0), PointF::new(150.0, 40.0), 3.0, Rgb::new(230, 20, 20), true);
        img.draw_segment(PointF::new(5.0, 80.0), PointF::new(150.0, 55.0), 3.0, Rgb::new(20, 20, 230), true);
        let h = apply_hsv_homogeneity(&img, &cfg());
        assert_eq!(h.palette.len(), 3);
        let reds = h.raster.data().iter().filter(|p| p.r > 150 && p.b < 100).count();
        let blues = h.raster.data().iter().filter(|p| p.b > 150 && p.r < 100).count();
        assert!(reds > 100 && blues > 100);
    }

    fn axes_chart(w: usize, h: usize, ax: i32, ay: i32) -> RgbRaster {
        let mut img = RgbRaster::filled(w, h, Rgb::WHITE);
        img.fill_rect(ax, 0, ax, ay, Rgb::BLACK);
        img.fill_rect(ax, ay, w as i32 - 1, ay, Rgb::BLACK);
        img
    }

    #[test]
    fn segment_regions_excludes_axis_bands() {
        let mut img = axes_chart(600, 400, 40, 360);
        img.fill_rect(100, 100, 180, 103, Rgb::new(255, 0, 0));
        let h = apply_hsv_homogeneity(&img, &cfg());
        let (region, _, warnings) = segment_regions(&h);
        assert_eq!(region.bounds, Rect::new(41, 0, 599, 359));
        assert!(warnings.is_empty());
        assert_eq!(region.axis_color, Some(Rgb::BLACK));
    }

    #[test]
    fn segment_regions_falls_back_to_full_image() {
        let mut img = RgbRaster::filled(200, 120, Rgb::WHITE);
        img.draw_segment(PointF::new(10.0, 30.0), PointF::new(190.0, 90.0), 3.0, Rgb::new(200, 0, 0), false);
        let h = apply_hsv_homogeneity(&img, &cfg());
        let (region, _, warnings) = segment_regions(&h);
        assert_eq!(region.bounds, Rect::new(0, 0, 199, 119));
        assert_eq!(warnings, vec![Warning::NoAxesDetected]);
    }

    #[test]
    fn segment_regions_ignores_short_grid_runs() {
        let mut img = axes_chart(600, 400, 40, 360);
        // Dashed grid in the axis color: maximal runs stay far below 50%.
        for gx in (140..600).step_by(100) {
            let mut y = 4;
            while y < 356 {
                img.fill_rect(gx, y, gx, y + 3, Rgb::BLACK);
                y += 10;
            }
        }
        let h = apply_hsv_homogeneity(&img, &cfg());
        let (region, _, _) = segment_regions(&h);
        assert_eq!(region.bounds, Rect::new(41, 0, 599, 359));
    }

    #[test]
    fn segment_regions_detects_ticks() {
        let mut img = axes_chart(600, 400, 40, 360);
        for tx in [140, 240, 340, 440] {
            img.fill_rect(tx, 361, tx, 365, Rgb::BLACK);
        }
        for ty in [60, 160, 260] {
            img.fill_rect(35, ty, 39, ty, Rgb::BLACK);
        }
        let h = apply_hsv_homogeneity(&img, &cfg());
        let (_, axis, _) = segment_regions(&h);
        let xs: Vec<i32> = axis.x_ticks.iter().map(|t| t.pixel).collect();
        let ys: Vec<i32> = axis.y_ticks.iter().map(|t| t.pixel).collect();
        assert_eq!(xs, vec![140, 240, 340, 440]);
        assert_eq!(ys, vec![60, 160, 260]);
        assert_eq!(axis.origin_px, Some(PointI::new(40, 360)));
    }

    fn region_of(img: &RgbRaster, cfg: &HomogeneityConfig) -> PlotRegion {
        let h = apply_hsv_homogeneity(img, cfg);
        segment_regions(&h).0
    }

    #[test]
    fn masks_one_per_curve_color() {
        let mut img = RgbRaster::filled(200, 120, Rgb::WHITE);
        img.fill_rect(20, 20, 80, 23, Rgb::new(255, 0, 0));
        img.fill_rect(20, 60, 80, 63, Rgb::new(0, 0, 255));
        let region = region_of(&img, &cfg());
        let masks = extract_curve_masks(&region, 50).unwrap();
        assert_eq!(masks.len(), 2);
        for y in 0..masks[0].height() {
            for x in 0..masks[0].width() {
                assert!(!(masks[0].is_set(x, y) && masks[1].is_set(x, y)));
            }
        }
    }

    #[test]
    fn dashed_curve_yields_single_mask() {
        let mut img = RgbRaster::filled(200, 120, Rgb::WHITE);
        let mut x = 10;
        while x < 180 {
            img.fill_rect(x, 50, x + 8, 52, Rgb::new(0, 160, 0));
            x += 12;
        }
        let region = region_of(&img, &cfg());
        let masks = extract_curve_masks(&region, 50).unwrap();
        assert_eq!(masks.len(), 1);
        assert!(masks[0].pixel_count() > 200, "all dash pixels belong to the one mask");
    }

    #[test]
    fn blank_region_has_no_curves() {
        let img = RgbRaster::filled(100, 100, Rgb::WHITE);
        let region = region_of(&img, &cfg());
        assert!(matches!(
            extract_curve_masks(&region, 50),
            Err(Error::NoCurvesFound { .. })
        ));
    }

    #[test]
    fn width_of_uniform_bar_is_thickness() {
        let mut grid = vec![false; 120 * 64];
        for x in 10..=110 {
            for y in 30..=32 {
                grid[y * 120 + x] = true;
            }
        }
        let mask = CurveMask::from_grid(1, Rgb::new(255, 0, 0), 120, 64, grid);
        assert_eq!(mask.width_estimate_px, 3);
    }

    #[test]
    fn width_of_staircase_is_one() {
        let mut grid = vec![false; 80 * 80];
        for i in 0..60usize {
            grid[(60 - i) * 80 + (10 + i)] = true;
        }
        let mask = CurveMask::from_grid(1, Rgb::new(255, 0, 0), 80, 80, grid);
        assert_eq!(mask.width_estimate_px, 1);
    }

    #[test]
    fn width_of_rendered_antialiased_line() {
        // Sloped enough that the stroke cannot masquerade as an axis run.
        let mut img = RgbRaster::filled(300, 200, Rgb::WHITE);
        img.draw_segment(PointF::new(10.0, 30.0), PointF::new(290.0, 170.0), 4.0, Rgb::new(220, 30, 30), true);
        let h = apply_hsv_homogeneity(&img, &cfg());
        let curve_color = h.palette.iter().find(|e| e.color != Rgb::WHITE && e.color.r > 100).unwrap().color;
        let grid: Vec<bool> = h.raster.data().iter().map(|&p| p == curve_color).collect();
        let mask = CurveMask::from_grid(1, curve_color, 300, 200, grid);
        let w = mask.width_estimate_px;
        // Perpendicular width 4 at slope 0.5 gives vertical runs near 4.5.
        assert!((3..=6).contains(&w), "estimated width {w} not near 4");
    }

    #[test]
    fn width_invariant_under_horizontal_translation() {
        let mut grid = vec![false; 100 * 20];
        for x in 10..40 {
            for y in 5..9 {
                grid[y * 100 + x] = true;
            }
        }
        let a = CurveMask::from_grid(1, Rgb::new(255, 0, 0), 100, 20, grid.clone());
        let mut shifted = vec![false; 100 * 20];
        for x in 10..40 {
            for y in 5..9 {
                shifted[y * 100 + (x + 50)] = true;
            }
        }
        let b = CurveMask::from_grid(1, Rgb::new(255, 0, 0), 100, 20, shifted);
        assert_eq!(a.width_estimate_px, b.width_estimate_px);
    }

    #[test]
    fn sidecar_merge_maps_values_by_rank() {
        let detected = AxisModel {
            x_ticks: vec![
                AxisTick { pixel: 40, value: None, text: None },
                AxisTick { pixel: 140, value: None, text: None },
            ],
            ..AxisModel::default()
        };
        let sidecar = AxisSidecar {
            x_axis: SidecarAxis {
                label: Some(String::from("Year")),
                ticks: vec![
                    SidecarTick { value: Some(2019.0), text: String::from("2019") },
                    SidecarTick { value: Some(2020.0), text: String::from("2020") },
                ],
            },
            y_axis: SidecarAxis::default(),
        };
        let (merged, warnings) = merge_axis_sidecar(&sidecar, detected).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(merged.x_ticks[0].value, Some(2019.0));
        assert_eq!(merged.x_ticks[1].text.as_deref(), Some("2020"));
        assert_eq!(merged.x_label.as_deref(), Some("Year"));
        assert!(merged.x_has_values());
        assert_eq!(merged.x_value_at(40.0), Some(2019.0));
        assert_eq!(merged.x_value_at(240.0), Some(2021.0));
    }

    #[test]
    fn absent_sidecar_leaves_pixel_units() {
        let detected = AxisModel {
            x_ticks: vec![AxisTick { pixel: 40, value: None, text: None }],
            ..AxisModel::default()
        };
        let (merged, _) = merge_axis_sidecar(&AxisSidecar::default(), detected).unwrap();
        assert!(!merged.x_has_values());
        assert_eq!(merged.x_value_at(40.0), None);
    }

    #[test]
    fn sidecar_merge_rejects_large_mismatch() {
        let detected = AxisModel {
            x_ticks: (0..7)
                .map(|i| AxisTick { pixel: i * 50, value: None, text: None })
                .collect(),
            ..AxisModel::default()
        };
        let sidecar = AxisSidecar {
            x_axis: SidecarAxis {
                label: None,
                ticks: (0..3)
                    .map(|i| SidecarTick { value: Some(i as f64), text: String::from("t") })
                    .collect(),
            },
            y_axis: SidecarAxis::default(),
        };
        assert!(matches!(
            merge_axis_sidecar(&sidecar, detected),
            Err(Error::TickMismatch { sidecar: 3, detected: 7, .. })
        ));
    }
}
