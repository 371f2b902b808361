//! Segment-level analysis: the three merging rules, cross-curve intersection
//! and parallelism detection, connection angles, growth classification and
//! midpoint template association.
//!
//! Merging rule 1 heals junction gaps up to the worst case (one pixel across
//! the y axis, curve width minus one across x). Rule 2 merges consecutive
//! segments whose slopes differ by at most `1 / (width - 1)`, the slope a
//! worst-case junction anomaly can fake; vertical segments compare by
//! direction angle instead. Rule 3 merges consecutive same-curve segments
//! that share a common parallel partner on another curve, recomputing the
//! parallelism relation after every merge until a fixpoint.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::cluster::MiddlePoint;
use crate::config::{AssociationConfig, GrowthConfig};
use crate::error::Warning;
use crate::fmath;
use crate::geom::{LineSegment, PointF, PointI, Rect, SegId, Slope};
use crate::ingest::{AxisModel, PlotRegion};
use crate::raster::RgbRaster;

/// Side length of midpoint association templates.
pub const TEMPLATE_SIDE: usize = 81;

/// Typed association between two segments.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Relation {
    pub kind: RelationKind,
    pub a: SegId,
    pub b: SegId,
    pub value: RelationValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum RelationKind {
    Connection,
    Parallelism,
    Intersection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum RelationValue {
    /// Angle of the connection in degrees.
    AngleDeg(f64),
    /// Common slope of a parallel pair.
    CommonSlope(f64),
    /// Intersection location (exact reals; reports round to pixels).
    Point(PointF),
}

/// Parametric solution of a segment pair intersection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntersectionSolution {
    pub t: f64,
    pub u: f64,
    pub point: PointF,
}

fn renumber(curve_id: u32, mut segs: Vec<LineSegment>) -> Vec<LineSegment> {
    for (i, s) in segs.iter_mut().enumerate() {
        s.id = SegId::new(curve_id, i as u32);
    }
    segs
}

// ---------------------------------------------------------------------------
// Merging rules
// ---------------------------------------------------------------------------

/// First merging rule: heal worst-case junction gaps. A consecutive pair
/// whose junction gap is nonzero, at most one pixel across y, and at most
/// `width - 1` across x collapses into one segment from the first start to
/// the second end. Applied left to right until no pair matches. Pairs that
/// already share their junction point are left for rule 2.
pub fn merge_rule_1(segs: Vec<LineSegment>, width_px: u32) -> Vec<LineSegment> {
    let Some(curve_id) = segs.first().map(|s| s.id.curve) else {
        return segs;
    };
    let max_dx = width_px.saturating_sub(1) as f64;
    let mut segs = segs;
    loop {
        let hit = segs.windows(2).position(|w| {
            let dx = w[1].start.x - w[0].end.x;
            let dy = w[1].start.y - w[0].end.y;
            (dx != 0.0 || dy != 0.0) && fmath::abs(dy) <= 1.0 && fmath::abs(dx) <= max_dx
        });
        match hit {
            Some(i) => {
                let merged = LineSegment::new(SegId::new(curve_id, 0), segs[i].start, segs[i + 1].end);
                segs.splice(i..=i + 1, [merged]);
            }
            None => break,
        }
    }
    renumber(curve_id, segs)
}

/// Second merging rule: merge consecutive segments whose slope difference
/// stays within `1 / (width - 1)`. Segments are treated as vectors, so pairs
/// involving a vertical segment compare by direction angle against
/// `atan(1 / (width - 1))`. A width of 1 makes the rule a no-op.
pub fn merge_rule_2(segs: Vec<LineSegment>, width_px: u32) -> Vec<LineSegment> {
    let Some(curve_id) = segs.first().map(|s| s.id.curve) else {
        return segs;
    };
    if width_px < 2 {
        return segs;
    }
    let threshold = 1.0 / (width_px as f64 - 1.0);
    let angle_threshold = fmath::atan(threshold);
    let mut segs = segs;
    loop {
        let hit = segs.windows(2).position(|w| {
            match (w[0].slope(), w[1].slope()) {
                (Slope::Finite(a), Slope::Finite(b)) => fmath::abs(a - b) <= threshold,
                _ => fmath::abs(w[0].direction_angle() - w[1].direction_angle()) <= angle_threshold,
            }
        });
        match hit {
            Some(i) => {
                let merged = LineSegment::new(SegId::new(curve_id, 0), segs[i].start, segs[i + 1].end);
                segs.splice(i..=i + 1, [merged]);
            }
            None => break,
        }
    }
    renumber(curve_id, segs)
}

/// Third merging rule: consecutive same-curve segments that are both parallel
/// to a common segment of a different curve merge into one. Parallelisms are
/// recomputed after every merge; the pass repeats until nothing changes.
pub fn merge_rule_3(curves: Vec<Vec<LineSegment>>, widths: &[u32]) -> Vec<Vec<LineSegment>> {
    let mut curves = curves;
    loop {
        let parallels = all_parallelisms(&curves, widths);
        let mut partner_map: BTreeMap<SegId, Vec<SegId>> = BTreeMap::new();
        for rel in &parallels {
            partner_map.entry(rel.a).or_default().push(rel.b);
            partner_map.entry(rel.b).or_default().push(rel.a);
        }
        let mut merged_any = false;
        'scan: for ci in 0..curves.len() {
            for i in 0..curves[ci].len().saturating_sub(1) {
                let a = curves[ci][i].id;
                let b = curves[ci][i + 1].id;
                let common = match (partner_map.get(&a), partner_map.get(&b)) {
                    (Some(pa), Some(pb)) => pa.iter().any(|p| pb.contains(p)),
                    _ => false,
                };
                if common {
                    let curve_id = curves[ci][i].id.curve;
                    let merged = LineSegment::new(
                        SegId::new(curve_id, 0),
                        curves[ci][i].start,
                        curves[ci][i + 1].end,
                    );
                    curves[ci].splice(i..=i + 1, [merged]);
                    curves[ci] = renumber(curve_id, core::mem::take(&mut curves[ci]));
                    merged_any = true;
                    break 'scan;
                }
            }
        }
        if !merged_any {
            return curves;
        }
    }
}

/// All cross-curve parallelism relations for a set of curves.
pub fn all_parallelisms(curves: &[Vec<LineSegment>], widths: &[u32]) -> Vec<Relation> {
    let mut out = Vec::new();
    for i in 0..curves.len() {
        for j in i + 1..curves.len() {
            out.extend(find_parallelisms(
                &curves[i],
                &curves[j],
                widths.get(i).copied().unwrap_or(1),
                widths.get(j).copied().unwrap_or(1),
            ));
        }
    }
    out
}

/// All cross-curve intersection relations for a set of curves.
pub fn all_intersections(curves: &[Vec<LineSegment>]) -> Vec<Relation> {
    let mut out = Vec::new();
    for i in 0..curves.len() {
        for j in i + 1..curves.len() {
            out.extend(find_intersections(&curves[i], &curves[j]));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Intersections and parallelisms
// ---------------------------------------------------------------------------

/// Solve the parametric pair `a.start + T * dA = b.start + U * dB`. Returns
/// the solution regardless of whether T and U land inside (0, 1); parallel
/// pairs (zero denominator) return `None`.
pub fn solve_intersection(a: &LineSegment, b: &LineSegment) -> Option<IntersectionSolution> {
    let (adx, ady) = a.direction();
    let (bdx, bdy) = b.direction();
    let denom = adx * bdy - ady * bdx;
    if denom == 0.0 {
        return None;
    }
    let rx = b.start.x - a.start.x;
    let ry = b.start.y - a.start.y;
    let t = (rx * bdy - ry * bdx) / denom;
    let u = (rx * ady - ry * adx) / denom;
    Some(IntersectionSolution {
        t,
        u,
        point: PointF::new(a.start.x + t * adx, a.start.y + t * ady),
    })
}

fn interior(v: f64) -> bool {
    v > 0.0 && v < 1.0
}

/// Intersection relations between the segments of two distinct curves:
/// pairs whose parametric solution has both T and U strictly inside (0, 1).
pub fn find_intersections(segs_a: &[LineSegment], segs_b: &[LineSegment]) -> Vec<Relation> {
    let mut out = Vec::new();
    for a in segs_a {
        for b in segs_b {
            if let Some(sol) = solve_intersection(a, b) {
                if interior(sol.t) && interior(sol.u) {
                    out.push(Relation {
                        kind: RelationKind::Intersection,
                        a: a.id,
                        b: b.id,
                        value: RelationValue::Point(sol.point),
                    });
                }
            }
        }
    }
    out
}

/// True for collinear segments whose projections overlap (shared points),
/// which count as intersecting for the parallelism test even though the
/// parametric solve has no unique solution.
fn collinear_overlap(a: &LineSegment, b: &LineSegment) -> bool {
    let (adx, ady) = a.direction();
    let (bdx, bdy) = b.direction();
    let cross_dir = adx * bdy - ady * bdx;
    let rx = b.start.x - a.start.x;
    let ry = b.start.y - a.start.y;
    let cross_off = adx * ry - ady * rx;
    if cross_dir != 0.0 || cross_off != 0.0 {
        return false;
    }
    // Project onto the dominant axis of a's direction.
    let project = |p: PointF| if fmath::abs(adx) >= fmath::abs(ady) { p.x } else { p.y };
    let (a0, a1) = (project(a.start), project(a.end));
    let (b0, b1) = (project(b.start), project(b.end));
    let (a_lo, a_hi) = (a0.min(a1), a0.max(a1));
    let (b_lo, b_hi) = (b0.min(b1), b0.max(b1));
    a_hi >= b_lo && b_hi >= a_lo
}

/// Parallelism relations between the segments of two distinct curves. A pair
/// is parallel when it does not intersect (including collinear overlap) and
/// the slopes agree within `1 / (max(width) - 1)`, the same margin rule 2
/// derives from the worst-case junction anomaly. Pairs involving a vertical
/// segment carry no finite common slope and are skipped.
pub fn find_parallelisms(
    segs_a: &[LineSegment],
    segs_b: &[LineSegment],
    width_a: u32,
    width_b: u32,
) -> Vec<Relation> {
    let width = width_a.max(width_b);
    let margin = if width < 2 { 0.0 } else { 1.0 / (width as f64 - 1.0) };
    let mut out = Vec::new();
    for a in segs_a {
        for b in segs_b {
            if let Some(sol) = solve_intersection(a, b) {
                if interior(sol.t) && interior(sol.u) {
                    continue;
                }
            }
            if collinear_overlap(a, b) {
                continue;
            }
            if let (Slope::Finite(sa), Slope::Finite(sb)) = (a.slope(), b.slope()) {
                if fmath::abs(sa - sb) <= margin {
                    out.push(Relation {
                        kind: RelationKind::Parallelism,
                        a: a.id,
                        b: b.id,
                        value: RelationValue::CommonSlope((sa + sb) / 2.0),
                    });
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Connection angles
// ---------------------------------------------------------------------------

/// Connection relations between consecutive segments of one curve: the angle
/// between their direction vectors in degrees, in [0, 180).
pub fn compute_connection_angles(segs: &[LineSegment]) -> Vec<Relation> {
    segs.windows(2)
        .map(|w| {
            let (ax, ay) = w[0].direction();
            let (bx, by) = w[1].direction();
            let cross = ax * by - ay * bx;
            let dot = ax * bx + ay * by;
            let angle = fmath::atan2(fmath::abs(cross), dot) * 180.0 / core::f64::consts::PI;
            Relation {
                kind: RelationKind::Connection,
                a: w[0].id,
                b: w[1].id,
                value: RelationValue::AngleDeg(angle),
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Growth classification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum GrowthClass {
    ExponentialGrowth,
    LinearGrowth,
    ExponentialDecay,
    LinearDecay,
    Steady,
}

impl GrowthClass {
    pub fn phrase(&self) -> &'static str {
        match self {
            GrowthClass::ExponentialGrowth => "exponential growth",
            GrowthClass::LinearGrowth => "linear growth",
            GrowthClass::ExponentialDecay => "exponential decay",
            GrowthClass::LinearDecay => "linear decay",
            GrowthClass::Steady => "steady",
        }
    }
}

/// Change over a growth range: percent of the starting value when the y axis
/// maps to numbers (axis delta when the start sits on zero), else pixels in
/// mathematical orientation (positive = upward).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Magnitude {
    Percent(f64),
    AxisDelta(f64),
    PixelDelta(f64),
}

/// Horizontal span of a growth range.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Duration {
    AxisSpan { span: f64, unit: Option<String> },
    Pixels(f64),
}

/// Growth class over a maximal run of same-direction segments.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GrowthAnnotation {
    pub curve_id: u32,
    pub first_seg: u32,
    pub last_seg: u32,
    pub class: GrowthClass,
    pub magnitude: Magnitude,
    pub duration: Duration,
}

/// Everything growth classification needs to express results in axis units:
/// the axis model, where the plot region sits in the original image, and the
/// template-matched image positions of the middle-points.
pub struct GrowthContext<'a> {
    pub axis: &'a AxisModel,
    pub region_origin: PointI,
    pub matched_positions: &'a BTreeMap<PointI, PointI>,
    pub cfg: &'a GrowthConfig,
}

impl GrowthContext<'_> {
    /// Region-local point to original-image coordinates, preferring the
    /// template-matched location when one exists.
    fn to_image(&self, p: PointF) -> PointF {
        let key = p.round_i();
        match self.matched_positions.get(&key) {
            Some(m) => m.to_f(),
            None => PointF::new(
                p.x + self.region_origin.x as f64,
                p.y + self.region_origin.y as f64,
            ),
        }
    }
}

/// Classify growth over a curve's merged segment chain. Image slopes flip
/// sign into mathematical orientation first. Each maximal run of same-sign
/// slopes becomes one annotation: a run whose |slope| ratios all exceed
/// `1 + ratio_epsilon` is exponential, anything else in that direction is
/// linear; slopes within `zero_epsilon` of zero form steady runs.
pub fn classify_growth(segs: &[LineSegment], ctx: &GrowthContext<'_>) -> Vec<GrowthAnnotation> {
    if segs.is_empty() {
        return Vec::new();
    }
    #[derive(PartialEq, Eq, Clone, Copy)]
    enum Dir {
        Pos,
        Neg,
        Zero,
    }
    let math_slope = |s: &LineSegment| -> f64 {
        match s.slope() {
            Slope::Finite(v) => -v,
            // Vertical segments point straight up or down in math terms.
            Slope::Vertical => {
                if s.end.y < s.start.y {
                    1e9
                } else {
                    -1e9
                }
            }
        }
    };
    let eps = ctx.cfg.zero_epsilon;
    let dir_of = |v: f64| {
        if fmath::abs(v) <= eps {
            Dir::Zero
        } else if v > 0.0 {
            Dir::Pos
        } else {
            Dir::Neg
        }
    };

    let slopes: Vec<f64> = segs.iter().map(math_slope).collect();
    let mut out = Vec::new();
    let mut run_start = 0usize;
    while run_start < segs.len() {
        let dir = dir_of(slopes[run_start]);
        let mut run_end = run_start;
        while run_end + 1 < segs.len() && dir_of(slopes[run_end + 1]) == dir {
            run_end += 1;
        }
        let class = match dir {
            Dir::Zero => GrowthClass::Steady,
            Dir::Pos | Dir::Neg => {
                let accelerating = run_end > run_start
                    && (run_start..run_end).all(|i| {
                        fmath::abs(slopes[i + 1]) >= (1.0 + ctx.cfg.ratio_epsilon) * fmath::abs(slopes[i])
                    });
                match (dir == Dir::Pos, accelerating) {
                    (true, true) => GrowthClass::ExponentialGrowth,
                    (true, false) => GrowthClass::LinearGrowth,
                    (false, true) => GrowthClass::ExponentialDecay,
                    (false, false) => GrowthClass::LinearDecay,
                }
            }
        };

        let start_img = ctx.to_image(segs[run_start].start);
        let end_img = ctx.to_image(segs[run_end].end);
        let magnitude = match (ctx.axis.y_value_at(start_img.y), ctx.axis.y_value_at(end_img.y)) {
            (Some(v0), Some(v1)) if fmath::abs(v0) > 1e-9 => {
                Magnitude::Percent(100.0 * (v1 - v0) / fmath::abs(v0))
            }
            (Some(v0), Some(v1)) => Magnitude::AxisDelta(v1 - v0),
            _ => Magnitude::PixelDelta(segs[run_start].start.y - segs[run_end].end.y),
        };
        let duration = match (ctx.axis.x_value_at(start_img.x), ctx.axis.x_value_at(end_img.x)) {
            (Some(v0), Some(v1)) => Duration::AxisSpan {
                span: v1 - v0,
                unit: ctx.axis.x_label.clone(),
            },
            _ => Duration::Pixels(segs[run_end].end.x - segs[run_start].start.x),
        };

        out.push(GrowthAnnotation {
            curve_id: segs[run_start].id.curve,
            first_seg: segs[run_start].id.index,
            last_seg: segs[run_end].id.index,
            class,
            magnitude,
            duration,
        });
        run_start = run_end + 1;
    }
    out
}

// ---------------------------------------------------------------------------
// Midpoint template association
// ---------------------------------------------------------------------------

/// 81x81 neighborhood of a middle-point, clipped at region borders, plus its
/// matched location in the original image after template search.
#[derive(Debug, Clone)]
pub struct MidpointTemplate {
    pub midpoint: MiddlePoint,
    /// Patch top-left in region coordinates (records border clipping).
    pub patch_origin: PointI,
    pub patch: RgbRaster,
    /// Midpoint location in original-image coordinates after matching.
    pub matched_position: Option<PointI>,
    pub ambiguous: bool,
}

/// Cut an 81x81 patch (clipped at the region borders) around every
/// middle-point.
pub fn extract_midpoint_templates(region: &PlotRegion, mps: &[MiddlePoint]) -> Vec<MidpointTemplate> {
    let half = (TEMPLATE_SIDE / 2) as i32;
    let w = region.raster.width() as i32;
    let h = region.raster.height() as i32;
    mps.iter()
        .map(|mp| {
            let x0 = (mp.position.x - half).clamp(0, w - 1);
            let y0 = (mp.position.y - half).clamp(0, h - 1);
            let x1 = (mp.position.x + half).clamp(0, w - 1);
            let y1 = (mp.position.y + half).clamp(0, h - 1);
            MidpointTemplate {
                midpoint: *mp,
                patch_origin: PointI::new(x0, y0),
                patch: region.raster.crop(x0 as usize, y0 as usize, x1 as usize, y1 as usize),
                matched_position: None,
                ambiguous: false,
            }
        })
        .collect()
}

/// Slide each template over the original image (within the configured window
/// around its expected placement) and record the minimal-SSD position. Ties
/// within 1% of the minimum raise an ambiguity warning; among ties the
/// placement closest to the expected position wins.
pub fn associate_midpoints(
    original: &RgbRaster,
    region_bounds: Rect,
    templates: &mut [MidpointTemplate],
    cfg: &AssociationConfig,
) -> Vec<Warning> {
    let mut warnings = Vec::new();
    let img_w = original.width() as i32;
    let img_h = original.height() as i32;
    for tpl in templates.iter_mut() {
        let pw = tpl.patch.width() as i32;
        let ph = tpl.patch.height() as i32;
        let expected_x = region_bounds.x0 + tpl.patch_origin.x;
        let expected_y = region_bounds.y0 + tpl.patch_origin.y;
        let (x_lo, x_hi, y_lo, y_hi) = match cfg.window_px {
            Some(r) => {
                let r = r as i32;
                (
                    (expected_x - r).max(0),
                    (expected_x + r).min(img_w - pw),
                    (expected_y - r).max(0),
                    (expected_y + r).min(img_h - ph),
                )
            }
            None => (0, img_w - pw, 0, img_h - ph),
        };
        if x_lo > x_hi || y_lo > y_hi {
            continue;
        }

        // Track the best placement and every fully evaluated candidate so
        // near-ties can be counted afterwards. The early-exit bound always
        // stays above 1.01x the running best, so no qualifying candidate is
        // ever cut short.
        let mut best: Option<(u64, i64, i32, i32)> = None; // (ssd, disp_sq, y, x)
        let mut candidates: Vec<(u64, i32, i32)> = Vec::new();
        for py in y_lo..=y_hi {
            for px in x_lo..=x_hi {
                let bound = best
                    .map(|(b, _, _, _)| (b + b / 100).saturating_add(1))
                    .unwrap_or(u64::MAX);
                let mut ssd: u64 = 0;
                'rows: for ty in 0..ph {
                    for tx in 0..pw {
                        let p = tpl.patch.get(tx as usize, ty as usize);
                        let q = original.get((px + tx) as usize, (py + ty) as usize);
                        ssd += p.dist_sq(q) as u64;
                        if ssd > bound {
                            break 'rows;
                        }
                    }
                }
                if ssd > bound {
                    continue;
                }
                candidates.push((ssd, py, px));
                let ddx = (px - expected_x) as i64;
                let ddy = (py - expected_y) as i64;
                let disp = ddx * ddx + ddy * ddy;
                let key = (ssd, disp, py, px);
                if best.map(|b| key < b).unwrap_or(true) {
                    best = Some(key);
                }
            }
        }
        if let Some((min_ssd, _, by, bx)) = best {
            let close = candidates
                .iter()
                .filter(|(s, _, _)| *s <= min_ssd + min_ssd / 100)
                .count();
            let mid = PointI::new(
                bx + (tpl.midpoint.position.x - tpl.patch_origin.x),
                by + (tpl.midpoint.position.y - tpl.patch_origin.y),
            );
            tpl.matched_position = Some(mid);
            if close >= 2 {
                tpl.ambiguous = true;
                warnings.push(Warning::AmbiguousMatch {
                    curve_id: tpl.midpoint.curve_id,
                    x: mid.x,
                    y: mid.y,
                });
            }
        }
    }
    warnings
}
