//! Centerline tracing and unevenness-point detection.
//!
//! A mask is traced column by column: every maximal vertical run contributes
//! its midpoint, and midpoints chain onto the nearest previous chain endpoint
//! so dash gaps bridge while stray same-color blobs stay on their own chains.
//! The longest chain is the curve's pixel trail.
//!
//! Unevenness detection walks the trail with a reference slope anchored at
//! the last detected point. The acceptance criterion `e = H_U / L_U` comes
//! from the plot region's height and width, so wide flat charts tolerate less
//! vertical drift per horizontal step than tall narrow ones. A point whose
//! anchor slope leaves the `reference +/- e` band is recorded, becomes the new
//! anchor, and its slope becomes the new reference. Trail endpoints are always
//! part of the result.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geom::{slope_between, PointI, Slope};
use crate::ingest::{CurveMask, PlotRegion};

/// Dash gaps up to this multiple of the curve width are bridged.
pub const DASH_BRIDGE_FACTOR: u32 = 3;

/// Ordered pixel trail of one curve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelTrail {
    pub curve_id: u32,
    /// Ordered by nondecreasing x, ties by y; no duplicates.
    pub points: Vec<PointI>,
    /// Index pairs `(i, i+1)` where a dash gap was bridged.
    pub gaps: Vec<(usize, usize)>,
}

/// Unevenness window parameters (window area `W_U = H_U * L_U`, criterion
/// `e = H_U / L_U`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnevennessConfig {
    pub h_u: u32,
    pub l_u: u32,
}

impl UnevennessConfig {
    pub fn new(h_u: u32, l_u: u32) -> Self {
        assert!(h_u >= 1 && l_u >= 1);
        Self { h_u, l_u }
    }

    /// Acceptance criterion: maximal tolerated slope drift.
    pub fn e(&self) -> f64 {
        self.h_u as f64 / self.l_u as f64
    }

    /// Window area covering a segment with an unevenness.
    pub fn w_u(&self) -> u64 {
        self.h_u as u64 * self.l_u as u64
    }
}

/// H_U and L_U take the plot region's height and width: the criterion adapts
/// to the chart's aspect ratio with no per-chart tuning.
pub fn unevenness_criteria(region: &PlotRegion) -> UnevennessConfig {
    UnevennessConfig::new(region.raster.height() as u32, region.raster.width() as u32)
}

/// A point where the trail's direction left the acceptance band.
#[derive(Debug, Clone, PartialEq)]
pub struct UnevennessPoint {
    pub position: PointI,
    pub slope_before: Slope,
    pub slope_after: Slope,
    pub trail_index: usize,
}

/// Trace the centerline of a mask.
///
/// Errors with `FragmentedCurve` when over 40% of the columns in the mask's
/// x-extent are empty and some gap between populated columns exceeds the
/// bridge threshold.
pub fn trace_centerline(mask: &CurveMask) -> Result<PixelTrail> {
    let bridge = (DASH_BRIDGE_FACTOR * mask.width_estimate_px) as i32;

    let mut populated: Vec<usize> = Vec::new();
    let mut candidates: Vec<PointI> = Vec::new();
    for x in 0..mask.width() {
        let runs = mask.column_runs(x);
        if !runs.is_empty() {
            populated.push(x);
        }
        for (y0, y1) in runs {
            candidates.push(PointI::new(x as i32, ((y0 + y1) / 2) as i32));
        }
    }
    if candidates.is_empty() {
        return Err(Error::FragmentedCurve {
            curve_id: mask.curve_id,
            empty_pct: 100,
            bridge_px: bridge as u32,
        });
    }

    // Fragmentation check over the mask's own column extent.
    let x_min = populated[0];
    let x_max = *populated.last().expect("nonempty");
    let extent = x_max - x_min + 1;
    let empty_frac = 1.0 - populated.len() as f64 / extent as f64;
    let max_gap = populated
        .windows(2)
        .map(|w| (w[1] - w[0]) as i32 - 1)
        .max()
        .unwrap_or(0);
    if empty_frac > 0.4 && max_gap > bridge {
        return Err(Error::FragmentedCurve {
            curve_id: mask.curve_id,
            empty_pct: (empty_frac * 100.0) as u32,
            bridge_px: bridge as u32,
        });
    }

    // Chain candidates onto the nearest previous endpoint. A candidate may
    // attach when the column gap stays within the bridge threshold and the
    // full distance within twice of it (so steep dashes still connect while
    // distant blobs do not).
    struct Chain {
        points: Vec<PointI>,
        last: PointI,
    }
    let mut chains: Vec<Chain> = Vec::new();
    for cand in candidates {
        let mut best: Option<(usize, f64)> = None;
        for (ci, chain) in chains.iter().enumerate() {
            let dx = cand.x - chain.last.x;
            if dx < 0 || dx > bridge.max(1) {
                continue;
            }
            let d = cand.dist(chain.last);
            if d > 2.0 * bridge.max(1) as f64 {
                continue;
            }
            if best.map(|(_, bd)| d < bd).unwrap_or(true) {
                best = Some((ci, d));
            }
        }
        match best {
            Some((ci, _)) => {
                chains[ci].points.push(cand);
                chains[ci].last = cand;
            }
            None => chains.push(Chain {
                points: alloc::vec![cand],
                last: cand,
            }),
        }
    }

    let main = chains
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.points.len().cmp(&b.1.points.len()).then(b.0.cmp(&a.0)))
        .map(|(_, c)| c)
        .expect("at least one chain");

    let mut points = main.points.clone();
    points.sort_by_key(|p| (p.x, p.y));
    points.dedup();

    let gaps = points
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1].x - w[0].x > 1)
        .map(|(i, _)| (i, i + 1))
        .collect();

    Ok(PixelTrail {
        curve_id: mask.curve_id,
        points,
        gaps,
    })
}

/// Walk a trail and report every point whose slope from the current anchor
/// leaves the `reference +/- e` band, plus both endpoints.
pub fn detect_unevenness(
    trail: &PixelTrail,
    cfg: &UnevennessConfig,
) -> Result<Vec<UnevennessPoint>> {
    let pts = &trail.points;
    if pts.len() < 3 {
        return Err(Error::TrailTooShort { len: pts.len() });
    }
    let e = cfg.e();
    let mut reference = slope_between(pts[0], pts[1])?;
    let mut anchor = pts[0];
    let mut out = alloc::vec![UnevennessPoint {
        position: pts[0],
        slope_before: reference,
        slope_after: reference,
        trail_index: 0,
    }];

    for (i, &p) in pts.iter().enumerate().skip(2) {
        let current = slope_between(anchor, p)?;
        let deviated = match (reference, current) {
            (Slope::Finite(r), Slope::Finite(s)) => s < r - e || s > r + e,
            (Slope::Vertical, Slope::Vertical) => false,
            // A vertical slope against a finite reference (or vice versa) is
            // always a change of direction.
            _ => true,
        };
        if deviated {
            out.push(UnevennessPoint {
                position: p,
                slope_before: reference,
                slope_after: current,
                trail_index: i,
            });
            anchor = p;
            reference = current;
        }
    }

    let last = pts.len() - 1;
    if out.last().map(|u| u.trail_index) != Some(last) {
        let closing = slope_between(anchor, pts[last]).unwrap_or(reference);
        out.push(UnevennessPoint {
            position: pts[last],
            slope_before: reference,
            slope_after: closing,
            trail_index: last,
        });
    }
    Ok(out)
}

/// Debug dump of a trail and its unevenness points as CSV rows
/// `curve_id,x,y,slope` (empty slope for plain trail points).
pub fn trail_debug_csv(trail: &PixelTrail, unevenness: &[UnevennessPoint]) -> String {
    let mut s = String::from("curve_id,x,y,slope\n");
    let mut flag = alloc::vec![None::<&UnevennessPoint>; trail.points.len()];
    for u in unevenness {
        if u.trail_index < flag.len() {
            flag[u.trail_index] = Some(u);
        }
    }
    for (i, p) in trail.points.iter().enumerate() {
        let slope = match flag[i].map(|u| u.slope_after) {
            Some(Slope::Finite(v)) => format!("{v}"),
            Some(Slope::Vertical) => String::from("vertical"),
            None => String::new(),
        };
        s.push_str(&format!("{},{},{},{}\n", trail.curve_id, p.x, p.y, slope));
    }
    s
}
