//! Unevenness-point thinning: hierarchical bounds, elbow K-Means,
//! middle-point selection, noise rejection, and segment chaining.
//!
//! Thick curves produce bursts of redundant unevenness points around each true
//! direction change. Two single-linkage cuts (3 px and 4 px by default) bound
//! the plausible cluster counts; K-Means then runs for every k in that range
//! with several restarts, the elbow of the distortion curve picks k, and each
//! cluster is reduced to its middle-point: the member at the median x, which
//! unlike the centroid always lies on the traced curve.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ClusteringConfig;
use crate::error::{Error, Result};
use crate::geom::{LineSegment, PointI, SegId};
use crate::trace::PixelTrail;

/// Cluster-count bounds from the two single-linkage cuts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClusterBounds {
    pub k_lower: usize,
    pub k_upper: usize,
}

/// Cluster count of a single-linkage threshold cut: connected components of
/// the graph joining points at distance <= `cut`.
pub fn single_linkage_count(points: &[PointI], cut: f64) -> usize {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut root = i;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = i;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }
    for i in 0..n {
        for j in i + 1..n {
            if points[i].dist(points[j]) <= cut {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    (0..n).filter(|&i| find(&mut parent, i) == i).count()
}

/// Bounds for the K-Means sweep: the finer cut yields the upper count, the
/// coarser cut the lower one (single linkage is monotone in the cut).
pub fn hierarchical_bounds(points: &[PointI], cfg: &ClusteringConfig) -> ClusterBounds {
    assert!(!points.is_empty());
    let k_upper = single_linkage_count(points, cfg.cut_upper_px);
    let k_lower = single_linkage_count(points, cfg.cut_lower_px);
    debug_assert!(k_lower <= k_upper);
    ClusterBounds { k_lower, k_upper }
}

/// Outcome of the elbow K-Means sweep.
#[derive(Debug, Clone)]
pub struct KMeansResult {
    pub k: usize,
    /// Point index -> cluster index.
    pub assignments: Vec<usize>,
    /// Sum of squared point-to-centroid distances of the winning restart.
    pub distortion: f64,
    /// Distortion of each restart for the chosen k.
    pub restart_distortions: Vec<f64>,
    /// Best distortion per candidate k, for elbow inspection.
    pub distortion_curve: Vec<(usize, f64)>,
}

/// Run K-Means for each k within the bounds (several restarts each, keeping
/// the lowest distortion) and select k at the elbow of the distortion curve:
/// the maximal second difference. A flat curve, or a sweep with fewer than
/// three candidates, falls back to the lower bound.
pub fn elbow_kmeans(
    points: &[PointI],
    bounds: ClusterBounds,
    cfg: &ClusteringConfig,
    stream_id: u64,
) -> Result<KMeansResult> {
    if points.len() < bounds.k_lower {
        return Err(Error::TooFewPoints {
            points: points.len(),
            k: bounds.k_lower,
        });
    }
    let pts: Vec<(f64, f64)> = points.iter().map(|p| (p.x as f64, p.y as f64)).collect();

    let mut curve: Vec<(usize, f64)> = Vec::new();
    let mut per_k: Vec<(Vec<usize>, f64, Vec<f64>)> = Vec::new();
    for k in bounds.k_lower..=bounds.k_upper.min(points.len()) {
        let mut best: Option<(Vec<usize>, f64)> = None;
        let mut restarts = Vec::new();
        for r in 0..cfg.restarts.max(1) {
            let seed = mix_seed(cfg.seed, stream_id, k as u64, r as u64);
            let (assign, distortion) = lloyd(&pts, k, seed, cfg.max_iterations);
            restarts.push(distortion);
            if best.as_ref().map(|(_, d)| distortion < *d).unwrap_or(true) {
                best = Some((assign, distortion));
            }
        }
        let (assign, distortion) = best.expect("at least one restart");
        curve.push((k, distortion));
        per_k.push((assign, distortion, restarts));
    }

    let chosen_k = if curve.len() < 3 {
        bounds.k_lower
    } else {
        let mut best: Option<(usize, f64)> = None;
        for i in 1..curve.len() - 1 {
            let second = curve[i - 1].1 - 2.0 * curve[i].1 + curve[i + 1].1;
            if best.map(|(_, b)| second > b).unwrap_or(true) {
                best = Some((curve[i].0, second));
            }
        }
        match best {
            Some((k, signal)) if signal >= 1e-9 => k,
            _ => bounds.k_lower,
        }
    };

    let idx = chosen_k - bounds.k_lower;
    let (assignments, distortion, restart_distortions) = per_k[idx].clone();
    Ok(KMeansResult {
        k: chosen_k,
        assignments,
        distortion,
        restart_distortions,
        distortion_curve: curve,
    })
}

/// Deterministic per-(curve, k, restart) seed derivation.
fn mix_seed(base: u64, stream: u64, k: u64, restart: u64) -> u64 {
    let mut h = base ^ 0x5851F42D4C957F2D;
    for v in [stream.wrapping_add(1), k.wrapping_add(1), restart.wrapping_add(1)] {
        h ^= v.wrapping_mul(0x9E3779B97F4A7C15);
        h = h.rotate_left(23).wrapping_mul(0xBF58476D1CE4E5B9);
    }
    h
}

/// Standard Lloyd iterations with farthest-point seeding. The restart's RNG
/// only picks the first centroid; everything after is deterministic.
fn lloyd(pts: &[(f64, f64)], k: usize, seed: u64, max_iters: u32) -> (Vec<usize>, f64) {
    let n = pts.len();
    debug_assert!(k >= 1 && k <= n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids: Vec<(f64, f64)> = Vec::with_capacity(k);
    centroids.push(pts[rng.gen_range(0..n)]);
    while centroids.len() < k {
        let far = (0..n)
            .map(|i| {
                let d = centroids
                    .iter()
                    .map(|c| dist_sq(pts[i], *c))
                    .fold(f64::INFINITY, f64::min);
                (i, d)
            })
            .fold((0usize, -1.0f64), |best, cand| if cand.1 > best.1 { cand } else { best });
        centroids.push(pts[far.0]);
    }

    let mut assignments = vec![0usize; n];
    for _ in 0..max_iters.max(1) {
        let mut changed = false;
        for (i, p) in pts.iter().enumerate() {
            let mut best = (0usize, f64::INFINITY);
            for (ci, c) in centroids.iter().enumerate() {
                let d = dist_sq(*p, *c);
                if d < best.1 {
                    best = (ci, d);
                }
            }
            if assignments[i] != best.0 {
                assignments[i] = best.0;
                changed = true;
            }
        }
        // Re-seat empty clusters on the point farthest from its centroid.
        for ci in 0..k {
            if !assignments.contains(&ci) {
                let far = (0..n)
                    .map(|i| (i, dist_sq(pts[i], centroids[assignments[i]])))
                    .fold((0usize, -1.0f64), |best, cand| if cand.1 > best.1 { cand } else { best });
                assignments[far.0] = ci;
                changed = true;
            }
        }
        for ci in 0..k {
            let members: Vec<&(f64, f64)> = pts
                .iter()
                .zip(&assignments)
                .filter(|(_, &a)| a == ci)
                .map(|(p, _)| p)
                .collect();
            if !members.is_empty() {
                let m = members.len() as f64;
                centroids[ci] = (
                    members.iter().map(|p| p.0).sum::<f64>() / m,
                    members.iter().map(|p| p.1).sum::<f64>() / m,
                );
            }
        }
        if !changed {
            break;
        }
    }
    let distortion = pts
        .iter()
        .zip(&assignments)
        .map(|(p, &a)| dist_sq(*p, centroids[a]))
        .sum();
    (assignments, distortion)
}

#[inline]
fn dist_sq(a: (f64, f64), b: (f64, f64)) -> f64 {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    dx * dx + dy * dy
}

/// Representative point of a cluster: the member at the median x location
/// (lower median on even counts). Unlike the centroid it is an actual curve
/// pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MiddlePoint {
    pub position: PointI,
    pub cluster_size: usize,
    pub curve_id: u32,
}

/// Middle-point of every cluster, sorted by x (ties by y).
pub fn cluster_middle_points(
    result: &KMeansResult,
    points: &[PointI],
    curve_id: u32,
) -> Vec<MiddlePoint> {
    debug_assert_eq!(result.assignments.len(), points.len());
    let mut out = Vec::with_capacity(result.k);
    for cluster in 0..result.k {
        let mut members: Vec<PointI> = points
            .iter()
            .zip(&result.assignments)
            .filter(|(_, &a)| a == cluster)
            .map(|(p, _)| *p)
            .collect();
        if members.is_empty() {
            continue;
        }
        members.sort_by_key(|p| (p.x, p.y));
        out.push(MiddlePoint {
            position: members[(members.len() - 1) / 2],
            cluster_size: members.len(),
            curve_id,
        });
    }
    out.sort_by_key(|m| (m.position.x, m.position.y));
    out
}

/// Drop middle-points farther from the traced trail than the curve width.
/// The trail, not the raw mask, is the reference: a large same-color blob
/// cannot validate its own middle-points.
pub fn filter_noise(mps: Vec<MiddlePoint>, trail: &PixelTrail, width_px: u32) -> Vec<MiddlePoint> {
    let limit = width_px as f64;
    mps.into_iter()
        .filter(|mp| {
            trail
                .points
                .iter()
                .any(|p| p.dist(mp.position) <= limit)
        })
        .collect()
}

/// Chain consecutive middle-points into directed segments (start = left
/// point). Errors when fewer than two points remain.
pub fn build_segments(mps: &[MiddlePoint], curve_id: u32) -> Result<Vec<LineSegment>> {
    if mps.len() < 2 {
        return Err(Error::CurveDegenerate {
            curve_id,
            count: mps.len(),
        });
    }
    Ok(mps
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            LineSegment::new(
                SegId::new(curve_id, i as u32),
                w[0].position.to_f(),
                w[1].position.to_f(),
            )
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Slope;
    use proptest::prelude::*;

    fn cfg() -> ClusteringConfig {
        ClusteringConfig::default()
    }

    #[test]
    fn bounds_for_well_separated_groups() {
        let mut pts = Vec::new();
        for i in 0..5 {
            pts.push(PointI::new(i, 0));
            pts.push(PointI::new(100 + i, 0));
        }
        let b = hierarchical_bounds(&pts, &cfg());
        assert_eq!(b, ClusterBounds { k_lower: 2, k_upper: 2 });
    }

    #[test]
    fn bounds_single_point() {
        let b = hierarchical_bounds(&[PointI::new(7, 7)], &cfg());
        assert_eq!(b, ClusterBounds { k_lower: 1, k_upper: 1 });
    }

    #[test]
    fn bounds_chain_straddling_the_cuts() {
        // Chain spacing strictly between the two cuts: singletons at the fine
        // cut, one chain at the coarse cut. 3.5 px spacing is not integral,
        // so scale everything by 2 (spacing 7, cuts 6 and 8).
        let pts: Vec<PointI> = (0..8).map(|i| PointI::new(i * 7, 0)).collect();
        let scaled = ClusteringConfig {
            cut_upper_px: 6.0,
            cut_lower_px: 8.0,
            ..cfg()
        };
        let b = hierarchical_bounds(&pts, &scaled);
        assert_eq!(b.k_upper, 8);
        assert_eq!(b.k_lower, 1);
    }

    #[test]
    fn elbow_finds_three_tight_blobs() {
        let mut pts = Vec::new();
        for (cx, cy) in [(0, 0), (50, 40), (100, 0)] {
            for dx in 0..3 {
                for dy in 0..2 {
                    pts.push(PointI::new(cx + dx, cy + dy));
                }
            }
        }
        let bounds = ClusterBounds { k_lower: 2, k_upper: 6 };
        let res = elbow_kmeans(&pts, bounds, &cfg(), 1).unwrap();
        assert_eq!(res.k, 3);
    }

    #[test]
    fn degenerate_bounds_skip_the_elbow() {
        let pts: Vec<PointI> = (0..6).map(|i| PointI::new(i * 10, 0)).collect();
        let bounds = ClusterBounds { k_lower: 4, k_upper: 4 };
        let res = elbow_kmeans(&pts, bounds, &cfg(), 1).unwrap();
        assert_eq!(res.k, 4);
        assert_eq!(res.distortion_curve.len(), 1);
    }

    #[test]
    fn flat_distortion_curve_falls_back_to_lower_bound() {
        // Two distinct locations, many duplicates: distortion 0 for every k,
        // so no elbow can be deduced.
        let mut pts = Vec::new();
        for _ in 0..10 {
            pts.push(PointI::new(0, 0));
            pts.push(PointI::new(90, 0));
        }
        let bounds = ClusterBounds { k_lower: 2, k_upper: 5 };
        let res = elbow_kmeans(&pts, bounds, &cfg(), 1).unwrap();
        assert_eq!(res.k, 2);
    }

    #[test]
    fn too_few_points_is_an_error() {
        let pts = vec![PointI::new(0, 0)];
        let bounds = ClusterBounds { k_lower: 2, k_upper: 3 };
        assert!(matches!(
            elbow_kmeans(&pts, bounds, &cfg(), 1),
            Err(Error::TooFewPoints { points: 1, k: 2 })
        ));
    }

    #[test]
    fn reported_distortion_is_min_over_restarts() {
        let mut pts = Vec::new();
        for i in 0..12 {
            pts.push(PointI::new(i * 9, (i % 3) * 7));
        }
        let bounds = ClusterBounds { k_lower: 2, k_upper: 5 };
        let res = elbow_kmeans(&pts, bounds, &cfg(), 3).unwrap();
        assert_eq!(res.restart_distortions.len(), 5);
        let min = res
            .restart_distortions
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b));
        assert_eq!(res.distortion, min);
    }

    #[test]
    fn elbow_is_deterministic_for_fixed_seed() {
        let pts: Vec<PointI> = (0..20)
            .map(|i| PointI::new(i * 3, (i * i) % 17))
            .collect();
        let bounds = ClusterBounds { k_lower: 2, k_upper: 8 };
        let a = elbow_kmeans(&pts, bounds, &cfg(), 7).unwrap();
        let b = elbow_kmeans(&pts, bounds, &cfg(), 7).unwrap();
        assert_eq!(a.k, b.k);
        assert_eq!(a.assignments, b.assignments);
        assert_eq!(a.distortion, b.distortion);
    }

    #[test]
    fn middle_point_is_median_x_member() {
        let points = vec![PointI::new(1, 5), PointI::new(2, 9), PointI::new(3, 5)];
        let res = KMeansResult {
            k: 1,
            assignments: vec![0, 0, 0],
            distortion: 0.0,
            restart_distortions: vec![0.0],
            distortion_curve: vec![(1, 0.0)],
        };
        let mps = cluster_middle_points(&res, &points, 1);
        assert_eq!(mps.len(), 1);
        assert_eq!(mps[0].position, PointI::new(2, 9));
        assert_eq!(mps[0].cluster_size, 3);
    }

    #[test]
    fn middle_point_singleton_and_lower_median() {
        let single = vec![PointI::new(4, 4)];
        let res1 = KMeansResult {
            k: 1,
            assignments: vec![0],
            distortion: 0.0,
            restart_distortions: vec![0.0],
            distortion_curve: vec![(1, 0.0)],
        };
        assert_eq!(
            cluster_middle_points(&res1, &single, 2)[0].position,
            PointI::new(4, 4)
        );

        let even = vec![
            PointI::new(1, 0),
            PointI::new(2, 0),
            PointI::new(3, 0),
            PointI::new(4, 0),
        ];
        let res2 = KMeansResult {
            k: 1,
            assignments: vec![0, 0, 0, 0],
            distortion: 0.0,
            restart_distortions: vec![0.0],
            distortion_curve: vec![(1, 0.0)],
        };
        assert_eq!(
            cluster_middle_points(&res2, &even, 2)[0].position,
            PointI::new(2, 0)
        );
    }

    fn trail_along_x(y: i32, len: i32) -> PixelTrail {
        PixelTrail {
            curve_id: 1,
            points: (0..len).map(|x| PointI::new(x, y)).collect(),
            gaps: Vec::new(),
        }
    }

    #[test]
    fn noise_filter_keeps_on_trail_and_near_points() {
        let trail = trail_along_x(10, 100);
        let mps = vec![
            MiddlePoint { position: PointI::new(5, 10), cluster_size: 1, curve_id: 1 },
            MiddlePoint { position: PointI::new(50, 12), cluster_size: 1, curve_id: 1 },
            MiddlePoint { position: PointI::new(70, 60), cluster_size: 1, curve_id: 1 },
        ];
        let kept = filter_noise(mps, &trail, 3);
        assert_eq!(kept.len(), 2);
        assert!(kept.iter().all(|m| m.position.y <= 12));
    }

    #[test]
    fn segments_chain_middle_points() {
        let mps = vec![
            MiddlePoint { position: PointI::new(0, 0), cluster_size: 1, curve_id: 1 },
            MiddlePoint { position: PointI::new(5, 5), cluster_size: 1, curve_id: 1 },
            MiddlePoint { position: PointI::new(10, 0), cluster_size: 1, curve_id: 1 },
        ];
        let segs = build_segments(&mps, 1).unwrap();
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[0].slope(), Slope::Finite(1.0));
        assert_eq!(segs[1].slope(), Slope::Finite(-1.0));
        assert_eq!(segs[0].end, segs[1].start);
        assert_eq!(segs[0].id, SegId::new(1, 0));
        assert_eq!(segs[1].id, SegId::new(1, 1));
    }

    #[test]
    fn two_points_one_segment_one_point_error() {
        let two = vec![
            MiddlePoint { position: PointI::new(0, 0), cluster_size: 1, curve_id: 1 },
            MiddlePoint { position: PointI::new(9, 3), cluster_size: 1, curve_id: 1 },
        ];
        assert_eq!(build_segments(&two, 1).unwrap().len(), 1);
        let one = vec![two[0]];
        assert!(matches!(
            build_segments(&one, 1),
            Err(Error::CurveDegenerate { count: 1, .. })
        ));
    }

    proptest! {
        // Raising the cut distance never increases the cluster count.
        #[test]
        fn single_linkage_monotone_in_cut(
            pts in proptest::collection::vec((0i32..80, 0i32..80), 1..40),
            cut_a in 1.0f64..6.0,
            extra in 0.5f64..4.0,
        ) {
            let points: Vec<PointI> = pts.iter().map(|&(x, y)| PointI::new(x, y)).collect();
            let at_a = single_linkage_count(&points, cut_a);
            let at_b = single_linkage_count(&points, cut_a + extra);
            prop_assert!(at_b <= at_a);
        }

        // Middle-points are cluster members, so noise filtering never drops a
        // middle-point that sits on the trail.
        #[test]
        fn filter_never_drops_trail_members(idx in 0usize..100, width in 1u32..5) {
            let trail = trail_along_x(20, 100);
            let mp = MiddlePoint {
                position: trail.points[idx],
                cluster_size: 1,
                curve_id: 1,
            };
            let kept = filter_noise(alloc::vec![mp], &trail, width);
            prop_assert_eq!(kept.len(), 1);
        }
    }
}
