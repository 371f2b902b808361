//! End-to-end analysis: ingest, trace, cluster, merge, relate, represent.
//!
//! `analyze` runs every stage and keeps the artifacts of both merge stages:
//! the rule-2 stage (rules 1 and 2 applied) and the rule-3 stage (the
//! parallel-partner merge applied on top). Reconstruction and reporting pick
//! a stage via [`MergeStage`]; growth classification runs per stage on that
//! stage's chains so every derived sentence and Petri net stays closed over
//! its own segment ids.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::cluster::{
    build_segments, cluster_middle_points, elbow_kmeans, filter_noise, hierarchical_bounds,
    MiddlePoint,
};
use crate::config::AnalysisConfig;
use crate::error::{Result, Warning};
use crate::geom::{LineSegment, PointI, Rect};
use crate::graph::{build_attributed_graphs, graphs_to_sentences, AttributedGraph, NlSentence};
use crate::ingest::{
    apply_hsv_homogeneity, extract_curve_masks, merge_axis_sidecar, segment_regions, AxisModel,
    AxisSidecar, ChartImage, CurveMask,
};
use crate::lang::{serialize, KyrtosAst};
use crate::raster::{Rgb, RgbRaster};
use crate::segment::{
    all_intersections, all_parallelisms, associate_midpoints, classify_growth,
    compute_connection_angles, extract_midpoint_templates, merge_rule_1, merge_rule_2,
    merge_rule_3, GrowthAnnotation, GrowthContext, MidpointTemplate, Relation,
};
use crate::spn::{kernels_to_spn, SpnGraph};
use crate::ssim::ssim;
use crate::trace::{detect_unevenness, trace_centerline, unevenness_criteria, PixelTrail, UnevennessPoint};

/// Which merging stage a derived artifact comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum MergeStage {
    Rule2,
    Rule3,
}

impl MergeStage {
    pub fn as_str(&self) -> &'static str {
        match self {
            MergeStage::Rule2 => "rule2",
            MergeStage::Rule3 => "rule3",
        }
    }
}

/// Identity and metrics of one recognized curve.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CurveInfo {
    pub id: u32,
    pub color: Rgb,
    pub width_px: u32,
    pub pixel_count: usize,
}

/// Everything derived from one merge stage's segment chains.
#[derive(Debug, Clone)]
pub struct StageArtifacts {
    pub segments: Vec<Vec<LineSegment>>,
    pub relations: Vec<Relation>,
    pub growth: Vec<GrowthAnnotation>,
    pub kyrtos_text: String,
    pub sentences: Vec<NlSentence>,
    pub graphs: [AttributedGraph; 3],
    pub spn: SpnGraph,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Provenance {
    pub seed: u64,
    pub config_fingerprint: String,
}

/// The full analysis result for one chart.
#[derive(Debug, Clone)]
pub struct ChartDescription {
    pub image_w: usize,
    pub image_h: usize,
    pub region_bounds: Rect,
    pub homogenized_region: RgbRaster,
    pub background: Rgb,
    pub axis: AxisModel,
    pub curves: Vec<CurveInfo>,
    pub masks: Vec<CurveMask>,
    pub trails: Vec<PixelTrail>,
    pub unevenness: Vec<Vec<UnevennessPoint>>,
    pub middle_points: Vec<Vec<MiddlePoint>>,
    pub templates: Vec<MidpointTemplate>,
    pub rule2: StageArtifacts,
    pub rule3: StageArtifacts,
    pub warnings: Vec<Warning>,
    pub provenance: Provenance,
}

impl ChartDescription {
    pub fn stage(&self, stage: MergeStage) -> &StageArtifacts {
        match stage {
            MergeStage::Rule2 => &self.rule2,
            MergeStage::Rule3 => &self.rule3,
        }
    }

    pub fn curve_widths(&self) -> BTreeMap<u32, u32> {
        self.curves.iter().map(|c| (c.id, c.width_px)).collect()
    }

    /// Redraw the stage's curves from its Petri net onto a white canvas the
    /// size of the plot region.
    pub fn reconstruct(&self, stage: MergeStage) -> Result<RgbRaster> {
        crate::spn::reconstruct_curves(
            &self.stage(stage).spn,
            self.homogenized_region.width(),
            self.homogenized_region.height(),
            &self.curve_widths(),
        )
    }

    /// SSIM of the stage's reconstruction against the homogenized input plot
    /// region.
    pub fn reconstruction_ssim(&self, stage: MergeStage) -> Result<f64> {
        let recon = self.reconstruct(stage)?;
        ssim(&recon, &self.homogenized_region)
    }
}

/// Run the whole analysis. Errors carry the stage they surfaced in.
pub fn analyze(
    image: &ChartImage,
    sidecar: Option<&AxisSidecar>,
    config: &AnalysisConfig,
) -> Result<ChartDescription> {
    let mut warnings = Vec::new();

    let homogenized = apply_hsv_homogeneity(image.raster(), &config.homogeneity);
    let (region, partial_axis, region_warnings) = segment_regions(&homogenized);
    warnings.extend(region_warnings);

    let masks = extract_curve_masks(&region, config.homogeneity.min_color_pixels)
        .map_err(|e| e.in_stage("ingest"))?;

    let axis = match sidecar {
        Some(sc) => {
            let (axis, w) = merge_axis_sidecar(sc, partial_axis).map_err(|e| e.in_stage("axis"))?;
            warnings.extend(w);
            axis
        }
        None => partial_axis,
    };

    let ucfg = unevenness_criteria(&region);
    let mut trails = Vec::new();
    let mut unevenness = Vec::new();
    let mut middle_points = Vec::new();
    let mut rule2_segments: Vec<Vec<LineSegment>> = Vec::new();
    let mut widths = Vec::new();

    for mask in &masks {
        let trail = trace_centerline(mask).map_err(|e| e.in_stage("trace"))?;
        let points = detect_unevenness(&trail, &ucfg).map_err(|e| e.in_stage("unevenness"))?;
        let positions: Vec<PointI> = points.iter().map(|u| u.position).collect();

        let bounds = hierarchical_bounds(&positions, &config.clustering);
        let km = elbow_kmeans(&positions, bounds, &config.clustering, mask.curve_id as u64)
            .map_err(|e| e.in_stage("clustering"))?;
        let mps = cluster_middle_points(&km, &positions, mask.curve_id);
        let mps = filter_noise(mps, &trail, mask.width_estimate_px);

        let segs = build_segments(&mps, mask.curve_id).map_err(|e| e.in_stage("segments"))?;
        let segs = merge_rule_1(segs, mask.width_estimate_px);
        let segs = merge_rule_2(segs, mask.width_estimate_px);

        widths.push(mask.width_estimate_px);
        rule2_segments.push(segs);
        trails.push(trail);
        unevenness.push(points);
        middle_points.push(mps);
    }

    // Template association back onto the original image.
    let all_mps: Vec<MiddlePoint> = middle_points.iter().flatten().copied().collect();
    let mut templates = extract_midpoint_templates(&region, &all_mps);
    warnings.extend(associate_midpoints(
        image.raster(),
        region.bounds,
        &mut templates,
        &config.association,
    ));
    let matched_positions: BTreeMap<PointI, PointI> = templates
        .iter()
        .filter_map(|t| t.matched_position.map(|m| (t.midpoint.position, m)))
        .collect();

    let curves: Vec<CurveInfo> = masks
        .iter()
        .map(|m| CurveInfo {
            id: m.curve_id,
            color: m.color,
            width_px: m.width_estimate_px,
            pixel_count: m.pixel_count(),
        })
        .collect();
    let colors: BTreeMap<u32, Rgb> = curves.iter().map(|c| (c.id, c.color)).collect();

    let region_origin = PointI::new(region.bounds.x0, region.bounds.y0);
    let build_stage = |segments: Vec<Vec<LineSegment>>| -> Result<StageArtifacts> {
        let mut relations: Vec<Relation> = segments
            .iter()
            .flat_map(|segs| compute_connection_angles(segs))
            .collect();
        relations.extend(all_parallelisms(&segments, &widths));
        relations.extend(all_intersections(&segments));

        let ctx = GrowthContext {
            axis: &axis,
            region_origin,
            matched_positions: &matched_positions,
            cfg: &config.growth,
        };
        let growth: Vec<GrowthAnnotation> = segments
            .iter()
            .flat_map(|segs| classify_growth(segs, &ctx))
            .collect();

        let connections: Vec<Relation> = relations
            .iter()
            .filter(|r| r.kind == crate::segment::RelationKind::Connection)
            .cloned()
            .collect();
        let cross: Vec<Relation> = relations
            .iter()
            .filter(|r| r.kind != crate::segment::RelationKind::Connection)
            .cloned()
            .collect();
        let ast = KyrtosAst::from_analysis(&segments, &connections, &cross)
            .map_err(|e| e.in_stage("language"))?;
        let kyrtos_text = serialize(&ast).map_err(|e| e.in_stage("language"))?;

        let graphs =
            build_attributed_graphs(&relations, &segments).map_err(|e| e.in_stage("graphs"))?;
        let sentences = graphs_to_sentences(&graphs, &growth, &axis);
        let spn =
            kernels_to_spn(&sentences, &segments, &colors).map_err(|e| e.in_stage("spn"))?;

        Ok(StageArtifacts {
            segments,
            relations,
            growth,
            kyrtos_text,
            sentences,
            graphs,
            spn,
        })
    };

    let rule3_segments = merge_rule_3(rule2_segments.clone(), &widths);
    let rule2 = build_stage(rule2_segments)?;
    let rule3 = build_stage(rule3_segments)?;

    Ok(ChartDescription {
        image_w: image.raster().width(),
        image_h: image.raster().height(),
        region_bounds: region.bounds,
        homogenized_region: region.raster.clone(),
        background: region.background,
        axis,
        curves,
        masks,
        trails,
        unevenness,
        middle_points,
        templates,
        rule2,
        rule3,
        warnings,
        provenance: Provenance {
            seed: config.clustering.seed,
            config_fingerprint: config.fingerprint(),
        },
    })
}
