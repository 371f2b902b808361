//! Evaluation helpers: score aggregation and the ground-truth rasterization
//! baseline that separates rasterization error from recognition error.

use alloc::string::String;
use alloc::vec::Vec;

use crate::config::AnalysisConfig;
use crate::error::Result;
use crate::fmath;
use crate::geom::PointF;
use crate::ingest::{apply_hsv_homogeneity, segment_regions};
use crate::pipeline::MergeStage;
use crate::raster::{Rgb, RgbRaster};
use crate::ssim::ssim;
use crate::synth::{SyntheticChart, SyntheticSpec};

/// Aggregated SSIM scores for one (class, merge mode) cell.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassStats {
    pub class: String,
    pub mode: MergeStage,
    pub n: usize,
    pub mean_ssim: f64,
    pub std_dev: f64,
    pub failures: usize,
}

/// Population mean and standard deviation.
pub fn mean_std(scores: &[f64]) -> (f64, f64) {
    if scores.is_empty() {
        return (0.0, 0.0);
    }
    let n = scores.len() as f64;
    let mean = scores.iter().sum::<f64>() / n;
    let var = scores.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n;
    (mean, fmath::sqrt(var))
}

/// SSIM of the ground-truth polylines (redrawn aliased at the generator's
/// stroke widths) against the homogenized plot region. Recognition plays no
/// part, so this isolates the rasterization component of the error budget.
pub fn truth_baseline_ssim(
    chart: &SyntheticChart,
    spec: &SyntheticSpec,
    config: &AnalysisConfig,
) -> Result<f64> {
    let homog = apply_hsv_homogeneity(&chart.image, &config.homogeneity);
    let (region, _, _) = segment_regions(&homog);
    let mut canvas = RgbRaster::filled(region.raster.width(), region.raster.height(), Rgb::WHITE);
    for (ci, curve) in spec.curves.iter().enumerate() {
        let pts: Vec<PointF> = chart
            .truth
            .iter()
            .filter(|t| t.curve == ci as u32 + 1)
            .map(|t| {
                PointF::new(
                    (t.x - region.bounds.x0) as f64,
                    (t.y - region.bounds.y0) as f64,
                )
            })
            .collect();
        for pair in pts.windows(2) {
            canvas.draw_segment(pair[0], pair[1], curve.stroke_width as f64, curve.color, false);
        }
    }
    ssim(&canvas, &region.raster)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_std_basics() {
        let (m, s) = mean_std(&[1.0, 1.0, 1.0]);
        assert_eq!((m, s), (1.0, 0.0));
        let (m, s) = mean_std(&[0.0, 2.0]);
        assert_eq!(m, 1.0);
        assert_eq!(s, 1.0);
        assert_eq!(mean_std(&[]), (0.0, 0.0));
    }

    #[test]
    fn truth_baseline_is_high_for_solid_curves() {
        use crate::synth::{generate_chart, CurveClass, CurveSpec, DashPattern};
        let spec = SyntheticSpec {
            curves: alloc::vec![CurveSpec {
                class: CurveClass::Linear,
                color: Rgb::new(214, 39, 40),
                stroke_width: 3,
                dash: DashPattern::Solid,
            }],
            canvas_w: 640,
            canvas_h: 480,
            x_tick_count: 6,
            y_tick_count: 5,
            seed: 4,
            antialias: true,
            light_grid: false,
        };
        let chart = generate_chart(&spec).unwrap();
        let s = truth_baseline_ssim(&chart, &spec, &AnalysisConfig::default()).unwrap();
        assert!(s >= 0.97, "baseline ssim {s}");
    }
}
