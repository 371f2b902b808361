//! Pipeline configuration. Every knob has the default the analysis was
//! calibrated with; the CLI can override any of them from a TOML file.

use alloc::format;
use alloc::string::String;

/// HSV homogeneity filter parameters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct HomogeneityConfig {
    /// Number of equal hue bins over the 360-degree circle.
    pub hue_bins: u32,
    /// Pixels below this saturation are achromatic (white/gray/black anchor).
    pub saturation_threshold: f64,
    /// Achromatic pixels below this value map to the black anchor.
    pub value_black: f64,
    /// Achromatic pixels above this value map to the white anchor.
    pub value_white: f64,
    /// Unsharp-mask amount applied before quantization.
    pub sharpen_amount: f64,
    /// Contrast stretch percentiles.
    pub stretch_low_pct: f64,
    pub stretch_high_pct: f64,
    /// Palette colors smaller than this fold into their nearest neighbor.
    pub min_color_pixels: usize,
    /// Hard cap on palette size.
    pub max_palette: usize,
}

impl Default for HomogeneityConfig {
    fn default() -> Self {
        Self {
            hue_bins: 18,
            saturation_threshold: 0.15,
            value_black: 0.12,
            value_white: 0.65,
            sharpen_amount: 1.0,
            stretch_low_pct: 2.0,
            stretch_high_pct: 98.0,
            min_color_pixels: 50,
            max_palette: 16,
        }
    }
}

/// Unevenness-point clustering parameters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct ClusteringConfig {
    /// Single-linkage cut giving the detailed (upper) cluster count.
    pub cut_upper_px: f64,
    /// Single-linkage cut giving the coarse (lower) cluster count.
    pub cut_lower_px: f64,
    /// K-Means restarts per candidate k.
    pub restarts: u32,
    /// Lloyd iteration cap per restart.
    pub max_iterations: u32,
    /// Run-level RNG seed; restart seeds derive from it deterministically.
    pub seed: u64,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        Self {
            cut_upper_px: 3.0,
            cut_lower_px: 4.0,
            restarts: 5,
            max_iterations: 100,
            seed: 0,
        }
    }
}

/// Growth-rate classification tolerances.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct GrowthConfig {
    /// Slope-ratio band half-width: consecutive ratios must all exceed
    /// `1 + ratio_epsilon` for an exponential run.
    pub ratio_epsilon: f64,
    /// Slopes within this absolute band count as zero (steady).
    pub zero_epsilon: f64,
}

impl Default for GrowthConfig {
    fn default() -> Self {
        Self {
            ratio_epsilon: 0.15,
            zero_epsilon: 0.05,
        }
    }
}

/// Midpoint template association parameters. The 81x81 patch side is fixed.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct AssociationConfig {
    /// Search radius in pixels around the expected placement; `None` slides
    /// the template over the whole image.
    pub window_px: Option<u32>,
}

impl Default for AssociationConfig {
    fn default() -> Self {
        Self { window_px: Some(20) }
    }
}

/// Top-level analysis configuration.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct AnalysisConfig {
    pub homogeneity: HomogeneityConfig,
    pub clustering: ClusteringConfig,
    pub growth: GrowthConfig,
    pub association: AssociationConfig,
}

impl AnalysisConfig {
    /// FNV-1a hash over the canonical debug rendering, recorded in output
    /// provenance so bundles can be traced back to their parameters.
    pub fn fingerprint(&self) -> String {
        let repr = format!("{self:?}");
        let mut hash: u64 = 0xcbf29ce484222325;
        for byte in repr.as_bytes() {
            hash ^= *byte as u64;
            hash = hash.wrapping_mul(0x100000001b3);
        }
        format!("{hash:016x}")
    }
}
