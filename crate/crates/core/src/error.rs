//! Crate-wide error type. Warnings are not errors: recoverable conditions
//! (missing axes, ambiguous template matches) surface as [`Warning`] values
//! attached to the pipeline output instead.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("image too small: {width}x{height} (minimum 64x64)")]
    ImageTooSmall { width: usize, height: usize },
    #[error("no curves found: no non-background color covers at least {min_pixels} pixels")]
    NoCurvesFound { min_pixels: usize },
    #[error("fragmented curve {curve_id}: {empty_pct}% of columns empty and a gap exceeds the bridge threshold of {bridge_px} px")]
    FragmentedCurve {
        curve_id: u32,
        empty_pct: u32,
        bridge_px: u32,
    },
    #[error("trail too short: {len} points (need at least 3)")]
    TrailTooShort { len: usize },
    #[error("slope of identical points ({x}, {y})")]
    IdenticalPoints { x: i32, y: i32 },
    #[error("curve degenerate: {count} middle-point(s), need at least 2 to form a segment")]
    CurveDegenerate { curve_id: u32, count: usize },
    #[error("{points} points cannot form {k} clusters")]
    TooFewPoints { points: usize, k: usize },
    #[error("tick mismatch on {axis} axis: sidecar lists {sidecar} ticks, {detected} detected")]
    TickMismatch {
        axis: &'static str,
        sidecar: usize,
        detected: usize,
    },
    #[error("malformed axis sidecar: {0}")]
    MalformedSidecar(String),
    #[error("lex error at position {position}: unexpected character {found:?}")]
    Lex { position: usize, found: char },
    #[error("syntax error at position {position}: expected {expected}, found {found}")]
    Syntax {
        position: usize,
        expected: String,
        found: String,
    },
    #[error("semantic error at position {position}: {message}")]
    Semantic { position: usize, message: String },
    #[error("unknown segment {id}")]
    UnknownSegment { id: String },
    #[error("curve id {id} not representable (identifiers carry a single curve digit)")]
    CurveIdOutOfRange { id: u32 },
    #[error("Petri net deadlock: marked places {marked:?}, unfired transitions {stuck:?}")]
    Deadlock {
        marked: Vec<String>,
        stuck: Vec<String>,
    },
    #[error("missing coordinate tokens on place {place}")]
    MissingTokens { place: String },
    #[error("image dimensions differ: {a_w}x{a_h} vs {b_w}x{b_h}")]
    DimensionMismatch {
        a_w: usize,
        a_h: usize,
        b_w: usize,
        b_h: usize,
    },
    #[error("synthetic spec invalid: {0}")]
    InvalidSpec(String),
    #[error("{stage} stage: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Tag an error with the pipeline stage it surfaced in.
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

/// Non-fatal conditions the pipeline reports alongside its output.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Warning {
    /// No axis run longer than half the image dimension; the whole image is
    /// treated as the plot region.
    NoAxesDetected,
    /// At least two template placements scored within 1% of the best match.
    AmbiguousMatch { curve_id: u32, x: i32, y: i32 },
    /// Sidecar ticks were fewer/more than detected ticks (within the 50%
    /// tolerance); unmatched ticks keep no numeric value.
    PartialTickMatch { axis: String },
}

impl core::fmt::Display for Warning {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Warning::NoAxesDetected => write!(f, "no axes detected; using full image as plot region"),
            Warning::AmbiguousMatch { curve_id, x, y } => {
                write!(f, "ambiguous template match for curve {curve_id} near ({x}, {y})")
            }
            Warning::PartialTickMatch { axis } => {
                write!(f, "sidecar tick count differs from detected ticks on {axis} axis")
            }
        }
    }
}
