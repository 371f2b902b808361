//! kyrtos-core: reverse engineering of line charts with multi-colored curves.
//!
//! The crate turns an in-memory raster chart into a structured description of
//! its curves and converts that description into several interchangeable
//! representations. The pipeline stages are:
//!
//! 1. **Ingest** – HSV homogeneity filtering (shade collapse onto dominant
//!    colors), axis/plot-region separation, per-color curve masks, stroke
//!    width estimation.
//! 2. **Trace** – column-wise centerline tracing of each mask and detection of
//!    unevenness points where the trail direction drifts past the acceptance
//!    criterion `e = H/L`.
//! 3. **Cluster** – single-linkage distance cuts bound an iterative elbow
//!    K-Means that thins redundant unevenness points down to one middle-point
//!    per cluster; middle-points chain into directed line segments.
//! 4. **Analyze** – three merging rules condense the segment chains;
//!    cross-curve intersections (parametric solve) and parallelisms are
//!    detected; growth classes are assigned per run of same-sign slopes;
//!    81x81 midpoint templates are matched back onto the original image.
//! 5. **Represent** – the analysis is serialized into the Kyrtos relation
//!    language (`.kyr`), attributed relation graphs, numbered natural-language
//!    sentences built from agent-verb-patient kernels, and a colored
//!    Stochastic Petri net whose tokens carry segment coordinates.
//! 6. **Reconstruct** – replaying the Petri net redraws the curves, and SSIM
//!    against the homogenized plot region scores the fidelity of the whole
//!    round trip.
//!
//! The crate is `no_std` (with `alloc`) and performs no I/O: callers hand it
//! pixel buffers and receive plain data structures. Decoding, file formats and
//! the CLI live in the companion `kyrtos` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod cluster;
pub mod config;
pub mod error;
pub mod eval;
pub mod fmath;
pub mod geom;
pub mod graph;
pub mod ingest;
pub mod lang;
pub mod pipeline;
pub mod trace;
pub mod raster;
pub mod segment;
pub mod spn;
pub mod ssim;
pub mod synth;

pub use config::AnalysisConfig;
pub use error::{Error, Result};
pub use geom::{PointF, PointI, Slope};
pub use pipeline::{analyze, ChartDescription, MergeStage};
pub use raster::{Rgb, RgbRaster};
