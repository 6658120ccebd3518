//! Grayscale image segmentation with the iterative mean shift algorithm.
//!
//! The image is filtered with joint spatial-range mean shift over and over;
//! an entropy-based criterion decides when to stop. Two criteria are
//! available: the absolute change in image entropy between passes, and the
//! entropy of the absolute difference image between passes. The second one
//! reaches exactly zero once the filter hits a quantized fixed point.
//!
//! ```
//! use mshia_core::{segment, Criterion, GrayImage, MeanShiftParams, StoppingConfig};
//!
//! let img = GrayImage::from_fn(16, 16, 8, |r, c| ((r * 7 + c * 3) % 40) as u16 + 100).unwrap();
//! let ms = MeanShiftParams::new(2, 12.0).unwrap();
//! let stop = StoppingConfig::new(Criterion::NewDiffEntropy, 0.001, 50).unwrap();
//! let result = segment(&img, &ms, &stop);
//! assert!(result.iterations_run >= 1);
//! ```

pub mod analysis;
pub mod driver;
pub mod error;
pub mod fmt;
pub mod image;
pub mod meanshift;
pub mod pgm;
#[cfg(feature = "png")]
pub mod png;
pub mod suite;

pub use analysis::{
    diff_histogram_peak, extract_profile, label_regions, stability_metrics, Orientation,
    ProfileSpec, RegionLabels, StabilityReport,
};
pub use driver::{
    criterion_value, run_new, run_old, segment, Criterion, IterationRecord, IterationTrace,
    SegmentationResult, StoppingConfig, Termination,
};
pub use error::{Error, Result};
pub use image::{abs_diff, entropy, histogram, quantize, GrayImage, Histogram, ProbDist};
pub use meanshift::{filter_pass, filter_pixel, JointPoint, Kernel, MeanShiftParams, WindowShape};
