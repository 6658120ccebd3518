//! The outer iterative loop: filter the image again and again until an
//! entropy-based stopping criterion fires.
//!
//! Two criteria share one loop skeleton:
//!
//! * [`Criterion::OldEntropyDelta`]: `|entropy(next) - entropy(prev)|`.
//! * [`Criterion::NewDiffEntropy`]: `entropy(|next - prev|)`.
//!
//! The loop always runs at least one pass and stops as soon as the
//! criterion value is `<= threshold`, or after `max_outer_iters` passes.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fmt::sig9;
use crate::image::{abs_diff, entropy, GrayImage};
use crate::meanshift::{filter_pass, MeanShiftParams};

/// Default cap on outer iterations.
pub const DEFAULT_MAX_OUTER_ITERS: u32 = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Criterion {
    /// Absolute change of image entropy between consecutive passes.
    OldEntropyDelta,
    /// Entropy of the absolute difference between consecutive passes.
    NewDiffEntropy,
}

impl Criterion {
    pub fn name(&self) -> &'static str {
        match self {
            Criterion::OldEntropyDelta => "old",
            Criterion::NewDiffEntropy => "new",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "old" => Ok(Criterion::OldEntropyDelta),
            "new" => Ok(Criterion::NewDiffEntropy),
            other => Err(Error::InvalidParameter(format!(
                "unknown criterion {other:?}, expected old or new"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingConfig {
    criterion: Criterion,
    threshold: f64,
    max_outer_iters: u32,
}

impl StoppingConfig {
    pub fn new(criterion: Criterion, threshold: f64, max_outer_iters: u32) -> Result<Self> {
        if !(threshold.is_finite() && threshold > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "threshold must be a positive finite number, got {threshold}"
            )));
        }
        if max_outer_iters < 1 {
            return Err(Error::InvalidParameter(
                "max outer iterations must be >= 1".into(),
            ));
        }
        Ok(Self {
            criterion,
            threshold,
            max_outer_iters,
        })
    }

    pub fn criterion(&self) -> Criterion {
        self.criterion
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn max_outer_iters(&self) -> u32 {
        self.max_outer_iters
    }

    pub fn with_criterion(mut self, criterion: Criterion) -> Self {
        self.criterion = criterion;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Threshold,
    MaxIters,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::Threshold => "Threshold",
            Termination::MaxIters => "MaxIters",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    /// 1-based pass index.
    pub iter: u32,
    pub criterion_value: f64,
    /// Entropy of the image produced by this pass.
    pub image_entropy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
    pub terminated_by: Termination,
}

impl IterationTrace {
    pub fn criterion_values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.criterion_value).collect()
    }

    pub fn last_value(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.criterion_value)
    }

    /// Writes the trace as CSV: header `iter,criterion,image_entropy`, one
    /// row per pass with 9 significant digits, then a
    /// `# terminated_by=...` comment row.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "iter,criterion,image_entropy")?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{}",
                r.iter,
                sig9(r.criterion_value),
                sig9(r.image_entropy)
            )?;
        }
        writeln!(w, "# terminated_by={}", self.terminated_by)
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is ascii")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationResult {
    pub final_image: GrayImage,
    /// Image before the last pass; `|final - previous|` is the last
    /// difference image.
    pub previous_image: GrayImage,
    pub trace: IterationTrace,
    pub iterations_run: u32,
}

impl SegmentationResult {
    /// `|final - previous|` from the last pass.
    pub fn last_difference(&self) -> GrayImage {
        abs_diff(&self.final_image, &self.previous_image).expect("consecutive passes share a shape")
    }
}

/// Stopping criterion value for one pass from `prev` to `next`.
///
/// `prev_entropy` is only read by the old criterion.
pub fn criterion_value(
    prev: &GrayImage,
    next: &GrayImage,
    criterion: Criterion,
    prev_entropy: f64,
) -> Result<f64> {
    match criterion {
        Criterion::OldEntropyDelta => {
            if !prev.same_shape(next) {
                // surface the same error the new criterion would
                abs_diff(prev, next)?;
            }
            Ok((entropy(next) - prev_entropy).abs())
        }
        Criterion::NewDiffEntropy => Ok(entropy(&abs_diff(next, prev)?)),
    }
}

/// Runs the loop with the criterion selected in `stop`.
pub fn segment(img: &GrayImage, ms: &MeanShiftParams, stop: &StoppingConfig) -> SegmentationResult {
    run_loop(img, stop, |prev| filter_pass(prev, ms))
}

/// Outer loop with the entropy-delta criterion.
pub fn run_old(
    img: &GrayImage,
    ms: &MeanShiftParams,
    stop: &StoppingConfig,
) -> Result<SegmentationResult> {
    expect_criterion(stop, Criterion::OldEntropyDelta)?;
    Ok(segment(img, ms, stop))
}

/// Outer loop with the difference-image entropy criterion.
pub fn run_new(
    img: &GrayImage,
    ms: &MeanShiftParams,
    stop: &StoppingConfig,
) -> Result<SegmentationResult> {
    expect_criterion(stop, Criterion::NewDiffEntropy)?;
    Ok(segment(img, ms, stop))
}

fn expect_criterion(stop: &StoppingConfig, expected: Criterion) -> Result<()> {
    if stop.criterion != expected {
        return Err(Error::CriterionMismatch {
            expected: expected.name(),
            actual: stop.criterion.name(),
        });
    }
    Ok(())
}

/// The shared loop skeleton, generic over the per-pass transform so tests
/// can drive it with arbitrary image sequences.
pub fn run_loop<F>(img: &GrayImage, stop: &StoppingConfig, mut pass: F) -> SegmentationResult
where
    F: FnMut(&GrayImage) -> GrayImage,
{
    let mut prev = img.clone();
    let mut prev_entropy = entropy(img);
    let mut records = Vec::new();
    let mut iter = 0;
    loop {
        iter += 1;
        let next = pass(&prev);
        let image_entropy = entropy(&next);
        let value = criterion_value(&prev, &next, stop.criterion, prev_entropy)
            .expect("filter pass preserves shape");
        records.push(IterationRecord {
            iter,
            criterion_value: value,
            image_entropy,
        });
        let terminated_by = if value <= stop.threshold {
            Some(Termination::Threshold)
        } else if iter >= stop.max_outer_iters {
            Some(Termination::MaxIters)
        } else {
            None
        };
        if let Some(terminated_by) = terminated_by {
            return SegmentationResult {
                final_image: next,
                previous_image: prev,
                trace: IterationTrace {
                    records,
                    terminated_by,
                },
                iterations_run: iter,
            };
        }
        prev = next;
        prev_entropy = image_entropy;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stop(c: Criterion, t: f64, max: u32) -> StoppingConfig {
        StoppingConfig::new(c, t, max).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(StoppingConfig::new(Criterion::NewDiffEntropy, 0.0, 5).is_err());
        assert!(StoppingConfig::new(Criterion::NewDiffEntropy, -1.0, 5).is_err());
        assert!(StoppingConfig::new(Criterion::NewDiffEntropy, 0.1, 0).is_err());
        assert!("old".parse::<Criterion>().is_ok());
        assert!("both".parse::<Criterion>().is_err());
    }

    #[test]
    fn criterion_value_examples() {
        let a = GrayImage::from_u8(2, 2, &[0, 0, 255, 255]).unwrap();
        let b = GrayImage::from_u8(2, 2, &[0, 0, 0, 255]).unwrap();
        assert_eq!(
            criterion_value(&a, &a, Criterion::NewDiffEntropy, 0.0).unwrap(),
            0.0
        );
        assert_eq!(
            criterion_value(&a, &a, Criterion::OldEntropyDelta, entropy(&a)).unwrap(),
            0.0
        );
        let v = criterion_value(&a, &b, Criterion::NewDiffEntropy, 0.0).unwrap();
        assert!((v - (2.0 - 0.75 * 3f64.log2())).abs() < 1e-12);
        let c = GrayImage::from_u8(1, 4, &[0, 0, 0, 255]).unwrap();
        for crit in [Criterion::NewDiffEntropy, Criterion::OldEntropyDelta] {
            assert!(matches!(
                criterion_value(&a, &c, crit, 0.0),
                Err(Error::DimensionMismatch { .. })
            ));
        }
    }

    #[test]
    fn driver_rejects_wrong_criterion() {
        let img = GrayImage::constant(2, 2, 8, 1).unwrap();
        let ms = MeanShiftParams::new(1, 1.0).unwrap();
        assert!(run_old(&img, &ms, &stop(Criterion::NewDiffEntropy, 0.1, 3)).is_err());
        assert!(run_new(&img, &ms, &stop(Criterion::OldEntropyDelta, 0.1, 3)).is_err());
    }

    #[test]
    fn constant_image_stops_after_one_pass() {
        let img = GrayImage::constant(6, 5, 8, 9).unwrap();
        let ms = MeanShiftParams::new(2, 12.0).unwrap();
        for c in [Criterion::OldEntropyDelta, Criterion::NewDiffEntropy] {
            let res = segment(&img, &ms, &stop(c, 0.001, 50));
            assert_eq!(res.iterations_run, 1);
            assert_eq!(res.trace.records.len(), 1);
            assert_eq!(res.trace.records[0].criterion_value, 0.0);
            assert_eq!(res.trace.terminated_by, Termination::Threshold);
            assert_eq!(res.final_image, img);
            assert!(res.last_difference().data().iter().all(|&v| v == 0));
        }
    }

    #[test]
    fn max_threshold_stops_old_after_one_pass() {
        let img = GrayImage::from_fn(8, 8, 8, |r, c| ((r * 37 + c * 101) % 256) as u16).unwrap();
        let ms = MeanShiftParams::new(2, 30.0).unwrap();
        let res = run_old(&img, &ms, &stop(Criterion::OldEntropyDelta, 8.0, 50)).unwrap();
        assert_eq!(res.iterations_run, 1);
        assert_eq!(res.trace.terminated_by, Termination::Threshold);
    }

    #[test]
    fn max_iters_is_reported() {
        // alternate between two images: the new criterion never reaches 0
        let a = GrayImage::from_u8(2, 1, &[0, 10]).unwrap();
        let b = GrayImage::from_u8(2, 1, &[10, 10]).unwrap();
        let res = run_loop(&a, &stop(Criterion::NewDiffEntropy, 0.5, 4), |prev| {
            if *prev == a {
                b.clone()
            } else {
                a.clone()
            }
        });
        assert_eq!(res.iterations_run, 4);
        assert_eq!(res.trace.terminated_by, Termination::MaxIters);
        assert!(res.trace.records.iter().all(|r| r.criterion_value == 1.0));
        let iters: Vec<u32> = res.trace.records.iter().map(|r| r.iter).collect();
        assert_eq!(iters, vec![1, 2, 3, 4]);
    }

    #[test]
    fn old_criterion_seeds_with_input_entropy() {
        let a = GrayImage::from_u8(4, 1, &[0, 0, 255, 255]).unwrap();
        let b = GrayImage::from_u8(4, 1, &[0, 0, 0, 255]).unwrap();
        let c = GrayImage::from_u8(4, 1, &[0, 0, 0, 0]).unwrap();
        let seq = [b.clone(), c.clone()];
        let mut i = 0;
        let res = run_loop(&a, &stop(Criterion::OldEntropyDelta, 1e-9, 10), |_| {
            let out = seq[i.min(1)].clone();
            i += 1;
            out
        });
        let h = 2.0 - 0.75 * 3f64.log2();
        let values = res.trace.criterion_values();
        assert!((values[0] - (1.0 - h)).abs() < 1e-12);
        assert!((values[1] - h).abs() < 1e-12);
        assert_eq!(values[2], 0.0);
        assert_eq!(res.iterations_run, 3);
    }

    #[test]
    fn csv_format() {
        let trace = IterationTrace {
            records: vec![
                IterationRecord {
                    iter: 1,
                    criterion_value: 2.0 - 0.75 * 3f64.log2(),
                    image_entropy: 3.0,
                },
                IterationRecord {
                    iter: 2,
                    criterion_value: 0.0,
                    image_entropy: 1.0 / 3.0,
                },
            ],
            terminated_by: Termination::Threshold,
        };
        assert_eq!(
            trace.to_csv(),
            "iter,criterion,image_entropy\n1,0.811278124,3\n2,0,0.333333333\n# terminated_by=Threshold\n"
        );
    }
}
