//! Post-hoc analysis of segmentation runs: intensity profiles, stability
//! metrics over criterion traces, region labeling and difference-image
//! histogram peaks.

use std::collections::VecDeque;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::driver::IterationTrace;
use crate::error::{Error, Result};
use crate::fmt::sig9;
use crate::image::{histogram, GrayImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Row,
    Column,
}

/// A horizontal or vertical line through an image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProfileSpec {
    pub orientation: Orientation,
    pub index: usize,
}

impl ProfileSpec {
    pub fn row(index: usize) -> Self {
        Self {
            orientation: Orientation::Row,
            index,
        }
    }

    pub fn column(index: usize) -> Self {
        Self {
            orientation: Orientation::Column,
            index,
        }
    }
}

impl fmt::Display for ProfileSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.orientation {
            Orientation::Row => write!(f, "row:{}", self.index),
            Orientation::Column => write!(f, "col:{}", self.index),
        }
    }
}

/// Parses `row:N` or `col:N`.
impl FromStr for ProfileSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad =
            || Error::InvalidParameter(format!("profile {s:?} must look like row:N or col:N"));
        let (kind, index) = s.split_once(':').ok_or_else(bad)?;
        let index: usize = index.parse().map_err(|_| bad())?;
        match kind {
            "row" => Ok(Self::row(index)),
            "col" | "column" => Ok(Self::column(index)),
            _ => Err(bad()),
        }
    }
}

/// Gray levels along a row (left to right) or column (top to bottom).
pub fn extract_profile(img: &GrayImage, spec: ProfileSpec) -> Result<Vec<u16>> {
    match spec.orientation {
        Orientation::Row => {
            check_index("row", spec.index, img.height())?;
            Ok(img.row(spec.index).to_vec())
        }
        Orientation::Column => {
            check_index("column", spec.index, img.width())?;
            Ok((0..img.height()).map(|r| img.get(r, spec.index)).collect())
        }
    }
}

fn check_index(what: &'static str, index: usize, limit: usize) -> Result<()> {
    if index >= limit {
        return Err(Error::OutOfBounds { what, index, limit });
    }
    Ok(())
}

/// Writes a profile as CSV `position,gray`.
pub fn write_profile_csv<W: Write>(mut w: W, profile: &[u16]) -> std::io::Result<()> {
    writeln!(w, "position,gray")?;
    for (pos, gray) in profile.iter().enumerate() {
        writeln!(w, "{pos},{gray}")?;
    }
    Ok(())
}

/// Oscillation summary of a criterion trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    /// Sign changes between successive nonzero first differences.
    pub oscillation_count: usize,
    /// Sum of absolute first differences.
    pub total_variation: f64,
    pub iterations: usize,
}

impl fmt::Display for StabilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{{\"oscillations\": {}, \"total_variation\": {}, \"iterations\": {}}}",
            self.oscillation_count,
            sig9(self.total_variation),
            self.iterations
        )
    }
}

/// Stability metrics over a sequence of criterion values.
///
/// A position `k` counts as an oscillation when the differences
/// `t[k] - t[k-1]` and `t[k+1] - t[k]` are both nonzero and have
/// opposite signs.
pub fn stability_of_values(values: &[f64]) -> StabilityReport {
    let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let oscillation_count = diffs
        .windows(2)
        .filter(|d| d[0] != 0.0 && d[1] != 0.0 && (d[0] > 0.0) != (d[1] > 0.0))
        .count();
    StabilityReport {
        oscillation_count,
        total_variation: diffs.iter().map(|d| d.abs()).sum(),
        iterations: values.len(),
    }
}

pub fn stability_metrics(trace: &IterationTrace) -> StabilityReport {
    stability_of_values(&trace.criterion_values())
}

/// 4-connected components of equal gray level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionLabels {
    pub width: usize,
    pub height: usize,
    /// Row-major labels, consecutive from 0 in first-seen raster order.
    pub labels: Vec<u32>,
    pub count: usize,
}

pub fn label_regions(img: &GrayImage) -> RegionLabels {
    const UNSET: u32 = u32::MAX;
    let (w, h) = (img.width(), img.height());
    let data = img.data();
    let mut labels = vec![UNSET; data.len()];
    let mut queue = VecDeque::new();
    let mut next = 0u32;
    for start in 0..data.len() {
        if labels[start] != UNSET {
            continue;
        }
        let level = data[start];
        labels[start] = next;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            let (r, c) = (i / w, i % w);
            let neighbors = [
                (r > 0).then(|| i - w),
                (r + 1 < h).then(|| i + w),
                (c > 0).then(|| i - 1),
                (c + 1 < w).then(|| i + 1),
            ];
            for j in neighbors.into_iter().flatten() {
                if labels[j] == UNSET && data[j] == level {
                    labels[j] = next;
                    queue.push_back(j);
                }
            }
        }
        next += 1;
    }
    RegionLabels {
        width: w,
        height: h,
        labels,
        count: next as usize,
    }
}

/// Most frequent gray level of a difference image (lowest on ties).
pub fn diff_histogram_peak(diff: &GrayImage) -> u16 {
    histogram(diff).peak() as u16
}
