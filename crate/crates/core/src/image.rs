//! Grayscale image representation, histograms, entropy and pixel arithmetic.

use crate::error::{Error, Result};

/// Largest supported bit depth.
pub const MAX_BIT_DEPTH: u8 = 16;

/// Bit depth used when none is given.
pub const DEFAULT_BIT_DEPTH: u8 = 8;

/// A rectangular grid of integer gray levels stored row-major.
///
/// Every sample lies in `[0, 2^bit_depth - 1]`. Images are immutable once
/// built; all transforms return new images.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    bit_depth: u8,
    data: Vec<u16>,
}

impl GrayImage {
    /// Builds an image, validating shape, bit depth and sample range.
    pub fn new(width: usize, height: usize, bit_depth: u8, data: Vec<u16>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "image must be at least 1x1, got {width}x{height}"
            )));
        }
        if !(1..=MAX_BIT_DEPTH).contains(&bit_depth) {
            return Err(Error::InvalidImage(format!(
                "bit depth must be in 1..={MAX_BIT_DEPTH}, got {bit_depth}"
            )));
        }
        let expected = width
            .checked_mul(height)
            .ok_or_else(|| Error::InvalidImage("image dimensions overflow".into()))?;
        if data.len() != expected {
            return Err(Error::InvalidImage(format!(
                "data length {} does not match {width}x{height}",
                data.len()
            )));
        }
        let max = max_level(bit_depth);
        if let Some(pos) = data.iter().position(|&v| v > max) {
            return Err(Error::InvalidImage(format!(
                "sample {} at index {pos} exceeds maximum level {max}",
                data[pos]
            )));
        }
        Ok(Self {
            width,
            height,
            bit_depth,
            data,
        })
    }

    /// 8-bit image from row-major samples.
    pub fn from_u8(width: usize, height: usize, data: &[u8]) -> Result<Self> {
        Self::new(
            width,
            height,
            DEFAULT_BIT_DEPTH,
            data.iter().map(|&v| u16::from(v)).collect(),
        )
    }

    /// Image where every pixel holds `level`.
    pub fn constant(width: usize, height: usize, bit_depth: u8, level: u16) -> Result<Self> {
        Self::new(width, height, bit_depth, vec![level; width * height])
    }

    /// Builds an image by evaluating `f(row, col)` for every pixel.
    pub fn from_fn<F>(width: usize, height: usize, bit_depth: u8, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> u16,
    {
        let mut data = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                data.push(f(row, col));
            }
        }
        Self::new(width, height, bit_depth, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bit_depth(&self) -> u8 {
        self.bit_depth
    }

    /// Highest representable gray level, `2^B - 1`.
    pub fn max_level(&self) -> u16 {
        max_level(self.bit_depth)
    }

    /// Number of gray levels, `2^B`.
    pub fn levels(&self) -> usize {
        1usize << self.bit_depth
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    /// Always false: images hold at least one pixel.
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[u16] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u16> {
        self.data
    }

    /// Sample at `(row, col)`. Panics when out of bounds.
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u16 {
        assert!(row < self.height && col < self.width, "pixel out of bounds");
        self.data[row * self.width + col]
    }

    /// Row `row` as a slice.
    pub fn row(&self, row: usize) -> &[u16] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    pub fn same_shape(&self, other: &GrayImage) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.bit_depth == other.bit_depth
    }

    /// Smallest and largest sample.
    pub fn min_max(&self) -> (u16, u16) {
        self.data
            .iter()
            .fold((u16::MAX, 0), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    pub fn is_constant(&self) -> bool {
        let first = self.data[0];
        self.data.iter().all(|&v| v == first)
    }
}

/// `2^B - 1` for bit depth `B`.
pub fn max_level(bit_depth: u8) -> u16 {
    ((1u32 << bit_depth) - 1) as u16
}

/// Occurrence count of every gray level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    counts: Vec<u64>,
    total: u64,
}

impl Histogram {
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, level: usize) -> u64 {
        self.counts[level]
    }

    /// Normalized probabilities `counts[g] / total`.
    pub fn probabilities(&self) -> ProbDist {
        let total = self.total as f64;
        ProbDist {
            probs: self.counts.iter().map(|&c| c as f64 / total).collect(),
        }
    }

    /// Gray level with the largest count; ties go to the lowest level.
    pub fn peak(&self) -> usize {
        let mut best = 0;
        for (level, &count) in self.counts.iter().enumerate() {
            if count > self.counts[best] {
                best = level;
            }
        }
        best
    }
}

/// Gray-level probability distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbDist {
    probs: Vec<f64>,
}

impl ProbDist {
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Shannon entropy in bits. Zero-probability levels contribute nothing.
    pub fn entropy(&self) -> f64 {
        let sum: f64 = self
            .probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.log2())
            .sum();
        // -0.0 for degenerate distributions
        (-sum).max(0.0)
    }
}

/// Counts how many pixels hold each of the `2^B` gray levels.
pub fn histogram(img: &GrayImage) -> Histogram {
    let mut counts = vec![0u64; img.levels()];
    for &v in img.data() {
        counts[v as usize] += 1;
    }
    Histogram {
        counts,
        total: img.len() as u64,
    }
}

/// Image entropy `-sum p_x log2 p_x` over all `2^B` levels, in bits.
///
/// The result lies in `[0, B]` and is zero exactly for constant images.
pub fn entropy(img: &GrayImage) -> f64 {
    histogram(img).probabilities().entropy()
}

/// Pixelwise `|a - b|`.
pub fn abs_diff(a: &GrayImage, b: &GrayImage) -> Result<GrayImage> {
    if !a.same_shape(b) {
        return Err(Error::DimensionMismatch {
            left: (a.width, a.height, a.bit_depth),
            right: (b.width, b.height, b.bit_depth),
        });
    }
    let data = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(&x, &y)| x.abs_diff(y))
        .collect();
    Ok(GrayImage {
        width: a.width,
        height: a.height,
        bit_depth: a.bit_depth,
        data,
    })
}

/// Rounds half away from zero, then clamps into `[0, 2^B - 1]`.
pub fn quantize(value: f64, bit_depth: u8) -> u16 {
    let max = f64::from(max_level(bit_depth));
    let rounded = value.round();
    if rounded.is_nan() || rounded <= 0.0 {
        0
    } else if rounded >= max {
        max as u16
    } else {
        rounded as u16
    }
}
