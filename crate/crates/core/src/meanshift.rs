//! Mean shift filtering in the joint spatial-range domain.
//!
//! Each pixel is a point `(row, col, gray)`. A window of spatial radius
//! `h_s` and range radius `h_r` is centered on the pixel and repeatedly
//! moved to the (possibly kernel-weighted) mean of the original pixels it
//! covers. The sample set never changes, only the window position does.
//! The gray value where the window settles becomes the filtered value.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{quantize, GrayImage};

/// Default cap on mode-seeking steps per pixel.
pub const DEFAULT_INNER_MAX_STEPS: u32 = 100;

/// Default per-pixel tolerance on the range shift, in gray levels. Zero
/// means seek until the window stops moving, which the uniform kernel
/// reaches in finitely many steps. Any positive tolerance can truncate a
/// trajectory next to a rounding boundary and make the outer loop cycle.
pub const DEFAULT_INNER_TOL: f64 = 0.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Kernel {
    /// Flat window: every member has weight one.
    #[default]
    Uniform,
    /// Product of Epanechnikov profiles `1 - |x|^2` over the normalized
    /// spatial and range distances.
    Epanechnikov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WindowShape {
    /// Euclidean spatial distance `<= h_s`.
    #[default]
    Circle,
    /// Chebyshev spatial distance `<= h_s`.
    Square,
}

/// Parameters for one filtering pass. Construction validates every field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanShiftParams {
    spatial_radius: u32,
    range_radius: f64,
    kernel: Kernel,
    window: WindowShape,
    inner_max_steps: u32,
    inner_tol: f64,
}

impl MeanShiftParams {
    pub fn new(spatial_radius: u32, range_radius: f64) -> Result<Self> {
        if spatial_radius < 1 {
            return Err(Error::InvalidParameter(format!(
                "spatial radius must be >= 1, got {spatial_radius}"
            )));
        }
        if !(range_radius.is_finite() && range_radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "range radius must be a positive finite number, got {range_radius}"
            )));
        }
        Ok(Self {
            spatial_radius,
            range_radius,
            kernel: Kernel::Uniform,
            window: WindowShape::Circle,
            inner_max_steps: DEFAULT_INNER_MAX_STEPS,
            inner_tol: DEFAULT_INNER_TOL,
        })
    }

    pub fn with_kernel(mut self, kernel: Kernel) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn with_window(mut self, window: WindowShape) -> Self {
        self.window = window;
        self
    }

    pub fn with_inner_limits(mut self, max_steps: u32, tol: f64) -> Result<Self> {
        if max_steps < 1 {
            return Err(Error::InvalidParameter(
                "inner step cap must be >= 1".into(),
            ));
        }
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "inner tolerance must be finite and >= 0, got {tol}"
            )));
        }
        self.inner_max_steps = max_steps;
        self.inner_tol = tol;
        Ok(self)
    }

    /// Caps mode seeking at a single shift per pixel.
    pub fn single_shift(mut self) -> Self {
        self.inner_max_steps = 1;
        self
    }

    pub fn spatial_radius(&self) -> u32 {
        self.spatial_radius
    }

    pub fn range_radius(&self) -> f64 {
        self.range_radius
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn window(&self) -> WindowShape {
        self.window
    }

    pub fn inner_max_steps(&self) -> u32 {
        self.inner_max_steps
    }

    pub fn inner_tol(&self) -> f64 {
        self.inner_tol
    }

    /// Spatial distance between two positions under the window metric.
    fn spatial_distance_sq(&self, dr: f64, dc: f64) -> f64 {
        match self.window {
            WindowShape::Circle => dr * dr + dc * dc,
            WindowShape::Square => {
                let m = dr.abs().max(dc.abs());
                m * m
            }
        }
    }

    /// Whether a sample at offset `(dr, dc, dv)` from the center is in the window.
    #[inline]
    pub fn contains(&self, dr: f64, dc: f64, dv: f64) -> bool {
        let hs = f64::from(self.spatial_radius);
        self.spatial_distance_sq(dr, dc) <= hs * hs && dv.abs() <= self.range_radius
    }

    /// Kernel weight of a window member at offset `(dr, dc, dv)`.
    #[inline]
    pub fn weight(&self, dr: f64, dc: f64, dv: f64) -> f64 {
        match self.kernel {
            Kernel::Uniform => 1.0,
            Kernel::Epanechnikov => {
                let hs = f64::from(self.spatial_radius);
                let spatial = 1.0 - self.spatial_distance_sq(dr, dc) / (hs * hs);
                let range = 1.0 - (dv * dv) / (self.range_radius * self.range_radius);
                spatial.max(0.0) * range.max(0.0)
            }
        }
    }
}

/// A point in the joint spatial-range domain.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JointPoint {
    pub row: f64,
    pub col: f64,
    pub range: f64,
}

impl JointPoint {
    pub fn new(row: f64, col: f64, range: f64) -> Self {
        Self { row, col, range }
    }

    /// The joint point of pixel `(row, col)`.
    pub fn of_pixel(img: &GrayImage, row: usize, col: usize) -> Self {
        Self::new(row as f64, col as f64, f64::from(img.get(row, col)))
    }

    pub fn is_zero(&self) -> bool {
        self.row == 0.0 && self.col == 0.0 && self.range == 0.0
    }
}

impl std::ops::Sub for JointPoint {
    type Output = JointPoint;

    fn sub(self, rhs: JointPoint) -> JointPoint {
        JointPoint::new(
            self.row - rhs.row,
            self.col - rhs.col,
            self.range - rhs.range,
        )
    }
}

/// Inclusive index range covered by `center +- radius`, clipped to `[0, len)`.
fn clipped_span(center: f64, radius: f64, len: usize) -> std::ops::RangeInclusive<usize> {
    let lo = (center - radius).ceil().max(0.0) as usize;
    let hi = (center + radius).floor().min((len - 1) as f64);
    if hi < 0.0 || (lo as f64) > hi {
        #[allow(clippy::reversed_empty_ranges)]
        return 1..=0;
    }
    lo..=hi as usize
}

/// Every pixel inside the window centered at `center`, in row-major order.
///
/// The spatial window is clipped at image borders.
pub fn window_members(
    img: &GrayImage,
    center: JointPoint,
    params: &MeanShiftParams,
) -> Vec<JointPoint> {
    let mut out = Vec::new();
    let radius = f64::from(params.spatial_radius);
    for row in clipped_span(center.row, radius, img.height()) {
        for col in clipped_span(center.col, radius, img.width()) {
            let p = JointPoint::of_pixel(img, row, col);
            let d = p - center;
            if params.contains(d.row, d.col, d.range) {
                out.push(p);
            }
        }
    }
    out
}

/// Sample mean shift: arithmetic mean of `members` minus `center`.
pub fn mean_shift_vector(members: &[JointPoint], center: JointPoint) -> Result<JointPoint> {
    if members.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let n = members.len() as f64;
    let (mut r, mut c, mut v) = (0.0, 0.0, 0.0);
    for m in members {
        r += m.row;
        c += m.col;
        v += m.range;
    }
    Ok(JointPoint::new(r / n, c / n, v / n) - center)
}

/// Kernel-weighted mean of `members` minus `center`.
///
/// With the uniform kernel this is [`mean_shift_vector`]. Fails when the
/// members carry no weight at all.
pub fn weighted_shift_vector(
    members: &[JointPoint],
    center: JointPoint,
    params: &MeanShiftParams,
) -> Result<JointPoint> {
    let mut acc = Accumulator::default();
    for &m in members {
        let d = m - center;
        acc.add(m, params.weight(d.row, d.col, d.range));
    }
    acc.mean()
        .map(|mean| mean - center)
        .ok_or(Error::EmptyWindow)
}

#[derive(Default)]
struct Accumulator {
    weight: f64,
    row: f64,
    col: f64,
    range: f64,
}

impl Accumulator {
    #[inline]
    fn add(&mut self, p: JointPoint, w: f64) {
        self.weight += w;
        self.row += w * p.row;
        self.col += w * p.col;
        self.range += w * p.range;
    }

    fn mean(&self) -> Option<JointPoint> {
        (self.weight > 0.0).then(|| {
            JointPoint::new(
                self.row / self.weight,
                self.col / self.weight,
                self.range / self.weight,
            )
        })
    }
}

/// Weighted window mean around `center`, or `None` when the window holds
/// no weight. Same traversal order as [`window_members`].
fn window_mean(
    img: &GrayImage,
    center: JointPoint,
    params: &MeanShiftParams,
) -> Option<JointPoint> {
    let mut acc = Accumulator::default();
    let radius = f64::from(params.spatial_radius);
    for row in clipped_span(center.row, radius, img.height()) {
        let samples = img.row(row);
        let dr = row as f64 - center.row;
        for col in clipped_span(center.col, radius, img.width()) {
            let range = f64::from(samples[col]);
            let dc = col as f64 - center.col;
            let dv = range - center.range;
            if params.contains(dr, dc, dv) {
                acc.add(
                    JointPoint::new(row as f64, col as f64, range),
                    params.weight(dr, dc, dv),
                );
            }
        }
    }
    acc.mean()
}

/// Outcome of mode seeking from one pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSeek {
    /// Final window center.
    pub center: JointPoint,
    /// Number of mean shift steps taken.
    pub steps: u32,
}

/// Mode seeking from pixel `(row, col)`. Stops once the range shift drops
/// below the tolerance, the shift vanishes, the window empties, or the step
/// cap is reached.
pub fn seek_mode(img: &GrayImage, row: usize, col: usize, params: &MeanShiftParams) -> ModeSeek {
    let mut center = JointPoint::of_pixel(img, row, col);
    let mut steps = 0;
    while steps < params.inner_max_steps {
        let Some(mean) = window_mean(img, center, params) else {
            break;
        };
        steps += 1;
        let shift = mean - center;
        center = mean;
        if shift.range.abs() < params.inner_tol || shift.is_zero() {
            break;
        }
    }
    ModeSeek { center, steps }
}

/// Filtered (unquantized) gray value of pixel `(row, col)`.
pub fn filter_pixel(img: &GrayImage, row: usize, col: usize, params: &MeanShiftParams) -> f64 {
    seek_mode(img, row, col, params).center.range
}

/// One full filtering pass. Every output pixel is computed from the
/// unchanged input and quantized back to the input bit depth.
///
/// Rows are processed in parallel on the current rayon pool; the result
/// does not depend on scheduling.
pub fn filter_pass(img: &GrayImage, params: &MeanShiftParams) -> GrayImage {
    let width = img.width();
    let bit_depth = img.bit_depth();
    let mut data = vec![0u16; img.len()];
    data.par_chunks_mut(width)
        .enumerate()
        .for_each(|(row, out)| {
            for (col, px) in out.iter_mut().enumerate() {
                *px = quantize(filter_pixel(img, row, col, params), bit_depth);
            }
        });
    GrayImage::new(width, img.height(), bit_depth, data).expect("quantized output is a valid image")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(hs: u32, hr: f64) -> MeanShiftParams {
        MeanShiftParams::new(hs, hr).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(MeanShiftParams::new(0, 1.0).is_err());
        assert!(MeanShiftParams::new(1, 0.0).is_err());
        assert!(MeanShiftParams::new(1, f64::NAN).is_err());
        assert!(params(1, 1.0).with_inner_limits(0, 0.1).is_err());
        assert!(params(1, 1.0).with_inner_limits(1, -0.1).is_err());
        assert!(params(1, 1.0).with_inner_limits(1, 0.0).is_ok());
        assert_eq!(params(2, 3.0).single_shift().inner_max_steps(), 1);
    }

    #[test]
    fn clipped_span_borders() {
        assert_eq!(clipped_span(0.0, 2.0, 5), 0..=2);
        assert_eq!(clipped_span(4.0, 2.0, 5), 2..=4);
        assert_eq!(clipped_span(1.5, 1.0, 5), 1..=2);
        assert_eq!(clipped_span(0.0, 3.0, 1), 0..=0);
    }

    #[test]
    fn constant_image_window_is_spatial_disc() {
        let img = GrayImage::constant(7, 7, 8, 42).unwrap();
        let members = window_members(&img, JointPoint::of_pixel(&img, 3, 3), &params(2, 1.0));
        // offsets with dr^2 + dc^2 <= 4
        assert_eq!(members.len(), 13);
        let square = params(2, 1.0).with_window(WindowShape::Square);
        let members = window_members(&img, JointPoint::of_pixel(&img, 3, 3), &square);
        assert_eq!(members.len(), 25);
        let corner = window_members(&img, JointPoint::of_pixel(&img, 0, 0), &params(2, 1.0));
        assert_eq!(corner.len(), 6);
    }

    #[test]
    fn isolated_pixel_window() {
        let img = GrayImage::from_u8(3, 1, &[0, 100, 200]).unwrap();
        let p = params(1, 50.0);
        let members = window_members(&img, JointPoint::of_pixel(&img, 0, 1), &p);
        assert_eq!(members, vec![JointPoint::new(0.0, 1.0, 100.0)]);
        assert_eq!(filter_pixel(&img, 0, 1, &p), 100.0);
    }

    #[test]
    fn mean_shift_vector_examples() {
        let c = JointPoint::new(5.0, 5.0, 2.0);
        assert!(mean_shift_vector(&[c], c).unwrap().is_zero());
        let sym = [
            JointPoint::new(4.0, 5.0, 1.0),
            c,
            JointPoint::new(6.0, 5.0, 3.0),
        ];
        assert!(mean_shift_vector(&sym, c).unwrap().is_zero());
        let shifted = [
            JointPoint::new(5.0, 6.0, 2.0),
            JointPoint::new(5.0, 6.0, 3.0),
            JointPoint::new(5.0, 6.0, 4.0),
        ];
        let d = mean_shift_vector(&shifted, c).unwrap();
        assert_eq!(d, JointPoint::new(0.0, 1.0, 1.0));
        assert!(matches!(mean_shift_vector(&[], c), Err(Error::EmptyWindow)));
    }

    #[test]
    fn epanechnikov_singleton_and_weights() {
        let c = JointPoint::new(1.0, 1.0, 10.0);
        let p = params(2, 20.0).with_kernel(Kernel::Epanechnikov);
        assert!(weighted_shift_vector(&[c], c, &p).unwrap().is_zero());
        assert_eq!(p.weight(0.0, 0.0, 0.0), 1.0);
        assert_eq!(p.weight(1.0, 0.0, 10.0), 0.75 * 0.75);
        assert_eq!(p.weight(2.0, 0.0, 0.0), 0.0);
        // only weightless members: empty in the weighted sense
        let edge = JointPoint::new(3.0, 1.0, 10.0);
        assert!(weighted_shift_vector(&[edge], c, &p).is_err());
    }

    #[test]
    fn constant_image_converges_in_one_step() {
        let img = GrayImage::constant(7, 7, 8, 77).unwrap();
        let seek = seek_mode(&img, 3, 3, &params(2, 10.0));
        assert_eq!(seek.steps, 1);
        assert_eq!(seek.center.range, 77.0);
        // a clipped window drifts inward but never changes the value
        let corner = seek_mode(&img, 0, 0, &params(2, 10.0));
        assert!(corner.steps > 1);
        assert_eq!(corner.center.range, 77.0);
        let tolerant = params(2, 10.0).with_inner_limits(100, 0.01).unwrap();
        assert_eq!(seek_mode(&img, 0, 0, &tolerant).steps, 1);
        assert_eq!(filter_pass(&img, &params(3, 5.0)), img);
    }

    #[test]
    fn bright_center_pixel_transcript() {
        // 24 pixels at 100, center pixel at 110. All are range members of
        // each other for h_r = 20, and the window stays spatially centered
        // by symmetry, so one step reaches the window mean and the second
        // step has zero shift.
        let mut data = vec![100u8; 25];
        data[12] = 110;
        let img = GrayImage::from_u8(5, 5, &data).unwrap();

        let circle = params(2, 20.0);
        let seek = seek_mode(&img, 2, 2, &circle);
        assert_eq!(seek.steps, 2);
        assert_eq!(seek.center.range, (12.0 * 100.0 + 110.0) / 13.0);
        assert_eq!(seek.center.row, 2.0);
        assert_eq!(seek.center.col, 2.0);

        let square = circle.with_window(WindowShape::Square);
        let seek = seek_mode(&img, 2, 2, &square);
        assert_eq!(seek.steps, 2);
        assert_eq!(seek.center.range, (24.0 * 100.0 + 110.0) / 25.0);
        assert_eq!(quantize(seek.center.range, 8), 100);
    }

    #[test]
    fn step_image_is_fixed_point() {
        let img = GrayImage::from_fn(8, 6, 8, |_, c| if c < 4 { 0 } else { 255 }).unwrap();
        for kernel in [Kernel::Uniform, Kernel::Epanechnikov] {
            assert_eq!(filter_pass(&img, &params(3, 50.0).with_kernel(kernel)), img);
        }
    }

    #[test]
    fn single_shift_takes_one_step() {
        let img = GrayImage::from_fn(6, 6, 8, |r, c| (r * 30 + c * 7) as u16).unwrap();
        let p = params(2, 40.0).single_shift();
        for r in 0..6 {
            for c in 0..6 {
                assert!(seek_mode(&img, r, c, &p).steps <= 1);
            }
        }
    }
}
