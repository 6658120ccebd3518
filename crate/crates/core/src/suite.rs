//! The standard test images.
//!
//! Two photographs ship as embedded 8-bit PGM files (the cameraman and
//! astronaut scenes from the scikit-image sample data, both free of
//! copyright restrictions). Two synthetic images are generated from fixed
//! seeds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::image::{quantize, GrayImage};
use crate::pgm;

/// Zero-mean noise with roughly unit variance (sum of four uniforms).
fn noise(rng: &mut ChaCha8Rng) -> f64 {
    let s: f64 = (0..4).map(|_| rng.gen::<f64>()).sum();
    (s - 2.0) * 3f64.sqrt()
}

fn render<F>(size: usize, seed: u64, sigma: f64, mut f: F) -> GrayImage
where
    F: FnMut(f64, f64) -> f64,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = size as f64;
    GrayImage::from_fn(size, size, 8, |r, c| {
        let (y, x) = (r as f64 / n, c as f64 / n);
        quantize(f(y, x) + sigma * noise(&mut rng), 8)
    })
    .expect("synthetic image is valid")
}

/// Cameraman photograph, 4x box-downsampled to 128x128.
pub fn cameraman() -> GrayImage {
    pgm::decode(include_bytes!("../data/cameraman.pgm")).expect("embedded image is valid")
}

/// Astronaut portrait photograph (luma), 4x box-downsampled to 128x128.
pub fn astronaut() -> GrayImage {
    pgm::decode(include_bytes!("../data/astronaut.pgm")).expect("embedded image is valid")
}

/// 64x64 vertical step (60 | 190) with light noise.
pub fn step(size: usize) -> GrayImage {
    render(size, 3, 4.0, |_, x| if x < 0.5 { 60.0 } else { 190.0 })
}

/// 64x64 noisy flat background with a bright Gaussian blob.
pub fn noise_blob(size: usize) -> GrayImage {
    render(size, 4, 10.0, |y, x| {
        let d2 = (y - 0.45).powi(2) + (x - 0.55).powi(2);
        80.0 + 120.0 * (-d2 / (2.0 * 0.12f64.powi(2))).exp()
    })
}

/// The standard suite used by the acceptance tests and `mshia synth`.
pub fn standard_suite() -> Vec<(&'static str, GrayImage)> {
    vec![
        ("cameraman", cameraman()),
        ("astronaut", astronaut()),
        ("step", step(64)),
        ("noise_blob", noise_blob(64)),
    ]
}
