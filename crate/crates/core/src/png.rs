//! 8-bit grayscale PNG input.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use png::{BitDepth, ColorType, Decoder};

use crate::error::{Error, Result};
use crate::image::GrayImage;

pub fn read(path: impl AsRef<Path>) -> Result<GrayImage> {
    let decoder = Decoder::new(BufReader::new(File::open(path)?));
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::Format(e.to_string()))?;
    let info = reader.info();
    if info.color_type != ColorType::Grayscale || info.bit_depth != BitDepth::Eight {
        return Err(Error::Format(format!(
            "only 8-bit grayscale PNG is supported, got {:?} {:?}",
            info.color_type, info.bit_depth
        )));
    }
    let mut buf = vec![0; reader.output_buffer_size()];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::Format(e.to_string()))?;
    let (w, h) = (frame.width as usize, frame.height as usize);
    let data: Vec<u8> = buf[..frame.buffer_size()]
        .chunks(frame.line_size)
        .flat_map(|line| line[..w].iter().copied())
        .collect();
    GrayImage::from_u8(w, h, &data).map_err(|e| Error::Format(e.to_string()))
}
