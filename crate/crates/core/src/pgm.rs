//! Binary PGM (P5) codec.
//!
//! The writer always emits `P5\n<width> <height>\n<maxval>\n` followed by
//! raw samples, one byte each when `maxval < 256` and two big-endian bytes
//! otherwise. The reader accepts any whitespace layout and `#` comments in
//! the header. Only maxvals of the form `2^B - 1` are accepted, so the bit
//! depth is recoverable from the file.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{max_level, GrayImage, MAX_BIT_DEPTH};

/// Decodes a P5 byte stream.
pub fn decode(bytes: &[u8]) -> Result<GrayImage> {
    let mut cursor = HeaderCursor { bytes, pos: 0 };
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(Error::Format("missing P5 magic number".into()));
    }
    cursor.pos = 2;
    let width = cursor.next_number("width")?;
    let height = cursor.next_number("height")?;
    let maxval = cursor.next_number("maxval")?;
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(cursor.pos) {
        Some(b) if b.is_ascii_whitespace() => cursor.pos += 1,
        _ => return Err(Error::Format("expected whitespace after maxval".into())),
    }

    let bit_depth = bit_depth_for_maxval(maxval)?;
    if width == 0 || height == 0 {
        return Err(Error::Format(format!("zero dimension {width}x{height}")));
    }
    let pixels = width
        .checked_mul(height)
        .ok_or_else(|| Error::Format("dimensions overflow".into()))?;
    let sample_bytes = if maxval < 256 { 1 } else { 2 };
    let raster = &bytes[cursor.pos..];
    if raster.len() < pixels * sample_bytes {
        return Err(Error::Format(format!(
            "truncated raster: need {} bytes, found {}",
            pixels * sample_bytes,
            raster.len()
        )));
    }
    let data: Vec<u16> = if sample_bytes == 1 {
        raster[..pixels].iter().map(|&b| u16::from(b)).collect()
    } else {
        raster[..pixels * 2]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect()
    };
    if let Some(v) = data.iter().find(|&&v| usize::from(v) > maxval) {
        return Err(Error::Format(format!("sample {v} exceeds maxval {maxval}")));
    }
    GrayImage::new(width, height, bit_depth, data).map_err(|e| Error::Format(e.to_string()))
}

/// Encodes an image as P5 with `maxval = 2^B - 1`.
pub fn encode(img: &GrayImage) -> Vec<u8> {
    let maxval = img.max_level();
    let header = format!("P5\n{} {}\n{}\n", img.width(), img.height(), maxval);
    let wide = maxval >= 256;
    let mut out = Vec::with_capacity(header.len() + img.len() * if wide { 2 } else { 1 });
    out.extend_from_slice(header.as_bytes());
    if wide {
        for &v in img.data() {
            out.extend_from_slice(&v.to_be_bytes());
        }
    } else {
        out.extend(img.data().iter().map(|&v| v as u8));
    }
    out
}

pub fn read(path: impl AsRef<Path>) -> Result<GrayImage> {
    decode(&fs::read(path)?)
}

pub fn write<W: Write>(mut w: W, img: &GrayImage) -> Result<()> {
    w.write_all(&encode(img))?;
    Ok(())
}

fn bit_depth_for_maxval(maxval: usize) -> Result<u8> {
    (1..=MAX_BIT_DEPTH)
        .find(|&b| usize::from(max_level(b)) == maxval)
        .ok_or_else(|| Error::Format(format!("unsupported maxval {maxval}; expected 2^B - 1")))
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderCursor<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn next_number(&mut self, field: &str) -> Result<usize> {
        let before = self.pos;
        self.skip_whitespace_and_comments();
        if self.pos == before {
            return Err(Error::Format(format!("expected whitespace before {field}")));
        }
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Format(format!("expected decimal {field}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format(format!("{field} out of range")))
    }
}
