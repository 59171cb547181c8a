//! Binary PGM (P5) and 8-bit PNG encoding.
//!
//! PGM files are written as `P5\n<w> <h>\n255\n` followed by the raw
//! bytes, which is the canonical form for round-trips. The reader accepts
//! header comments and any maxval in 1–255; larger maxvals are 16-bit
//! samples and are rejected.

use std::io::Cursor;
use std::path::Path;

use image::codecs::png::{PngDecoder, PngEncoder};
use image::{ColorType, ExtendedColorType, ImageDecoder, ImageEncoder};

use super::image::{GrayImage, LabelMap};
use crate::error::{Error, Result};
use crate::fsutil::{read_file, write_atomic};

const PNG_SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0D, 0x0A, 0x1A, 0x0A];

/// Raw 8-bit raster decoded from a file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

pub fn load_image(path: &Path) -> Result<GrayImage> {
    let bytes = read_file(path)?;
    let raster = decode_gray(&bytes, path)?;
    GrayImage::new(raster.width, raster.height, raster.data)
}

/// Saves as PNG when the extension is `.png`, otherwise as binary PGM.
pub fn save_image(image: &GrayImage, path: &Path) -> Result<()> {
    let bytes = if has_png_extension(path) {
        encode_png_gray(image.width(), image.height(), image.pixels())?
    } else {
        encode_pgm(image.width(), image.height(), image.pixels())
    };
    write_atomic(path, &bytes)
}

pub fn load_label_map(path: &Path) -> Result<LabelMap> {
    let bytes = read_file(path)?;
    let raster = decode_pgm(&bytes, path)?;
    LabelMap::from_codes(raster.width, raster.height, &raster.data)
}

pub fn save_label_map(map: &LabelMap, path: &Path) -> Result<()> {
    write_atomic(path, &encode_pgm(map.width(), map.height(), &map.codes()))
}

pub fn save_rgb_png(width: usize, height: usize, rgb: &[u8], path: &Path) -> Result<()> {
    let mut out = Vec::new();
    PngEncoder::new(&mut out)
        .write_image(rgb, width as u32, height as u32, ExtendedColorType::Rgb8)
        .map_err(|e| Error::InvalidConfig(format!("png encoding failed: {e}")))?;
    write_atomic(path, &out)
}

fn has_png_extension(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

/// Decodes either a P5 PGM or an 8-bit grayscale PNG, sniffing the magic bytes.
pub fn decode_gray(bytes: &[u8], path: &Path) -> Result<Raster> {
    if bytes.starts_with(&PNG_SIGNATURE) {
        decode_png(bytes, path)
    } else if bytes.starts_with(b"P5") {
        decode_pgm(bytes, path)
    } else if bytes.len() >= 2 && bytes[0] == b'P' && bytes[1].is_ascii_digit() {
        Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            reason: format!("netpbm variant P{} (only binary P5 is supported)", bytes[1] as char),
        })
    } else {
        Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            reason: "neither PGM nor PNG".into(),
        })
    }
}

pub fn encode_pgm(width: usize, height: usize, data: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(data);
    out
}

pub fn encode_png_gray(width: usize, height: usize, data: &[u8]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    PngEncoder::new(&mut out)
        .write_image(data, width as u32, height as u32, ExtendedColorType::L8)
        .map_err(|e| Error::InvalidConfig(format!("png encoding failed: {e}")))?;
    Ok(out)
}

pub fn decode_pgm(bytes: &[u8], path: &Path) -> Result<Raster> {
    let corrupt = |reason: &str| Error::CorruptHeader {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    if !bytes.starts_with(b"P5") {
        return Err(match bytes.get(..2) {
            Some([b'P', d]) if d.is_ascii_digit() => Error::UnsupportedFormat {
                path: path.to_path_buf(),
                reason: format!("netpbm variant P{}", *d as char),
            },
            _ => corrupt("missing P5 magic"),
        });
    }
    let mut header = HeaderReader { bytes, pos: 2 };
    let width = header.number().ok_or_else(|| corrupt("bad width"))?;
    let height = header.number().ok_or_else(|| corrupt("bad height"))?;
    let maxval = header.number().ok_or_else(|| corrupt("bad maxval"))?;
    if width == 0 || height == 0 {
        return Err(corrupt("zero dimension"));
    }
    match maxval {
        1..=255 => {}
        256..=65535 => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                reason: format!("16-bit samples (maxval {maxval})"),
            })
        }
        _ => return Err(corrupt("maxval out of range")),
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(header.pos) {
        Some(b) if b.is_ascii_whitespace() => header.pos += 1,
        _ => return Err(corrupt("missing separator after maxval")),
    }
    let len = width
        .checked_mul(height)
        .ok_or_else(|| corrupt("dimensions overflow"))?;
    let data = bytes
        .get(header.pos..header.pos + len)
        .ok_or_else(|| corrupt("truncated pixel data"))?;
    Ok(Raster {
        width,
        height,
        data: data.to_vec(),
    })
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderReader<'_> {
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

    fn number(&mut self) -> Option<usize> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos || self.pos - start > 9 {
            return None;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()?
            .parse()
            .ok()
    }
}

fn decode_png(bytes: &[u8], path: &Path) -> Result<Raster> {
    let corrupt = |e: image::ImageError| Error::CorruptHeader {
        path: path.to_path_buf(),
        reason: e.to_string(),
    };
    let decoder = PngDecoder::new(Cursor::new(bytes)).map_err(corrupt)?;
    match decoder.color_type() {
        ColorType::L8 => {}
        ColorType::L16 => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                reason: "16-bit grayscale PNG".into(),
            })
        }
        other => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                reason: format!("color PNG ({other:?})"),
            })
        }
    }
    let (w, h) = decoder.dimensions();
    let mut data = vec![0u8; decoder.total_bytes() as usize];
    decoder.read_image(&mut data).map_err(corrupt)?;
    Ok(Raster {
        width: w as usize,
        height: h as usize,
        data,
    })
}
