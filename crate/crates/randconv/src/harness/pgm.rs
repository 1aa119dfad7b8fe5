//! Binary portable graymap (P5) reader/writer, 8-bit, pixels mapped to
//! [0, 1].

use crate::error::{Error, Result};
use std::io::{Read, Write};
use std::path::Path;

/// Reads a binary P5 graymap; returns (width, height, pixels in [0, 1],
/// row-major).
pub fn read_pgm(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let mut pos = 0usize;

    let mut token = |bytes: &[u8]| -> Result<String> {
        // skip whitespace and '#' comment lines
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::invalid("truncated PGM header"));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };

    if token(&bytes)? != "P5" {
        return Err(Error::invalid("not a binary P5 graymap"));
    }
    let width: usize = token(&bytes)?
        .parse()
        .map_err(|_| Error::invalid("bad PGM width"))?;
    let height: usize = token(&bytes)?
        .parse()
        .map_err(|_| Error::invalid("bad PGM height"))?;
    let maxval: usize = token(&bytes)?
        .parse()
        .map_err(|_| Error::invalid("bad PGM maxval"))?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::invalid(format!("unsupported PGM maxval {maxval}")));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let raster = &bytes[pos.min(bytes.len())..];
    if raster.len() < width * height {
        return Err(Error::invalid("truncated PGM raster"));
    }
    let pixels = raster[..width * height]
        .iter()
        .map(|&b| b as f64 / maxval as f64)
        .collect();
    Ok((width, height, pixels))
}

/// Writes a binary P5 graymap; pixels are clamped to [0, 1] and quantized to
/// 8 bits.
pub fn write_pgm(path: &Path, width: usize, height: usize, pixels: &[f64]) -> Result<()> {
    if pixels.len() != width * height {
        return Err(Error::invalid("pixel count does not match dimensions"));
    }
    let mut f = std::fs::File::create(path)?;
    write!(f, "P5\n{width} {height}\n255\n")?;
    let raster: Vec<u8> = pixels
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    f.write_all(&raster)?;
    Ok(())
}
