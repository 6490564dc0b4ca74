//! Binary PGM (P5) reading and writing, maxval 255 only.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{FlepError, Result};
use crate::image::GrayImage;

/// Loads a binary PGM (P5) file with maxval 255. Pixel values are taken as-is.
pub fn load_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut data = Vec::new();
    reader.read_to_end(&mut data)?;
    parse_pgm(&data)
}

pub fn parse_pgm(data: &[u8]) -> Result<GrayImage> {
    let mut pos = 0;
    if data.len() < 2 || &data[0..2] != b"P5" {
        return Err(FlepError::PgmParse("missing P5 magic".into()));
    }
    pos += 2;

    let width = read_header_int(data, &mut pos)?;
    let height = read_header_int(data, &mut pos)?;
    let maxval = read_header_int(data, &mut pos)?;
    if maxval != 255 {
        return Err(FlepError::PgmParse(format!("unsupported maxval {maxval}")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match data.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(FlepError::PgmParse("missing separator before raster".into())),
    }

    let expected = width * height;
    let raster = &data[pos..];
    if raster.len() < expected {
        return Err(FlepError::PgmParse(format!(
            "truncated raster: expected {expected} bytes, found {}",
            raster.len()
        )));
    }
    GrayImage::new(width, height, raster[..expected].to_vec())
}

/// Reads the next decimal integer in the header, skipping whitespace and
/// `#` comment lines.
fn read_header_int(data: &[u8], pos: &mut usize) -> Result<usize> {
    loop {
        match data.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while let Some(b) = data.get(*pos) {
                    *pos += 1;
                    if *b == b'\n' {
                        break;
                    }
                }
            }
            Some(b) if b.is_ascii_digit() => break,
            Some(b) => {
                return Err(FlepError::PgmParse(format!(
                    "unexpected byte 0x{b:02x} in header"
                )))
            }
            None => return Err(FlepError::PgmParse("truncated header".into())),
        }
    }
    let start = *pos;
    while matches!(data.get(*pos), Some(b) if b.is_ascii_digit()) {
        *pos += 1;
    }
    let text = std::str::from_utf8(&data[start..*pos]).expect("digits are ascii");
    text.parse::<usize>()
        .map_err(|e| FlepError::PgmParse(format!("bad header integer {text:?}: {e}")))
}

/// Writes a binary PGM (P5) with maxval 255 and a single-whitespace header.
pub fn save_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    write!(writer, "P5\n{} {}\n255\n", img.width(), img.height())?;
    writer.write_all(img.pixels())?;
    writer.flush()?;
    Ok(())
}
