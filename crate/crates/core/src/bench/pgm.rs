//! Netpbm grayscale images, plain (`P2`) and raw (`P5`).

use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::image::GrayImage;

struct Header {
    magic: String,
    width: usize,
    height: usize,
    maxval: u32,
    /// Offset of the first pixel byte.
    data_start: usize,
}

fn skip_space_and_comments(b: &[u8], mut i: usize) -> usize {
    while i < b.len() {
        if b[i].is_ascii_whitespace() {
            i += 1;
        } else if b[i] == b'#' {
            while i < b.len() && b[i] != b'\n' {
                i += 1;
            }
        } else {
            break;
        }
    }
    i
}

fn token(b: &[u8], i: usize) -> (usize, &[u8]) {
    let start = skip_space_and_comments(b, i);
    let mut end = start;
    while end < b.len() && !b[end].is_ascii_whitespace() && b[end] != b'#' {
        end += 1;
    }
    (end, &b[start..end])
}

fn number(b: &[u8], i: usize, what: &str) -> Result<(usize, u64)> {
    let (next, tok) = token(b, i);
    let v = std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse::<u64>().ok())
        .ok_or_else(|| Error::MalformedHeader(format!("bad {what}")))?;
    Ok((next, v))
}

fn header(b: &[u8]) -> Result<Header> {
    let (i, magic) = token(b, 0);
    let magic = String::from_utf8_lossy(magic).into_owned();
    if magic != "P2" && magic != "P5" {
        return Err(Error::UnsupportedMagic(magic));
    }
    let (i, width) = number(b, i, "width")?;
    let (i, height) = number(b, i, "height")?;
    let (i, maxval) = number(b, i, "maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader("zero image dimension".into()));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::MalformedHeader(format!("maxval {maxval} outside 1..=65535")));
    }
    // Raw data follows exactly one whitespace byte; plain data is tokenized like the header.
    let data_start = if magic == "P5" {
        if i >= b.len() || !b[i].is_ascii_whitespace() {
            return Err(Error::TruncatedData);
        }
        i + 1
    } else {
        i
    };
    Ok(Header {
        magic,
        width: width as usize,
        height: height as usize,
        maxval: maxval as u32,
        data_start,
    })
}

pub fn decode_pgm<T: Scalar>(bytes: &[u8]) -> Result<GrayImage<T>> {
    let h = header(bytes)?;
    let count = h
        .width
        .checked_mul(h.height)
        .ok_or_else(|| Error::MalformedHeader("image too large".into()))?;
    let mut pixels = Vec::with_capacity(count);
    if h.magic == "P5" {
        let data = bytes.get(h.data_start..).unwrap_or(&[]);
        let wide = h.maxval > 255;
        let need = if wide { 2 * count } else { count };
        if data.len() < need {
            return Err(Error::TruncatedData);
        }
        for k in 0..count {
            let v = if wide {
                u16::from_be_bytes([data[2 * k], data[2 * k + 1]]) as u32
            } else {
                data[k] as u32
            };
            pixels.push(v);
        }
    } else {
        let mut i = h.data_start.min(bytes.len());
        for _ in 0..count {
            let (next, tok) = token(bytes, i);
            if tok.is_empty() {
                return Err(Error::TruncatedData);
            }
            let v = std::str::from_utf8(tok)
                .ok()
                .and_then(|s| s.parse::<u32>().ok())
                .ok_or_else(|| Error::MalformedHeader(format!("bad pixel `{}`", String::from_utf8_lossy(tok))))?;
            pixels.push(v);
            i = next;
        }
    }
    if let Some(v) = pixels.iter().find(|&&v| v > h.maxval) {
        return Err(Error::MalformedHeader(format!("pixel {v} exceeds maxval {}", h.maxval)));
    }
    GrayImage::new(
        h.width,
        h.height,
        h.maxval,
        pixels.into_iter().map(|v| T::lit(v as f64)).collect(),
    )
}

pub fn read_pgm<T: Scalar>(path: impl AsRef<Path>) -> Result<GrayImage<T>> {
    decode_pgm(&std::fs::read(path)?)
}

fn quantize<T: Scalar>(img: &GrayImage<T>) -> Vec<u32> {
    let max = img.maxval as f64;
    img.pixels
        .iter()
        .map(|v| v.to_f64_lossy().round().clamp(0.0, max) as u32)
        .collect()
}

/// Raw `P5`; pixels are rounded and clamped to `[0, maxval]`. Two bytes per pixel, big-endian, above 255.
pub fn encode_pgm<T: Scalar>(img: &GrayImage<T>) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n{}\n", img.width, img.height, img.maxval).into_bytes();
    for v in quantize(img) {
        if img.maxval > 255 {
            out.extend_from_slice(&(v as u16).to_be_bytes());
        } else {
            out.push(v as u8);
        }
    }
    out
}

/// Plain `P2`, one image row per line.
pub fn encode_pgm_ascii<T: Scalar>(img: &GrayImage<T>) -> String {
    let mut out = format!("P2\n{} {}\n{}\n", img.width, img.height, img.maxval);
    for row in quantize(img).chunks(img.width) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_pgm<T: Scalar>(img: &GrayImage<T>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, encode_pgm(img))?;
    Ok(())
}
