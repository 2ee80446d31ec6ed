//! Portable anymap I/O: PGM (P2/P5) and PPM (P3/P6) with maxval 255.

use std::fs;
use std::path::Path;

use crate::image::{quantize, GrayImage, Plane, RgbImage};
use crate::{Error, Result};

/// A decoded portable anymap.
#[derive(Debug, Clone, PartialEq)]
pub enum PnmImage {
    Gray(GrayImage),
    Rgb(RgbImage),
}

impl PnmImage {
    pub fn dims(&self) -> (usize, usize) {
        match self {
            PnmImage::Gray(g) => g.dims(),
            PnmImage::Rgb(c) => c.dims(),
        }
    }

    /// Color view of the image; gray samples are replicated into R, G and B.
    pub fn into_rgb(self) -> RgbImage {
        match self {
            PnmImage::Gray(g) => crate::color::gray_to_rgb(&g),
            PnmImage::Rgb(c) => c,
        }
    }

    pub fn into_gray(self) -> GrayImage {
        match self {
            PnmImage::Gray(g) => g,
            PnmImage::Rgb(c) => crate::color::to_gray(&c),
        }
    }
}

pub fn load_pnm(path: impl AsRef<Path>) -> Result<PnmImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pnm(&bytes)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let c = self.bytes[self.pos];
            if c == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            if self.bytes[self.pos] == b'#' {
                break;
            }
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn header_number(&mut self, what: &str) -> Result<usize> {
        let tok = self
            .token()
            .ok_or_else(|| Error::MalformedHeader(format!("missing {what}")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| {
                Error::MalformedHeader(format!(
                    "{what} is not a number: {:?}",
                    String::from_utf8_lossy(tok)
                ))
            })
    }
}

/// Decodes an in-memory PGM or PPM.
pub fn decode_pnm(bytes: &[u8]) -> Result<PnmImage> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(Error::MalformedHeader("missing P magic".into()));
    }
    let (channels, binary) = match bytes[1] {
        b'2' => (1, false),
        b'5' => (1, true),
        b'3' => (3, false),
        b'6' => (3, true),
        m => {
            return Err(Error::MalformedHeader(format!(
                "unsupported magic P{}",
                m as char
            )))
        }
    };
    let mut cur = Cursor { bytes, pos: 2 };
    let width = cur.header_number("width")?;
    let height = cur.header_number("height")?;
    let maxval = cur.header_number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader(format!("zero dimension {width}x{height}")));
    }
    if maxval != 255 {
        return Err(Error::UnsupportedMaxval(maxval.min(u32::MAX as usize) as u32));
    }
    let expected = width * height * channels;
    let samples: Vec<u8> = if binary {
        // exactly one whitespace byte separates the header from the raster
        match bytes.get(cur.pos) {
            Some(c) if c.is_ascii_whitespace() => {}
            _ => return Err(Error::MalformedHeader("no whitespace after maxval".into())),
        }
        let payload = &bytes[cur.pos + 1..];
        if payload.len() < expected {
            return Err(Error::Truncated {
                expected,
                found: payload.len(),
            });
        }
        payload[..expected].to_vec()
    } else {
        let mut out = Vec::with_capacity(expected);
        while out.len() < expected {
            let Some(tok) = cur.token() else {
                return Err(Error::Truncated {
                    expected,
                    found: out.len(),
                });
            };
            let v = std::str::from_utf8(tok)
                .ok()
                .and_then(|s| s.parse::<u32>().ok())
                .ok_or_else(|| {
                    Error::MalformedHeader(format!("bad ASCII sample {:?}", String::from_utf8_lossy(tok)))
                })?;
            if v > 255 {
                return Err(Error::MalformedHeader(format!("sample {v} exceeds maxval")));
            }
            out.push(v as u8);
        }
        out
    };
    if channels == 1 {
        let data = samples.into_iter().map(f64::from).collect();
        Ok(PnmImage::Gray(Plane::from_vec(width, height, data)?))
    } else {
        let data = samples.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Ok(PnmImage::Rgb(Plane::from_vec(width, height, data)?))
    }
}

/// Binary PGM bytes; samples are rounded and clamped to [0, 255].
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.as_slice().iter().map(|&v| quantize(v)));
    out
}

pub fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    for px in img.as_slice() {
        out.extend_from_slice(px);
    }
    out
}

pub fn save_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(img)).map_err(|e| Error::io(path, e))
}

pub fn save_ppm(img: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_ppm(img)).map_err(|e| Error::io(path, e))
}
