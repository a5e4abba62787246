//! Grayscale raster container and Netpbm I/O.
//!
//! [`GrayImage`] is the only source of pixel data for the rest of the crate.
//! Pixels are stored row-major as `u16` so that the reduced-depth images
//! produced by the shift-based reduction methods keep their exact values.

use std::fmt;

use thiserror::Error;

/// Errors raised while decoding or encoding Netpbm data.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum PnmError {
    #[error("bad magic number: expected P2, P3, P5 or P6")]
    BadMagic,
    #[error("missing header field `{0}`")]
    MissingField(&'static str),
    #[error("invalid header field `{field}`: {value:?}")]
    InvalidField { field: &'static str, value: String },
    #[error("maxval {0} is larger than 255")]
    MaxvalTooLarge(u32),
    #[error("truncated payload: expected {expected} samples, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("sample value {value} exceeds maxval {maxval}")]
    SampleOutOfRange { value: u32, maxval: u32 },
    #[error("unsupported bit depth {0}: PGM output is limited to 8 bits per pixel")]
    UnsupportedDepth(u32),
}

/// Errors raised when constructing an image from raw parts.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ImageError {
    #[error("image dimensions must be positive, got {width}x{height}")]
    EmptyImage { width: usize, height: usize },
    #[error("bits per pixel must be in 1..=16, got {0}")]
    InvalidDepth(u32),
    #[error("pixel buffer holds {found} values, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("pixel value {value} at index {index} does not fit in {bits} bits")]
    PixelOutOfRange { index: usize, value: u16, bits: u32 },
}

/// Single-channel raster with `bits` bits per pixel.
#[derive(Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    bits: u32,
    pixels: Vec<u16>,
}

impl fmt::Debug for GrayImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GrayImage")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("bits", &self.bits)
            .finish_non_exhaustive()
    }
}

impl GrayImage {
    pub fn new(
        width: usize,
        height: usize,
        bits: u32,
        pixels: Vec<u16>,
    ) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::EmptyImage { width, height });
        }
        if !(1..=16).contains(&bits) {
            return Err(ImageError::InvalidDepth(bits));
        }
        let expected = width * height;
        if pixels.len() != expected {
            return Err(ImageError::LengthMismatch {
                expected,
                found: pixels.len(),
            });
        }
        let max = max_value(bits);
        if let Some((index, &value)) = pixels.iter().enumerate().find(|(_, &v)| v > max) {
            return Err(ImageError::PixelOutOfRange { index, value, bits });
        }
        Ok(Self {
            width,
            height,
            bits,
            pixels,
        })
    }

    /// 8-bit image from a byte buffer.
    pub fn from_u8(width: usize, height: usize, pixels: &[u8]) -> Result<Self, ImageError> {
        Self::new(
            width,
            height,
            8,
            pixels.iter().map(|&p| u16::from(p)).collect(),
        )
    }

    /// 8-bit image filled with `value`.
    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self, ImageError> {
        Self::new(width, height, 8, vec![u16::from(value); width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        bits: u32,
        mut f: impl FnMut(usize, usize) -> u16,
    ) -> Result<Self, ImageError> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, bits, pixels)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    /// Bits per pixel (`L_i`).
    #[inline]
    pub fn bits(&self) -> u32 {
        self.bits
    }

    #[inline]
    pub fn pixels(&self) -> &[u16] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.pixels[y * self.width + x]
    }

    /// Largest representable pixel value, `2^bits - 1`.
    #[inline]
    pub fn max_value(&self) -> u16 {
        max_value(self.bits)
    }

    /// Same raster with every pixel mapped through `f`, relabelled to `bits`.
    pub fn map(&self, bits: u32, f: impl Fn(u16) -> u16) -> Result<Self, ImageError> {
        Self::new(
            self.width,
            self.height,
            bits,
            self.pixels.iter().map(|&p| f(p)).collect(),
        )
    }

    /// Photometric negative, `v -> max - v`.
    pub fn inverted(&self) -> Self {
        let max = self.max_value();
        Self {
            pixels: self.pixels.iter().map(|&p| max - p).collect(),
            ..self.clone()
        }
    }

    pub fn full_rect(&self) -> Rect {
        Rect {
            x0: 0,
            y0: 0,
            x1: self.width - 1,
            y1: self.height - 1,
        }
    }
}

#[inline]
fn max_value(bits: u32) -> u16 {
    ((1u32 << bits) - 1) as u16
}

/// Axis-aligned rectangle with inclusive corners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl Rect {
    /// Returns `None` when the corners are out of order.
    pub fn new(x0: usize, y0: usize, x1: usize, y1: usize) -> Option<Self> {
        (x0 <= x1 && y0 <= y1).then_some(Self { x0, y0, x1, y1 })
    }

    /// Rectangle of the given size whose top-left corner is `(x0, y0)`.
    pub fn with_size(x0: usize, y0: usize, width: usize, height: usize) -> Option<Self> {
        if width == 0 || height == 0 {
            return None;
        }
        Self::new(x0, y0, x0 + width - 1, y0 + height - 1)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.x1 - self.x0 + 1
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.y1 - self.y0 + 1
    }

    #[inline]
    pub fn area(&self) -> usize {
        self.width() * self.height()
    }

    #[inline]
    pub fn fits(&self, width: usize, height: usize) -> bool {
        self.x1 < width && self.y1 < height
    }
}

/// Kind of Netpbm payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    GrayAscii,
    GrayBinary,
    RgbAscii,
    RgbBinary,
}

impl Kind {
    fn channels(self) -> usize {
        match self {
            Kind::GrayAscii | Kind::GrayBinary => 1,
            Kind::RgbAscii | Kind::RgbBinary => 3,
        }
    }

    fn is_ascii(self) -> bool {
        matches!(self, Kind::GrayAscii | Kind::RgbAscii)
    }
}

struct Header {
    kind: Kind,
    width: usize,
    height: usize,
    maxval: u32,
    /// Offset of the first payload byte.
    data_start: usize,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
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

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() || b == b'#' {
                break;
            }
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn number(&mut self, field: &'static str) -> Result<u32, PnmError> {
        let tok = self.token().ok_or(PnmError::MissingField(field))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<u32>().ok())
            .ok_or_else(|| PnmError::InvalidField {
                field,
                value: String::from_utf8_lossy(tok).into_owned(),
            })
    }
}

fn parse_header(bytes: &[u8]) -> Result<Header, PnmError> {
    let kind = match bytes.get(..2) {
        Some(b"P2") => Kind::GrayAscii,
        Some(b"P3") => Kind::RgbAscii,
        Some(b"P5") => Kind::GrayBinary,
        Some(b"P6") => Kind::RgbBinary,
        _ => return Err(PnmError::BadMagic),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if width == 0 {
        return Err(PnmError::InvalidField {
            field: "width",
            value: "0".into(),
        });
    }
    if height == 0 {
        return Err(PnmError::InvalidField {
            field: "height",
            value: "0".into(),
        });
    }
    if maxval == 0 {
        return Err(PnmError::InvalidField {
            field: "maxval",
            value: "0".into(),
        });
    }
    if maxval > 255 {
        return Err(PnmError::MaxvalTooLarge(maxval));
    }
    // Exactly one whitespace byte separates the header from a binary raster.
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        Some(_) => {
            return Err(PnmError::InvalidField {
                field: "maxval",
                value: maxval.to_string(),
            })
        }
        None if kind.is_ascii() => {}
        None => {
            return Err(PnmError::Truncated {
                expected: width as usize * height as usize,
                found: 0,
            })
        }
    }
    Ok(Header {
        kind,
        width: width as usize,
        height: height as usize,
        maxval,
        data_start: cur.pos,
    })
}

fn read_samples(bytes: &[u8], header: &Header) -> Result<Vec<u8>, PnmError> {
    let expected = header.width * header.height * header.kind.channels();
    let samples: Vec<u8> = if header.kind.is_ascii() {
        let mut cur = Cursor {
            bytes,
            pos: header.data_start,
        };
        let mut out = Vec::with_capacity(expected);
        while out.len() < expected {
            match cur.token() {
                None => {
                    return Err(PnmError::Truncated {
                        expected,
                        found: out.len(),
                    })
                }
                Some(tok) => {
                    let v = std::str::from_utf8(tok)
                        .ok()
                        .and_then(|s| s.parse::<u32>().ok())
                        .ok_or_else(|| PnmError::InvalidField {
                            field: "sample",
                            value: String::from_utf8_lossy(tok).into_owned(),
                        })?;
                    if v > header.maxval {
                        return Err(PnmError::SampleOutOfRange {
                            value: v,
                            maxval: header.maxval,
                        });
                    }
                    out.push(v as u8);
                }
            }
        }
        out
    } else {
        let payload = &bytes[header.data_start..];
        if payload.len() < expected {
            return Err(PnmError::Truncated {
                expected,
                found: payload.len(),
            });
        }
        let payload = &payload[..expected];
        if let Some(&v) = payload.iter().find(|&&v| u32::from(v) > header.maxval) {
            return Err(PnmError::SampleOutOfRange {
                value: u32::from(v),
                maxval: header.maxval,
            });
        }
        payload.to_vec()
    };
    Ok(samples)
}

/// Decodes a P5 (binary) or P2 (ASCII) graymap. Sample values are copied
/// verbatim into an 8-bit image; maxval is validated but not rescaled.
pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage, PnmError> {
    let header = parse_header(bytes)?;
    if header.kind.channels() != 1 {
        return Err(PnmError::BadMagic);
    }
    let samples = read_samples(bytes, &header)?;
    Ok(GrayImage::from_u8(header.width, header.height, &samples).expect("header validated"))
}

/// Decodes any of P2/P3/P5/P6, converting color rasters to gray with the
/// Rec. 601 luma weights (rounded to nearest).
pub fn read_pnm_as_gray(bytes: &[u8]) -> Result<GrayImage, PnmError> {
    let header = parse_header(bytes)?;
    let samples = read_samples(bytes, &header)?;
    if header.kind.channels() == 1 {
        return Ok(
            GrayImage::from_u8(header.width, header.height, &samples).expect("header validated")
        );
    }
    let gray: Vec<u8> = samples
        .chunks_exact(3)
        .map(|rgb| {
            let (r, g, b) = (u32::from(rgb[0]), u32::from(rgb[1]), u32::from(rgb[2]));
            ((299 * r + 587 * g + 114 * b + 500) / 1000) as u8
        })
        .collect();
    Ok(GrayImage::from_u8(header.width, header.height, &gray).expect("header validated"))
}

/// Encodes as binary P5 with maxval 255.
pub fn write_pgm(img: &GrayImage) -> Result<Vec<u8>, PnmError> {
    if img.bits() > 8 {
        return Err(PnmError::UnsupportedDepth(img.bits()));
    }
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.pixels().iter().map(|&p| p as u8));
    Ok(out)
}
