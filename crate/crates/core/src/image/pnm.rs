//! Netpbm graymap/pixmap codec (P2, P3, P5, P6) limited to 8-bit samples.

use super::{GrayImage, Image, RgbImage};
use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Gray,
    Rgb,
}

struct Header {
    kind: Kind,
    ascii: bool,
    width: usize,
    height: usize,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn parse_err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            offset: self.pos,
            message: message.into(),
        }
    }

    /// Skips whitespace and `#` comments.
    fn skip_separators(&mut self) {
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

    /// Reads a decimal token; `None` at end of input.
    fn number(&mut self) -> Result<Option<u64>> {
        self.skip_separators();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return match self.bytes.get(self.pos) {
                None => Ok(None),
                Some(_) => Err(self.parse_err("expected a decimal number")),
            };
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii digits");
        text.parse::<u64>().map(Some).map_err(|_| Error::Parse {
            offset: start,
            message: format!("number out of range: {text}"),
        })
    }

    fn header_number(&mut self, what: &str) -> Result<u64> {
        self.number()?
            .ok_or_else(|| self.parse_err(format!("header ends before {what}")))
    }
}

fn parse_header(cur: &mut Cursor<'_>) -> Result<Header> {
    let magic = cur.bytes.get(..2).ok_or_else(|| cur.parse_err("missing magic"))?;
    let (kind, ascii) = match magic {
        b"P2" => (Kind::Gray, true),
        b"P3" => (Kind::Rgb, true),
        b"P5" => (Kind::Gray, false),
        b"P6" => (Kind::Rgb, false),
        _ => return Err(cur.parse_err("magic must be P2, P3, P5 or P6")),
    };
    cur.pos = 2;
    if !cur.bytes.get(2).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(cur.parse_err("expected whitespace after magic"));
    }
    let width_at = cur.pos;
    let width = cur.header_number("width")?;
    let height = cur.header_number("height")?;
    if width == 0 || height == 0 {
        return Err(Error::Parse {
            offset: width_at,
            message: format!("zero image dimension {width}x{height}"),
        });
    }
    let maxval_at = cur.pos;
    let maxval = cur.header_number("maxval")?;
    if maxval == 0 {
        return Err(Error::Parse {
            offset: maxval_at,
            message: "maxval must be positive".into(),
        });
    }
    if maxval > 255 {
        return Err(Error::Unsupported(format!("maxval {maxval} exceeds 255")));
    }
    let (width, height) = (
        usize::try_from(width).map_err(|_| cur.parse_err("width too large"))?,
        usize::try_from(height).map_err(|_| cur.parse_err("height too large"))?,
    );
    Ok(Header {
        kind,
        ascii,
        width,
        height,
    })
}

fn read_samples(cur: &mut Cursor<'_>, header: &Header) -> Result<Vec<u8>> {
    let channels = if header.kind == Kind::Rgb { 3 } else { 1 };
    let expected = header
        .width
        .checked_mul(header.height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| cur.parse_err("image dimensions overflow"))?;

    if !header.ascii {
        // Exactly one whitespace byte separates maxval from the raster.
        match cur.bytes.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            Some(_) => return Err(cur.parse_err("expected single whitespace before raster")),
            None => return Err(Error::Truncated { expected, found: 0 }),
        }
        let raster = &cur.bytes[cur.pos..];
        if raster.len() < expected {
            return Err(Error::Truncated {
                expected,
                found: raster.len(),
            });
        }
        return Ok(raster[..expected].to_vec());
    }

    let mut samples = Vec::with_capacity(expected);
    while samples.len() < expected {
        let at = cur.pos;
        match cur.number()? {
            Some(v) if v <= 255 => samples.push(v as u8),
            Some(v) => {
                return Err(Error::Parse {
                    offset: at,
                    message: format!("sample {v} exceeds 255"),
                })
            }
            None => {
                return Err(Error::Truncated {
                    expected,
                    found: samples.len(),
                })
            }
        }
    }
    Ok(samples)
}

/// Decodes a P2/P3/P5/P6 file. Sample values are returned exactly as encoded.
///
/// ```
/// use tfrs::image::{load_pnm, Image};
///
/// let Image::Gray(img) = load_pnm(b"P2 1 1 255\n7").unwrap() else { panic!() };
/// assert_eq!(img.data(), &[7]);
/// ```
pub fn load_pnm(bytes: &[u8]) -> Result<Image> {
    let mut cur = Cursor { bytes, pos: 0 };
    let header = parse_header(&mut cur)?;
    let samples = read_samples(&mut cur, &header)?;
    Ok(match header.kind {
        Kind::Gray => Image::Gray(GrayImage::new(header.width, header.height, samples)?),
        Kind::Rgb => {
            let pixels = samples.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
            Image::Rgb(RgbImage::new(header.width, header.height, pixels)?)
        }
    })
}

/// Encodes an 8-bit image as P5/P6 (`binary`) or P2/P3, with maxval 255.
pub fn save_pnm(image: &Image, binary: bool) -> Result<Vec<u8>> {
    let (magic, width, height, samples): (&str, usize, usize, Vec<u8>) = match image {
        Image::Gray(g) => (
            if binary { "P5" } else { "P2" },
            g.width(),
            g.height(),
            g.data().to_vec(),
        ),
        Image::Rgb(c) => (
            if binary { "P6" } else { "P3" },
            c.width(),
            c.height(),
            c.data().iter().flatten().copied().collect(),
        ),
        Image::Real(_) => {
            return Err(Error::Unsupported(
                "real-valued image must be quantized before PNM encoding".into(),
            ))
        }
    };
    let mut out = format!("{magic}\n{width} {height}\n255\n").into_bytes();
    if binary {
        out.extend_from_slice(&samples);
    } else {
        let per_row = samples.len() / height;
        for row in samples.chunks(per_row) {
            let line: Vec<String> = row.iter().map(u8::to_string).collect();
            out.extend_from_slice(line.join(" ").as_bytes());
            out.push(b'\n');
        }
    }
    Ok(out)
}
