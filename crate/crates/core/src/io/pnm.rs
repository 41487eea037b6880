use crate::error::{Error, Result};
use crate::image::{ElementKind, GridImage};

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_space(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self, what: &str) -> Result<&'a str> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err(format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos]).map_err(|_| Error::Parse {
            offset: start,
            message: format!("{what} is not ASCII"),
        })
    }

    fn number<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        self.skip_space();
        let start = self.pos;
        let tok = self.token(what)?;
        tok.parse().map_err(|_| Error::Parse {
            offset: start,
            message: format!("invalid {what} {tok:?}"),
        })
    }

    /// Consumes the single whitespace byte that ends the header.
    fn end(&mut self) -> Result<usize> {
        match self.bytes.get(self.pos) {
            Some(b) if b.is_ascii_whitespace() => Ok(self.pos + 1),
            _ => Err(self.err("missing whitespace after header")),
        }
    }
}

fn dims(h: &mut Header<'_>) -> Result<(usize, usize)> {
    let w: usize = h.number("width")?;
    let ht: usize = h.number("height")?;
    if w == 0 || ht == 0 {
        return Err(h.err(format!("image dims must be >= 1, got {w}x{ht}")));
    }
    Ok((w, ht))
}

/// Parses a binary (`P5`) greymap with `maxval <= 255`.
pub fn read_pgm(bytes: &[u8]) -> Result<GridImage> {
    let mut h = Header { bytes, pos: 0 };
    let magic = h.token("magic number")?;
    if magic != "P5" {
        return Err(Error::Parse {
            offset: 0,
            message: format!("expected P5, found {magic:?}"),
        });
    }
    let (w, ht) = dims(&mut h)?;
    let maxval: u32 = h.number("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(h.err(format!("maxval {maxval} unsupported, need 1..=255")));
    }
    let start = h.end()?;
    let need = w * ht;
    let data = &bytes[start..];
    if data.len() < need {
        return Err(Error::Parse {
            offset: bytes.len(),
            message: format!("raster truncated: {} of {need} bytes", data.len()),
        });
    }
    if let Some(i) = data[..need].iter().position(|&b| u32::from(b) > maxval) {
        return Err(Error::Parse {
            offset: start + i,
            message: format!("sample {} exceeds maxval {maxval}", data[i]),
        });
    }
    GridImage::from_u8(w, ht, &data[..need])
}

pub fn write_pgm(image: &GridImage) -> Result<Vec<u8>> {
    if image.kind() != ElementKind::U8 {
        return Err(Error::invalid("PGM output needs a u8 image"));
    }
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend(image.to_u8_bytes());
    Ok(out)
}

/// Parses a little-endian greyscale float map (`Pf`, negative scale). Rows are
/// stored bottom-up in the file and returned top-down.
pub fn read_pfm(bytes: &[u8]) -> Result<GridImage> {
    let mut h = Header { bytes, pos: 0 };
    let magic = h.token("magic number")?;
    match magic {
        "Pf" => {}
        "PF" => {
            return Err(Error::Parse {
                offset: 0,
                message: "colour PFM unsupported".into(),
            })
        }
        other => {
            return Err(Error::Parse {
                offset: 0,
                message: format!("expected Pf, found {other:?}"),
            })
        }
    }
    let (w, ht) = dims(&mut h)?;
    h.skip_space();
    let scale_at = h.pos;
    let scale: f32 = h.number("scale")?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::Parse {
            offset: scale_at,
            message: format!("invalid scale {scale}"),
        });
    }
    if scale > 0.0 {
        return Err(Error::Parse {
            offset: scale_at,
            message: "big-endian unsupported".into(),
        });
    }
    let start = h.end()?;
    let need = w * ht * 4;
    let data = &bytes[start..];
    if data.len() < need {
        return Err(Error::Parse {
            offset: bytes.len(),
            message: format!("raster truncated: {} of {need} bytes", data.len()),
        });
    }
    let mut samples = vec![0f32; w * ht];
    for (i, chunk) in data[..need].chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().expect("4-byte chunk"));
        if !v.is_finite() {
            return Err(Error::Parse {
                offset: start + i * 4,
                message: format!("non-finite sample {v}"),
            });
        }
        let (x, file_row) = (i % w, i / w);
        samples[(ht - 1 - file_row) * w + x] = v;
    }
    GridImage::from_samples(w, ht, ElementKind::F32, samples)
}

pub fn write_pfm(image: &GridImage) -> Vec<u8> {
    let (w, h) = image.dims();
    let mut out = format!("Pf\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(w * h * 4);
    for row in image.samples().chunks_exact(w).rev() {
        for v in row {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}
