//! Grayscale sample grids shared by every stage of the pipeline.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Storage semantics of a grid. Samples are always held as `f32`; `U8` grids
/// only ever contain integral values in `[0, 255]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    U8,
    F32,
}

impl ElementKind {
    /// Converts a computed value into a storable sample: `U8` rounds half up
    /// and saturates, `F32` rejects non-finite values.
    pub fn quantize(self, value: f32) -> Result<f32> {
        match self {
            ElementKind::U8 => {
                if value.is_nan() {
                    return Err(Error::invalid("NaN written to u8 grid"));
                }
                Ok((value + 0.5).floor().clamp(0.0, 255.0))
            }
            ElementKind::F32 => {
                if value.is_finite() {
                    Ok(value)
                } else {
                    Err(Error::invalid(format!("non-finite sample {value}")))
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ElementKind::U8 => "u8",
            ElementKind::F32 => "f32",
        }
    }
}

/// Read access to a row-major plane of samples.
pub trait Plane {
    fn width(&self) -> usize;
    fn height(&self) -> usize;
    fn get(&self, x: usize, y: usize) -> Result<f32>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridImage {
    width: usize,
    height: usize,
    kind: ElementKind,
    samples: Vec<f32>,
}

impl GridImage {
    pub fn new(width: usize, height: usize, kind: ElementKind) -> Result<Self> {
        Self::filled(width, height, kind, 0.0)
    }

    pub fn filled(width: usize, height: usize, kind: ElementKind, value: f32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!("image dims must be >= 1, got {width}x{height}")));
        }
        let value = kind.quantize(value)?;
        Ok(Self {
            width,
            height,
            kind,
            samples: vec![value; width * height],
        })
    }

    pub fn from_samples(width: usize, height: usize, kind: ElementKind, samples: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!("image dims must be >= 1, got {width}x{height}")));
        }
        if samples.len() != width * height {
            return Err(Error::invalid(format!(
                "expected {} samples for {width}x{height}, got {}",
                width * height,
                samples.len()
            )));
        }
        for (i, &s) in samples.iter().enumerate() {
            let ok = match kind {
                ElementKind::U8 => (0.0..=255.0).contains(&s) && s.fract() == 0.0,
                ElementKind::F32 => s.is_finite(),
            };
            if !ok {
                return Err(Error::invalid(format!(
                    "sample {i} = {s} not valid for {}",
                    kind.name()
                )));
            }
        }
        Ok(Self {
            width,
            height,
            kind,
            samples,
        })
    }

    pub fn from_u8(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        Self::from_samples(
            width,
            height,
            ElementKind::U8,
            bytes.iter().map(|&b| b as f32).collect(),
        )
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel and quantizing.
    pub fn from_fn(
        width: usize,
        height: usize,
        kind: ElementKind,
        mut f: impl FnMut(usize, usize) -> f32,
    ) -> Result<Self> {
        let mut img = Self::new(width, height, kind)?;
        for y in 0..height {
            for x in 0..width {
                img.samples[y * width + x] = kind.quantize(f(x, y))?;
            }
        }
        Ok(img)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn kind(&self) -> ElementKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn at(&self, x: usize, y: usize) -> f32 {
        self.samples[y * self.width + x]
    }

    /// Stores `value` after quantizing to the element kind.
    pub fn set(&mut self, x: usize, y: usize, value: f32) -> Result<()> {
        let v = self.kind.quantize(value)?;
        self.samples[y * self.width + x] = v;
        Ok(())
    }

    pub fn to_u8_bytes(&self) -> Vec<u8> {
        self.samples.iter().map(|&s| s.clamp(0.0, 255.0) as u8).collect()
    }

    pub fn min_max(&self) -> (f32, f32) {
        self.samples
            .iter()
            .fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), &s| {
                (lo.min(s), hi.max(s))
            })
    }
}

impl Plane for GridImage {
    fn width(&self) -> usize {
        self.width
    }

    fn height(&self) -> usize {
        self.height
    }

    fn get(&self, x: usize, y: usize) -> Result<f32> {
        if x >= self.width {
            return Err(Error::OutOfBounds {
                index: x as isize,
                size: self.width,
            });
        }
        if y >= self.height {
            return Err(Error::OutOfBounds {
                index: y as isize,
                size: self.height,
            });
        }
        Ok(self.samples[y * self.width + x])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn u8_quantize_rounds_half_up_and_saturates() {
        assert_eq!(ElementKind::U8.quantize(63.75).unwrap(), 64.0);
        assert_eq!(ElementKind::U8.quantize(2.5).unwrap(), 3.0);
        assert_eq!(ElementKind::U8.quantize(300.0).unwrap(), 255.0);
        assert_eq!(ElementKind::U8.quantize(-4.0).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_samples() {
        assert!(GridImage::new(0, 3, ElementKind::U8).is_err());
        assert!(GridImage::from_samples(1, 1, ElementKind::U8, vec![1.5]).is_err());
        assert!(GridImage::from_samples(1, 1, ElementKind::F32, vec![f32::NAN]).is_err());
        assert!(GridImage::from_samples(2, 1, ElementKind::F32, vec![0.0]).is_err());
    }
}
