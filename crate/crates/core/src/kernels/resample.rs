//! Power-of-two resampling between pyramid levels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{ElementKind, GridImage, Plane};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interp {
    None,
    Nearest,
    Bilinear,
}

impl Interp {
    pub fn name(self) -> &'static str {
        match self {
            Interp::None => "none",
            Interp::Nearest => "nearest",
            Interp::Bilinear => "bilinear",
        }
    }
}

/// Size relation between two grids: `shift > 0` means the target is
/// `2^shift` times larger.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scale {
    pub shift: i32,
}

impl Scale {
    pub fn is_identity(self) -> bool {
        self.shift == 0
    }

    pub fn factor(self) -> usize {
        1usize << self.shift.unsigned_abs()
    }
}

/// Whether `small` is what `big` becomes after `k` halvings, allowing either
/// rounding at each step.
fn halves_to(big: usize, small: usize, k: u32) -> bool {
    let d = 1usize << k;
    small == big / d || small == big.div_ceil(d)
}

/// Finds the common power-of-two factor relating `from` to `to`, or `None`
/// when the size discrepancy is not a power of two.
pub fn scale_between(from: (usize, usize), to: (usize, usize)) -> Option<Scale> {
    if from == to {
        return Some(Scale { shift: 0 });
    }
    for k in 1..usize::BITS {
        if (1usize << k) > from.0.max(from.1).max(to.0).max(to.1) * 2 {
            break;
        }
        if halves_to(from.0, to.0, k) && halves_to(from.1, to.1, k) {
            return Some(Scale { shift: -(k as i32) });
        }
        if halves_to(to.0, from.0, k) && halves_to(to.1, from.1, k) {
            return Some(Scale { shift: k as i32 });
        }
    }
    None
}

/// Source coordinate for target index `x` along one axis.
fn source_position(x: usize, src: usize, dst: usize, scale: Scale) -> f64 {
    let f = scale.factor() as f64;
    if scale.shift > 0 {
        // grids whose corners coincide (2^k + 1 style) interpolate vertex to vertex
        if src >= 2 && dst == (src - 1) * scale.factor() + 1 {
            x as f64 / f
        } else {
            (x as f64 + 0.5) / f - 0.5
        }
    } else if dst >= 2 && src == (dst - 1) * scale.factor() + 1 {
        x as f64 * f
    } else {
        (x as f64 + 0.5) * f - 0.5
    }
}

/// Source samples that one target sample reads, per axis: `(i0, i1, t)`.
fn taps(x: usize, src: usize, dst: usize, scale: Scale, interp: Interp) -> (usize, usize, f32) {
    let last = src - 1;
    match interp {
        Interp::None => (x.min(last), x.min(last), 0.0),
        Interp::Nearest => {
            let i = if scale.shift >= 0 {
                x / scale.factor()
            } else {
                x * scale.factor()
            };
            (i.min(last), i.min(last), 0.0)
        }
        Interp::Bilinear => {
            let p = source_position(x, src, dst, scale);
            let i0 = p.floor();
            let t = (p - i0) as f32;
            let lo = (i0 as isize).clamp(0, last as isize) as usize;
            let hi = if t == 0.0 {
                lo
            } else {
                ((i0 as isize) + 1).clamp(0, last as isize) as usize
            };
            (lo, hi, t)
        }
    }
}

fn lerp(a: f32, b: f32, t: f32) -> f32 {
    a + t * (b - a)
}

/// Largest row-major source index read when producing target sample `(x, y)`.
pub fn source_extent(src: (usize, usize), dst: (usize, usize), interp: Interp, x: usize, y: usize) -> Result<usize> {
    let scale = scale_between(src, dst).ok_or_else(|| non_power_of_two(src, dst))?;
    let (x0, x1, _) = taps(x, src.0, dst.0, scale, interp);
    let (y0, y1, _) = taps(y, src.1, dst.1, scale, interp);
    Ok(y0.max(y1) * src.0 + x0.max(x1))
}

pub(crate) fn non_power_of_two(a: (usize, usize), b: (usize, usize)) -> Error {
    Error::structural(format!(
        "size discrepancy between {}x{} and {}x{} is not a power-of-two factor",
        a.0, a.1, b.0, b.1
    ))
}

/// One target sample of `src` resampled to `dst` dims, quantized to `kind`.
pub fn resample_at(
    src: &dyn Plane,
    kind: ElementKind,
    interp: Interp,
    dst: (usize, usize),
    x: usize,
    y: usize,
) -> Result<f32> {
    let sdims = (src.width(), src.height());
    let scale = scale_between(sdims, dst).ok_or_else(|| non_power_of_two(sdims, dst))?;
    if interp == Interp::None && !scale.is_identity() {
        return Err(Error::invalid(format!(
            "unfiltered access across {}x{} -> {}x{}",
            sdims.0, sdims.1, dst.0, dst.1
        )));
    }
    let (x0, x1, tx) = taps(x, sdims.0, dst.0, scale, interp);
    let (y0, y1, ty) = taps(y, sdims.1, dst.1, scale, interp);
    let v = if tx == 0.0 && ty == 0.0 {
        src.get(x0, y0)?
    } else {
        let top = lerp(src.get(x0, y0)?, src.get(x1, y0)?, tx);
        let bottom = lerp(src.get(x0, y1)?, src.get(x1, y1)?, tx);
        lerp(top, bottom, ty)
    };
    kind.quantize(v)
}

/// A plane that presents `src` at `dims` through `interp`, computed on read.
pub struct ResampledPlane<'a> {
    src: &'a dyn Plane,
    kind: ElementKind,
    interp: Interp,
    dims: (usize, usize),
}

impl<'a> ResampledPlane<'a> {
    pub fn new(src: &'a dyn Plane, kind: ElementKind, interp: Interp, dims: (usize, usize)) -> Result<Self> {
        let sdims = (src.width(), src.height());
        if scale_between(sdims, dims).is_none() {
            return Err(non_power_of_two(sdims, dims));
        }
        Ok(Self {
            src,
            kind,
            interp,
            dims,
        })
    }
}

impl Plane for ResampledPlane<'_> {
    fn width(&self) -> usize {
        self.dims.0
    }

    fn height(&self) -> usize {
        self.dims.1
    }

    fn get(&self, x: usize, y: usize) -> Result<f32> {
        resample_at(self.src, self.kind, self.interp, self.dims, x, y)
    }
}

/// Resamples a whole image to `dims`.
pub fn resample(image: &GridImage, interp: Interp, dims: (usize, usize)) -> Result<GridImage> {
    let view = ResampledPlane::new(image, image.kind(), interp, dims)?;
    let mut samples = Vec::with_capacity(dims.0 * dims.1);
    for y in 0..dims.1 {
        for x in 0..dims.0 {
            samples.push(view.get(x, y)?);
        }
    }
    GridImage::from_samples(dims.0, dims.1, image.kind(), samples)
}

/// Doubles both dims.
pub fn upsample(image: &GridImage, factor: usize, interp: Interp) -> Result<GridImage> {
    if factor != 2 {
        return Err(Error::invalid(format!("unsupported upsampling factor {factor}")));
    }
    if interp == Interp::None {
        return Err(Error::invalid("upsampling needs nearest or bilinear interpolation"));
    }
    resample(image, interp, (image.width() * 2, image.height() * 2))
}
