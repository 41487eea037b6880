use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{ElementKind, GridImage, Plane};

use super::resample::{scale_between, Interp, ResampledPlane};

/// How successive pyramid levels are fused during reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FusionMode {
    /// `out = fine + upsample(coarse)` on the filtered Gaussian levels.
    #[default]
    Plain,
    /// Decompose also stores `fine - upsample(coarse)` and reconstruct adds
    /// the upsampled coarse level back onto that detail band.
    Laplacian,
}

/// Sum of two aligned samples; the shared point routine for reconstruction.
pub fn fuse_at(fine: f32, upsampled: f32) -> f32 {
    fine + upsampled
}

/// Difference of two aligned samples; the shared point routine for detail bands.
pub fn detail_at(fine: f32, upsampled: f32) -> f32 {
    fine - upsampled
}

fn upsampled_view<'a>(fine: &GridImage, coarse: &'a GridImage, interp: Interp) -> Result<ResampledPlane<'a>> {
    match scale_between(coarse.dims(), fine.dims()) {
        Some(s) if s.shift > 0 => {}
        _ => {
            return Err(Error::invalid(format!(
                "coarse {}x{} does not upsample to fine {}x{}",
                coarse.width(),
                coarse.height(),
                fine.width(),
                fine.height()
            )))
        }
    }
    if interp == Interp::None {
        return Err(Error::invalid("reconstruct needs nearest or bilinear interpolation"));
    }
    ResampledPlane::new(coarse, coarse.kind(), interp, fine.dims())
}

/// `fine + upsample(coarse)` at the fine resolution, stored as `out_kind`.
pub fn reconstruct_into(
    fine: &GridImage,
    coarse: &GridImage,
    interp: Interp,
    out_kind: ElementKind,
) -> Result<GridImage> {
    let up = upsampled_view(fine, coarse, interp)?;
    let mut out = GridImage::new(fine.width(), fine.height(), out_kind)?;
    for y in 0..fine.height() {
        for x in 0..fine.width() {
            out.set(x, y, fuse_at(fine.at(x, y), up.get(x, y)?))?;
        }
    }
    Ok(out)
}

/// `fine + upsample(coarse)`, keeping the fine image's element kind.
pub fn reconstruct(fine: &GridImage, coarse: &GridImage, interp: Interp) -> Result<GridImage> {
    reconstruct_into(fine, coarse, interp, fine.kind())
}

/// Detail band `fine - upsample(coarse)` as an `f32` image.
pub fn laplacian_detail(fine: &GridImage, coarse: &GridImage, interp: Interp) -> Result<GridImage> {
    let up = upsampled_view(fine, coarse, interp)?;
    let mut out = GridImage::new(fine.width(), fine.height(), ElementKind::F32)?;
    for y in 0..fine.height() {
        for x in 0..fine.width() {
            out.set(x, y, detail_at(fine.at(x, y), up.get(x, y)?))?;
        }
    }
    Ok(out)
}
