//! Edge-preserving bilateral filter: each output is the mean of its window
//! weighted by a spatial Gaussian and an intensity-range Gaussian.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::GridImage;

use super::boundary::BoundaryMode;
use super::stencil::Neighborhood;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BilateralParams {
    pub sigma_s: f32,
    pub sigma_r: f32,
    pub radius: usize,
}

impl BilateralParams {
    pub fn new(sigma_s: f32, sigma_r: f32, radius: usize) -> Result<Self> {
        if !(sigma_s > 0.0 && sigma_s.is_finite()) || !(sigma_r > 0.0 && sigma_r.is_finite()) {
            return Err(Error::invalid(format!(
                "bilateral sigmas must be positive, got sigma_s={sigma_s} sigma_r={sigma_r}"
            )));
        }
        if !(1..=2).contains(&radius) {
            return Err(Error::invalid(format!("bilateral radius must be 1 or 2, got {radius}")));
        }
        Ok(Self {
            sigma_s,
            sigma_r,
            radius,
        })
    }
}

/// Filtered value at the window center, computed in `f32`.
pub fn bilateral_at(n: &Neighborhood<'_>, p: &BilateralParams) -> Result<f32> {
    let r = p.radius as isize;
    let center = n.at(0, 0)?;
    let inv_s = 1.0 / (2.0 * p.sigma_s * p.sigma_s);
    let inv_r = 1.0 / (2.0 * p.sigma_r * p.sigma_r);
    let mut num = 0.0f32;
    let mut norm = 0.0f32;
    for dy in -r..=r {
        for dx in -r..=r {
            let v = n.at(dx, dy)?;
            let d2 = (dx * dx + dy * dy) as f32;
            let delta = v - center;
            let w = (-d2 * inv_s).exp() * (-(delta * delta) * inv_r).exp();
            num += w * delta;
            norm += w;
        }
    }
    // the center tap always has weight 1, so norm >= 1
    Ok(center + num / norm)
}

pub fn bilateral(image: &GridImage, params: &BilateralParams, boundary: BoundaryMode) -> Result<GridImage> {
    let mut out = GridImage::new(image.width(), image.height(), image.kind())?;
    for y in 0..image.height() {
        for x in 0..image.width() {
            let n = Neighborhood::new(image, boundary, x, y);
            out.set(x, y, bilateral_at(&n, params)?)?;
        }
    }
    Ok(out)
}
