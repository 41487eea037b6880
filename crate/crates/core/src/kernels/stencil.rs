use crate::error::{Error, Result};
use crate::frontend::MaskDef;
use crate::image::{GridImage, Plane};

use super::boundary::{map_boundary, BoundaryMode};

/// A sliding-window view centered on one pixel of a plane.
///
/// Offsets are resolved through the boundary mode of the accessor that
/// produced the view. When a radius limit is set, reads beyond it fail so a
/// point function cannot silently exceed the window it declared.
#[derive(Clone, Copy)]
pub struct Neighborhood<'a> {
    plane: &'a dyn Plane,
    boundary: BoundaryMode,
    cx: isize,
    cy: isize,
    limit: Option<usize>,
}

impl<'a> Neighborhood<'a> {
    pub fn new(plane: &'a dyn Plane, boundary: BoundaryMode, cx: usize, cy: usize) -> Self {
        Self {
            plane,
            boundary,
            cx: cx as isize,
            cy: cy as isize,
            limit: None,
        }
    }

    pub fn with_limit(mut self, radius: usize) -> Self {
        self.limit = Some(radius);
        self
    }

    pub fn center(&self) -> (usize, usize) {
        (self.cx as usize, self.cy as usize)
    }

    pub fn width(&self) -> usize {
        self.plane.width()
    }

    pub fn height(&self) -> usize {
        self.plane.height()
    }

    /// Sample at `(cx + dx, cy + dy)`.
    pub fn at(&self, dx: isize, dy: isize) -> Result<f32> {
        if let Some(r) = self.limit {
            if dx.unsigned_abs() > r || dy.unsigned_abs() > r {
                return Err(Error::invalid(format!(
                    "window access ({dx},{dy}) exceeds declared radius {r}"
                )));
            }
        }
        let x = map_boundary(self.cx + dx, self.plane.width(), self.boundary)?;
        let y = map_boundary(self.cy + dy, self.plane.height(), self.boundary)?;
        self.plane.get(x, y)
    }
}

/// Weighted sum of the window under `mask`, taps visited row by row.
pub fn stencil_at(n: &Neighborhood<'_>, mask: &MaskDef) -> Result<f32> {
    let r = mask.radius() as isize;
    let mut acc = 0.0f32;
    for dy in -r..=r {
        for dx in -r..=r {
            acc += mask.at(dx, dy) * n.at(dx, dy)?;
        }
    }
    Ok(acc)
}

/// Correlates `image` with `mask`; output keeps the input dims and kind.
pub fn apply_stencil(image: &GridImage, mask: &MaskDef, boundary: BoundaryMode) -> Result<GridImage> {
    let mut out = GridImage::new(image.width(), image.height(), image.kind())?;
    for y in 0..image.height() {
        for x in 0..image.width() {
            let n = Neighborhood::new(image, boundary, x, y);
            out.set(x, y, stencil_at(&n, mask)?)?;
        }
    }
    Ok(out)
}

/// Blur then keep every second sample in each direction, anchored at even
/// coordinates. Output dims are `ceil(dims / 2)`.
pub fn decompose(image: &GridImage, mask: &MaskDef, boundary: BoundaryMode) -> Result<GridImage> {
    decompose_to(
        image,
        mask,
        boundary,
        image.width().div_ceil(2),
        image.height().div_ceil(2),
    )
}

/// Like [`decompose`] but with explicit output dims, which must be the floor
/// or ceiling of half the input dims.
pub fn decompose_to(
    image: &GridImage,
    mask: &MaskDef,
    boundary: BoundaryMode,
    out_w: usize,
    out_h: usize,
) -> Result<GridImage> {
    if image.width() < 2 || image.height() < 2 {
        return Err(Error::invalid(format!(
            "decompose needs at least 2x2 input, got {}x{}",
            image.width(),
            image.height()
        )));
    }
    let halves = |n: usize, m: usize| m == n / 2 || m == n.div_ceil(2);
    if !halves(image.width(), out_w) || !halves(image.height(), out_h) {
        return Err(Error::invalid(format!(
            "decompose output {out_w}x{out_h} is not half of {}x{}",
            image.width(),
            image.height()
        )));
    }
    let mut out = GridImage::new(out_w, out_h, image.kind())?;
    for y in 0..out_h {
        for x in 0..out_w {
            let n = Neighborhood::new(image, boundary, 2 * x, 2 * y);
            out.set(x, y, stencil_at(&n, mask)?)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::ElementKind;

    #[test]
    fn constant_image_is_preserved() {
        let img = GridImage::filled(7, 5, ElementKind::U8, 42.0).unwrap();
        let out = apply_stencil(&img, &MaskDef::gaussian3(), BoundaryMode::Clamp).unwrap();
        assert!(out.samples().iter().all(|&s| s == 42.0));
    }

    #[test]
    fn impulse_imprints_mask() {
        let mut img = GridImage::new(5, 5, ElementKind::F32).unwrap();
        img.set(2, 2, 1.0).unwrap();
        let mask = MaskDef::gaussian3();
        let out = apply_stencil(&img, &mask, BoundaryMode::Clamp).unwrap();
        assert_eq!(out.at(2, 2), 0.25);
        for dy in -1..=1isize {
            for dx in -1..=1isize {
                // correlation: out(2+dx, 2+dy) picks mask(-dx, -dy); the mask is symmetric
                assert_eq!(out.at((2 + dx) as usize, (2 + dy) as usize), mask.at(dx, dy));
            }
        }
        assert_eq!(out.at(0, 0), 0.0);
    }

    #[test]
    fn bottom_row_edge_rounds_up() {
        let img = GridImage::from_u8(3, 3, &[0, 0, 0, 0, 0, 0, 255, 255, 255]).unwrap();
        let out = apply_stencil(&img, &MaskDef::gaussian3(), BoundaryMode::Clamp).unwrap();
        // 255 * (0.0625 + 0.125 + 0.0625) = 63.75
        assert_eq!(out.at(1, 1), 64.0);
    }

    #[test]
    fn decompose_dims_and_constants() {
        let img = GridImage::filled(4, 4, ElementKind::U8, 10.0).unwrap();
        let out = decompose(&img, &MaskDef::gaussian3(), BoundaryMode::Clamp).unwrap();
        assert_eq!(out.dims(), (2, 2));
        assert!(out.samples().iter().all(|&s| s == 10.0));

        let big = GridImage::new(512, 512, ElementKind::U8).unwrap();
        let out = decompose(&big, &MaskDef::gaussian3(), BoundaryMode::Clamp).unwrap();
        assert_eq!(out.dims(), (256, 256));

        let odd = GridImage::new(5, 3, ElementKind::U8).unwrap();
        assert_eq!(
            decompose(&odd, &MaskDef::gaussian3(), BoundaryMode::Clamp)
                .unwrap()
                .dims(),
            (3, 2)
        );
    }

    #[test]
    fn decompose_rejects_single_pixel() {
        let img = GridImage::new(1, 1, ElementKind::U8).unwrap();
        assert!(decompose(&img, &MaskDef::gaussian3(), BoundaryMode::Clamp).is_err());
    }

    #[test]
    fn neighborhood_limit_is_enforced() {
        let img = GridImage::new(4, 4, ElementKind::F32).unwrap();
        let n = Neighborhood::new(&img, BoundaryMode::Clamp, 1, 1).with_limit(1);
        assert!(n.at(1, -1).is_ok());
        assert!(n.at(2, 0).is_err());
    }
}
