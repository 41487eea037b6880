//! Ready-made kernels for the pyramid and multigrid programs.

use std::sync::Arc;

use crate::kernels::{
    bilateral_at, correct_at, jor_at, pyramid, residual_at, stencil_at, BilateralParams, BoundaryMode, Interp,
};

use super::kernel::{AccessorDef, BufferId, KernelDef, PointFn};
use super::MaskDef;

pub fn mask_point() -> PointFn {
    Arc::new(|w| stencil_at(w.input(0)?, w.mask()?))
}

pub fn bilateral_point(params: BilateralParams) -> PointFn {
    Arc::new(move |w| bilateral_at(w.input(0)?, &params))
}

pub fn fuse_point() -> PointFn {
    Arc::new(|w| Ok(pyramid::fuse_at(w.input(0)?.at(0, 0)?, w.input(1)?.at(0, 0)?)))
}

pub fn detail_point() -> PointFn {
    Arc::new(|w| Ok(pyramid::detail_at(w.input(0)?.at(0, 0)?, w.input(1)?.at(0, 0)?)))
}

pub fn jor_point(h: f32, omega: f32) -> PointFn {
    Arc::new(move |w| jor_at(w.input(0)?, w.input(1)?.at(0, 0)?, h, omega))
}

pub fn residual_point(h: f32) -> PointFn {
    Arc::new(move |w| residual_at(w.input(0)?, w.input(1)?.at(0, 0)?, h))
}

pub fn correct_point() -> PointFn {
    Arc::new(|w| Ok(correct_at(w.input(0)?.at(0, 0)?, w.input(1)?.at(0, 0)?)))
}

pub fn constant_point(value: f32) -> PointFn {
    Arc::new(move |_| Ok(value))
}

/// Per-pixel affine map `a * v + b`.
pub fn affine_point(a: f32, b: f32) -> PointFn {
    Arc::new(move |w| Ok(a * w.input(0)?.at(0, 0)? + b))
}

pub fn sum_point() -> PointFn {
    Arc::new(|w| Ok(w.input(0)?.at(0, 0)? + w.input(1)?.at(0, 0)?))
}

/// Masked convolution, e.g. the 3x3 Gaussian blur.
pub fn convolve(input: BufferId, output: BufferId, mask: MaskDef, boundary: BoundaryMode) -> KernelDef {
    let r = mask.radius();
    KernelDef::new("convolve", output, mask_point())
        .input(AccessorDef::new(input).boundary(boundary), r)
        .mask(mask)
}

/// Pointwise `a * v + b`.
pub fn affine(input: BufferId, output: BufferId, a: f32, b: f32) -> KernelDef {
    KernelDef::new("affine", output, affine_point(a, b)).input(AccessorDef::new(input), 0)
}

/// Blur and keep even samples: one pyramid level down.
pub fn decompose(input: BufferId, output: BufferId, mask: MaskDef, boundary: BoundaryMode) -> KernelDef {
    let r = mask.radius();
    KernelDef::new("decompose", output, mask_point())
        .input(AccessorDef::new(input).boundary(boundary), r)
        .mask(mask)
        .decimate(2)
}

pub fn bilateral(input: BufferId, output: BufferId, params: BilateralParams, boundary: BoundaryMode) -> KernelDef {
    KernelDef::new("bilateral", output, bilateral_point(params))
        .input(AccessorDef::new(input).boundary(boundary), params.radius)
}

/// `fine + upsample(coarse)` at the fine level.
pub fn reconstruct(fine: BufferId, coarse: BufferId, output: BufferId, interp: Interp) -> KernelDef {
    KernelDef::new("reconstruct", output, fuse_point())
        .input(AccessorDef::new(fine), 0)
        .input(AccessorDef::new(coarse).interp(interp), 0)
}

/// `fine - upsample(coarse)`.
pub fn detail(fine: BufferId, coarse: BufferId, output: BufferId, interp: Interp) -> KernelDef {
    KernelDef::new("detail", output, detail_point())
        .input(AccessorDef::new(fine), 0)
        .input(AccessorDef::new(coarse).interp(interp), 0)
}

pub fn jor(u: BufferId, f: BufferId, output: BufferId, h: f32, omega: f32) -> KernelDef {
    KernelDef::new("jor", output, jor_point(h, omega))
        .input(AccessorDef::new(u), 1)
        .input(AccessorDef::new(f), 0)
}

pub fn residual(u: BufferId, f: BufferId, output: BufferId, h: f32) -> KernelDef {
    KernelDef::new("residual", output, residual_point(h))
        .input(AccessorDef::new(u), 1)
        .input(AccessorDef::new(f), 0)
}

/// Full-weighting restriction onto the next coarser grid.
pub fn restrict(input: BufferId, output: BufferId) -> KernelDef {
    KernelDef::new("restrict", output, mask_point())
        .input(AccessorDef::new(input), 1)
        .mask(MaskDef::full_weighting())
        .decimate(2)
}

/// `u + P e` with bilinear prolongation of the coarse correction.
pub fn correct(u: BufferId, e: BufferId, output: BufferId) -> KernelDef {
    KernelDef::new("correct", output, correct_point())
        .input(AccessorDef::new(u), 0)
        .input(AccessorDef::new(e).interp(Interp::Bilinear), 0)
}

pub fn fill(output: BufferId, value: f32) -> KernelDef {
    KernelDef::new("fill", output, constant_point(value))
}
