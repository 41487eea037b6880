#![allow(dead_code)]

use std::collections::HashMap;

use mrflow::frontend::{points, BufferId, MaskDef, ProgramBuilder, ProgramTrace, PyramidDef};
use mrflow::kernels::{BilateralParams, BoundaryMode, Interp};
use mrflow::reference::Inputs;
use mrflow::{ElementKind, GridImage};
use rand::Rng;

fn clamp_index(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

/// Direct double-precision bilateral filter with clamped borders.
pub fn bilateral_f64(img: &GridImage, sigma_s: f64, sigma_r: f64, radius: usize) -> Vec<f64> {
    let (w, h) = img.dims();
    let r = radius as isize;
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let c = img.at(x, y) as f64;
            let (mut num, mut den) = (0.0, 0.0);
            for dy in -r..=r {
                for dx in -r..=r {
                    let v = img.at(clamp_index(x as isize + dx, w), clamp_index(y as isize + dy, h)) as f64;
                    let spatial = (-((dx * dx + dy * dy) as f64) / (2.0 * sigma_s * sigma_s)).exp();
                    let range = (-((v - c) * (v - c)) / (2.0 * sigma_r * sigma_r)).exp();
                    num += spatial * range * v;
                    den += spatial * range;
                }
            }
            out.push(num / den);
        }
    }
    out
}

/// Blur with `{1,2,1}^2 / 16` under clamping and keep even samples.
pub fn decompose_f64(img: &GridImage, out_w: usize, out_h: usize) -> Vec<f64> {
    let (w, h) = img.dims();
    let k = [1.0, 2.0, 1.0];
    let mut out = Vec::with_capacity(out_w * out_h);
    for y in 0..out_h {
        for x in 0..out_w {
            let mut acc = 0.0;
            for (j, ky) in k.iter().enumerate() {
                for (i, kx) in k.iter().enumerate() {
                    let sx = clamp_index(2 * x as isize + i as isize - 1, w);
                    let sy = clamp_index(2 * y as isize + j as isize - 1, h);
                    acc += kx * ky * img.at(sx, sy) as f64;
                }
            }
            out.push(acc / 16.0);
        }
    }
    out
}

/// `f - A u` with `A` assembled as a dense matrix over the interior unknowns.
/// Ring values of `u` enter as known Dirichlet data.
pub fn dense_residual(u: &GridImage, f: &GridImage, h: f64) -> Vec<f64> {
    let (w, hg) = u.dims();
    let (iw, ih) = (w - 2, hg - 2);
    let n = iw * ih;
    let idx = |x: usize, y: usize| (y - 1) * iw + (x - 1);
    let mut a = vec![vec![0.0f64; n]; n];
    let mut rhs_shift = vec![0.0f64; n];
    let scale = 1.0 / (h * h);
    for y in 1..hg - 1 {
        for x in 1..w - 1 {
            let row = idx(x, y);
            a[row][row] = 4.0 * scale;
            for (nx, ny) in [(x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)] {
                if nx == 0 || ny == 0 || nx == w - 1 || ny == hg - 1 {
                    rhs_shift[row] += scale * u.at(nx, ny) as f64;
                } else {
                    a[row][idx(nx, ny)] = -scale;
                }
            }
        }
    }
    let mut r = vec![0.0; w * hg];
    for y in 1..hg - 1 {
        for x in 1..w - 1 {
            let row = idx(x, y);
            let au: f64 = (1..hg - 1)
                .flat_map(|yy| (1..w - 1).map(move |xx| (xx, yy)))
                .map(|(xx, yy)| a[row][idx(xx, yy)] * u.at(xx, yy) as f64)
                .sum();
            r[y * w + x] = f.at(x, y) as f64 + rhs_shift[row] - au;
        }
    }
    r
}

pub fn random_image<R: Rng>(rng: &mut R, w: usize, h: usize, kind: ElementKind) -> GridImage {
    GridImage::from_fn(w, h, kind, |_, _| match kind {
        ElementKind::U8 => rng.gen_range(0..=255) as f32,
        ElementKind::F32 => rng.gen_range(-50.0f32..200.0),
    })
    .unwrap()
}

/// Step edge plus bounded noise.
pub fn step_noise_image<R: Rng>(rng: &mut R, w: usize, h: usize) -> GridImage {
    GridImage::from_fn(w, h, ElementKind::U8, |x, _| {
        let base = if x < w / 2 { 60.0 } else { 190.0 };
        base + rng.gen_range(-12.0f32..12.0).round()
    })
    .unwrap()
}

pub struct RandomProgram {
    pub trace: ProgramTrace,
    pub inputs: Inputs,
    pub levels: usize,
    pub dims: (usize, usize),
    pub kind: ElementKind,
}

/// A random multiresolution program: a pyramid of 1 to 3 levels, a short
/// chain of pointwise and window kernels per level written through two
/// ping-pong buffers, and reconstruction back to the finest level.
pub fn random_program<R: Rng>(rng: &mut R) -> RandomProgram {
    let levels = rng.gen_range(1..=3);
    let w = rng.gen_range(16..=64);
    let h = rng.gen_range(16..=64);
    let kind = if rng.gen_bool(0.5) {
        ElementKind::U8
    } else {
        ElementKind::F32
    };
    let def = PyramidDef::new(w, h, levels, kind);
    let mut b = ProgramBuilder::new();
    let g = b.declare_pyramid("g", def).unwrap();
    let interp = if rng.gen_bool(0.5) {
        Interp::Nearest
    } else {
        Interp::Bilinear
    };
    b.transfer_in(g.level(0)).unwrap();

    let mut processed: Vec<BufferId> = Vec::with_capacity(levels);
    for l in 0..levels {
        let (lw, lh) = def.dims(l);
        let ping = [
            b.declare_named(format!("p{l}"), lw, lh, kind).unwrap(),
            b.declare_named(format!("q{l}"), lw, lh, kind).unwrap(),
        ];
        if l + 1 < levels {
            let bnd = random_boundary(rng);
            b.record_launch(
                points::decompose(g.level(l), g.level(l + 1), MaskDef::gaussian3(), bnd),
                Some(l),
            )
            .unwrap();
        }
        let mut current = g.level(l);
        let steps = rng.gen_range(1..=3);
        for s in 0..steps {
            let out = ping[s % 2];
            let k = random_kernel(rng, current, out);
            b.record_launch(k, Some(l)).unwrap();
            current = out;
        }
        processed.push(current);
    }

    let mut coarse = processed[levels - 1];
    for l in (0..levels - 1).rev() {
        let (lw, lh) = def.dims(l);
        let r = b.declare_named(format!("r{l}"), lw, lh, kind).unwrap();
        let halve = b.declare_named(format!("h{l}"), lw, lh, kind).unwrap();
        b.record_launch(points::affine(processed[l], halve, 0.5, 0.0), Some(l))
            .unwrap();
        b.record_launch(points::reconstruct(halve, coarse, r, interp), Some(l))
            .unwrap();
        coarse = r;
    }
    b.transfer_out(coarse).unwrap();
    if levels > 1 && rng.gen_bool(0.3) {
        b.transfer_out_at(processed[levels - 1], levels - 1).unwrap();
    }

    let mut inputs = HashMap::new();
    inputs.insert(g.level(0), random_image(rng, w, h, kind));
    RandomProgram {
        trace: b.finish(),
        inputs,
        levels,
        dims: (w, h),
        kind,
    }
}

fn random_boundary<R: Rng>(rng: &mut R) -> BoundaryMode {
    match rng.gen_range(0..3) {
        0 => BoundaryMode::Clamp,
        1 => BoundaryMode::Mirror,
        _ => BoundaryMode::Repeat,
    }
}

fn random_kernel<R: Rng>(rng: &mut R, input: BufferId, output: BufferId) -> mrflow::frontend::KernelDef {
    match rng.gen_range(0..4) {
        0 => points::affine(input, output, rng.gen_range(0.25f32..1.0), rng.gen_range(0.0f32..8.0)),
        1 => points::convolve(input, output, MaskDef::gaussian3(), random_boundary(rng)),
        2 => {
            let radius = rng.gen_range(1..=2);
            let p = BilateralParams::new(radius as f32, rng.gen_range(10.0f32..40.0), radius).unwrap();
            points::bilateral(input, output, p, random_boundary(rng))
        }
        _ => points::affine(input, output, 1.0, 0.0),
    }
}
