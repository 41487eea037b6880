//! Geometric multigrid for the 2D Poisson problem `-Δu = f` with Dirichlet
//! boundary values held on the outermost ring.
//!
//! The operator is the 5-point Laplacian scaled by `1/h²`. Smoothing is
//! damped Jacobi (JOR), restriction is full weighting and prolongation is
//! bilinear interpolation. All arithmetic is `f32`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontend::MaskDef;
use crate::image::{ElementKind, GridImage, Plane};

use super::boundary::BoundaryMode;
use super::resample::{resample, Interp};
use super::stencil::{decompose, Neighborhood};

#[derive(Debug, Clone, PartialEq)]
pub struct GridProblem {
    pub u: GridImage,
    pub f: GridImage,
    pub h: f32,
}

impl GridProblem {
    pub fn new(u: GridImage, f: GridImage, h: f32) -> Result<Self> {
        if u.dims() != f.dims() {
            return Err(Error::invalid("u and f must share dims"));
        }
        if u.kind() != ElementKind::F32 || f.kind() != ElementKind::F32 {
            return Err(Error::invalid("multigrid grids must be f32"));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::invalid(format!("mesh width must be positive, got {h}")));
        }
        if u.width() < 3 || u.height() < 3 {
            return Err(Error::invalid("grid needs at least one interior unknown"));
        }
        Ok(Self { u, f, h })
    }

    /// `n x n` vertex-centered unit-square problem with zero initial guess,
    /// zero boundary and right-hand side `rhs(x, y)` at the grid nodes.
    pub fn unit_square(n: usize, rhs: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::invalid("grid needs at least 3 nodes per side"));
        }
        let h = 1.0 / (n - 1) as f64;
        let f = GridImage::from_fn(n, n, ElementKind::F32, |i, j| {
            if is_ring(i, j, n, n) {
                0.0
            } else {
                rhs(i as f64 * h, j as f64 * h) as f32
            }
        })?;
        let u = GridImage::new(n, n, ElementKind::F32)?;
        Self::new(u, f, h as f32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleParams {
    pub pre_smooth: usize,
    pub post_smooth: usize,
    pub omega: f32,
    pub gamma: usize,
    pub coarsest_dim: usize,
    pub coarsest_iters: usize,
}

impl Default for CycleParams {
    fn default() -> Self {
        Self {
            pre_smooth: 2,
            post_smooth: 2,
            omega: 0.8,
            gamma: 1,
            coarsest_dim: 5,
            coarsest_iters: 10,
        }
    }
}

impl CycleParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega <= 1.0) {
            return Err(Error::invalid(format!("omega must lie in (0, 1], got {}", self.omega)));
        }
        if !(1..=2).contains(&self.gamma) {
            return Err(Error::invalid(format!("gamma must be 1 or 2, got {}", self.gamma)));
        }
        if self.coarsest_dim < 3 {
            return Err(Error::invalid("coarsest grid must be at least 3x3"));
        }
        Ok(())
    }
}

pub(crate) fn is_ring(x: usize, y: usize, w: usize, h: usize) -> bool {
    x == 0 || y == 0 || x + 1 == w || y + 1 == h
}

/// One damped-Jacobi update at the window center. Ring nodes keep their value.
pub fn jor_at(u: &Neighborhood<'_>, f: f32, h: f32, omega: f32) -> Result<f32> {
    let (x, y) = u.center();
    let center = u.at(0, 0)?;
    if is_ring(x, y, u.width(), u.height()) {
        return Ok(center);
    }
    let sum = u.at(-1, 0)? + u.at(1, 0)? + u.at(0, -1)? + u.at(0, 1)?;
    Ok((1.0 - omega) * center + (omega / 4.0) * (sum + h * h * f))
}

/// Defect `f - A u` at the window center; zero on the ring.
pub fn residual_at(u: &Neighborhood<'_>, f: f32, h: f32) -> Result<f32> {
    let (x, y) = u.center();
    if is_ring(x, y, u.width(), u.height()) {
        return Ok(0.0);
    }
    let center = u.at(0, 0)?;
    let sum = u.at(-1, 0)? + u.at(1, 0)? + u.at(0, -1)? + u.at(0, 1)?;
    Ok(f - (4.0 * center - sum) / (h * h))
}

/// Coarse-grid correction `u + e`.
pub fn correct_at(u: f32, e: f32) -> f32 {
    u + e
}

pub fn jor_smooth(problem: &GridProblem, omega: f32, steps: usize) -> Result<GridImage> {
    let mut u = problem.u.clone();
    let (w, hgt) = u.dims();
    for _ in 0..steps {
        let mut next = GridImage::new(w, hgt, ElementKind::F32)?;
        for y in 0..hgt {
            for x in 0..w {
                let n = Neighborhood::new(&u, BoundaryMode::Clamp, x, y);
                next.set(x, y, jor_at(&n, problem.f.at(x, y), problem.h, omega)?)?;
            }
        }
        u = next;
    }
    Ok(u)
}

pub fn residual(problem: &GridProblem) -> Result<GridImage> {
    let (w, hgt) = problem.u.dims();
    let mut r = GridImage::new(w, hgt, ElementKind::F32)?;
    for y in 0..hgt {
        for x in 0..w {
            let n = Neighborhood::new(&problem.u, BoundaryMode::Clamp, x, y);
            r.set(x, y, residual_at(&n, problem.f.at(x, y), problem.h)?)?;
        }
    }
    Ok(r)
}

/// Full-weighting restriction sampled at even fine nodes, clamped at edges.
/// `2^k + 1` grids map to `2^(k-1) + 1`; even grids halve.
pub fn restrict(fine: &GridImage) -> Result<GridImage> {
    if fine.width() < 3 || fine.height() < 3 {
        return Err(Error::invalid(format!(
            "cannot restrict a {}x{} grid",
            fine.width(),
            fine.height()
        )));
    }
    decompose(fine, &MaskDef::full_weighting(), BoundaryMode::Clamp)
}

/// Fine dims that [`restrict`] maps back onto `coarse`.
pub fn prolongation_dims(coarse: (usize, usize)) -> (usize, usize) {
    let grow = |n: usize| if n % 2 == 1 { 2 * n - 1 } else { 2 * n };
    (grow(coarse.0), grow(coarse.1))
}

/// Bilinear interpolation: coincident nodes copy, edge midpoints average two
/// neighbors, cell centers average four.
pub fn prolongate(coarse: &GridImage) -> Result<GridImage> {
    if coarse.width() < 2 || coarse.height() < 2 {
        return Err(Error::invalid("cannot prolongate a grid thinner than 2 nodes"));
    }
    resample(coarse, Interp::Bilinear, prolongation_dims(coarse.dims()))
}

pub fn residual_l2(problem: &GridProblem) -> Result<f64> {
    let r = residual(problem)?;
    Ok(r.samples().iter().map(|&v| (v as f64).powi(2)).sum::<f64>().sqrt())
}

/// `||f - A u|| / ||f||` over the grid.
pub fn relative_residual(problem: &GridProblem) -> Result<f64> {
    let fnorm = problem
        .f
        .samples()
        .iter()
        .map(|&v| (v as f64).powi(2))
        .sum::<f64>()
        .sqrt();
    let r = residual_l2(problem)?;
    Ok(if fnorm == 0.0 { r } else { r / fnorm })
}

/// Result of one multigrid cycle.
#[derive(Debug, Clone)]
pub struct CycleOutcome {
    pub u: GridImage,
    /// Number of times each level was entered, finest first.
    pub entries: Vec<usize>,
}

/// Number of grid levels from `n` down to the coarsest size.
pub fn level_count(n: (usize, usize), coarsest_dim: usize) -> Result<usize> {
    let (mut w, mut h) = n;
    let mut levels = 1;
    while w > coarsest_dim || h > coarsest_dim {
        if w < 3 || h < 3 {
            return Err(Error::invalid("grid chain does not reach the coarsest size"));
        }
        w = w.div_ceil(2);
        h = h.div_ceil(2);
        levels += 1;
    }
    if (w, h) != (coarsest_dim, coarsest_dim) && n != (w, h) {
        return Err(Error::invalid(format!(
            "grid {}x{} does not restrict onto {coarsest_dim}x{coarsest_dim}",
            n.0, n.1
        )));
    }
    Ok(levels)
}

/// One multigrid cycle from `problem.u`. `gamma = 1` is a V-cycle,
/// `gamma = 2` a W-cycle.
pub fn v_cycle(problem: &GridProblem, params: &CycleParams) -> Result<CycleOutcome> {
    params.validate()?;
    let levels = level_count(problem.u.dims(), params.coarsest_dim)?;
    let mut entries = vec![0; levels];
    let u = cycle_level(problem, params, 0, &mut entries)?;
    Ok(CycleOutcome { u, entries })
}

fn cycle_level(problem: &GridProblem, params: &CycleParams, level: usize, entries: &mut [usize]) -> Result<GridImage> {
    entries[level] += 1;
    if level + 1 == entries.len() {
        return jor_smooth(problem, params.omega, params.coarsest_iters);
    }
    let smoothed = jor_smooth(problem, params.omega, params.pre_smooth)?;
    let current = GridProblem {
        u: smoothed,
        f: problem.f.clone(),
        h: problem.h,
    };
    let r = residual(&current)?;
    let rc = restrict(&r)?;
    let (cw, ch) = rc.dims();
    let mut coarse = GridProblem {
        u: GridImage::new(cw, ch, ElementKind::F32)?,
        f: rc,
        h: 2.0 * problem.h,
    };
    for _ in 0..params.gamma {
        coarse.u = cycle_level(&coarse, params, level + 1, entries)?;
    }
    let e = prolongate(&coarse.u)?;
    if e.dims() != current.u.dims() {
        return Err(Error::invalid("prolongated correction does not match the fine grid"));
    }
    let mut corrected = current.u.clone();
    for y in 0..corrected.height() {
        for x in 0..corrected.width() {
            corrected.set(x, y, correct_at(current.u.at(x, y), e.get(x, y)?))?;
        }
    }
    let post = GridProblem {
        u: corrected,
        f: current.f,
        h: current.h,
    };
    jor_smooth(&post, params.omega, params.post_smooth)
}

/// Runs `cycles` cycles and returns the relative residual after each.
pub fn solve(problem: &mut GridProblem, params: &CycleParams, cycles: usize) -> Result<Vec<f64>> {
    let mut history = Vec::with_capacity(cycles);
    for _ in 0..cycles {
        problem.u = v_cycle(problem, params)?.u;
        history.push(relative_residual(problem)?);
    }
    Ok(history)
}
