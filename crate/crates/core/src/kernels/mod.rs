//! Reference numerical kernels for the two multiresolution case studies.
//!
//! Every kernel is written as a per-pixel routine over a [`Neighborhood`]
//! plus a whole-image driver. The DSL point functions in
//! [`crate::frontend::points`] call the same per-pixel routines, so buffer-wise
//! and streamed execution evaluate identical arithmetic.

pub mod bilateral;
pub mod boundary;
pub mod multigrid;
pub mod pyramid;
pub mod resample;
pub mod stencil;

pub use bilateral::{bilateral, bilateral_at, BilateralParams};
pub use boundary::{map_boundary, BoundaryMode};
pub use multigrid::{
    correct_at, jor_at, jor_smooth, prolongate, relative_residual, residual, residual_at, restrict, solve, v_cycle,
    CycleOutcome, CycleParams, GridProblem,
};
pub use pyramid::{laplacian_detail, reconstruct, reconstruct_into, FusionMode};
pub use resample::{resample, resample_at, scale_between, upsample, Interp, ResampledPlane, Scale};
pub use stencil::{apply_stencil, decompose, decompose_to, stencil_at, Neighborhood};
