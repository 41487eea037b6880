//! Builder API for buffer-wise multiresolution programs.
//!
//! A program declares images and pyramids, copies data in and out, and
//! launches kernels. Launches are recorded in order into a [`ProgramTrace`];
//! nothing is executed here.

mod kernel;
mod mask;
pub mod points;
mod program;
mod validate;

pub use kernel::{AccessorDef, BufferId, KernelDef, PointFn, Window};
pub use mask::MaskDef;
pub use program::{BufferDecl, Event, ProgramBuilder, ProgramTrace, Pyramid, PyramidDef, Rounding, Traversal};
pub use validate::{validate_program, Diagnostic};

pub use crate::kernels::{BoundaryMode, Interp};
