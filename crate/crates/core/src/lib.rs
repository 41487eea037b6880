//! Compile buffer-wise multiresolution image and grid programs into streaming
//! dataflow pipelines, and simulate them as networks of bounded FIFOs.
//!
//! The crate is organized along the flow of a program:
//!
//! - [`frontend`] records images, pyramids and kernel launches into a trace.
//! - [`graph`] turns the trace into a bipartite space/process graph with SSA
//!   buffers, splitters, resamplers and per-level initiation intervals.
//! - [`sim`] runs that graph cycle by cycle to measure latency, FIFO depths
//!   and deadlocks, optionally carrying sample values.
//! - [`reference`] executes the trace buffer by buffer as the semantic oracle.
//! - [`kernels`] holds the numerical building blocks.
//! - [`io`] and [`studies`] provide file formats and the packaged case studies.

pub mod error;
pub mod frontend;
pub mod graph;
pub mod image;
pub mod io;
pub mod kernels;
pub mod reference;
pub mod sim;
pub mod studies;

pub use error::{Error, Result};
pub use image::{ElementKind, GridImage, Plane};
