//! Image files (binary PGM and little-endian PFM) and text artifacts.

mod pnm;

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::PipelineGraph;
use crate::image::{ElementKind, GridImage};
use crate::sim::SimReport;

pub use pnm::{read_pfm, read_pgm, write_pfm, write_pgm};

/// Reads a PGM or PFM file, chosen by its magic number.
pub fn load_image(path: &Path) -> Result<GridImage> {
    let bytes = fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    match bytes.get(..2) {
        Some(b"P5") => read_pgm(&bytes),
        Some(b"Pf") | Some(b"PF") => read_pfm(&bytes),
        _ => Err(Error::Parse {
            offset: 0,
            message: format!("{}: not a P5 or Pf file", path.display()),
        }),
    }
}

/// Writes `u8` images as PGM and `f32` images as PFM.
pub fn save_image(path: &Path, image: &GridImage) -> Result<()> {
    let bytes = match image.kind() {
        ElementKind::U8 => write_pgm(image)?,
        ElementKind::F32 => write_pfm(image),
    };
    write_bytes(path, &bytes)
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn write_dot(path: &Path, graph: &PipelineGraph) -> Result<()> {
    write_bytes(path, crate::graph::write_dot(graph).as_bytes())
}

pub fn write_report(path: &Path, report: &SimReport) -> Result<()> {
    write_bytes(path, report.to_json().as_bytes())
}
