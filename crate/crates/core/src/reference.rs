//! Buffer-wise execution: kernels run one after another, each fully
//! materializing its output before the next starts.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frontend::{BufferId, Event, ProgramTrace};
use crate::image::{ElementKind, GridImage, Plane};
use crate::kernels::ResampledPlane;

/// Images bound to the program's `transfer_in` buffers.
pub type Inputs = HashMap<BufferId, GridImage>;

/// Contents of a buffer at one `transfer_out` event.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferOutput {
    pub event: usize,
    pub buffer: BufferId,
    pub image: GridImage,
}

/// Runs `trace` in program order and returns the images bound to its
/// `transfer_out` events, in trace order.
pub fn run_bufferwise(trace: &ProgramTrace, inputs: &Inputs) -> Result<Vec<TransferOutput>> {
    let mut store: HashMap<BufferId, GridImage> = HashMap::new();
    let mut outputs = Vec::new();
    for (i, event) in trace.events().iter().enumerate() {
        match event {
            Event::Declare(_) => {}
            Event::TransferIn { buffer, .. } => {
                let decl = trace
                    .buffer(*buffer)
                    .ok_or_else(|| Error::DanglingReference(format!("buffer {buffer}")).at_event(i))?;
                let image = inputs
                    .get(buffer)
                    .ok_or_else(|| Error::invalid(format!("no input image for buffer {buffer}")).at_event(i))?;
                if image.dims() != decl.dims() || image.kind() != decl.kind {
                    return Err(Error::invalid(format!(
                        "input for {buffer} is {}x{} {}, declared {}x{} {}",
                        image.width(),
                        image.height(),
                        image.kind().name(),
                        decl.width,
                        decl.height,
                        decl.kind.name()
                    ))
                    .at_event(i));
                }
                store.insert(*buffer, image.clone());
            }
            Event::TransferOut { buffer, .. } => {
                let image = store.get(buffer).ok_or_else(|| {
                    Error::DanglingReference(format!("buffer {buffer} read before write")).at_event(i)
                })?;
                outputs.push(TransferOutput {
                    event: i,
                    buffer: *buffer,
                    image: image.clone(),
                });
            }
            Event::Launch { kernel, .. } => {
                let image = execute_launch(trace, &store, kernel).map_err(|e| e.at_event(i))?;
                store.insert(kernel.output(), image);
            }
        }
    }
    Ok(outputs)
}

fn execute_launch(
    trace: &ProgramTrace,
    store: &HashMap<BufferId, GridImage>,
    kernel: &crate::frontend::KernelDef,
) -> Result<GridImage> {
    let out = trace
        .buffer(kernel.output())
        .ok_or_else(|| Error::DanglingReference(format!("buffer {}", kernel.output())))?;
    let dims = out.dims();
    let mut resampled = Vec::new();
    let mut direct = Vec::new();
    for (slot, acc) in kernel.inputs().iter().enumerate() {
        let image = store
            .get(&acc.buffer)
            .ok_or_else(|| Error::DanglingReference(format!("buffer {} read before write", acc.buffer)))?;
        if kernel.reads_directly(image.dims(), dims) {
            direct.push((slot, image));
        } else {
            let view = ResampledPlane::new(image, image.kind(), acc.interp, kernel.resample_target(dims))?;
            resampled.push((slot, view));
        }
    }
    let mut planes: Vec<Option<&dyn Plane>> = vec![None; kernel.inputs().len()];
    for (slot, image) in &direct {
        planes[*slot] = Some(*image as &dyn Plane);
    }
    for (slot, view) in &resampled {
        planes[*slot] = Some(view as &dyn Plane);
    }
    let planes: Vec<&dyn Plane> = planes.into_iter().map(|p| p.expect("every slot bound")).collect();

    let mut result = GridImage::new(dims.0, dims.1, out.kind)?;
    for y in 0..dims.1 {
        for x in 0..dims.0 {
            let v = kernel.evaluate(&planes, dims, x, y)?;
            result.set(x, y, v)?;
        }
    }
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub max_abs: f64,
    /// Largest `|a - b| / max(|a|, |b|, 1)`.
    pub max_rel: f64,
    pub elementwise_equal: bool,
    /// First differing pixel in raster order.
    pub first_mismatch: Option<(usize, usize)>,
    pub kind: ElementKind,
}

impl CompareReport {
    /// Exact equality for `u8`, relative tolerance for `f32`.
    pub fn matches(&self, f32_tolerance: f64) -> bool {
        match self.kind {
            ElementKind::U8 => self.elementwise_equal,
            ElementKind::F32 => self.max_rel <= f32_tolerance,
        }
    }
}

pub fn compare_outputs(a: &GridImage, b: &GridImage) -> Result<CompareReport> {
    if a.dims() != b.dims() {
        return Err(Error::invalid(format!(
            "cannot compare {}x{} with {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    if a.kind() != b.kind() {
        return Err(Error::invalid("cannot compare images of different element kinds"));
    }
    let mut report = CompareReport {
        max_abs: 0.0,
        max_rel: 0.0,
        elementwise_equal: true,
        first_mismatch: None,
        kind: a.kind(),
    };
    for (i, (&x, &y)) in a.samples().iter().zip(b.samples()).enumerate() {
        if x != y {
            report.elementwise_equal = false;
            if report.first_mismatch.is_none() {
                report.first_mismatch = Some((i % a.width(), i / a.width()));
            }
        }
        let (x, y) = (x as f64, y as f64);
        let abs = (x - y).abs();
        report.max_abs = report.max_abs.max(abs);
        report.max_rel = report.max_rel.max(abs / x.abs().max(y.abs()).max(1.0));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_buffers() {
        let a = GridImage::filled(3, 3, ElementKind::F32, 1.5).unwrap();
        let r = compare_outputs(&a, &a).unwrap();
        assert_eq!(r.max_abs, 0.0);
        assert!(r.elementwise_equal && r.matches(0.0));
    }

    #[test]
    fn tiny_f32_difference_passes_threshold() {
        let a = GridImage::filled(2, 2, ElementKind::F32, 100.0).unwrap();
        let b = GridImage::filled(2, 2, ElementKind::F32, 100.0 * (1.0 + 1e-7)).unwrap();
        let r = compare_outputs(&a, &b).unwrap();
        assert!(r.max_rel < 1e-5);
        assert!(r.matches(1e-5));
    }

    #[test]
    fn u8_single_pixel_difference() {
        let a = GridImage::from_u8(3, 2, &[1, 2, 3, 4, 5, 6]).unwrap();
        let b = GridImage::from_u8(3, 2, &[1, 2, 3, 4, 9, 6]).unwrap();
        let r = compare_outputs(&a, &b).unwrap();
        assert!(!r.elementwise_equal);
        assert_eq!(r.first_mismatch, Some((1, 1)));
        assert!(!r.matches(1.0));
    }

    #[test]
    fn dims_mismatch() {
        let a = GridImage::new(2, 2, ElementKind::U8).unwrap();
        let b = GridImage::new(2, 3, ElementKind::U8).unwrap();
        assert!(compare_outputs(&a, &b).is_err());
    }
}
