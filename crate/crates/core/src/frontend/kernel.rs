use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Plane;
use crate::kernels::{BoundaryMode, Interp, Neighborhood};

use super::MaskDef;

/// Handle to a buffer declared in a program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BufferId(pub usize);

impl fmt::Display for BufferId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// How a kernel reads one of its input buffers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessorDef {
    pub buffer: BufferId,
    pub boundary: BoundaryMode,
    pub interp: Interp,
}

impl AccessorDef {
    pub fn new(buffer: BufferId) -> Self {
        Self {
            buffer,
            boundary: BoundaryMode::Clamp,
            interp: Interp::None,
        }
    }

    pub fn boundary(mut self, mode: BoundaryMode) -> Self {
        self.boundary = mode;
        self
    }

    pub fn interp(mut self, interp: Interp) -> Self {
        self.interp = interp;
        self
    }
}

/// What a point function sees for one output sample.
pub struct Window<'a> {
    x: usize,
    y: usize,
    dims: (usize, usize),
    inputs: &'a [Neighborhood<'a>],
    mask: Option<&'a MaskDef>,
}

impl<'a> Window<'a> {
    pub fn x(&self) -> usize {
        self.x
    }

    pub fn y(&self) -> usize {
        self.y
    }

    /// Iteration-space dims.
    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn input(&self, i: usize) -> Result<&Neighborhood<'a>> {
        self.inputs
            .get(i)
            .ok_or_else(|| Error::invalid(format!("kernel has no input {i}")))
    }

    pub fn mask(&self) -> Result<&MaskDef> {
        self.mask.ok_or_else(|| Error::invalid("kernel has no mask"))
    }
}

pub type PointFn = Arc<dyn Fn(&Window<'_>) -> Result<f32> + Send + Sync>;

/// A kernel launch description: accessors, output iteration space and the
/// pure per-sample computation.
#[derive(Clone)]
pub struct KernelDef {
    name: String,
    inputs: Vec<AccessorDef>,
    window_radius: Vec<usize>,
    output: BufferId,
    decimation: usize,
    mask: Option<MaskDef>,
    point: PointFn,
}

impl fmt::Debug for KernelDef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KernelDef")
            .field("name", &self.name)
            .field("inputs", &self.inputs)
            .field("window_radius", &self.window_radius)
            .field("output", &self.output)
            .field("decimation", &self.decimation)
            .field("mask", &self.mask.as_ref().map(|m| m.radius()))
            .finish()
    }
}

impl KernelDef {
    pub fn new(name: impl Into<String>, output: BufferId, point: PointFn) -> Self {
        Self {
            name: name.into(),
            inputs: Vec::new(),
            window_radius: Vec::new(),
            output,
            decimation: 1,
            mask: None,
            point,
        }
    }

    /// Adds an input read through `accessor` with a `(2r+1)^2` window.
    pub fn input(mut self, accessor: AccessorDef, radius: usize) -> Self {
        self.inputs.push(accessor);
        self.window_radius.push(radius);
        self
    }

    pub fn mask(mut self, mask: MaskDef) -> Self {
        self.mask = Some(mask);
        self
    }

    /// Output is subsampled by `factor` in each dimension (1 or 2).
    pub fn decimate(mut self, factor: usize) -> Self {
        self.decimation = factor;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn inputs(&self) -> &[AccessorDef] {
        &self.inputs
    }

    pub fn window_radius(&self) -> &[usize] {
        &self.window_radius
    }

    pub fn max_radius(&self) -> usize {
        self.window_radius.iter().copied().max().unwrap_or(0)
    }

    pub fn output(&self) -> BufferId {
        self.output
    }

    pub fn decimation(&self) -> usize {
        self.decimation
    }

    pub fn mask_def(&self) -> Option<&MaskDef> {
        self.mask.as_ref()
    }

    pub(crate) fn check_shape(&self) -> Result<()> {
        if !(1..=2).contains(&self.decimation) {
            return Err(Error::invalid(format!(
                "kernel {}: decimation must be 1 or 2, got {}",
                self.name, self.decimation
            )));
        }
        if let Some(mask) = &self.mask {
            if self.max_radius() != mask.radius() {
                return Err(Error::invalid(format!(
                    "kernel {}: window radius {} inconsistent with mask radius {}",
                    self.name,
                    self.max_radius(),
                    mask.radius()
                )));
            }
        }
        Ok(())
    }

    /// Whether an input of `input` dims is read directly by an iteration
    /// space of `output` dims, without a resampling filter.
    pub fn reads_directly(&self, input: (usize, usize), output: (usize, usize)) -> bool {
        match self.decimation {
            1 => input == output,
            _ => {
                let halves = |n: usize, m: usize| m == n / 2 || m == n.div_ceil(2);
                halves(input.0, output.0) && halves(input.1, output.1)
            }
        }
    }

    /// Dims an input must be resampled to when it is not read directly.
    pub fn resample_target(&self, output: (usize, usize)) -> (usize, usize) {
        (output.0 * self.decimation, output.1 * self.decimation)
    }

    /// Evaluates the point function at output `(x, y)`. `planes[i]` must
    /// already present input `i` at directly readable dims.
    pub fn evaluate(&self, planes: &[&dyn Plane], out_dims: (usize, usize), x: usize, y: usize) -> Result<f32> {
        let (cx, cy) = (x * self.decimation, y * self.decimation);
        let hoods: Vec<Neighborhood<'_>> = planes
            .iter()
            .zip(&self.inputs)
            .zip(&self.window_radius)
            .map(|((p, acc), &r)| Neighborhood::new(*p, acc.boundary, cx, cy).with_limit(r))
            .collect();
        let window = Window {
            x,
            y,
            dims: out_dims,
            inputs: &hoods,
            mask: self.mask.as_ref(),
        };
        (self.point)(&window)
    }
}
