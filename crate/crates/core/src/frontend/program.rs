use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::ElementKind;

use super::kernel::{BufferId, KernelDef};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BufferDecl {
    pub id: BufferId,
    pub name: String,
    pub width: usize,
    pub height: usize,
    pub kind: ElementKind,
}

impl BufferDecl {
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }
}

#[derive(Debug, Clone)]
pub enum Event {
    Declare(BufferId),
    /// Host-to-pipeline copy of a buffer's contents.
    TransferIn {
        buffer: BufferId,
        level: usize,
    },
    /// Pipeline-to-host copy of a buffer's current contents.
    TransferOut {
        buffer: BufferId,
        level: usize,
    },
    Launch {
        kernel: KernelDef,
        level: Option<usize>,
    },
}

impl Event {
    pub fn label(&self) -> &'static str {
        match self {
            Event::Declare(_) => "declare_image",
            Event::TransferIn { .. } => "transfer_in",
            Event::TransferOut { .. } => "transfer_out",
            Event::Launch { .. } => "launch",
        }
    }
}

/// Ordered record of a buffer-wise program. Immutable once built.
#[derive(Debug, Clone, Default)]
pub struct ProgramTrace {
    buffers: Vec<BufferDecl>,
    events: Vec<Event>,
}

impl ProgramTrace {
    pub fn buffers(&self) -> &[BufferDecl] {
        &self.buffers
    }

    pub fn buffer(&self, id: BufferId) -> Option<&BufferDecl> {
        self.buffers.get(id.0)
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn launches(&self) -> impl Iterator<Item = (usize, &KernelDef, Option<usize>)> {
        self.events.iter().enumerate().filter_map(|(i, e)| match e {
            Event::Launch { kernel, level } => Some((i, kernel, *level)),
            _ => None,
        })
    }

    /// Number of writes (transfers in plus launches) targeting `id`.
    pub fn write_count(&self, id: BufferId) -> usize {
        self.events
            .iter()
            .filter(|e| match e {
                Event::TransferIn { buffer, .. } => *buffer == id,
                Event::Launch { kernel, .. } => kernel.output() == id,
                _ => false,
            })
            .count()
    }
}

/// How level dims are rounded when halving.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rounding {
    /// Image pyramids: `floor(w / 2^l)`.
    #[default]
    Floor,
    /// Vertex-centered grids: `ceil(w / 2^l)`, so `2^k + 1` stays odd.
    Ceil,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PyramidDef {
    pub base_width: usize,
    pub base_height: usize,
    pub levels: usize,
    pub kind: ElementKind,
    #[serde(default)]
    pub rounding: Rounding,
}

impl PyramidDef {
    pub fn new(base_width: usize, base_height: usize, levels: usize, kind: ElementKind) -> Self {
        Self {
            base_width,
            base_height,
            levels,
            kind,
            rounding: Rounding::Floor,
        }
    }

    pub fn rounded(mut self, rounding: Rounding) -> Self {
        self.rounding = rounding;
        self
    }

    pub fn dims(&self, level: usize) -> (usize, usize) {
        let half = |n: usize| match self.rounding {
            Rounding::Floor => n >> level,
            Rounding::Ceil => n.div_ceil(1 << level),
        };
        (half(self.base_width), half(self.base_height))
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::invalid("pyramid needs at least one level"));
        }
        let (w, h) = self.dims(self.levels - 1);
        if w == 0 || h == 0 {
            return Err(Error::invalid(format!(
                "{}x{} cannot hold {} pyramid levels",
                self.base_width, self.base_height, self.levels
            )));
        }
        Ok(())
    }
}

/// One image per resolution level, finest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pyramid {
    def: PyramidDef,
    buffers: Vec<BufferId>,
}

impl Pyramid {
    pub fn def(&self) -> &PyramidDef {
        &self.def
    }

    pub fn levels(&self) -> usize {
        self.buffers.len()
    }

    pub fn level(&self, l: usize) -> BufferId {
        self.buffers[l]
    }

    pub fn dims(&self, l: usize) -> (usize, usize) {
        self.def.dims(l)
    }
}

type Visitor<'v> = dyn Fn(&mut Traversal<'_>) -> Result<()> + 'v;

/// Handle given to a [`ProgramBuilder::traverse`] visitor for one level visit.
pub struct Traversal<'a> {
    builder: &'a mut ProgramBuilder,
    visits: &'a mut Vec<usize>,
    visitor: &'a Visitor<'a>,
    level: usize,
    levels: usize,
    gamma: usize,
}

impl<'a> Traversal<'a> {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn is_coarsest(&self) -> bool {
        self.level + 1 == self.levels
    }

    pub fn builder(&mut self) -> &mut ProgramBuilder {
        self.builder
    }

    /// Records `kernel` at the current level.
    pub fn launch(&mut self, kernel: KernelDef) -> Result<()> {
        self.builder.record_launch(kernel, Some(self.level))
    }

    /// Visits the next coarser level `gamma` times. No-op on the coarsest level.
    pub fn descend(&mut self) -> Result<()> {
        if self.is_coarsest() {
            return Ok(());
        }
        for _ in 0..self.gamma {
            let mut next = Traversal {
                builder: &mut *self.builder,
                visits: &mut *self.visits,
                visitor: self.visitor,
                level: self.level + 1,
                levels: self.levels,
                gamma: self.gamma,
            };
            next.visit()?;
        }
        Ok(())
    }

    fn visit(&mut self) -> Result<()> {
        self.visits[self.level] += 1;
        (self.visitor)(self)
    }
}

/// Records a buffer-wise program into a [`ProgramTrace`].
#[derive(Debug, Default)]
pub struct ProgramBuilder {
    trace: ProgramTrace,
}

impl ProgramBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare_image(&mut self, width: usize, height: usize, kind: ElementKind) -> Result<BufferId> {
        let name = format!("buf{}", self.trace.buffers.len());
        self.declare_named(name, width, height, kind)
    }

    pub fn declare_named(
        &mut self,
        name: impl Into<String>,
        width: usize,
        height: usize,
        kind: ElementKind,
    ) -> Result<BufferId> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!("image dims must be >= 1, got {width}x{height}")));
        }
        let id = BufferId(self.trace.buffers.len());
        self.trace.buffers.push(BufferDecl {
            id,
            name: name.into(),
            width,
            height,
            kind,
        });
        self.trace.events.push(Event::Declare(id));
        Ok(id)
    }

    fn check_declared(&self, id: BufferId) -> Result<()> {
        if self.trace.buffer(id).is_none() {
            return Err(Error::DanglingReference(format!("buffer {id} was never declared")));
        }
        Ok(())
    }

    pub fn transfer_in(&mut self, buffer: BufferId) -> Result<()> {
        self.transfer_in_at(buffer, 0)
    }

    pub fn transfer_in_at(&mut self, buffer: BufferId, level: usize) -> Result<()> {
        self.check_declared(buffer)?;
        self.trace.events.push(Event::TransferIn { buffer, level });
        Ok(())
    }

    pub fn transfer_out(&mut self, buffer: BufferId) -> Result<()> {
        self.transfer_out_at(buffer, 0)
    }

    pub fn transfer_out_at(&mut self, buffer: BufferId, level: usize) -> Result<()> {
        self.check_declared(buffer)?;
        self.trace.events.push(Event::TransferOut { buffer, level });
        Ok(())
    }

    /// Appends a kernel launch. Nothing is computed.
    pub fn record_launch(&mut self, kernel: KernelDef, level: Option<usize>) -> Result<()> {
        kernel.check_shape()?;
        self.check_declared(kernel.output())?;
        for acc in kernel.inputs() {
            self.check_declared(acc.buffer)?;
            if acc.buffer == kernel.output() {
                return Err(Error::Alias(format!(
                    "kernel {} writes buffer {} that it also reads",
                    kernel.name(),
                    acc.buffer
                )));
            }
        }
        self.trace.events.push(Event::Launch { kernel, level });
        Ok(())
    }

    pub fn declare_pyramid(&mut self, name: &str, def: PyramidDef) -> Result<Pyramid> {
        def.validate()?;
        let buffers = (0..def.levels)
            .map(|l| {
                let (w, h) = def.dims(l);
                self.declare_named(format!("{name}{l}"), w, h, def.kind)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Pyramid { def, buffers })
    }

    /// Unrolls a recursive level traversal starting at level 0. Each
    /// [`Traversal::descend`] visits the next level `gamma` times, so level
    /// `l` is visited `gamma^l` times. Returns the per-level visit counts.
    pub fn traverse(
        &mut self,
        pyramids: &[&Pyramid],
        gamma: usize,
        visitor: &dyn Fn(&mut Traversal<'_>) -> Result<()>,
    ) -> Result<Vec<usize>> {
        let levels = pyramids
            .first()
            .ok_or_else(|| Error::invalid("traverse needs at least one pyramid"))?
            .levels();
        if pyramids.iter().any(|p| p.levels() != levels) {
            return Err(Error::invalid(
                "pyramids passed to traverse have different level counts",
            ));
        }
        if !(1..=2).contains(&gamma) {
            return Err(Error::invalid(format!("recursion count must be 1 or 2, got {gamma}")));
        }
        let mut visits = vec![0; levels];
        let mut root = Traversal {
            builder: self,
            visits: &mut visits,
            visitor,
            level: 0,
            levels,
            gamma,
        };
        root.visit()?;
        Ok(visits)
    }

    pub fn trace(&self) -> &ProgramTrace {
        &self.trace
    }

    pub fn finish(self) -> ProgramTrace {
        self.trace
    }
}
