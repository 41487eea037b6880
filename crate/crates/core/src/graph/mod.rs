//! Streaming intermediate representation: a bipartite graph of *spaces*
//! (stream buffers) and *processes* (kernels, splitters, resamplers, sources
//! and sinks).

mod build;
mod emit;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontend::{BufferId, KernelDef};
use crate::image::ElementKind;
use crate::kernels::{BoundaryMode, Interp};

pub use build::{assign_initiation_intervals, build_ssa_graph, compile, insert_resamplers, insert_splitters};
pub use emit::{emit_structure, write_dot, Emission, KernelDescriptor};
pub use validate::{validate_graph, GraphDiagnostic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpaceId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProcessId(pub usize);

impl fmt::Display for SpaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

impl fmt::Display for ProcessId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceNode {
    pub id: SpaceId,
    pub origin: BufferId,
    /// Buffer name from the program.
    pub name: String,
    /// Write number of the origin buffer this space carries.
    pub ssa_index: usize,
    /// Splitter branch, when this space is one copy of a shared stream.
    pub branch: Option<usize>,
    /// True for spaces created behind a resampler.
    pub resampled: bool,
    pub width: usize,
    pub height: usize,
    pub kind: ElementKind,
}

impl SpaceNode {
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn tokens(&self) -> usize {
        self.width * self.height
    }

    /// Display label such as `tmp#1.b0~`.
    pub fn label(&self) -> String {
        let mut s = format!("{}#{}", self.name, self.ssa_index);
        if let Some(b) = self.branch {
            s.push_str(&format!(".b{b}"));
        }
        if self.resampled {
            s.push('~');
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProcessKind {
    Source,
    Sink,
    Kernel,
    Splitter,
    Resampler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResampleSpec {
    pub interp: Interp,
    pub from: (usize, usize),
    pub to: (usize, usize),
}

/// Timing-relevant part of a kernel: how far each input is read around the
/// output position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelShape {
    pub decimation: usize,
    pub radii: Vec<usize>,
    pub boundaries: Vec<BoundaryMode>,
}

impl KernelShape {
    pub fn of(kernel: &KernelDef) -> Self {
        Self {
            decimation: kernel.decimation(),
            radii: kernel.window_radius().to_vec(),
            boundaries: kernel.inputs().iter().map(|a| a.boundary).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProcessNode {
    pub id: ProcessId,
    pub kind: ProcessKind,
    pub name: String,
    /// Point function; absent for graphs loaded from JSON.
    #[serde(skip)]
    pub kernel: Option<KernelDef>,
    pub shape: Option<KernelShape>,
    pub resample: Option<ResampleSpec>,
    pub level: Option<usize>,
    /// Initiation interval in cycles.
    pub ii: u64,
    pub window_radius: usize,
    /// Input tokens consumed before the first output.
    pub prologue: usize,
    /// Trace event that created this process, if any.
    pub event: Option<usize>,
    /// Host buffer of a source or sink.
    pub buffer: Option<BufferId>,
}

impl ProcessNode {
    fn new(id: ProcessId, kind: ProcessKind, name: impl Into<String>) -> Self {
        Self {
            id,
            kind,
            name: name.into(),
            kernel: None,
            shape: None,
            resample: None,
            level: None,
            ii: 1,
            window_radius: 0,
            prologue: 0,
            event: None,
            buffer: None,
        }
    }

    /// Stable identifier used in emitted artifacts, e.g. `p7_bilateral`.
    pub fn ident(&self) -> String {
        format!("{}_{}", self.id, self.name)
    }

    pub fn label(&self) -> String {
        match self.level {
            Some(l) => format!("{}@{} ii={}", self.name, l, self.ii),
            None => format!("{}@? ii={}", self.name, self.ii),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeRef {
    Space(SpaceId),
    Process(ProcessId),
}

/// Directed edge. `port` is the input slot of the consuming process for
/// space-to-process edges and the output slot for process-to-space edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub from: NodeRef,
    pub to: NodeRef,
    pub port: usize,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PipelineGraph {
    spaces: Vec<SpaceNode>,
    processes: Vec<ProcessNode>,
    edges: Vec<Edge>,
}

impl PipelineGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serializes")
    }

    /// Loads a graph written by [`PipelineGraph::to_json`]. Kernel point
    /// functions are not stored, so the result supports timing simulation only.
    pub fn from_json(text: &str) -> Result<Self> {
        let g: Self = serde_json::from_str(text).map_err(|e| Error::Parse {
            offset: e.column(),
            message: format!("graph json line {}: {e}", e.line()),
        })?;
        if g.spaces.iter().enumerate().any(|(i, s)| s.id.0 != i)
            || g.processes.iter().enumerate().any(|(i, p)| p.id.0 != i)
        {
            return Err(Error::invalid("graph json node ids must equal their positions"));
        }
        Ok(g)
    }

    pub fn spaces(&self) -> &[SpaceNode] {
        &self.spaces
    }

    pub fn processes(&self) -> &[ProcessNode] {
        &self.processes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn space(&self, id: SpaceId) -> &SpaceNode {
        &self.spaces[id.0]
    }

    pub fn process(&self, id: ProcessId) -> &ProcessNode {
        &self.processes[id.0]
    }

    pub fn process_mut(&mut self, id: ProcessId) -> &mut ProcessNode {
        &mut self.processes[id.0]
    }

    /// Adds a space; `id` is overwritten with the assigned index.
    pub fn add_space(&mut self, mut space: SpaceNode) -> SpaceId {
        let id = SpaceId(self.spaces.len());
        space.id = id;
        self.spaces.push(space);
        id
    }

    pub fn add_process(&mut self, kind: ProcessKind, name: impl Into<String>, level: Option<usize>) -> ProcessId {
        let id = ProcessId(self.processes.len());
        let mut p = ProcessNode::new(id, kind, name);
        p.level = level;
        self.processes.push(p);
        id
    }

    /// Adds an edge without checking it; [`validate_graph`] reports misuse.
    pub fn add_edge(&mut self, from: NodeRef, to: NodeRef, port: usize) {
        self.edges.push(Edge { from, to, port });
    }

    pub fn connect_input(&mut self, space: SpaceId, process: ProcessId, port: usize) {
        self.add_edge(NodeRef::Space(space), NodeRef::Process(process), port);
    }

    pub fn connect_output(&mut self, process: ProcessId, space: SpaceId, port: usize) {
        self.add_edge(NodeRef::Process(process), NodeRef::Space(space), port);
    }

    /// Processes reading `space`, with their input port.
    pub fn consumers(&self, space: SpaceId) -> Vec<(ProcessId, usize)> {
        self.edges
            .iter()
            .filter_map(|e| match (e.from, e.to) {
                (NodeRef::Space(s), NodeRef::Process(p)) if s == space => Some((p, e.port)),
                _ => None,
            })
            .collect()
    }

    /// Processes writing `space`, with their output port.
    pub fn producers(&self, space: SpaceId) -> Vec<(ProcessId, usize)> {
        self.edges
            .iter()
            .filter_map(|e| match (e.from, e.to) {
                (NodeRef::Process(p), NodeRef::Space(s)) if s == space => Some((p, e.port)),
                _ => None,
            })
            .collect()
    }

    /// Input spaces of `process` ordered by port.
    pub fn inputs(&self, process: ProcessId) -> Vec<SpaceId> {
        let mut v: Vec<(usize, SpaceId)> = self
            .edges
            .iter()
            .filter_map(|e| match (e.from, e.to) {
                (NodeRef::Space(s), NodeRef::Process(p)) if p == process => Some((e.port, s)),
                _ => None,
            })
            .collect();
        v.sort();
        v.into_iter().map(|(_, s)| s).collect()
    }

    /// Output spaces of `process` ordered by port.
    pub fn outputs(&self, process: ProcessId) -> Vec<SpaceId> {
        let mut v: Vec<(usize, SpaceId)> = self
            .edges
            .iter()
            .filter_map(|e| match (e.from, e.to) {
                (NodeRef::Process(p), NodeRef::Space(s)) if p == process => Some((e.port, s)),
                _ => None,
            })
            .collect();
        v.sort();
        v.into_iter().map(|(_, s)| s).collect()
    }

    pub fn count_kind(&self, kind: ProcessKind) -> usize {
        self.processes.iter().filter(|p| p.kind == kind).count()
    }

    fn remove_edge(&mut self, edge: Edge) {
        if let Some(i) = self.edges.iter().position(|e| *e == edge) {
            self.edges.remove(i);
        }
    }

    /// Precomputed port-ordered adjacency for hot loops.
    pub fn adjacency(&self) -> Adjacency {
        let mut ins = vec![Vec::new(); self.processes.len()];
        let mut outs = vec![Vec::new(); self.processes.len()];
        let mut producer = vec![None; self.spaces.len()];
        let mut consumer = vec![None; self.spaces.len()];
        for e in &self.edges {
            match (e.from, e.to) {
                (NodeRef::Space(s), NodeRef::Process(p)) => {
                    ins[p.0].push((e.port, s));
                    consumer[s.0] = Some(p);
                }
                (NodeRef::Process(p), NodeRef::Space(s)) => {
                    outs[p.0].push((e.port, s));
                    producer[s.0] = Some(p);
                }
                _ => {}
            }
        }
        let strip = |mut v: Vec<(usize, SpaceId)>| {
            v.sort();
            v.into_iter().map(|(_, s)| s).collect::<Vec<_>>()
        };
        Adjacency {
            inputs: ins.into_iter().map(strip).collect(),
            outputs: outs.into_iter().map(strip).collect(),
            producer,
            consumer,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Adjacency {
    pub inputs: Vec<Vec<SpaceId>>,
    pub outputs: Vec<Vec<SpaceId>>,
    pub producer: Vec<Option<ProcessId>>,
    pub consumer: Vec<Option<ProcessId>>,
}
