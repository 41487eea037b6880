use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};

use super::{validate_graph, PipelineGraph, ProcessId, ProcessKind};

/// One hardware kernel configuration: a kernel at one level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KernelDescriptor {
    pub name: String,
    pub level: usize,
    pub width: usize,
    pub height: usize,
    pub ii: u64,
    pub window_radius: usize,
    pub decimation: usize,
    /// Number of graph processes sharing this configuration.
    pub instances: usize,
}

/// Text artifacts produced from a validated graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Emission {
    pub structure: String,
    /// One `process-id II=value` line per process.
    pub directives: String,
    pub dot: String,
    pub descriptors: Vec<KernelDescriptor>,
}

/// Processes in dependency order; ties broken by program position.
pub(crate) fn topological_order(g: &PipelineGraph) -> Vec<ProcessId> {
    let adj = g.adjacency();
    let np = g.processes().len();
    let mut pending: Vec<usize> = adj.inputs.iter().map(Vec::len).collect();
    let mut anchor = vec![usize::MAX; np];
    let mut heap = BinaryHeap::new();
    for p in g.processes() {
        if pending[p.id.0] == 0 {
            anchor[p.id.0] = p.event.unwrap_or(usize::MAX);
            heap.push(Reverse((anchor[p.id.0], p.id)));
        }
    }
    let mut order = Vec::with_capacity(np);
    while let Some(Reverse((key, p))) = heap.pop() {
        order.push(p);
        for &s in &adj.outputs[p.0] {
            let Some(c) = adj.consumer[s.0] else { continue };
            let derived = g.process(c).event.unwrap_or(key);
            anchor[c.0] = if anchor[c.0] == usize::MAX {
                derived
            } else {
                anchor[c.0].max(derived)
            };
            pending[c.0] -= 1;
            if pending[c.0] == 0 {
                heap.push(Reverse((anchor[c.0], c)));
            }
        }
    }
    order
}

pub fn write_dot(g: &PipelineGraph) -> String {
    let mut out = String::from("digraph pipeline {\n  rankdir=LR;\n");
    let drawn = |p: ProcessId| !matches!(g.process(p).kind, ProcessKind::Source | ProcessKind::Sink);
    for s in g.spaces() {
        let _ = writeln!(
            out,
            "  {} [shape=box, label=\"{}\\n{}x{} {}\"];",
            s.id,
            s.label(),
            s.width,
            s.height,
            s.kind.name()
        );
    }
    for p in g.processes().iter().filter(|p| drawn(p.id)) {
        let _ = writeln!(out, "  {} [shape=ellipse, label=\"{}\"];", p.id, p.label());
    }
    for p in g.processes().iter().filter(|p| drawn(p.id)) {
        for s in g.inputs(p.id) {
            let _ = writeln!(out, "  {} -> {};", s, p.id);
        }
        for s in g.outputs(p.id) {
            let _ = writeln!(out, "  {} -> {};", p.id, s);
        }
    }
    out.push_str("}\n");
    out
}

/// Validates `g` and renders the structure listing, the initiation interval
/// directives, the DOT drawing and the per-level kernel descriptors.
pub fn emit_structure(g: &PipelineGraph) -> Result<Emission> {
    validate_graph(g)
        .map_err(|diags| Error::structural(diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")))?;
    let order = topological_order(g);

    let mut structure = String::from("# mrflow stream structure\n");
    for s in g.spaces() {
        let _ = writeln!(
            structure,
            "stream {} {} {}x{} {}",
            s.id,
            s.label(),
            s.width,
            s.height,
            s.kind.name()
        );
    }
    let list = |v: Vec<super::SpaceId>| v.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",");
    let mut directives = String::new();
    let mut descriptors: Vec<KernelDescriptor> = Vec::new();
    for &id in &order {
        let p = g.process(id);
        let level = p.level.map_or("?".to_string(), |l| l.to_string());
        let _ = writeln!(
            structure,
            "invoke {} {} level={} ii={} radius={} in=({}) out=({})",
            p.ident(),
            kind_name(p.kind),
            level,
            p.ii,
            p.window_radius,
            list(g.inputs(id)),
            list(g.outputs(id))
        );
        let _ = writeln!(directives, "{} II={}", p.ident(), p.ii);

        if let (Some(k), Some(level)) = (&p.kernel, p.level) {
            if let Some(d) = descriptors.iter_mut().find(|d| d.name == k.name() && d.level == level) {
                d.instances += 1;
                continue;
            }
            let out = g.outputs(id).first().map(|&s| g.space(s).dims()).unwrap_or((0, 0));
            descriptors.push(KernelDescriptor {
                name: k.name().to_string(),
                level,
                width: out.0,
                height: out.1,
                ii: p.ii,
                window_radius: p.window_radius,
                decimation: k.decimation(),
                instances: 1,
            });
        }
    }
    Ok(Emission {
        structure,
        directives,
        dot: write_dot(g),
        descriptors,
    })
}

fn kind_name(kind: ProcessKind) -> &'static str {
    match kind {
        ProcessKind::Source => "source",
        ProcessKind::Sink => "sink",
        ProcessKind::Kernel => "kernel",
        ProcessKind::Splitter => "splitter",
        ProcessKind::Resampler => "resampler",
    }
}
