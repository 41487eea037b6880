use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::frontend::{BufferId, Event, ProgramTrace};
use crate::kernels::{scale_between, Interp};
use crate::sim::prologue_of;

use super::{validate_graph, NodeRef, PipelineGraph, ProcessId, ProcessKind, ResampleSpec, SpaceId, SpaceNode};

/// Translates a trace into a bipartite graph with one space per buffer write.
/// Values that are never read get a `discard` sink.
pub fn build_ssa_graph(trace: &ProgramTrace) -> Result<PipelineGraph> {
    let mut g = PipelineGraph::new();
    let mut current: HashMap<BufferId, SpaceId> = HashMap::new();
    let mut writes: HashMap<BufferId, usize> = HashMap::new();

    let mut new_version = |g: &mut PipelineGraph, buffer: BufferId, event: usize| -> Result<SpaceId> {
        let decl = trace
            .buffer(buffer)
            .ok_or_else(|| Error::DanglingReference(format!("buffer {buffer} was never declared")).at_event(event))?;
        let n = writes.entry(buffer).or_insert(0);
        let space = SpaceNode {
            id: SpaceId(0),
            origin: buffer,
            name: decl.name.clone(),
            ssa_index: *n,
            branch: None,
            resampled: false,
            width: decl.width,
            height: decl.height,
            kind: decl.kind,
        };
        *n += 1;
        Ok(g.add_space(space))
    };

    for (i, event) in trace.events().iter().enumerate() {
        match event {
            Event::Declare(_) => {}
            Event::TransferIn { buffer, level } => {
                let p = g.add_process(ProcessKind::Source, "source", Some(*level));
                g.process_mut(p).event = Some(i);
                g.process_mut(p).buffer = Some(*buffer);
                let s = new_version(&mut g, *buffer, i)?;
                g.connect_output(p, s, 0);
                current.insert(*buffer, s);
            }
            Event::TransferOut { buffer, level } => {
                let s = *current.get(buffer).ok_or_else(|| {
                    Error::DanglingReference(format!("uninitialized read of buffer {buffer}")).at_event(i)
                })?;
                let p = g.add_process(ProcessKind::Sink, "sink", Some(*level));
                g.process_mut(p).event = Some(i);
                g.process_mut(p).buffer = Some(*buffer);
                g.connect_input(s, p, 0);
            }
            Event::Launch { kernel, level } => {
                let mut reads = Vec::with_capacity(kernel.inputs().len());
                for acc in kernel.inputs() {
                    let s = *current.get(&acc.buffer).ok_or_else(|| {
                        Error::DanglingReference(format!("uninitialized read of buffer {}", acc.buffer)).at_event(i)
                    })?;
                    reads.push(s);
                }
                let p = g.add_process(ProcessKind::Kernel, kernel.name(), *level);
                {
                    let node = g.process_mut(p);
                    node.kernel = Some(kernel.clone());
                    node.shape = Some(super::KernelShape::of(kernel));
                    node.event = Some(i);
                    node.window_radius = kernel.max_radius();
                }
                for (port, s) in reads.into_iter().enumerate() {
                    g.connect_input(s, p, port);
                }
                let out = new_version(&mut g, kernel.output(), i)?;
                g.connect_output(p, out, 0);
                current.insert(kernel.output(), out);
            }
        }
    }

    let dead: Vec<SpaceId> = g
        .spaces()
        .iter()
        .map(|s| s.id)
        .filter(|&s| g.consumers(s).is_empty())
        .collect();
    for s in dead {
        let level = g.producers(s).first().and_then(|&(p, _)| g.process(p).level);
        let p = g.add_process(ProcessKind::Sink, "discard", level);
        g.connect_input(s, p, 0);
    }
    Ok(g)
}

/// Gives every multiply-read space a splitter with one branch per reader,
/// branches ordered by the reader's position in the program. Returns the
/// number of splitters added.
pub fn insert_splitters(g: &mut PipelineGraph) -> Result<usize> {
    let mut added = 0;
    let n = g.spaces().len();
    for s in (0..n).map(SpaceId) {
        let mut readers = g.consumers(s);
        if readers.len() < 2 {
            continue;
        }
        readers.sort_by_key(|&(p, port)| (g.process(p).event.unwrap_or(usize::MAX), p, port));
        let level = g.producers(s).first().and_then(|&(p, _)| g.process(p).level);
        let split = g.add_process(ProcessKind::Splitter, "split", level);
        for (branch, &(reader, port)) in readers.iter().enumerate() {
            g.remove_edge(super::Edge {
                from: NodeRef::Space(s),
                to: NodeRef::Process(reader),
                port,
            });
            let mut copy = g.space(s).clone();
            copy.branch = Some(branch);
            let b = g.add_space(copy);
            g.connect_output(split, b, branch);
            g.connect_input(b, reader, port);
        }
        g.connect_input(s, split, 0);
        added += 1;
    }
    Ok(added)
}

/// Places a resampler on every kernel input whose size differs from the
/// iteration space. Already-matching inputs are left alone, so a second call
/// adds nothing. Returns the number of resamplers added.
pub fn insert_resamplers(g: &mut PipelineGraph) -> Result<usize> {
    let mut added = 0;
    let edges: Vec<_> = g.edges().to_vec();
    for e in edges {
        let (NodeRef::Space(s), NodeRef::Process(p)) = (e.from, e.to) else {
            continue;
        };
        let node = g.process(p);
        let Some(kernel) = node.kernel.clone() else {
            continue;
        };
        let Some(&out) = g.outputs(p).first() else {
            return Err(Error::structural(format!(
                "kernel {} has no output space",
                node.ident()
            )));
        };
        let src = g.space(s).dims();
        let dst = g.space(out).dims();
        if kernel.reads_directly(src, dst) {
            continue;
        }
        let acc = kernel
            .inputs()
            .get(e.port)
            .ok_or_else(|| Error::structural(format!("kernel {} has no input port {}", kernel.name(), e.port)))?;
        let target = kernel.resample_target(dst);
        if scale_between(src, target).is_none() {
            return Err(Error::structural(format!(
                "kernel {}: input {}x{} and iteration space {}x{} differ by a non power-of-two factor",
                kernel.name(),
                src.0,
                src.1,
                dst.0,
                dst.1
            )));
        }
        if acc.interp == Interp::None {
            return Err(Error::structural(format!(
                "kernel {}: input {}x{} must be resampled to {}x{} but no filtering mode is set",
                kernel.name(),
                src.0,
                src.1,
                target.0,
                target.1
            )));
        }
        let producer_level = g.producers(s).first().and_then(|&(q, _)| g.process(q).level);
        let level = match (producer_level, node.level) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        let r = g.add_process(ProcessKind::Resampler, format!("resample_{}", acc.interp.name()), level);
        {
            let rn = g.process_mut(r);
            rn.resample = Some(ResampleSpec {
                interp: acc.interp,
                from: src,
                to: target,
            });
            rn.window_radius = usize::from(acc.interp == Interp::Bilinear);
        }
        let mut resized = g.space(s).clone();
        resized.width = target.0;
        resized.height = target.1;
        resized.resampled = true;
        let t = g.add_space(resized);
        g.remove_edge(e);
        g.connect_input(s, r, 0);
        g.connect_output(r, t, 0);
        g.connect_input(t, p, e.port);
        added += 1;
    }
    Ok(added)
}

/// Sets `ii = 4^level` and the prologue on every process.
pub fn assign_initiation_intervals(g: &mut PipelineGraph) -> Result<()> {
    let ids: Vec<ProcessId> = g.processes().iter().map(|p| p.id).collect();
    for id in ids {
        let level = g
            .process(id)
            .level
            .ok_or_else(|| Error::structural(format!("process {} has no level annotation", g.process(id).ident())))?;
        let ii = 4u64
            .checked_pow(level as u32)
            .ok_or_else(|| Error::invalid(format!("level {level} is too deep")))?;
        let width_in = g.inputs(id).first().map(|&s| g.space(s).width).unwrap_or(0);
        let node = g.process_mut(id);
        node.ii = ii;
        node.prologue = match node.kind {
            ProcessKind::Kernel | ProcessKind::Resampler => prologue_of(node.window_radius, width_in),
            _ => 0,
        };
    }
    Ok(())
}

/// Full lowering: SSA graph, splitters, resamplers, initiation intervals,
/// then validation.
pub fn compile(trace: &ProgramTrace) -> Result<PipelineGraph> {
    let mut g = build_ssa_graph(trace)?;
    insert_splitters(&mut g)?;
    insert_resamplers(&mut g)?;
    assign_initiation_intervals(&mut g)?;
    validate_graph(&g)
        .map_err(|diags| Error::structural(diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")))?;
    Ok(g)
}
