use std::collections::VecDeque;
use std::fmt;

use serde::Serialize;

use super::{NodeRef, PipelineGraph, ProcessKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphDiagnostic {
    pub node: String,
    pub message: String,
}

impl fmt::Display for GraphDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.node, self.message)
    }
}

/// Checks the structural invariants of a lowered graph and reports every
/// violation found.
pub fn validate_graph(g: &PipelineGraph) -> Result<(), Vec<GraphDiagnostic>> {
    let mut diags = Vec::new();
    macro_rules! push {
        ($node:expr, $msg:expr $(,)?) => {
            diags.push(GraphDiagnostic {
                node: $node,
                message: $msg,
            })
        };
    }
    let ns = g.spaces().len();
    let np = g.processes().len();
    let node_index = |n: NodeRef| match n {
        NodeRef::Space(s) => s.0,
        NodeRef::Process(p) => ns + p.0,
    };

    let mut bad_ref = false;
    for e in g.edges() {
        for n in [e.from, e.to] {
            let ok = match n {
                NodeRef::Space(s) => s.0 < ns,
                NodeRef::Process(p) => p.0 < np,
            };
            if !ok {
                push!(format!("{n:?}"), "edge references a missing node".into());
                bad_ref = true;
            }
        }
        match (e.from, e.to) {
            (NodeRef::Space(a), NodeRef::Space(b)) => {
                push!(
                    format!("{a}"),
                    format!("bipartite violation: space-to-space edge to {b}")
                )
            }
            (NodeRef::Process(a), NodeRef::Process(b)) => {
                push!(
                    format!("{a}"),
                    format!("bipartite violation: process-to-process edge to {b}")
                )
            }
            _ => {}
        }
    }
    if bad_ref {
        return Err(diags);
    }

    let mut succ = vec![Vec::new(); ns + np];
    let mut pred = vec![Vec::new(); ns + np];
    for e in g.edges() {
        let (a, b) = (node_index(e.from), node_index(e.to));
        succ[a].push(b);
        pred[b].push(a);
    }

    for s in g.spaces() {
        let producers = g.producers(s.id).len();
        let consumers = g.consumers(s.id).len();
        let name = format!("{} ({})", s.id, s.label());
        if producers == 0 && consumers == 0 {
            push!(name, "unreachable space: no producer and no consumer".into());
            continue;
        }
        if producers == 0 {
            push!(name.clone(), "space has no producer".into());
        }
        if producers > 1 {
            push!(name.clone(), format!("space has {producers} producers"));
        }
        if consumers == 0 {
            push!(name.clone(), "space has no consumer".into());
        }
        if consumers > 1 {
            push!(name, format!("space has {consumers} consumers"));
        }
    }

    for p in g.processes() {
        let ins = g.inputs(p.id).len();
        let outs = g.outputs(p.id).len();
        let name = p.ident();
        if p.ii == 0 {
            push!(name.clone(), "initiation interval must be at least 1".into());
        }
        match p.kind {
            ProcessKind::Source => {
                if ins != 0 || outs != 1 {
                    push!(
                        name,
                        format!("source must have 0 inputs and 1 output, has {ins} and {outs}")
                    );
                }
            }
            ProcessKind::Sink => {
                if ins != 1 || outs != 0 {
                    push!(
                        name,
                        format!("sink must have 1 input and 0 outputs, has {ins} and {outs}")
                    );
                }
            }
            ProcessKind::Splitter => {
                if ins != 1 || outs < 2 {
                    push!(
                        name,
                        format!("splitter must have 1 input and >= 2 outputs, has {ins} and {outs}")
                    );
                }
            }
            ProcessKind::Resampler => {
                if ins != 1 || outs != 1 || p.resample.is_none() {
                    push!(name, "resampler must have 1 input, 1 output and a resample spec".into());
                }
            }
            ProcessKind::Kernel => match &p.shape {
                None => push!(name, "kernel process without a kernel shape".into()),
                Some(k) => {
                    if k.radii.len() != k.boundaries.len() || !(1..=2).contains(&k.decimation) {
                        push!(name.clone(), "malformed kernel shape".into());
                    }
                    if ins != k.radii.len() || outs != 1 {
                        push!(
                            name,
                            format!(
                                "kernel expects {} inputs and 1 output, has {ins} and {outs}",
                                k.radii.len()
                            ),
                        );
                    }
                }
            },
        }
    }

    // Kahn's algorithm; leftovers lie on a cycle.
    let mut indeg: Vec<usize> = pred.iter().map(Vec::len).collect();
    let mut queue: VecDeque<usize> = (0..ns + np).filter(|&i| indeg[i] == 0).collect();
    let mut seen = 0;
    while let Some(n) = queue.pop_front() {
        seen += 1;
        for &m in &succ[n] {
            indeg[m] -= 1;
            if indeg[m] == 0 {
                queue.push_back(m);
            }
        }
    }
    if seen < ns + np {
        push!(
            "graph".into(),
            format!("cycle detected through {} nodes", ns + np - seen)
        );
    }

    let reach = |starts: Vec<usize>, adj: &Vec<Vec<usize>>| {
        let mut mark = vec![false; ns + np];
        let mut stack = starts;
        for &s in &stack {
            mark[s] = true;
        }
        while let Some(n) = stack.pop() {
            for &m in &adj[n] {
                if !mark[m] {
                    mark[m] = true;
                    stack.push(m);
                }
            }
        }
        mark
    };
    let sources = g
        .processes()
        .iter()
        .filter(|p| p.kind == ProcessKind::Source || (p.kind == ProcessKind::Kernel && g.inputs(p.id).is_empty()))
        .map(|p| ns + p.id.0)
        .collect();
    let sinks = g
        .processes()
        .iter()
        .filter(|p| p.kind == ProcessKind::Sink)
        .map(|p| ns + p.id.0)
        .collect();
    let from_src = reach(sources, &succ);
    let to_sink = reach(sinks, &pred);
    for s in g.spaces() {
        let i = s.id.0;
        if pred[i].is_empty() && succ[i].is_empty() {
            continue;
        }
        if !from_src[i] {
            push!(
                format!("{} ({})", s.id, s.label()),
                "unreachable space: no path from a source".into()
            );
        }
        if !to_sink[i] {
            push!(
                format!("{} ({})", s.id, s.label()),
                "dead space: no path to a sink".into()
            );
        }
    }

    if diags.is_empty() {
        Ok(())
    } else {
        Err(diags)
    }
}
