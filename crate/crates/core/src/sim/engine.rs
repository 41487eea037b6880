use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::{validate_graph, PipelineGraph, ProcessKind};
use crate::image::{GridImage, Plane};
use crate::kernels::{map_boundary, resample::source_extent, resample_at};
use crate::reference::TransferOutput;

use super::history::HistoryPlane;
use super::{
    estimate_fps, BlockedActor, Capacities, ChannelReport, DeadlockReport, Firing, SimOptions, SimReport, StallKind,
    OFFLOAD_THRESHOLD,
};

struct Channel {
    capacity: Option<usize>,
    /// Tokens visible at the start of the current cycle.
    occupancy: usize,
    popped: usize,
    pushed: usize,
    high_water: usize,
    tokens: usize,
    values: VecDeque<f32>,
    /// Index into the sink table when the consumer is a sink.
    sink: Option<usize>,
}

struct SinkState {
    process: usize,
    received: usize,
    last_push: Option<u64>,
    values: Vec<f32>,
}

struct Actor {
    process: usize,
    ii: u64,
    next_fire: u64,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    consumed: Vec<usize>,
    totals: Vec<usize>,
    produced: usize,
    out_total: usize,
    /// `needs[j][k]`: highest raster index of input `j` read by output `k`,
    /// as a running maximum over `k`.
    needs: Vec<Vec<u32>>,
    history: Vec<Vec<f32>>,
    source_values: Vec<f32>,
}

impl Actor {
    fn finished(&self) -> bool {
        self.produced == self.out_total && self.consumed.iter().zip(&self.totals).all(|(c, t)| c == t)
    }

    fn needy(&self, j: usize) -> bool {
        if self.produced < self.out_total {
            self.consumed[j] <= self.needs[j][self.produced] as usize
        } else {
            self.consumed[j] < self.totals[j]
        }
    }
}

fn running_max(mut v: Vec<u32>) -> Vec<u32> {
    for i in 1..v.len() {
        v[i] = v[i].max(v[i - 1]);
    }
    v
}

fn build_needs(g: &PipelineGraph, p: usize, inputs: &[usize], out_dims: (usize, usize)) -> Result<Vec<Vec<u32>>> {
    let node = &g.processes()[p];
    let n_out = out_dims.0 * out_dims.1;
    let mut needs = Vec::with_capacity(inputs.len());
    for (j, &s) in inputs.iter().enumerate() {
        let (wi, hi) = g.spaces()[s].dims();
        let v: Vec<u32> = match node.kind {
            ProcessKind::Kernel => {
                let k = node.shape.as_ref().expect("validated kernel has a shape");
                let r = k.radii[j] as isize;
                let boundary = k.boundaries[j];
                let d = k.decimation;
                let mut v = Vec::with_capacity(n_out);
                for y in 0..out_dims.1 {
                    for x in 0..out_dims.0 {
                        let (cx, cy) = ((x * d) as isize, (y * d) as isize);
                        let mut best = 0usize;
                        for dy in -r..=r {
                            let Ok(my) = map_boundary(cy + dy, hi, boundary) else {
                                continue;
                            };
                            for dx in -r..=r {
                                let Ok(mx) = map_boundary(cx + dx, wi, boundary) else {
                                    continue;
                                };
                                best = best.max(my * wi + mx);
                            }
                        }
                        v.push(best as u32);
                    }
                }
                v
            }
            ProcessKind::Resampler => {
                let spec = node.resample.expect("resampler has a spec");
                let mut v = Vec::with_capacity(n_out);
                for y in 0..out_dims.1 {
                    for x in 0..out_dims.0 {
                        v.push(source_extent((wi, hi), out_dims, spec.interp, x, y)? as u32);
                    }
                }
                v
            }
            _ => (0..n_out as u32).collect(),
        };
        needs.push(running_max(v));
    }
    Ok(needs)
}

/// Simulates `graph` under `options`. A deadlock is reported in the result,
/// not as an error; running out of `max_cycles` is reported as a timeout.
pub fn simulate(graph: &PipelineGraph, options: &SimOptions<'_>) -> Result<SimReport> {
    validate_graph(graph)
        .map_err(|diags| Error::structural(diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")))?;
    let adj = graph.adjacency();
    let functional = options.inputs.is_some();

    let mut channels: Vec<Channel> = Vec::with_capacity(graph.spaces().len());
    for s in graph.spaces() {
        let capacity = match &options.capacities {
            Capacities::Unbounded => None,
            Capacities::Uniform(c) => Some(*c),
            Capacities::PerSpace(v) => v.get(s.id.0).copied().flatten(),
        };
        if capacity == Some(0) {
            return Err(Error::invalid(format!("channel {} has zero capacity", s.id)));
        }
        channels.push(Channel {
            capacity,
            occupancy: 0,
            popped: 0,
            pushed: 0,
            high_water: 0,
            tokens: 0,
            values: VecDeque::new(),
            sink: None,
        });
    }

    let mut sinks = Vec::new();
    let mut actors = Vec::new();
    for p in graph.processes() {
        let inputs: Vec<usize> = adj.inputs[p.id.0].iter().map(|s| s.0).collect();
        let outputs: Vec<usize> = adj.outputs[p.id.0].iter().map(|s| s.0).collect();
        if p.kind == ProcessKind::Sink {
            channels[inputs[0]].sink = Some(sinks.len());
            sinks.push(SinkState {
                process: p.id.0,
                received: 0,
                last_push: None,
                values: Vec::new(),
            });
            continue;
        }
        let out_dims = graph.spaces()[outputs[0]].dims();
        let needs = build_needs(graph, p.id.0, &inputs, out_dims)?;
        let mut source_values = Vec::new();
        if p.kind == ProcessKind::Source && functional {
            let buffer = p.buffer.expect("source has a buffer");
            let image = options
                .inputs
                .and_then(|i| i.get(&buffer))
                .ok_or_else(|| Error::invalid(format!("no input image for buffer {buffer}")))?;
            let space = &graph.spaces()[outputs[0]];
            if image.dims() != space.dims() || image.kind() != space.kind {
                return Err(Error::invalid(format!(
                    "input for {buffer} is {}x{} {}, stream expects {}x{} {}",
                    image.width(),
                    image.height(),
                    image.kind().name(),
                    space.width,
                    space.height,
                    space.kind.name()
                )));
            }
            source_values = image.samples().to_vec();
        }
        actors.push(Actor {
            process: p.id.0,
            ii: p.ii.max(1),
            next_fire: 0,
            totals: inputs.iter().map(|&s| graph.spaces()[s].tokens()).collect(),
            consumed: vec![0; inputs.len()],
            history: vec![Vec::new(); inputs.len()],
            inputs,
            outputs,
            produced: 0,
            out_total: out_dims.0 * out_dims.1,
            needs,
            source_values,
        });
    }

    let mut firings = Vec::new();
    let mut touched: Vec<usize> = Vec::new();
    let mut t: u64 = 0;
    let mut deadlock = None;
    loop {
        if actors.iter().all(Actor::finished) {
            break;
        }
        if t >= options.max_cycles {
            let mut d = diagnose(graph, &actors, &channels, t);
            d.kind = StallKind::Timeout;
            deadlock = Some(d);
            break;
        }
        let mut fired = false;
        for a in actors.iter_mut() {
            if t < a.next_fire || a.finished() {
                continue;
            }
            let needy: Vec<bool> = (0..a.inputs.len()).map(|j| a.needy(j)).collect();
            if needy
                .iter()
                .zip(&a.inputs)
                .any(|(&n, &s)| n && channels[s].occupancy == 0)
            {
                continue;
            }
            let k = a.produced;
            let produce = k < a.out_total
                && (0..a.inputs.len()).all(|j| a.consumed[j] + usize::from(needy[j]) > a.needs[j][k] as usize);
            if produce
                && a.outputs.iter().any(|&s| {
                    let c = &channels[s];
                    c.sink.is_none() && c.capacity.is_some_and(|cap| c.occupancy >= cap)
                })
            {
                continue;
            }
            if !produce && !needy.iter().any(|&n| n) {
                continue;
            }

            for (j, &s) in a.inputs.iter().enumerate() {
                if !needy[j] {
                    continue;
                }
                let c = &mut channels[s];
                c.popped += 1;
                touched.push(s);
                if functional {
                    let v = c.values.pop_front().expect("visible token has a value");
                    a.history[j].push(v);
                }
                a.consumed[j] += 1;
            }
            if produce {
                let value = if functional { Some(evaluate(graph, a, k)?) } else { None };
                for &s in &a.outputs {
                    let c = &mut channels[s];
                    c.pushed += 1;
                    c.tokens += 1;
                    touched.push(s);
                    match c.sink {
                        Some(i) => {
                            let sink = &mut sinks[i];
                            sink.received += 1;
                            sink.last_push = Some(t);
                            if let Some(v) = value {
                                sink.values.push(v);
                            }
                        }
                        None => {
                            if let Some(v) = value {
                                c.values.push_back(v);
                            }
                        }
                    }
                }
                a.produced += 1;
            }
            a.next_fire = t + a.ii;
            fired = true;
            if options.record_firings {
                firings.push(Firing {
                    cycle: t,
                    process: graph.processes()[a.process].id,
                    produced: produce,
                });
            }
        }

        for s in touched.drain(..) {
            let c = &mut channels[s];
            if c.popped == 0 && c.pushed == 0 {
                continue;
            }
            c.high_water = c.high_water.max(c.occupancy + c.pushed);
            if c.sink.is_none() {
                c.occupancy = c.occupancy + c.pushed - c.popped;
            }
            c.popped = 0;
            c.pushed = 0;
        }

        if fired {
            t += 1;
            continue;
        }
        match actors
            .iter()
            .filter(|a| !a.finished() && a.next_fire > t)
            .map(|a| a.next_fire)
            .min()
        {
            Some(next) => t = next.min(options.max_cycles),
            None => {
                deadlock = Some(diagnose(graph, &actors, &channels, t));
                break;
            }
        }
    }

    let makespan = if deadlock.is_some() {
        t
    } else {
        sinks.iter().filter_map(|s| s.last_push).max().map_or(0, |c| c + 1)
    };

    let mut outputs = Vec::new();
    if functional {
        let mut done: Vec<&SinkState> = sinks.iter().collect();
        done.sort_by_key(|s| graph.processes()[s.process].event);
        for s in done {
            let p = &graph.processes()[s.process];
            let (Some(event), Some(buffer)) = (p.event, p.buffer) else {
                continue;
            };
            if deadlock.is_some() {
                continue;
            }
            let space = &graph.spaces()[adj.inputs[s.process][0].0];
            outputs.push(TransferOutput {
                event,
                buffer,
                image: GridImage::from_samples(space.width, space.height, space.kind, s.values.clone())?,
            });
        }
    }

    let report_channels: Vec<ChannelReport> = graph
        .spaces()
        .iter()
        .zip(&channels)
        .map(|(s, c)| ChannelReport {
            edge: s.id.0,
            label: s.label(),
            capacity: c.capacity,
            high_water: c.high_water,
            tokens: c.tokens,
        })
        .collect();
    let offload = report_channels
        .iter()
        .filter(|c| c.high_water > OFFLOAD_THRESHOLD)
        .map(|c| c.edge)
        .collect();
    let fps = match options.clock_hz {
        Some(hz) if deadlock.is_none() && makespan > 0 => Some(estimate_fps(makespan, hz)?),
        _ => None,
    };
    Ok(SimReport {
        makespan_cycles: makespan,
        fps: fps.map(|f| f.exact),
        fps_frames: fps.map(|f| f.frames),
        clock_hz: options.clock_hz,
        channels: report_channels,
        deadlock,
        offload,
        firings,
        outputs,
    })
}

fn evaluate(graph: &PipelineGraph, a: &Actor, k: usize) -> Result<f32> {
    let node = &graph.processes()[a.process];
    let out = &graph.spaces()[a.outputs[0]];
    let (x, y) = (k % out.width, k / out.width);
    let plane = |j: usize| {
        let s = &graph.spaces()[a.inputs[j]];
        HistoryPlane::new(&a.history[j], s.width, s.height)
    };
    match node.kind {
        ProcessKind::Source => Ok(a.source_values[k]),
        ProcessKind::Splitter => Ok(a.history[0][k]),
        ProcessKind::Resampler => {
            let spec = node.resample.expect("resampler has a spec");
            resample_at(
                &plane(0),
                graph.spaces()[a.inputs[0]].kind,
                spec.interp,
                out.dims(),
                x,
                y,
            )
        }
        ProcessKind::Kernel => {
            let kernel = node
                .kernel
                .as_ref()
                .ok_or_else(|| Error::invalid(format!("{} has no point function", node.ident())))?;
            let planes: Vec<HistoryPlane<'_>> = (0..a.inputs.len()).map(plane).collect();
            let refs: Vec<&dyn Plane> = planes.iter().map(|p| p as &dyn Plane).collect();
            let v = kernel.evaluate(&refs, out.dims(), x, y).map_err(|e| match node.event {
                Some(ev) => e.at_event(ev),
                None => e,
            })?;
            out.kind.quantize(v)
        }
        ProcessKind::Sink => Err(Error::Internal("sinks are not actors".into())),
    }
}

fn diagnose(graph: &PipelineGraph, actors: &[Actor], channels: &[Channel], t: u64) -> DeadlockReport {
    let mut blocked = Vec::new();
    let mut blocking = Vec::new();
    for a in actors.iter().filter(|a| !a.finished()) {
        let mut reasons = Vec::new();
        for (j, &s) in a.inputs.iter().enumerate() {
            if a.needy(j) && channels[s].occupancy == 0 {
                reasons.push(format!("waiting on empty channel s{s} ({})", graph.spaces()[s].label()));
                blocking.push(s);
            }
        }
        for &s in &a.outputs {
            let c = &channels[s];
            if c.sink.is_none() && c.capacity.is_some_and(|cap| c.occupancy >= cap) {
                reasons.push(format!(
                    "blocked on full channel s{s} ({}, capacity {})",
                    graph.spaces()[s].label(),
                    c.capacity.unwrap_or(0)
                ));
                blocking.push(s);
            }
        }
        blocked.push(BlockedActor {
            process: graph.processes()[a.process].ident(),
            reasons,
        });
    }
    blocking.sort_unstable();
    blocking.dedup();
    DeadlockReport {
        kind: StallKind::Deadlock,
        cycle: t,
        blocked,
        channels: blocking,
    }
}
