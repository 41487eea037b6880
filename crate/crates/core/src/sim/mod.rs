//! Cycle-level simulation of a pipeline graph as a network of FIFOs.
//!
//! Every process is an actor that fires at most once per initiation interval.
//! A firing pops at most one token from each input it still needs and pushes
//! at most one token to each output. Firing decisions see channel occupancy
//! as it was at the start of the cycle; tokens pushed in cycle `t` become
//! visible in cycle `t + 1`. Sinks absorb tokens on arrival.

mod engine;
mod history;

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{PipelineGraph, ProcessId, SpaceId};
use crate::reference::{Inputs, TransferOutput};

pub use engine::simulate;
pub use history::HistoryPlane;

/// Channels above this many tokens are flagged for off-chip memory.
pub const OFFLOAD_THRESHOLD: usize = 1 << 20;

/// Input tokens a window kernel of `radius` must read from a raster stream of
/// row width `width_in` before its first output: `radius * width_in + radius`.
pub fn prologue_of(radius: usize, width_in: usize) -> usize {
    radius * width_in + radius
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fps {
    /// Whole frames per second, truncated.
    pub frames: u64,
    pub exact: f64,
}

pub fn estimate_fps(makespan_cycles: u64, clock_hz: f64) -> Result<Fps> {
    if !(clock_hz.is_finite() && clock_hz > 0.0) {
        return Err(Error::invalid(format!(
            "clock frequency must be positive, got {clock_hz}"
        )));
    }
    if makespan_cycles == 0 {
        return Err(Error::invalid("makespan must be at least one cycle"));
    }
    let exact = clock_hz / makespan_cycles as f64;
    Ok(Fps {
        frames: exact.floor() as u64,
        exact,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Capacities {
    Unbounded,
    Uniform(usize),
    /// Indexed by space id; `None` is unbounded.
    PerSpace(Vec<Option<usize>>),
}

#[derive(Debug, Clone)]
pub struct SimOptions<'a> {
    pub capacities: Capacities,
    pub max_cycles: u64,
    pub clock_hz: Option<f64>,
    /// Source images; when present, sample values flow with the tokens.
    pub inputs: Option<&'a Inputs>,
    pub record_firings: bool,
}

impl Default for SimOptions<'_> {
    fn default() -> Self {
        Self {
            capacities: Capacities::Unbounded,
            max_cycles: 100_000_000,
            clock_hz: None,
            inputs: None,
            record_firings: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChannelReport {
    pub edge: usize,
    pub label: String,
    pub capacity: Option<usize>,
    pub high_water: usize,
    pub tokens: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockedActor {
    pub process: String,
    pub reasons: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StallKind {
    /// No actor can ever fire again.
    Deadlock,
    /// The cycle budget ran out first.
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeadlockReport {
    pub kind: StallKind,
    pub cycle: u64,
    pub blocked: Vec<BlockedActor>,
    /// Channels that were empty or full for a blocked actor.
    pub channels: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Firing {
    pub cycle: u64,
    pub process: ProcessId,
    pub produced: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimReport {
    pub makespan_cycles: u64,
    pub fps: Option<f64>,
    pub fps_frames: Option<u64>,
    pub clock_hz: Option<f64>,
    pub channels: Vec<ChannelReport>,
    pub deadlock: Option<DeadlockReport>,
    /// Channels whose depth exceeds [`OFFLOAD_THRESHOLD`].
    pub offload: Vec<usize>,
    #[serde(skip)]
    pub firings: Vec<Firing>,
    #[serde(skip)]
    pub outputs: Vec<TransferOutput>,
}

impl SimReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn high_water(&self, space: SpaceId) -> usize {
        self.channels[space.0].high_water
    }

    pub fn max_high_water(&self) -> usize {
        self.channels.iter().map(|c| c.high_water).max().unwrap_or(0)
    }

    /// `cycle,process,produced` rows in firing order.
    pub fn firing_log_csv(&self, graph: &PipelineGraph) -> String {
        let mut out = String::from("cycle,process,produced\n");
        for f in &self.firings {
            let _ = writeln!(
                out,
                "{},{},{}",
                f.cycle,
                graph.process(f.process).ident(),
                u8::from(f.produced)
            );
        }
        out
    }
}

/// Smallest per-channel capacities that reproduce the unbounded schedule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FifoDepths {
    pub depths: Vec<usize>,
    pub makespan_cycles: u64,
}

impl FifoDepths {
    pub fn max(&self) -> usize {
        self.depths.iter().copied().max().unwrap_or(0)
    }

    pub fn as_capacities(&self) -> Capacities {
        Capacities::PerSpace(self.depths.iter().map(|&d| Some(d)).collect())
    }
}

/// Runs the graph unbounded, takes each channel's high-water mark as its
/// depth, and re-runs with those depths to confirm the makespan is unchanged.
pub fn min_fifo_depths(graph: &PipelineGraph, max_cycles: u64) -> Result<FifoDepths> {
    let free = simulate(
        graph,
        &SimOptions {
            max_cycles,
            ..SimOptions::default()
        },
    )?;
    if let Some(d) = &free.deadlock {
        return Err(Error::structural(format!(
            "graph stalls ({:?}) without capacity limits at cycle {}",
            d.kind, d.cycle
        )));
    }
    let depths: Vec<usize> = free.channels.iter().map(|c| c.high_water.max(1)).collect();
    let result = FifoDepths {
        depths,
        makespan_cycles: free.makespan_cycles,
    };
    let bounded = simulate(
        graph,
        &SimOptions {
            capacities: result.as_capacities(),
            max_cycles,
            ..SimOptions::default()
        },
    )?;
    if bounded.deadlock.is_some() || bounded.makespan_cycles != free.makespan_cycles {
        return Err(Error::Internal(format!(
            "depths from the unbounded run give makespan {} instead of {}",
            bounded.makespan_cycles, free.makespan_cycles
        )));
    }
    Ok(result)
}
