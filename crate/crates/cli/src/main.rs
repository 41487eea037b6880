use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mrflow::graph::{compile, emit_structure, PipelineGraph};
use mrflow::io;
use mrflow::kernels::{BoundaryMode, FusionMode, Interp};
use mrflow::sim::{min_fifo_depths, simulate, Capacities, SimOptions};
use mrflow::studies::{run_case_study, study_program, CaseStudyConfig};

#[derive(Parser)]
#[command(
    name = "mrflow",
    version,
    about = "Compile and simulate multiresolution streaming pipelines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bilateral-filter pyramid: compile, simulate and check against buffer-wise execution.
    Pyramid(PyramidArgs),
    /// Multigrid Poisson solver: compile, simulate and check against buffer-wise execution.
    Multigrid(MultigridArgs),
    /// Emit graph artifacts for a study without simulating.
    Compile(CompileArgs),
    /// Simulate a graph JSON file and write the report.
    Simulate(SimulateArgs),
}

#[derive(Args, Clone)]
struct PyramidArgs {
    #[arg(long, default_value_t = 512)]
    width: usize,
    #[arg(long, default_value_t = 512)]
    height: usize,
    #[arg(long, default_value_t = 6)]
    levels: usize,
    /// Bilateral window radius: 1 for 3x3, 2 for 5x5.
    #[arg(long, default_value_t = 1)]
    radius: usize,
    /// Spatial sigma; defaults to the radius.
    #[arg(long)]
    sigma_s: Option<f32>,
    #[arg(long, default_value_t = 25.0)]
    sigma_r: f32,
    #[arg(long, value_enum, default_value_t = Boundary::Clamp)]
    boundary: Boundary,
    #[arg(long, value_enum, default_value_t = Upsample::Nearest)]
    interp: Upsample,
    #[arg(long, value_enum, default_value_t = Fusion::Plain)]
    fusion: Fusion,
    /// Input image (binary PGM); a generated test pattern otherwise.
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args, Clone)]
struct MultigridArgs {
    /// Grid nodes per side, e.g. 513 or 65.
    #[arg(long, default_value_t = 513)]
    size: usize,
    #[arg(long, default_value_t = 6)]
    levels: usize,
    #[arg(long, default_value_t = 2)]
    pre_smooth: usize,
    #[arg(long, default_value_t = 2)]
    post_smooth: usize,
    #[arg(long, default_value_t = 0.8)]
    omega: f32,
    /// 1 for V-cycles, 2 for W-cycles.
    #[arg(long, default_value_t = 1)]
    gamma: usize,
    #[arg(long, default_value_t = 10)]
    coarsest_iters: usize,
    #[arg(long, default_value_t = 1)]
    cycles: usize,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Clock frequency in MHz for the frame-rate estimate.
    #[arg(long)]
    clock_mhz: Option<f64>,
    #[arg(long)]
    max_cycles: Option<u64>,
    /// Directory for output image, DOT, structure, directives, graph and report.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct CompileArgs {
    #[command(subcommand)]
    study: StudyCommand,
}

#[derive(Subcommand)]
enum StudyCommand {
    Pyramid(PyramidArgs),
    Multigrid(MultigridArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Graph JSON written by `compile` or a study run.
    graph: PathBuf,
    /// Report JSON destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Uniform FIFO capacity; unbounded when omitted.
    #[arg(long, conflicts_with = "min_depths")]
    capacity: Option<usize>,
    /// Size every FIFO to its minimum depth first.
    #[arg(long)]
    min_depths: bool,
    #[arg(long)]
    clock_mhz: Option<f64>,
    #[arg(long, default_value_t = 100_000_000)]
    max_cycles: u64,
    /// Firing log CSV destination.
    #[arg(long)]
    firings: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Boundary {
    Clamp,
    Mirror,
    Repeat,
}

#[derive(Clone, Copy, ValueEnum)]
enum Upsample {
    Nearest,
    Bilinear,
}

#[derive(Clone, Copy, ValueEnum)]
enum Fusion {
    Plain,
    Laplacian,
}

impl PyramidArgs {
    fn config(&self) -> CaseStudyConfig {
        let mut c = CaseStudyConfig::bilateral_pyramid(self.radius);
        c.width = self.width;
        c.height = self.height;
        c.levels = self.levels;
        c.sigma_s = self.sigma_s.unwrap_or(self.radius as f32);
        c.sigma_r = self.sigma_r;
        c.boundary = match self.boundary {
            Boundary::Clamp => BoundaryMode::Clamp,
            Boundary::Mirror => BoundaryMode::Mirror,
            Boundary::Repeat => BoundaryMode::Repeat,
        };
        c.interp = match self.interp {
            Upsample::Nearest => Interp::Nearest,
            Upsample::Bilinear => Interp::Bilinear,
        };
        c.fusion = match self.fusion {
            Fusion::Plain => FusionMode::Plain,
            Fusion::Laplacian => FusionMode::Laplacian,
        };
        self.run.apply(&mut c);
        c
    }
}

impl MultigridArgs {
    fn config(&self) -> CaseStudyConfig {
        let mut c = CaseStudyConfig::multigrid();
        c.width = self.size;
        c.height = self.size;
        c.levels = self.levels;
        c.pre_smooth = self.pre_smooth;
        c.post_smooth = self.post_smooth;
        c.omega = self.omega;
        c.gamma = self.gamma;
        c.coarsest_iters = self.coarsest_iters;
        c.cycles = self.cycles;
        self.run.apply(&mut c);
        c
    }
}

impl RunArgs {
    fn apply(&self, c: &mut CaseStudyConfig) {
        if let Some(mhz) = self.clock_mhz {
            c.clock_hz = mhz * 1e6;
        }
        if let Some(m) = self.max_cycles {
            c.max_cycles = m;
        }
    }
}

fn run_study(cfg: &CaseStudyConfig, input: Option<&Path>, out_dir: Option<&Path>) -> Result<bool> {
    let image = input
        .map(|p| io::load_image(p).with_context(|| format!("reading {}", p.display())))
        .transpose()?;
    let run = run_case_study(cfg, image)?;
    println!("{}", run.summary());
    if let Some(d) = &run.report.deadlock {
        eprintln!("deadlock at cycle {}: {} blocked actors", d.cycle, d.blocked.len());
    }
    if let Some(dir) = out_dir {
        for path in run.write_artifacts(dir)? {
            println!("wrote {}", path.display());
        }
    }
    Ok(run.oracle_match && run.report.deadlock.is_none())
}

fn compile_study(cfg: &CaseStudyConfig, out_dir: Option<&Path>) -> Result<()> {
    let program = study_program(cfg)?;
    let graph = compile(&program.trace)?;
    let emission = emit_structure(&graph)?;
    let Some(dir) = out_dir else {
        print!("{}", emission.structure);
        return Ok(());
    };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let stem = cfg.study.to_string();
    let files = [
        (format!("{stem}.dot"), emission.dot),
        (format!("{stem}.structure.txt"), emission.structure),
        (format!("{stem}.directives.txt"), emission.directives),
        (format!("{stem}.graph.json"), graph.to_json()),
        (
            format!("{stem}.kernels.json"),
            serde_json::to_string_pretty(&emission.descriptors)?,
        ),
    ];
    for (name, text) in files {
        let path = dir.join(name);
        io::write_bytes(&path, text.as_bytes())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn simulate_graph(args: &SimulateArgs) -> Result<bool> {
    let text = std::fs::read_to_string(&args.graph).with_context(|| format!("reading {}", args.graph.display()))?;
    let graph = PipelineGraph::from_json(&text)?;
    let capacities = if args.min_depths {
        min_fifo_depths(&graph, args.max_cycles)?.as_capacities()
    } else {
        match args.capacity {
            Some(0) => bail!("capacity must be at least 1"),
            Some(n) => Capacities::Uniform(n),
            None => Capacities::Unbounded,
        }
    };
    let report = simulate(
        &graph,
        &SimOptions {
            capacities,
            max_cycles: args.max_cycles,
            clock_hz: args.clock_mhz.map(|m| m * 1e6),
            inputs: None,
            record_firings: args.firings.is_some(),
        },
    )?;
    match &args.out {
        Some(path) => io::write_report(path, &report)?,
        None => println!("{}", report.to_json()),
    }
    if let Some(path) = &args.firings {
        io::write_bytes(path, report.firing_log_csv(&graph).as_bytes())?;
    }
    match &report.deadlock {
        Some(d) => {
            eprintln!("stalled ({:?}) at cycle {}", d.kind, d.cycle);
            for b in &d.blocked {
                for r in &b.reasons {
                    eprintln!("  {}: {r}", b.process);
                }
            }
            Ok(false)
        }
        None => {
            eprintln!(
                "makespan={} max_depth={}",
                report.makespan_cycles,
                report.max_high_water()
            );
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Pyramid(a) => run_study(&a.config(), a.input.as_deref(), a.run.out_dir.as_deref()),
        Command::Multigrid(a) => run_study(&a.config(), None, a.run.out_dir.as_deref()),
        Command::Compile(c) => match &c.study {
            StudyCommand::Pyramid(a) => compile_study(&a.config(), a.run.out_dir.as_deref()).map(|_| true),
            StudyCommand::Multigrid(a) => compile_study(&a.config(), a.run.out_dir.as_deref()).map(|_| true),
        },
        Command::Simulate(a) => simulate_graph(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
