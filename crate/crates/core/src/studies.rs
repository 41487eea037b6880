//! The two packaged case studies: a bilateral-filter Gaussian pyramid and a
//! multigrid Poisson solver, each built as a DSL program, compiled, simulated
//! and checked against buffer-wise execution.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{in_stage, Error, Result};
use crate::frontend::points;
use crate::frontend::{BufferId, MaskDef, ProgramBuilder, ProgramTrace, PyramidDef, Rounding};
use crate::graph::{compile, emit_structure, Emission, PipelineGraph, ProcessKind, SpaceId};
use crate::image::{ElementKind, GridImage};
use crate::io;
use crate::kernels::multigrid::relative_residual;
use crate::kernels::{BilateralParams, BoundaryMode, FusionMode, GridProblem, Interp};
use crate::reference::{compare_outputs, run_bufferwise, CompareReport, Inputs, TransferOutput};
use crate::sim::{min_fifo_depths, simulate, FifoDepths, SimOptions, SimReport};

pub const CLOCK_BF3_HZ: f64 = 188.1e6;
pub const CLOCK_BF5_HZ: f64 = 141.5e6;
pub const CLOCK_JACOBI_HZ: f64 = 154.3e6;

const F32_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Study {
    BilateralPyramid,
    MultigridPoisson,
}

impl fmt::Display for Study {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Study::BilateralPyramid => "bilateral-pyramid",
            Study::MultigridPoisson => "multigrid-poisson",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseStudyConfig {
    pub study: Study,
    pub width: usize,
    pub height: usize,
    pub levels: usize,
    /// Bilateral window radius.
    pub radius: usize,
    pub sigma_s: f32,
    pub sigma_r: f32,
    pub boundary: BoundaryMode,
    /// Upsampling filter used by reconstruct.
    pub interp: Interp,
    pub fusion: FusionMode,
    pub pre_smooth: usize,
    pub post_smooth: usize,
    pub omega: f32,
    pub gamma: usize,
    pub coarsest_iters: usize,
    /// Multigrid cycles unrolled into the program.
    pub cycles: usize,
    pub clock_hz: f64,
    pub max_cycles: u64,
}

impl CaseStudyConfig {
    /// 512x512, six levels, 3x3 or 5x5 bilateral filter.
    pub fn bilateral_pyramid(radius: usize) -> Self {
        Self {
            study: Study::BilateralPyramid,
            width: 512,
            height: 512,
            levels: 6,
            radius,
            sigma_s: radius as f32,
            sigma_r: 25.0,
            boundary: BoundaryMode::Clamp,
            interp: Interp::Nearest,
            fusion: FusionMode::Plain,
            pre_smooth: 0,
            post_smooth: 0,
            omega: 1.0,
            gamma: 1,
            coarsest_iters: 0,
            cycles: 1,
            clock_hz: if radius >= 2 { CLOCK_BF5_HZ } else { CLOCK_BF3_HZ },
            max_cycles: 50_000_000,
        }
    }

    /// 513x513 vertex grid, six levels, one V-cycle with JOR smoothing.
    pub fn multigrid() -> Self {
        Self {
            study: Study::MultigridPoisson,
            width: 513,
            height: 513,
            levels: 6,
            radius: 1,
            sigma_s: 1.0,
            sigma_r: 25.0,
            boundary: BoundaryMode::Clamp,
            interp: Interp::Bilinear,
            fusion: FusionMode::Plain,
            pre_smooth: 2,
            post_smooth: 2,
            omega: 0.8,
            gamma: 1,
            coarsest_iters: 10,
            cycles: 1,
            clock_hz: CLOCK_JACOBI_HZ,
            max_cycles: 200_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::invalid("need at least one level"));
        }
        if !(self.clock_hz.is_finite() && self.clock_hz > 0.0) {
            return Err(Error::invalid("clock frequency must be positive"));
        }
        if !(1..=2).contains(&self.gamma) {
            return Err(Error::invalid(format!(
                "recursion count must be 1 or 2, got {}",
                self.gamma
            )));
        }
        match self.study {
            Study::BilateralPyramid => {
                BilateralParams::new(self.sigma_s, self.sigma_r, self.radius)?;
                if self.interp == Interp::None {
                    return Err(Error::invalid("reconstruct needs nearest or bilinear upsampling"));
                }
                let (w, h) = self.pyramid_def().dims(self.levels - 1);
                if w < 2 || h < 2 {
                    return Err(Error::invalid(format!(
                        "{}x{} with {} levels leaves a {w}x{h} top level; every level must be at least 2x2",
                        self.width, self.height, self.levels
                    )));
                }
            }
            Study::MultigridPoisson => {
                if self.width != self.height {
                    return Err(Error::invalid("multigrid grids must be square"));
                }
                if !(self.omega > 0.0 && self.omega <= 1.0) {
                    return Err(Error::invalid(format!("omega must lie in (0, 1], got {}", self.omega)));
                }
                if self.cycles == 0 {
                    return Err(Error::invalid("need at least one cycle"));
                }
                let def = self.pyramid_def();
                for l in 1..self.levels {
                    let fine = def.dims(l - 1).0;
                    if fine < 5 || fine.is_multiple_of(2) {
                        return Err(Error::invalid(format!(
                            "level {} has {fine} nodes; restriction needs an odd size of at least 5",
                            l - 1
                        )));
                    }
                }
                if def.dims(self.levels - 1).0 < 3 {
                    return Err(Error::invalid("coarsest grid needs at least 3 nodes"));
                }
            }
        }
        Ok(())
    }

    pub fn pyramid_def(&self) -> PyramidDef {
        match self.study {
            Study::BilateralPyramid => PyramidDef::new(self.width, self.height, self.levels, ElementKind::U8),
            Study::MultigridPoisson => {
                PyramidDef::new(self.width, self.height, self.levels, ElementKind::F32).rounded(Rounding::Ceil)
            }
        }
    }

    pub fn bilateral_params(&self) -> Result<BilateralParams> {
        BilateralParams::new(self.sigma_s, self.sigma_r, self.radius)
    }
}

/// A recorded program with its host-side input and output buffers.
#[derive(Debug, Clone)]
pub struct StudyProgram {
    pub trace: ProgramTrace,
    pub inputs: Vec<BufferId>,
    /// Buffer read back after each cycle; one entry for the pyramid.
    pub outputs: Vec<BufferId>,
}

/// Figure-style bilateral pyramid: decompose down, bilateral on every level,
/// reconstruct back up.
pub fn pyramid_program(cfg: &CaseStudyConfig) -> Result<StudyProgram> {
    cfg.validate()?;
    let params = cfg.bilateral_params()?;
    let def = cfg.pyramid_def();
    let levels = cfg.levels;
    let mut b = ProgramBuilder::new();
    let g = b.declare_pyramid("g", def)?;
    let laplacian = cfg.fusion == FusionMode::Laplacian;
    let band_kind = if laplacian { ElementKind::F32 } else { ElementKind::U8 };
    let mut f = Vec::with_capacity(levels);
    let mut r = Vec::with_capacity(levels);
    let mut d = Vec::with_capacity(levels);
    for l in 0..levels {
        let (w, h) = def.dims(l);
        let coarsest = l + 1 == levels;
        f.push(b.declare_named(format!("f{l}"), w, h, band_kind)?);
        let r_kind = if l == 0 || coarsest { ElementKind::U8 } else { band_kind };
        r.push(b.declare_named(format!("r{l}"), w, h, r_kind)?);
        d.push(b.declare_named(format!("d{l}"), w, h, ElementKind::F32)?);
    }
    b.transfer_in(g.level(0))?;
    let boundary = cfg.boundary;
    let interp = cfg.interp;
    b.traverse(&[&g], 1, &|t| {
        let l = t.level();
        if t.is_coarsest() {
            return t.launch(points::bilateral(g.level(l), r[l], params, boundary));
        }
        t.launch(points::decompose(
            g.level(l),
            g.level(l + 1),
            MaskDef::gaussian3(),
            boundary,
        ))?;
        if laplacian {
            t.launch(points::detail(g.level(l), g.level(l + 1), d[l], interp))?;
            t.launch(points::bilateral(d[l], f[l], params, boundary))?;
        } else {
            t.launch(points::bilateral(g.level(l), f[l], params, boundary))?;
        }
        t.descend()?;
        t.launch(points::reconstruct(f[l], r[l + 1], r[l], interp))
    })?;
    b.transfer_out(r[0])?;
    Ok(StudyProgram {
        trace: b.finish(),
        inputs: vec![g.level(0)],
        outputs: vec![r[0]],
    })
}

/// Multigrid cycles for `-lap(u) = f` on a vertex grid: JOR smoothing,
/// residual, full-weighting restriction, zero coarse guess, recursion,
/// bilinear correction and post-smoothing. `u` is read back after each cycle.
pub fn multigrid_program(cfg: &CaseStudyConfig) -> Result<StudyProgram> {
    cfg.validate()?;
    let def = cfg.pyramid_def();
    let levels = cfg.levels;
    let h0 = 1.0 / (cfg.width - 1) as f32;
    let mut b = ProgramBuilder::new();
    let u = b.declare_pyramid("u", def)?;
    let f = b.declare_pyramid("f", def)?;
    let mut scratch = Vec::with_capacity(levels);
    let mut res = Vec::with_capacity(levels);
    for l in 0..levels {
        let (w, h) = def.dims(l);
        let a = b.declare_named(format!("a{l}"), w, h, ElementKind::F32)?;
        let c = b.declare_named(format!("b{l}"), w, h, ElementKind::F32)?;
        scratch.push((a, c));
        res.push(b.declare_named(format!("r{l}"), w, h, ElementKind::F32)?);
    }
    b.transfer_in(u.level(0))?;
    b.transfer_in(f.level(0))?;
    let omega = cfg.omega;
    let (pre, post, coarsest_iters) = (cfg.pre_smooth, cfg.post_smooth, cfg.coarsest_iters);

    for _ in 0..cfg.cycles {
        b.traverse(&[&u, &f], cfg.gamma, &|t| {
            let l = t.level();
            let h = h0 * (1u32 << l) as f32;
            if t.is_coarsest() {
                let mut chain = Chain::new(u.level(l), scratch[l], coarsest_iters);
                for _ in 0..coarsest_iters {
                    let (i, o) = chain.step();
                    t.launch(points::jor(i, f.level(l), o, h, omega))?;
                }
                return Ok(());
            }
            let mut chain = Chain::new(u.level(l), scratch[l], pre + 1 + post);
            for _ in 0..pre {
                let (i, o) = chain.step();
                t.launch(points::jor(i, f.level(l), o, h, omega))?;
            }
            t.launch(points::residual(chain.current, f.level(l), res[l], h))?;
            t.launch(points::restrict(res[l], f.level(l + 1)))?;
            t.builder()
                .record_launch(points::fill(u.level(l + 1), 0.0), Some(l + 1))?;
            t.descend()?;
            let (i, o) = chain.step();
            t.launch(points::correct(i, u.level(l + 1), o))?;
            for _ in 0..post {
                let (i, o) = chain.step();
                t.launch(points::jor(i, f.level(l), o, h, omega))?;
            }
            Ok(())
        })?;
        b.transfer_out(u.level(0))?;
    }
    Ok(StudyProgram {
        trace: b.finish(),
        inputs: vec![u.level(0), f.level(0)],
        outputs: vec![u.level(0)],
    })
}

/// Buffer rotation for a run of in-place updates: intermediate results
/// alternate between two scratch buffers and the last one lands in `home`.
struct Chain {
    home: BufferId,
    scratch: (BufferId, BufferId),
    current: BufferId,
    remaining: usize,
}

impl Chain {
    fn new(home: BufferId, scratch: (BufferId, BufferId), steps: usize) -> Self {
        Self {
            home,
            scratch,
            current: home,
            remaining: steps,
        }
    }

    fn step(&mut self) -> (BufferId, BufferId) {
        self.remaining -= 1;
        let out = if self.remaining == 0 {
            self.home
        } else if self.current == self.scratch.0 {
            self.scratch.1
        } else {
            self.scratch.0
        };
        let input = std::mem::replace(&mut self.current, out);
        (input, out)
    }
}

pub fn study_program(cfg: &CaseStudyConfig) -> Result<StudyProgram> {
    match cfg.study {
        Study::BilateralPyramid => pyramid_program(cfg),
        Study::MultigridPoisson => multigrid_program(cfg),
    }
}

/// Checkerboard with a brightness step on the right half and two impulses.
pub fn test_pattern(width: usize, height: usize) -> Result<GridImage> {
    let cell = (width.min(height) / 16).max(1);
    let mut img = GridImage::from_fn(width, height, ElementKind::U8, |x, y| {
        let base = if (x / cell + y / cell).is_multiple_of(2) {
            80.0
        } else {
            176.0
        };
        if x >= width / 2 {
            base + 48.0
        } else {
            base
        }
    })?;
    img.set(width / 2, height / 2, 255.0)?;
    img.set(width / 4, height / 4, 0.0)?;
    Ok(img)
}

/// Right-hand side `2 pi^2 sin(pi x) sin(pi y)`, whose exact solution is
/// `sin(pi x) sin(pi y)`.
pub fn poisson_problem(n: usize) -> Result<GridProblem> {
    use std::f64::consts::PI;
    GridProblem::unit_square(n, |x, y| 2.0 * PI * PI * (PI * x).sin() * (PI * y).sin())
}

/// Host images bound to the program inputs. `image` replaces the generated
/// pattern for the pyramid study.
pub fn study_inputs(cfg: &CaseStudyConfig, program: &StudyProgram, image: Option<GridImage>) -> Result<Inputs> {
    let mut inputs = HashMap::new();
    match cfg.study {
        Study::BilateralPyramid => {
            let img = match image {
                Some(img) => img,
                None => test_pattern(cfg.width, cfg.height)?,
            };
            if img.dims() != (cfg.width, cfg.height) || img.kind() != ElementKind::U8 {
                return Err(Error::invalid(format!(
                    "input image is {}x{} {}, study expects {}x{} u8",
                    img.width(),
                    img.height(),
                    img.kind().name(),
                    cfg.width,
                    cfg.height
                )));
            }
            inputs.insert(program.inputs[0], img);
        }
        Study::MultigridPoisson => {
            let p = poisson_problem(cfg.width)?;
            inputs.insert(program.inputs[0], p.u);
            inputs.insert(program.inputs[1], p.f);
        }
    }
    Ok(inputs)
}

/// The channel carrying the filtered level-`level` band into its reconstruct.
pub fn bypass_channel(graph: &PipelineGraph, level: usize) -> Option<SpaceId> {
    graph.processes().iter().find_map(|p| {
        if p.kind != ProcessKind::Kernel || p.name != "reconstruct" || p.level != Some(level) {
            return None;
        }
        graph.inputs(p.id).first().copied()
    })
}

#[derive(Debug)]
pub struct CaseStudyRun {
    pub config: CaseStudyConfig,
    pub program: StudyProgram,
    pub graph: PipelineGraph,
    pub emission: Emission,
    pub depths: FifoDepths,
    /// Functional run at the minimum depths.
    pub report: SimReport,
    pub reference: Vec<TransferOutput>,
    pub comparisons: Vec<CompareReport>,
    pub oracle_match: bool,
    /// Relative residual after each multigrid cycle.
    pub residuals: Vec<f64>,
}

impl CaseStudyRun {
    pub fn output(&self) -> Option<&GridImage> {
        self.report.outputs.last().map(|o| &o.image)
    }

    pub fn summary(&self) -> String {
        let c = &self.config;
        let mut s = format!(
            "study={} dims={}x{} levels={} makespan={} fps={} max_depth={} oracle_match={}",
            c.study,
            c.width,
            c.height,
            c.levels,
            self.report.makespan_cycles,
            self.report.fps_frames.map_or("n/a".to_string(), |f| f.to_string()),
            self.depths.max(),
            self.oracle_match
        );
        if let Some(r) = self.residuals.last() {
            s.push_str(&format!(" relative_residual={r:.3e}"));
        }
        s
    }

    /// Writes image, DOT, structure, directives, graph and report files into
    /// `dir` and returns their paths.
    pub fn write_artifacts(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        let stem = self.config.study.to_string();
        let mut written = Vec::new();
        let mut put = |name: String, bytes: &[u8]| -> Result<()> {
            let path = dir.join(name);
            io::write_bytes(&path, bytes)?;
            written.push(path);
            Ok(())
        };
        if let Some(img) = self.output() {
            let ext = if img.kind() == ElementKind::U8 { "pgm" } else { "pfm" };
            let bytes = match img.kind() {
                ElementKind::U8 => io::write_pgm(img)?,
                ElementKind::F32 => io::write_pfm(img),
            };
            put(format!("{stem}.{ext}"), &bytes)?;
        }
        put(format!("{stem}.dot"), self.emission.dot.as_bytes())?;
        put(format!("{stem}.structure.txt"), self.emission.structure.as_bytes())?;
        put(format!("{stem}.directives.txt"), self.emission.directives.as_bytes())?;
        put(format!("{stem}.graph.json"), self.graph.to_json().as_bytes())?;
        put(format!("{stem}.report.json"), self.report.to_json().as_bytes())?;
        Ok(written)
    }
}

/// Builds, compiles, sizes, simulates and checks one case study.
pub fn run_case_study(cfg: &CaseStudyConfig, image: Option<GridImage>) -> Result<CaseStudyRun> {
    cfg.validate().map_err(in_stage("config"))?;
    let program = study_program(cfg).map_err(in_stage("frontend"))?;
    let graph = compile(&program.trace).map_err(in_stage("compile"))?;
    let emission = emit_structure(&graph).map_err(in_stage("emit"))?;
    let depths = min_fifo_depths(&graph, cfg.max_cycles).map_err(in_stage("fifo sizing"))?;
    let inputs = study_inputs(cfg, &program, image).map_err(in_stage("inputs"))?;
    let report = simulate(
        &graph,
        &SimOptions {
            capacities: depths.as_capacities(),
            max_cycles: cfg.max_cycles,
            clock_hz: Some(cfg.clock_hz),
            inputs: Some(&inputs),
            record_firings: false,
        },
    )
    .map_err(in_stage("simulate"))?;
    let reference = run_bufferwise(&program.trace, &inputs).map_err(in_stage("reference"))?;

    let mut comparisons = Vec::new();
    let mut oracle_match = report.deadlock.is_none() && report.outputs.len() == reference.len();
    if oracle_match {
        for (s, r) in report.outputs.iter().zip(&reference) {
            let c = compare_outputs(&s.image, &r.image).map_err(in_stage("compare"))?;
            oracle_match &= c.matches(F32_TOLERANCE);
            comparisons.push(c);
        }
    }

    let mut residuals = Vec::new();
    if cfg.study == Study::MultigridPoisson {
        let p = poisson_problem(cfg.width)?;
        for out in &reference {
            let q = GridProblem::new(out.image.clone(), p.f.clone(), p.h)?;
            residuals.push(relative_residual(&q)?);
        }
    }
    Ok(CaseStudyRun {
        config: cfg.clone(),
        program,
        graph,
        emission,
        depths,
        report,
        reference,
        comparisons,
        oracle_match,
        residuals,
    })
}
