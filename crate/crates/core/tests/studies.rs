use mrflow::kernels::{FusionMode, Interp};
use mrflow::studies::{bypass_channel, run_case_study, CaseStudyConfig};
use mrflow::ElementKind;

fn small_pyramid() -> CaseStudyConfig {
    let mut c = CaseStudyConfig::bilateral_pyramid(1);
    c.width = 64;
    c.height = 64;
    c.levels = 4;
    c
}

#[test]
fn small_pyramid_matches_reference() {
    let run = run_case_study(&small_pyramid(), None).unwrap();
    assert!(run.oracle_match, "{:?}", run.comparisons);
    assert!(run.report.deadlock.is_none());
    assert_eq!(run.report.makespan_cycles, run.depths.makespan_cycles);
    let out = run.output().unwrap();
    assert_eq!((out.dims(), out.kind()), ((64, 64), ElementKind::U8));
    let by = bypass_channel(&run.graph, 0).unwrap();
    assert_eq!(run.depths.depths[by.0], run.report.high_water(by));
}

#[test]
fn laplacian_bilinear_pyramid_matches_reference() {
    let mut c = small_pyramid();
    c.radius = 2;
    c.sigma_s = 2.0;
    c.fusion = FusionMode::Laplacian;
    c.interp = Interp::Bilinear;
    let run = run_case_study(&c, None).unwrap();
    assert!(run.oracle_match, "{:?}", run.comparisons);
}

#[test]
fn multigrid_cycles_reduce_the_residual() {
    let mut c = CaseStudyConfig::multigrid();
    c.width = 33;
    c.height = 33;
    c.levels = 3;
    c.cycles = 3;
    let run = run_case_study(&c, None).unwrap();
    assert!(run.oracle_match, "{:?}", run.comparisons);
    assert_eq!(run.residuals.len(), 3);
    assert!(run.residuals.windows(2).all(|w| w[1] < w[0]), "{:?}", run.residuals);
    assert!(run.summary().contains("relative_residual="));
}

#[test]
fn odd_multigrid_sizes_are_rejected() {
    let mut c = CaseStudyConfig::multigrid();
    c.width = 64;
    c.height = 64;
    assert!(run_case_study(&c, None).is_err());
}
