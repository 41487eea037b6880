mod common;

use mrflow::frontend::MaskDef;
use mrflow::kernels::{
    bilateral, decompose, decompose_to, multigrid, resample, upsample, BilateralParams, BoundaryMode, Interp,
};
use mrflow::{ElementKind, GridImage};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn decompose_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (w, h) in [(16, 16), (17, 9), (33, 20), (2, 2)] {
        let img = common::random_image(&mut rng, w, h, ElementKind::F32);
        let out = decompose(&img, &MaskDef::gaussian3(), BoundaryMode::Clamp).unwrap();
        let want = common::decompose_f64(&img, w.div_ceil(2), h.div_ceil(2));
        for (a, b) in out.samples().iter().zip(&want) {
            assert!((*a as f64 - b).abs() <= 1e-4 * b.abs().max(1.0), "{a} vs {b}");
        }
        let floor = decompose_to(&img, &MaskDef::gaussian3(), BoundaryMode::Clamp, w / 2, h / 2).unwrap();
        let want = common::decompose_f64(&img, w / 2, h / 2);
        for (a, b) in floor.samples().iter().zip(&want) {
            assert!((*a as f64 - b).abs() <= 1e-4 * b.abs().max(1.0));
        }
    }
}

#[test]
fn residual_matches_dense_operator() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u = common::random_image(&mut rng, 9, 9, ElementKind::F32);
    let f = common::random_image(&mut rng, 9, 9, ElementKind::F32);
    let h = 0.125;
    let p = multigrid::GridProblem::new(u.clone(), f.clone(), h).unwrap();
    let r = multigrid::residual(&p).unwrap();
    let want = common::dense_residual(&u, &f, h as f64);
    let scale = want.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let err = r
        .samples()
        .iter()
        .zip(&want)
        .fold(0.0f64, |m, (a, b)| m.max((*a as f64 - b).abs()));
    assert!(err / scale <= 1e-6, "relative error {}", err / scale);
}

#[test]
fn bilinear_upsample_by_hand() {
    let img = GridImage::from_samples(2, 2, ElementKind::F32, vec![0.0, 4.0, 8.0, 12.0]).unwrap();
    let up = upsample(&img, 2, Interp::Bilinear).unwrap();
    let want = [
        0.0, 1.0, 3.0, 4.0, //
        2.0, 3.0, 5.0, 6.0, //
        6.0, 7.0, 9.0, 10.0, //
        8.0, 9.0, 11.0, 12.0,
    ];
    assert_eq!(up.samples(), &want);

    let near = upsample(&img, 2, Interp::Nearest).unwrap();
    assert_eq!(&near.samples()[..4], &[0.0, 0.0, 4.0, 4.0]);
}

#[test]
fn vertex_grid_prolongation_by_hand() {
    let coarse = GridImage::from_samples(
        3,
        3,
        ElementKind::F32,
        vec![0.0, 2.0, 4.0, 2.0, 4.0, 6.0, 4.0, 6.0, 8.0],
    )
    .unwrap();
    let fine = multigrid::prolongate(&coarse).unwrap();
    assert_eq!(fine.dims(), (5, 5));
    for y in 0..5 {
        for x in 0..5 {
            assert_eq!(fine.at(x, y), (x + y) as f32, "({x},{y})");
        }
    }
    let back = resample(&fine, Interp::Nearest, (3, 3)).unwrap();
    assert_eq!(back.samples(), coarse.samples());
}

#[test]
fn bilateral_matches_double_precision() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let img = common::step_noise_image(&mut rng, 32, 32);
    let f32_img = GridImage::from_samples(32, 32, ElementKind::F32, img.samples().to_vec()).unwrap();
    for radius in [1, 2] {
        let p = BilateralParams::new(radius as f32, 25.0, radius).unwrap();
        let out = bilateral(&f32_img, &p, BoundaryMode::Clamp).unwrap();
        let want = common::bilateral_f64(&f32_img, radius as f64, 25.0, radius);
        for (a, b) in out.samples().iter().zip(&want) {
            assert!((*a as f64 - b).abs() / b.abs().max(1.0) <= 1e-6);
        }
    }
}
