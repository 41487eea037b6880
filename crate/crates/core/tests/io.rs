use mrflow::io::{load_image, read_pfm, read_pgm, save_image, write_pfm, write_pgm};
use mrflow::{ElementKind, Error, GridImage};
use proptest::prelude::*;

fn scratch(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("mrflow-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn pfm_layout_is_bottom_up_little_endian() {
    let img = GridImage::from_samples(2, 2, ElementKind::F32, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
    let bytes = write_pfm(&img);
    let header = b"Pf\n2 2\n-1.0\n";
    assert_eq!(&bytes[..header.len()], header);
    let body: Vec<f32> = bytes[header.len()..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    assert_eq!(body, [3.0, 4.0, 1.0, 2.0]);
}

#[test]
fn pgm_header_with_comments_and_small_maxval() {
    let bytes = b"P5\n# made by hand\n2 1\n# max\n15\n\x03\x0f";
    let img = read_pgm(bytes).unwrap();
    assert_eq!(img.samples(), &[3.0, 15.0]);
    assert!(matches!(read_pgm(b"P5\n2 1\n15\n\x03\x10"), Err(Error::Parse { .. })));
    assert!(matches!(read_pgm(b"P5\n2 2\n255\n\x00"), Err(Error::Parse { .. })));
}

#[test]
fn big_endian_and_colour_pfm_are_rejected() {
    let err = read_pfm(b"Pf\n1 1\n1.0\n\x00\x00\x80\x3f").unwrap_err();
    assert!(err.to_string().contains("big-endian unsupported"), "{err}");
    let err = read_pfm(b"PF\n1 1\n-1.0\n").unwrap_err();
    assert!(err.to_string().contains("colour PFM unsupported"), "{err}");
}

#[test]
fn files_dispatch_on_magic() {
    let u = GridImage::from_u8(3, 1, &[9, 8, 7]).unwrap();
    let f = GridImage::from_samples(1, 3, ElementKind::F32, vec![-0.5, 1e-3, 7.25]).unwrap();
    let (pu, pf) = (scratch("u.pgm"), scratch("f.pfm"));
    save_image(&pu, &u).unwrap();
    save_image(&pf, &f).unwrap();
    assert_eq!(load_image(&pu).unwrap(), u);
    assert_eq!(load_image(&pf).unwrap(), f);
    std::fs::write(scratch("x.bin"), b"P6\n1 1\n255\n\0\0\0").unwrap();
    assert!(load_image(&scratch("x.bin")).is_err());
    assert!(write_pgm(&f).is_err());
}

proptest! {
    #[test]
    fn pgm_round_trip(w in 1usize..20, h in 1usize..20, seed in any::<u64>()) {
        let bytes: Vec<u8> = (0..w * h).map(|i| (seed.wrapping_mul(i as u64 + 1) >> 7) as u8).collect();
        let img = GridImage::from_u8(w, h, &bytes).unwrap();
        prop_assert_eq!(read_pgm(&write_pgm(&img).unwrap()).unwrap(), img);
    }

    #[test]
    fn pfm_round_trip(w in 1usize..12, h in 1usize..12, v in prop::collection::vec(-1e6f32..1e6, 144)) {
        let img = GridImage::from_samples(w, h, ElementKind::F32, v[..w * h].to_vec()).unwrap();
        prop_assert_eq!(read_pfm(&write_pfm(&img)).unwrap(), img);
    }
}
