use std::fs;

use ipfe_core::array_io::{
    decode, encode, header_len, read_array, read_kernel, read_sidecar, write_array, write_kernel,
    Tensor, MAGIC,
};
use ipfe_core::config::{parse_config, DEFAULT_N_REALIZATIONS, DEFAULT_N_SLABS};
use ipfe_core::moments::MomentKernel;
use ipfe_core::phase_screen::check_outer_scale;
use ipfe_core::{Complex64, Error, FrequencyGrid};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random(len: usize, seed: u64) -> Vec<Complex64> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    (0..len)
        .map(|_| Complex64::new(r.random::<f64>() - 0.5, r.random::<f64>() * 1e-300))
        .collect()
}

#[test]
fn rank2_round_trip_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.ipfe");
    let mut data = random(12, 1);
    data[3] = Complex64::new(-0.0, f64::MIN_POSITIVE / 4.0);
    data[7] = Complex64::new(f64::MAX, f64::NEG_INFINITY);
    let t = Tensor::new(vec![3, 4], data).unwrap();
    write_array(&path, &t).unwrap();
    let back = read_array(&path).unwrap();
    assert_eq!(back.shape, t.shape);
    for (a, b) in back.data.iter().zip(&t.data) {
        assert_eq!(a.re.to_bits(), b.re.to_bits());
        assert_eq!(a.im.to_bits(), b.im.to_bits());
    }
}

#[test]
fn wrong_magic_is_rejected() {
    let t = Tensor::new(vec![2], random(2, 2)).unwrap();
    let mut b = encode(&t);
    assert_eq!(&b[..4], MAGIC);
    b[0] = b'X';
    assert!(matches!(decode(&b), Err(Error::Format(_))));
}

#[test]
fn rank4_file_size() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r4.ipfe");
    let t = Tensor::new(vec![8; 4], random(8usize.pow(4), 3)).unwrap();
    write_array(&path, &t).unwrap();
    let size = fs::metadata(&path).unwrap().len() as usize;
    assert_eq!(size, header_len(4) + 2 * 8 * 8usize.pow(4));
}

#[test]
fn kernel_round_trip_with_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.ipfe");
    let g = FrequencyGrid::new(1, 8, 5.0, 1e-6).unwrap();
    let mut h = MomentKernel::from_values(2, 2, g, random(8usize.pow(4), 4)).unwrap();
    h.z = 12.5;
    write_kernel(&path, &h, "bi-photon").unwrap();
    let back = read_kernel(&path).unwrap();
    assert_eq!(back, h);
    let meta = read_sidecar(&path).unwrap();
    assert_eq!(meta.order, Some([2, 2]));
    assert_eq!(meta.grid, g);
    assert!(meta.units.contains("cycles/m"));

    let g2 = FrequencyGrid::new(2, 4, 5.0, 1e-6).unwrap();
    let k = MomentKernel::from_values(1, 1, g2, random(256, 5)).unwrap();
    write_kernel(&path, &k, "coherence").unwrap();
    assert_eq!(read_array(&path).unwrap().shape, vec![4; 4]);
    assert_eq!(read_kernel(&path).unwrap(), k);
}

#[test]
fn minimal_config_gets_defaults() {
    let cfg = parse_config(
        r#"{"model": {"kind": "von_karman", "cn2": 1e-14, "outer_scale": 0.05},
            "grid": {"dim": 1, "n": 32, "delta_a": 5.0, "wavelength": 1e-6},
            "plan": {"z_total": 10.0}}"#,
    )
    .unwrap();
    assert_eq!(cfg.plan.n_slabs, DEFAULT_N_SLABS);
    assert_eq!(cfg.plan.n_slabs, 64);
    assert_eq!(cfg.plan.n_realizations, DEFAULT_N_REALIZATIONS);
    assert_eq!(cfg.plan.n_realizations, 500);
}

#[test]
fn outer_scale_beyond_support_is_flagged() {
    let cfg = parse_config(
        r#"{"model": {"kind": "von_karman", "cn2": 1e-18, "outer_scale": 10.0},
            "grid": {"dim": 1, "n": 32, "delta_a": 5.0, "wavelength": 1e-6},
            "plan": {"z_total": 10.0}}"#,
    )
    .unwrap();
    assert!(!check_outer_scale(&cfg.model, &cfg.grid));
    assert!(check_outer_scale(&cfg.model, &FrequencyGrid::new(1, 32, 0.05, 1e-6).unwrap()));
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn any_tensor_round_trips(shape in prop::collection::vec(1usize..5, 0..4), seed in any::<u64>()) {
        let len = shape.iter().product();
        let t = Tensor::new(shape, random(len, seed)).unwrap();
        let b = encode(&t);
        prop_assert_eq!(b.len(), header_len(t.rank()) + 16 * len);
        prop_assert_eq!(decode(&b).unwrap(), t);
    }
}
