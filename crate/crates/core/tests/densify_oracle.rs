mod common;

use common::{dilate_mask_oracle, dilate_oracle, random_sparse_map, ORACLE_KERNELS};
use lidepth::{inverse_dilate, sparsity, StructuringElement};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn kernel(name: &str) -> StructuringElement {
    name.parse().unwrap()
}

#[test]
fn matches_min_over_neighborhood_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x64696c61);
    let kernels: Vec<_> = ORACLE_KERNELS.iter().map(|k| (*k, kernel(k))).collect();
    for case in 0..250 {
        let density = rng.random_range(0.01..0.20);
        let map = random_sparse_map(&mut rng, 64, 64, density);
        for (name, k) in &kernels {
            let out = inverse_dilate(&map, k);
            assert_eq!(
                out.as_slice(),
                &dilate_oracle(&map, name)[..],
                "case {case} {name}"
            );
            let mask = dilate_mask_oracle(&map.valid_mask(), 64, 64, name);
            assert_eq!(out.valid_mask(), mask, "case {case} {name}");
        }
    }
}

#[test]
fn non_square_maps_and_borders() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let (w, h) = (rng.random_range(1..20), rng.random_range(1..20));
        let density = rng.random_range(0.0..0.5);
        let map = random_sparse_map(&mut rng, w, h, density);
        for name in ORACLE_KERNELS {
            assert_eq!(
                inverse_dilate(&map, &kernel(name)).as_slice(),
                &dilate_oracle(&map, name)[..]
            );
        }
    }
}

#[test]
fn larger_kernels_leave_fewer_holes() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let density = rng.random_range(0.01..0.20);
        let map = random_sparse_map(&mut rng, 64, 64, density);
        let s = |name| sparsity(&inverse_dilate(&map, &kernel(name)));
        assert!(s("full:5") <= s("diamond:5"));
        assert!(s("diamond:5") <= s("cross:5"));
        assert!(s("cross:5") <= s("cross:3"));
        assert!(s("cross:3") <= sparsity(&map));
    }
}

#[test]
fn never_farther_than_the_input() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..200 {
        let density = rng.random_range(0.01..0.20);
        let map = random_sparse_map(&mut rng, 64, 64, density);
        let out = inverse_dilate(&map, &kernel("diamond:5"));
        for (o, i) in out.as_slice().iter().zip(map.as_slice()) {
            if *i > 0.0 {
                assert!(*o > 0.0 && o <= i);
            }
        }
    }
}

#[test]
fn single_cell_kernel_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..50 {
        let map = random_sparse_map(&mut rng, 37, 23, 0.3);
        assert_eq!(inverse_dilate(&map, &kernel("full:1")), map);
    }
}
