//! Cross-checks of the fast implementations against the independent
//! reference implementations in flep-oracles.

mod common;

use flep_core::image::RealPlane;
use flep_core::noise::SplitMix64;
use flep_core::{he, metrics, scramble, wavelet};
use flep_oracles as oracles;
use num_bigint::BigUint;

fn random_plane(w: usize, h: usize, seed: u64) -> RealPlane {
    let mut rng = SplitMix64::new(seed);
    RealPlane::new(w, h, (0..w * h).map(|_| rng.next_f64() * 255.0).collect()).unwrap()
}

#[test]
fn dwt2_matches_matrix_oracle_on_random_planes() {
    for seed in 0..100u64 {
        let plane = random_plane(8, 8, seed);
        let fast = wavelet::dwt2(&plane).unwrap();
        let reference = oracles::dwt2_reference(&plane).unwrap();
        for (band, (a, b)) in [
            (&fast.ll, &reference.ll),
            (&fast.lh, &reference.lh),
            (&fast.hl, &reference.hl),
            (&fast.hh, &reference.hh),
        ]
        .iter()
        .enumerate()
        {
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!(
                    (x - y).abs() < 1e-9,
                    "seed {seed} band {band}: {x} vs {y}"
                );
            }
        }
    }
}

#[test]
fn dwt2_constant_plane_closed_form_in_both() {
    let plane = RealPlane::new(4, 4, vec![10.0; 16]).unwrap();
    let fast = wavelet::dwt2(&plane).unwrap();
    let reference = oracles::dwt2_reference(&plane).unwrap();
    // Orthonormal Haar sends a constant c to LL = 2c, details zero.
    for v in fast.ll.values().iter().chain(reference.ll.values()) {
        assert!((v - 20.0).abs() < 1e-12);
    }
    for band in [&fast.lh, &fast.hl, &fast.hh, &reference.lh, &reference.hl, &reference.hh] {
        assert!(band.values().iter().all(|v| v.abs() < 1e-12));
    }
}

#[test]
fn reference_dwt_conserves_energy_too() {
    let plane = random_plane(8, 8, 7);
    let bands = oracles::dwt2_reference(&plane).unwrap();
    let input: f64 = plane.values().iter().map(|v| v * v).sum();
    let output: f64 = [&bands.ll, &bands.lh, &bands.hl, &bands.hh]
        .iter()
        .flat_map(|b| b.values())
        .map(|v| v * v)
        .sum();
    assert!((input - output).abs() < 1e-6, "{input} vs {output}");
}

#[test]
fn metrics_match_reference_on_random_pairs() {
    for seed in 0..50u64 {
        let plain = common::natural_image(32, 32, 100 + seed);
        let c1 = common::uniform_image(32, 32, 200 + seed);
        let c2 = common::uniform_image(32, 32, 300 + seed);
        let reference = oracles::metrics_reference(&c1, &c2, &plain);
        assert_eq!(metrics::npcr(&c1, &c2).unwrap(), reference.npcr);
        assert_eq!(metrics::uaci(&c1, &c2).unwrap(), reference.uaci);
        assert!((metrics::entropy(&c1) - reference.entropy_c1).abs() < 1e-12);
        assert_eq!(
            metrics::encryption_quality(&plain, &c1),
            reference.encryption_quality
        );
    }
}

#[test]
fn permutation_matches_sort_based_reference() {
    let mut rng = SplitMix64::new(17);
    for len in [1usize, 2, 5, 16, 64, 257] {
        let keys: Vec<f64> = (0..len).map(|_| rng.next_f64()).collect();
        assert_eq!(
            scramble::derive_permutation(&keys).forward,
            oracles::permutation_reference(&keys)
        );
    }
}

#[test]
fn paillier_toy_key_exhaustive_oracle_passes() {
    oracles::paillier_exhaustive_check(11, 13).unwrap();
}

#[test]
fn paillier_oracle_rejects_equal_primes() {
    assert!(oracles::paillier_exhaustive_check(11, 11).is_err());
}

#[test]
fn paillier_oracle_catches_corrupted_mu() {
    // Negative control: tamper with mu through the wire format and confirm
    // the exhaustive check notices.
    let keys = he::HeKeyPair::from_primes(&BigUint::from(11u8), &BigUint::from(13u8)).unwrap();
    let wire = he::serialize_keypair(&keys);
    let tampered: serde_json::Value = {
        let mut v: serde_json::Value = serde_json::from_str(&wire).unwrap();
        let mu = BigUint::parse_bytes(v["mu"].as_str().unwrap().as_bytes(), 16).unwrap();
        let bad = (mu + BigUint::from(1u8)) % BigUint::from(143u8);
        v["mu"] = serde_json::Value::String(format!("{bad:x}"));
        v
    };
    let bad_keys = he::parse_keypair(&tampered.to_string()).unwrap();
    assert!(oracles::paillier_check_with(&bad_keys, 143).is_err());
}
