//! Property tests for the invertible layers and the wire formats.

mod common;

use flep_core::image::GrayImage;
use flep_core::key::{self, KeyBundle};
use flep_core::noise::NoiseSpec;
use flep_core::payload::{self, EncryptedPayload};
use flep_core::pipeline::{self, PipelineConfig};
use flep_core::{metrics, pgm, scramble, wavelet};
use proptest::prelude::*;

fn arb_key() -> impl Strategy<Value = KeyBundle> {
    (
        0.001f64..0.999,
        3.9f64..3.9999,
        prop_oneof![Just(2usize), Just(4usize)],
        0.05f64..1.0,
        any::<u64>(),
        any::<u8>(),
    )
        .prop_map(|(seed, param, side, alpha, noise_seed, iv)| KeyBundle {
            chaos_seed: seed,
            chaos_param: param,
            block_side: side,
            group_keys: vec![],
            secret_image_digest: String::new(),
            blend_alpha: alpha,
            noise: NoiseSpec {
                mean: 0.0,
                std: 25.0,
                seed: noise_seed,
            },
            diffusion_iv: iv,
        })
        .prop_filter("fixed-point seed", |k| k.validate().is_ok())
}

fn arb_image(side: usize) -> impl Strategy<Value = GrayImage> {
    proptest::collection::vec(any::<u8>(), side * side)
        .prop_map(move |pixels| GrayImage::new(side, side, pixels).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scramble_round_trips(img in arb_image(8), key in arb_key()) {
        let scrambled = scramble::scramble(&img, &key).unwrap();
        prop_assert_eq!(scramble::descramble(&scrambled, &key).unwrap(), img);
    }

    #[test]
    fn scramble_preserves_pixel_multiset(img in arb_image(8), key in arb_key()) {
        let scrambled = scramble::scramble(&img, &key).unwrap();
        prop_assert_eq!(metrics::histogram(&img), metrics::histogram(&scrambled));
    }

    #[test]
    fn diffuse_round_trips(img in arb_image(8), key in arb_key()) {
        let cipher = scramble::diffuse(&img, &key).unwrap();
        prop_assert_eq!(scramble::undiffuse(&cipher, &key).unwrap(), img);
    }

    #[test]
    fn blend_round_trips_below_1e6(
        img in arb_image(8),
        secret in arb_image(8),
        key in arb_key(),
    ) {
        let encoded = wavelet::blend_encode(&img, &secret, key.blend_alpha).unwrap();
        let decoded = wavelet::blend_decode(&encoded, &secret, key.blend_alpha).unwrap();
        for (d, p) in decoded.values().iter().zip(img.pixels()) {
            prop_assert!((d - f64::from(*p)).abs() < 1e-6);
        }
    }

    #[test]
    fn full_pipeline_round_trips_exactly(
        img in arb_image(8),
        secret in arb_image(8),
        key in arb_key(),
    ) {
        let cfg = PipelineConfig::default();
        let sealed = pipeline::encrypt_pipeline(&img, Some(&secret), &key, &cfg).unwrap();
        let opened = pipeline::decrypt_pipeline(&sealed, Some(&secret), &key, &cfg).unwrap();
        prop_assert_eq!(opened.image, img);
        prop_assert_eq!(opened.out_of_range, 0);
    }

    #[test]
    fn payload_wire_format_round_trips(
        img in arb_image(4),
        key_id in "[0-9a-f]{16}",
    ) {
        let sealed = EncryptedPayload::new(img.to_plane(), key_id);
        let bytes = payload::serialize_payload(&sealed);
        let back = payload::deserialize_payload(&bytes).unwrap();
        prop_assert_eq!(back.key_id, sealed.key_id);
        prop_assert_eq!(back.plane, sealed.plane);
    }

    #[test]
    fn key_bundle_json_round_trips_floats_exactly(key in arb_key()) {
        let text = key::serialize_keybundle(&key).unwrap();
        let back = key::parse_keybundle(&text).unwrap();
        prop_assert_eq!(back.chaos_seed.to_bits(), key.chaos_seed.to_bits());
        prop_assert_eq!(back.chaos_param.to_bits(), key.chaos_param.to_bits());
        prop_assert_eq!(back.blend_alpha.to_bits(), key.blend_alpha.to_bits());
        prop_assert_eq!(back.key_id(), key.key_id());
    }

    #[test]
    fn pgm_bytes_round_trip(img in arb_image(4)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.pgm");
        pgm::save_pgm(&img, &path).unwrap();
        prop_assert_eq!(pgm::load_pgm(&path).unwrap(), img);
    }
}

/// Chaos-seed sensitivity: a 1e-10 nudge must re-randomize essentially the
/// whole cipher image.
#[test]
fn nearby_chaos_seeds_give_unrelated_ciphertexts() {
    let img = common::natural_image(256, 256, 7000);
    let key = common::corpus_key();
    let nudged = KeyBundle {
        chaos_seed: key.chaos_seed + 1e-10,
        ..key.clone()
    };
    let c1 = pipeline::cipher_image(&img, &key).unwrap();
    let c2 = pipeline::cipher_image(&img, &nudged).unwrap();
    let rate = metrics::npcr(&c1, &c2).unwrap();
    assert!(rate >= 99.0, "NPCR between nearby-seed ciphertexts: {rate}");
}
