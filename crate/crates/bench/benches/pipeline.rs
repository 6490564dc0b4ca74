//! Criterion benchmarks: the image pipeline layers, the wavelet codec, and
//! the Paillier primitives.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use flep_core::key::KeyBundle;
use flep_core::noise::{NoiseSpec, SplitMix64};
use flep_core::pipeline::{self, PipelineConfig};
use flep_core::{he, wavelet, GrayImage, RealPlane};
use num_bigint::BigUint;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn bench_key() -> KeyBundle {
    KeyBundle {
        chaos_seed: 0.3141592653589793,
        chaos_param: 3.9999,
        block_side: 2,
        group_keys: vec![],
        secret_image_digest: String::new(),
        blend_alpha: 0.9,
        noise: NoiseSpec {
            mean: 0.0,
            std: 25.0,
            seed: 7,
        },
        diffusion_iv: 0x5a,
    }
}

fn random_image(side: usize, seed: u64) -> GrayImage {
    let mut rng = SplitMix64::new(seed);
    GrayImage::new(
        side,
        side,
        (0..side * side).map(|_| (rng.next_u64() & 0xff) as u8).collect(),
    )
    .unwrap()
}

fn pipeline_benches(c: &mut Criterion) {
    let key = bench_key();
    let cfg = PipelineConfig::default();
    let img = random_image(256, 1);
    let secret = random_image(256, 2);
    let sealed = pipeline::encrypt_pipeline(&img, Some(&secret), &key, &cfg).unwrap();

    c.bench_function("encrypt_256", |b| {
        b.iter(|| pipeline::encrypt_pipeline(&img, Some(&secret), &key, &cfg).unwrap())
    });
    c.bench_function("decrypt_256", |b| {
        b.iter(|| pipeline::decrypt_pipeline(&sealed, Some(&secret), &key, &cfg).unwrap())
    });
    c.bench_function("cipher_image_256", |b| {
        b.iter(|| pipeline::cipher_image(&img, &key).unwrap())
    });
}

fn wavelet_benches(c: &mut Criterion) {
    let mut rng = SplitMix64::new(3);
    let plane = RealPlane::new(
        256,
        256,
        (0..256 * 256).map(|_| rng.next_f64() * 255.0).collect(),
    )
    .unwrap();
    let bands = wavelet::dwt2(&plane).unwrap();

    c.bench_function("dwt2_256", |b| b.iter(|| wavelet::dwt2(&plane).unwrap()));
    c.bench_function("idwt2_256", |b| b.iter(|| wavelet::idwt2(&bands).unwrap()));
}

fn paillier_benches(c: &mut Criterion) {
    let mut rng = StdRng::seed_from_u64(11);
    let keys = he::keygen(512, &mut rng).unwrap();
    let m: BigUint = rng.sample(num_bigint::RandomBits::new(256));
    let c1 = he::encrypt(&m, keys.public(), &mut rng).unwrap();
    let c2 = he::encrypt(&m, keys.public(), &mut rng).unwrap();

    c.bench_function("paillier_encrypt_512", |b| {
        b.iter_batched(
            || StdRng::seed_from_u64(99),
            |mut r| he::encrypt(&m, keys.public(), &mut r).unwrap(),
            BatchSize::SmallInput,
        )
    });
    c.bench_function("paillier_decrypt_512", |b| {
        b.iter(|| he::decrypt(&c1, &keys).unwrap())
    });
    c.bench_function("paillier_he_add_512", |b| {
        b.iter(|| he::he_add(&c1, &c2, keys.public()).unwrap())
    });
}

criterion_group!(benches, pipeline_benches, wavelet_benches, paillier_benches);
criterion_main!(benches);
