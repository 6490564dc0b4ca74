//! Shared fixtures for the integration and acceptance tests: a deterministic
//! synthetic corpus of natural-looking 256x256 images and a pinned key.

// Each test target pulls in this module but uses a different subset of it.
#![allow(dead_code)]

use flep_core::image::GrayImage;
use flep_core::key::KeyBundle;
use flep_core::noise::{NoiseSpec, SplitMix64};

/// Smooth synthetic image: a random low-resolution grid bilinearly
/// upsampled, giving the lumpy concentrated histogram of a natural photo.
pub fn natural_image(width: usize, height: usize, seed: u64) -> GrayImage {
    let grid = 16usize;
    let mut rng = SplitMix64::new(seed);
    let coarse: Vec<f64> = (0..(grid + 1) * (grid + 1))
        .map(|_| 30.0 + rng.next_f64() * 195.0)
        .collect();
    let mut pixels = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let fx = x as f64 / width as f64 * grid as f64;
            let fy = y as f64 / height as f64 * grid as f64;
            let (x0, y0) = (fx as usize, fy as usize);
            let (tx, ty) = (fx - x0 as f64, fy - y0 as f64);
            let at = |gx: usize, gy: usize| coarse[gy * (grid + 1) + gx];
            let top = at(x0, y0) * (1.0 - tx) + at(x0 + 1, y0) * tx;
            let bottom = at(x0, y0 + 1) * (1.0 - tx) + at(x0 + 1, y0 + 1) * tx;
            let v = top * (1.0 - ty) + bottom * ty;
            pixels.push(v.round().clamp(0.0, 255.0) as u8);
        }
    }
    GrayImage::new(width, height, pixels).unwrap()
}

/// Independent uniform random image.
pub fn uniform_image(width: usize, height: usize, seed: u64) -> GrayImage {
    let mut rng = SplitMix64::new(seed);
    let pixels = (0..width * height)
        .map(|_| (rng.next_u64() & 0xff) as u8)
        .collect();
    GrayImage::new(width, height, pixels).unwrap()
}

/// The key every corpus test runs under. Pinned so the chaotic keystream,
/// and with it every statistical result, is reproducible.
pub fn corpus_key() -> KeyBundle {
    KeyBundle {
        chaos_seed: 0.7390851332151607,
        chaos_param: 3.9999,
        block_side: 2,
        group_keys: vec![],
        secret_image_digest: String::new(),
        blend_alpha: 0.9,
        noise: NoiseSpec {
            mean: 0.0,
            std: 25.0,
            seed: 20240817,
        },
        diffusion_iv: 0x5a,
    }
}

/// Writes the ten-file corpus into `dir` and returns the file names.
pub fn write_corpus(dir: &std::path::Path) -> Vec<String> {
    let mut names = Vec::new();
    for i in 0..10u64 {
        let img = natural_image(256, 256, 7000 + i);
        let name = format!("img{i:02}.pgm");
        flep_core::pgm::save_pgm(&img, dir.join(&name)).unwrap();
        names.push(name);
    }
    names
}
