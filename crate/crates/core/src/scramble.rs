//! First security layer: sub-block spiral scrambling, chaotic block
//! reordering, and keyed value diffusion, with exact inverses.

use crate::chaos::{self, ChaoticSequence, DEFAULT_BURN_IN};
use crate::error::{FlepError, Result};
use crate::image::GrayImage;
use crate::key::KeyBundle;
use crate::noise::mix64;

/// Bijection on block indices derived from chaotic ordering keys.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPermutation {
    /// forward[i] is the destination position of source block i.
    pub forward: Vec<usize>,
}

impl BlockPermutation {
    pub fn n_blocks(&self) -> usize {
        self.forward.len()
    }

    pub fn inverse(&self) -> BlockPermutation {
        let mut inv = vec![0; self.forward.len()];
        for (i, &dst) in self.forward.iter().enumerate() {
            inv[dst] = i;
        }
        BlockPermutation { forward: inv }
    }
}

/// Ranks the ordering keys ascending: forward[i] is the rank of keys[i].
/// Ties break by original index so the permutation is always total.
pub fn derive_permutation(keys: &[f64]) -> BlockPermutation {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| {
        keys[a]
            .partial_cmp(&keys[b])
            .expect("ordering keys are finite")
            .then(a.cmp(&b))
    });
    let mut forward = vec![0; keys.len()];
    for (rank, &i) in order.iter().enumerate() {
        forward[i] = rank;
    }
    BlockPermutation { forward }
}

/// Visit order of a clockwise inward spiral over an s-by-s block, starting
/// at the top-left corner. Returned as (row, col) pairs.
pub fn spiral_order(s: usize) -> Vec<(usize, usize)> {
    let mut order = Vec::with_capacity(s * s);
    let (mut top, mut bottom, mut left, mut right) = (0isize, s as isize - 1, 0isize, s as isize - 1);
    while top <= bottom && left <= right {
        for c in left..=right {
            order.push((top as usize, c as usize));
        }
        for r in top + 1..=bottom {
            order.push((r as usize, right as usize));
        }
        if top < bottom {
            for c in (left..right).rev() {
                order.push((bottom as usize, c as usize));
            }
        }
        if left < right {
            for r in (top + 1..bottom).rev() {
                order.push((r as usize, left as usize));
            }
        }
        top += 1;
        bottom -= 1;
        left += 1;
        right -= 1;
    }
    order
}

/// Reads a square block in clockwise inward spiral order.
pub fn spiral_scan(block: &[Vec<u8>]) -> Result<Vec<u8>> {
    let s = block.len();
    if s < 2 || block.iter().any(|row| row.len() != s) {
        return Err(FlepError::Dimension(format!(
            "spiral scan needs a square block with side >= 2, got {s} rows"
        )));
    }
    Ok(spiral_order(s)
        .into_iter()
        .map(|(r, c)| block[r][c])
        .collect())
}

/// Places a flat spiral sequence back into its s-by-s block.
pub fn inverse_spiral(flat: &[u8], s: usize) -> Result<Vec<Vec<u8>>> {
    if s < 2 || flat.len() != s * s {
        return Err(FlepError::Dimension(format!(
            "expected {} values for side {s}, got {}",
            s * s,
            flat.len()
        )));
    }
    let mut block = vec![vec![0u8; s]; s];
    for ((r, c), &v) in spiral_order(s).into_iter().zip(flat) {
        block[r][c] = v;
    }
    Ok(block)
}

fn check_divisible(img: &GrayImage, s: usize) -> Result<(usize, usize)> {
    if s < 2 || img.width() % s != 0 || img.height() % s != 0 {
        return Err(FlepError::Dimension(format!(
            "block side {s} does not divide {}x{}",
            img.width(),
            img.height()
        )));
    }
    Ok((img.width() / s, img.height() / s))
}

/// Ordering keys for an image of `n_blocks` blocks: the stored group keys
/// when they fit, otherwise a freshly derived chaotic sequence.
fn ordering_keys(key: &KeyBundle, n_blocks: usize) -> Result<Vec<f64>> {
    if key.group_keys.len() == n_blocks {
        return Ok(key.group_keys.clone());
    }
    Ok(group_keys_for(key, n_blocks)?.values().to_vec())
}

/// The chaotic sequence acting as group keys for a given block count.
pub fn group_keys_for(key: &KeyBundle, n_blocks: usize) -> Result<ChaoticSequence> {
    chaos::logistic_sequence(key.chaos_seed, key.chaos_param, DEFAULT_BURN_IN, n_blocks)
}

/// Spiral-scans every sub-block, then reorders the blocks by the rank of
/// their chaotic ordering keys. A pure pixel permutation of the input.
pub fn scramble(img: &GrayImage, key: &KeyBundle) -> Result<GrayImage> {
    apply_scramble(img, key, false)
}

/// Exact inverse of [`scramble`].
pub fn descramble(img: &GrayImage, key: &KeyBundle) -> Result<GrayImage> {
    apply_scramble(img, key, true)
}

fn apply_scramble(img: &GrayImage, key: &KeyBundle, invert: bool) -> Result<GrayImage> {
    let s = key.block_side;
    let (bw, bh) = check_divisible(img, s)?;
    let n_blocks = bw * bh;
    let perm = derive_permutation(&ordering_keys(key, n_blocks)?);
    let order = spiral_order(s);
    let w = img.width();

    let mut out = vec![0u8; w * img.height()];
    for block in 0..n_blocks {
        let (src_block, dst_block) = if invert {
            (perm.forward[block], block)
        } else {
            (block, perm.forward[block])
        };
        let (sx, sy) = (src_block % bw * s, src_block / bw * s);
        let (dx, dy) = (dst_block % bw * s, dst_block / bw * s);
        for (k, &(r, c)) in order.iter().enumerate() {
            // Forward: spiral-read source, row-major-write destination.
            let (kr, kc) = (k / s, k % s);
            if invert {
                out[(dy + r) * w + dx + c] = img.pixels()[(sy + kr) * w + sx + kc];
            } else {
                out[(dy + kr) * w + dx + kc] = img.pixels()[(sy + r) * w + sx + c];
            }
        }
    }
    GrayImage::new(w, img.height(), out)
}

/// Two chained keyed passes over the raster. Each pass XORs the pixel with a
/// chaotic keystream byte and a byte drawn from a 64-bit rolling state that
/// absorbs the pass input, so a single-pixel change re-randomizes every
/// later state in the forward pass and every earlier one in the backward
/// pass. State extraction uses mix64, whose zero fixed point makes the
/// all-zero input with zero keystream and zero IV an absorbing case.
pub fn diffuse(img: &GrayImage, key: &KeyBundle) -> Result<GrayImage> {
    let (k1, k2) = diffusion_keystreams(img, key)?;
    let mut data = img.pixels().to_vec();
    forward_pass(&mut data, &k1, key.diffusion_iv, false);
    backward_pass(&mut data, &k2, key.diffusion_iv, false);
    GrayImage::new(img.width(), img.height(), data)
}

/// Exact inverse of [`diffuse`]: undoes the backward pass, then the forward.
pub fn undiffuse(img: &GrayImage, key: &KeyBundle) -> Result<GrayImage> {
    let (k1, k2) = diffusion_keystreams(img, key)?;
    let mut data = img.pixels().to_vec();
    backward_pass(&mut data, &k2, key.diffusion_iv, true);
    forward_pass(&mut data, &k1, key.diffusion_iv, true);
    GrayImage::new(img.width(), img.height(), data)
}

/// Both diffusion keystreams come from the same orbit as the group keys,
/// offset past the block-ordering values so the streams never overlap.
fn diffusion_keystreams(img: &GrayImage, key: &KeyBundle) -> Result<(Vec<u8>, Vec<u8>)> {
    let s = key.block_side;
    let (bw, bh) = check_divisible(img, s)?;
    let n = img.width() * img.height();
    let seq = chaos::logistic_sequence(
        key.chaos_seed,
        key.chaos_param,
        DEFAULT_BURN_IN + bw * bh,
        2 * n,
    )?;
    let bytes = chaos::keystream_bytes(&seq, 2 * n)?;
    Ok((bytes[..n].to_vec(), bytes[n..].to_vec()))
}

pub(crate) fn forward_pass(data: &mut [u8], keystream: &[u8], iv: u8, invert: bool) {
    let mut state = u64::from(iv);
    for i in 0..data.len() {
        let mixed = data[i] ^ keystream[i] ^ (state & 0xff) as u8;
        let plain = if invert { mixed } else { data[i] };
        data[i] = mixed;
        // State absorbs the plaintext byte of this position.
        state = mix64(state ^ u64::from(plain));
    }
}

pub(crate) fn backward_pass(data: &mut [u8], keystream: &[u8], iv: u8, invert: bool) {
    let mut state = u64::from(iv);
    for i in (0..data.len()).rev() {
        let mixed = data[i] ^ keystream[i] ^ (state & 0xff) as u8;
        let input = if invert { mixed } else { data[i] };
        data[i] = mixed;
        // State absorbs the pass input (the forward-pass output byte).
        state = mix64(state ^ u64::from(input));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::SplitMix64;

    fn test_key() -> KeyBundle {
        KeyBundle {
            chaos_seed: 0.654321,
            chaos_param: 3.99,
            block_side: 2,
            group_keys: vec![],
            secret_image_digest: String::new(),
            blend_alpha: 0.9,
            noise: crate::noise::NoiseSpec {
                mean: 0.0,
                std: 25.0,
                seed: 1,
            },
            diffusion_iv: 0xa7,
        }
    }

    fn random_image(w: usize, h: usize, seed: u64) -> GrayImage {
        let mut rng = SplitMix64::new(seed);
        GrayImage::new(w, h, (0..w * h).map(|_| (rng.next_u64() & 0xff) as u8).collect()).unwrap()
    }

    #[test]
    fn spiral_2x2_and_3x3_hand_cases() {
        assert_eq!(
            spiral_scan(&[vec![1, 2], vec![3, 4]]).unwrap(),
            vec![1, 2, 4, 3]
        );
        assert_eq!(
            spiral_scan(&[vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 9]]).unwrap(),
            vec![1, 2, 3, 6, 9, 8, 7, 4, 5]
        );
    }

    #[test]
    fn spiral_rejects_tiny_or_ragged_blocks() {
        assert!(spiral_scan(&[vec![1]]).is_err());
        assert!(spiral_scan(&[vec![1, 2], vec![3]]).is_err());
    }

    #[test]
    fn inverse_spiral_hand_case_and_round_trip() {
        assert_eq!(
            inverse_spiral(&[1, 2, 4, 3], 2).unwrap(),
            vec![vec![1, 2], vec![3, 4]]
        );
        let block: Vec<Vec<u8>> = (0..4).map(|r| (0..4).map(|c| r * 4 + c).collect()).collect();
        let flat = spiral_scan(&block).unwrap();
        assert_eq!(inverse_spiral(&flat, 4).unwrap(), block);
    }

    #[test]
    fn inverse_spiral_rejects_wrong_length() {
        assert!(inverse_spiral(&[1, 2, 3, 4, 5], 2).is_err());
    }

    #[test]
    fn permutation_rank_hand_case() {
        let p = derive_permutation(&[0.3, 0.1, 0.2]);
        assert_eq!(p.forward, vec![2, 0, 1]);
    }

    #[test]
    fn sorted_input_gives_identity() {
        let p = derive_permutation(&[0.1, 0.2, 0.3, 0.4]);
        assert_eq!(p.forward, vec![0, 1, 2, 3]);
    }

    #[test]
    fn ties_break_by_index() {
        let p = derive_permutation(&[0.5, 0.5, 0.1]);
        assert_eq!(p.forward, vec![1, 2, 0]);
    }

    #[test]
    fn permutation_composes_with_inverse_to_identity() {
        let p = derive_permutation(&[0.9, 0.2, 0.7, 0.4, 0.1]);
        let inv = p.inverse();
        for i in 0..p.n_blocks() {
            assert_eq!(inv.forward[p.forward[i]], i);
        }
    }

    #[test]
    fn scramble_preserves_histogram() {
        let img = random_image(16, 16, 8);
        let scrambled = scramble(&img, &test_key()).unwrap();
        let hist = |im: &GrayImage| {
            let mut h = [0usize; 256];
            for &p in im.pixels() {
                h[p as usize] += 1;
            }
            h
        };
        assert_eq!(hist(&img), hist(&scrambled));
        assert_ne!(img, scrambled);
    }

    #[test]
    fn scramble_round_trip_on_random_8x8() {
        let img = random_image(8, 8, 21);
        let key = test_key();
        assert_eq!(descramble(&scramble(&img, &key).unwrap(), &key).unwrap(), img);
    }

    #[test]
    fn scramble_rejects_non_divisible_dimensions() {
        let img = random_image(6, 6, 1);
        let key = test_key().with_block_side(4);
        assert!(scramble(&img, &key).is_err());
    }

    #[test]
    fn single_block_image_round_trips() {
        let img = random_image(4, 4, 2);
        let key = test_key().with_block_side(4);
        let scrambled = scramble(&img, &key).unwrap();
        assert_eq!(descramble(&scrambled, &key).unwrap(), img);
    }

    #[test]
    fn zero_everything_is_absorbing_for_both_passes() {
        let mut data = vec![0u8; 64];
        let ks = vec![0u8; 64];
        forward_pass(&mut data, &ks, 0, false);
        assert!(data.iter().all(|&b| b == 0));
        backward_pass(&mut data, &ks, 0, false);
        assert!(data.iter().all(|&b| b == 0));
    }

    #[test]
    fn diffuse_round_trip_on_random_16x16() {
        let img = random_image(16, 16, 77);
        let key = test_key();
        assert_eq!(undiffuse(&diffuse(&img, &key).unwrap(), &key).unwrap(), img);
    }

    #[test]
    fn diffuse_then_undiffuse_composes_both_ways() {
        let img = random_image(8, 8, 5);
        let key = test_key();
        let cipher = diffuse(&img, &key).unwrap();
        assert_eq!(diffuse(&undiffuse(&cipher, &key).unwrap(), &key).unwrap(), cipher);
    }

    #[test]
    fn one_pixel_flip_avalanches_through_diffuse() {
        let img = random_image(64, 64, 13);
        let key = test_key();
        let mut flipped = img.pixels().to_vec();
        flipped[2000] ^= 0x80;
        let flipped = GrayImage::new(64, 64, flipped).unwrap();
        let c1 = diffuse(&img, &key).unwrap();
        let c2 = diffuse(&flipped, &key).unwrap();
        let differing = c1
            .pixels()
            .iter()
            .zip(c2.pixels())
            .filter(|(a, b)| a != b)
            .count();
        let rate = differing as f64 / (64.0 * 64.0) * 100.0;
        assert!(rate >= 99.0, "avalanche rate {rate}");
    }

    #[test]
    fn wrong_iv_breaks_round_trip() {
        let img = random_image(16, 16, 9);
        let key = test_key();
        let wrong = KeyBundle {
            diffusion_iv: key.diffusion_iv ^ 1,
            ..key.clone()
        };
        let recovered = undiffuse(&diffuse(&img, &key).unwrap(), &wrong).unwrap();
        assert_ne!(recovered, img);
    }
}
