//! Reference implementations used only by tests. Each recomputes a result
//! along an independent route (explicit matrices, exhaustive loops, plain
//! double loops) so the fast implementations have something honest to be
//! checked against. None of this is built for speed.

use flep_core::he::{self, HeKeyPair};
use flep_core::image::{GrayImage, RealPlane};
use flep_core::wavelet::DwtPlanes;
use num_bigint::BigUint;
use rand::rngs::StdRng;
use rand::SeedableRng;

/// Level-1 orthonormal Haar transform computed by building the explicit
/// (w*h) x (w*h) transform matrix and multiplying. Output rows are ordered
/// LL, LH, HL, HH, each subband row-major.
pub fn dwt2_reference(plane: &RealPlane) -> Result<DwtPlanes, String> {
    let (w, h) = (plane.width(), plane.height());
    if w % 2 != 0 || h % 2 != 0 {
        return Err(format!("odd dimensions {w}x{h}"));
    }
    let (hw, hh) = (w / 2, h / 2);
    let n = w * h;
    let band_len = hw * hh;

    // Row `band*band_len + cell` of the matrix holds the four +-1/2 weights
    // of that coefficient; everything else is zero.
    let mut matrix = vec![0.0f64; n * n];
    for by in 0..hh {
        for bx in 0..hw {
            let cell = by * hw + bx;
            let a = 2 * by * w + 2 * bx;
            let b = a + 1;
            let c = a + w;
            let d = c + 1;
            // (sign_a, sign_b, sign_c, sign_d) per band.
            let signs = [
                [1.0, 1.0, 1.0, 1.0],    // LL
                [1.0, -1.0, 1.0, -1.0],  // LH
                [1.0, 1.0, -1.0, -1.0],  // HL
                [1.0, -1.0, -1.0, 1.0],  // HH
            ];
            for (band, sign) in signs.iter().enumerate() {
                let row = band * band_len + cell;
                matrix[row * n + a] = 0.5 * sign[0];
                matrix[row * n + b] = 0.5 * sign[1];
                matrix[row * n + c] = 0.5 * sign[2];
                matrix[row * n + d] = 0.5 * sign[3];
            }
        }
    }

    let x = plane.values();
    let mut y = vec![0.0f64; n];
    for (row, out) in y.iter_mut().enumerate() {
        let mut acc = 0.0;
        for col in 0..n {
            acc += matrix[row * n + col] * x[col];
        }
        *out = acc;
    }

    let band = |i: usize| {
        RealPlane::new(hw, hh, y[i * band_len..(i + 1) * band_len].to_vec())
            .map_err(|e| e.to_string())
    };
    Ok(DwtPlanes {
        ll: band(0)?,
        lh: band(1)?,
        hl: band(2)?,
        hh: band(3)?,
    })
}

/// Exhaustively checks decrypt(encrypt(m)) == m for every plaintext under a
/// small toy key, and the additive homomorphism on a sampled grid.
pub fn paillier_exhaustive_check(p: u32, q: u32) -> Result<(), String> {
    if p == q {
        return Err("primes must be distinct".into());
    }
    let keys = HeKeyPair::from_primes(&BigUint::from(p), &BigUint::from(q))
        .map_err(|e| e.to_string())?;
    paillier_check_with(&keys, p as u64 * q as u64)
}

/// Same checks against an externally supplied (possibly tampered) keypair.
pub fn paillier_check_with(keys: &HeKeyPair, n: u64) -> Result<(), String> {
    if n >= 1 << 16 {
        return Err(format!("modulus {n} too large for exhaustive check"));
    }
    let mut rng = StdRng::seed_from_u64(0x9e3779b9);
    for m in 0..n {
        let c = he::encrypt(&BigUint::from(m), keys.public(), &mut rng)
            .map_err(|e| e.to_string())?;
        let back = he::decrypt(&c, keys).map_err(|e| e.to_string())?;
        if back != BigUint::from(m) {
            return Err(format!("round trip failed for plaintext {m}: got {back}"));
        }
    }
    // Homomorphism on a coarse grid of pairs with a + b < n.
    let step = (n / 13).max(1);
    for a in (0..n).step_by(step as usize) {
        for b in (0..n).step_by(step as usize) {
            if a + b >= n {
                continue;
            }
            let ca = he::encrypt(&BigUint::from(a), keys.public(), &mut rng)
                .map_err(|e| e.to_string())?;
            let cb = he::encrypt(&BigUint::from(b), keys.public(), &mut rng)
                .map_err(|e| e.to_string())?;
            let sum = he::he_add(&ca, &cb, keys.public()).map_err(|e| e.to_string())?;
            let got = he::decrypt(&sum, keys).map_err(|e| e.to_string())?;
            if got != BigUint::from(a + b) {
                return Err(format!("homomorphism failed: E({a})+E({b}) decrypted to {got}"));
            }
        }
    }
    Ok(())
}

/// Metric values recomputed with straightforward double loops.
pub struct ReferenceMetrics {
    pub npcr: f64,
    pub uaci: f64,
    pub entropy_c1: f64,
    pub encryption_quality: f64,
}

pub fn metrics_reference(c1: &GrayImage, c2: &GrayImage, plain: &GrayImage) -> ReferenceMetrics {
    let (w, h) = (c1.width(), c1.height());
    let mut differing = 0usize;
    let mut abs_sum = 0.0f64;
    for y in 0..h {
        for x in 0..w {
            let a = c1.get(x, y);
            let b = c2.get(x, y);
            if a != b {
                differing += 1;
            }
            abs_sum += (f64::from(a) - f64::from(b)).abs();
        }
    }
    let total = (w * h) as f64;

    let mut hist_c1 = [0u64; 256];
    for y in 0..h {
        for x in 0..w {
            hist_c1[c1.get(x, y) as usize] += 1;
        }
    }
    let mut entropy = 0.0;
    for &count in &hist_c1 {
        if count > 0 {
            let p = count as f64 / total;
            entropy -= p * p.log2();
        }
    }

    let mut hist_plain = [0u64; 256];
    for y in 0..plain.height() {
        for x in 0..plain.width() {
            hist_plain[plain.get(x, y) as usize] += 1;
        }
    }
    let mut eq = 0.0;
    for v in 0..256 {
        eq += (hist_c1[v] as f64 - hist_plain[v] as f64).abs();
    }
    eq /= 256.0;

    ReferenceMetrics {
        npcr: 100.0 * differing as f64 / total,
        uaci: 100.0 * abs_sum / (255.0 * total),
        entropy_c1: entropy,
        encryption_quality: eq,
    }
}

/// Rank permutation computed by pairing values with indices and sorting.
pub fn permutation_reference(keys: &[f64]) -> Vec<usize> {
    let mut pairs: Vec<(f64, usize)> = keys.iter().cloned().zip(0..).collect();
    pairs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut forward = vec![0; keys.len()];
    for (rank, &(_, i)) in pairs.iter().enumerate() {
        forward[i] = rank;
    }
    forward
}
