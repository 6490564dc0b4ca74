//! Third security layer: seeded additive white Gaussian noise and the
//! analyst-side denoisers.
//!
//! Noise generation must be bit-reproducible across platforms, so the
//! generator is a frozen splitmix64 state update feeding Box-Muller in
//! strict raster order. Two samples are produced per Box-Muller step and
//! both are consumed before the next step.

use serde::{Deserialize, Serialize};

use crate::error::{FlepError, Result};
use crate::image::RealPlane;

/// Parameters of the injected Gaussian noise. Together with the plane
/// dimensions these fully determine the noise field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub mean: f64,
    pub std: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.std >= 0.0 && self.std.is_finite() && self.mean.is_finite()) {
            return Err(FlepError::Key(format!(
                "invalid noise spec: mean {}, std {}",
                self.mean, self.std
            )));
        }
        Ok(())
    }
}

/// Frozen 64-bit generator (splitmix64). Not for cryptographic use on its
/// own; here it only has to be deterministic and well mixed.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        mix64(self.state)
    }

    /// Uniform double in [0, 1) using the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }
}

/// Finalizer of splitmix64; a bijective 64-bit mixer. Zero is its fixed
/// point, which the stream above sidesteps via the golden-gamma increment.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Generates the deterministic noise field for a plane of `len` samples.
fn noise_field(spec: &NoiseSpec, len: usize) -> Vec<f64> {
    let mut rng = SplitMix64::new(spec.seed);
    let mut out = Vec::with_capacity(len);
    while out.len() < len {
        // Box-Muller; u1 is kept away from zero so ln is finite.
        let u1 = (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0);
        let u2 = rng.next_f64();
        let u1 = u1.max(f64::MIN_POSITIVE);
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        out.push(spec.mean + spec.std * radius * angle.cos());
        if out.len() < len {
            out.push(spec.mean + spec.std * radius * angle.sin());
        }
    }
    out
}

/// Adds seeded Gaussian noise in raster order.
pub fn inject_noise(plane: &RealPlane, spec: &NoiseSpec) -> Result<RealPlane> {
    spec.validate()?;
    let field = noise_field(spec, plane.values().len());
    let values = plane
        .values()
        .iter()
        .zip(&field)
        .map(|(v, n)| v + n)
        .collect();
    RealPlane::new(plane.width(), plane.height(), values)
}

/// Regenerates the identical noise field from the seed and subtracts it.
///
/// A wrong seed is not detectable here; it silently leaves residual noise
/// with roughly sqrt(2) times the injected standard deviation.
pub fn denoise_exact(plane: &RealPlane, spec: &NoiseSpec) -> Result<RealPlane> {
    spec.validate()?;
    let field = noise_field(spec, plane.values().len());
    let values = plane
        .values()
        .iter()
        .zip(&field)
        .map(|(v, n)| v - n)
        .collect();
    RealPlane::new(plane.width(), plane.height(), values)
}

/// Gaussian smoothing for when the seed is unavailable. Separable kernel,
/// reflected edges, truncated at `radius` taps each side.
pub fn denoise_filter(plane: &RealPlane, radius: usize, sigma: f64) -> Result<RealPlane> {
    if radius < 1 {
        return Err(FlepError::Config("filter radius must be at least 1".into()));
    }
    let min_dim = plane.width().min(plane.height());
    if radius > min_dim / 2 {
        return Err(FlepError::Config(format!(
            "filter radius {radius} too large for {}x{} plane",
            plane.width(),
            plane.height()
        )));
    }
    if !(sigma > 0.0) {
        return Err(FlepError::Config("filter sigma must be positive".into()));
    }

    let kernel = gaussian_kernel(radius, sigma);
    let (w, h) = (plane.width(), plane.height());

    // Horizontal pass then vertical pass.
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &kw) in kernel.iter().enumerate() {
                let dx = k as isize - radius as isize;
                let sx = reflect(x as isize + dx, w);
                acc += kw * plane.get(sx, y);
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &kw) in kernel.iter().enumerate() {
                let dy = k as isize - radius as isize;
                let sy = reflect(y as isize + dy, h);
                acc += kw * tmp[sy * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    RealPlane::new(w, h, out)
}

/// Normalized 1D Gaussian taps; weights sum to 1.
pub fn gaussian_kernel(radius: usize, sigma: f64) -> Vec<f64> {
    let mut kernel: Vec<f64> = (0..=2 * radius)
        .map(|k| {
            let d = k as f64 - radius as f64;
            (-0.5 * (d / sigma).powi(2)).exp()
        })
        .collect();
    let sum: f64 = kernel.iter().sum();
    for k in &mut kernel {
        *k /= sum;
    }
    kernel
}

fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let mut i = i;
    if i < 0 {
        i = -i - 1;
    }
    if i >= n {
        i = 2 * n - 1 - i;
    }
    i.clamp(0, n - 1) as usize
}

/// Analyst-side denoiser selection.
#[derive(Debug, Clone, Copy)]
pub enum Denoiser {
    /// Regenerate the noise field from the shared seed and subtract it.
    ExactSubtraction,
    /// Seed-free approximate path.
    GaussianFilter { radius: usize, sigma: f64 },
}

impl Denoiser {
    pub fn apply(&self, plane: &RealPlane, spec: &NoiseSpec) -> Result<RealPlane> {
        match self {
            Denoiser::ExactSubtraction => denoise_exact(plane, spec),
            Denoiser::GaussianFilter { radius, sigma } => denoise_filter(plane, *radius, *sigma),
        }
    }
}
