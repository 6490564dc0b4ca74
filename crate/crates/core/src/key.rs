//! Secret material shared between the encrypting side and the analyst.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{FlepError, Result};
use crate::image::GrayImage;
use crate::noise::NoiseSpec;

/// Everything needed to decrypt: chaotic seed and parameter, sub-block side
/// length, the chaotic ordering keys, the secret-image digest, the blend
/// factor, and the noise parameters.
///
/// Reals survive JSON round-trips exactly: the serializer emits the shortest
/// decimal that parses back to the same double.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyBundle {
    /// Logistic map seed, open interval (0, 1).
    pub chaos_seed: f64,
    /// Logistic map parameter, [3.9, 4.0).
    pub chaos_param: f64,
    /// Sub-block side length; a power of two >= 2.
    pub block_side: usize,
    /// Per-block ordering keys drawn from the chaotic sequence.
    pub group_keys: Vec<f64>,
    /// SHA-256 of the secret image (dimensions then pixels), lowercase hex.
    pub secret_image_digest: String,
    /// Blend factor alpha in (0, 1].
    pub blend_alpha: f64,
    pub noise: NoiseSpec,
    /// Chaining IV for the diffusion passes.
    pub diffusion_iv: u8,
}

impl KeyBundle {
    pub fn validate(&self) -> Result<()> {
        if !(self.chaos_seed > 0.0 && self.chaos_seed < 1.0) {
            return Err(FlepError::Key(format!(
                "chaos seed {} outside open interval (0,1)",
                self.chaos_seed
            )));
        }
        if !(self.chaos_param >= 3.9 && self.chaos_param < 4.0) {
            return Err(FlepError::Key(format!(
                "chaos parameter {} outside [3.9, 4.0)",
                self.chaos_param
            )));
        }
        // Fixed points of the logistic map give a constant orbit.
        let fixed_point = 1.0 - 1.0 / self.chaos_param;
        if self.chaos_seed == fixed_point {
            return Err(FlepError::Key(
                "chaos seed equals the logistic fixed point".into(),
            ));
        }
        if self.block_side < 2 || !self.block_side.is_power_of_two() {
            return Err(FlepError::Key(format!(
                "block side {} must be a power of two >= 2",
                self.block_side
            )));
        }
        if !(self.blend_alpha > 0.0 && self.blend_alpha <= 1.0) {
            return Err(FlepError::Key(format!(
                "blend alpha {} outside (0, 1]",
                self.blend_alpha
            )));
        }
        self.noise.validate()?;
        Ok(())
    }

    /// Short identifier tying payloads to the bundle that produced them.
    pub fn key_id(&self) -> String {
        let json = serde_json::to_string(self).expect("key bundle serializes");
        let digest = Sha256::digest(json.as_bytes());
        hex_lower(&digest[..8])
    }

    /// Copy with a different sub-block side, for corpora of mixed sizes.
    pub fn with_block_side(&self, block_side: usize) -> KeyBundle {
        KeyBundle {
            block_side,
            ..self.clone()
        }
    }
}

/// SHA-256 over dimensions and pixel data of the secret image.
pub fn secret_image_digest(secret: &GrayImage) -> String {
    let mut hasher = Sha256::new();
    hasher.update((secret.width() as u64).to_le_bytes());
    hasher.update((secret.height() as u64).to_le_bytes());
    hasher.update(secret.pixels());
    hex_lower(&hasher.finalize())
}

pub fn serialize_keybundle(key: &KeyBundle) -> Result<String> {
    key.validate()?;
    Ok(serde_json::to_string_pretty(key).expect("key bundle serializes"))
}

pub fn parse_keybundle(text: &str) -> Result<KeyBundle> {
    let key: KeyBundle = serde_json::from_str(text)?;
    key.validate()?;
    Ok(key)
}

fn hex_lower(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
