//! End-to-end encrypt/decrypt orchestration and the corpus runner.

use std::path::Path;

use serde::Serialize;

use crate::error::{FlepError, Result};
use crate::image::GrayImage;
use crate::key::KeyBundle;
use crate::metrics::{self, MetricsReport};
use crate::noise::{self, Denoiser};
use crate::payload::EncryptedPayload;
use crate::pgm;
use crate::scramble;
use crate::wavelet;

/// Which layers run, and which denoiser the analyst side uses.
///
/// Layer order is fixed: scramble (+ diffusion) -> blend -> noise on the way
/// in, the exact inverse order on the way out. Diffusion is the value pass
/// inside the scramble layer; disabling it leaves a pure pixel permutation.
#[derive(Debug, Clone, Copy)]
pub struct PipelineConfig {
    pub scramble: bool,
    pub diffusion: bool,
    pub blend: bool,
    pub noise: bool,
    pub denoiser: Denoiser,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            scramble: true,
            diffusion: true,
            blend: true,
            noise: true,
            denoiser: Denoiser::ExactSubtraction,
        }
    }
}

/// The image-domain ciphertext: scramble then diffuse. This is the 8-bit
/// cipher image all histogram/differential statistics are computed on.
pub fn cipher_image(img: &GrayImage, key: &KeyBundle) -> Result<GrayImage> {
    let scrambled = scramble::scramble(img, key).map_err(|e| e.in_layer("scramble"))?;
    scramble::diffuse(&scrambled, key).map_err(|e| e.in_layer("scramble"))
}

pub fn encrypt_pipeline(
    img: &GrayImage,
    secret: Option<&GrayImage>,
    key: &KeyBundle,
    cfg: &PipelineConfig,
) -> Result<EncryptedPayload> {
    key.validate()?;
    let mut stage = img.clone();
    if cfg.scramble {
        stage = scramble::scramble(&stage, key).map_err(|e| e.in_layer("scramble"))?;
        if cfg.diffusion {
            stage = scramble::diffuse(&stage, key).map_err(|e| e.in_layer("scramble"))?;
        }
    }
    let plane = if cfg.blend {
        let secret = secret.ok_or_else(|| {
            FlepError::Config("blend layer enabled but no secret image supplied".into())
        })?;
        wavelet::blend_encode(&stage, secret, key.blend_alpha).map_err(|e| e.in_layer("blend"))?
    } else {
        stage.to_plane()
    };
    let plane = if cfg.noise {
        noise::inject_noise(&plane, &key.noise).map_err(|e| e.in_layer("noise"))?
    } else {
        plane
    };
    Ok(EncryptedPayload::new(plane, key.key_id()))
}

#[derive(Debug, Clone)]
pub struct DecryptOutput {
    pub image: GrayImage,
    /// Count of real values outside [-0.5, 255.5] after blend decoding;
    /// nonzero suggests a wrong key or secret image.
    pub out_of_range: usize,
}

pub fn decrypt_pipeline(
    payload: &EncryptedPayload,
    secret: Option<&GrayImage>,
    key: &KeyBundle,
    cfg: &PipelineConfig,
) -> Result<DecryptOutput> {
    key.validate()?;
    if payload.key_id != key.key_id() {
        return Err(FlepError::Key(format!(
            "payload was produced by key {} but decryption key is {}",
            payload.key_id,
            key.key_id()
        )));
    }
    let mut plane = payload.plane.clone();
    if cfg.noise {
        plane = cfg
            .denoiser
            .apply(&plane, &key.noise)
            .map_err(|e| e.in_layer("noise"))?;
    }
    if cfg.blend {
        let secret = secret.ok_or_else(|| {
            FlepError::Config("blend layer enabled but no secret image supplied".into())
        })?;
        plane = wavelet::blend_decode(&plane, secret, key.blend_alpha)
            .map_err(|e| e.in_layer("blend"))?;
    }

    let out_of_range = plane
        .values()
        .iter()
        .filter(|v| **v < -0.5 || **v > 255.5)
        .count();
    let pixels: Vec<u8> = plane
        .values()
        .iter()
        .map(|v| v.round().clamp(0.0, 255.0) as u8)
        .collect();
    let mut stage = GrayImage::new(plane.width(), plane.height(), pixels)?;

    if cfg.scramble {
        if cfg.diffusion {
            stage = scramble::undiffuse(&stage, key).map_err(|e| e.in_layer("scramble"))?;
        }
        stage = scramble::descramble(&stage, key).map_err(|e| e.in_layer("scramble"))?;
    }
    Ok(DecryptOutput {
        image: stage,
        out_of_range,
    })
}

/// Sub-block side for a given image: 2 at 256 pixels, doubling with each
/// doubling of the smaller dimension.
pub fn block_side_for(min_dimension: usize) -> usize {
    let mut side = 2;
    let mut threshold = 512;
    while min_dimension >= threshold {
        side *= 2;
        threshold *= 2;
    }
    side
}

#[derive(Debug, Serialize)]
pub struct CorpusRow {
    pub file: String,
    #[serde(flatten)]
    pub report: MetricsReport,
}

#[derive(Debug, Serialize)]
pub struct CorpusReport {
    pub rows: Vec<CorpusRow>,
    /// Files that failed, with the error message; the run continues past them.
    pub failures: Vec<(String, String)>,
}

impl CorpusReport {
    pub fn mean_std(&self, f: impl Fn(&MetricsReport) -> f64) -> (f64, f64) {
        let values: Vec<f64> = self.rows.iter().map(|r| f(&r.report)).collect();
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        (mean, var.sqrt())
    }

    /// Aligned plain-text table with per-file rows plus Mean and STD rows.
    pub fn text_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<20} {:>9} {:>9} {:>8} {:>9} {:>10} {:>12} {:>12}\n",
            "File", "UACI", "NPCR", "Entropy", "EQ", "ChiSq", "Encrypt(s)", "Decrypt(s)"
        ));
        for row in &self.rows {
            let r = &row.report;
            out.push_str(&format!(
                "{:<20} {:>9.4} {:>9.4} {:>8.4} {:>9.3} {:>10.2} {:>12.4} {:>12.4}\n",
                row.file,
                r.uaci,
                r.npcr,
                r.entropy,
                r.encryption_quality,
                r.chi_square,
                r.encrypt_time,
                r.decrypt_time
            ));
        }
        if !self.rows.is_empty() {
            let (uaci_m, uaci_s) = self.mean_std(|r| r.uaci);
            let (npcr_m, npcr_s) = self.mean_std(|r| r.npcr);
            let (ent_m, _) = self.mean_std(|r| r.entropy);
            let (eq_m, _) = self.mean_std(|r| r.encryption_quality);
            out.push_str(&format!(
                "{:<20} {:>9.4} {:>9.4} {:>8.4} {:>9.3}\n",
                "Mean", uaci_m, npcr_m, ent_m, eq_m
            ));
            out.push_str(&format!(
                "{:<20} {:>9.4} {:>9.4}\n",
                "STD", uaci_s, npcr_s
            ));
        }
        for (file, err) in &self.failures {
            out.push_str(&format!("FAILED {file}: {err}\n"));
        }
        out
    }
}

/// FNV-1a over the file name; seeds the per-file pixel perturbation so
/// reports are reproducible without any global ordering dependency.
pub fn file_seed(name: &str) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for b in name.as_bytes() {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Evaluates every `.pgm` file in a directory. The sub-block side scales
/// with image size; per-file failures are recorded and the run continues.
pub fn run_corpus(
    dir: &Path,
    secret: Option<&GrayImage>,
    key: &KeyBundle,
    cfg: &PipelineConfig,
) -> Result<CorpusReport> {
    let mut files: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|ext| ext == "pgm"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(FlepError::Config(format!(
            "no .pgm files in {}",
            dir.display()
        )));
    }

    let mut report = CorpusReport {
        rows: Vec::new(),
        failures: Vec::new(),
    };
    for path in files {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        match evaluate_file(&path, &name, secret, key, cfg) {
            Ok(row) => report.rows.push(row),
            Err(err) => report.failures.push((name, err.to_string())),
        }
    }
    Ok(report)
}

fn evaluate_file(
    path: &Path,
    name: &str,
    secret: Option<&GrayImage>,
    key: &KeyBundle,
    cfg: &PipelineConfig,
) -> Result<CorpusRow> {
    let img = pgm::load_pgm(path)?;
    let scaled_key = key.with_block_side(block_side_for(img.width().min(img.height())));
    let secret = secret.ok_or_else(|| {
        FlepError::Config("corpus evaluation needs a secret image".into())
    })?;
    let report = metrics::evaluate(&img, secret, &scaled_key, cfg, file_seed(name))?;
    Ok(CorpusRow {
        file: name.to_string(),
        report,
    })
}
