//! `flep`: command line frontend for the three-layer image cipher, the
//! evaluation suite, and the homomorphic federated-averaging simulation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use flep_core::key::{self, KeyBundle};
use flep_core::metrics;
use flep_core::noise::{Denoiser, NoiseSpec, SplitMix64};
use flep_core::payload;
use flep_core::pgm;
use flep_core::pipeline::{self, PipelineConfig};
use flep_core::{he, GrayImage};
use rand::rngs::StdRng;
use rand::SeedableRng;

/// Environment variable overriding the corpus directory argument.
const CORPUS_DIR_ENV: &str = "FLEP_CORPUS_DIR";

#[derive(Parser)]
#[command(name = "flep", version, about = "Two-tier private AI data toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an image-cipher key bundle and write it as JSON.
    Keygen(KeygenArgs),
    /// Encrypt a PGM image into a binary payload.
    Encrypt(EncryptArgs),
    /// Decrypt a binary payload back into a PGM image.
    Decrypt(DecryptArgs),
    /// Run the full metric suite on a single image.
    Evaluate(EvaluateArgs),
    /// Evaluate every .pgm file in a directory and print the report table.
    Corpus(CorpusArgs),
    /// Simulate one encrypted federated-averaging round.
    FlSim(FlSimArgs),
}

#[derive(Args)]
struct KeygenArgs {
    /// Logistic map seed in open (0, 1).
    #[arg(long, default_value_t = 0.3141592653589793)]
    chaos_seed: f64,
    /// Logistic map parameter in [3.9, 4.0).
    #[arg(long, default_value_t = 3.9999)]
    chaos_param: f64,
    /// Sub-block side (power of two, >= 2).
    #[arg(long, default_value_t = 2)]
    block_side: usize,
    /// Blend weight for the scrambled image in (0, 1].
    #[arg(long, default_value_t = 0.9)]
    blend_alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    noise_mean: f64,
    #[arg(long, default_value_t = 25.0)]
    noise_std: f64,
    #[arg(long, default_value_t = 0)]
    noise_seed: u64,
    /// Diffusion initialization byte.
    #[arg(long, default_value_t = 0x5a)]
    diffusion_iv: u8,
    /// Secret image whose digest is pinned into the bundle.
    #[arg(long)]
    secret: Option<PathBuf>,
    /// Output path for the JSON key bundle.
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args, Clone)]
struct LayerFlags {
    /// Skip the scramble (and diffusion) layer.
    #[arg(long)]
    no_scramble: bool,
    /// Keep the block permutation but skip the value diffusion pass.
    #[arg(long)]
    no_diffusion: bool,
    /// Skip the wavelet blend layer (no secret image needed).
    #[arg(long)]
    no_blend: bool,
    /// Skip the noise layer.
    #[arg(long)]
    no_noise: bool,
    /// Denoiser used on decryption.
    #[arg(long, value_enum, default_value_t = DenoiserKind::Exact)]
    denoiser: DenoiserKind,
    /// Gaussian filter radius (filter denoiser only).
    #[arg(long, default_value_t = 2)]
    filter_radius: usize,
    /// Gaussian filter sigma (filter denoiser only).
    #[arg(long, default_value_t = 1.5)]
    filter_sigma: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum DenoiserKind {
    /// Regenerate the seeded noise field and subtract it.
    Exact,
    /// Seed-free separable Gaussian smoothing.
    Filter,
}

impl LayerFlags {
    fn to_config(&self) -> PipelineConfig {
        PipelineConfig {
            scramble: !self.no_scramble,
            diffusion: !self.no_diffusion,
            blend: !self.no_blend,
            noise: !self.no_noise,
            denoiser: match self.denoiser {
                DenoiserKind::Exact => Denoiser::ExactSubtraction,
                DenoiserKind::Filter => Denoiser::GaussianFilter {
                    radius: self.filter_radius,
                    sigma: self.filter_sigma,
                },
            },
        }
    }
}

#[derive(Args)]
struct EncryptArgs {
    #[arg(long, short)]
    key: PathBuf,
    /// Plain PGM image.
    #[arg(long, short)]
    input: PathBuf,
    /// Secret PGM image for the blend layer.
    #[arg(long, short)]
    secret: Option<PathBuf>,
    /// Output path for the binary payload.
    #[arg(long, short)]
    output: PathBuf,
    /// Additionally render the payload to a viewable 8-bit PGM.
    #[arg(long)]
    render: Option<PathBuf>,
    #[command(flatten)]
    layers: LayerFlags,
}

#[derive(Args)]
struct DecryptArgs {
    #[arg(long, short)]
    key: PathBuf,
    /// Binary payload produced by `encrypt`.
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    secret: Option<PathBuf>,
    /// Output path for the recovered PGM image.
    #[arg(long, short)]
    output: PathBuf,
    #[command(flatten)]
    layers: LayerFlags,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long, short)]
    key: PathBuf,
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    secret: PathBuf,
    /// Seed for the one-pixel differential perturbation.
    #[arg(long, default_value_t = 1)]
    perturb_seed: u64,
    /// Emit the report as JSON instead of the aligned table.
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    layers: LayerFlags,
}

#[derive(Args)]
struct CorpusArgs {
    #[arg(long, short)]
    key: PathBuf,
    /// Directory of .pgm files; FLEP_CORPUS_DIR overrides this.
    #[arg(long, short)]
    dir: Option<PathBuf>,
    #[arg(long, short)]
    secret: PathBuf,
    /// Emit the report as JSON instead of the aligned table.
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    layers: LayerFlags,
}

#[derive(Args)]
struct FlSimArgs {
    /// Paillier modulus size in bits.
    #[arg(long, default_value_t = 512)]
    bits: usize,
    #[arg(long, default_value_t = 5)]
    clients: usize,
    /// Weights per client model vector.
    #[arg(long, default_value_t = 64)]
    weights: usize,
    #[arg(long, default_value_t = 16)]
    fractional_bits: u32,
    /// Seed for key generation, nonces, and the client weights.
    #[arg(long, default_value_t = 42)]
    rng_seed: u64,
    /// Emit the result as JSON instead of text.
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Keygen(args) => run_keygen(args),
        Command::Encrypt(args) => run_encrypt(args),
        Command::Decrypt(args) => run_decrypt(args),
        Command::Evaluate(args) => run_evaluate(args),
        Command::Corpus(args) => run_corpus(args),
        Command::FlSim(args) => run_fl_sim(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

fn load_secret(path: &Option<PathBuf>) -> Result<Option<GrayImage>, String> {
    match path {
        Some(p) => Ok(Some(load_image(p)?)),
        None => Ok(None),
    }
}

fn load_image(path: &Path) -> Result<GrayImage, String> {
    pgm::load_pgm(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_key(path: &Path) -> Result<KeyBundle, String> {
    let text =
        std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    key::parse_keybundle(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn run_keygen(args: KeygenArgs) -> Result<(), String> {
    let secret_image_digest = match &args.secret {
        Some(path) => key::secret_image_digest(&load_image(path)?),
        None => String::new(),
    };
    let bundle = KeyBundle {
        chaos_seed: args.chaos_seed,
        chaos_param: args.chaos_param,
        block_side: args.block_side,
        group_keys: vec![],
        secret_image_digest,
        blend_alpha: args.blend_alpha,
        noise: NoiseSpec {
            mean: args.noise_mean,
            std: args.noise_std,
            seed: args.noise_seed,
        },
        diffusion_iv: args.diffusion_iv,
    };
    let text = key::serialize_keybundle(&bundle).map_err(|e| e.to_string())?;
    std::fs::write(&args.output, text).map_err(|e| format!("{}: {e}", args.output.display()))?;
    println!("wrote key {} to {}", bundle.key_id(), args.output.display());
    Ok(())
}

fn run_encrypt(args: EncryptArgs) -> Result<(), String> {
    let bundle = load_key(&args.key)?;
    let img = load_image(&args.input)?;
    let secret = load_secret(&args.secret)?;
    let cfg = args.layers.to_config();
    let sealed = pipeline::encrypt_pipeline(&img, secret.as_ref(), &bundle, &cfg)
        .map_err(|e| e.to_string())?;
    std::fs::write(&args.output, payload::serialize_payload(&sealed))
        .map_err(|e| format!("{}: {e}", args.output.display()))?;
    if let Some(render_path) = &args.render {
        let rendered = metrics::render_8bit(&sealed.plane).map_err(|e| e.to_string())?;
        pgm::save_pgm(&rendered, render_path)
            .map_err(|e| format!("{}: {e}", render_path.display()))?;
    }
    println!(
        "encrypted {} ({}x{}) under key {}",
        args.input.display(),
        sealed.width(),
        sealed.height(),
        sealed.key_id
    );
    Ok(())
}

fn run_decrypt(args: DecryptArgs) -> Result<(), String> {
    let bundle = load_key(&args.key)?;
    let data = std::fs::read(&args.input).map_err(|e| format!("{}: {e}", args.input.display()))?;
    let sealed = payload::deserialize_payload(&data).map_err(|e| e.to_string())?;
    let secret = load_secret(&args.secret)?;
    let cfg = args.layers.to_config();
    let opened = pipeline::decrypt_pipeline(&sealed, secret.as_ref(), &bundle, &cfg)
        .map_err(|e| e.to_string())?;
    pgm::save_pgm(&opened.image, &args.output)
        .map_err(|e| format!("{}: {e}", args.output.display()))?;
    if opened.out_of_range > 0 {
        eprintln!(
            "warning: {} values fell outside the 8-bit range before rounding; \
             the key or secret image may be wrong",
            opened.out_of_range
        );
    }
    println!("decrypted to {}", args.output.display());
    Ok(())
}

fn run_evaluate(args: EvaluateArgs) -> Result<(), String> {
    let bundle = load_key(&args.key)?;
    let img = load_image(&args.input)?;
    let secret = load_image(&args.secret)?;
    let cfg = args.layers.to_config();
    let report = metrics::evaluate(&img, &secret, &bundle, &cfg, args.perturb_seed)
        .map_err(|e| e.to_string())?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    } else {
        println!("NPCR               {:>10.4}", report.npcr);
        println!("UACI               {:>10.4}", report.uaci);
        println!("Entropy            {:>10.4}", report.entropy);
        println!("EncryptionQuality  {:>10.3}", report.encryption_quality);
        println!("ChiSquare          {:>10.2}", report.chi_square);
        println!("EncryptTime(s)     {:>10.4}", report.encrypt_time);
        println!("DecryptTime(s)     {:>10.4}", report.decrypt_time);
    }
    Ok(())
}

fn run_corpus(args: CorpusArgs) -> Result<(), String> {
    let dir = match std::env::var_os(CORPUS_DIR_ENV) {
        Some(v) => PathBuf::from(v),
        None => args
            .dir
            .clone()
            .ok_or_else(|| format!("no corpus directory: pass --dir or set {CORPUS_DIR_ENV}"))?,
    };
    let bundle = load_key(&args.key)?;
    let secret = load_image(&args.secret)?;
    let cfg = args.layers.to_config();
    let report = pipeline::run_corpus(&dir, Some(&secret), &bundle, &cfg)
        .map_err(|e| e.to_string())?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
    } else {
        print!("{}", report.text_table());
    }
    if report.failures.is_empty() {
        Ok(())
    } else {
        let names: Vec<&str> = report.failures.iter().map(|(f, _)| f.as_str()).collect();
        Err(format!("{} file(s) failed: {}", names.len(), names.join(", ")))
    }
}

fn run_fl_sim(args: FlSimArgs) -> Result<(), String> {
    if args.clients == 0 || args.weights == 0 {
        return Err("clients and weights must both be at least 1".into());
    }
    let mut rng = StdRng::seed_from_u64(args.rng_seed);
    let keys = he::keygen(args.bits, &mut rng).map_err(|e| e.to_string())?;

    let mut weight_rng = SplitMix64::new(args.rng_seed ^ 0x77);
    let clients: Vec<Vec<f64>> = (0..args.clients)
        .map(|_| {
            (0..args.weights)
                .map(|_| weight_rng.next_f64() * 2.0 - 1.0)
                .collect()
        })
        .collect();

    let secure = he::fl_round(&clients, &keys, args.fractional_bits, &mut rng)
        .map_err(|e| e.to_string())?;
    let plain: Vec<f64> = (0..args.weights)
        .map(|j| clients.iter().map(|c| c[j]).sum::<f64>() / args.clients as f64)
        .collect();
    let max_err = secure
        .iter()
        .zip(&plain)
        .map(|(s, p)| (s - p).abs())
        .fold(0.0f64, f64::max);

    if args.json {
        let value = serde_json::json!({
            "key_id": keys.public().key_id(),
            "bits": args.bits,
            "clients": args.clients,
            "weights": args.weights,
            "fractional_bits": args.fractional_bits,
            "max_abs_error": max_err,
            "secure_average": secure,
        });
        println!("{}", serde_json::to_string_pretty(&value).unwrap());
    } else {
        println!(
            "simulated FedAvg: {} clients x {} weights under {}-bit key {}",
            args.clients,
            args.weights,
            args.bits,
            keys.public().key_id()
        );
        println!(
            "max |secure - plaintext| = {max_err:.3e} (fixed point, {} fractional bits)",
            args.fractional_bits
        );
    }
    let bound = 2f64.powi(-(args.fractional_bits as i32)) * args.clients as f64;
    if max_err > bound {
        return Err(format!(
            "secure average deviates from plaintext averaging by {max_err:.3e} (bound {bound:.3e})"
        ));
    }
    Ok(())
}
