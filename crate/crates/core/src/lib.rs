//! Three-layer image encryption (chaotic scrambling and diffusion, Haar
//! wavelet alpha blending, seeded Gaussian noise), a cipher-quality metric
//! suite, and Paillier-based secure aggregation for a simulated federated
//! learning round.

pub mod chaos;
pub mod error;
pub mod he;
pub mod image;
pub mod key;
pub mod metrics;
pub mod noise;
pub mod payload;
pub mod pgm;
pub mod pipeline;
pub mod scramble;
pub mod wavelet;

pub use error::{FlepError, Result};
pub use image::{GrayImage, RealPlane};
pub use key::KeyBundle;
pub use payload::EncryptedPayload;
pub use pipeline::PipelineConfig;
