use thiserror::Error;

/// Error type shared by every module in the crate.
#[derive(Debug, Error)]
pub enum FlepError {
    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("pgm parse error: {0}")]
    PgmParse(String),

    #[error("payload format error: {0}")]
    PayloadFormat(String),

    #[error("key error: {0}")]
    Key(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("homomorphic encryption error: {0}")]
    He(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("pipeline layer `{layer}` failed: {source}")]
    Layer {
        layer: &'static str,
        #[source]
        source: Box<FlepError>,
    },

    #[error("key bundle parse error: {0}")]
    KeyParse(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FlepError>;

impl FlepError {
    /// Wraps an error with the name of the pipeline layer that produced it.
    pub fn in_layer(self, layer: &'static str) -> FlepError {
        FlepError::Layer {
            layer,
            source: Box::new(self),
        }
    }
}
