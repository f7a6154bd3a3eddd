use std::path::PathBuf;

use crate::pattern::Channel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("seed must be 32 bytes, got {0}")]
    SeedLength(usize),

    #[error("public key must be 32 bytes, got {0}")]
    PublicKeyLength(usize),

    #[error("invalid Ed25519 public key")]
    InvalidPublicKey,

    #[error("message length {len} outside 1..={max}")]
    MessageLength { len: usize, max: usize },

    #[error("payload of {payload} bytes plus {parity} parity exceeds a 255-byte codeword")]
    PayloadTooLong { payload: usize, parity: usize },

    #[error("Reed-Solomon decoding failed")]
    RsDecodeFailure,

    #[error("length prefix inconsistent with frame size")]
    MalformedFrame,

    #[error("signature does not verify")]
    SignatureInvalid,

    #[error("invalid bin range [{min}, {max}]")]
    InvalidRange { min: usize, max: usize },

    #[error("host too short for the {channel} channel: need {needed} slots, have {available}")]
    HostTooShort {
        channel: Channel,
        needed: usize,
        available: usize,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid audio: {0}")]
    InvalidAudio(String),

    #[error("external tool `{0}` is not available")]
    ExternalToolUnavailable(String),

    #[error("external tool `{tool}` exited with {status}: {stderr}")]
    ExternalToolFailed {
        tool: String,
        status: String,
        stderr: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("wav: {0}")]
    Wav(#[from] hound::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
