//! Signed, keyed audio watermarking.
//!
//! A short message is signed with Ed25519, protected with Reed–Solomon
//! parity, and written into audio through two carriers: phase offsets on a
//! keyed set of STFT bins, and quantisation-index modulation of log-magnitude
//! ratios between keyed bin pairs. Verification needs only the public key.
//!
//! ```
//! use sigmark::{embed, extract_verify, hosts::synthetic_host, CodecConfig, KeyPair, Message};
//!
//! let host = synthetic_host(10.0, 44_100, 1, 0);
//! let key = KeyPair::generate(Some(&[7u8; 32]))?;
//! let message = Message::new(b"studio take 3".to_vec())?;
//! let config = CodecConfig::default();
//!
//! let marked = embed(&host, &message, &key, &config)?;
//! let outcome = extract_verify(&marked, &key.public_key(), &config)?;
//! assert!(outcome.verified);
//! assert_eq!(outcome.message.as_deref(), Some(&b"studio take 3"[..]));
//! # Ok::<(), sigmark::Error>(())
//! ```

pub mod attacks;
pub mod audio;
pub mod bench;
pub mod bits;
pub mod codec;
mod error;
pub mod hosts;
pub mod metrics;
pub mod pattern;
pub mod payload;
pub mod phase;
pub mod qim;
pub mod spectral;

pub use audio::AudioClip;
pub use codec::{
    capacity_report, embed, embed_codeword, extract_verify, CapacityReport, CodecConfig, FailureStage, Mode,
    VerifiedChannel, Verifier, VerifyOutcome,
};
pub use error::{Error, Result};
pub use pattern::Channel;
pub use payload::{KeyPair, Message};
