use std::fs;
use std::path::{Path, PathBuf};

use ed25519_dalek::{SigningKey, VerifyingKey};
use rand::RngCore;

use crate::error::{Error, Result};

/// An Ed25519 key pair held as its 32-byte seed and derived public key.
#[derive(Clone)]
pub struct KeyPair {
    signing: SigningKey,
}

impl std::fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KeyPair")
            .field("public_key", &hex::encode(self.public_key()))
            .finish_non_exhaustive()
    }
}

impl KeyPair {
    /// Deterministic key pair when `seed` is given, otherwise fresh randomness
    /// from the operating system.
    pub fn generate(seed: Option<&[u8]>) -> Result<Self> {
        let seed: [u8; 32] = match seed {
            Some(bytes) => bytes
                .try_into()
                .map_err(|_| Error::SeedLength(bytes.len()))?,
            None => {
                let mut buf = [0u8; 32];
                rand::rng().fill_bytes(&mut buf);
                buf
            }
        };
        Ok(KeyPair {
            signing: SigningKey::from_bytes(&seed),
        })
    }

    pub fn private_key(&self) -> [u8; 32] {
        self.signing.to_bytes()
    }

    pub fn public_key(&self) -> [u8; 32] {
        self.signing.verifying_key().to_bytes()
    }

    pub(crate) fn signing_key(&self) -> &SigningKey {
        &self.signing
    }

    /// Writes `<prefix>.sk`, `<prefix>.pk` and their `.hex` sidecars.
    pub fn write_files(&self, prefix: &Path) -> Result<(PathBuf, PathBuf)> {
        let sk = with_suffix(prefix, "sk");
        let pk = with_suffix(prefix, "pk");
        write(&sk, &self.private_key())?;
        write(&pk, &self.public_key())?;
        write(&with_suffix(prefix, "sk.hex"), hex_line(&self.private_key()).as_bytes())?;
        write(&with_suffix(prefix, "pk.hex"), hex_line(&self.public_key()).as_bytes())?;
        Ok((sk, pk))
    }

    /// Reads a raw 32-byte `.sk` file.
    pub fn read_private(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::generate(Some(&bytes))
    }
}

/// Reads a raw 32-byte `.pk` file.
pub fn read_public_key(path: &Path) -> Result<[u8; 32]> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let key: [u8; 32] = bytes
        .as_slice()
        .try_into()
        .map_err(|_| Error::PublicKeyLength(bytes.len()))?;
    VerifyingKey::from_bytes(&key).map_err(|_| Error::InvalidPublicKey)?;
    Ok(key)
}

fn hex_line(bytes: &[u8]) -> String {
    format!("{}\n", hex::encode(bytes))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
