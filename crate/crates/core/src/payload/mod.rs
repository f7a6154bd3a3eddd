//! Signed payload construction: `len16(M) ‖ M ‖ Sign(M)`, wrapped in a single
//! Reed–Solomon codeword.

mod keys;
pub mod reed_solomon;

use ed25519_dalek::{Signature, Signer, Verifier, VerifyingKey};

use crate::error::{Error, Result};
pub use keys::{read_public_key, KeyPair};
use reed_solomon::ReedSolomon;

pub const SIGNATURE_LEN: usize = 64;
/// Length prefix plus signature.
pub const FRAME_OVERHEAD: usize = 2 + SIGNATURE_LEN;
pub const DEFAULT_PARITY: usize = 30;

/// Largest message that fits one codeword with `parity` parity symbols.
pub fn max_message_len(parity: usize) -> usize {
    255usize.saturating_sub(parity + FRAME_OVERHEAD)
}

/// Message bytes, 1..=65535 long.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message(Vec<u8>);

impl Message {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Result<Self> {
        let bytes = bytes.into();
        if bytes.is_empty() || bytes.len() > u16::MAX as usize {
            return Err(Error::MessageLength {
                len: bytes.len(),
                max: u16::MAX as usize,
            });
        }
        Ok(Message(bytes))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `len16(M) ‖ M ‖ S` with a big-endian length prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedPayload(Vec<u8>);

impl SignedPayload {
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        SignedPayload(bytes)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Systematic codeword: payload followed by `parity` check bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RsCodeword {
    bytes: Vec<u8>,
    parity: usize,
}

impl RsCodeword {
    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn parity(&self) -> usize {
        self.parity
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }

    pub fn bits(&self) -> Vec<u8> {
        crate::bits::bytes_to_bits(&self.bytes)
    }
}

/// Signs without any codeword-size check; see [`sign_for_codeword`].
pub fn sign_payload(message: &Message, key: &KeyPair) -> SignedPayload {
    let m = message.as_bytes();
    let sig = key.signing_key().sign(m);
    let mut out = Vec::with_capacity(m.len() + FRAME_OVERHEAD);
    out.extend_from_slice(&(m.len() as u16).to_be_bytes());
    out.extend_from_slice(m);
    out.extend_from_slice(&sig.to_bytes());
    SignedPayload(out)
}

/// Signs and checks the result will fit a single codeword with `parity` symbols.
pub fn sign_for_codeword(message: &Message, key: &KeyPair, parity: usize) -> Result<SignedPayload> {
    let max = max_message_len(parity);
    if message.len() > max {
        return Err(Error::MessageLength {
            len: message.len(),
            max,
        });
    }
    Ok(sign_payload(message, key))
}

pub fn rs_encode(payload: &SignedPayload, parity: usize) -> Result<RsCodeword> {
    let bytes = ReedSolomon::new(parity).encode(payload.as_bytes())?;
    Ok(RsCodeword { bytes, parity })
}

pub fn rs_decode(codeword: &[u8], parity: usize) -> Result<SignedPayload> {
    ReedSolomon::new(parity)
        .decode(codeword)
        .map(|d| SignedPayload(d.data))
}

/// Splits the frame by its length prefix and verifies the trailing signature.
pub fn parse_and_verify(payload: &SignedPayload, public_key: &[u8; 32]) -> Result<Message> {
    let p = payload.as_bytes();
    if p.len() < FRAME_OVERHEAD {
        return Err(Error::MalformedFrame);
    }
    let len = u16::from_be_bytes([p[0], p[1]]) as usize;
    if len == 0 || len + FRAME_OVERHEAD != p.len() {
        return Err(Error::MalformedFrame);
    }
    let message = &p[2..2 + len];
    let sig_bytes: [u8; SIGNATURE_LEN] = p[2 + len..].try_into().expect("length checked");
    let key = VerifyingKey::from_bytes(public_key).map_err(|_| Error::SignatureInvalid)?;
    key.verify(message, &Signature::from_bytes(&sig_bytes))
        .map_err(|_| Error::SignatureInvalid)?;
    Message::new(message.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn key() -> KeyPair {
        KeyPair::generate(Some(&[0u8; 32])).unwrap()
    }

    #[test]
    fn reference_signature() {
        // Ed25519 is deterministic; value from the Python `cryptography` package.
        let p = sign_payload(&Message::new(*b"hello").unwrap(), &key());
        assert_eq!(&p.as_bytes()[..2], &[0, 5]);
        assert_eq!(
            hex::encode(&p.as_bytes()[7..]),
            "e25c8723d039fe8f45d6c9d6a8917fa91bc754913cd596fd358a493a21a3cb59\
             0a6537babc7df0400ab61a05589c9c36b65a143878cb0341d4e9e48419c4370d"
        );
    }

    #[test]
    fn payload_sizes() {
        let kp = key();
        let p = sign_payload(&Message::new(vec![b'x'; 49]).unwrap(), &kp);
        assert_eq!(p.len(), 115);
        let cw = rs_encode(&p, 30).unwrap();
        assert_eq!(cw.len(), 145);
        assert_eq!(cw.bits().len(), 1160);
        assert_eq!(&cw.as_bytes()[..115], p.as_bytes());
        assert_eq!(sign_payload(&Message::new(vec![1]).unwrap(), &kp).len(), 67);
    }

    #[test]
    fn signing_is_deterministic() {
        let m = Message::new(*b"same").unwrap();
        assert_eq!(sign_payload(&m, &key()), sign_payload(&m, &key()));
    }

    #[test]
    fn message_bounds() {
        assert!(Message::new(Vec::new()).is_err());
        assert!(Message::new(vec![0; 65536]).is_err());
        assert_eq!(max_message_len(30), 159);
        assert!(sign_for_codeword(&Message::new(vec![0; 160]).unwrap(), &key(), 30).is_err());
        assert!(sign_for_codeword(&Message::new(vec![0; 159]).unwrap(), &key(), 30).is_ok());
    }

    #[test]
    fn codeword_boundary() {
        let p = SignedPayload::from_bytes(vec![0; 226]);
        assert!(matches!(rs_encode(&p, 30), Err(Error::PayloadTooLong { .. })));
        let p = SignedPayload::from_bytes(vec![9, 8, 7]);
        assert_eq!(rs_encode(&p, 0).unwrap().as_bytes(), &[9, 8, 7]);
    }

    #[test]
    fn wrong_key_rejected() {
        let m = Message::new(*b"provenance").unwrap();
        let p = sign_payload(&m, &key());
        let other = KeyPair::generate(Some(&[1u8; 32])).unwrap();
        assert!(matches!(
            parse_and_verify(&p, &other.public_key()),
            Err(Error::SignatureInvalid)
        ));
    }

    #[test]
    fn every_single_bit_flip_rejected() {
        let kp = key();
        let p = sign_payload(&Message::new(*b"bitflip").unwrap(), &kp);
        for byte in 0..p.len() {
            for bit in 0..8 {
                let mut bytes = p.as_bytes().to_vec();
                bytes[byte] ^= 1 << bit;
                let r = parse_and_verify(&SignedPayload::from_bytes(bytes), &kp.public_key());
                assert!(matches!(
                    r,
                    Err(Error::SignatureInvalid) | Err(Error::MalformedFrame)
                ));
            }
        }
    }

    #[test]
    fn short_frame_is_malformed() {
        let p = SignedPayload::from_bytes(vec![0; 65]);
        assert!(matches!(
            parse_and_verify(&p, &key().public_key()),
            Err(Error::MalformedFrame)
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn full_round_trip(msg in proptest::collection::vec(any::<u8>(), 1..=159)) {
            let kp = key();
            let m = Message::new(msg).unwrap();
            let cw = rs_encode(&sign_payload(&m, &kp), 30).unwrap();
            let back = parse_and_verify(&rs_decode(cw.as_bytes(), 30).unwrap(), &kp.public_key()).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
