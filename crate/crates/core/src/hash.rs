//! SHA-256 digests and the domain-separated hashing rules shared by every
//! tree in this crate.
//!
//! Leaf nodes hash as `H(0x00 || key || value)` and internal nodes as
//! `H(0x01 || left || right)`; the distinct prefixes keep a leaf encoding
//! from ever colliding with an internal-node encoding. An absent subtree is
//! represented by the all-zero digest [`EMPTY`].

use std::fmt;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest as _, Sha256};
use thiserror::Error;

/// Domain-separation prefix for leaf hashes.
const LEAF_TAG: [u8; 1] = [0x00];
/// Domain-separation prefix for internal-node hashes.
const NODE_TAG: [u8; 1] = [0x01];

/// A 32-byte SHA-256 output.
///
/// Roots, leaf hashes, sibling hashes and content digests are all `Digest`s.
/// The textual encoding is always 64 lowercase hex characters.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Digest([u8; 32]);

/// Marker for an empty subtree: 32 zero bytes.
pub const EMPTY: Digest = Digest([0u8; 32]);

/// Failure to parse a digest from its textual form.
#[derive(Debug, Error, PartialEq)]
pub enum DigestError {
    #[error("expected {expected} hex characters, got {got}")]
    Length { expected: usize, got: usize },
    #[error("invalid hex: {0}")]
    Hex(#[from] hex::FromHexError),
}

impl Digest {
    pub const LEN: usize = 32;

    pub const fn new(bytes: [u8; 32]) -> Self {
        Digest(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self, DigestError> {
        if s.len() != 2 * Self::LEN {
            return Err(DigestError::Length {
                expected: 2 * Self::LEN,
                got: s.len(),
            });
        }
        let mut bytes = [0u8; 32];
        hex::decode_to_slice(s, &mut bytes)?;
        Ok(Digest(bytes))
    }
}

impl From<[u8; 32]> for Digest {
    fn from(bytes: [u8; 32]) -> Self {
        Digest(bytes)
    }
}

impl AsRef<[u8]> for Digest {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", self.to_hex())
    }
}

impl Serialize for Digest {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Digest {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Digest::from_hex(&s).map_err(de::Error::custom)
    }
}

/// SHA-256 of a byte string.
pub fn sha256(data: &[u8]) -> Digest {
    let mut h = Sha256::new();
    h.update(data);
    Digest(h.finalize().into())
}

/// SHA-256 over the concatenation of `parts`, without materializing it.
pub fn sha256_concat(parts: &[&[u8]]) -> Digest {
    let mut h = Sha256::new();
    for part in parts {
        h.update(part);
    }
    Digest(h.finalize().into())
}

/// Leaf hash: `H(0x00 || key || value)`.
pub fn leaf_hash(key: &Digest, value: &Digest) -> Digest {
    sha256_concat(&[&LEAF_TAG, key.as_bytes(), value.as_bytes()])
}

/// Internal-node hash: `H(0x01 || left || right)`.
pub fn node_hash(left: &Digest, right: &Digest) -> Digest {
    sha256_concat(&[&NODE_TAG, left.as_bytes(), right.as_bytes()])
}
