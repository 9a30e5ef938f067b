//! Authenticated symmetric encryption for chunk payloads.
//!
//! Encrypt-then-MAC over a ChaCha keystream: the keystream is drawn from a
//! ChaCha20 generator seeded by SHA-256(key, nonce), and the tag is
//! SHA-256(key, nonce, len, ciphertext). Fully deterministic given
//! (key, nonce), which keeps stored artifacts reproducible across runs.
//! The construction lives behind this module boundary so a different cipher
//! can be swapped in without touching callers.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use super::{Chunk, StorageError};

pub const KEY_LEN: usize = 32;
pub const NONCE_LEN: usize = 16;
pub const TAG_LEN: usize = 32;

/// Campaign-wide symmetric key.
#[derive(Clone, PartialEq, Eq)]
pub struct Key([u8; KEY_LEN]);

impl Key {
    pub fn from_bytes(bytes: [u8; KEY_LEN]) -> Self {
        Key(bytes)
    }

    /// Derives a key deterministically from a seed.
    pub fn from_seed(seed: u64) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(b"crowdsense.key.v1");
        hasher.update(seed.to_le_bytes());
        Key(hasher.finalize().into())
    }

    pub fn as_bytes(&self) -> &[u8; KEY_LEN] {
        &self.0
    }
}

impl std::fmt::Debug for Key {
    // never print key material
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Key(..)")
    }
}

/// An encrypted chunk as stored in the DFS: nonce, ciphertext and tag.
#[derive(Clone, PartialEq, Eq)]
pub struct CipherEnvelope {
    pub nonce: [u8; NONCE_LEN],
    pub ciphertext: Vec<u8>,
    pub tag: [u8; TAG_LEN],
}

impl CipherEnvelope {
    /// Wire layout: `nonce || tag || ciphertext`. Because every chunk of a
    /// dataset has the same length, every stored envelope does too.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(NONCE_LEN + TAG_LEN + self.ciphertext.len());
        out.extend_from_slice(&self.nonce);
        out.extend_from_slice(&self.tag);
        out.extend_from_slice(&self.ciphertext);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, StorageError> {
        if bytes.len() < NONCE_LEN + TAG_LEN {
            return Err(StorageError::MalformedEnvelope(bytes.len()));
        }
        let mut nonce = [0u8; NONCE_LEN];
        nonce.copy_from_slice(&bytes[..NONCE_LEN]);
        let mut tag = [0u8; TAG_LEN];
        tag.copy_from_slice(&bytes[NONCE_LEN..NONCE_LEN + TAG_LEN]);
        Ok(CipherEnvelope {
            nonce,
            ciphertext: bytes[NONCE_LEN + TAG_LEN..].to_vec(),
            tag,
        })
    }
}

impl std::fmt::Debug for CipherEnvelope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "CipherEnvelope(nonce={}, {} ct bytes)",
            hex::encode(self.nonce),
            self.ciphertext.len()
        )
    }
}

fn derive_nonce(nonce_seed: u64) -> [u8; NONCE_LEN] {
    let mut hasher = Sha256::new();
    hasher.update(b"crowdsense.nonce.v1");
    hasher.update(nonce_seed.to_le_bytes());
    let digest = hasher.finalize();
    let mut nonce = [0u8; NONCE_LEN];
    nonce.copy_from_slice(&digest[..NONCE_LEN]);
    nonce
}

fn keystream(key: &Key, nonce: &[u8; NONCE_LEN], len: usize) -> Vec<u8> {
    let mut hasher = Sha256::new();
    hasher.update(b"crowdsense.stream.v1");
    hasher.update(key.as_bytes());
    hasher.update(nonce);
    let seed: [u8; 32] = hasher.finalize().into();
    let mut rng = ChaCha20Rng::from_seed(seed);
    let mut stream = vec![0u8; len];
    rng.fill_bytes(&mut stream);
    stream
}

fn compute_tag(key: &Key, nonce: &[u8; NONCE_LEN], ciphertext: &[u8]) -> [u8; TAG_LEN] {
    let mut hasher = Sha256::new();
    hasher.update(b"crowdsense.tag.v1");
    hasher.update(key.as_bytes());
    hasher.update(nonce);
    hasher.update((ciphertext.len() as u64).to_le_bytes());
    hasher.update(ciphertext);
    hasher.finalize().into()
}

/// Encrypts one chunk. The nonce is derived from `nonce_seed`; callers must
/// use a distinct seed per (campaign, source, chunk index).
pub fn encrypt_chunk(key: &Key, chunk: &Chunk, nonce_seed: u64) -> CipherEnvelope {
    let nonce = derive_nonce(nonce_seed);
    let stream = keystream(key, &nonce, chunk.len());
    let ciphertext: Vec<u8> = chunk
        .as_bytes()
        .iter()
        .zip(&stream)
        .map(|(p, s)| p ^ s)
        .collect();
    let tag = compute_tag(key, &nonce, &ciphertext);
    CipherEnvelope {
        nonce,
        ciphertext,
        tag,
    }
}

/// Verifies the tag, then decrypts. Any bit flip in nonce, ciphertext or tag
/// fails authentication, as does a wrong key.
pub fn decrypt_chunk(key: &Key, envelope: &CipherEnvelope) -> Result<Chunk, StorageError> {
    let expected = compute_tag(key, &envelope.nonce, &envelope.ciphertext);
    if expected != envelope.tag {
        return Err(StorageError::AuthenticationFailure);
    }
    let stream = keystream(key, &envelope.nonce, envelope.ciphertext.len());
    let plaintext: Vec<u8> = envelope
        .ciphertext
        .iter()
        .zip(&stream)
        .map(|(c, s)| c ^ s)
        .collect();
    Ok(Chunk::from_bytes(plaintext))
}
