//! Data-path primitives: equal-size chunking with self-delimiting padding,
//! an authenticated cipher envelope, and a content-addressed object store.
//!
//! Every dataset is split into chunks of one fixed size before encryption,
//! so the stored objects of different users are indistinguishable by size.

mod cipher;
mod store;

pub use cipher::{decrypt_chunk, encrypt_chunk, CipherEnvelope, Key, KEY_LEN, NONCE_LEN, TAG_LEN};
pub use store::{ContentAddress, DirStore, MemoryStore, ObjectStore};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum StorageError {
    #[error("chunk_size must be at least 2 bytes, got {0}")]
    ChunkSizeTooSmall(usize),
    #[error("cannot unchunk an empty chunk list")]
    EmptyChunkList,
    #[error("chunks have inconsistent lengths ({found} vs {expected})")]
    NonUniformChunks { expected: usize, found: usize },
    #[error("malformed padding in final chunk")]
    CorruptPadding,
    #[error("malformed cipher envelope ({0} bytes is too short)")]
    MalformedEnvelope(usize),
    #[error("authentication failure: wrong key or tampered envelope")]
    AuthenticationFailure,
    #[error("invalid content address {0:?}")]
    InvalidAddress(String),
    #[error("no object stored at {0}")]
    NotFound(ContentAddress),
    #[error("store i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// One equal-sized piece of a dataset. Uniformity across a dataset is
/// enforced by `chunk_data` (producer) and `unchunk_data` (consumer).
#[derive(Clone, PartialEq, Eq)]
pub struct Chunk(Vec<u8>);

impl Chunk {
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        Chunk(bytes)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }
}

impl std::fmt::Debug for Chunk {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Chunk({} bytes)", self.0.len())
    }
}

const PAD_MARKER: u8 = 0x80;

/// Splits `data` into chunks of exactly `chunk_size` bytes.
///
/// Padding is always applied: a marker byte followed by zero fill. An input
/// whose length is an exact multiple of `chunk_size` therefore gains one
/// extra chunk, and `unchunk_data` needs no out-of-band length.
pub fn chunk_data(data: &[u8], chunk_size: usize) -> Result<Vec<Chunk>, StorageError> {
    if chunk_size < 2 {
        return Err(StorageError::ChunkSizeTooSmall(chunk_size));
    }
    let padded_len = (data.len() + 1).div_ceil(chunk_size) * chunk_size;
    let mut padded = Vec::with_capacity(padded_len);
    padded.extend_from_slice(data);
    padded.push(PAD_MARKER);
    padded.resize(padded_len, 0);
    Ok(padded
        .chunks_exact(chunk_size)
        .map(|c| Chunk(c.to_vec()))
        .collect())
}

/// Exact inverse of `chunk_data`. Rejects empty input, non-uniform chunk
/// lengths and malformed padding.
pub fn unchunk_data(chunks: &[Chunk]) -> Result<Vec<u8>, StorageError> {
    let first = chunks.first().ok_or(StorageError::EmptyChunkList)?;
    let size = first.len();
    if size == 0 {
        return Err(StorageError::CorruptPadding);
    }
    let mut data = Vec::with_capacity(size * chunks.len());
    for chunk in chunks {
        if chunk.len() != size {
            return Err(StorageError::NonUniformChunks {
                expected: size,
                found: chunk.len(),
            });
        }
        data.extend_from_slice(chunk.as_bytes());
    }
    while data.last() == Some(&0) {
        data.pop();
    }
    if data.pop() != Some(PAD_MARKER) {
        return Err(StorageError::CorruptPadding);
    }
    Ok(data)
}

/// Fetches, decrypts and reassembles a dataset, then applies `format_check`.
///
/// The boolean is a verification verdict: any data-level defect (missing
/// object, tampered envelope, bad padding, failed format check) yields
/// `Ok(false)`. Only infrastructure failures surface as errors.
pub fn verify_dataset<S, F>(
    store: &S,
    locations: &[ContentAddress],
    key: &Key,
    format_check: F,
) -> Result<bool, StorageError>
where
    S: ObjectStore + ?Sized,
    F: Fn(&[u8]) -> bool,
{
    if locations.is_empty() {
        return Ok(false);
    }
    let mut chunks = Vec::with_capacity(locations.len());
    for addr in locations {
        let bytes = match store.get(addr) {
            Ok(bytes) => bytes,
            Err(StorageError::NotFound(_)) => return Ok(false),
            Err(e) => return Err(e),
        };
        let envelope = match CipherEnvelope::from_bytes(&bytes) {
            Ok(env) => env,
            Err(_) => return Ok(false),
        };
        match decrypt_chunk(key, &envelope) {
            Ok(chunk) => chunks.push(chunk),
            Err(_) => return Ok(false),
        }
    }
    match unchunk_data(&chunks) {
        Ok(payload) => Ok(format_check(&payload)),
        Err(_) => Ok(false),
    }
}
