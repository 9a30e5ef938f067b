//! Content-addressed object stores.
//!
//! An object's address is the SHA-256 of its bytes, so `put` is idempotent
//! and `get(put(x)) == x` by construction. Two backends: an in-memory map
//! for simulation speed and a directory layout for on-disk inspection.

use std::collections::BTreeMap;
use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::StorageError;

/// SHA-256 digest of stored bytes, rendered as 64 lowercase hex chars.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContentAddress(String);

impl ContentAddress {
    pub fn of(bytes: &[u8]) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(bytes);
        ContentAddress(hex::encode(hasher.finalize()))
    }

    pub fn parse(s: &str) -> Result<Self, StorageError> {
        let valid = s.len() == 64 && s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'));
        if !valid {
            return Err(StorageError::InvalidAddress(s.to_string()));
        }
        Ok(ContentAddress(s.to_string()))
    }

    pub fn as_hex(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for ContentAddress {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::fmt::Debug for ContentAddress {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ContentAddress({}..)", &self.0[..8.min(self.0.len())])
    }
}

/// The decentralized-file-storage seam. Reads take `&self` so stores can be
/// shared for concurrent reads; writes are serialized through `&mut self`.
pub trait ObjectStore {
    fn put(&mut self, bytes: &[u8]) -> Result<ContentAddress, StorageError>;
    fn get(&self, addr: &ContentAddress) -> Result<Vec<u8>, StorageError>;
    fn contains(&self, addr: &ContentAddress) -> Result<bool, StorageError>;
    /// Number of distinct objects held. Identical content stored twice
    /// counts once.
    fn object_count(&self) -> Result<usize, StorageError>;
}

/// In-memory backend.
#[derive(Default)]
pub struct MemoryStore {
    objects: BTreeMap<ContentAddress, Vec<u8>>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stored object sizes in address order, for size-profile audits.
    pub fn object_sizes(&self) -> Vec<usize> {
        self.objects.values().map(Vec::len).collect()
    }
}

impl ObjectStore for MemoryStore {
    fn put(&mut self, bytes: &[u8]) -> Result<ContentAddress, StorageError> {
        let addr = ContentAddress::of(bytes);
        self.objects.entry(addr.clone()).or_insert_with(|| bytes.to_vec());
        Ok(addr)
    }

    fn get(&self, addr: &ContentAddress) -> Result<Vec<u8>, StorageError> {
        self.objects
            .get(addr)
            .cloned()
            .ok_or_else(|| StorageError::NotFound(addr.clone()))
    }

    fn contains(&self, addr: &ContentAddress) -> Result<bool, StorageError> {
        Ok(self.objects.contains_key(addr))
    }

    fn object_count(&self) -> Result<usize, StorageError> {
        Ok(self.objects.len())
    }
}

/// Directory-backed store with layout `<root>/objects/<first-2-hex>/<full-hex>`,
/// one file per object, holding the raw envelope bytes.
pub struct DirStore {
    objects_dir: PathBuf,
}

impl DirStore {
    pub fn open(root: impl AsRef<Path>) -> Result<Self, StorageError> {
        let objects_dir = root.as_ref().join("objects");
        fs::create_dir_all(&objects_dir)?;
        Ok(DirStore { objects_dir })
    }

    fn path_for(&self, addr: &ContentAddress) -> PathBuf {
        self.objects_dir
            .join(&addr.as_hex()[..2])
            .join(addr.as_hex())
    }
}

impl ObjectStore for DirStore {
    fn put(&mut self, bytes: &[u8]) -> Result<ContentAddress, StorageError> {
        let addr = ContentAddress::of(bytes);
        let path = self.path_for(&addr);
        if path.exists() {
            return Ok(addr);
        }
        let parent = path.parent().expect("object path has a shard directory");
        fs::create_dir_all(parent)?;
        // write-then-rename so readers never observe a partial object
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, bytes)?;
        fs::rename(&tmp, &path)?;
        Ok(addr)
    }

    fn get(&self, addr: &ContentAddress) -> Result<Vec<u8>, StorageError> {
        match fs::read(self.path_for(addr)) {
            Ok(bytes) => Ok(bytes),
            Err(e) if e.kind() == ErrorKind::NotFound => Err(StorageError::NotFound(addr.clone())),
            Err(e) => Err(e.into()),
        }
    }

    fn contains(&self, addr: &ContentAddress) -> Result<bool, StorageError> {
        Ok(self.path_for(addr).exists())
    }

    fn object_count(&self) -> Result<usize, StorageError> {
        let mut count = 0;
        for shard in fs::read_dir(&self.objects_dir)? {
            let shard = shard?;
            if shard.file_type()?.is_dir() {
                count += fs::read_dir(shard.path())?
                    .filter(|e| {
                        e.as_ref()
                            .map(|e| e.path().extension().is_none())
                            .unwrap_or(false)
                    })
                    .count();
            }
        }
        Ok(count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn address_is_a_pure_function_of_content() {
        assert_eq!(ContentAddress::of(b"abc"), ContentAddress::of(b"abc"));
        assert_ne!(ContentAddress::of(b"abc"), ContentAddress::of(b"abd"));
        assert_eq!(ContentAddress::of(b"abc").as_hex().len(), 64);
    }

    #[test]
    fn parse_rejects_bad_addresses() {
        assert!(ContentAddress::parse("zz").is_err());
        assert!(ContentAddress::parse(&"A".repeat(64)).is_err());
        let good = ContentAddress::of(b"x");
        assert_eq!(ContentAddress::parse(good.as_hex()).unwrap(), good);
    }

    #[test]
    fn memory_store_round_trip_and_idempotent_put() {
        let mut store = MemoryStore::new();
        let a1 = store.put(b"payload").unwrap();
        let a2 = store.put(b"payload").unwrap();
        assert_eq!(a1, a2);
        assert_eq!(store.object_count().unwrap(), 1);
        assert_eq!(store.get(&a1).unwrap(), b"payload");
    }

    #[test]
    fn memory_store_unknown_address_is_not_found() {
        let store = MemoryStore::new();
        let missing = ContentAddress::of(b"never stored");
        assert!(matches!(
            store.get(&missing),
            Err(StorageError::NotFound(_))
        ));
    }

    #[test]
    fn dir_store_layout_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = DirStore::open(dir.path()).unwrap();
        let addr = store.put(b"on disk").unwrap();
        let expected = dir
            .path()
            .join("objects")
            .join(&addr.as_hex()[..2])
            .join(addr.as_hex());
        assert!(expected.is_file());
        assert_eq!(store.get(&addr).unwrap(), b"on disk");
        assert!(store.contains(&addr).unwrap());
        assert_eq!(store.object_count().unwrap(), 1);
        store.put(b"on disk").unwrap();
        assert_eq!(store.object_count().unwrap(), 1);
    }
}
