//! On-disk cache for kernel tables.
//!
//! Each entry is one file named by the SHA-256 of its key. Layout, all
//! integers and floats little-endian:
//!
//! ```text
//! magic     4 bytes  "HRZK"
//! version   u32      1
//! key_len   u64
//! key       key_len bytes of UTF-8
//! count     u64
//! payload   count × f64
//! ```
//!
//! The full key is stored and compared on load, so a hash collision or a
//! stale file never yields a wrong table; it is rebuilt instead.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::Result;

/// Environment variable overriding the cache directory.
pub const CACHE_DIR_ENV: &str = "HARTREE_CACHE_DIR";

const MAGIC: &[u8; 4] = b"HRZK";
const VERSION: u32 = 1;

#[derive(Clone, Debug)]
pub struct KernelCache {
    dir: PathBuf,
}

impl KernelCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// Directory from [`CACHE_DIR_ENV`], falling back to `default`.
    pub fn from_env_or(default: impl Into<PathBuf>) -> Self {
        match std::env::var_os(CACHE_DIR_ENV) {
            Some(dir) if !dir.is_empty() => Self::new(dir),
            _ => Self::new(default),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(kind: &str, dim: usize, gamma: f64, signature: &str) -> String {
        format!("{kind}:N{dim}:g{:016x}:{signature}", gamma.to_bits())
    }

    pub fn path_for(&self, key: &str) -> PathBuf {
        let digest = Sha256::digest(key.as_bytes());
        let name: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.dir.join(format!("{name}.bin"))
    }

    /// Stored payload for `key`, if present, intact and matching.
    pub fn load(&self, key: &str, expected_len: usize) -> Option<Vec<f64>> {
        let mut bytes = Vec::new();
        fs::File::open(self.path_for(key)).ok()?.read_to_end(&mut bytes).ok()?;
        let data = decode(&bytes, key)?;
        (data.len() == expected_len).then_some(data)
    }

    pub fn store(&self, key: &str, data: &[f64]) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path_for(key);
        let tmp = path.with_extension("tmp");
        let mut out = Vec::with_capacity(24 + key.len() + 8 * data.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(key.len() as u64).to_le_bytes());
        out.extend_from_slice(key.as_bytes());
        out.extend_from_slice(&(data.len() as u64).to_le_bytes());
        for x in data {
            out.extend_from_slice(&x.to_le_bytes());
        }
        fs::File::create(&tmp)?.write_all(&out)?;
        fs::rename(tmp, path)?;
        Ok(())
    }

    /// Load `key`, or build, store and return it.
    pub fn get_or_build<F: FnOnce() -> Vec<f64>>(&self, key: &str, len: usize, build: F) -> Result<Vec<f64>> {
        if let Some(data) = self.load(key, len) {
            return Ok(data);
        }
        let data = build();
        self.store(key, &data)?;
        Ok(data)
    }
}

fn decode(bytes: &[u8], key: &str) -> Option<Vec<f64>> {
    let take = |at: usize, n: usize| bytes.get(at..at + n);
    if take(0, 4)? != MAGIC {
        return None;
    }
    let version = u32::from_le_bytes(take(4, 4)?.try_into().ok()?);
    if version != VERSION {
        return None;
    }
    let key_len = u64::from_le_bytes(take(8, 8)?.try_into().ok()?) as usize;
    if take(16, key_len)? != key.as_bytes() {
        return None;
    }
    let at = 16 + key_len;
    let count = u64::from_le_bytes(take(at, 8)?.try_into().ok()?) as usize;
    let payload = take(at + 8, count.checked_mul(8)?)?;
    if bytes.len() != at + 8 + 8 * count {
        return None;
    }
    Some(
        payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_rebuild_on_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let cache = KernelCache::new(dir.path());
        let key = KernelCache::key("toeplitz", 3, 1.5, "radial:test");
        let mut calls = 0;
        let a = cache.get_or_build(&key, 3, || { calls += 1; vec![1.0, 2.0, 3.0] }).unwrap();
        let b = cache.get_or_build(&key, 3, || { calls += 1; vec![0.0; 3] }).unwrap();
        assert_eq!(a, b);
        assert_eq!(calls, 1);
        // a different expected length is treated as stale
        let c = cache.get_or_build(&key, 4, || vec![9.0; 4]).unwrap();
        assert_eq!(c, vec![9.0; 4]);
    }

    #[test]
    fn corrupt_file_is_ignored() {
        let dir = tempfile::tempdir().unwrap();
        let cache = KernelCache::new(dir.path());
        let key = "k";
        cache.store(key, &[1.0, 2.0]).unwrap();
        let path = cache.path_for(key);
        let mut bytes = fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 3);
        fs::write(&path, bytes).unwrap();
        assert!(cache.load(key, 2).is_none());
    }

    #[test]
    fn keys_distinguish_gamma() {
        assert_ne!(KernelCache::key("d", 3, 1.9, "s"), KernelCache::key("d", 3, 1.95, "s"));
    }
}
