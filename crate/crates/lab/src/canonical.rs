//! Byte-stable JSON and SHA-256 checksums for everything the lab writes.
//!
//! Structs serialize in declaration order and every map in the core crate is
//! a `BTreeMap`, so pretty-printed serde output is already canonical.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{IoContext, LabError, Result};

pub fn to_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("in-memory serialization cannot fail");
    out.push(b'\n');
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_sha256(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path).at(path)?))
}

pub(crate) fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).at(dir)?;
        }
    }
    Ok(())
}

/// Writes canonical JSON and returns its checksum.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<String> {
    let bytes = to_bytes(value);
    ensure_parent(path)?;
    fs::write(path, &bytes).at(path)?;
    Ok(sha256_hex(&bytes))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).at(path)?;
    serde_json::from_str(&text).map_err(|source| LabError::Json { path: path.into(), source })
}

pub fn write_text(path: &Path, text: &str) -> Result<String> {
    ensure_parent(path)?;
    fs::write(path, text).at(path)?;
    Ok(sha256_hex(text.as_bytes()))
}

/// Loads JSON after checking it against a recorded checksum.
pub fn read_verified<T: DeserializeOwned>(path: &Path, expected: &str) -> Result<T> {
    let found = file_sha256(path)?;
    if found != expected {
        return Err(LabError::ChecksumMismatch {
            path: path.into(),
            expected: expected.into(),
            found,
        });
    }
    read_json(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn round_trip_and_verify() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x/v.json");
        let sum = write_json(&path, &vec![1, 2, 3]).unwrap();
        assert_eq!(sum, file_sha256(&path).unwrap());
        let v: Vec<i32> = read_verified(&path, &sum).unwrap();
        assert_eq!(v, [1, 2, 3]);
        assert!(matches!(read_verified::<Vec<i32>>(&path, "00"), Err(LabError::ChecksumMismatch { .. })));
        assert_eq!(to_bytes(&v), to_bytes(&vec![1, 2, 3]));
    }
}
