//! Download-once cache for public datasets.
//!
//! Layout: `<cache_dir>/<name>/<basename(url)>` plus a sidecar
//! `<basename>.meta.json` recording the url, byte length, SHA-256 digest and
//! retrieval time.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{DtbError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchMetadata {
    pub url: String,
    pub bytes: u64,
    pub sha256: String,
    /// Seconds since the Unix epoch.
    pub retrieved_at: u64,
}

pub fn cached_path(name: &str, url: &str, cache_dir: &Path) -> PathBuf {
    cache_dir.join(name).join(basename(url))
}

fn metadata_path(file: &Path) -> PathBuf {
    let mut name = file.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    file.with_file_name(name)
}

fn basename(url: &str) -> &str {
    let path = url.split(['?', '#']).next().unwrap_or(url);
    match path.trim_end_matches('/').rsplit('/').next() {
        Some(b) if !b.is_empty() => b,
        _ => "download",
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn read_metadata(file: &Path) -> Option<FetchMetadata> {
    let text = fs::read_to_string(metadata_path(file)).ok()?;
    serde_json::from_str(&text).ok()
}

/// Returns the local path for `url`, downloading only on a cache miss.
pub fn fetch_dataset(name: &str, url: &str, cache_dir: &Path) -> Result<PathBuf> {
    fetch_dataset_verified(name, url, cache_dir, None)
}

/// As [`fetch_dataset`], additionally checking the file against an expected
/// SHA-256 digest (hex) when one is given, and against the byte length
/// recorded in the sidecar on cache hits.
pub fn fetch_dataset_verified(
    name: &str,
    url: &str,
    cache_dir: &Path,
    expected_sha256: Option<&str>,
) -> Result<PathBuf> {
    let path = cached_path(name, url, cache_dir);
    if path.is_file() {
        let bytes = fs::read(&path)?;
        if let Some(meta) = read_metadata(&path) {
            if meta.bytes != bytes.len() as u64 {
                return Err(DtbError::data(format!(
                    "cached {} has {} bytes, sidecar records {}",
                    path.display(),
                    bytes.len(),
                    meta.bytes
                )));
            }
        }
        verify_digest(name, &bytes, expected_sha256)?;
        return Ok(path);
    }

    let bytes = download(url).map_err(|reason| DtbError::Unreachable {
        name: name.to_owned(),
        reason,
    })?;
    verify_digest(name, &bytes, expected_sha256)?;

    fs::create_dir_all(path.parent().expect("cache path has a parent"))?;
    let partial = path.with_extension("partial");
    fs::File::create(&partial)?.write_all(&bytes)?;
    fs::rename(&partial, &path)?;
    let meta = FetchMetadata {
        url: url.to_owned(),
        bytes: bytes.len() as u64,
        sha256: sha256_hex(&bytes),
        retrieved_at: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
    };
    fs::write(metadata_path(&path), serde_json::to_string_pretty(&meta)?)?;
    Ok(path)
}

fn verify_digest(name: &str, bytes: &[u8], expected: Option<&str>) -> Result<()> {
    if let Some(expected) = expected {
        let actual = sha256_hex(bytes);
        if !actual.eq_ignore_ascii_case(expected) {
            return Err(DtbError::DigestMismatch {
                name: name.to_owned(),
                expected: expected.to_owned(),
                actual,
            });
        }
    }
    Ok(())
}

fn download(url: &str) -> std::result::Result<Vec<u8>, String> {
    let agent = ureq::AgentBuilder::new()
        .timeout_connect(Duration::from_secs(15))
        .timeout(Duration::from_secs(300))
        .build();
    let response = agent.get(url).call().map_err(|e| e.to_string())?;
    let mut bytes = Vec::new();
    response
        .into_reader()
        .read_to_end(&mut bytes)
        .map_err(|e| e.to_string())?;
    Ok(bytes)
}

/// Extracts `member` from a zip archive next to the archive, once.
pub fn extract_zip_member(archive: &Path, member: &str) -> Result<PathBuf> {
    let out = archive.with_file_name(basename(member));
    if out.is_file() {
        return Ok(out);
    }
    let file = fs::File::open(archive)?;
    let mut zip = zip::ZipArchive::new(file)
        .map_err(|e| DtbError::data(format!("{}: {e}", archive.display())))?;
    let mut entry = zip
        .by_name(member)
        .map_err(|e| DtbError::data(format!("{member} in {}: {e}", archive.display())))?;
    let mut bytes = Vec::new();
    entry.read_to_end(&mut bytes)?;
    fs::write(&out, bytes)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basename_strips_query_and_path() {
        assert_eq!(basename("https://h/a/b/data.csv"), "data.csv");
        assert_eq!(basename("https://h/a/data.zip?raw=1"), "data.zip");
        assert_eq!(basename("https://h/"), "h");
    }

    #[test]
    fn metadata_sits_next_to_file() {
        let p = Path::new("/c/housing/housing.csv");
        assert_eq!(metadata_path(p), Path::new("/c/housing/housing.csv.meta.json"));
    }

    #[test]
    fn digest_is_sha256() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
