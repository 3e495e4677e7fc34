//! Content-addressed store for command outputs.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

const MAGIC: &str = "hol-cache 1";

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Key over the operation, its parameters, `W`, `M` and the crate version.
pub fn key(op: &str, params: &[String], digits: u32, order: i64) -> String {
    let mut h = Sha256::new();
    for part in [op.to_string(), params.join("\u{1f}"), digits.to_string(), order.to_string(), env!("CARGO_PKG_VERSION").to_string()] {
        h.update(part.as_bytes());
        h.update([0u8]);
    }
    hex(&h.finalize())
}

pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Cache { dir: dir.into() }
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.entry"))
    }

    /// Stored payload, or `None` on a miss. Corrupt entries are reported and removed.
    pub fn get(&self, key: &str) -> Option<Vec<u8>> {
        let path = self.path(key);
        let raw = fs::read(&path).ok()?;
        match decode(&raw) {
            Some(p) => Some(p),
            None => {
                eprintln!("warning: corrupt cache entry {}, recomputing", path.display());
                let _ = fs::remove_file(&path);
                None
            }
        }
    }

    /// Store a payload; failures only warn.
    pub fn put(&self, key: &str, payload: &[u8]) {
        if let Err(e) = write_atomic(&self.dir, &self.path(key), &encode(payload)) {
            eprintln!("warning: could not write cache entry in {}: {e}", self.dir.display());
        }
    }
}

fn encode(payload: &[u8]) -> Vec<u8> {
    let mut out = format!("{MAGIC} {} {}\n", payload.len(), hex(&Sha256::digest(payload))).into_bytes();
    out.extend_from_slice(payload);
    out
}

fn decode(raw: &[u8]) -> Option<Vec<u8>> {
    let nl = raw.iter().position(|&b| b == b'\n')?;
    let header = std::str::from_utf8(&raw[..nl]).ok()?;
    let rest = header.strip_prefix(MAGIC)?.trim();
    let (len, sum) = rest.split_once(' ')?;
    let payload = &raw[nl + 1..];
    (payload.len() == len.parse::<usize>().ok()? && hex(&Sha256::digest(payload)) == sum).then(|| payload.to_vec())
}

fn write_atomic(dir: &Path, path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scratch(name: &str) -> PathBuf {
        let d = std::env::temp_dir().join(format!("hol-cache-test-{name}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&d);
        d
    }

    #[test]
    fn round_trip_and_keys() {
        let dir = scratch("rt");
        let c = Cache::new(&dir);
        let k = key("qexp", &["delta".into()], 60, 500);
        assert!(c.get(&k).is_none());
        c.put(&k, b"payload\n");
        assert_eq!(c.get(&k).unwrap(), b"payload\n");
        assert_ne!(k, key("qexp", &["delta".into()], 61, 500));
        assert_ne!(k, key("qexp", &["delta".into()], 60, 501));
        assert_ne!(key("a", &["bc".into()], 60, 60), key("ab", &["c".into()], 60, 60));
        let _ = fs::remove_dir_all(&dir);
    }

    #[test]
    fn corrupt_and_missing_directory() {
        let dir = scratch("bad");
        let c = Cache::new(&dir);
        let k = key("x", &[], 60, 60);
        c.put(&k, b"good");
        let p = dir.join(format!("{k}.entry"));
        let mut raw = fs::read(&p).unwrap();
        let last = raw.len() - 1;
        raw[last] ^= 1;
        fs::write(&p, raw).unwrap();
        assert!(c.get(&k).is_none());
        assert!(!p.exists());
        fs::remove_dir_all(&dir).unwrap();
        assert!(c.get(&k).is_none());
        c.put(&k, b"again");
        assert_eq!(c.get(&k).unwrap(), b"again");
        let _ = fs::remove_dir_all(&dir);
    }
}
