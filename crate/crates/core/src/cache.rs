//! On-disk result cache keyed by a SHA-256 of the producing parameters.
//! Each entry has a `.sha256` sidecar; an entry whose digest does not match
//! is rebuilt.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::arith::PrimeSieve;
use crate::error::{Error, Result};

pub const CACHE_DIR_ENV: &str = "RESONANCE_CACHE_DIR";
pub const PRIME_MAGIC: [u8; 8] = *b"RSPRIME1";

pub fn digest_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Little-endian prime table: 8-byte magic, 8-byte capacity, then the primes.
pub fn encode_prime_table(capacity: u64, primes: &[u64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 8 * primes.len());
    out.extend_from_slice(&PRIME_MAGIC);
    out.extend_from_slice(&capacity.to_le_bytes());
    for p in primes {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

pub fn decode_prime_table(bytes: &[u8]) -> Result<(u64, Vec<u64>)> {
    if bytes.len() < 16 || bytes[..8] != PRIME_MAGIC {
        return Err(Error::Parse("prime table: bad header".into()));
    }
    if (bytes.len() - 16) % 8 != 0 {
        return Err(Error::Parse("prime table: truncated body".into()));
    }
    let word = |c: &[u8]| u64::from_le_bytes(c.try_into().expect("8-byte chunk"));
    let capacity = word(&bytes[8..16]);
    let primes: Vec<u64> = bytes[16..].chunks_exact(8).map(word).collect();
    if primes.windows(2).any(|w| w[0] >= w[1]) || primes.last().is_some_and(|&p| p > capacity) {
        return Err(Error::Parse("prime table: entries not increasing or above capacity".into()));
    }
    Ok((capacity, primes))
}

#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// `$RESONANCE_CACHE_DIR` if set, else `fallback`.
    pub fn from_env(fallback: impl Into<PathBuf>) -> Self {
        match std::env::var_os(CACHE_DIR_ENV) {
            Some(dir) if !dir.is_empty() => Self::new(dir),
            _ => Self::new(fallback),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, kind: &str, params: &str) -> PathBuf {
        let key = digest_hex(format!("{kind}\n{params}").as_bytes());
        self.dir.join(format!("{kind}-{}", &key[..32]))
    }

    fn sidecar(path: &Path) -> PathBuf {
        let mut s = path.as_os_str().to_owned();
        s.push(".sha256");
        PathBuf::from(s)
    }

    /// The stored bytes, if present and matching their digest.
    pub fn get(&self, kind: &str, params: &str) -> Option<Vec<u8>> {
        let path = self.path_for(kind, params);
        let bytes = fs::read(&path).ok()?;
        let want = fs::read_to_string(Self::sidecar(&path)).ok()?;
        (want.trim() == digest_hex(&bytes)).then_some(bytes)
    }

    pub fn put(&self, kind: &str, params: &str, bytes: &[u8]) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path_for(kind, params);
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, bytes)?;
        fs::rename(&tmp, &path)?;
        fs::write(Self::sidecar(&path), digest_hex(bytes))?;
        Ok(())
    }

    /// Cached value for `(kind, params)`, rebuilt when missing, corrupt or
    /// unparsable.
    pub fn get_or_build<T>(
        &self,
        kind: &str,
        params: &str,
        encode: impl Fn(&T) -> Vec<u8>,
        decode: impl Fn(&[u8]) -> Result<T>,
        build: impl FnOnce() -> Result<T>,
    ) -> Result<T> {
        if let Some(bytes) = self.get(kind, params) {
            if let Ok(v) = decode(&bytes) {
                return Ok(v);
            }
        }
        let v = build()?;
        self.put(kind, params, &encode(&v))?;
        Ok(v)
    }

    /// Primes up to `x`.
    pub fn primes_up_to(&self, sieve: &PrimeSieve, x: u64) -> Result<Vec<u64>> {
        self.get_or_build(
            "primes",
            &format!("x={x}"),
            |p: &Vec<u64>| encode_prime_table(x, p),
            |b| {
                let (cap, p) = decode_prime_table(b)?;
                if cap != x {
                    return Err(Error::Parse("prime table capacity mismatch".into()));
                }
                Ok(p)
            },
            || sieve.primes_up_to(x),
        )
    }

    /// UTF-8 text entry.
    pub fn text(&self, kind: &str, params: &str, build: impl FnOnce() -> Result<String>) -> Result<String> {
        self.get_or_build(
            kind,
            params,
            |s: &String| s.as_bytes().to_vec(),
            |b| String::from_utf8(b.to_vec()).map_err(|e| Error::Parse(e.to_string())),
            build,
        )
    }
}
