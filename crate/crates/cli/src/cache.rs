//! Disk cache of `a_p` values: text lines `label p a_p`, rewritten through a
//! temporary file and an atomic rename.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use anyhow::Context;

use hw_core::ec::{count, series::hasse_ok, CurveQ, EcError};
use hw_core::searcher::ApSource;

pub const CACHE_FILE: &str = "ap_cache.txt";

type Key = (String, u64);

#[derive(Debug, Default)]
struct Parsed {
    entries: BTreeMap<Key, i64>,
    corrupt: usize,
}

fn parse(text: &str) -> Parsed {
    let mut out = Parsed::default();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let entry = match f.as_slice() {
            [label, p, a] => match (p.parse::<u64>(), a.parse::<i64>()) {
                (Ok(p), Ok(a)) if hasse_ok(p, a) => Some(((label.to_string(), p), a)),
                _ => None,
            },
            _ => None,
        };
        match entry {
            Some((k, a)) => {
                out.entries.insert(k, a);
            }
            None => out.corrupt += 1,
        }
    }
    out
}

/// Read-through cache; writers in one process are serialized.
#[derive(Debug)]
pub struct ApCache {
    dir: PathBuf,
    write_lock: Mutex<()>,
}

impl ApCache {
    pub fn open(dir: &Path) -> anyhow::Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating cache directory {}", dir.display()))?;
        let probe = tempfile::NamedTempFile::new_in(dir)
            .with_context(|| format!("cache directory {} is not writable", dir.display()))?;
        drop(probe);
        Ok(ApCache { dir: dir.to_path_buf(), write_lock: Mutex::new(()) })
    }

    pub fn path(&self) -> PathBuf {
        self.dir.join(CACHE_FILE)
    }

    fn read(&self) -> Parsed {
        std::fs::read_to_string(self.path()).map(|t| parse(&t)).unwrap_or_default()
    }

    pub fn lookup(&self, label: &str, p: u64) -> Option<i64> {
        self.read().entries.get(&(label.to_string(), p)).copied()
    }

    /// Stores a value, dropping corrupt lines.
    pub fn put(&self, label: &str, p: u64, a: i64) -> anyhow::Result<()> {
        let _guard = self.write_lock.lock().unwrap_or_else(|e| e.into_inner());
        let mut parsed = self.read();
        if parsed.corrupt > 0 {
            log::warn!("dropping {} corrupt line(s) from {}", parsed.corrupt, self.path().display());
        }
        parsed.entries.insert((label.to_string(), p), a);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        for ((l, p), a) in &parsed.entries {
            writeln!(tmp, "{l} {p} {a}")?;
        }
        tmp.flush()?;
        tmp.persist(self.path()).with_context(|| format!("replacing {}", self.path().display()))?;
        Ok(())
    }

    pub fn get_or_compute(&self, curve: &CurveQ, p: u64) -> anyhow::Result<i64> {
        let label = curve.name();
        if let Some(a) = self.lookup(&label, p) {
            return Ok(a);
        }
        let a = count::ap_any(curve, p)?;
        self.put(&label, p, a)?;
        Ok(a)
    }

    pub fn source<'a>(&'a self, curve: &'a CurveQ) -> CachedAp<'a> {
        CachedAp { cache: self, curve }
    }
}

/// An [`ApSource`] backed by the cache, falling back to point counting.
pub struct CachedAp<'a> {
    cache: &'a ApCache,
    curve: &'a CurveQ,
}

impl ApSource for CachedAp<'_> {
    fn ap(&self, p: u64) -> Result<i64, EcError> {
        match self.cache.get_or_compute(self.curve, p) {
            Ok(a) => Ok(a),
            Err(e) => match e.downcast::<EcError>() {
                Ok(ec) => Err(ec),
                Err(io) => {
                    log::warn!("a_p cache unavailable ({io:#}); counting points directly");
                    count::ap_any(self.curve, p)
                }
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hw_core::ec::known::curve_37a;

    #[test]
    fn miss_then_hit() {
        let dir = tempfile::tempdir().unwrap();
        let c = ApCache::open(dir.path()).unwrap();
        let e = curve_37a();
        assert_eq!(c.lookup("37a", 101), None);
        let a = c.get_or_compute(&e, 101).unwrap();
        assert_eq!(c.lookup("37a", 101), Some(a));
        assert_eq!(c.get_or_compute(&e, 101).unwrap(), a);
        assert_eq!(a, count::ap_any(&e, 101).unwrap());
    }

    #[test]
    fn corrupt_lines_are_replaced() {
        let dir = tempfile::tempdir().unwrap();
        let c = ApCache::open(dir.path()).unwrap();
        // a_5 = 999 violates the Hasse bound; the second line is malformed
        std::fs::write(c.path(), "37a 5 999\n37a seven\n37a 3 -3\n").unwrap();
        assert_eq!(c.lookup("37a", 5), None);
        let a = c.get_or_compute(&curve_37a(), 5).unwrap();
        assert_eq!(a, -2);
        let text = std::fs::read_to_string(c.path()).unwrap();
        assert_eq!(text, "37a 3 -3\n37a 5 -2\n");
    }
}
