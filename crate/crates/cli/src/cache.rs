//! Persistent class group cache: one JSON file keyed by discriminant, with a
//! SHA-256 checksum over the entries. Any parse failure, checksum mismatch or
//! inconsistent entry discards the file's contents and recomputes.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use selorder::classgroup::{class_group, ClassGroup, QuadForm};

use crate::CliError;

pub const CACHE_ENV: &str = "SELORDER_CACHE";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Entry {
    elements: Vec<[String; 3]>,
    invariants: Vec<u64>,
    generators: Vec<[String; 3]>,
    dlogs: Vec<Vec<u64>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct CacheFile {
    checksum: String,
    entries: BTreeMap<String, Entry>,
}

fn form_to_strings(f: &QuadForm) -> [String; 3] {
    [f.a.to_string(), f.b.to_string(), f.c.to_string()]
}

fn form_from_strings(s: &[String; 3]) -> Option<QuadForm> {
    Some(QuadForm::new(
        s[0].parse::<num_bigint::BigInt>().ok()?,
        s[1].parse::<num_bigint::BigInt>().ok()?,
        s[2].parse::<num_bigint::BigInt>().ok()?,
    ))
}

impl Entry {
    fn from_group(g: &ClassGroup) -> Self {
        Entry {
            elements: g.elements().iter().map(form_to_strings).collect(),
            invariants: g.invariants().to_vec(),
            generators: g.generators().iter().map(form_to_strings).collect(),
            dlogs: g.dlogs().to_vec(),
        }
    }

    fn to_group(&self, d: i64) -> Option<ClassGroup> {
        let elements = self
            .elements
            .iter()
            .map(form_from_strings)
            .collect::<Option<Vec<_>>>()?;
        let generators = self
            .generators
            .iter()
            .map(form_from_strings)
            .collect::<Option<Vec<_>>>()?;
        ClassGroup::from_parts(
            d,
            elements,
            self.invariants.clone(),
            generators,
            self.dlogs.clone(),
        )
        .ok()
    }
}

fn checksum(entries: &BTreeMap<String, Entry>) -> String {
    let body = serde_json::to_vec(entries).expect("entries serialize");
    Sha256::digest(&body)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// `$SELORDER_CACHE`, else `$HOME/.cache/selorder/classgroups.json`.
pub fn default_path() -> Option<PathBuf> {
    if let Some(p) = std::env::var_os(CACHE_ENV) {
        return Some(PathBuf::from(p));
    }
    let home = std::env::var_os("HOME")?;
    Some(
        PathBuf::from(home)
            .join(".cache")
            .join("selorder")
            .join("classgroups.json"),
    )
}

/// Class groups computed or loaded during one run.
pub struct ClassGroups {
    path: Option<PathBuf>,
    pub hits: usize,
    pub misses: usize,
}

impl ClassGroups {
    pub fn new(use_cache: bool) -> Self {
        ClassGroups {
            path: if use_cache { default_path() } else { None },
            hits: 0,
            misses: 0,
        }
    }

    pub fn get(&mut self, d: i64) -> Result<ClassGroup, CliError> {
        let Some(path) = self.path.clone() else {
            self.misses += 1;
            return Ok(class_group(d)?);
        };
        match self.get_cached(&path, d) {
            Ok(g) => Ok(g),
            // An unusable cache location never changes the answer.
            Err(CliError::Io(_)) => {
                self.misses += 1;
                Ok(class_group(d)?)
            }
            Err(e) => Err(e),
        }
    }

    fn get_cached(&mut self, path: &PathBuf, d: i64) -> Result<ClassGroup, CliError> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let mut file: File = OpenOptions::new()
            .read(true)
            .write(true)
            .create(true)
            .truncate(false)
            .open(path)?;
        file.lock()?;
        let mut text = String::new();
        file.read_to_string(&mut text)?;
        let mut cache: CacheFile = serde_json::from_str(&text).unwrap_or_default();
        if checksum(&cache.entries) != cache.checksum {
            cache.entries.clear();
        }
        let key = d.to_string();
        if let Some(g) = cache.entries.get(&key).and_then(|e| e.to_group(d)) {
            self.hits += 1;
            return Ok(g);
        }
        self.misses += 1;
        let g = class_group(d)?;
        cache.entries.insert(key, Entry::from_group(&g));
        cache.checksum = checksum(&cache.entries);
        let body = serde_json::to_string(&cache).expect("cache serializes");
        file.set_len(0)?;
        file.seek(SeekFrom::Start(0))?;
        file.write_all(body.as_bytes())?;
        file.sync_all()?;
        Ok(g)
    }
}
