//! Sample datasets: an in-memory collection of equal-width bit
//! configurations with provenance metadata, and its on-disk format.
//!
//! The binary layout is: magic `RBMDSET1`, format version (u32 LE), visible
//! width nx (u64 LE), sample count (u64 LE), the 32-byte SHA-256 of the
//! generating model's canonical text (zeros when unknown), then one packed
//! row per sample of ceil(nx / 8) bytes, bit i of the row stored at byte
//! i / 8, bit position i % 8, padding bits zero. A sidecar `<file>.meta.json`
//! carries the provenance metadata and the SHA-256 of the binary file.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rbm::BitConfig;

const DATASET_MAGIC: &[u8; 8] = b"RBMDSET1";
const DATASET_VERSION: u32 = 1;

/// Provenance carried alongside a dataset.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    /// What produced the samples, e.g. "parallel-tempering", "block-gibbs",
    /// "exact-enumeration", or "unknown" for a bare binary.
    pub source: String,
    /// SHA-256 (hex) of the generating model's canonical text.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_hash: Option<String>,
    /// Canonical text of the generating model, when small enough to embed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_text: Option<String>,
    /// Master seed the generating process ran under.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Echo of the generating configuration, shape depending on `source`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

/// Sidecar JSON document: metadata plus an integrity hash of the binary.
#[derive(Serialize, Deserialize)]
struct Sidecar {
    content_sha256: String,
    meta: DatasetMeta,
}

/// An ordered collection of bit configurations, all of width `nx`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    nx: usize,
    samples: Vec<BitConfig>,
    pub meta: DatasetMeta,
}

impl Dataset {
    pub fn new(nx: usize, samples: Vec<BitConfig>, meta: DatasetMeta) -> Result<Self> {
        for (k, s) in samples.iter().enumerate() {
            if s.len() != nx {
                return Err(Error::dim(format!(
                    "sample {} has width {}, dataset expects {}",
                    k,
                    s.len(),
                    nx
                )));
            }
        }
        Ok(Dataset { nx, samples, meta })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[BitConfig] {
        &self.samples
    }

    pub fn sample(&self, i: usize) -> &BitConfig {
        &self.samples[i]
    }

    /// Samples as a dense (len x nx) matrix of 0.0 / 1.0 values.
    pub fn to_matrix(&self) -> Array2<f64> {
        let mut m = Array2::zeros((self.len(), self.nx));
        for (r, s) in self.samples.iter().enumerate() {
            for i in 0..self.nx {
                m[[r, i]] = s.bit(i) as f64;
            }
        }
        m
    }

    fn row_bytes(&self) -> usize {
        self.nx.div_ceil(8)
    }

    fn encode(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(8 + 4 + 8 + 8 + 32 + self.len() * self.row_bytes());
        buf.extend_from_slice(DATASET_MAGIC);
        buf.extend_from_slice(&DATASET_VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.nx as u64).to_le_bytes());
        buf.extend_from_slice(&(self.len() as u64).to_le_bytes());
        let mut model_hash = [0u8; 32];
        if let Some(hexhash) = &self.meta.model_hash {
            if let Ok(raw) = hex::decode(hexhash) {
                if raw.len() == 32 {
                    model_hash.copy_from_slice(&raw);
                }
            }
        }
        buf.extend_from_slice(&model_hash);
        let rb = self.row_bytes();
        for s in &self.samples {
            let mut row = vec![0u8; rb];
            for i in 0..self.nx {
                if s.bit(i) == 1 {
                    row[i / 8] |= 1 << (i % 8);
                }
            }
            buf.extend_from_slice(&row);
        }
        buf
    }

    /// Writes the binary file and its sidecar atomically (temp + rename).
    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = self.encode();
        let content_sha256 = hex::encode(Sha256::digest(&bytes));
        write_atomic(path, &bytes)?;
        let sidecar = Sidecar { content_sha256, meta: self.meta.clone() };
        let json = serde_json::to_string_pretty(&sidecar)
            .expect("metadata serializes") + "\n";
        write_atomic(&sidecar_path(path), json.as_bytes())?;
        Ok(())
    }

    /// Reads a dataset. If the sidecar exists its integrity hash must match
    /// the binary; if it is absent the metadata is marked "unknown".
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path)?;
        let mut r = BufReader::new(file);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)
            .map_err(|_| Error::Format("file too short for dataset header".into()))?;
        if &magic != DATASET_MAGIC {
            return Err(Error::Format(format!(
                "bad magic {:?}, expected {:?}",
                magic, DATASET_MAGIC
            )));
        }
        let mut u32buf = [0u8; 4];
        r.read_exact(&mut u32buf)
            .map_err(|_| Error::Format("truncated dataset header".into()))?;
        let version = u32::from_le_bytes(u32buf);
        if version != DATASET_VERSION {
            return Err(Error::Format(format!(
                "unsupported dataset format version {}",
                version
            )));
        }
        let mut u64buf = [0u8; 8];
        r.read_exact(&mut u64buf)
            .map_err(|_| Error::Format("truncated dataset header".into()))?;
        let nx = u64::from_le_bytes(u64buf) as usize;
        r.read_exact(&mut u64buf)
            .map_err(|_| Error::Format("truncated dataset header".into()))?;
        let count = u64::from_le_bytes(u64buf) as usize;
        let mut model_hash = [0u8; 32];
        r.read_exact(&mut model_hash)
            .map_err(|_| Error::Format("truncated dataset header".into()))?;

        let rb = nx.div_ceil(8);
        let mut samples = Vec::with_capacity(count);
        let mut row = vec![0u8; rb];
        for k in 0..count {
            r.read_exact(&mut row)
                .map_err(|_| Error::Format(format!("truncated at sample {}", k)))?;
            let mut bits = vec![0u8; nx];
            for (i, slot) in bits.iter_mut().enumerate() {
                *slot = (row[i / 8] >> (i % 8)) & 1;
            }
            for (byte_idx, &byte) in row.iter().enumerate() {
                let used = (nx - byte_idx * 8).min(8);
                if used < 8 && byte >> used != 0 {
                    return Err(Error::Format(format!(
                        "nonzero padding bits in sample {}",
                        k
                    )));
                }
            }
            samples.push(BitConfig::new(bits)?);
        }
        let mut trailing = [0u8; 1];
        if r.read(&mut trailing)? != 0 {
            return Err(Error::Format("trailing bytes after dataset payload".into()));
        }

        let meta = match fs::read_to_string(sidecar_path(path)) {
            Ok(json) => {
                let sidecar: Sidecar = serde_json::from_str(&json).map_err(|e| {
                    Error::Format(format!("bad sidecar metadata: {}", e))
                })?;
                let actual = hex::encode(Sha256::digest(fs::read(path)?));
                if actual != sidecar.content_sha256 {
                    return Err(Error::Format(
                        "dataset content does not match sidecar integrity hash".into(),
                    ));
                }
                sidecar.meta
            }
            Err(_) => DatasetMeta {
                source: "unknown".into(),
                model_hash: if model_hash.iter().any(|&b| b != 0) {
                    Some(hex::encode(model_hash))
                } else {
                    None
                },
                ..DatasetMeta::default()
            },
        };

        Dataset::new(nx, samples, meta)
    }
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    path.with_file_name(name)
}

/// Writes `bytes` to `path` via a temp file in the same directory plus an
/// atomic rename, so interrupted runs never leave partial outputs behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    {
        let file = File::create(&tmp)?;
        let mut w = BufWriter::new(file);
        w.write_all(bytes)?;
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
