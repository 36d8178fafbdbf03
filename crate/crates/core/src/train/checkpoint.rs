//! Classifier checkpoint: a little-endian blob.
//!
//! ```text
//! magic        8 bytes  "SPLSEGCK"
//! version      u8       1
//! lr_features  f64
//! lr_linear    f64
//! iterations   u64
//! gamma_obj    f64
//! beta1 beta2 eps  3 × f64
//! seed         u64
//! weights      256×16 f64, row-major by class
//! bias         256 f64
//! ```

use std::fs;
use std::path::Path;

use super::adam::AdamConfig;
use super::classifier::{LinearClassifier, NUM_CLASSES};
use super::trainer::TrainConfig;
use crate::error::{Error, Result};
use crate::scene::FEATURE_DIM;

const MAGIC: &[u8; 8] = b"SPLSEGCK";
const VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub classifier: LinearClassifier,
    pub config: TrainConfig,
}

pub fn write_checkpoint(ckpt: &Checkpoint) -> Vec<u8> {
    let c = &ckpt.config;
    let mut out = Vec::with_capacity(9 + 8 * (8 + NUM_CLASSES * (FEATURE_DIM + 1)));
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    for v in [c.lr_features, c.lr_linear] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&c.iterations.to_le_bytes());
    for v in [c.gamma_obj, c.adam.beta1, c.adam.beta2, c.adam.eps] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&c.seed.to_le_bytes());
    for v in ckpt.classifier.weights.iter().chain(&ckpt.classifier.bias) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn read_checkpoint(bytes: &[u8]) -> Result<Checkpoint> {
    if bytes.len() < 9 || &bytes[..8] != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    if bytes[8] != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {}", bytes[8])));
    }
    let expected = 9 + 8 * (8 + NUM_CLASSES * (FEATURE_DIM + 1));
    if bytes.len() != expected {
        return Err(Error::Checkpoint(format!(
            "expected {expected} bytes, got {}",
            bytes.len()
        )));
    }
    let mut words = bytes[9..]
        .chunks_exact(8)
        .map(|c| <[u8; 8]>::try_from(c).unwrap());
    let mut f = || f64::from_le_bytes(words.next().unwrap());
    let lr_features = f();
    let lr_linear = f();
    let iterations = f().to_bits();
    let gamma_obj = f();
    let adam = AdamConfig {
        beta1: f(),
        beta2: f(),
        eps: f(),
    };
    let seed = f().to_bits();
    let weights = (0..NUM_CLASSES * FEATURE_DIM).map(|_| f()).collect();
    let bias = (0..NUM_CLASSES).map(|_| f()).collect();
    Ok(Checkpoint {
        classifier: LinearClassifier { weights, bias },
        config: TrainConfig {
            lr_features,
            lr_linear,
            iterations,
            gamma_obj,
            adam,
            seed,
        },
    })
}

pub fn save_checkpoint(ckpt: &Checkpoint, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_checkpoint(ckpt)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    read_checkpoint(&bytes)
}
