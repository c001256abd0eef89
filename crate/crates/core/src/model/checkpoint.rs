//! Binary checkpoints: magic, version, a JSON header and little-endian f64
//! tensor data in parameter order.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ModelConfig;
use super::encoder::{init_model, Encoder, Partition};
use super::vocab::Vocab;
use super::{real, ModelError, Real, Result};

pub const MAGIC: &[u8; 8] = b"MSTCKPT\0";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub partition: Partition,
    pub shape: Vec<usize>,
    /// Offset in elements from the start of the data section.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub config: ModelConfig,
    pub vocab: Vec<String>,
    pub tensors: Vec<TensorEntry>,
}

fn bad(m: impl Into<String>) -> ModelError {
    ModelError::Checkpoint(m.into())
}

pub fn to_bytes<F: Real>(model: &Encoder<F>, vocab: &Vocab) -> Vec<u8> {
    let mut tensors = Vec::new();
    let mut data = Vec::new();
    let mut offset = 0;
    for (name, partition, shape, values) in model.params() {
        tensors.push(TensorEntry { name, partition, shape, offset });
        offset += values.len();
        for v in values {
            data.extend_from_slice(&v.to_f64().expect("float").to_le_bytes());
        }
    }
    let header = Header { config: model.config.clone(), vocab: vocab.tokens().to_vec(), tensors };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(20 + json.len() + data.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    out.extend_from_slice(&data);
    out
}

pub fn from_bytes<F: Real>(bytes: &[u8]) -> Result<(Encoder<F>, Vocab)> {
    if bytes.len() < 20 || &bytes[..8] != MAGIC {
        return Err(bad("not a checkpoint"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let hlen = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes")) as usize;
    let data = bytes.get(20 + hlen..).ok_or_else(|| bad("truncated header"))?;
    let header: Header = serde_json::from_slice(&bytes[20..20 + hlen]).map_err(|e| bad(e.to_string()))?;
    let vocab = Vocab::from_tokens(header.vocab.iter().cloned());
    if vocab.tokens() != header.vocab.as_slice() {
        return Err(bad("vocabulary does not start with the special tokens"));
    }
    let mut model: Encoder<F> = init_model(&header.config, vocab.len(), 0)?;
    let expected: Vec<(String, Partition, Vec<usize>)> =
        model.params().into_iter().map(|(n, p, s, _)| (n, p, s)).collect();
    if expected.len() != header.tensors.len() {
        return Err(bad("tensor count mismatch"));
    }
    for ((slot_part, slot), (entry, exp)) in model.params_mut().into_iter().zip(header.tensors.iter().zip(&expected)) {
        if entry.name != exp.0 || entry.partition != exp.1 || entry.shape != exp.2 || slot_part != exp.1 {
            return Err(bad(format!("tensor {} does not match the configuration", entry.name)));
        }
        let start = entry.offset * 8;
        let raw = data.get(start..start + slot.len() * 8).ok_or_else(|| bad(format!("truncated tensor {}", entry.name)))?;
        for (v, chunk) in slot.iter_mut().zip(raw.chunks_exact(8)) {
            *v = real(f64::from_le_bytes(chunk.try_into().expect("8 bytes")));
        }
    }
    Ok((model, vocab))
}

pub fn save<F: Real>(model: &Encoder<F>, vocab: &Vocab, path: &Path) -> Result<()> {
    let io = |source| ModelError::Io { path: path.to_path_buf(), source };
    let mut f = std::fs::File::create(path).map_err(io)?;
    f.write_all(&to_bytes(model, vocab)).map_err(io)
}

pub fn load<F: Real>(path: &Path) -> Result<(Encoder<F>, Vocab)> {
    let io = |source| ModelError::Io { path: path.to_path_buf(), source };
    let mut bytes = Vec::new();
    std::fs::File::open(path).map_err(io)?.read_to_end(&mut bytes).map_err(io)?;
    from_bytes(&bytes)
}
