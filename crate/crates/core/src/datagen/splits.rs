//! Split assembly, deduplication and JSONL serialization.

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::{generate_sample, max_attempts, GenConfig};
use super::{io_err, DatagenError, MstSample, Result, Split};

/// Version of the JSONL sample schema.
pub const SCHEMA_VERSION: u32 = 1;

/// Samples generated in parallel per batch before deduplication.
const CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub file: String,
    pub count: usize,
    /// Answer counts keyed by label.
    pub labels: BTreeMap<String, usize>,
    /// Samples regenerated because their text was already taken.
    pub duplicates_replaced: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub schema_version: u32,
    pub generator_version: String,
    pub seed: u64,
    pub task: super::TaskKind,
    pub prompt_set: super::PromptSet,
    pub notation: crate::numerics::Notation,
    pub scale: f64,
    pub list_length: usize,
    pub splits: BTreeMap<String, SplitSummary>,
}

/// All splits of one (task, prompt set, notation) configuration.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub splits: Vec<(Split, Vec<MstSample>)>,
    pub duplicates_replaced: Vec<usize>,
}

impl Dataset {
    pub fn split(&self, split: Split) -> &[MstSample] {
        self.splits.iter().find(|(s, _)| *s == split).map(|(_, v)| v.as_slice()).unwrap_or(&[])
    }
}

/// Generates every split. Texts are unique across the whole dataset: a
/// sample whose text already appeared is regenerated with the next attempt
/// number. Splits are produced in [`Split::ALL`] order, so training data has
/// first claim on any text.
pub fn generate_dataset(cfg: &GenConfig) -> Result<Dataset> {
    cfg.validate()?;
    let inv = cfg.effective_inventory();
    let mut seen: HashSet<String> = HashSet::new();
    let mut splits = Vec::new();
    let mut replaced = Vec::new();
    for split in Split::ALL {
        let n = cfg.split_count(split);
        let mut out = Vec::with_capacity(n);
        let mut dups = 0;
        for start in (0..n).step_by(CHUNK) {
            let end = (start + CHUNK).min(n);
            let batch: Vec<MstSample> = (start..end)
                .into_par_iter()
                .map(|i| generate_sample(cfg, &inv, split, i as u64, 0))
                .collect::<Result<_>>()?;
            for (offset, mut sample) in batch.into_iter().enumerate() {
                let index = (start + offset) as u64;
                let mut attempt = 0;
                while seen.contains(&sample.text) {
                    attempt += 1;
                    dups += 1;
                    if attempt > max_attempts() {
                        return Err(DatagenError::Exhausted { split, needed: n, got: out.len() });
                    }
                    sample = generate_sample(cfg, &inv, split, index, attempt)?;
                }
                seen.insert(sample.text.clone());
                out.push(sample);
            }
        }
        splits.push((split, out));
        replaced.push(dups);
    }
    Ok(Dataset { splits, duplicates_replaced: replaced })
}

/// Directory holding one configuration's files under `root`.
pub fn dataset_dir(root: &Path, cfg: &GenConfig) -> PathBuf {
    root.join(cfg.task.as_str()).join(cfg.prompt_set.as_str()).join(cfg.notation.as_str())
}

/// Generates and writes `<root>/<task>/<prompt_set>/<notation>/{split}.jsonl`
/// plus `manifest.json`.
pub fn build_splits(cfg: &GenConfig, root: &Path) -> Result<DatasetManifest> {
    let data = generate_dataset(cfg)?;
    let dir = dataset_dir(root, cfg);
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let mut splits = BTreeMap::new();
    for ((split, samples), dups) in data.splits.iter().zip(&data.duplicates_replaced) {
        let path = dir.join(split.file_name());
        write_jsonl(&path, samples)?;
        let mut labels = BTreeMap::new();
        for s in samples {
            *labels.entry(s.answer.clone()).or_insert(0) += 1;
        }
        splits.insert(
            split.as_str().to_string(),
            SplitSummary { file: split.file_name(), count: samples.len(), labels, duplicates_replaced: *dups },
        );
    }
    let manifest = DatasetManifest {
        schema_version: SCHEMA_VERSION,
        generator_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        task: cfg.task,
        prompt_set: cfg.prompt_set,
        notation: cfg.notation,
        scale: cfg.scale,
        list_length: cfg.list_length,
        splits,
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(io_err(&path))?;
    Ok(manifest)
}

pub fn read_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| DatagenError::SchemaViolation {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

pub fn write_jsonl(path: &Path, samples: &[MstSample]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    for s in samples {
        serde_json::to_writer(&mut w, s).expect("sample serializes");
        w.write_all(b"\n").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Reads a JSONL file; the first malformed line aborts with its number.
pub fn read_jsonl(path: &Path) -> Result<Vec<MstSample>> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let sample: MstSample = serde_json::from_str(&line).map_err(|e| DatagenError::SchemaViolation {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(sample);
    }
    Ok(out)
}
