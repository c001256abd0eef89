//! Evaluation reports: per-seed and mean accuracy per split, CSV I/O and the
//! summary table.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ModelError, Result};
use crate::datagen::{PromptSet, Split, TaskKind};
use crate::numerics::Notation;

pub const CSV_HEADER: [&str; 10] =
    ["model", "task", "prompt_set", "notation", "scale_embedding", "split", "seed", "accuracy", "count", "fingerprint"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    pub split: Split,
    pub count: usize,
    pub per_seed: Vec<(u64, f64)>,
    pub mean: f64,
}

impl SplitResult {
    pub fn new(split: Split, count: usize, per_seed: Vec<(u64, f64)>) -> Self {
        let mean = if per_seed.is_empty() {
            0.0
        } else {
            per_seed.iter().map(|(_, a)| a).sum::<f64>() / per_seed.len() as f64
        };
        Self { split, count, per_seed, mean }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    pub task: TaskKind,
    pub prompt_set: PromptSet,
    pub notation: Notation,
    pub scale_embedding: bool,
    pub fingerprint: String,
    pub splits: Vec<SplitResult>,
}

type GroupKey = (String, String, String, String, bool, String);

/// One CSV line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub model: String,
    pub task: TaskKind,
    pub prompt_set: PromptSet,
    pub notation: Notation,
    pub scale_embedding: bool,
    pub split: Split,
    /// A seed number or `mean`.
    pub seed: String,
    pub accuracy: f64,
    pub count: usize,
    pub fingerprint: String,
}

/// Hex SHA-256 over the given strings, length-prefixed.
pub fn fingerprint(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    format!("{:x}", h.finalize())[..16].to_string()
}

impl EvalReport {
    pub fn split(&self, split: Split) -> Option<&SplitResult> {
        self.splits.iter().find(|s| s.split == split)
    }

    pub fn rows(&self) -> Vec<ReportRow> {
        let mut out = Vec::new();
        for s in &self.splits {
            let row = |seed: String, accuracy: f64| ReportRow {
                model: self.model.clone(),
                task: self.task,
                prompt_set: self.prompt_set,
                notation: self.notation,
                scale_embedding: self.scale_embedding,
                split: s.split,
                seed,
                accuracy,
                count: s.count,
                fingerprint: self.fingerprint.clone(),
            };
            for &(seed, acc) in &s.per_seed {
                out.push(row(seed.to_string(), acc));
            }
            out.push(row("mean".into(), s.mean));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory write");
        for r in self.rows() {
            w.serialize(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|source| ModelError::Io { path: path.to_path_buf(), source })
    }

    /// Rebuilds reports from CSV text; rows are grouped by everything but the
    /// split and seed, and `mean` rows are recomputed.
    pub fn from_csv(text: &str) -> Result<Vec<EvalReport>> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let headers = r.headers().map_err(|e| ModelError::Config(e.to_string()))?.clone();
        if headers.iter().collect::<Vec<_>>() != CSV_HEADER {
            return Err(ModelError::Config(format!("unexpected report header {headers:?}")));
        }
        let mut groups: BTreeMap<GroupKey, BTreeMap<Split, (usize, Vec<(u64, f64)>)>> =
            BTreeMap::new();
        let mut heads: Vec<GroupKey> = Vec::new();
        let mut meta: BTreeMap<GroupKey, (TaskKind, PromptSet, Notation)> =
            BTreeMap::new();
        for (n, rec) in r.deserialize::<ReportRow>().enumerate() {
            let row = rec.map_err(|e| ModelError::Config(format!("report line {}: {e}", n + 2)))?;
            let key = (
                row.model.clone(),
                row.task.to_string(),
                row.prompt_set.to_string(),
                row.notation.to_string(),
                row.scale_embedding,
                row.fingerprint.clone(),
            );
            if !groups.contains_key(&key) {
                heads.push(key.clone());
                meta.insert(key.clone(), (row.task, row.prompt_set, row.notation));
            }
            let entry = groups.entry(key).or_default().entry(row.split).or_insert((row.count, Vec::new()));
            if row.seed != "mean" {
                let seed = row.seed.parse().map_err(|_| ModelError::Config(format!("bad seed {:?}", row.seed)))?;
                entry.1.push((seed, row.accuracy));
            }
        }
        Ok(heads
            .into_iter()
            .map(|key| {
                let (task, prompt_set, notation) = meta[&key];
                let splits = groups[&key]
                    .iter()
                    .map(|(&split, (count, seeds))| SplitResult::new(split, *count, seeds.clone()))
                    .collect();
                EvalReport {
                    model: key.0.clone(),
                    task,
                    prompt_set,
                    notation,
                    scale_embedding: key.4,
                    fingerprint: key.5.clone(),
                    splits,
                }
            })
            .collect())
    }
}

/// Accuracy table with one row per model, prompt set and scale setting and
/// one column per notation and task; cells read `interp (extrap)` in percent.
pub fn render_table(reports: &[EvalReport]) -> String {
    let mut rows: BTreeMap<(String, PromptSet, bool), BTreeMap<(Notation, TaskKind), String>> = BTreeMap::new();
    for r in reports {
        let pct = |s: Split| r.split(s).map_or("-".to_string(), |x| format!("{:.1}", x.mean * 100.0));
        let cell = format!("{} ({})", pct(Split::TestIn), pct(Split::TestEx));
        rows.entry((r.model.clone(), r.prompt_set, r.scale_embedding)).or_default().insert((r.notation, r.task), cell);
    }
    let cols: Vec<(Notation, TaskKind)> = [Notation::Decimal, Notation::Scientific]
        .into_iter()
        .flat_map(|n| TaskKind::ALL.into_iter().map(move |t| (n, t)))
        .collect();
    let mut out = String::new();
    let _ = write!(out, "{:<24}", "model");
    for (n, t) in &cols {
        let tag = if *n == Notation::Decimal { "Deci" } else { "Sci" };
        let _ = write!(out, " {:>13}", format!("{tag}-{}", t.short_name()));
    }
    out.push('\n');
    for ((model, set, scale), cells) in rows {
        let name = format!("{model}/{set}{}", if scale { "+scale" } else { "" });
        let _ = write!(out, "{name:<24}");
        for c in &cols {
            let _ = write!(out, " {:>13}", cells.get(c).map_or("-", String::as_str));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report() -> EvalReport {
        EvalReport {
            model: "scratch".into(),
            task: TaskKind::Comparison,
            prompt_set: PromptSet::Base,
            notation: Notation::Decimal,
            scale_embedding: true,
            fingerprint: fingerprint(&["a", "b"]),
            splits: vec![
                SplitResult::new(Split::TestIn, 10, vec![(1, 0.5), (2, 0.7)]),
                SplitResult::new(Split::TestEx, 10, vec![(1, 0.4), (2, 0.6)]),
            ],
        }
    }

    #[test]
    fn csv_round_trip() {
        let r = report();
        let text = r.to_csv();
        assert!(text.starts_with("model,task,prompt_set,notation,scale_embedding,split,seed,accuracy,count,fingerprint\n"));
        assert_eq!(text.lines().count(), 7);
        assert!(text.contains(",test_in,mean,0.6"));
        assert_eq!(EvalReport::from_csv(&text).unwrap(), vec![r]);
    }

    #[test]
    fn table_cells() {
        let t = render_table(&[report()]);
        assert!(t.contains("Deci-Comp"));
        assert!(t.contains("60.0 (50.0)"));
        assert!(t.contains("scratch/base+scale"));
    }

    #[test]
    fn fingerprint_separates_parts() {
        assert_ne!(fingerprint(&["ab", "c"]), fingerprint(&["a", "bc"]));
    }
}
