//! Per-split counts and label fractions of JSONL files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::splits::read_jsonl;
use super::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileStats {
    pub path: PathBuf,
    pub count: usize,
    pub labels: BTreeMap<String, usize>,
}

impl FileStats {
    pub fn fraction(&self, label: &str) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        *self.labels.get(label).unwrap_or(&0) as f64 / self.count as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetStats {
    pub files: Vec<FileStats>,
}

impl DatasetStats {
    /// One row per file: name, sample count, then `label: fraction` pairs.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for f in &self.files {
            let name = f.path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let labels: Vec<String> =
                f.labels.keys().map(|l| format!("{l}: {:.3}", f.fraction(l))).collect();
            let _ = writeln!(out, "{:<10} {:>8}  {}", name, f.count, labels.join(", "));
        }
        out
    }
}

pub fn file_stats(path: &Path) -> Result<FileStats> {
    let samples = read_jsonl(path)?;
    let mut labels = BTreeMap::new();
    for s in &samples {
        *labels.entry(s.answer.clone()).or_insert(0) += 1;
    }
    Ok(FileStats { path: path.to_path_buf(), count: samples.len(), labels })
}

pub fn dataset_stats<P: AsRef<Path>>(files: &[P]) -> Result<DatasetStats> {
    Ok(DatasetStats { files: files.iter().map(|p| file_stats(p.as_ref())).collect::<Result<_>>()? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{MeasurementRecord, MstSample, PromptSet, Split, TaskKind};
    use crate::numerics::Notation;

    fn s(answer: &str) -> MstSample {
        MstSample {
            id: "x".into(),
            task: TaskKind::UnitConversion,
            prompt_set: PromptSet::Base,
            notation: Notation::Decimal,
            split: Split::Train,
            text: "1g and 1g are [MASK] value".into(),
            candidates: vec!["same".into(), "different".into()],
            answer: answer.into(),
            measurements: vec![MeasurementRecord { value: "1".into(), unit: "g".into() }; 2],
            entity: None,
        }
    }

    #[test]
    fn three_lines_two_same() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("train.jsonl");
        crate::datagen::write_jsonl(&p, &[s("same"), s("different"), s("same")]).unwrap();
        let st = dataset_stats(&[&p]).unwrap();
        assert_eq!(st.files[0].count, 3);
        assert!((st.files[0].fraction("same") - 2.0 / 3.0).abs() < 1e-12);
        assert!(st.render().contains("same: 0.667"));
    }

    #[test]
    fn empty_file_has_no_labels() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.jsonl");
        std::fs::write(&p, "").unwrap();
        let st = file_stats(&p).unwrap();
        assert_eq!(st.count, 0);
        assert!(st.labels.is_empty());
    }
}
