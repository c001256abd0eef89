//! Generation of the five measuring-skill cloze datasets.
//!
//! A dataset is built per (task, prompt set, notation). Every sample's gold
//! label comes from exact comparison of its measurements, and
//! [`oracle::verify_sample`] re-derives it independently from the serialized
//! `measurements` field.

pub mod entities;
pub mod generate;
pub mod oracle;
pub mod splits;
pub mod stats;
pub mod templates;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{Notation, NumberError, NumberRange};
use crate::units::UnitError;

pub use entities::{EntityRecord, EntityTable};
pub use generate::{
    apply_prompt_set, generate_argminmax, generate_comparison, generate_ref_range,
    generate_sorting, generate_unit_conversion, GenConfig,
};
pub use oracle::{derive_label, verify_sample};
pub use splits::{build_splits, generate_dataset, read_jsonl, write_jsonl, Dataset, DatasetManifest};
pub use stats::{dataset_stats, DatasetStats};

#[derive(Debug, Error)]
pub enum DatagenError {
    #[error("entity table is empty")]
    EmptyEntityTable,
    #[error("prompt set {set} is not available for task {task}")]
    IncompatibleSet { task: TaskKind, set: PromptSet },
    #[error("unit {unit} is outside the {set} unit set")]
    UnitsOutsideSet { unit: String, set: PromptSet },
    #[error("entity table line {line}: {message}")]
    Entity { line: usize, message: String },
    #[error("could not draw {needed} distinct samples for {split} (got {got})")]
    Exhausted { split: Split, needed: usize, got: usize },
    #[error("{path}:{line}: schema violation: {message}")]
    SchemaViolation { path: PathBuf, line: usize, message: String },
    #[error("sample {id}: {message}")]
    OracleMismatch { id: String, message: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Unit(#[from] UnitError),
    #[error(transparent)]
    Number(#[from] NumberError),
}

pub type Result<T, E = DatagenError> = std::result::Result<T, E>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> DatagenError {
    let path = path.into();
    move |source| DatagenError::Io { path, source }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Comparison,
    #[serde(rename = "argminmax")]
    ArgMinMax,
    Sorting,
    UnitConversion,
    RefRange,
}

impl TaskKind {
    pub const ALL: [TaskKind; 5] = [
        TaskKind::Comparison,
        TaskKind::ArgMinMax,
        TaskKind::Sorting,
        TaskKind::UnitConversion,
        TaskKind::RefRange,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Comparison => "comparison",
            TaskKind::ArgMinMax => "argminmax",
            TaskKind::Sorting => "sorting",
            TaskKind::UnitConversion => "unit_conversion",
            TaskKind::RefRange => "ref_range",
        }
    }

    /// Column heading used in accuracy tables.
    pub fn short_name(self) -> &'static str {
        match self {
            TaskKind::Comparison => "Comp",
            TaskKind::ArgMinMax => "Arg",
            TaskKind::Sorting => "Sort",
            TaskKind::UnitConversion => "Unit",
            TaskKind::RefRange => "Ref",
        }
    }

    pub(crate) fn id(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "comparison" | "comp" => TaskKind::Comparison,
            "argminmax" | "argmin_max" | "arg" => TaskKind::ArgMinMax,
            "sorting" | "sort" => TaskKind::Sorting,
            "unit_conversion" | "unitconversion" | "unit" => TaskKind::UnitConversion,
            "ref_range" | "refrange" | "ref" => TaskKind::RefRange,
            other => return Err(format!("unknown task {other:?}")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptSet {
    Base,
    Label,
    Context,
    #[serde(rename = "uom")]
    UoM,
}

impl PromptSet {
    pub const ALL: [PromptSet; 4] = [PromptSet::Base, PromptSet::Label, PromptSet::Context, PromptSet::UoM];

    pub fn as_str(self) -> &'static str {
        match self {
            PromptSet::Base => "base",
            PromptSet::Label => "label",
            PromptSet::Context => "context",
            PromptSet::UoM => "uom",
        }
    }
}

impl fmt::Display for PromptSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PromptSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "base" => PromptSet::Base,
            "label" => PromptSet::Label,
            "context" => PromptSet::Context,
            "uom" => PromptSet::UoM,
            other => return Err(format!("unknown prompt set {other:?}")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    ValidIn,
    ValidEx,
    TestIn,
    TestEx,
}

impl Split {
    pub const ALL: [Split; 5] = [Split::Train, Split::ValidIn, Split::ValidEx, Split::TestIn, Split::TestEx];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::ValidIn => "valid_in",
            Split::ValidEx => "valid_ex",
            Split::TestIn => "test_in",
            Split::TestEx => "test_ex",
        }
    }

    pub fn is_extrapolation(self) -> bool {
        matches!(self, Split::ValidEx | Split::TestEx)
    }

    /// Training and interpolation splits draw from `[10^-2, 10^2)`,
    /// extrapolation splits from `[10^-3, 10^3)`.
    pub fn number_range(self) -> NumberRange {
        if self.is_extrapolation() {
            NumberRange::EXTRAPOLATION
        } else {
            NumberRange::INTERPOLATION
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.jsonl", self.as_str())
    }

    pub(crate) fn id(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Split::ALL
            .into_iter()
            .find(|sp| sp.as_str() == s)
            .ok_or_else(|| format!("unknown split {s:?}"))
    }
}

/// A measurement as it appears in a sample, kept as text for auditing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub value: String,
    pub unit: String,
}

/// One cloze instance, serialized as one JSONL line.
///
/// `measurements` layout per task: Comparison and UnitConversion hold the two
/// operands in subject order; ArgMinMax holds the list followed by the target;
/// Sorting holds the input list followed by the output list; RefRange holds
/// the measurement followed by the entity's lower and upper bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MstSample {
    pub id: String,
    pub task: TaskKind,
    pub prompt_set: PromptSet,
    pub notation: Notation,
    pub split: Split,
    pub text: String,
    pub candidates: Vec<String>,
    pub answer: String,
    pub measurements: Vec<MeasurementRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entity: Option<String>,
}

/// Literal mask placeholder written into every sample text.
pub const MASK: &str = "[MASK]";
