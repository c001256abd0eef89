//! Prompt templates, answer candidates and their synonyms.
//!
//! Internal templates use indexed slots so that paraphrases can reorder the
//! operands: `{m0}`/`{m1}` are the first and second measurement, `{list0}` is
//! the input list, `{list1}` the output list (Sorting), `{target}` the queried
//! measurement (ArgMinMax) and `{ent}` the entity name.

use super::{PromptSet, TaskKind, MASK};

/// Base answer labels in candidate order.
pub fn base_labels(task: TaskKind) -> &'static [&'static str] {
    match task {
        TaskKind::Comparison => &["larger", "smaller"],
        TaskKind::ArgMinMax => &["largest", "smallest", "middle"],
        TaskKind::Sorting => &["increasing", "decreasing", "random"],
        TaskKind::UnitConversion => &["same", "different"],
        TaskKind::RefRange => &["normal", "abnormal"],
    }
}

/// The two synonyms of a base label.
pub fn synonyms(label: &str) -> &'static [&'static str] {
    match label {
        "larger" => &["higher", "bigger"],
        "smaller" => &["lower", "less"],
        "largest" => &["biggest", "maximum"],
        "middle" => &["medium", "intermediate"],
        "smallest" => &["lowest", "minimum"],
        "increasing" => &["growing", "ascending"],
        "random" => &["unclear", "confusing"],
        "decreasing" => &["reducing", "descending"],
        "same" => &["equal", "identical"],
        "different" => &["distinct", "unlike"],
        "normal" => &["regular", "safe"],
        "abnormal" => &["irregular", "lethal"],
        _ => &[],
    }
}

/// Candidate list for a task under a prompt set.
pub fn candidates(task: TaskKind, set: PromptSet) -> Vec<String> {
    let mut out = Vec::new();
    for &label in base_labels(task) {
        out.push(label.to_string());
        if set == PromptSet::Label {
            out.extend(synonyms(label).iter().map(|s| s.to_string()));
        }
    }
    out
}

/// Base label whose synonym class contains `word`.
pub fn label_class(task: TaskKind, word: &str) -> Option<&'static str> {
    base_labels(task)
        .iter()
        .copied()
        .find(|&label| label == word || synonyms(label).contains(&word))
}

/// Every candidate word across tasks and prompt sets.
pub fn all_candidate_words() -> Vec<&'static str> {
    let mut out = Vec::new();
    for task in TaskKind::ALL {
        for &label in base_labels(task) {
            out.push(label);
            out.extend_from_slice(synonyms(label));
        }
    }
    out
}

pub fn base_template(task: TaskKind) -> &'static str {
    match task {
        TaskKind::Comparison => "{m0} is [MASK] than {m1}",
        TaskKind::ArgMinMax => "[MASK] value among {list0} is {target}",
        TaskKind::Sorting => "sort {list0} in [MASK] order is {list1}",
        TaskKind::UnitConversion => "{m0} and {m1} are [MASK] value",
        TaskKind::RefRange => "{m0} of {ent} is [MASK]",
    }
}

/// The five paraphrased templates of the context prompt set.
pub fn context_templates(task: TaskKind) -> &'static [&'static str; 5] {
    match task {
        TaskKind::Comparison => &[
            "{m0} is [MASK] than {m1}",
            "compared to {m1}, {m0} is [MASK] value",
            "the measurement of control group ({m0}) is [MASK] than {m1}",
            "comparison: {m0}, {m1}, result: [MASK]",
            "{m0} [MASK] {m1}",
        ],
        TaskKind::ArgMinMax => &[
            "The [MASK] value among {list0} is {target}",
            "{target} is the [MASK] value of {list0}",
            "Among the list of measurements {list0}, the [MASK] value is {target}",
            "argmin,argmax: {list0}, {target}, result: [MASK]",
            "[MASK] {list0} , {target}",
        ],
        TaskKind::Sorting => &[
            "sort {list0} in [MASK] order is {list1}",
            "arranging {list0} in [MASK] order is {list1}",
            "{list1} is obtained by sorting {list0} in [MASK] order",
            "sort: {list0}, {list1}, result: [MASK]",
            "{list0} [MASK] {list1}",
        ],
        TaskKind::UnitConversion => &[
            "{m0} and {m1} are the [MASK] value",
            "convert {m0} to [MASK] value, then the result is {m1}",
            "compare {m0} to {m1}, the two are the [MASK] value",
            "measurement comparison: {m0}, {m1}, result: [MASK]",
            "{m0} , {m1} [MASK]",
        ],
        TaskKind::RefRange => &[
            "{m0} of {ent} is [MASK]",
            "{m0} of {ent} falls into [MASK] range",
            "The physician decides {m0} of {ent} as [MASK]",
            "reference range: {ent}, {m0}, result: [MASK]",
            "{ent} {m0} [MASK]",
        ],
    }
}

/// Template in placeholder notation: `[M]`, `[LoM]`, `[ENT]`, `[MASK]`.
pub fn placeholder_form(template: &str) -> String {
    template
        .replace("{m0}", "[M]")
        .replace("{m1}", "[M]")
        .replace("{target}", "[M]")
        .replace("{list0}", "[LoM]")
        .replace("{list1}", "[LoM]")
        .replace("{ent}", "[ENT]")
}

/// Placeholder counts `([M], [LoM], [ENT], [MASK])` a task's template must have.
pub fn expected_arity(task: TaskKind) -> (usize, usize, usize, usize) {
    match task {
        TaskKind::Comparison | TaskKind::UnitConversion => (2, 0, 0, 1),
        TaskKind::ArgMinMax => (1, 1, 0, 1),
        TaskKind::Sorting => (0, 2, 0, 1),
        TaskKind::RefRange => (1, 0, 1, 1),
    }
}

pub fn arity(template: &str) -> (usize, usize, usize, usize) {
    let p = placeholder_form(template);
    (p.matches("[M]").count(), p.matches("[LoM]").count(), p.matches("[ENT]").count(), p.matches(MASK).count())
}

/// A template with its candidate set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSpec {
    pub task: TaskKind,
    pub template: String,
    pub candidates: Vec<String>,
    pub prompt_set: PromptSet,
}

impl PromptSpec {
    pub fn base(task: TaskKind, set: PromptSet) -> Self {
        Self {
            task,
            template: placeholder_form(base_template(task)),
            candidates: candidates(task, set),
            prompt_set: set,
        }
    }
}

/// Rendered operands for template filling.
#[derive(Debug, Clone, Default)]
pub struct Slots<'a> {
    pub m0: Option<&'a str>,
    pub m1: Option<&'a str>,
    pub list0: Option<&'a str>,
    pub list1: Option<&'a str>,
    pub target: Option<&'a str>,
    pub ent: Option<&'a str>,
}

pub fn fill(template: &str, slots: &Slots<'_>) -> String {
    let mut out = template.to_string();
    for (key, value) in [
        ("{m0}", slots.m0),
        ("{m1}", slots.m1),
        ("{list0}", slots.list0),
        ("{list1}", slots.list1),
        ("{target}", slots.target),
        ("{ent}", slots.ent),
    ] {
        if let Some(v) = value {
            out = out.replace(key, v);
        }
    }
    out
}

/// Measurements joined the way lists appear in the prompts.
pub fn join_list<S: AsRef<str>>(items: &[S]) -> String {
    items.iter().map(AsRef::as_ref).collect::<Vec<_>>().join(", ")
}
