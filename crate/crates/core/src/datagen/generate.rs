//! Sample generators for the five tasks.
//!
//! Every sample is a pure function of `(seed, task, split, index, attempt)`:
//! its randomness comes from ChaCha8 substreams keyed by a SHA-256 digest of
//! those integers, so generation can run in parallel and still produce the
//! same bytes. The gold label is drawn first from its own substream, then
//! the content substream builds measurements that realise it. Retries after
//! a duplicate text bump `attempt` and keep the label.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::entities::EntityTable;
use super::templates::{self, Slots};
use super::{DatagenError, MeasurementRecord, MstSample, PromptSet, Result, Split, TaskKind};
use crate::numerics::{render, sample_number, ExactDecimal, Notation, NumberRange, MAX_FRACTION_DIGITS};
use crate::units::{compare_measurements, BaseAtom, LiterSymbol, Measurement, UnitFamily, UnitInventory};

/// Split sizes at scale 1.0, in [`Split::ALL`] order.
pub fn full_scale_counts(task: TaskKind) -> [usize; 5] {
    match task {
        TaskKind::Comparison => [299_394, 29_986, 30_000, 29_988, 30_000],
        TaskKind::ArgMinMax | TaskKind::Sorting => [300_000, 30_000, 30_000, 30_000, 30_000],
        TaskKind::UnitConversion => [259_588, 23_931, 28_814, 23_538, 28_696],
        TaskKind::RefRange => [201_061, 17_111, 21_212, 16_948, 18_429],
    }
}

/// Probability of the first base label for the binary tasks with a skewed
/// distribution (`same`, `normal`), per split.
fn first_label_probability(task: TaskKind, split: Split) -> Option<f64> {
    let idx = Split::ALL.iter().position(|&s| s == split).unwrap();
    match task {
        TaskKind::UnitConversion => Some([0.489, 0.489, 0.5, 0.483, 0.498][idx]),
        TaskKind::RefRange => Some([0.575, 0.593, 0.618, 0.586, 0.659][idx]),
        _ => None,
    }
}

/// Atoms kept by the UoM prompt set.
pub const UOM_ATOMS: [BaseAtom; 4] =
    [BaseAtom::Gram, BaseAtom::Liter(LiterSymbol::Lower), BaseAtom::Meter, BaseAtom::Second];

const MAX_ATTEMPTS: u32 = 1000;
const MAX_DRAWS: usize = 100_000;

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub task: TaskKind,
    pub prompt_set: PromptSet,
    pub notation: Notation,
    pub seed: u64,
    /// Multiplier on the full-scale split sizes.
    pub scale: f64,
    /// Explicit per-split sizes in [`Split::ALL`] order; overrides `scale`.
    pub counts: Option<[usize; 5]>,
    /// Length of the ArgMinMax and Sorting lists, 3 to 5.
    pub list_length: usize,
    pub inventory: UnitInventory,
    pub entities: EntityTable,
}

impl GenConfig {
    pub fn new(task: TaskKind, prompt_set: PromptSet, notation: Notation, seed: u64) -> Self {
        Self {
            task,
            prompt_set,
            notation,
            seed,
            scale: 1.0,
            counts: None,
            list_length: 3,
            inventory: UnitInventory::builtin().clone(),
            entities: EntityTable::bundled(),
        }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_counts(mut self, counts: [usize; 5]) -> Self {
        self.counts = Some(counts);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.prompt_set == PromptSet::UoM && self.task == TaskKind::RefRange {
            return Err(DatagenError::IncompatibleSet { task: self.task, set: self.prompt_set });
        }
        if !(3..=5).contains(&self.list_length) {
            return Err(DatagenError::InvalidConfig(format!("list length {} outside 3..=5", self.list_length)));
        }
        if self.counts.is_none() && !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(DatagenError::InvalidConfig(format!("scale {} must be positive", self.scale)));
        }
        if self.inventory.families().is_empty() {
            return Err(DatagenError::InvalidConfig("unit inventory is empty".into()));
        }
        if self.task == TaskKind::RefRange && self.entities.is_empty() {
            return Err(DatagenError::EmptyEntityTable);
        }
        Ok(())
    }

    pub fn split_count(&self, split: Split) -> usize {
        let idx = Split::ALL.iter().position(|&s| s == split).unwrap();
        match self.counts {
            Some(c) => c[idx],
            None => ((full_scale_counts(self.task)[idx] as f64 * self.scale).round() as usize).max(1),
        }
    }

    /// Inventory the generator draws from: UoM keeps only the g, l, m and s
    /// families, prefixes included.
    pub fn effective_inventory(&self) -> UnitInventory {
        if self.prompt_set == PromptSet::UoM {
            self.inventory.restricted_to(&UOM_ATOMS)
        } else {
            self.inventory.clone()
        }
    }
}

const PURPOSE_LABEL: u64 = 1;
const PURPOSE_CONTENT: u64 = 2;
const PURPOSE_TEMPLATE: u64 = 3;

/// Deterministic RNG for a tuple of keys.
pub fn substream(seed: u64, keys: &[u64]) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(b"mst-substream");
    h.update(seed.to_le_bytes());
    for k in keys {
        h.update(k.to_le_bytes());
    }
    ChaCha8Rng::from_seed(h.finalize().into())
}

fn draw_label(cfg: &GenConfig, split: Split, index: u64) -> &'static str {
    let mut rng = substream(cfg.seed, &[PURPOSE_LABEL, cfg.task.id(), split.id(), index]);
    let labels = templates::base_labels(cfg.task);
    match first_label_probability(cfg.task, split) {
        Some(p) => labels[if rng.gen_bool(p) { 0 } else { 1 }],
        None => labels[rng.gen_range(0..labels.len())],
    }
}

fn draw_measurement<R: Rng + ?Sized>(family: &UnitFamily, range: NumberRange, rng: &mut R) -> Measurement {
    let unit = *family.variants.choose(rng).expect("non-empty family");
    Measurement::new(sample_number(range, rng), unit)
}

fn cmp(a: &Measurement, b: &Measurement) -> Ordering {
    compare_measurements(a, b).expect("same family")
}

/// `n` measurements from one family with pairwise distinct quantities.
fn distinct_list<R: Rng + ?Sized>(family: &UnitFamily, range: NumberRange, n: usize, rng: &mut R) -> Vec<Measurement> {
    let mut out: Vec<Measurement> = Vec::with_capacity(n);
    while out.len() < n {
        let m = draw_measurement(family, range, rng);
        if out.iter().all(|o| cmp(o, &m) != Ordering::Equal) {
            out.push(m);
        }
    }
    out
}

fn record(m: &Measurement, notation: Notation) -> Result<MeasurementRecord> {
    Ok(MeasurementRecord { value: render(&m.value, notation)?, unit: m.unit.to_string() })
}

fn records(ms: &[Measurement], notation: Notation) -> Result<Vec<MeasurementRecord>> {
    ms.iter().map(|m| record(m, notation)).collect()
}

fn surface(r: &MeasurementRecord) -> String {
    format!("{}{}", r.value, r.unit)
}

/// Fills `template` from a sample's measurement records.
pub fn render_text(task: TaskKind, template: &str, measurements: &[MeasurementRecord], entity: Option<&str>) -> String {
    let s: Vec<String> = measurements.iter().map(surface).collect();
    let (list0, list1);
    let mut slots = Slots { ent: entity, ..Default::default() };
    match task {
        TaskKind::Comparison | TaskKind::UnitConversion => {
            slots.m0 = s.first().map(String::as_str);
            slots.m1 = s.get(1).map(String::as_str);
        }
        TaskKind::ArgMinMax => {
            let n = s.len().saturating_sub(1);
            list0 = templates::join_list(&s[..n]);
            slots.list0 = Some(&list0);
            slots.target = s.last().map(String::as_str);
        }
        TaskKind::Sorting => {
            let n = s.len() / 2;
            list0 = templates::join_list(&s[..n]);
            list1 = templates::join_list(&s[n..]);
            slots.list0 = Some(&list0);
            slots.list1 = Some(&list1);
        }
        TaskKind::RefRange => {
            slots.m0 = s.first().map(String::as_str);
        }
    }
    templates::fill(template, &slots)
}

/// Content of one sample before prompt-set handling.
struct Draft {
    answer: &'static str,
    measurements: Vec<MeasurementRecord>,
    entity: Option<String>,
}

fn comparison<R: Rng + ?Sized>(cfg: &GenConfig, inv: &UnitInventory, range: NumberRange, label: &'static str, rng: &mut R) -> Result<Draft> {
    let family = inv.families().choose(rng).expect("non-empty inventory");
    let mut pair = distinct_list(family, range, 2, rng);
    let want = if label == "smaller" { Ordering::Less } else { Ordering::Greater };
    if cmp(&pair[0], &pair[1]) != want {
        pair.swap(0, 1);
    }
    Ok(Draft { answer: label, measurements: records(&pair, cfg.notation)?, entity: None })
}

fn argminmax<R: Rng + ?Sized>(cfg: &GenConfig, inv: &UnitInventory, range: NumberRange, label: &'static str, rng: &mut R) -> Result<Draft> {
    let n = cfg.list_length;
    let family = inv.families().choose(rng).expect("non-empty inventory");
    let list = distinct_list(family, range, n, rng);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| cmp(&list[a], &list[b]));
    let target = match label {
        "smallest" => order[0],
        "largest" => order[n - 1],
        _ => order[rng.gen_range(1..n - 1)],
    };
    let mut ms = list.clone();
    ms.push(list[target].clone());
    Ok(Draft { answer: label, measurements: records(&ms, cfg.notation)?, entity: None })
}

fn sorting<R: Rng + ?Sized>(cfg: &GenConfig, inv: &UnitInventory, range: NumberRange, label: &'static str, rng: &mut R) -> Result<Draft> {
    let n = cfg.list_length;
    let family = inv.families().choose(rng).expect("non-empty inventory");
    let list = distinct_list(family, range, n, rng);
    let mut asc: Vec<usize> = (0..n).collect();
    asc.sort_by(|&a, &b| cmp(&list[a], &list[b]));
    let desc: Vec<usize> = asc.iter().rev().copied().collect();
    let order = match label {
        "increasing" => asc,
        "decreasing" => desc,
        _ => loop {
            let mut p: Vec<usize> = (0..n).collect();
            p.shuffle(rng);
            if p != asc && p != desc {
                break p;
            }
        },
    };
    let mut ms = list.clone();
    ms.extend(order.iter().map(|&i| list[i].clone()));
    Ok(Draft { answer: label, measurements: records(&ms, cfg.notation)?, entity: None })
}

fn unit_conversion<R: Rng + ?Sized>(cfg: &GenConfig, inv: &UnitInventory, range: NumberRange, label: &'static str, rng: &mut R) -> Result<Draft> {
    let family = inv.families().choose(rng).expect("non-empty inventory");
    let pair = if label == "same" {
        same_pair(family, range, rng)
    } else {
        distinct_list(family, range, 2, rng)
    };
    Ok(Draft { answer: label, measurements: records(&pair, cfg.notation)?, entity: None })
}

/// A measurement and the same quantity under another variant of the family,
/// both inside `range`. Falls back to repeating the measurement when no
/// other variant fits after many draws.
fn same_pair<R: Rng + ?Sized>(family: &UnitFamily, range: NumberRange, rng: &mut R) -> Vec<Measurement> {
    for _ in 0..MAX_DRAWS {
        let a = draw_measurement(family, range, rng);
        let options: Vec<Measurement> = family
            .variants
            .iter()
            .filter(|u| **u != a.unit)
            .map(|u| {
                let shift = a.unit.scale_exponent() - u.scale_exponent();
                Measurement::new(a.value.scale_by_power_of_ten(shift), *u)
            })
            .filter(|m| m.value.in_range(range))
            .collect();
        if let Some(b) = options.choose(rng) {
            let b = b.clone();
            return if rng.gen_bool(0.5) { vec![a, b] } else { vec![b, a] };
        }
    }
    let a = draw_measurement(family, range, rng);
    vec![a.clone(), a]
}

fn ref_range<R: Rng + ?Sized>(cfg: &GenConfig, range: NumberRange, label: &'static str, rng: &mut R) -> Result<Draft> {
    let entity = cfg.entities.records().choose(rng).ok_or(DatagenError::EmptyEntityTable)?;
    let value = if label == "normal" {
        normal_value(&entity.range_low, &entity.range_high, range, rng)
    } else {
        abnormal_value(&entity.range_low, &entity.range_high, range, rng)
    }
    .ok_or_else(|| {
        DatagenError::InvalidConfig(format!("entity {} admits no {label} value in {range:?}", entity.entity_name))
    })?;
    let ms = [
        Measurement::new(value, entity.unit),
        Measurement::new(entity.range_low.clone(), entity.unit),
        Measurement::new(entity.range_high.clone(), entity.unit),
    ];
    Ok(Draft { answer: label, measurements: records(&ms, cfg.notation)?, entity: Some(entity.entity_name.clone()) })
}

fn u64_of(n: &num_bigint::BigUint) -> Option<u64> {
    use num_traits::ToPrimitive;
    n.to_u64()
}

/// A value on the `10^-f` grid inside `[low, high]` and inside `range`.
fn normal_value<R: Rng + ?Sized>(low: &ExactDecimal, high: &ExactDecimal, range: NumberRange, rng: &mut R) -> Option<ExactDecimal> {
    let range_lo = ExactDecimal::power_of_ten(range.low_exponent as i64);
    let range_hi = ExactDecimal::power_of_ten(range.high_exponent as i64);
    for _ in 0..64 {
        let f = rng.gen_range(0..=MAX_FRACTION_DIGITS) as i64;
        let lo = u64_of(&low.scaled_ceil(f))?.max(u64_of(&range_lo.scaled_ceil(f))?);
        let hi = u64_of(&high.scaled_floor(f))?.min(u64_of(&range_hi.scaled_ceil(f))?.checked_sub(1)?);
        if lo > hi || lo == 0 {
            continue;
        }
        let k = rng.gen_range(lo..=hi);
        let v = ExactDecimal::from_parts(k, -f);
        return Some(v);
    }
    None
}

/// A value from `range` outside `[low - ulp, high + ulp]`, where `ulp` is the
/// value's own last-digit unit.
fn abnormal_value<R: Rng + ?Sized>(low: &ExactDecimal, high: &ExactDecimal, range: NumberRange, rng: &mut R) -> Option<ExactDecimal> {
    for _ in 0..MAX_DRAWS {
        let v = sample_number(range, rng);
        let ulp = ExactDecimal::power_of_ten(-(v.fraction_digits() as i64));
        let below = match low.checked_sub(&ulp) {
            Some(lo) => v.cmp_value(&lo) == Ordering::Less,
            None => false,
        };
        let above = v.cmp_value(&high.add(&ulp)) == Ordering::Greater;
        if below || above {
            return Some(v);
        }
    }
    None
}

/// Re-expresses a sample under a prompt set.
///
/// Label widens the candidates with synonyms, Context re-renders the text
/// with a uniformly drawn paraphrase, and UoM only checks that every unit is
/// built from g, l, m or s (generation applies the restriction itself).
pub fn apply_prompt_set<R: Rng + ?Sized>(sample: &MstSample, set: PromptSet, rng: &mut R) -> Result<MstSample> {
    let mut out = sample.clone();
    out.prompt_set = set;
    out.candidates = templates::candidates(sample.task, set);
    let template = match set {
        PromptSet::Context => {
            let variants = templates::context_templates(sample.task);
            variants[rng.gen_range(0..variants.len())]
        }
        _ => templates::base_template(sample.task),
    };
    if set == PromptSet::UoM {
        if sample.task == TaskKind::RefRange {
            return Err(DatagenError::IncompatibleSet { task: sample.task, set });
        }
        for r in &sample.measurements {
            let unit = crate::units::parse_unit(&r.unit)?;
            if !unit.atoms().all(|a| UOM_ATOMS.iter().any(|b| b.dimension() == a.dimension())) {
                return Err(DatagenError::UnitsOutsideSet { unit: r.unit.clone(), set });
            }
        }
    }
    out.text = render_text(sample.task, template, &sample.measurements, sample.entity.as_deref());
    Ok(out)
}

pub fn sample_id(cfg: &GenConfig, split: Split, index: u64) -> String {
    format!("{}-{}-{}-{}-{:07}", cfg.task, cfg.prompt_set, cfg.notation, split, index)
}

/// Generates sample `index` of `split`, using retry number `attempt` for the
/// content draw.
pub fn generate_sample(cfg: &GenConfig, inv: &UnitInventory, split: Split, index: u64, attempt: u32) -> Result<MstSample> {
    let label = draw_label(cfg, split, index);
    let keys = [PURPOSE_CONTENT, cfg.task.id(), split.id(), index, attempt as u64];
    let mut rng = substream(cfg.seed, &keys);
    let range = split.number_range();
    let draft = match cfg.task {
        TaskKind::Comparison => comparison(cfg, inv, range, label, &mut rng)?,
        TaskKind::ArgMinMax => argminmax(cfg, inv, range, label, &mut rng)?,
        TaskKind::Sorting => sorting(cfg, inv, range, label, &mut rng)?,
        TaskKind::UnitConversion => unit_conversion(cfg, inv, range, label, &mut rng)?,
        TaskKind::RefRange => ref_range(cfg, range, label, &mut rng)?,
    };
    let base = MstSample {
        id: sample_id(cfg, split, index),
        task: cfg.task,
        prompt_set: PromptSet::Base,
        notation: cfg.notation,
        split,
        text: render_text(cfg.task, templates::base_template(cfg.task), &draft.measurements, draft.entity.as_deref()),
        candidates: templates::candidates(cfg.task, PromptSet::Base),
        answer: draft.answer.to_string(),
        measurements: draft.measurements,
        entity: draft.entity,
    };
    if cfg.prompt_set == PromptSet::Base {
        return Ok(base);
    }
    let mut trng = substream(cfg.seed, &[PURPOSE_TEMPLATE, cfg.task.id(), split.id(), index, attempt as u64]);
    apply_prompt_set(&base, cfg.prompt_set, &mut trng)
}

pub(crate) fn max_attempts() -> u32 {
    MAX_ATTEMPTS
}

fn generate_task(cfg: &GenConfig, task: TaskKind, split: Split, count: usize) -> Result<Vec<MstSample>> {
    if cfg.task != task {
        return Err(DatagenError::InvalidConfig(format!("config is for {}, not {task}", cfg.task)));
    }
    cfg.validate()?;
    let inv = cfg.effective_inventory();
    (0..count as u64).map(|i| generate_sample(cfg, &inv, split, i, 0)).collect()
}

/// `count` Comparison samples for `split`, without deduplication.
pub fn generate_comparison(cfg: &GenConfig, split: Split, count: usize) -> Result<Vec<MstSample>> {
    generate_task(cfg, TaskKind::Comparison, split, count)
}

pub fn generate_argminmax(cfg: &GenConfig, split: Split, count: usize) -> Result<Vec<MstSample>> {
    generate_task(cfg, TaskKind::ArgMinMax, split, count)
}

pub fn generate_sorting(cfg: &GenConfig, split: Split, count: usize) -> Result<Vec<MstSample>> {
    generate_task(cfg, TaskKind::Sorting, split, count)
}

pub fn generate_unit_conversion(cfg: &GenConfig, split: Split, count: usize) -> Result<Vec<MstSample>> {
    generate_task(cfg, TaskKind::UnitConversion, split, count)
}

/// RefRange samples over `cfg.entities`.
pub fn generate_ref_range(cfg: &GenConfig, split: Split, count: usize) -> Result<Vec<MstSample>> {
    generate_task(cfg, TaskKind::RefRange, split, count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::oracle::verify_sample;

    fn cfg(task: TaskKind) -> GenConfig {
        GenConfig::new(task, PromptSet::Base, Notation::Decimal, 11)
    }

    #[test]
    fn samples_are_deterministic_and_verified() {
        for task in TaskKind::ALL {
            let c = cfg(task);
            let inv = c.effective_inventory();
            for split in Split::ALL {
                for i in 0..50 {
                    let a = generate_sample(&c, &inv, split, i, 0).unwrap();
                    let b = generate_sample(&c, &inv, split, i, 0).unwrap();
                    assert_eq!(a, b);
                    verify_sample(&a, &inv).unwrap_or_else(|e| panic!("{a:?}: {e}"));
                }
            }
        }
    }

    #[test]
    fn retry_keeps_label() {
        let c = cfg(TaskKind::UnitConversion);
        let inv = c.effective_inventory();
        for i in 0..20 {
            let a = generate_sample(&c, &inv, Split::Train, i, 0).unwrap();
            let b = generate_sample(&c, &inv, Split::Train, i, 3).unwrap();
            assert_eq!(a.answer, b.answer);
        }
    }

    #[test]
    fn notations_share_values() {
        let d = cfg(TaskKind::Comparison);
        let mut s = d.clone();
        s.notation = Notation::Scientific;
        let inv = d.effective_inventory();
        let a = generate_sample(&d, &inv, Split::TestIn, 4, 0).unwrap();
        let b = generate_sample(&s, &inv, Split::TestIn, 4, 0).unwrap();
        assert_eq!(a.answer, b.answer);
        for (x, y) in a.measurements.iter().zip(&b.measurements) {
            assert_eq!(crate::numerics::convert_notation(&x.value, Notation::Scientific).unwrap(), y.value);
        }
    }

    #[test]
    fn uom_restricts_units() {
        let mut c = cfg(TaskKind::UnitConversion);
        c.prompt_set = PromptSet::UoM;
        let inv = c.effective_inventory();
        for i in 0..100 {
            let s = generate_sample(&c, &inv, Split::Train, i, 0).unwrap();
            for r in &s.measurements {
                let u = crate::units::parse_unit(&r.unit).unwrap();
                assert!(u.denominator.is_none());
                assert!(["g", "l", "m", "s"].contains(&u.prefix_free().to_string().as_str()), "{u}");
            }
        }
        c.task = TaskKind::RefRange;
        assert!(matches!(c.validate(), Err(DatagenError::IncompatibleSet { .. })));
    }

    #[test]
    fn label_and_context_sets() {
        let base = generate_sample(&cfg(TaskKind::Comparison), UnitInventory::builtin(), Split::Train, 0, 0).unwrap();
        let mut rng = substream(0, &[]);
        let l = apply_prompt_set(&base, PromptSet::Label, &mut rng).unwrap();
        assert_eq!(l.candidates.len(), 6);
        assert_eq!(l.text, base.text);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..200 {
            let c = apply_prompt_set(&base, PromptSet::Context, &mut rng).unwrap();
            assert_eq!(c.answer, base.answer);
            seen.insert(c.text);
        }
        assert_eq!(seen.len(), 5);
        assert!(seen.contains(&base.text));
    }

    #[test]
    fn uom_rejects_outside_units() {
        let base = generate_sample(&cfg(TaskKind::Comparison), UnitInventory::builtin(), Split::Train, 0, 0).unwrap();
        let mut s = base.clone();
        s.measurements[0].unit = "mA".into();
        s.measurements[1].unit = "A".into();
        let mut rng = substream(0, &[]);
        assert!(matches!(apply_prompt_set(&s, PromptSet::UoM, &mut rng), Err(DatagenError::UnitsOutsideSet { .. })));
    }

    #[test]
    fn ref_range_normal_within_bounds() {
        let mut rng = substream(3, &[]);
        let lo = ExactDecimal::from_parts(35, -1);
        let hi = ExactDecimal::from_parts(51, -1);
        for _ in 0..1000 {
            let v = normal_value(&lo, &hi, NumberRange::INTERPOLATION, &mut rng).unwrap();
            assert!(v.cmp_value(&lo).is_ge() && v.cmp_value(&hi).is_le());
            let a = abnormal_value(&lo, &hi, NumberRange::EXTRAPOLATION, &mut rng).unwrap();
            assert!(a.cmp_value(&lo).is_lt() || a.cmp_value(&hi).is_gt());
            assert!(a.in_range(NumberRange::EXTRAPOLATION));
        }
    }

    #[test]
    fn scale_rounds_counts() {
        let c = cfg(TaskKind::Comparison).with_scale(0.1);
        assert_eq!(c.split_count(Split::Train), 29_939);
        assert_eq!(c.split_count(Split::TestIn), 2_999);
    }
}
