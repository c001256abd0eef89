//! Label re-derivation from a sample's serialized measurements.

use std::cmp::Ordering;

use super::{templates, DatagenError, MeasurementRecord, MstSample, Result, TaskKind, MASK};
use crate::measure_text::detect_measurements_with;
use crate::units::{compare_measurements, Measurement, UnitInventory};

fn parse(sample: &MstSample, r: &MeasurementRecord) -> Result<Measurement> {
    Measurement::from_parts(&r.value, &r.unit).map_err(|e| mismatch(sample, format!("{}{}: {e}", r.value, r.unit)))
}

fn mismatch(sample: &MstSample, message: impl Into<String>) -> DatagenError {
    DatagenError::OracleMismatch { id: sample.id.clone(), message: message.into() }
}

fn order(sample: &MstSample, a: &Measurement, b: &Measurement) -> Result<Ordering> {
    compare_measurements(a, b).map_err(|e| mismatch(sample, e.to_string()))
}

fn expect_len(sample: &MstSample, ms: &[Measurement], ok: bool) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(mismatch(sample, format!("unexpected measurement count {}", ms.len())))
    }
}

/// Base label implied by the sample's measurements.
pub fn derive_label(sample: &MstSample) -> Result<&'static str> {
    let ms: Vec<Measurement> = sample.measurements.iter().map(|r| parse(sample, r)).collect::<Result<_>>()?;
    match sample.task {
        TaskKind::Comparison => {
            expect_len(sample, &ms, ms.len() == 2)?;
            match order(sample, &ms[0], &ms[1])? {
                Ordering::Less => Ok("smaller"),
                Ordering::Greater => Ok("larger"),
                Ordering::Equal => Err(mismatch(sample, "tied comparison")),
            }
        }
        TaskKind::UnitConversion => {
            expect_len(sample, &ms, ms.len() == 2)?;
            Ok(if order(sample, &ms[0], &ms[1])? == Ordering::Equal { "same" } else { "different" })
        }
        TaskKind::ArgMinMax => {
            expect_len(sample, &ms, ms.len() >= 4)?;
            let (list, target) = ms.split_at(ms.len() - 1);
            let target = &target[0];
            let mut less = 0;
            let mut greater = 0;
            let mut equal = 0;
            for m in list {
                match order(sample, m, target)? {
                    Ordering::Less => less += 1,
                    Ordering::Greater => greater += 1,
                    Ordering::Equal => equal += 1,
                }
            }
            if equal != 1 {
                return Err(mismatch(sample, format!("target matches {equal} list elements")));
            }
            Ok(if less == 0 {
                "smallest"
            } else if greater == 0 {
                "largest"
            } else {
                "middle"
            })
        }
        TaskKind::Sorting => {
            expect_len(sample, &ms, ms.len() >= 6 && ms.len() % 2 == 0)?;
            let (input, output) = ms.split_at(ms.len() / 2);
            let mut remaining: Vec<&Measurement> = input.iter().collect();
            for m in output {
                let pos = remaining
                    .iter()
                    .position(|r| *r == m)
                    .ok_or_else(|| mismatch(sample, "output list is not a permutation of the input"))?;
                remaining.swap_remove(pos);
            }
            let steps: Vec<Ordering> =
                output.windows(2).map(|w| order(sample, &w[0], &w[1])).collect::<Result<_>>()?;
            if steps.contains(&Ordering::Equal) {
                return Err(mismatch(sample, "tied list elements"));
            }
            Ok(if steps.iter().all(|&o| o == Ordering::Less) {
                "increasing"
            } else if steps.iter().all(|&o| o == Ordering::Greater) {
                "decreasing"
            } else {
                "random"
            })
        }
        TaskKind::RefRange => {
            expect_len(sample, &ms, ms.len() == 3)?;
            let inside = order(sample, &ms[0], &ms[1])? != Ordering::Less
                && order(sample, &ms[0], &ms[2])? != Ordering::Greater;
            Ok(if inside { "normal" } else { "abnormal" })
        }
    }
}

/// Measurement records that should appear verbatim in the sample text.
fn visible_records(sample: &MstSample) -> &[MeasurementRecord] {
    match sample.task {
        TaskKind::RefRange => &sample.measurements[..sample.measurements.len().min(1)],
        _ => &sample.measurements,
    }
}

/// Checks a sample end to end: one mask, answer among the candidates, label
/// re-derived from the measurements, text spans matching the records, and
/// every number inside the split's range.
pub fn verify_sample(sample: &MstSample, inventory: &UnitInventory) -> Result<()> {
    if sample.text.matches(MASK).count() != 1 {
        return Err(mismatch(sample, "text must hold exactly one mask"));
    }
    if !sample.candidates.contains(&sample.answer) {
        return Err(mismatch(sample, format!("answer {:?} not among candidates", sample.answer)));
    }
    let derived = derive_label(sample)?;
    if templates::label_class(sample.task, &sample.answer) != Some(derived) {
        return Err(mismatch(sample, format!("stored {:?}, derived {derived:?}", sample.answer)));
    }
    let range = sample.split.number_range();
    for r in &sample.measurements {
        let m = parse(sample, r)?;
        if !m.value.in_range(range) {
            return Err(mismatch(sample, format!("{} outside {range:?}", r.value)));
        }
    }
    let mut found: Vec<(String, String)> = detect_measurements_with(&sample.text, inventory)
        .into_iter()
        .map(|s| (s.number_text, s.unit_text))
        .collect();
    let mut expected: Vec<(String, String)> =
        visible_records(sample).iter().map(|r| (r.value.clone(), r.unit.clone())).collect();
    found.sort();
    expected.sort();
    if found != expected {
        return Err(mismatch(sample, format!("text spans {found:?} differ from records {expected:?}")));
    }
    Ok(())
}
