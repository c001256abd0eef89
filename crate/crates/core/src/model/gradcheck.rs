//! Central finite-difference check of the analytic gradients.

use rand::seq::index::sample;

use super::encoder::{Encoder, Partition};
use super::train::{loss_and_gradients, Example};
use super::Result;
use crate::datagen::generate::substream;

const GRADCHECK_STREAM: u64 = 0x4743;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub checked: usize,
    pub max_rel_error_head: f64,
    pub max_rel_error_scale: f64,
    /// Largest absolute backbone gradient entry; zero by construction.
    pub backbone_grad_max_abs: f64,
    /// Scale rows no input uses (including row 0) have exactly zero gradient.
    pub unused_scale_rows_zero: bool,
}

impl GradCheckReport {
    pub fn max_rel_error(&self) -> f64 {
        self.max_rel_error_head.max(self.max_rel_error_scale)
    }
}

/// `|a - n| / max(|a|, |n|, floor)`.
pub fn relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

/// Compares analytic head and scale gradients against central differences
/// with step `h` on up to `per_tensor` random coordinates of each trainable
/// tensor. Scale coordinates are drawn from rows the examples use.
pub fn finite_difference_check(
    model: &Encoder<f64>,
    examples: &[Example],
    per_tensor: usize,
    h: f64,
    seed: u64,
) -> Result<GradCheckReport> {
    let (_, grads) = loss_and_gradients(model, examples)?;
    let mut rng = substream(seed, &[GRADCHECK_STREAM]);
    let width = model.config.hidden;
    let used_rows: Vec<usize> = {
        let mut rows: Vec<usize> = examples
            .iter()
            .flat_map(|e| e.input.scale.iter().map(|&s| s.min(model.scale.nrows().saturating_sub(1))))
            .filter(|&s| s > 0)
            .collect();
        rows.sort_unstable();
        rows.dedup();
        rows
    };
    let mut report = GradCheckReport {
        checked: 0,
        max_rel_error_head: 0.0,
        max_rel_error_scale: 0.0,
        backbone_grad_max_abs: 0.0,
        unused_scale_rows_zero: true,
    };
    let tensors: Vec<(Partition, Vec<f64>)> =
        grads.params().into_iter().map(|(_, p, _, d)| (p, d.to_vec())).collect();
    let mut probe = model.clone();
    for (t, (part, g)) in tensors.iter().enumerate() {
        match part {
            Partition::Backbone => {
                let m = g.iter().fold(0.0f64, |a, x| a.max(x.abs()));
                report.backbone_grad_max_abs = report.backbone_grad_max_abs.max(m);
                continue;
            }
            Partition::Scale => {
                for (i, &v) in g.iter().enumerate() {
                    if !used_rows.contains(&(i / width)) && v != 0.0 {
                        report.unused_scale_rows_zero = false;
                    }
                }
            }
            Partition::Head => {}
        }
        let pool: Vec<usize> = match part {
            Partition::Scale => used_rows.iter().flat_map(|r| r * width..(r + 1) * width).collect(),
            _ => (0..g.len()).collect(),
        };
        if pool.is_empty() {
            continue;
        }
        let picks = sample(&mut rng, pool.len(), per_tensor.min(pool.len()));
        for k in picks.iter() {
            let i = pool[k];
            let orig = model.params()[t].3[i];
            let eval = |probe: &mut Encoder<f64>, x: f64| -> Result<f64> {
                probe.params_mut()[t].1[i] = x;
                Ok(loss_and_gradients(probe, examples)?.0)
            };
            let up = eval(&mut probe, orig + h)?;
            let down = eval(&mut probe, orig - h)?;
            probe.params_mut()[t].1[i] = orig;
            let numeric = (up - down) / (2.0 * h);
            let rel = relative_error(g[i], numeric, 1e-7);
            let slot = if *part == Partition::Scale { &mut report.max_rel_error_scale } else { &mut report.max_rel_error_head };
            *slot = slot.max(rel);
            report.checked += 1;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_error_floor() {
        assert_eq!(relative_error(0.0, 0.0, 1e-7), 0.0);
        assert!((relative_error(1.0, 1.1, 1e-7) - 0.1 / 1.1).abs() < 1e-12);
        assert!((relative_error(1e-9, 0.0, 1e-7) - 1e-2).abs() < 1e-12);
    }
}
