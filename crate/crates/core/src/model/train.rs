//! Cloze training of the head and scale table on a frozen backbone.

use ndarray::Array1;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{learning_rate_at, TrainConfig};
use super::encoder::{Encoder, Input, Partition};
use super::vocab::{Vocab, CLS, SEP};
use super::{ModelError, Real, Result};
use crate::datagen::generate::substream;
use crate::datagen::{templates, MstSample, MASK};
use crate::measure_text::{annotate, DEFAULT_SCALE_CAP};

const SHUFFLE_STREAM: u64 = 0x5348;

/// A sample encoded for the model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub input: Input,
    /// Vocabulary ids of the candidate words.
    pub candidates: Vec<u32>,
    /// Label class of each candidate; synonyms share a class.
    pub classes: Vec<usize>,
    pub gold_class: usize,
}

/// Encodes samples as `[CLS] tokens [SEP]` with scale indices capped at `cap`.
pub fn prepare(samples: &[MstSample], vocab: &Vocab, cap: Option<usize>) -> Result<Vec<Example>> {
    let cap = cap.unwrap_or(DEFAULT_SCALE_CAP);
    samples.iter().map(|s| prepare_one(s, vocab, cap)).collect()
}

/// Encodes one text holding exactly one mask.
pub fn encode_text(text: &str, vocab: &Vocab, cap: usize) -> Result<Input> {
    let ann = annotate(text, cap);
    let mut ids = vec![vocab.id_or_unk(CLS)];
    ids.extend(ann.tokens.iter().map(|t| vocab.id_or_unk(t)));
    ids.push(vocab.id_or_unk(SEP));
    let mut scale = vec![0];
    scale.extend(&ann.scale_indices);
    scale.push(0);
    let masks: Vec<usize> = ann.tokens.iter().enumerate().filter(|(_, t)| *t == MASK).map(|(i, _)| i + 1).collect();
    let mask = match masks[..] {
        [m] => m,
        [] => return Err(ModelError::NoMask),
        _ => return Err(ModelError::MultipleMasks(masks.len())),
    };
    Ok(Input { ids, scale, mask })
}

/// Index of the best-scoring word in `candidates` at the mask of `text`.
pub fn predict_text<F: Real>(model: &Encoder<F>, vocab: &Vocab, text: &str, candidates: &[&str]) -> Result<usize> {
    if candidates.is_empty() {
        return Err(ModelError::Config("no candidates".into()));
    }
    let input = encode_text(text, vocab, model.config.scale_cap.unwrap_or(DEFAULT_SCALE_CAP))?;
    model.check_input(&input)?;
    let ids: Vec<u32> =
        candidates.iter().map(|c| vocab.id(c).ok_or_else(|| ModelError::UnknownCandidate(c.to_string()))).collect::<Result<_>>()?;
    let feat = model.features(&input);
    Ok(argmax(&model.head_forward(feat.view(), &ids).0))
}

fn prepare_one(sample: &MstSample, vocab: &Vocab, cap: usize) -> Result<Example> {
    let input = encode_text(&sample.text, vocab, cap)?;
    let base = templates::base_labels(sample.task);
    let class_of = |w: &str| {
        templates::label_class(sample.task, w)
            .and_then(|c| base.iter().position(|b| *b == c))
            .ok_or_else(|| ModelError::UnknownCandidate(w.to_string()))
    };
    let mut candidates = Vec::with_capacity(sample.candidates.len());
    let mut classes = Vec::with_capacity(sample.candidates.len());
    for c in &sample.candidates {
        candidates.push(vocab.id(c).ok_or_else(|| ModelError::UnknownCandidate(c.clone()))?);
        classes.push(class_of(c)?);
    }
    let gold_class = class_of(&sample.answer)?;
    Ok(Example { input, candidates, classes, gold_class })
}

fn log_sum_exp<F: Real>(xs: impl Iterator<Item = F> + Clone) -> F {
    let max = xs.clone().fold(F::neg_infinity(), F::max);
    max + xs.map(|x| (x - max).exp()).sum::<F>().ln()
}

/// Cross-entropy over the candidates where every candidate of the gold class
/// counts as correct. Returns the loss and its gradient w.r.t. the scores.
pub fn candidate_loss<F: Real>(scores: &[F], classes: &[usize], gold: usize) -> (F, Vec<F>) {
    let all = log_sum_exp(scores.iter().copied());
    let gold_scores = scores.iter().zip(classes).filter(|(_, &c)| c == gold).map(|(&s, _)| s);
    let good = log_sum_exp(gold_scores);
    let grad = scores
        .iter()
        .zip(classes)
        .map(|(&s, &c)| {
            let p = (s - all).exp();
            if c == gold {
                p - (s - good).exp()
            } else {
                p
            }
        })
        .collect();
    (all - good, grad)
}

/// Index of the highest-scoring candidate; ties go to the earlier one.
pub fn predict<F: Real>(model: &Encoder<F>, example: &Example) -> usize {
    let feat = model.features(&example.input);
    argmax(&model.head_forward(feat.view(), &example.candidates).0)
}

fn argmax<F: Real>(scores: &[F]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

fn correct_from_features<F: Real>(model: &Encoder<F>, feat: &Array1<F>, ex: &Example) -> bool {
    let k = argmax(&model.head_forward(feat.view(), &ex.candidates).0);
    ex.classes[k] == ex.gold_class
}

/// Fraction of examples whose predicted candidate has the gold class.
pub fn evaluate<F: Real>(model: &Encoder<F>, examples: &[Example]) -> f64 {
    if examples.is_empty() {
        return 0.0;
    }
    let correct = examples
        .par_iter()
        .filter(|ex| correct_from_features(model, &model.features(&ex.input), ex))
        .count();
    correct as f64 / examples.len() as f64
}

fn cached_accuracy<F: Real>(model: &Encoder<F>, feats: &[Array1<F>], examples: &[Example]) -> f64 {
    if examples.is_empty() {
        return 0.0;
    }
    let correct = feats
        .par_iter()
        .zip(examples)
        .filter(|(f, ex)| correct_from_features(model, f, ex))
        .count();
    correct as f64 / examples.len() as f64
}

/// Mean candidate loss over `examples` and its gradient with respect to
/// every parameter. Backbone entries of the gradient stay zero.
pub fn loss_and_gradients<F: Real>(model: &Encoder<F>, examples: &[Example]) -> Result<(f64, Encoder<F>)> {
    let mut grads = model.zeros_like();
    let inv_n: F = super::real(1.0 / examples.len().max(1) as f64);
    let mut total = 0.0;
    for ex in examples {
        model.check_input(&ex.input)?;
        let (feat, tape) = model.forward_tape(&ex.input);
        let (scores, hc) = model.head_forward(feat.view(), &ex.candidates);
        let (loss, mut d) = candidate_loss(&scores, &ex.classes, ex.gold_class);
        total += loss.to_f64().unwrap_or(f64::NAN);
        d.iter_mut().for_each(|x| *x *= inv_n);
        let d_feat = model.head_backward(&hc, &ex.candidates, &d, &mut grads);
        model.backward_to_scale(&tape, d_feat.view(), &mut grads.scale);
    }
    Ok((total / examples.len().max(1) as f64, grads))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub valid_accuracy: f64,
    pub learning_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_valid_accuracy: f64,
    pub stopped_early: bool,
}

struct Adam<F> {
    m: Encoder<F>,
    v: Encoder<F>,
    t: i32,
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

impl<F: Real> Adam<F> {
    fn step(&mut self, model: &mut Encoder<F>, grads: &mut Encoder<F>, lr_head: f64, lr_scale: f64) {
        self.t += 1;
        let (b1, b2, eps): (F, F, F) = (super::real(BETA1), super::real(BETA2), super::real(ADAM_EPS));
        let c1 = F::one() - b1.powi(self.t);
        let c2 = F::one() - b2.powi(self.t);
        let params = model.params_mut();
        let gs = grads.params_mut();
        let ms = self.m.params_mut();
        let vs = self.v.params_mut();
        for ((((part, p), (_, g)), (_, m)), (_, v)) in params.into_iter().zip(gs).zip(ms).zip(vs) {
            let lr: F = match part {
                Partition::Backbone => continue,
                Partition::Head => super::real(lr_head),
                Partition::Scale => super::real(lr_scale),
            };
            for i in 0..p.len() {
                m[i] = b1 * m[i] + (F::one() - b1) * g[i];
                v[i] = b2 * v[i] + (F::one() - b2) * g[i] * g[i];
                let mh = m[i] / c1;
                let vh = v[i] / c2;
                p[i] -= lr * mh / (vh.sqrt() + eps);
                g[i] = F::zero();
            }
        }
    }
}

fn trainable_snapshot<F: Real>(model: &mut Encoder<F>) -> Vec<Vec<F>> {
    model.params_mut().into_iter().filter(|(p, _)| p.trainable()).map(|(_, d)| d.to_vec()).collect()
}

fn restore<F: Real>(model: &mut Encoder<F>, snap: &[Vec<F>]) {
    for ((_, d), s) in model.params_mut().into_iter().filter(|(p, _)| p.trainable()).zip(snap) {
        d.copy_from_slice(s);
    }
}

/// Trains the head (and the scale table when enabled) with Adam and a linear
/// learning-rate decay. Stops once validation accuracy has not improved for
/// `patience` epochs and restores the best epoch's parameters. The backbone
/// is never written.
pub fn train_head<F: Real>(
    model: &mut Encoder<F>,
    train: &[Example],
    valid: &[Example],
    cfg: &TrainConfig,
    seed: u64,
) -> Result<TrainHistory> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(ModelError::Config("empty training set".into()));
    }
    for ex in train.iter().chain(valid) {
        model.check_input(&ex.input)?;
    }
    let with_scale = model.scale_enabled() && train.iter().any(|e| e.input.scale.iter().any(|&s| s > 0));
    // Without a trainable scale table the features never change.
    let cached: Option<(Vec<Array1<F>>, Vec<Array1<F>>)> = if with_scale {
        None
    } else {
        let m = &*model;
        Some((
            train.par_iter().map(|e| m.features(&e.input)).collect(),
            valid.par_iter().map(|e| m.features(&e.input)).collect(),
        ))
    };

    let steps_per_epoch = train.len().div_ceil(cfg.batch_size);
    let total = cfg.epochs * steps_per_epoch;
    let mut grads = model.zeros_like();
    let mut adam = Adam { m: model.zeros_like(), v: model.zeros_like(), t: 0 };
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut history = TrainHistory { epochs: Vec::new(), best_epoch: 0, best_valid_accuracy: -1.0, stopped_early: false };
    let mut best = trainable_snapshot(model);
    let mut since_best = 0;
    let mut step = 0;

    for epoch in 0..cfg.epochs {
        order.sort_unstable();
        order.shuffle(&mut substream(seed, &[SHUFFLE_STREAM, epoch as u64]));
        let mut loss_sum = 0.0;
        let mut lr = cfg.learning_rate;
        for batch in order.chunks(cfg.batch_size) {
            let inv_n = super::real::<F>(1.0 / batch.len() as f64);
            for &i in batch {
                let ex = &train[i];
                let (feat, tape) = match &cached {
                    Some((tf, _)) => (tf[i].clone(), None),
                    None => {
                        let (f, t) = model.forward_tape(&ex.input);
                        (f, Some(t))
                    }
                };
                let (scores, hc) = model.head_forward(feat.view(), &ex.candidates);
                let (loss, mut d) = candidate_loss(&scores, &ex.classes, ex.gold_class);
                let loss = loss.to_f64().unwrap_or(f64::NAN);
                if !loss.is_finite() {
                    return Err(ModelError::Divergence { epoch, step, loss });
                }
                loss_sum += loss;
                d.iter_mut().for_each(|x| *x *= inv_n);
                let d_feat = model.head_backward(&hc, &ex.candidates, &d, &mut grads);
                if let Some(t) = tape {
                    model.backward_to_scale(&t, d_feat.view(), &mut grads.scale);
                }
            }
            lr = learning_rate_at(cfg.learning_rate, cfg.final_learning_rate, step, total);
            let lr_scale = learning_rate_at(cfg.scale_learning_rate, cfg.final_learning_rate, step, total);
            adam.step(model, &mut grads, lr, lr_scale);
            step += 1;
        }
        let acc = match &cached {
            Some((_, vf)) => cached_accuracy(model, vf, valid),
            None => evaluate(model, valid),
        };
        history.epochs.push(EpochRecord {
            epoch,
            train_loss: loss_sum / train.len() as f64,
            valid_accuracy: acc,
            learning_rate: lr,
        });
        if acc > history.best_valid_accuracy {
            history.best_valid_accuracy = acc;
            history.best_epoch = epoch;
            best = trainable_snapshot(model);
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience && epoch + 1 < cfg.epochs {
                history.stopped_early = true;
                break;
            }
        }
    }
    restore(model, &best);
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{PromptSet, Split, TaskKind};
    use crate::model::{init_model, ModelConfig};
    use crate::numerics::Notation;
    use crate::units::UnitInventory;
    use crate::datagen::{generate_comparison, EntityTable, GenConfig};

    fn vocab() -> Vocab {
        Vocab::standard(UnitInventory::builtin(), &EntityTable::bundled())
    }

    fn tiny() -> ModelConfig {
        ModelConfig { layers: 1, hidden: 16, heads: 2, ffn: 32, max_seq_len: 64, ..ModelConfig::desk() }
    }

    fn samples(n: usize, split: Split) -> Vec<MstSample> {
        let cfg = GenConfig::new(TaskKind::Comparison, PromptSet::Base, Notation::Decimal, 3);
        generate_comparison(&cfg, split, n).unwrap()
    }

    #[test]
    fn prepare_wraps_and_finds_mask() {
        let v = vocab();
        let ex = prepare(&samples(3, Split::Train), &v, None).unwrap();
        for e in &ex {
            assert_eq!(e.input.ids[0], v.id(CLS).unwrap());
            assert_eq!(*e.input.ids.last().unwrap(), v.id(SEP).unwrap());
            assert_eq!(e.input.ids[e.input.mask], v.id(MASK).unwrap());
            assert!(e.input.scale.iter().any(|&s| s > 0));
        }
        let mut s = samples(1, Split::Train);
        s[0].text = s[0].text.replace(MASK, "x");
        assert!(matches!(prepare(&s, &v, None), Err(ModelError::NoMask)));
        s[0].text.push_str(" [MASK] [MASK]");
        assert!(matches!(prepare(&s, &v, None), Err(ModelError::MultipleMasks(2))));
    }

    #[test]
    fn label_synonyms_share_the_gold_mass() {
        let (loss, grad) = candidate_loss(&[1.0f64, 1.0, 0.0], &[0, 0, 1], 0);
        let p_good = 2.0 * 1f64.exp() / (2.0 * 1f64.exp() + 1.0);
        assert!((loss + p_good.ln()).abs() < 1e-12);
        assert!((grad.iter().sum::<f64>()).abs() < 1e-12);
        assert!(grad[2] > 0.0 && grad[0] < 0.0);
    }

    #[test]
    fn ties_go_to_the_first_candidate() {
        assert_eq!(argmax(&[0.5f32, 0.5, 0.1]), 0);
        assert_eq!(argmax(&[0.1f32, 0.5, 0.5]), 1);
    }

    #[test]
    fn training_leaves_backbone_untouched_and_is_deterministic() {
        let v = vocab();
        let train = prepare(&samples(96, Split::Train), &v, None).unwrap();
        let valid = prepare(&samples(32, Split::ValidIn), &v, None).unwrap();
        let cfg = TrainConfig { batch_size: 16, epochs: 2, train_limit: None, valid_limit: None, ..TrainConfig::desk() };
        let run = || {
            let mut m: Encoder<f32> = init_model(&tiny().with_scale(16), v.len(), 5).unwrap();
            let before = m.partition_digest(Partition::Backbone);
            let h = train_head(&mut m, &train, &valid, &cfg, 9).unwrap();
            assert_eq!(before, m.partition_digest(Partition::Backbone));
            assert_ne!(m.scale.row(1).sum(), 0.0);
            assert!(m.scale.row(0).iter().all(|&x| x == 0.0));
            (h, m)
        };
        let (h1, m1) = run();
        let (h2, m2) = run();
        assert_eq!(h1, h2);
        assert_eq!(m1, m2);
    }
}
