//! Multi-seed train and evaluate driver.

use serde::{Deserialize, Serialize};

use super::config::{ModelConfig, TrainConfig};
use super::encoder::{init_model, Encoder, Partition};
use super::report::{fingerprint, EvalReport, SplitResult};
use super::train::{evaluate, prepare, train_head, TrainHistory};
use super::vocab::Vocab;
use super::{ModelError, Result};
use crate::datagen::{MstSample, Split};

pub const EVAL_SPLITS: [Split; 2] = [Split::TestIn, Split::TestEx];

/// Outcome of one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    pub history: TrainHistory,
    pub accuracies: Vec<(Split, f64)>,
    pub backbone_before: String,
    pub backbone_after: String,
}

pub struct RunOutput {
    pub report: EvalReport,
    pub seeds: Vec<SeedRun>,
    pub models: Vec<Encoder<f32>>,
}

fn take(samples: &[MstSample], limit: Option<usize>) -> &[MstSample] {
    &samples[..limit.map_or(samples.len(), |l| l.min(samples.len()))]
}

/// Trains one model per seed on `train`, early-stops on `valid_in` and
/// reports accuracy on every split in `evals`. The seed drives both the
/// backbone initialisation and the batch order.
pub fn run_seeds(
    model_name: &str,
    train: &[MstSample],
    valid_in: &[MstSample],
    evals: &[(Split, &[MstSample])],
    vocab: &Vocab,
    model_cfg: &ModelConfig,
    train_cfg: &TrainConfig,
) -> Result<RunOutput> {
    let first = train.first().ok_or_else(|| ModelError::Config("empty training split".into()))?;
    if train_cfg.seeds.is_empty() {
        return Err(ModelError::Config("no seeds".into()));
    }
    let train_ex = prepare(take(train, train_cfg.train_limit), vocab, model_cfg.scale_cap)?;
    let valid_ex = prepare(take(valid_in, train_cfg.valid_limit), vocab, model_cfg.scale_cap)?;
    let eval_ex: Vec<(Split, Vec<_>)> = evals
        .iter()
        .map(|(s, v)| Ok((*s, prepare(v, vocab, model_cfg.scale_cap)?)))
        .collect::<Result<_>>()?;
    let fp = fingerprint(&[
        &serde_json::to_string(model_cfg).expect("config serializes"),
        &serde_json::to_string(train_cfg).expect("config serializes"),
        &vocab.len().to_string(),
        &train_ex.len().to_string(),
        first.task.as_str(),
        first.prompt_set.as_str(),
        first.notation.as_str(),
    ]);
    let mut seeds = Vec::new();
    let mut models = Vec::new();
    for &seed in &train_cfg.seeds {
        let mut model: Encoder<f32> = init_model(model_cfg, vocab.len(), seed)?;
        let backbone_before = model.partition_digest(Partition::Backbone);
        let history = train_head(&mut model, &train_ex, &valid_ex, train_cfg, seed)?;
        let backbone_after = model.partition_digest(Partition::Backbone);
        let accuracies = eval_ex.iter().map(|(s, ex)| (*s, evaluate(&model, ex))).collect();
        seeds.push(SeedRun { seed, history, accuracies, backbone_before, backbone_after });
        models.push(model);
    }
    let splits = eval_ex
        .iter()
        .enumerate()
        .map(|(i, (s, ex))| SplitResult::new(*s, ex.len(), seeds.iter().map(|r| (r.seed, r.accuracies[i].1)).collect()))
        .collect();
    let report = EvalReport {
        model: model_name.to_string(),
        task: first.task,
        prompt_set: first.prompt_set,
        notation: first.notation,
        scale_embedding: model_cfg.scale_cap.is_some(),
        fingerprint: fp,
        splits,
    };
    Ok(RunOutput { report, seeds, models })
}
