use serde::{Deserialize, Serialize};

use super::{ModelError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub layers: usize,
    pub hidden: usize,
    pub heads: usize,
    pub ffn: usize,
    pub max_seq_len: usize,
    /// Scale-embedding cap; `None` disables the table.
    pub scale_cap: Option<usize>,
    /// Standard deviation of the backbone's weight matrices and embeddings.
    pub init_std: f64,
    pub head_init_std: f64,
    pub layer_norm_eps: f64,
}

impl ModelConfig {
    /// 2 layers, 128 hidden, 4 heads, 256 feed-forward.
    pub fn desk() -> Self {
        Self {
            layers: 2,
            hidden: 128,
            heads: 4,
            ffn: 256,
            max_seq_len: 512,
            scale_cap: None,
            init_std: 0.1,
            head_init_std: 0.02,
            layer_norm_eps: 1e-5,
        }
    }

    /// Base-model geometry: 12 layers, 768 hidden, 12 heads.
    pub fn full() -> Self {
        Self { layers: 12, hidden: 768, heads: 12, ffn: 3072, init_std: 0.02, ..Self::desk() }
    }

    pub fn with_scale(mut self, cap: usize) -> Self {
        self.scale_cap = Some(cap);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(ModelError::Config(m.to_string()));
        if self.layers == 0 || self.hidden == 0 || self.heads == 0 || self.ffn == 0 || self.max_seq_len == 0 {
            return bad("dimensions must be positive");
        }
        if self.hidden % self.heads != 0 {
            return bad("hidden size must be divisible by the head count");
        }
        if self.scale_cap == Some(0) {
            return bad("scale cap must be at least 1");
        }
        if !(self.init_std > 0.0 && self.head_init_std > 0.0 && self.layer_norm_eps > 0.0) {
            return bad("init scales and epsilon must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    /// Starting learning rate of the MLM head.
    pub learning_rate: f64,
    /// Starting learning rate of the scale-embedding table.
    pub scale_learning_rate: f64,
    /// Rate reached at the last scheduled step.
    pub final_learning_rate: f64,
    pub patience: usize,
    pub seeds: Vec<u64>,
    pub train_limit: Option<usize>,
    pub valid_limit: Option<usize>,
}

impl TrainConfig {
    pub fn desk() -> Self {
        Self {
            batch_size: 64,
            epochs: 10,
            learning_rate: 1e-3,
            scale_learning_rate: 3e-3,
            final_learning_rate: 1e-8,
            patience: 2,
            seeds: vec![1, 2, 3],
            train_limit: Some(20_000),
            valid_limit: Some(2_000),
        }
    }

    /// Batch 256, 30 epochs, 5e-5 decayed linearly to 1e-8.
    pub fn full() -> Self {
        Self {
            batch_size: 256,
            epochs: 30,
            learning_rate: 5e-5,
            scale_learning_rate: 5e-5,
            train_limit: None,
            valid_limit: None,
            ..Self::desk()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(ModelError::Config("batch size and epochs must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.scale_learning_rate > 0.0 && self.final_learning_rate >= 0.0) {
            return Err(ModelError::Config("learning rates must be positive".into()));
        }
        Ok(())
    }
}

/// Linear decay from `start` at step 0 to `end` at step `total - 1`.
pub fn learning_rate_at(start: f64, end: f64, step: usize, total: usize) -> f64 {
    if total <= 1 || step + 1 >= total {
        return end;
    }
    let t = step.min(total - 1) as f64 / (total - 1) as f64;
    start + (end - start) * t
}
