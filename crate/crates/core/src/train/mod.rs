//! MSE + L2 objective, minibatch SGD with global-norm clipping, and
//! validation-AUC early stopping.

mod backward;
mod gradcheck;

use alloc::{format, string::String, vec::Vec};

pub use self::{
    backward::{accumulate_backward, backward, Gradients},
    gradcheck::{grad_check, grad_check_with, loss_of, random_instance, GradCheckReport},
};
use crate::{
    error::{Result, SesaError},
    eval,
    linalg,
    model::{self, Block, Dims, Example, ModelParams, ScoreMode},
    rng::SeededRng,
    text::EmbeddingMatrix,
};

/// Run configuration. Defaults follow the reference setup (200-d
/// embeddings, 100 LSTM units, L2 1e-7, batches of 1000, evaluation every
/// 500 iterations, patience 20); the rest are choices of this crate.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct TrainConfig {
    pub d_emb: usize,
    pub hidden: usize,
    pub learning_rate: f64,
    pub l2_rate: f64,
    pub batch_size: usize,
    pub eval_every: usize,
    pub patience: usize,
    pub max_iters: usize,
    pub seed: u64,
    pub score_mode: ScoreMode,
    pub clip_norm: f64,
    pub max_seq_len: usize,
    pub freeze_embeddings: bool,
    pub neg_subsample: f64,
    /// Minimum training-split frequency for a word to get its own row.
    pub word_min_count: usize,
    /// Minimum number of training profiles listing a skill for it to become a dimension.
    pub skill_min_count: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            d_emb: 200,
            hidden: 100,
            learning_rate: 0.05,
            l2_rate: 1e-7,
            batch_size: 1000,
            eval_every: 500,
            patience: 20,
            max_iters: 100_000,
            seed: 0,
            score_mode: ScoreMode::Dot,
            clip_norm: 5.0,
            max_seq_len: crate::text::DEFAULT_MAX_LEN,
            freeze_embeddings: false,
            neg_subsample: 1.0,
            word_min_count: 1,
            skill_min_count: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("d_emb", self.d_emb),
            ("hidden", self.hidden),
            ("batch_size", self.batch_size),
            ("eval_every", self.eval_every),
            ("patience", self.patience),
            ("max_iters", self.max_iters),
            ("max_seq_len", self.max_seq_len),
            ("word_min_count", self.word_min_count),
            ("skill_min_count", self.skill_min_count),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(SesaError::Config(format!("{name} must be positive")));
        }
        let rate_ok = |x: f64| x.is_finite() && x > 0.0;
        if !rate_ok(self.learning_rate) {
            return Err(SesaError::Config("learning_rate must be positive and finite".into()));
        }
        if !rate_ok(self.clip_norm) {
            return Err(SesaError::Config("clip_norm must be positive and finite".into()));
        }
        if !(self.l2_rate.is_finite() && self.l2_rate >= 0.0) {
            return Err(SesaError::Config("l2_rate must be non-negative and finite".into()));
        }
        if !(self.neg_subsample > 0.0 && self.neg_subsample <= 1.0) {
            return Err(SesaError::Config("neg_subsample must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

pub fn mse_loss(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.is_empty() {
        return Err(SesaError::Precondition("empty batch".into()));
    }
    if scores.len() != labels.len() {
        return Err(SesaError::Dimension {
            expected: scores.len(),
            actual: labels.len(),
        });
    }
    let sum: f64 = scores
        .iter()
        .zip(labels)
        .map(|(s, &y)| {
            let r = s - if y { 1.0 } else { 0.0 };
            r * r
        })
        .sum();
    Ok(sum / scores.len() as f64)
}

/// `λ · Σ w²` over LSTM weight blocks, the projection and (unless frozen)
/// the embeddings. Biases are not penalized.
pub fn l2_penalty(params: &ModelParams, lambda: f64, freeze_embeddings: bool) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    let sum: f64 = Block::all()
        .into_iter()
        .filter(|b| !b.is_bias() && !(freeze_embeddings && *b == Block::Embeddings))
        .map(|b| {
            let s = params.block(b);
            linalg::dot_slices(s, s)
        })
        .sum();
    lambda * sum
}

/// `w ← w − lr·(scale·g + 2λw)`.
#[inline]
pub fn sgd_update(weights: &mut [f64], grad: &[f64], lr: f64, scale: f64, lambda: f64) {
    for (w, g) in weights.iter_mut().zip(grad) {
        *w -= lr * (scale * g + 2.0 * lambda * *w);
    }
}

/// One SGD step. The gradient is rescaled to `clip_norm` when its global
/// norm exceeds it; returns the pre-clipping norm.
pub fn sgd_step(params: &mut ModelParams, grads: &Gradients, config: &TrainConfig) -> Result<f64> {
    if grads.dims != params.dims {
        return Err(SesaError::Consistency("gradient dims differ from the parameters"));
    }
    let norm = grads.norm();
    if !norm.is_finite() {
        return Err(SesaError::Numeric(format!("gradient norm is {norm}")));
    }
    let scale = if norm > config.clip_norm {
        config.clip_norm / norm
    } else {
        1.0
    };
    let (lr, lambda) = (config.learning_rate, config.l2_rate);
    for (block, g) in grads.dense_blocks() {
        let decay = if block.is_bias() { 0.0 } else { lambda };
        sgd_update(params.block_mut(block), g, lr, scale, decay);
    }
    if !config.freeze_embeddings {
        if lambda > 0.0 {
            for id in 0..params.dims.vocab {
                if !grads.embeddings.contains_key(&(id as u32)) {
                    for w in params.embeddings.row_mut(id) {
                        *w -= lr * 2.0 * lambda * *w;
                    }
                }
            }
        }
        for (&id, g) in &grads.embeddings {
            sgd_update(params.embeddings.row_mut(id as usize), g, lr, scale, lambda);
        }
    }
    Ok(norm)
}

/// Mean squared error of the raw scores over a dataset.
pub fn dataset_mse(params: &ModelParams, examples: &[Example], mode: ScoreMode) -> Result<f64> {
    let scores = examples
        .iter()
        .map(|e| model::predict(params, e, mode))
        .collect::<Result<Vec<_>>>()?;
    let labels: Vec<bool> = examples.iter().map(|e| e.label).collect();
    mse_loss(&scores, &labels)
}

/// Scores a parameter snapshot on held-out data. Higher is better.
pub trait Validator {
    fn validate(&mut self, params: &ModelParams, iteration: usize) -> Result<f64>;
}

/// Validation AUC computed sequentially.
pub struct AucValidator<'a> {
    pub examples: &'a [Example],
    pub mode: ScoreMode,
}

impl Validator for AucValidator<'_> {
    fn validate(&mut self, params: &ModelParams, _iteration: usize) -> Result<f64> {
        let scores = self
            .examples
            .iter()
            .map(|e| model::predict(params, e, self.mode))
            .collect::<Result<Vec<_>>>()?;
        let labels: Vec<bool> = self.examples.iter().map(|e| e.label).collect();
        eval::roc_auc(&scores, &labels)
    }
}

impl<F: FnMut(&ModelParams, usize) -> Result<f64>> Validator for F {
    fn validate(&mut self, params: &ModelParams, iteration: usize) -> Result<f64> {
        self(params, iteration)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalRecord {
    pub iteration: usize,
    /// Mean minibatch MSE since the previous evaluation.
    pub train_mse: f64,
    pub valid_auc: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum StopReason {
    EarlyStopped,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainHistory {
    pub records: Vec<EvalRecord>,
    pub best_iteration: usize,
    pub best_auc: f64,
    pub iterations: usize,
    pub stop_reason: StopReason,
}

/// Tracks the best snapshot; improvement means beating the best by more
/// than [`EarlyStopState::MIN_DELTA`].
#[derive(Debug, Clone)]
pub struct EarlyStopState {
    pub best_metric: f64,
    pub best_iteration: usize,
    pub best_params: Option<ModelParams>,
    pub evals_since_improvement: usize,
    patience: usize,
}

impl EarlyStopState {
    pub const MIN_DELTA: f64 = 1e-6;

    pub fn new(patience: usize) -> Self {
        Self {
            best_metric: f64::NEG_INFINITY,
            best_iteration: 0,
            best_params: None,
            evals_since_improvement: 0,
            patience,
        }
    }

    /// Records an evaluation; returns `true` once training should stop.
    pub fn observe(&mut self, metric: f64, iteration: usize, params: &ModelParams) -> bool {
        if metric > self.best_metric + Self::MIN_DELTA {
            self.best_metric = metric;
            self.best_iteration = iteration;
            self.best_params = Some(params.clone());
            self.evals_since_improvement = 0;
        } else {
            self.evals_since_improvement += 1;
        }
        self.evals_since_improvement >= self.patience
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub history: TrainHistory,
}

fn epoch_order(train_set: &[Example], neg_subsample: f64, rng: &mut SeededRng) -> Vec<usize> {
    let mut order: Vec<usize> = if neg_subsample < 1.0 {
        (0..train_set.len())
            .filter(|&i| train_set[i].label || rng.bernoulli(neg_subsample))
            .collect()
    } else {
        (0..train_set.len()).collect()
    };
    if order.is_empty() {
        order = (0..train_set.len()).collect();
    }
    rng.shuffle(&mut order);
    order
}

/// Trains from `params` until early stopping or `max_iters` minibatch
/// iterations. Evaluates every `eval_every` iterations and once more at the
/// end if the last iteration was not evaluated. Returns the best snapshot.
pub fn train_from<V: Validator + ?Sized>(
    config: &TrainConfig,
    mut params: ModelParams,
    train_set: &[Example],
    validator: &mut V,
    rng: &mut SeededRng,
) -> Result<TrainOutcome> {
    config.validate()?;
    params.validate()?;
    if train_set.is_empty() {
        return Err(SesaError::Precondition("training set is empty".into()));
    }
    let mode = config.score_mode;
    let mut grads = Gradients::zeros(params.dims);
    let mut stop = EarlyStopState::new(config.patience);
    let mut records = Vec::new();
    let mut iteration = 0usize;
    let (mut mse_sum, mut mse_batches) = (0.0, 0usize);
    let mut stop_reason = StopReason::MaxIters;

    'epochs: loop {
        let order = epoch_order(train_set, config.neg_subsample, rng);
        for batch in order.chunks(config.batch_size) {
            grads.clear();
            let weight = 1.0 / batch.len() as f64;
            let mut batch_sq = 0.0;
            for &i in batch {
                let ex = &train_set[i];
                let (score, _, cache) = model::forward(&params, &ex.token_ids, &ex.skills, mode)?;
                let r = score - ex.target();
                batch_sq += r * r;
                accumulate_backward(&params, ex, &cache, score, mode, config.freeze_embeddings, weight, &mut grads)?;
            }
            sgd_step(&mut params, &grads, config)
                .map_err(|e| SesaError::Numeric(format!("iteration {}: {e}", iteration + 1)))?;
            iteration += 1;
            mse_sum += batch_sq * weight;
            mse_batches += 1;

            let last = iteration >= config.max_iters;
            if iteration % config.eval_every == 0 || last {
                let auc = validator.validate(&params, iteration)?;
                records.push(EvalRecord {
                    iteration,
                    train_mse: mse_sum / mse_batches as f64,
                    valid_auc: auc,
                });
                mse_sum = 0.0;
                mse_batches = 0;
                if stop.observe(auc, iteration, &params) {
                    stop_reason = StopReason::EarlyStopped;
                    break 'epochs;
                }
            }
            if last {
                break 'epochs;
            }
        }
    }

    let best = stop.best_params.take().expect("at least one evaluation ran");
    Ok(TrainOutcome {
        params: best,
        history: TrainHistory {
            records,
            best_iteration: stop.best_iteration,
            best_auc: stop.best_metric,
            iterations: iteration,
            stop_reason,
        },
    })
}

/// Initializes from `config.seed` and trains against validation AUC.
pub fn train(
    config: &TrainConfig,
    vocab_size: usize,
    n_skills: usize,
    train_set: &[Example],
    valid_set: &[Example],
    pretrained: Option<&EmbeddingMatrix>,
) -> Result<TrainOutcome> {
    config.validate()?;
    let n_pos = valid_set.iter().filter(|e| e.label).count();
    if n_pos == 0 || n_pos == valid_set.len() {
        return Err(SesaError::Precondition(
            "validation set needs at least one positive and one negative example".into(),
        ));
    }
    let dims = Dims {
        vocab: vocab_size,
        d_emb: config.d_emb,
        hidden: config.hidden,
        n_skills,
    };
    let mut rng = SeededRng::new(config.seed);
    let params = model::init_params(dims, &mut rng, pretrained)?;
    let mut validator = AucValidator {
        examples: valid_set,
        mode: config.score_mode,
    };
    train_from(config, params, train_set, &mut validator, &mut rng)
}

/// Human-readable label for a block, used in diagnostics.
pub fn block_name(block: Block) -> String {
    match block {
        Block::Embeddings => "embeddings".into(),
        Block::GateInput(g) => format!("{}.w", g.name()),
        Block::GateRecurrent(g) => format!("{}.u", g.name()),
        Block::GateBias(g) => format!("{}.b", g.name()),
        Block::Projection => "projection".into(),
    }
}
