//! End-to-end operations shared by the CLI and the tests: training from
//! records, evaluating a model, and the logistic-regression baseline.

use std::path::Path;

use sesa_core::{
    baseline::{pair_features, train_logreg, CorpusStats, LogRegModel},
    eval::{self, Metrics},
    model::{init_params, Dims},
    text::{assemble_embeddings, normalize_skill, tokenize, TokenSeq},
    train::{train_from, TrainHistory},
    SeededRng, SesaError, SkillVocab, TrainConfig, WordVocab,
};

use crate::{
    dataset::{encode_records, read_records, Record},
    embeddings::{read_embeddings, EmbeddingTable},
    error::{Error, Result},
    model_file::ModelFile,
    parallel::{score_all, ParallelAucValidator},
};

/// Vocabularies from the training split: words from job texts, skills from
/// profiles, each thresholded by the configured minimum count.
pub fn build_vocabs(records: &[Record], config: &TrainConfig) -> Result<(WordVocab, SkillVocab)> {
    let docs: Vec<TokenSeq> = records.iter().map(|r| tokenize(&r.job_text)).collect();
    let words = WordVocab::build(&docs, config.word_min_count)?;
    let profiles: Vec<&[String]> = records.iter().map(|r| r.profile_skills.as_slice()).collect();
    let profiles: Vec<Vec<&String>> = profiles.iter().map(|p| p.iter().collect()).collect();
    let skills = SkillVocab::build(&profiles, config.skill_min_count)?;
    Ok((words, skills))
}

#[derive(Debug, Clone)]
pub struct TrainRun {
    pub model: ModelFile,
    pub history: TrainHistory,
    /// Wall-clock time of each evaluation, milliseconds since the epoch.
    pub timestamps: Vec<u64>,
    /// Vocabulary rows taken from the pretrained embeddings, if any.
    pub coverage: Option<usize>,
    /// Skill mentions in the validation split unknown to the vocabulary.
    pub dropped_valid_skills: usize,
}

/// Builds vocabularies, initializes from `config.seed` and trains with
/// early stopping on validation AUC.
///
/// All randomness flows from one generator seeded with `config.seed`:
/// first the embedding rows not covered by `pretrained`, then the remaining
/// parameters, then minibatch shuffling.
pub fn train_records(
    config: &TrainConfig,
    train: &[Record],
    valid: &[Record],
    pretrained: Option<&EmbeddingTable>,
    threads: usize,
) -> Result<TrainRun> {
    config.validate()?;
    let (words, skills) = build_vocabs(train, config)?;
    let train_set = encode_records(train, &words, &skills, config.max_seq_len).examples;
    let valid_enc = encode_records(valid, &words, &skills, config.max_seq_len);
    let n_pos = valid_enc.examples.iter().filter(|e| e.label).count();
    if n_pos == 0 || n_pos == valid_enc.examples.len() {
        return Err(SesaError::Precondition(
            "validation set needs at least one positive and one negative example".into(),
        )
        .into());
    }

    let dims = Dims {
        vocab: words.len(),
        d_emb: config.d_emb,
        hidden: config.hidden,
        n_skills: skills.len(),
    };
    let mut rng = SeededRng::new(config.seed);
    let (embeddings, coverage) = match pretrained {
        Some(table) => {
            if let Some(dim) = table.dim.filter(|&d| d != config.d_emb) {
                return Err(Error::Config(format!(
                    "embedding file has dimension {dim}, config.d_emb is {}",
                    config.d_emb
                )));
            }
            let (m, covered) = assemble_embeddings(&words, config.d_emb, &table.rows, &mut rng)?;
            (Some(m), Some(covered))
        }
        None => (None, None),
    };
    let params = init_params(dims, &mut rng, embeddings.as_ref())?;
    let mut validator = ParallelAucValidator::new(&valid_enc.examples, config.score_mode, threads);
    let outcome = train_from(config, params, &train_set, &mut validator, &mut rng)?;
    Ok(TrainRun {
        model: ModelFile {
            params: outcome.params,
            words,
            skills,
            config: config.clone(),
        },
        history: outcome.history,
        timestamps: validator.timestamps,
        coverage,
        dropped_valid_skills: valid_enc.dropped_skills,
    })
}

pub fn train_files(
    config: &TrainConfig,
    train: &Path,
    valid: &Path,
    embeddings: Option<&Path>,
    threads: usize,
) -> Result<TrainRun> {
    let train = read_records(train)?;
    let valid = read_records(valid)?;
    let table = embeddings.map(read_embeddings).transpose()?;
    train_records(config, &train, &valid, table.as_ref(), threads)
}

/// Metrics of a model on raw records, plus the number of dropped skill
/// mentions.
pub fn evaluate_records(model: &ModelFile, records: &[Record], threads: usize) -> Result<(Metrics, usize)> {
    let enc = encode_records(records, &model.words, &model.skills, model.config.max_seq_len);
    let scores = score_all(&model.params, &enc.examples, model.config.score_mode, threads)?;
    let labels: Vec<bool> = enc.examples.iter().map(|e| e.label).collect();
    Ok((eval::evaluate_scores(&scores, &labels)?, enc.dropped_skills))
}

/// Similarity features for every record; the profile pseudo-document is
/// its normalized skill names.
pub fn logreg_features(records: &[Record], stats: &CorpusStats) -> Vec<Vec<f64>> {
    records
        .iter()
        .map(|r| {
            let profile: Vec<String> = r.profile_skills.iter().map(|s| normalize_skill(s)).collect();
            pair_features(&tokenize(&r.job_text), &profile, stats).to_vec().to_vec()
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct LogRegRun {
    pub model: LogRegModel,
    pub metrics: Metrics,
}

/// Fits the baseline on `train` (document frequencies from its job texts)
/// and evaluates it on `test`.
pub fn run_logreg(train: &[Record], test: &[Record], iters: usize, lambda: f64) -> Result<LogRegRun> {
    let docs: Vec<TokenSeq> = train.iter().map(|r| tokenize(&r.job_text)).collect();
    let stats = CorpusStats::build(&docs);
    let labels: Vec<bool> = train.iter().map(|r| r.label).collect();
    let model = train_logreg(&logreg_features(train, &stats), &labels, iters, lambda)?;
    let scores: Vec<f64> = logreg_features(test, &stats).iter().map(|x| model.predict(x)).collect();
    let test_labels: Vec<bool> = test.iter().map(|r| r.label).collect();
    let metrics = eval::evaluate_scores(&scores, &test_labels)?;
    Ok(LogRegRun { model, metrics })
}
