//! Multi-threaded scoring. Each example is scored independently and the
//! results are concatenated in input order, so metrics do not depend on the
//! thread count.

use std::time::{SystemTime, UNIX_EPOCH};

use sesa_core::{
    eval,
    model::{self, Example},
    train::Validator,
    ModelParams, Result, ScoreMode,
};

pub fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

pub fn score_all(params: &ModelParams, examples: &[Example], mode: ScoreMode, threads: usize) -> Result<Vec<f64>> {
    let score_chunk = |chunk: &[Example]| -> Result<Vec<f64>> {
        chunk.iter().map(|e| model::predict(params, e, mode)).collect()
    };
    let threads = threads.max(1);
    if threads == 1 || examples.len() < 2 * threads {
        return score_chunk(examples);
    }
    let chunk_len = examples.len().div_ceil(threads);
    std::thread::scope(|s| {
        let handles: Vec<_> = examples
            .chunks(chunk_len)
            .map(|chunk| s.spawn(move || score_chunk(chunk)))
            .collect();
        let mut scores = Vec::with_capacity(examples.len());
        for h in handles {
            scores.extend(h.join().expect("scoring thread panicked")?);
        }
        Ok(scores)
    })
}

fn unix_millis() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| u64::try_from(d.as_millis()).unwrap_or(u64::MAX))
}

/// Validation AUC over a fixed example set, noting the wall-clock time of
/// each evaluation.
pub struct ParallelAucValidator<'a> {
    examples: &'a [Example],
    labels: Vec<bool>,
    mode: ScoreMode,
    threads: usize,
    /// Milliseconds since the Unix epoch, one per evaluation.
    pub timestamps: Vec<u64>,
}

impl<'a> ParallelAucValidator<'a> {
    pub fn new(examples: &'a [Example], mode: ScoreMode, threads: usize) -> Self {
        Self {
            examples,
            labels: examples.iter().map(|e| e.label).collect(),
            mode,
            threads,
            timestamps: Vec::new(),
        }
    }
}

impl Validator for ParallelAucValidator<'_> {
    fn validate(&mut self, params: &ModelParams, _iteration: usize) -> Result<f64> {
        let scores = score_all(params, self.examples, self.mode, self.threads)?;
        let auc = eval::roc_auc(&scores, &self.labels)?;
        self.timestamps.push(unix_millis());
        Ok(auc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sesa_core::{
        model::{init_params, Dims, ProfileSkillVec},
        train::AucValidator,
        SeededRng,
    };

    #[test]
    fn thread_count_does_not_change_results() {
        let dims = Dims {
            vocab: 20,
            d_emb: 4,
            hidden: 3,
            n_skills: 6,
        };
        let mut rng = SeededRng::new(8);
        let params = init_params(dims, &mut rng, None).unwrap();
        let examples: Vec<Example> = (0..101)
            .map(|i| Example {
                token_ids: (0..1 + i % 7).map(|_| rng.below(20) as u32).collect(),
                skills: ProfileSkillVec::new(rng.sample_distinct(6, 2)),
                label: i % 3 == 0,
            })
            .collect();
        let one = score_all(&params, &examples, ScoreMode::Dot, 1).unwrap();
        for t in [2, 4, 7] {
            assert_eq!(score_all(&params, &examples, ScoreMode::Dot, t).unwrap(), one);
        }
        let mut par = ParallelAucValidator::new(&examples, ScoreMode::Dot, 3);
        let mut seq = AucValidator {
            examples: &examples,
            mode: ScoreMode::Dot,
        };
        assert_eq!(par.validate(&params, 1).unwrap(), seq.validate(&params, 1).unwrap());
        assert_eq!(par.timestamps.len(), 1);
    }
}
