//! Central-difference verification of [`backward`](super::backward).

use crate::{
    error::Result,
    model::{self, Block, Dims, Example, ModelParams, ProfileSkillVec, ScoreMode},
    rng::SeededRng,
};

use super::backward::{backward, Gradients};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub worst_block: Block,
    pub worst_index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub checked: usize,
}

/// A random `(params, example)` pair for gradient checking: every parameter,
/// biases included, uniform in (−1, 1); a 3–8 token job; a 1–5 skill profile;
/// a fair-coin label.
///
/// Unit-scale parameters keep most gradient entries well above the roundoff
/// floor of a central difference (about 1e-11 absolute at ε = 1e-5), which
/// the small-weight training initialization does not.
pub fn random_instance(dims: Dims, seed: u64) -> (ModelParams, Example) {
    let mut rng = SeededRng::new(seed);
    let mut params = ModelParams::zeros(dims);
    for block in Block::all() {
        rng.fill_uniform(params.block_mut(block), 1.0);
    }
    let len = 3 + rng.below(6);
    let token_ids = (0..len).map(|_| rng.below(dims.vocab) as u32).collect();
    let held = 1 + rng.below(dims.n_skills.min(5));
    let example = Example {
        token_ids,
        skills: ProfileSkillVec::new(rng.sample_distinct(dims.n_skills, held)),
        label: rng.bernoulli(0.5),
    };
    (params, example)
}

/// `(score − label)²` at `params`.
pub fn loss_of(params: &ModelParams, example: &Example, mode: ScoreMode) -> Result<f64> {
    let s = model::predict(params, example, mode)?;
    let r = s - example.target();
    Ok(r * r)
}

pub fn grad_check(params: &ModelParams, example: &Example, eps: f64, mode: ScoreMode) -> Result<GradCheckReport> {
    grad_check_with(params, example, eps, mode, |_| {})
}

/// Like [`grad_check`], with a hook that may alter the analytic gradient
/// before comparison.
pub fn grad_check_with(
    params: &ModelParams,
    example: &Example,
    eps: f64,
    mode: ScoreMode,
    tamper: impl FnOnce(&mut Gradients),
) -> Result<GradCheckReport> {
    assert!(eps > 0.0, "eps must be positive");
    let (score, _, cache) = model::forward(params, &example.token_ids, &example.skills, mode)?;
    let mut grads = backward(params, example, &cache, score, mode, false)?;
    tamper(&mut grads);

    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst_block: Block::Embeddings,
        worst_index: 0,
        analytic: 0.0,
        numeric: 0.0,
        checked: 0,
    };
    let mut probe = params.clone();
    for block in Block::all() {
        for index in 0..params.block(block).len() {
            let original = params.block(block)[index];
            probe.block_mut(block)[index] = original + eps;
            let plus = loss_of(&probe, example, mode)?;
            probe.block_mut(block)[index] = original - eps;
            let minus = loss_of(&probe, example, mode)?;
            probe.block_mut(block)[index] = original;

            let numeric = (plus - minus) / (2.0 * eps);
            let analytic = grads.get(block, index);
            let denom = analytic.abs().max(numeric.abs()).max(1e-8);
            let rel = (analytic - numeric).abs() / denom;
            report.checked += 1;
            if rel > report.max_rel_error {
                report = GradCheckReport {
                    max_rel_error: rel,
                    worst_block: block,
                    worst_index: index,
                    analytic,
                    numeric,
                    checked: report.checked,
                };
            }
        }
    }
    Ok(report)
}
